"""Experiment configuration: INI-like text format, strict validation, defaults.

Grammar (documented in the README):

    # comment            ; comment lines also start with ';'
    [section]
    key = value

No inline comments, no line continuations. Unknown sections or keys are
rejected with the offending name; syntax problems report 1-based line and
column. Sections and keys:

    [experiment]  dataset, train_images, train_labels, test_images,
                  test_labels, paradigms, train_subset, test_subset,
                  validation_fraction, seed, output_dir, partition
    [topology]    num_clients, rounds, local_epochs, lr, batch_size
    [hfl]         num_groups
    [afl]         client_fraction
    [cfl]         client_order_seed, integration

``partition`` is reserved: only "iid" is accepted (non-IID splits are a
config hook, deliberately unimplemented).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    ConfigParseError,
    ConfigValidationError,
    InvalidGroupingError,
    MissingConfigError,
    MissingDataError,
)
from .orchestrators import PARADIGMS, TopologyConfig

DATASETS = ("mnist", "fashion-mnist")

# standard distribution filenames for both datasets; files may be gzipped
_FILE_ROLES = {
    "train_images": ("train-images-idx3-ubyte", "train-images-idx3-ubyte.gz"),
    "train_labels": ("train-labels-idx1-ubyte", "train-labels-idx1-ubyte.gz"),
    "test_images": ("t10k-images-idx3-ubyte", "t10k-images-idx3-ubyte.gz"),
    "test_labels": ("t10k-labels-idx1-ubyte", "t10k-labels-idx1-ubyte.gz"),
}

DATA_DIR_ENV = "FEDTOPO_DATA_DIR"

_KNOWN_KEYS = {
    "experiment": {
        "dataset",
        "train_images",
        "train_labels",
        "test_images",
        "test_labels",
        "paradigms",
        "train_subset",
        "test_subset",
        "validation_fraction",
        "seed",
        "output_dir",
        "partition",
    },
    "topology": {"num_clients", "rounds", "local_epochs", "lr", "batch_size"},
    "hfl": {"num_groups"},
    "afl": {"client_fraction"},
    "cfl": {"client_order_seed", "integration"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str = "mnist"
    train_images: str = ""
    train_labels: str = ""
    test_images: str = ""
    test_labels: str = ""
    paradigms: tuple[str, ...] = PARADIGMS
    train_subset: int = 6000  # 0 disables the cap
    test_subset: int = 1000  # 0 disables the cap
    validation_fraction: float = 0.1  # 0 skips the validation carve-out
    seed: int = 0
    output_dir: str = "results"
    partition: str = "iid"
    topologies: dict[str, TopologyConfig] = field(default_factory=dict)


def parse_config_text(text: str) -> dict[str, dict[str, str]]:
    """Parse the raw grammar into {section: {key: value}} with strict syntax."""
    sections: dict[str, dict[str, str]] = {}
    current: str | None = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        stripped = line.strip()
        if not stripped or stripped[0] in "#;":
            continue
        indent = len(line) - len(line.lstrip())
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ConfigParseError(
                    "section header missing closing ']'", line_no, len(line) + 1
                )
            name = stripped[1:-1].strip()
            if not name:
                raise ConfigParseError("empty section name", line_no, indent + 2)
            if name in sections:
                raise ConfigParseError(f"duplicate section [{name}]", line_no, indent + 1)
            sections[name] = {}
            current = name
            continue
        eq = line.find("=")
        if eq < 0:
            raise ConfigParseError("expected 'key = value'", line_no, indent + 1)
        key = line[:eq].strip()
        if not key:
            raise ConfigParseError("empty key before '='", line_no, eq + 1)
        value = line[eq + 1 :].strip()
        if current is None:
            raise ConfigParseError(
                f"key {key!r} appears before any [section]", line_no, indent + 1
            )
        if key in sections[current]:
            raise ConfigParseError(
                f"duplicate key {key!r} in [{current}]", line_no, indent + 1
            )
        sections[current][key] = value
    return sections


def _check_known(sections: dict[str, dict[str, str]]) -> None:
    for section, entries in sections.items():
        if section not in _KNOWN_KEYS:
            raise ConfigValidationError(section, "unknown section")
        for key in entries:
            if key not in _KNOWN_KEYS[section]:
                raise ConfigValidationError(f"{section}.{key}", "unknown key")


def _to_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigValidationError(key, f"expected an integer, got {value!r}") from None


def _to_float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigValidationError(key, f"expected a number, got {value!r}") from None


def _resolve_data_file(role: str, explicit: str, dataset: str, base_dir: Path) -> str:
    """Locate one dataset file: explicit path, else conventional search dirs."""
    if explicit:
        path = Path(explicit)
        if not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise MissingDataError(f"{role}: no such file {path}")
        return str(path)
    search_dirs: list[Path] = []
    env_dir = os.environ.get(DATA_DIR_ENV)
    if env_dir:
        search_dirs += [Path(env_dir), Path(env_dir) / dataset]
    search_dirs += [Path("data"), Path("data") / dataset]
    for directory in search_dirs:
        for name in _FILE_ROLES[role]:
            candidate = directory / name
            if candidate.exists():
                return str(candidate)
    tried = ", ".join(str(d) for d in search_dirs)
    raise MissingDataError(
        f"{role}: not configured and no {_FILE_ROLES[role][0]} under any of: {tried} "
        f"(set {DATA_DIR_ENV} or pass explicit paths)"
    )


def build_config(
    sections: dict[str, dict[str, str]],
    base_dir: Path,
    overrides: dict[str, str] | None = None,
) -> ExperimentConfig:
    """Validate parsed text, apply defaults and overrides, resolve data paths."""
    _check_known(sections)
    exp = dict(sections.get("experiment", {}))
    topo = dict(sections.get("topology", {}))
    hfl = dict(sections.get("hfl", {}))
    afl = dict(sections.get("afl", {}))
    cfl = dict(sections.get("cfl", {}))
    for key, value in (overrides or {}).items():
        if key not in _KNOWN_KEYS["experiment"]:
            raise ConfigValidationError(key, "unknown override")
        exp[key] = str(value)

    dataset = exp.get("dataset", "mnist")
    if dataset not in DATASETS:
        raise ConfigValidationError(
            "experiment.dataset", f"must be one of {DATASETS}, got {dataset!r}"
        )
    partition = exp.get("partition", "iid")
    if partition != "iid":
        raise ConfigValidationError(
            "experiment.partition",
            f"only 'iid' is implemented, got {partition!r}",
        )
    paradigm_text = exp.get("paradigms", ",".join(PARADIGMS))
    paradigms = tuple(p.strip().lower() for p in paradigm_text.split(",") if p.strip())
    if not paradigms:
        raise ConfigValidationError("experiment.paradigms", "no paradigms listed")
    for p in paradigms:
        if p not in PARADIGMS:
            raise ConfigValidationError(
                "experiment.paradigms", f"unknown paradigm {p!r}"
            )
    if len(set(paradigms)) != len(paradigms):
        raise ConfigValidationError("experiment.paradigms", "duplicate paradigm")

    train_subset = _to_int("experiment.train_subset", exp.get("train_subset", "6000"))
    test_subset = _to_int("experiment.test_subset", exp.get("test_subset", "1000"))
    if train_subset < 0 or test_subset < 0:
        raise ConfigValidationError(
            "experiment.train_subset", "subset caps must be >= 0 (0 disables)"
        )
    validation_fraction = _to_float(
        "experiment.validation_fraction", exp.get("validation_fraction", "0.1")
    )
    if not 0.0 <= validation_fraction < 1.0:
        raise ConfigValidationError(
            "experiment.validation_fraction", "must lie in [0, 1)"
        )
    seed = _to_int("experiment.seed", exp.get("seed", "0"))
    if seed < 0:
        raise ConfigValidationError("experiment.seed", "seed must be >= 0")

    shared = dict(
        num_clients=_to_int("topology.num_clients", topo.get("num_clients", "10")),
        rounds=_to_int("topology.rounds", topo.get("rounds", "10")),
        local_epochs=_to_int("topology.local_epochs", topo.get("local_epochs", "2")),
        lr=_to_float("topology.lr", topo.get("lr", "0.01")),
        batch_size=_to_int("topology.batch_size", topo.get("batch_size", "32")),
        seed=seed,
    )
    order_seed_text = cfl.get("client_order_seed", "")
    if order_seed_text and _to_int("cfl.client_order_seed", order_seed_text) < 0:
        raise ConfigValidationError("cfl.client_order_seed", "seed must be >= 0")
    topologies = {}
    for p in paradigms:
        topologies[p] = TopologyConfig(
            paradigm=p,
            num_groups=_to_int("hfl.num_groups", hfl.get("num_groups", "2")),
            client_fraction=_to_float(
                "afl.client_fraction", afl.get("client_fraction", "0.5")
            ),
            client_order_seed=(
                _to_int("cfl.client_order_seed", order_seed_text)
                if order_seed_text
                else None
            ),
            cfl_integration=cfl.get("integration", "pass"),
            **shared,
        )
        try:
            topologies[p].validate()
        except (ValueError, InvalidGroupingError) as exc:
            raise ConfigValidationError(f"topology ({p})", str(exc)) from None

    resolved = {
        role: _resolve_data_file(role, exp.get(role, ""), dataset, base_dir)
        for role in _FILE_ROLES
    }
    return ExperimentConfig(
        dataset=dataset,
        paradigms=paradigms,
        train_subset=train_subset,
        test_subset=test_subset,
        validation_fraction=validation_fraction,
        seed=seed,
        output_dir=exp.get("output_dir", "results"),
        partition=partition,
        topologies=topologies,
        **resolved,
    )


def load_config(
    path: str | Path, overrides: dict[str, str] | None = None
) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError as exc:
        raise MissingConfigError(f"no such config file: {path}") from exc
    except OSError as exc:
        raise MissingConfigError(f"cannot read config file {path}: {exc}") from exc
    return build_config(parse_config_text(text), path.parent, overrides)


def dump_config(config: ExperimentConfig) -> str:
    """Serialize with every effective value explicit; reload gives an equal config."""
    any_topo = next(iter(config.topologies.values()))
    lines = [
        "[experiment]",
        f"dataset = {config.dataset}",
        f"train_images = {config.train_images}",
        f"train_labels = {config.train_labels}",
        f"test_images = {config.test_images}",
        f"test_labels = {config.test_labels}",
        f"paradigms = {','.join(config.paradigms)}",
        f"train_subset = {config.train_subset}",
        f"test_subset = {config.test_subset}",
        f"validation_fraction = {config.validation_fraction!r}",
        f"seed = {config.seed}",
        f"output_dir = {config.output_dir}",
        f"partition = {config.partition}",
        "",
        "[topology]",
        f"num_clients = {any_topo.num_clients}",
        f"rounds = {any_topo.rounds}",
        f"local_epochs = {any_topo.local_epochs}",
        f"lr = {any_topo.lr!r}",
        f"batch_size = {any_topo.batch_size}",
        "",
        "[hfl]",
        f"num_groups = {any_topo.num_groups}",
        "",
        "[afl]",
        f"client_fraction = {any_topo.client_fraction!r}",
        "",
        "[cfl]",
        f"integration = {any_topo.cfl_integration}",
    ]
    if any_topo.client_order_seed is not None:
        lines.append(f"client_order_seed = {any_topo.client_order_seed}")
    return "\n".join(lines) + "\n"
