import numpy as np
import pytest

from fedtopo.data import Dataset
from fedtopo.engine import (
    Conv,
    Dense,
    Flatten,
    MaxPool,
    ModelArch,
    ReLU,
    SoftmaxOutput,
)
from fedtopo.synth import write_corpus


@pytest.fixture(scope="session")
def tiny_arch() -> ModelArch:
    """Small but structurally complete stack: conv, pool, relu, dense."""
    return ModelArch(
        layers=(Conv(2), ReLU(), MaxPool(), Flatten(), Dense(10), SoftmaxOutput()),
        input_shape=(8, 8, 1),
    )


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    """Small synthetic IDX corpus shared across test modules."""
    directory = tmp_path_factory.mktemp("corpus")
    write_corpus(directory, train_count=600, test_count=200, seed=11)
    return directory


def make_balanced_dataset(n: int, seed: int, side: int = 28) -> Dataset:
    """Random-pixel dataset with labels cycling 0..9 (balanced when 10 | n)."""
    rng = np.random.default_rng(seed)
    images = rng.random((n, side, side, 1), dtype=np.float32)
    labels = np.arange(n, dtype=np.int64) % 10
    return Dataset(images=images, labels=labels, name="mnist")


@pytest.fixture()
def balanced_dataset():
    return make_balanced_dataset


def write_config(path, data_dir, **overrides) -> str:
    """Write a config file pointing at a corpus dir; returns the path."""
    experiment = {
        "train_images": str(data_dir / "train-images-idx3-ubyte"),
        "train_labels": str(data_dir / "train-labels-idx1-ubyte"),
        "test_images": str(data_dir / "t10k-images-idx3-ubyte"),
        "test_labels": str(data_dir / "t10k-labels-idx1-ubyte"),
    }
    topology = {}
    hfl, afl, cfl = {}, {}, {}
    sections = {
        "experiment": experiment,
        "topology": topology,
        "hfl": hfl,
        "afl": afl,
        "cfl": cfl,
    }
    topo_keys = {"num_clients", "rounds", "local_epochs", "lr", "batch_size"}
    for key, value in overrides.items():
        if key in topo_keys:
            topology[key] = value
        elif key == "num_groups":
            hfl[key] = value
        elif key == "client_fraction":
            afl[key] = value
        elif key in ("client_order_seed", "integration"):
            cfl[key] = value
        else:
            experiment[key] = value
    lines = []
    for section, entries in sections.items():
        if not entries:
            continue
        lines.append(f"[{section}]")
        lines += [f"{k} = {v}" for k, v in entries.items()]
        lines.append("")
    path.write_text("\n".join(lines))
    return path
