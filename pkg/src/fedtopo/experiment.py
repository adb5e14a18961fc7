"""Full comparison runs: one config in, per-paradigm results out.

Fairness contract: every paradigm in a run consumes the same stratified
shards and the same initial parameters; their hashes go into the manifest so
a reader can verify the paradigms differed only in orchestration.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .config import ExperimentConfig, dump_config
from .data import (
    ClientShard,
    Dataset,
    normalize,
    partition_iid,
    split_validation,
    stratified_subset,
)
from .engine import (
    ModelArch,
    arch_fingerprint,
    default_arch,
    evaluate,
    init_params,
    predict,
)
from .idx import parse_idx_images, parse_idx_labels, read_idx_bytes
from .metrics import (
    ConfusionMatrix,
    MetricsReport,
    Stopwatch,
    confusion,
    report_from_confusion,
)
from .orchestrators import RUNNERS, RoundLog
from .params import ParamSet, dump_params

logger = logging.getLogger("fedtopo")

# stream tags for deriving independent sub-seeds from the experiment seed
_TAG_TRAIN_SUBSET = 1
_TAG_TEST_SUBSET = 2
_TAG_VALIDATION = 3
_TAG_PARTITION = 4
_TAG_INIT = 5


def _stream_seed(seed: int, tag: int) -> int:
    return int(np.random.SeedSequence((seed, tag)).generate_state(1, np.uint64)[0])


@dataclass
class ParadigmResult:
    paradigm: str
    global_params: ParamSet
    round_logs: list[RoundLog]
    matrix: ConfusionMatrix
    metrics: MetricsReport
    validation_accuracy: float | None


@dataclass
class ResultsBundle:
    config: ExperimentConfig
    arch: ModelArch
    results: list[ParadigmResult]
    config_hash: str
    shard_hash: str
    init_hash: str
    train_size: int
    test_size: int
    validation_size: int
    started_at: str


def _load_dataset(images_path: str, labels_path: str, name: str) -> Dataset:
    raw_images = parse_idx_images(read_idx_bytes(images_path))
    raw_labels = parse_idx_labels(read_idx_bytes(labels_path))
    return normalize(raw_images, raw_labels, name)


def _hash_shards(shards: list[ClientShard]) -> str:
    digest = hashlib.sha256()
    for shard in sorted(shards, key=lambda s: s.client_id):
        digest.update(shard.client_id.to_bytes(4, "little"))
        digest.update(np.ascontiguousarray(shard.indices, dtype="<i8").tobytes())
    return digest.hexdigest()


def hash_config_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass
class PreparedRun:
    """Everything shared by all paradigms of one experiment."""

    train: Dataset
    test: Dataset
    validation: Dataset | None
    shards: list[ClientShard]
    arch: ModelArch
    init: ParamSet
    config_hash: str
    shard_hash: str
    init_hash: str


def prepare_run(config: ExperimentConfig) -> PreparedRun:
    """Load, cap, split, partition, and initialize — identically for every paradigm."""
    seed = config.seed
    train_full = _load_dataset(config.train_images, config.train_labels, config.dataset)
    test_full = _load_dataset(config.test_images, config.test_labels, config.dataset)
    logger.info(
        "loaded %s: %d train / %d test", config.dataset, len(train_full), len(test_full)
    )

    train = train_full
    if config.train_subset:
        train = stratified_subset(
            train, config.train_subset, _stream_seed(seed, _TAG_TRAIN_SUBSET)
        )
    test = test_full
    if config.test_subset:
        test = stratified_subset(
            test, config.test_subset, _stream_seed(seed, _TAG_TEST_SUBSET)
        )
    validation = None
    if config.validation_fraction > 0:
        train, validation = split_validation(
            train, config.validation_fraction, _stream_seed(seed, _TAG_VALIDATION)
        )

    num_clients = next(iter(config.topologies.values())).num_clients
    shards = partition_iid(train, num_clients, _stream_seed(seed, _TAG_PARTITION))
    arch = default_arch()
    init = init_params(arch, _stream_seed(seed, _TAG_INIT))
    return PreparedRun(
        train=train,
        test=test,
        validation=validation,
        shards=shards,
        arch=arch,
        init=init,
        config_hash=hash_config_text(dump_config(config)),
        shard_hash=_hash_shards(shards),
        init_hash=hashlib.sha256(
            dump_params(init, arch_fingerprint(arch))
        ).hexdigest(),
    )


def run_experiment(config: ExperimentConfig, threads: int = 1) -> ResultsBundle:
    started_at = datetime.now(timezone.utc).isoformat()
    prepared = prepare_run(config)
    train, test, validation = prepared.train, prepared.test, prepared.validation
    shards, arch, init = prepared.shards, prepared.arch, prepared.init
    num_clients = next(iter(config.topologies.values())).num_clients

    results = []
    for paradigm in config.paradigms:
        topology = config.topologies[paradigm]
        runner = RUNNERS[paradigm]
        logger.info("running %s: %d clients, %d rounds", paradigm, num_clients, topology.rounds)
        build_watch = Stopwatch(f"{paradigm}-build")
        with build_watch:
            global_model, round_logs = runner(
                topology, arch, init, train, shards, test, threads=threads
            )
        classify_watch = Stopwatch(f"{paradigm}-classify")
        with classify_watch:
            predictions = predict(arch, global_model.params, test.images)
        matrix = confusion(predictions, test.labels)
        metrics = report_from_confusion(
            matrix, build_watch.seconds, classify_watch.seconds
        )
        val_acc = None
        if validation is not None:
            val_acc, _ = evaluate(
                arch, global_model.params, validation.images, validation.labels
            )
        logger.info(
            "%s finished: test acc %.4f, build %.2fs",
            paradigm,
            metrics.accuracy,
            build_watch.seconds,
        )
        results.append(
            ParadigmResult(
                paradigm=paradigm,
                global_params=global_model.params,
                round_logs=round_logs,
                matrix=matrix,
                metrics=metrics,
                validation_accuracy=val_acc,
            )
        )
    return ResultsBundle(
        config=config,
        arch=arch,
        results=results,
        config_hash=prepared.config_hash,
        shard_hash=prepared.shard_hash,
        init_hash=prepared.init_hash,
        train_size=len(train),
        test_size=len(test),
        validation_size=len(validation) if validation is not None else 0,
        started_at=started_at,
    )
