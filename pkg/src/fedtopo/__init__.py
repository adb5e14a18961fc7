"""Federated-learning topology simulator.

Three orchestration paradigms — hierarchical (hfl), aggregated (afl), and
continual (cfl) — run over the same from-scratch CNN engine, stratified IID
shards, and shared initial parameters, so measured differences come from
orchestration alone.
"""

from .config import ExperimentConfig, dump_config, load_config
from .data import ClientShard, Dataset, normalize, partition_iid, split_validation
from .engine import (
    ModelArch,
    TrainReport,
    default_arch,
    evaluate,
    forward,
    init_params,
    loss_and_grad,
    predict,
    sgd_step,
    train_local,
)
from .errors import ConfigError, DataError, FedtopoError
from .experiment import ResultsBundle, prepare_run, run_experiment
from .federation import ClientState, GlobalModel, broadcast, fedavg, sample_clients
from .idx import parse_idx_images, parse_idx_labels, read_idx_bytes
from .metrics import ConfusionMatrix, MetricsReport, Stopwatch, confusion
from .orchestrators import (
    PARADIGMS,
    RoundLog,
    TopologyConfig,
    evaluate_round,
    run_afl,
    run_cfl,
    run_hfl,
)
from .params import ParamSet
from .report import write_bundle

__version__ = "0.1.0"

__all__ = [
    "ClientShard",
    "ClientState",
    "ConfigError",
    "ConfusionMatrix",
    "DataError",
    "Dataset",
    "ExperimentConfig",
    "FedtopoError",
    "GlobalModel",
    "MetricsReport",
    "ModelArch",
    "PARADIGMS",
    "ParamSet",
    "ResultsBundle",
    "RoundLog",
    "Stopwatch",
    "TopologyConfig",
    "TrainReport",
    "broadcast",
    "confusion",
    "default_arch",
    "dump_config",
    "evaluate",
    "evaluate_round",
    "fedavg",
    "forward",
    "init_params",
    "load_config",
    "loss_and_grad",
    "normalize",
    "parse_idx_images",
    "parse_idx_labels",
    "partition_iid",
    "predict",
    "prepare_run",
    "read_idx_bytes",
    "run_afl",
    "run_cfl",
    "run_experiment",
    "run_hfl",
    "sample_clients",
    "sgd_step",
    "split_validation",
    "train_local",
    "write_bundle",
]
