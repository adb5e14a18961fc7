"""The three federated training protocols as deterministic round loops.

- hfl: two tiers — clients train, each group's edge node averages its
  members, the top server averages the group models by group sample totals.
- afl: a per-round client subset trains and merges by a simulated exact
  all-reduce (every sampled peer ends the round holding the same average).
- cfl: the model walks a seeded per-round chain of clients, each training
  from its predecessor's output; the last client's model becomes global.

All protocols draw per-(round, client) training seeds from the same
derivation, so paradigms differ only in orchestration.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .data import ClientShard, Dataset, shard_arrays
from .engine import ModelArch, evaluate, predict, train_local
from .errors import (
    EmptyRoundSampleError,
    EmptyTestSetError,
    InvalidGroupingError,
    LengthMismatchError,
)
from .federation import (
    ClientState,
    GlobalModel,
    broadcast,
    derive_client_seed,
    fedavg,
    sample_clients,
)
from .metrics import Stopwatch, accuracy as matrix_accuracy, confusion
from .params import ParamSet

PARADIGMS = ("hfl", "afl", "cfl")
CFL_INTEGRATIONS = ("pass", "average")

RoundHook = Callable[[int, list[ClientState], ParamSet], None]


@dataclass(frozen=True)
class TopologyConfig:
    paradigm: str
    num_clients: int = 10
    rounds: int = 10
    local_epochs: int = 2
    lr: float = 0.01
    batch_size: int = 32
    seed: int = 0
    num_groups: int = 2  # hfl only
    client_fraction: float = 0.5  # afl only
    client_order_seed: int | None = None  # cfl only
    cfl_integration: str = "pass"  # cfl only; "average" is unvalidated

    def validate(self) -> None:
        if self.paradigm not in PARADIGMS:
            raise ValueError(f"unknown paradigm {self.paradigm!r}")
        if self.num_clients < 1:
            raise ValueError("num_clients must be >= 1")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.local_epochs < 1:
            raise ValueError("local_epochs must be >= 1")
        if self.lr < 0:
            raise ValueError("lr must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0.0 < self.client_fraction <= 1.0:
            raise ValueError("client_fraction must lie in (0, 1]")
        if self.num_groups < 1 or self.num_groups > self.num_clients:
            raise InvalidGroupingError(
                f"num_groups {self.num_groups} incompatible with "
                f"{self.num_clients} clients"
            )
        if self.cfl_integration not in CFL_INTEGRATIONS:
            raise ValueError(f"unknown cfl integration {self.cfl_integration!r}")


@dataclass(frozen=True)
class RoundLog:
    round_index: int
    paradigm: str
    train_accuracy: float
    train_loss: float
    test_accuracy: float
    seconds: float


def _make_clients(
    init: ParamSet, shards: Sequence[ClientShard], config: TopologyConfig
) -> list[ClientState]:
    if len(shards) != config.num_clients:
        raise LengthMismatchError(
            f"{len(shards)} shards for {config.num_clients} clients"
        )
    return [
        ClientState(client_id=s.client_id, shard=s, params=init.copy())
        for s in sorted(shards, key=lambda s: s.client_id)
    ]


def _train_clients(
    arch: ModelArch,
    clients: Sequence[ClientState],
    train_set: Dataset,
    config: TopologyConfig,
    round_index: int,
    threads: int,
) -> None:
    """Run local training on every given client, in place, optionally pooled."""

    def work(client: ClientState) -> ParamSet:
        images, labels = shard_arrays(train_set, client.shard)
        seed = derive_client_seed(config.seed, round_index, client.client_id)
        new_params, _ = train_local(
            arch,
            client.params,
            images,
            labels,
            epochs=config.local_epochs,
            lr=config.lr,
            batch_size=config.batch_size,
            seed=seed,
        )
        return new_params

    if threads > 1 and len(clients) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, clients))
        for client, params in zip(clients, results):
            client.params = params
    else:
        for client in clients:
            client.params = work(client)


def _round_metrics(
    arch: ModelArch,
    params: ParamSet,
    train_set: Dataset,
    participants: Sequence[ClientState],
    test_set: Dataset,
) -> tuple[float, float, float]:
    union = np.concatenate([c.shard.indices for c in participants])
    train_acc, train_loss = evaluate(
        arch, params, train_set.images[union], train_set.labels[union]
    )
    test_acc, _ = evaluate(arch, params, test_set.images, test_set.labels)
    return train_acc, train_loss, test_acc


def run_hfl(
    config: TopologyConfig,
    arch: ModelArch,
    init: ParamSet,
    train_set: Dataset,
    shards: Sequence[ClientShard],
    test_set: Dataset,
    round_hook: RoundHook | None = None,
    threads: int = 1,
) -> tuple[GlobalModel, list[RoundLog]]:
    config.validate()
    clients = _make_clients(init, shards, config)
    # groups are assigned round-robin by client id, so sizes differ by <= 1
    groups = [
        [c for c in clients if c.client_id % config.num_groups == g]
        for g in range(config.num_groups)
    ]
    if any(not g for g in groups):
        raise InvalidGroupingError("every group needs at least one client")
    global_model = GlobalModel(params=init.copy(), round=0)
    logs = []
    for round_index in range(config.rounds):
        watch = Stopwatch(f"hfl-round-{round_index}").start()
        broadcast(global_model, clients)
        _train_clients(arch, clients, train_set, config, round_index, threads)
        group_params = []
        group_totals = []
        for members in groups:
            group_params.append(
                fedavg(
                    [c.params for c in members],
                    [c.n_c for c in members],
                    [c.client_id for c in members],
                )
            )
            group_totals.append(sum(c.n_c for c in members))
        merged = fedavg(group_params, group_totals, range(len(group_params)))
        global_model = GlobalModel(params=merged, round=round_index + 1)
        if round_hook is not None:
            round_hook(round_index, clients, merged)
        train_acc, train_loss, test_acc = _round_metrics(
            arch, merged, train_set, clients, test_set
        )
        watch.stop()
        logs.append(
            RoundLog(round_index, "hfl", train_acc, train_loss, test_acc, watch.seconds)
        )
    return global_model, logs


def run_afl(
    config: TopologyConfig,
    arch: ModelArch,
    init: ParamSet,
    train_set: Dataset,
    shards: Sequence[ClientShard],
    test_set: Dataset,
    round_hook: RoundHook | None = None,
    threads: int = 1,
) -> tuple[GlobalModel, list[RoundLog]]:
    config.validate()
    clients = _make_clients(init, shards, config)
    global_model = GlobalModel(params=init.copy(), round=0)
    logs = []
    for round_index in range(config.rounds):
        watch = Stopwatch(f"afl-round-{round_index}").start()
        sampled = sample_clients(
            clients, config.client_fraction, config.seed, round_index
        )
        if not sampled:
            raise EmptyRoundSampleError(f"round {round_index} sampled no clients")
        broadcast(global_model, sampled)
        _train_clients(arch, sampled, train_set, config, round_index, threads)
        merged = fedavg(
            [c.params for c in sampled],
            [c.n_c for c in sampled],
            [c.client_id for c in sampled],
        )
        # simulated all-reduce: every sampled peer ends up with its own
        # identical copy of the aggregate
        for client in sampled:
            client.params = merged.copy()
        global_model = GlobalModel(params=merged, round=round_index + 1)
        if round_hook is not None:
            round_hook(round_index, sampled, merged)
        train_acc, train_loss, test_acc = _round_metrics(
            arch, merged, train_set, sampled, test_set
        )
        watch.stop()
        logs.append(
            RoundLog(round_index, "afl", train_acc, train_loss, test_acc, watch.seconds)
        )
    return global_model, logs


def run_cfl(
    config: TopologyConfig,
    arch: ModelArch,
    init: ParamSet,
    train_set: Dataset,
    shards: Sequence[ClientShard],
    test_set: Dataset,
    round_hook: RoundHook | None = None,
    threads: int = 1,  # accepted for signature parity; the chain is sequential
) -> tuple[GlobalModel, list[RoundLog]]:
    config.validate()
    clients = _make_clients(init, shards, config)
    order_seed = (
        config.client_order_seed if config.client_order_seed is not None else config.seed
    )
    global_model = GlobalModel(params=init.copy(), round=0)
    logs = []
    for round_index in range(config.rounds):
        watch = Stopwatch(f"cfl-round-{round_index}").start()
        order = np.random.default_rng([order_seed, round_index]).permutation(
            len(clients)
        )
        current = global_model.params
        weight_total = 0
        for position in order:
            client = clients[position]
            images, labels = shard_arrays(train_set, client.shard)
            seed = derive_client_seed(config.seed, round_index, client.client_id)
            trained, _ = train_local(
                arch,
                current if config.cfl_integration == "pass" else current.copy(),
                images,
                labels,
                epochs=config.local_epochs,
                lr=config.lr,
                batch_size=config.batch_size,
                seed=seed,
            )
            client.params = trained
            if config.cfl_integration == "pass":
                current = trained
            else:  # running sample-weighted mean of the chain's outputs
                weight_total += client.n_c
                frac = client.n_c / weight_total
                current = ParamSet(
                    (name, a + frac * (b - a))
                    for (name, a), (_, b) in zip(current.items(), trained.items())
                )
        global_model = GlobalModel(params=current, round=round_index + 1)
        if round_hook is not None:
            round_hook(round_index, clients, current)
        train_acc, train_loss, test_acc = _round_metrics(
            arch, current, train_set, clients, test_set
        )
        watch.stop()
        logs.append(
            RoundLog(round_index, "cfl", train_acc, train_loss, test_acc, watch.seconds)
        )
    return global_model, logs


RUNNERS = {"hfl": run_hfl, "afl": run_afl, "cfl": run_cfl}


def evaluate_round(
    arch: ModelArch, params: ParamSet, test_set: Dataset
) -> tuple[float, float]:
    """(test accuracy, wall seconds) of one full test-set prediction pass."""
    if len(test_set) == 0:
        raise EmptyTestSetError("empty test set")
    with Stopwatch("classification") as watch:
        predictions = predict(arch, params, test_set.images)
    acc = matrix_accuracy(confusion(predictions, test_set.labels))
    return acc, watch.seconds
