"""Client bookkeeping, weighted parameter averaging, and client sampling.

The averaging rule is sample-proportional: each contribution is weighted by
n_c / sum(n_k). Accumulation happens in float64 regardless of storage dtype
and the summation order is fixed by ascending client id, so joint
permutations of the inputs cannot change the result bitwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import ClientShard
from .errors import (
    EmptyInputError,
    EmptyPopulationError,
    LengthMismatchError,
    ZeroTotalWeightError,
)
from .params import ParamSet


@dataclass
class ClientState:
    """One simulated participant: private shard plus current local model."""

    client_id: int
    shard: ClientShard
    params: ParamSet

    @property
    def n_c(self) -> int:
        return self.shard.n_c


@dataclass
class GlobalModel:
    params: ParamSet
    round: int = 0


def aggregation_weights(sample_counts: Sequence[int]) -> np.ndarray:
    """Normalized nonnegative weights n_c / sum(n_k), float64."""
    if len(sample_counts) == 0:
        raise EmptyInputError("no sample counts")
    counts = np.asarray(sample_counts, dtype=np.float64)
    if (counts < 0).any():
        raise ValueError("sample counts must be nonnegative")
    total = counts.sum()
    if total == 0:
        raise ZeroTotalWeightError("all sample counts are zero")
    return counts / total


def fedavg(
    param_sets: Sequence[ParamSet],
    sample_counts: Sequence[int],
    client_ids: Sequence[int] | None = None,
) -> ParamSet:
    """Weighted average of parameter sets; output dtype matches the inputs.

    ``client_ids`` pins the summation order (ascending id); when omitted the
    given order is used as-is with synthetic ids 0..n-1.
    """
    if len(param_sets) == 0:
        raise EmptyInputError("no parameter sets to aggregate")
    if len(param_sets) != len(sample_counts):
        raise LengthMismatchError(
            f"{len(param_sets)} parameter sets vs {len(sample_counts)} counts"
        )
    if client_ids is None:
        client_ids = range(len(param_sets))
    elif len(client_ids) != len(param_sets):
        raise LengthMismatchError(
            f"{len(param_sets)} parameter sets vs {len(client_ids)} client ids"
        )
    elif len(set(client_ids)) != len(param_sets):
        raise ValueError("client ids must be unique; duplicates make the order ambiguous")
    order = sorted(range(len(param_sets)), key=lambda i: client_ids[i])
    first = param_sets[order[0]]
    for ps in param_sets:
        first.require_same_structure(ps)
    weights = aggregation_weights([sample_counts[i] for i in order])

    accum = [np.zeros(a.shape, dtype=np.float64) for a in first.arrays()]
    for weight, index in zip(weights, order):
        for acc, arr in zip(accum, param_sets[index].arrays()):
            acc += weight * arr
    dtype = first.arrays()[0].dtype
    return ParamSet(
        (name, acc.astype(dtype)) for name, acc in zip(first.names, accum)
    )


def sample_clients(
    clients: Sequence[ClientState], fraction: float, seed: int, round_index: int
) -> list[ClientState]:
    """Uniform without-replacement sample of ceil(fraction * n) clients.

    Deterministic per (seed, round_index). fraction = 1.0 returns the clients
    in their original order; otherwise the sample is sorted by client id.
    """
    if len(clients) == 0:
        raise EmptyPopulationError("no clients to sample from")
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    k = min(len(clients), math.ceil(len(clients) * fraction))
    if k == len(clients):
        return list(clients)
    rng = np.random.default_rng([seed, round_index])
    picked = rng.choice(len(clients), size=k, replace=False)
    return [clients[i] for i in sorted(picked, key=lambda i: clients[i].client_id)]


def broadcast(global_model: GlobalModel, clients: Sequence[ClientState]) -> None:
    """Give every client an independent copy of the global parameters."""
    for client in clients:
        global_model.params.require_same_structure(client.params)
        client.params = global_model.params.copy()


def derive_client_seed(base_seed: int, round_index: int, client_id: int) -> int:
    """Stable per-(round, client) training seed, shared by all orchestrators."""
    seq = np.random.SeedSequence((base_seed, round_index, client_id))
    return int(seq.generate_state(1, np.uint64)[0])
