import dataclasses

import numpy as np
import pytest

from fedtopo.data import Dataset, partition_iid, shard_arrays
from fedtopo.engine import init_params, train_local
from fedtopo.errors import (
    EmptyTestSetError,
    InvalidGroupingError,
    LengthMismatchError,
)
from fedtopo.federation import derive_client_seed, fedavg
from fedtopo.orchestrators import (
    RUNNERS,
    TopologyConfig,
    evaluate_round,
    run_afl,
    run_cfl,
    run_hfl,
)
from fedtopo.params import ParamSet
from tests.conftest import make_balanced_dataset


@pytest.fixture()
def small_world(tiny_arch):
    train = make_balanced_dataset(40, seed=70, side=8)
    test = make_balanced_dataset(20, seed=71, side=8)
    shards = partition_iid(train, num_clients=4, seed=72)
    init = init_params(tiny_arch, 73)
    return tiny_arch, train, test, shards, init


def base_config(paradigm, **kw):
    defaults = dict(
        paradigm=paradigm,
        num_clients=4,
        rounds=2,
        local_epochs=1,
        lr=0.05,
        batch_size=8,
        seed=5,
        num_groups=2,
        client_fraction=0.5,
    )
    defaults.update(kw)
    return TopologyConfig(**defaults)


def manual_train(arch, params, train, shard, config, round_index):
    images, labels = shard_arrays(train, shard)
    seed = derive_client_seed(config.seed, round_index, shard.client_id)
    trained, _ = train_local(
        arch,
        params,
        images,
        labels,
        epochs=config.local_epochs,
        lr=config.lr,
        batch_size=config.batch_size,
        seed=seed,
    )
    return trained


def test_config_validation():
    with pytest.raises(ValueError):
        base_config("star").validate()
    with pytest.raises(ValueError):
        base_config("hfl", rounds=0).validate()
    with pytest.raises(ValueError):
        base_config("hfl", lr=-0.1).validate()
    with pytest.raises(ValueError):
        base_config("afl", client_fraction=0.0).validate()
    with pytest.raises(ValueError):
        base_config("afl", batch_size=0).validate()
    with pytest.raises(InvalidGroupingError):
        base_config("hfl", num_groups=5).validate()
    with pytest.raises(InvalidGroupingError):
        base_config("hfl", num_groups=0).validate()
    with pytest.raises(ValueError):
        base_config("cfl", cfl_integration="median").validate()
    base_config("cfl").validate()


def test_shard_count_must_match(small_world):
    arch, train, test, shards, init = small_world
    with pytest.raises(LengthMismatchError):
        run_hfl(base_config("hfl", num_clients=5), arch, init, train, shards, test)


def test_round_logs_well_formed(small_world):
    arch, train, test, shards, init = small_world
    for paradigm, runner in RUNNERS.items():
        config = base_config(paradigm, rounds=3)
        model, logs = runner(config, arch, init, train, shards, test)
        assert model.round == 3
        assert [log.round_index for log in logs] == [0, 1, 2]
        assert all(log.paradigm == paradigm for log in logs)
        assert all(log.seconds > 0 for log in logs)
        assert all(0.0 <= log.test_accuracy <= 1.0 for log in logs)
        assert all(0.0 <= log.train_accuracy <= 1.0 for log in logs)
        assert all(log.train_loss >= 0.0 for log in logs)


def test_hfl_single_group_equals_afl_full_participation(small_world):
    """With one group and full participation the two hierarchies collapse to
    the same flat average, so results must agree to the bit."""
    arch, train, test, shards, init = small_world
    hfl_model, hfl_logs = run_hfl(
        base_config("hfl", num_groups=1), arch, init, train, shards, test
    )
    afl_model, afl_logs = run_afl(
        base_config("afl", client_fraction=1.0), arch, init, train, shards, test
    )
    assert hfl_model.params.allclose(afl_model.params, atol=1e-6)
    assert hfl_model.params.equal_bits(afl_model.params)
    for a, b in zip(hfl_logs, afl_logs):
        assert a.test_accuracy == b.test_accuracy
        assert a.train_loss == b.train_loss


def test_hfl_two_tier_matches_manual_replay(small_world):
    arch, train, test, shards, init = small_world
    config = base_config("hfl", num_groups=2, rounds=2)
    model, _ = run_hfl(config, arch, init, train, shards, test)

    by_id = {s.client_id: s for s in shards}
    current = init
    for round_index in range(config.rounds):
        locals_ = {
            cid: manual_train(arch, current, train, by_id[cid], config, round_index)
            for cid in range(4)
        }
        group_params, group_totals = [], []
        for g in range(2):
            members = [cid for cid in range(4) if cid % 2 == g]
            group_params.append(
                fedavg(
                    [locals_[cid] for cid in members],
                    [by_id[cid].n_c for cid in members],
                    members,
                )
            )
            group_totals.append(sum(by_id[cid].n_c for cid in members))
        current = fedavg(group_params, group_totals, range(2))
    assert model.params.equal_bits(current)


def test_afl_every_peer_holds_the_merge(small_world):
    arch, train, test, shards, init = small_world
    seen = []

    def hook(round_index, participants, merged):
        seen.append(
            (
                round_index,
                len(participants),
                all(c.params.equal_bits(merged) for c in participants),
                len({id(c.params) for c in participants} | {id(merged)}),
            )
        )

    config = base_config("afl", client_fraction=0.5, rounds=3)
    run_afl(config, arch, init, train, shards, test, round_hook=hook)
    assert [s[0] for s in seen] == [0, 1, 2]
    for _, count, identical, distinct_objects in seen:
        assert count == 2  # ceil(0.5 * 4)
        assert identical
        # copies, not aliases of one array set
        assert distinct_objects == count + 1


def test_afl_single_client_is_plain_sgd_chain(tiny_arch):
    train = make_balanced_dataset(10, seed=80, side=8)
    test = make_balanced_dataset(10, seed=81, side=8)
    shards = partition_iid(train, num_clients=1, seed=82)
    init = init_params(tiny_arch, 83)
    config = base_config("afl", num_clients=1, client_fraction=1.0, num_groups=1, rounds=3)
    model, _ = run_afl(config, tiny_arch, init, train, shards, test)

    current = init
    for round_index in range(3):
        current = manual_train(tiny_arch, current, train, shards[0], config, round_index)
    assert model.params.equal_bits(current)


def test_cfl_chain_matches_manual_replay(small_world):
    arch, train, test, shards, init = small_world
    config = base_config("cfl", rounds=2)
    model, _ = run_cfl(config, arch, init, train, shards, test)

    ordered = sorted(shards, key=lambda s: s.client_id)
    current = init
    for round_index in range(config.rounds):
        order = np.random.default_rng([config.seed, round_index]).permutation(4)
        for position in order:
            current = manual_train(
                arch, current, train, ordered[position], config, round_index
            )
    assert model.params.equal_bits(current)


def test_cfl_average_integration_matches_manual_replay(small_world):
    arch, train, test, shards, init = small_world
    config = base_config("cfl", rounds=2, cfl_integration="average")
    model, _ = run_cfl(config, arch, init, train, shards, test)

    ordered = sorted(shards, key=lambda s: s.client_id)
    current = init
    for round_index in range(config.rounds):
        order = np.random.default_rng([config.seed, round_index]).permutation(4)
        weight_total = 0
        for position in order:
            shard = ordered[position]
            trained = manual_train(
                arch, current.copy(), train, shard, config, round_index
            )
            weight_total += shard.n_c
            frac = shard.n_c / weight_total
            current = ParamSet(
                (name, a + frac * (b - a))
                for (name, a), (_, b) in zip(current.items(), trained.items())
            )
    assert model.params.equal_bits(current)

    pass_model, _ = run_cfl(
        base_config("cfl", rounds=2), arch, init, train, shards, test
    )
    assert not pass_model.params.equal_bits(model.params)


def test_cfl_order_seed_changes_the_chain(small_world):
    arch, train, test, shards, init = small_world
    default, _ = run_cfl(base_config("cfl", seed=0), arch, init, train, shards, test)
    reseeded, _ = run_cfl(
        base_config("cfl", seed=0, client_order_seed=99), arch, init, train, shards, test
    )
    assert not default.params.equal_bits(reseeded.params)


def test_rerun_is_bitwise_deterministic(small_world):
    arch, train, test, shards, init = small_world
    for paradigm, runner in RUNNERS.items():
        config = base_config(paradigm)
        first, logs_a = runner(config, arch, init, train, shards, test)
        second, logs_b = runner(config, arch, init, train, shards, test)
        assert first.params.equal_bits(second.params), paradigm
        for a, b in zip(logs_a, logs_b):
            assert a.test_accuracy == b.test_accuracy


def test_threads_do_not_change_results(small_world):
    arch, train, test, shards, init = small_world
    for paradigm, runner in RUNNERS.items():
        config = base_config(paradigm)
        serial, _ = runner(config, arch, init, train, shards, test, threads=1)
        pooled, _ = runner(config, arch, init, train, shards, test, threads=3)
        assert serial.params.equal_bits(pooled.params), paradigm


def test_lr_zero_freezes_every_paradigm(small_world):
    arch, train, test, shards, init = small_world
    for paradigm, runner in RUNNERS.items():
        config = base_config(paradigm, lr=0.0)
        model, logs = runner(config, arch, init, train, shards, test)
        assert model.params.equal_bits(init), paradigm
        assert len({log.test_accuracy for log in logs}) == 1


def test_afl_trains_only_the_sample(small_world):
    arch, train, test, shards, init = small_world
    trained_ids = []

    def hook(round_index, participants, merged):
        trained_ids.append({c.client_id for c in participants})

    config = base_config("afl", client_fraction=0.25, rounds=6)
    run_afl(config, arch, init, train, shards, test, round_hook=hook)
    assert all(len(ids) == 1 for ids in trained_ids)
    assert len(set().union(*trained_ids)) > 1  # rotation over rounds


def test_evaluate_round_constant_predictor(tiny_arch):
    test = make_balanced_dataset(30, seed=90, side=8)
    zeros = ParamSet(
        (n, np.zeros_like(a)) for n, a in init_params(tiny_arch, 0).items()
    )
    acc, seconds = evaluate_round(tiny_arch, zeros, test)
    assert acc == 0.1  # always predicts class 0; labels are balanced
    assert seconds > 0


def test_evaluate_round_rejects_empty(tiny_arch):
    empty = Dataset(
        images=np.zeros((0, 8, 8, 1), dtype=np.float32),
        labels=np.zeros(0, dtype=np.int64),
        name="mnist",
    )
    with pytest.raises(EmptyTestSetError):
        evaluate_round(tiny_arch, init_params(tiny_arch, 0), empty)


def test_config_is_frozen():
    config = base_config("hfl")
    with pytest.raises(dataclasses.FrozenInstanceError):
        config.rounds = 5
