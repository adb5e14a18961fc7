import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_balanced_dataset
from fedtopo.data import (
    normalize,
    partition_iid,
    split_validation,
    stratified_subset,
)
from fedtopo.errors import (
    CountMismatchError,
    DegenerateFractionError,
    TooManyClientsError,
)
from fedtopo.idx import LabelSet, RawImageSet


def _raw_set(values):
    pixels = np.asarray(values, dtype=np.uint8).reshape(1, 28, 28)
    return RawImageSet(count=1, rows=28, cols=28, pixels=pixels)


def test_normalize_values_exact():
    pixels = np.zeros((1, 28, 28), dtype=np.uint8)
    pixels[0, 0, 0] = 255
    pixels[0, 0, 1] = 51
    raw = RawImageSet(count=1, rows=28, cols=28, pixels=pixels)
    labels = LabelSet(count=1, labels=np.array([3], dtype=np.uint8))
    ds = normalize(raw, labels, "mnist")
    assert ds.images[0, 0, 0, 0] == 1.0
    assert ds.images[0, 0, 1, 0] == np.float32(51 / 255)
    assert ds.images[0, 1, 0, 0] == 0.0
    assert ds.images.dtype == np.float32
    assert ds.labels.tolist() == [3]


def test_normalize_bounds_and_recovery():
    rng = np.random.default_rng(5)
    pixels = rng.integers(0, 256, size=(4, 28, 28), dtype=np.uint8)
    raw = RawImageSet(count=4, rows=28, cols=28, pixels=pixels)
    labels = LabelSet(count=4, labels=np.zeros(4, dtype=np.uint8))
    ds = normalize(raw, labels, "mnist")
    assert float(ds.images.min()) >= 0.0
    assert float(ds.images.max()) <= 1.0
    recovered = np.round(ds.images[..., 0] * 255).astype(np.uint8)
    assert np.array_equal(recovered, pixels)


def test_normalize_count_mismatch():
    raw = _raw_set(np.zeros(28 * 28))
    labels = LabelSet(count=2, labels=np.zeros(2, dtype=np.uint8))
    with pytest.raises(CountMismatchError):
        normalize(raw, labels, "mnist")


def test_partition_balanced_100_into_10():
    ds = make_balanced_dataset(100, seed=0)
    shards = partition_iid(ds, 10, seed=1)
    assert len(shards) == 10
    for shard in shards:
        assert shard.n_c == 10
        counts = np.bincount(ds.labels[shard.indices], minlength=10)
        assert counts.tolist() == [1] * 10


def test_partition_single_client_is_identity():
    ds = make_balanced_dataset(40, seed=2)
    (shard,) = partition_iid(ds, 1, seed=9)
    assert shard.client_id == 0
    assert np.array_equal(shard.indices, np.arange(40))


def test_partition_deterministic():
    ds = make_balanced_dataset(50, seed=3)
    a = partition_iid(ds, 7, seed=4)
    b = partition_iid(ds, 7, seed=4)
    for sa, sb in zip(a, b):
        assert np.array_equal(sa.indices, sb.indices)


def test_partition_too_many_clients():
    ds = make_balanced_dataset(10, seed=0)
    with pytest.raises(TooManyClientsError):
        partition_iid(ds, 11, seed=0)
    with pytest.raises(TooManyClientsError):
        partition_iid(ds, 0, seed=0)


@settings(max_examples=30, deadline=None)
@given(
    n=st.integers(10, 120),
    clients=st.integers(1, 10),
    seed=st.integers(0, 2**32 - 1),
)
def test_partition_exhaustive_disjoint_stratified(n, clients, seed):
    ds = make_balanced_dataset(n, seed=seed % 1000, side=4)
    shards = partition_iid(ds, clients, seed)
    merged = np.concatenate([s.indices for s in shards])
    # exhaustive and disjoint: the multiset of indices is exactly 0..n-1
    assert np.array_equal(np.sort(merged), np.arange(n))
    table = np.stack(
        [np.bincount(ds.labels[s.indices], minlength=10) for s in shards]
    )
    assert int((table.max(axis=0) - table.min(axis=0)).max()) <= 1
    totals = table.sum(axis=1)
    assert int(totals.max() - totals.min()) <= 1


def test_split_validation_balanced_100():
    ds = make_balanced_dataset(100, seed=1)
    train, val = split_validation(ds, 0.1, seed=2)
    assert len(train) == 90 and len(val) == 10
    assert np.bincount(val.labels, minlength=10).tolist() == [1] * 10
    # disjoint and exhaustive over the parent sizes
    assert len(train) + len(val) == len(ds)


def test_split_validation_deterministic_and_disjoint():
    ds = make_balanced_dataset(60, seed=4)
    t1, v1 = split_validation(ds, 0.25, seed=5)
    t2, v2 = split_validation(ds, 0.25, seed=5)
    assert np.array_equal(t1.images, t2.images)
    assert np.array_equal(v1.labels, v2.labels)
    # no shared rows between the two sides
    t_rows = {bytes(img.tobytes()) for img in t1.images}
    v_rows = {bytes(img.tobytes()) for img in v1.images}
    assert not (t_rows & v_rows)


def test_split_validation_degenerate():
    ds = make_balanced_dataset(100, seed=1)
    with pytest.raises(DegenerateFractionError):
        split_validation(ds, 0.001, seed=0)
    with pytest.raises(DegenerateFractionError):
        split_validation(ds, 0.0, seed=0)
    tiny = make_balanced_dataset(2, seed=1)
    with pytest.raises(DegenerateFractionError):
        split_validation(tiny, 0.999, seed=0)


def test_stratified_subset_proportional():
    ds = make_balanced_dataset(200, seed=6)
    sub = stratified_subset(ds, 50, seed=7)
    assert len(sub) == 50
    assert np.bincount(sub.labels, minlength=10).tolist() == [5] * 10


def test_stratified_subset_cap_above_size_is_identity():
    ds = make_balanced_dataset(30, seed=8)
    assert stratified_subset(ds, 100, seed=0) is ds


def test_stratified_subset_deterministic():
    ds = make_balanced_dataset(80, seed=9)
    a = stratified_subset(ds, 33, seed=10)
    b = stratified_subset(ds, 33, seed=10)
    assert np.array_equal(a.images, b.images)
    assert len(a) == 33
