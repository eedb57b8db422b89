"""Tests for application kernels, distortion, and the work counter."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jlproj.apply import WorkCounter, apply, distortion, distortion_batch
from jlproj.constructions import DenseTransform, sample_transform
from jlproj.core import (
    AchlioptasSparse,
    DenseGaussian,
    GraphSparse,
    InputVector,
    Rademacher,
    SeedSpec,
    sample_sparse_unit,
    sample_unit_sphere,
)

KINDS = [DenseGaussian(), Rademacher(), AchlioptasSparse(), GraphSparse(6)]


def _fixed_dense(entries):
    entries = np.asarray(entries, dtype=np.float64)
    k, d = entries.shape
    return DenseTransform(k=k, d=d, entries=entries, kind=DenseGaussian())


class TestApply:
    def test_hand_multiplication(self):
        """[[1,0,2],[0,-1,1]] applied to (1,1,1) gives (3, 0)."""
        t = _fixed_dense([[1.0, 0.0, 2.0], [0.0, -1.0, 1.0]])
        x = InputVector(dim=3, values=np.ones(3))
        assert np.array_equal(apply(t, x), np.array([3.0, 0.0]))

    def test_hand_multiplication_sparse_storage(self):
        t = _fixed_dense([[1.0, 0.0, 2.0], [0.0, -1.0, 1.0]])
        x = InputVector(dim=3, values=np.array([1.0, 1.0]), indices=np.array([0, 2]))
        assert np.array_equal(apply(t, x), np.array([3.0, 1.0]))

    @pytest.mark.parametrize("kind", KINDS, ids=lambda k: type(k).__name__)
    def test_zero_vector_maps_to_zero(self, kind):
        transform = sample_transform(kind, 10, 30, SeedSpec(0, 0))
        dense_zero = InputVector(dim=30, values=np.zeros(30))
        sparse_zero = InputVector(dim=30, values=np.zeros(2), indices=np.array([1, 5]))
        assert np.array_equal(apply(transform, dense_zero), np.zeros(10))
        assert np.array_equal(apply(transform, sparse_zero), np.zeros(10))

    def test_one_hot_through_graph_construction(self):
        """A one-hot input reproduces one column: s entries of +-1/sqrt(s), norm 1."""
        layout = sample_transform(GraphSparse(16), 50, 200, SeedSpec(1, 0))
        for i in (0, 17, 199):
            x = InputVector(dim=200, values=np.array([1.0]), indices=np.array([i]))
            y = apply(layout, x)
            assert np.count_nonzero(y) == 16
            assert np.all(np.isin(np.abs(y[y != 0.0]), 0.25))
            assert abs(float(y @ y) - 1.0) <= 1e-12

    def test_dimension_mismatch(self):
        transform = sample_transform(Rademacher(), 4, 8, SeedSpec(0, 1))
        with pytest.raises(ValueError, match="dimension"):
            apply(transform, InputVector(dim=9, values=np.zeros(9)))


class TestDistortion:
    def test_zero_transform_floors_at_minus_one(self):
        t = _fixed_dense(np.zeros((5, 12)))
        x = sample_unit_sphere(12, SeedSpec(2, 0))
        assert distortion(t, x) == -1.0

    def test_one_hot_zero_distortion(self):
        layout = sample_transform(GraphSparse(16), 50, 500, SeedSpec(2, 1))
        x = InputVector(dim=500, values=np.array([1.0]), indices=np.array([123]))
        assert abs(distortion(layout, x)) <= 1e-12

    def test_rejects_non_unit_input(self):
        t = sample_transform(DenseGaussian(), 5, 20, SeedSpec(2, 2))
        with pytest.raises(ValueError, match="unit"):
            distortion(t, InputVector(dim=20, values=np.full(20, 0.5)))

    def test_tolerates_round_trip_jitter(self):
        t = sample_transform(DenseGaussian(), 5, 20, SeedSpec(2, 3))
        x = sample_unit_sphere(20, SeedSpec(2, 4))
        jittered = InputVector(dim=20, values=x.values * (1.0 + 5e-10))
        distortion(t, jittered)

    def test_gaussian_unbiased(self):
        """Mean distortion over fresh transforms within 4 SE of 0."""
        deltas = []
        for i in range(60):
            t = sample_transform(DenseGaussian(), 50, 100, SeedSpec(3, 2 * i))
            x = sample_unit_sphere(100, SeedSpec(3, 2 * i + 1))
            deltas.append(distortion(t, x))
        deltas = np.array(deltas)
        assert abs(deltas.mean()) <= 4.0 * deltas.std(ddof=1) / math.sqrt(deltas.size)


class TestDistortionBatch:
    def test_empty(self):
        t = sample_transform(Rademacher(), 4, 8, SeedSpec(0, 2))
        assert distortion_batch(t, []) == []

    def test_singleton_matches_scalar_bitwise(self):
        t = sample_transform(AchlioptasSparse(), 20, 64, SeedSpec(0, 3))
        x = sample_unit_sphere(64, SeedSpec(0, 4))
        [sample] = distortion_batch(t, [x], transform_instance=9)
        assert sample.delta == distortion(t, x)
        assert sample.transform_instance == 9
        assert sample.vector_id == 0

    def test_order_and_ids(self):
        t = sample_transform(GraphSparse(3), 10, 40, SeedSpec(0, 5))
        xs = [sample_sparse_unit(40, 4, SeedSpec(1, i)) for i in range(5)]
        samples = distortion_batch(t, xs)
        assert [s.vector_id for s in samples] == list(range(5))
        for s, x in zip(samples, xs):
            assert s.delta == distortion(t, x)

    def test_mismatch_names_offending_index(self):
        t = sample_transform(Rademacher(), 4, 8, SeedSpec(0, 6))
        xs = [
            InputVector(dim=8, values=np.zeros(8)),
            InputVector(dim=7, values=np.zeros(7)),
        ]
        with pytest.raises(ValueError, match="index 1"):
            distortion_batch(t, xs)


class TestPathEquivalence:
    @pytest.mark.parametrize("kind", KINDS, ids=lambda k: type(k).__name__)
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_sparse_matches_densified(self, kind, seed):
        """Sparse-stored and densified inputs agree within 1e-12 per coordinate."""
        d = 300
        transform = sample_transform(kind, 24, d, SeedSpec(40 + seed, 0))
        x = sample_sparse_unit(d, 20, SeedSpec(40 + seed, 1))
        dense_x = InputVector(dim=d, values=x.to_dense())
        y_sparse = apply(transform, x)
        y_dense = apply(transform, dense_x)
        assert np.max(np.abs(y_sparse - y_dense)) <= 1e-12

    @given(
        log_c=st.floats(min_value=-20.0, max_value=20.0),
        negate=st.booleans(),
        kind_index=st.integers(min_value=0, max_value=len(KINDS) - 1),
    )
    @settings(max_examples=80, deadline=None)
    def test_scaling_invariance(self, log_c, negate, kind_index):
        """|R(cx)|^2 equals c^2 |Rx|^2 within 8 ulps for c in [2^-20, 2^20]."""
        c = -(2.0**log_c) if negate else 2.0**log_c
        transform = sample_transform(KINDS[kind_index], 16, 64, SeedSpec(50, kind_index))
        x = sample_unit_sphere(64, SeedSpec(50, 99))
        y = apply(transform, x)
        scaled = apply(transform, InputVector(dim=64, values=c * x.values))
        lhs = float(scaled @ scaled)
        rhs = c * c * float(y @ y)
        assert abs(lhs - rhs) <= 8.0 * np.spacing(max(abs(lhs), abs(rhs)))


class TestWorkCounter:
    def test_graph_sparse_fast_path_touches_t_times_s(self):
        layout = sample_transform(GraphSparse(16), 50, 1000, SeedSpec(6, 0))
        x = sample_sparse_unit(1000, 5, SeedSpec(6, 1))
        counter = WorkCounter()
        apply(layout, x, counter)
        assert counter.entries_touched == 5 * 16

    def test_graph_sparse_dense_input(self):
        layout = sample_transform(GraphSparse(4), 20, 100, SeedSpec(6, 2))
        counter = WorkCounter()
        apply(layout, sample_unit_sphere(100, SeedSpec(6, 3)), counter)
        assert counter.entries_touched == 100 * 4

    def test_dense_transform_counts(self):
        transform = sample_transform(Rademacher(), 20, 100, SeedSpec(6, 4))
        counter = WorkCounter()
        apply(transform, sample_unit_sphere(100, SeedSpec(6, 5)), counter)
        apply(transform, sample_sparse_unit(100, 7, SeedSpec(6, 6)), counter)
        assert counter.entries_touched == 20 * 100 + 20 * 7

    def test_counter_accumulates_through_distortion(self):
        layout = sample_transform(GraphSparse(16), 50, 1000, SeedSpec(6, 7))
        xs = [sample_sparse_unit(1000, 5, SeedSpec(7, i)) for i in range(3)]
        counter = WorkCounter()
        distortion_batch(layout, xs, counter=counter)
        assert counter.entries_touched == 3 * 5 * 16
