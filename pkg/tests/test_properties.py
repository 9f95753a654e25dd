"""Randomized structural properties (hypothesis)."""

import numpy as np
from hypothesis import given, settings, strategies as st

from common import random_dm
from twinlc import (
    DensityMatrix,
    FockSpace,
    OscillatorParams,
    annihilation,
    build_single,
    identity,
    p1,
    p2,
    sector_identity,
    steady_state,
    sync_strength,
    truncated_lowering,
    unweighted_lowering,
    unvec,
    vec,
    weighted_truncated_annihilation,
)

COMMON = dict(max_examples=25, deadline=None)


def rng_from(seed):
    return np.random.default_rng(seed)


@st.composite
def space_with_boundary(draw, min_cutoff=3, max_cutoff=20):
    n = draw(st.integers(min_cutoff, max_cutoff))
    # keep both sectors populated: the outer chain needs links above nc
    nc = draw(st.integers(1, n - 2))
    return FockSpace(n, nc)


class TestSectorPartitions:
    @given(space_with_boundary())
    @settings(**COMMON)
    def test_chains_partition_the_ladder(self, space):
        total = (
            truncated_lowering(space, "in").dense()
            + truncated_lowering(space, "out").dense()
        )
        assert np.array_equal(total, unweighted_lowering(space).dense())

    @given(space_with_boundary())
    @settings(**COMMON)
    def test_weighted_chains_partition_annihilation(self, space):
        total = (
            weighted_truncated_annihilation(space, "in").dense()
            + weighted_truncated_annihilation(space, "out").dense()
        )
        assert np.allclose(total, annihilation(space).dense(), atol=1e-14)

    @given(space_with_boundary())
    @settings(**COMMON)
    def test_sector_identities_resolve_identity(self, space):
        total = (
            sector_identity(space, "in").dense()
            + sector_identity(space, "out").dense()
        )
        assert np.array_equal(total, identity(space).dense())


def random_params(seed):
    r = rng_from(seed)
    return OscillatorParams(
        delta=float(r.uniform(-1, 1)),
        kerr=float(r.uniform(0, 0.4)),
        drive=complex(r.uniform(0, 0.8), r.uniform(-0.5, 0.5)),
        gamma1=float(r.uniform(0.2, 1.2)),
        gamma2=float(r.uniform(0.6, 3.0)),
        gamma3=float(r.uniform(0.0, 0.3)),
        gamma4=float(r.uniform(0.02, 0.15)),
    )


class TestSteadyStateProperties:
    @given(st.integers(0, 10_000))
    @settings(max_examples=12, deadline=None)
    def test_random_generator_steady_state(self, seed):
        p = random_params(seed)
        space = FockSpace(16)
        lv = build_single(p, space)
        rho = steady_state(lv)
        assert abs(np.trace(rho.mat) - 1.0) < 1e-12
        assert np.max(np.abs(rho.mat - rho.mat.conj().T)) < 1e-12
        evals = np.linalg.eigvalsh(rho.mat)
        assert evals.min() > -1e-8
        resid = np.linalg.norm(lv.matrix @ vec(rho.mat))
        assert resid < 1e-8


class TestDistributionInvariants:
    @given(st.integers(0, 10_000), st.integers(2, 12))
    @settings(**COMMON)
    def test_p1_integrates_to_zero(self, seed, d):
        rho = random_dm(d, rng_from(seed))
        assert abs(p1(rho).integral()) < 1e-9

    @given(st.integers(0, 10_000), st.integers(2, 5), st.integers(2, 5))
    @settings(**COMMON)
    def test_p2_integrates_to_zero(self, seed, da, db):
        rho = random_dm(da * db, rng_from(seed), dims=(da, db))
        assert abs(p2(rho).integral()) < 1e-9

    @given(st.integers(0, 10_000), st.integers(0, 719))
    @settings(**COMMON)
    def test_number_rotation_rolls_p1(self, seed, m):
        d = 8
        M = 720
        rho = random_dm(d, rng_from(seed))
        theta = m * 2 * np.pi / M
        u = np.exp(1j * theta * np.arange(d))
        rotated = DensityMatrix((d,), (u[:, None] * rho.mat) * u.conj()[None, :])
        base = p1(rho, M)
        rot = p1(rotated, M)
        # e^{i theta n} advances every phase by theta: values shift by m bins
        assert np.allclose(rot.values, np.roll(base.values, m), atol=1e-12)

    @given(st.integers(0, 10_000))
    @settings(**COMMON)
    def test_sync_strength_max_is_global_max(self, seed):
        rho = random_dm(9, rng_from(seed))
        dist = p1(rho)
        smax, argmax, n = sync_strength(dist)
        assert smax == np.max(dist.values)
        if n > 0:
            k = np.argmin(np.abs(dist.phases - argmax))
            span = dist.values.max() - dist.values.min()
            assert dist.values[k] > dist.values.max() - 0.01 * span


class TestVecRoundtrip:
    @given(st.integers(0, 10_000), st.integers(2, 9))
    @settings(**COMMON)
    def test_square(self, seed, d):
        r = rng_from(seed)
        m = r.normal(size=(d, d)) + 1j * r.normal(size=(d, d))
        assert np.array_equal(unvec(vec(m), (d,)), m)

    @given(st.integers(0, 10_000), st.integers(2, 4), st.integers(2, 4))
    @settings(**COMMON)
    def test_product_dims(self, seed, da, db):
        r = rng_from(seed)
        d = da * db
        m = r.normal(size=(d, d)) + 1j * r.normal(size=(d, d))
        assert np.array_equal(unvec(vec(m), (da, db)), m)
