"""Steady-state parameter sweeps and the blockade ratio scan."""

import numpy as np
import pytest

from common import vdp
from twinlc import (
    ConfigError,
    CoupledParams,
    FockSpace,
    OscillatorParams,
    SweepSpec,
    SweepResult,
    SweepRow,
    bistable_window,
    blockade_scan,
    build_single,
    expect,
    number,
    p1,
    run_sweep,
    steady_state,
    sync_strength,
)


def single_spec(**kw):
    base = dict(
        axis1=("delta", (0.0, 0.2)),
        fixed=vdp(gamma2=0.4, drive=0.6),
        measures=("p1", "mean_n"),
        cutoffs=15,
    )
    base.update(kw)
    return SweepSpec(**base)


STANDARD_PAIR = CoupledParams(
    OscillatorParams(gamma1=1.0, gamma2=2.5),
    OscillatorParams(gamma1=1.0, gamma2=2.5),
    coupling=1.0,
)


class TestSpecValidation:
    def test_empty_grid(self):
        with pytest.raises(ConfigError, match="empty"):
            single_spec(axis1=("delta", ()))

    def test_non_monotone_grid(self):
        with pytest.raises(ConfigError, match="monotone"):
            single_spec(axis1=("delta", (0.0, 1.0, 0.5)))

    def test_decreasing_grid_allowed(self):
        spec = single_spec(axis1=("delta", (1.0, 0.5, 0.0)))
        assert spec.axis1[1] == (1.0, 0.5, 0.0)

    def test_unknown_axis(self):
        with pytest.raises(ConfigError, match="axis"):
            single_spec(axis1=("detuning", (0.0,)))

    def test_unknown_measure(self):
        with pytest.raises(ConfigError, match="unknown measure"):
            single_spec(measures=("p3",))

    def test_coupled_measure_needs_coupled_params(self):
        with pytest.raises(ConfigError, match="coupled"):
            single_spec(measures=("p2",))

    def test_single_measure_rejected_on_coupled(self):
        with pytest.raises(ConfigError, match="single-oscillator"):
            single_spec(
                fixed=STANDARD_PAIR,
                axis1=("coupling", (0.5,)),
                measures=("p1",),
            )

    def test_coupled_axis_names(self):
        for name in ("coupling", "g", "delta_b", "gamma2_a", "ratio_gamma3"):
            single_spec(
                fixed=STANDARD_PAIR, axis1=(name, (0.5,)), measures=("p2",)
            )
        with pytest.raises(ConfigError):
            single_spec(
                fixed=STANDARD_PAIR, axis1=("gamma9_a", (0.5,)), measures=("p2",)
            )

    def test_grid_coerced_to_floats(self):
        spec = single_spec(axis1=("delta", (0, 1)))
        assert spec.axis1[1] == (0.0, 1.0)
        assert all(isinstance(v, float) for v in spec.axis1[1])

    def test_fingerprint_stable_and_sensitive(self):
        a = single_spec()
        b = single_spec()
        assert a.fingerprint() == b.fingerprint()
        assert a.fingerprint() != single_spec(cutoffs=16).fingerprint()
        assert a.fingerprint() != single_spec(
            axis1=("delta", (0.0, 0.3))
        ).fingerprint()


class TestRunSweep:
    def test_values_match_direct_solve(self):
        spec = single_spec()
        result = run_sweep(spec)
        for delta in (0.0, 0.2):
            p = vdp(gamma2=0.4, drive=0.6, delta=delta)
            space = FockSpace(15)
            rho = steady_state(build_single(p, space), tol=spec.tol)
            want_p1 = sync_strength(p1(rho))
            want_n = expect(number(space), rho).real
            got = {
                r.measure: r
                for r in result.rows
                if r.axis1 == delta
            }
            assert got["p1"].value == pytest.approx(want_p1[0], rel=1e-8)
            assert got["p1"].argmax == pytest.approx(want_p1[1], abs=1e-8)
            assert got["p1"].n_maxima == want_p1[2]
            assert got["mean_n"].value == pytest.approx(want_n, rel=1e-8)
            assert got["mean_n"].n_maxima == -1
            assert np.isnan(got["mean_n"].argmax)
            assert all(r.ok and r.error == "" for r in got.values())

    def test_row_order_axis2_fastest(self):
        spec = single_spec(
            axis1=("delta", (0.0, 0.1)),
            axis2=("drive", (0.3, 0.6)),
            measures=("mean_n",),
            cutoffs=10,
        )
        result = run_sweep(spec)
        coords = [(r.axis1, r.axis2) for r in result.rows]
        assert coords == [(0.0, 0.3), (0.0, 0.6), (0.1, 0.3), (0.1, 0.6)]
        # more drive, more photons
        vals = result.column("mean_n")
        assert vals[1] > vals[0] and vals[3] > vals[2]

    def test_warm_start_matches_cold(self):
        cold = run_sweep(single_spec())
        warm = run_sweep(single_spec(warm_start=True))
        for rc, rw in zip(cold.rows, rw_rows := warm.rows):
            assert rc.measure == rw.measure and rc.axis1 == rw.axis1
            assert rc.value == pytest.approx(rw.value, rel=1e-6, abs=1e-12)
        assert warm.provenance["warm_start"] is True

    def test_check_convergence_flags_rows(self):
        spec = single_spec(
            axis1=("delta", (0.0,)), measures=("mean_n",), cutoffs=16,
            check_convergence=True,
        )
        (row,) = run_sweep(spec).rows
        assert row.converged is True

    def test_point_failure_is_flagged_not_raised(self):
        spec = single_spec(axis1=("gamma2", (-0.5, 0.4)))
        result = run_sweep(spec)
        bad = [r for r in result.rows if r.axis1 == -0.5]
        good = [r for r in result.rows if r.axis1 == 0.4]
        assert len(bad) == 2
        assert all(not r.ok and "non-negative" in r.error for r in bad)
        assert all(np.isnan(r.value) for r in bad)
        assert all(r.ok for r in good)

    def test_measure_failure_is_per_row(self):
        # boundary at the cutoff leaves an empty outer sector
        spec = single_spec(
            measures=("p1", "p1_out", "mean_n"),
            axis1=("delta", (0.0,)),
            cutoffs=12,
            boundary=12,
        )
        rows = {r.measure: r for r in run_sweep(spec).rows}
        assert not rows["p1_out"].ok
        assert "sector" in rows["p1_out"].error
        assert rows["p1"].ok and rows["mean_n"].ok

    def test_ratio_axis_scales_oscillator_a(self):
        spec = SweepSpec(
            axis1=("ratio_gamma2", (0.8,)),
            fixed=STANDARD_PAIR,
            measures=("mean_n_a", "mean_n_b"),
            cutoffs=8,
        )
        rows = {r.measure: r for r in run_sweep(spec).rows}
        # weaker two-photon loss on A -> A holds more photons than B
        assert rows["mean_n_a"].value > rows["mean_n_b"].value

    def test_provenance_record(self):
        spec = single_spec()
        result = run_sweep(spec)
        prov = result.provenance
        assert prov["spec_fingerprint"] == spec.fingerprint()
        assert prov["axes"][0]["name"] == "delta"
        assert prov["axes"][0]["size"] == 2
        assert prov["measures"] == ["p1", "mean_n"]

    def test_table_and_column_accessors(self):
        result = run_sweep(single_spec())
        table = result.table()
        assert len(table) == len(result.rows)
        assert len(table[0]) == len(SweepResult.COLUMNS)
        assert result.column("mean_n").shape == (2,)
        assert result.column("p1", field="argmax").shape == (2,)


class TestBlockadeScan:
    def test_requires_ratio_axis(self):
        with pytest.raises(ConfigError, match="ratio"):
            blockade_scan(
                SweepSpec(
                    axis1=("coupling", (0.5,)),
                    fixed=STANDARD_PAIR,
                    measures=("p2",),
                    cutoffs=8,
                )
            )

    def test_requires_phase_measure(self):
        with pytest.raises(ConfigError, match="relative-phase"):
            blockade_scan(
                SweepSpec(
                    axis1=("ratio_gamma2", (1.0,)),
                    fixed=STANDARD_PAIR,
                    measures=("mean_n_a",),
                    cutoffs=8,
                )
            )

    def test_identical_pair_is_bistable(self):
        spec = SweepSpec(
            axis1=("ratio_gamma2", (0.9, 1.0, 1.1)),
            fixed=STANDARD_PAIR,
            measures=("p2",),
            cutoffs=8,
            warm_start=True,
        )
        result = blockade_scan(spec)
        flags = {
            r.axis1: r.value for r in result.rows if r.measure == "bistable"
        }
        assert set(flags) == {0.9, 1.0, 1.1}
        assert flags[1.0] == 1.0
        assert set(flags.values()) <= {0.0, 1.0}
        lo, hi = bistable_window(result)
        assert lo <= 1.0 <= hi

    def test_window_empty_when_nothing_bistable(self):
        rows = (
            SweepRow(0.9, np.nan, "bistable", 0.0, np.nan, -1, True, None, ""),
            SweepRow(1.1, np.nan, "bistable", 0.0, np.nan, -1, True, None, ""),
        )
        lo, hi = bistable_window(SweepResult(rows, {}))
        assert np.isnan(lo) and np.isnan(hi)
