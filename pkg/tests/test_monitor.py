import json
import math

import numpy as np
import pytest

from kslogistic.bounds import BoundConstants, InitialNorms, ModelParams, compute_constants
from kslogistic.field import Domain2D
from kslogistic.monitor import (
    RecordBuilder,
    TRAJECTORY_COLUMNS,
    TrajectoryRecord,
    WindowTooShortError,
    check_gradv,
    check_l1,
    check_l2,
    check_odi,
    check_spacetime,
    ratio_diagnostics,
    read_trajectory_csv,
    run_all_checks,
    snapshot_norms,
    verdict_for,
    window_integrals,
    write_checks_json,
    write_trajectory_csv,
)
from kslogistic.solver import SolverConfig, make_initial, run

IC = InitialNorms(2.0, 4.0, 8.0, 3.0, 0.0)
PARAMS = ModelParams(chi=1.0, mu=1.0, r=1.0, omega_measure=1.0)
CONSTS = compute_constants(PARAMS, IC, c_gn=1.0, tau=1.0)


def synthetic_record(times, u_l2_sq=None, lapv=None, u_l1=None, gradv=None):
    """A hand-built record with controllable series (others zero)."""
    rb = RecordBuilder()
    n = len(times)
    z = np.zeros(n)
    series = {
        "u_l1": z if u_l1 is None else np.asarray(u_l1, float),
        "u_l2_sq": z if u_l2_sq is None else np.asarray(u_l2_sq, float),
        "u_l3": z,
        "u_linf": z,
        "gradv_l2_sq": z if gradv is None else np.asarray(gradv, float),
        "gradv_linf": z,
        "lapv_l2_sq": z if lapv is None else np.asarray(lapv, float),
        "v_linf": z,
    }
    for i, t in enumerate(times):
        rb.add(t, {k: float(v[i]) for k, v in series.items()})
    return rb.build()


class TestRecordBuilder:
    def test_cumulative_matches_trapezoid(self):
        times = np.array([0.0, 0.5, 1.0, 2.5])
        vals = np.array([1.0, 3.0, 2.0, 4.0])
        rec = synthetic_record(times, u_l2_sq=vals)
        expected = np.concatenate([[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(times))])
        np.testing.assert_allclose(rec.cum_u_l2_sq, expected, rtol=1e-15)

    def test_rejects_nonincreasing_times(self):
        with pytest.raises(ValueError):
            synthetic_record([0.0, 1.0, 1.0])

    def test_snapshot_norms_match_field_ops(self):
        from kslogistic.field import (
            Field2D, grad_norm_inf, grad_norm_l2_sq, laplacian_l2_sq, norm_lp,
        )

        d = Domain2D(1.0, 1.0, 16, 16)
        rng = np.random.default_rng(0)
        u, v = rng.random((16, 16)), rng.random((16, 16))
        ns = snapshot_norms(u, v, d)
        fu, fv = Field2D(d, u), Field2D(d, v)
        assert ns["u_l1"] == pytest.approx(norm_lp(fu, 1), rel=1e-14)
        assert ns["u_l2_sq"] == pytest.approx(norm_lp(fu, 2) ** 2, rel=1e-14)
        assert ns["u_l3"] == pytest.approx(norm_lp(fu, 3), rel=1e-14)
        assert ns["u_linf"] == norm_lp(fu, np.inf)
        assert ns["gradv_l2_sq"] == pytest.approx(grad_norm_l2_sq(fv), rel=1e-14)
        assert ns["gradv_linf"] == grad_norm_inf(fv)
        assert ns["lapv_l2_sq"] == pytest.approx(laplacian_l2_sq(fv), rel=1e-13)
        assert ns["v_linf"] == np.abs(v).max()


class TestPointwiseChecks:
    def test_pass_and_margin(self):
        rec = synthetic_record([0.0, 1.0, 2.0], u_l1=[1.0, 2.0, 1.5])
        e = check_l1(rec, CONSTS, slack=1.05)  # k1 = 3
        assert e.verdict == "pass"
        assert e.worst == 2.0
        assert e.time == 1.0
        assert e.margin == pytest.approx(1.5)

    def test_fail(self):
        rec = synthetic_record([0.0, 1.0, 2.0], u_l1=[1.0, 4.0, 1.0])
        assert check_l1(rec, CONSTS, slack=1.05).verdict == "fail"

    def test_zero_trajectory_passes_with_infinite_margin(self):
        rec = synthetic_record([0.0, 1.0, 2.0])
        e = check_gradv(rec, CONSTS, slack=1.05)
        assert e.verdict == "pass"
        assert math.isinf(e.margin)

    def test_vacuous_on_overflowed_bound(self):
        from dataclasses import replace

        rec = synthetic_record([0.0, 1.0, 2.0], u_l2_sq=[1.0, 2.0, 1.0])
        c = replace(CONSTS, l2_rhs=math.inf)
        assert check_l2(rec, c).verdict == "vacuous"

    def test_sensitivity_to_halved_bound(self):
        # a pass must flip to fail when the bound shrinks to worst/2
        rec = synthetic_record([0.0, 1.0, 2.0], u_l1=[1.0, 2.0, 1.5])
        e = check_l1(rec, CONSTS, slack=1.05)
        assert e.verdict == "pass"
        assert verdict_for(e.worst / 2.0, e.worst, 1.05) == "fail"


class TestSpacetimeChecks:
    def test_window_two_ways_agreement(self):
        rng = np.random.default_rng(1)
        times = np.cumsum(rng.uniform(0.01, 0.05, 200))
        times -= times[0]
        vals = rng.uniform(0.0, 3.0, 200)
        rec = synthetic_record(times, u_l2_sq=vals)
        tau = 1.0
        starts, wins = window_integrals(rec, rec.cum_u_l2_sq, tau)
        # oracle: direct trapezoid over the recorded samples in each window
        for s, w in zip(starts[::13], wins[::13]):
            j = int(np.searchsorted(times, s))
            k = int(np.searchsorted(times, s + tau + 1e-9, side="right")) - 1
            direct = np.trapezoid(vals[j : k + 1], times[j : k + 1])
            assert w == pytest.approx(direct, rel=1e-10, abs=1e-12)
            assert times[k] <= s + tau + 1e-9  # never overshoots the window

    def test_three_entries_and_bounds(self):
        times = np.linspace(0.0, 3.0, 31)
        rec = synthetic_record(times, u_l2_sq=np.ones(31), gradv=2 * np.ones(31), lapv=np.ones(31))
        entries = check_spacetime(rec, CONSTS, slack=1.05)
        names = [e.name for e in entries]
        assert names == ["window_u_l2_sq_vs_k3", "window_gradv_l2_sq_vs_k2", "window_lapv_l2_sq_vs_k4"]
        # unit integrand over tau=1 windows integrates to 1 against k3 = 6
        assert entries[0].worst == pytest.approx(1.0, rel=1e-12)
        assert all(e.verdict == "pass" for e in entries)

    def test_window_too_short(self):
        rec = synthetic_record([0.0, 0.2, 0.4], u_l2_sq=[1.0, 1.0, 1.0])
        with pytest.raises(WindowTooShortError):
            check_spacetime(rec, CONSTS, slack=1.05)


class TestOdiChecks:
    def test_equilibrium_record_passes(self):
        # constant y, zero z: derivative check reduces to 0 <= k6
        times = np.linspace(0.0, 2.0, 21)
        rec = synthetic_record(times, u_l2_sq=np.ones(21))
        deriv, gron = check_odi(rec, CONSTS, slack_rel=0.1)
        assert deriv.verdict == "pass"
        assert deriv.worst <= 0.0
        assert gron.verdict == "pass"
        assert gron.worst == pytest.approx(1.0, rel=1e-12)  # equality at t = 0

    def test_gronwall_equality_at_origin(self):
        times = np.linspace(0.0, 2.0, 21)
        rec = synthetic_record(times, u_l2_sq=np.exp(-times), lapv=0.5 * np.ones(21))
        _, gron = check_odi(rec, CONSTS, slack_rel=0.1)
        assert gron.worst >= 1.0 - 1e-12  # t = 0 gives exactly y0/y0

    def test_violating_record_fails(self):
        # y doubling every step is far steeper than k5*y*z + k6 allows
        times = np.linspace(0.0, 2.0, 21)
        rec = synthetic_record(times, u_l2_sq=4000.0 * 2.0 ** np.arange(21))
        deriv, _ = check_odi(rec, CONSTS, slack_rel=0.1)
        assert deriv.verdict == "fail"


class TestRatios:
    def test_zero_trajectory(self):
        rec = synthetic_record([0.0, 1.0])
        assert ratio_diagnostics(rec, CONSTS) == (0.0, 0.0)

    def test_overflowed_bound_gives_zero(self):
        from dataclasses import replace

        rec = synthetic_record([0.0, 1.0], u_l2_sq=[1.0, 1.0])
        c = replace(CONSTS, L=math.inf, N=math.inf)
        assert ratio_diagnostics(rec, c) == (0.0, 0.0)


class TestStrideInvariance:
    def test_worsts_stable_under_refined_recording(self):
        d = Domain2D(1.0, 1.0, 64, 64)
        u0 = make_initial("gaussian", d, width=0.1, mass=2.0)
        v0 = make_initial("constant", d, value=0.0)
        p = ModelParams(chi=5.0, mu=1.0, r=1.0, omega_measure=1.0)
        ic = InitialNorms.from_fields(u0, v0)
        c = compute_constants(p, ic, c_gn=2.0, tau=0.2)
        worsts = {}
        for stride in (50, 25):
            out = run(u0, v0, p, SolverConfig(t_end=0.5, record_every=stride))
            entries = [
                check_l1(out.record, c),
                check_gradv(out.record, c),
                *check_spacetime(out.record, c),
            ]
            worsts[stride] = np.array([e.worst for e in entries])
        np.testing.assert_allclose(worsts[50], worsts[25], rtol=1e-2)


class TestSerialization:
    def test_trajectory_roundtrip(self, tmp_path):
        times = np.linspace(0.0, 1.0, 7)
        rec = synthetic_record(times, u_l2_sq=np.sin(times) ** 2, lapv=np.cos(times) ** 2)
        path = tmp_path / "traj.csv"
        write_trajectory_csv(rec, path, meta={"run": 1})
        back = read_trajectory_csv(path)
        for name in TRAJECTORY_COLUMNS:
            attr = name if name != "time" else "times"
            np.testing.assert_array_equal(getattr(back, attr), getattr(rec, attr))

    def test_checks_json(self, tmp_path):
        rec = synthetic_record([0.0, 1.0, 2.0], u_l1=[1.0, 2.0, 1.0], u_l2_sq=[1.0, 1.0, 1.0])
        entries = run_all_checks(rec, CONSTS)
        path = tmp_path / "checks.json"
        write_checks_json(entries, path, ratios=(0.1, 0.2), meta={"seed": 0})
        doc = json.loads(path.read_text())
        assert {e["name"] for e in doc["checks"]} == {
            "u_l1_vs_k1", "gradv_l2_sq_vs_k2", "window_u_l2_sq_vs_k3",
            "window_gradv_l2_sq_vs_k2", "window_lapv_l2_sq_vs_k4",
            "odi_derivative", "odi_gronwall", "u_l2_sq_vs_l2_rhs",
        }
        assert doc["ratios"] == {"u_linf_over_L": 0.1, "v_w1inf_over_N": 0.2}
        for e in doc["checks"]:
            assert e["verdict"] in ("pass", "fail", "vacuous")
            # non-finite numbers must be serialized as strings, not bare Infinity
            for key in ("bound", "worst", "margin"):
                assert isinstance(e[key], (int, float, str))
        json.loads(path.read_text())  # strict JSON
