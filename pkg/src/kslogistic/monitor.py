"""Norm time series and verification of the a-priori estimates.

A TrajectoryRecord holds the norms the estimates speak about
(|u|_L1, |u|_L2^2, |u|_L3, |u|_inf, |grad v|_L2^2, |grad v|_inf,
|lap v|_L2^2, |v|_inf) together with running trapezoid integrals of the
squared quantities.  The check_* functions compare a record against a
BoundConstants instance and return CheckEntry verdicts with numeric
margins:

  * pointwise bounds  |u|_L1 <= k1  and  |grad v|_L2^2 <= k2,
  * sliding-window space-time bounds (integral over [t, t+tau] of
    |u|_L2^2, |grad v|_L2^2, |lap v|_L2^2 against k3/k2/k4 * max{tau,1}),
  * the differential inequality y' <= k5 y z + k6 for
    y = |u|_L2^2 + 4 eps / C_GN^2, z = |lap v|_L2^2, plus its integrated
    exponential form anchored at t = 0 (evaluated in log space so huge
    exponents stay comparable),
  * the uniform-in-time L2 bound.

Discretization error is absorbed by a multiplicative slack per check;
bounds that overflowed to +inf yield the verdict "vacuous".
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bounds import BoundConstants
from .field import Domain2D

TRAJECTORY_COLUMNS = (
    "time",
    "u_l1",
    "u_l2_sq",
    "u_l3",
    "u_linf",
    "gradv_l2_sq",
    "gradv_linf",
    "lapv_l2_sq",
    "v_linf",
    "cum_u_l2_sq",
    "cum_gradv_l2_sq",
    "cum_lapv_l2_sq",
)

_SERIES = TRAJECTORY_COLUMNS[1:9]


class WindowTooShortError(ValueError):
    """The record spans less than one window length tau."""


def snapshot_norms(u: np.ndarray, v: np.ndarray, d: Domain2D) -> dict:
    """All recorded norms of a (u, v) snapshot, from raw value arrays."""
    area = d.cell_area
    au = np.abs(u)
    u2 = au * au
    gx = (v[1:, :] - v[:-1, :]) / d.hx
    gy = (v[:, 1:] - v[:, :-1]) / d.hy
    vp = np.pad(v, 1, mode="edge")
    lap = (vp[2:, 1:-1] - 2.0 * v + vp[:-2, 1:-1]) / d.hx**2 + (
        vp[1:-1, 2:] - 2.0 * v + vp[1:-1, :-2]
    ) / d.hy**2
    return {
        "u_l1": float(au.sum()) * area,
        "u_l2_sq": float(u2.sum()) * area,
        "u_l3": (float((u2 * au).sum()) * area) ** (1.0 / 3.0),
        "u_linf": float(au.max()),
        "gradv_l2_sq": (float((gx * gx).sum()) + float((gy * gy).sum())) * area,
        "gradv_linf": max(float(np.abs(gx).max()), float(np.abs(gy).max())),
        "lapv_l2_sq": float((lap * lap).sum()) * area,
        "v_linf": float(np.abs(v).max()),
    }


@dataclass(frozen=True)
class TrajectoryRecord:
    """Time series of norms plus cumulative trapezoid integrals."""

    times: np.ndarray
    u_l1: np.ndarray
    u_l2_sq: np.ndarray
    u_l3: np.ndarray
    u_linf: np.ndarray
    gradv_l2_sq: np.ndarray
    gradv_linf: np.ndarray
    lapv_l2_sq: np.ndarray
    v_linf: np.ndarray
    cum_u_l2_sq: np.ndarray
    cum_gradv_l2_sq: np.ndarray
    cum_lapv_l2_sq: np.ndarray

    def __post_init__(self):
        if len(self.times) < 1:
            raise ValueError("empty trajectory record")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("record times must be strictly increasing")

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def __len__(self) -> int:
        return len(self.times)


class RecordBuilder:
    """Accumulates per-time norm rows and finishes into a TrajectoryRecord."""

    def __init__(self):
        self._times: list[float] = []
        self._rows: dict[str, list[float]] = {k: [] for k in _SERIES}

    def add(self, t: float, norms: dict) -> None:
        self._times.append(float(t))
        for k in _SERIES:
            self._rows[k].append(norms[k])

    def build(self) -> TrajectoryRecord:
        times = np.asarray(self._times)
        series = {k: np.asarray(v) for k, v in self._rows.items()}

        def cum_trapz(y):
            if len(times) == 1:
                return np.zeros(1)
            inc = 0.5 * (y[1:] + y[:-1]) * np.diff(times)
            return np.concatenate([[0.0], np.cumsum(inc)])

        return TrajectoryRecord(
            times=times,
            **series,
            cum_u_l2_sq=cum_trapz(series["u_l2_sq"]),
            cum_gradv_l2_sq=cum_trapz(series["gradv_l2_sq"]),
            cum_lapv_l2_sq=cum_trapz(series["lapv_l2_sq"]),
        )


@dataclass(frozen=True)
class CheckEntry:
    """One verified inequality: its bound, the worst observation, a verdict."""

    name: str
    bound: float
    worst: float
    time: float
    margin: float
    verdict: str

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "bound": _jsonable(self.bound),
            "worst": _jsonable(self.worst),
            "time": self.time,
            "margin": _jsonable(self.margin),
            "verdict": self.verdict,
        }


def verdict_for(bound: float, worst: float, slack: float) -> str:
    """pass iff worst <= bound*slack; vacuous for an overflowed bound."""
    if math.isinf(bound):
        return "vacuous"
    return "pass" if worst <= bound * slack else "fail"


def _entry(name: str, bound: float, worst: float, time: float, slack: float) -> CheckEntry:
    margin = math.inf if worst == 0.0 else bound / worst
    return CheckEntry(name, bound, worst, time, margin, verdict_for(bound, worst, slack))


def _series_entry(name, rec, values, bound, slack):
    i = int(np.argmax(values))
    return _entry(name, bound, float(values[i]), float(rec.times[i]), slack)


def check_l1(rec: TrajectoryRecord, c: BoundConstants, slack: float = 1.05) -> CheckEntry:
    """sup_t |u|_L1 <= k1 (constant-free)."""
    return _series_entry("u_l1_vs_k1", rec, rec.u_l1, c.k1, slack)


def check_gradv(rec: TrajectoryRecord, c: BoundConstants, slack: float = 1.05) -> CheckEntry:
    """sup_t |grad v|_L2^2 <= k2 (constant-free)."""
    return _series_entry("gradv_l2_sq_vs_k2", rec, rec.gradv_l2_sq, c.k2, slack)


def window_integrals(rec: TrajectoryRecord, cum: np.ndarray, tau: float):
    """Trapezoid integrals over [t, t+tau] for every admissible start t.

    Windows are anchored to record times: the endpoint is the last record
    time inside t+tau, so the value is an exact difference of cumulative
    integrals (and, the integrand being nonnegative, never overshoots the
    true tau-window).
    """
    t_last = rec.times[-1]
    tol = 1e-9 * max(1.0, abs(t_last), tau)
    mask = rec.times + tau <= t_last + tol
    if not mask.any():
        raise WindowTooShortError(
            f"record spans {t_last - rec.times[0]}, shorter than tau={tau}"
        )
    starts = rec.times[mask]
    ends = np.searchsorted(rec.times, starts + tau + tol, side="right") - 1
    vals = cum[ends] - cum[mask.nonzero()[0]]
    return starts, vals


def check_spacetime(
    rec: TrajectoryRecord, c: BoundConstants, slack: float = 1.05
) -> list[CheckEntry]:
    """Sliding-window bounds on the three space-time integrals."""
    cap = max(c.tau, 1.0)
    out = []
    for name, cum, bound in (
        ("window_u_l2_sq_vs_k3", rec.cum_u_l2_sq, c.k3 * cap),
        ("window_gradv_l2_sq_vs_k2", rec.cum_gradv_l2_sq, c.k2 * cap),
        ("window_lapv_l2_sq_vs_k4", rec.cum_lapv_l2_sq, c.k4 * cap),
    ):
        starts, vals = window_integrals(rec, cum, c.tau)
        i = int(np.argmax(vals))
        out.append(_entry(name, bound, float(vals[i]), float(starts[i]), slack))
    return out


def check_odi(
    rec: TrajectoryRecord, c: BoundConstants, slack_rel: float = 0.1
) -> list[CheckEntry]:
    """The differential inequality and its integrated exponential form.

    Both are reported as ratios against bound 1: the discrete derivative
    (y_{n+1}-y_n)/dt over k5*y_n*z_n + k6, and y(t) over the t=0-anchored
    exponential envelope.  The envelope is evaluated in log space; its
    exponent routinely exceeds the float range.
    """
    y = rec.u_l2_sq + 4.0 * c.epsilon / c.c_gn**2
    z = rec.lapv_l2_sq
    entries = []

    if len(rec) > 1:
        dts = np.diff(rec.times)
        dydt = np.diff(y) / dts
        rhs = c.k5 * y[:-1] * z[:-1] + c.k6
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(rhs > 0.0, dydt / rhs, np.where(dydt > 0.0, np.inf, -np.inf))
        i = int(np.argmax(ratios))
        entries.append(_entry("odi_derivative", 1.0, float(ratios[i]), float(rec.times[i]), 1.0 + slack_rel))
    else:
        entries.append(_entry("odi_derivative", 1.0, 0.0, float(rec.times[0]), 1.0 + slack_rel))

    # Gronwall envelope: y(t) <= exp(k5 Z(t)) * (y(0) + k6 * T(t)) where
    # Z = int z and T = int exp(-k5 Z); log form avoids exp overflow.
    zint = rec.cum_lapv_l2_sq
    damp = np.exp(-c.k5 * zint)
    if len(rec) > 1:
        inc = 0.5 * (damp[1:] + damp[:-1]) * np.diff(rec.times)
        tint = np.concatenate([[0.0], np.cumsum(inc)])
    else:
        tint = np.zeros(1)
    log_env = c.k5 * zint + np.log(y[0] + c.k6 * tint)
    ratios = np.exp(np.log(y) - log_env)
    i = int(np.argmax(ratios))
    entries.append(_entry("odi_gronwall", 1.0, float(ratios[i]), float(rec.times[i]), 1.0 + slack_rel))
    return entries


def check_l2(rec: TrajectoryRecord, c: BoundConstants, slack: float = 1.10) -> CheckEntry:
    """sup_t |u|_L2^2 against the uniform-in-time right-hand side."""
    return _series_entry("u_l2_sq_vs_l2_rhs", rec, rec.u_l2_sq, c.l2_rhs, slack)


def ratio_diagnostics(rec: TrajectoryRecord, c: BoundConstants) -> tuple[float, float]:
    """(sup |u|_inf / L, sup max(|v|_inf, |grad v|_inf) / N).

    The theorem's constant in front of L and N is existential, so these
    are diagnostics to compare across runs, not pass/fail checks.  An
    overflowed bound yields ratio 0.
    """
    sup_u = float(rec.u_linf.max())
    sup_v = float(np.maximum(rec.v_linf, rec.gradv_linf).max())
    ru = 0.0 if math.isinf(c.L) else sup_u / c.L
    rv = 0.0 if math.isinf(c.N) else sup_v / c.N
    return ru, rv


def run_all_checks(
    rec: TrajectoryRecord,
    c: BoundConstants,
    slack_constant_free: float = 1.05,
    slack_gn: float = 1.10,
    slack_l1: float | None = None,
) -> list[CheckEntry]:
    """Every check in report order; GN-dependent ones get the wider slack."""
    entries = [
        check_l1(rec, c, slack_l1 if slack_l1 is not None else slack_constant_free),
        check_gradv(rec, c, slack_constant_free),
        *check_spacetime(rec, c, slack_constant_free),
        *check_odi(rec, c, slack_gn - 1.0),
        check_l2(rec, c, slack_gn),
    ]
    return entries


def _jsonable(x: float):
    return x if math.isfinite(x) else repr(x)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_trajectory_csv(rec: TrajectoryRecord, path, meta: dict | None = None) -> None:
    """Trajectory as CSV in TRAJECTORY_COLUMNS order, 17 significant digits."""
    lines = []
    if meta:
        lines.append("# " + json.dumps(meta, sort_keys=True))
    lines.append(",".join(TRAJECTORY_COLUMNS))
    cols = [getattr(rec, name if name != "time" else "times") for name in TRAJECTORY_COLUMNS]
    for i in range(len(rec)):
        lines.append(",".join(_fmt(col[i]) for col in cols))
    Path(path).write_text("\n".join(lines) + "\n")


def read_trajectory_csv(path) -> TrajectoryRecord:
    """Inverse of write_trajectory_csv."""
    rows = [
        ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")
    ]
    header = rows[0].split(",")
    if tuple(header) != TRAJECTORY_COLUMNS:
        raise ValueError(f"unexpected trajectory columns: {header}")
    data = np.array([[float(x) for x in ln.split(",")] for ln in rows[1:]])
    kw = {}
    for k, name in enumerate(TRAJECTORY_COLUMNS):
        kw[name if name != "time" else "times"] = data[:, k]
    return TrajectoryRecord(**kw)


def write_checks_json(
    entries: list[CheckEntry],
    path,
    ratios: tuple[float, float] | None = None,
    meta: dict | None = None,
) -> None:
    doc: dict = {"checks": [e.as_dict() for e in entries]}
    if ratios is not None:
        doc["ratios"] = {"u_linf_over_L": ratios[0], "v_w1inf_over_N": ratios[1]}
    if meta:
        doc["meta"] = meta
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
