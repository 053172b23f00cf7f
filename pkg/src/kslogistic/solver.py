"""Adaptive explicit time integration of the chemotaxis-logistic system.

The scheme is unsplit forward Euler on cell-centered fields:

    u += dt * (lap u - div(chi u grad v) + r u - mu u^2)
    v += dt * (lap v - v + u)

with upwinded conservative chemotaxis fluxes and reflecting (no-flux)
boundaries.  The step size tracks three explicit stability limits
(diffusion, chemotactic advection, reaction) scaled by a safety factor.
Runs exit early on a sup-norm blow-up trigger, on loss of positivity
beyond tolerance, or on non-finite values; positivity is never silently
repaired because the recorded mass identities would stop meaning
anything.

step() composes the public operators in field.py; run() drives the fused
kernels in _stepper.py, which implement the same discrete formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _stepper
from .bounds import ModelParams
from .field import (
    Domain2D,
    Field2D,
    chemo_flux_divergence,
    grad_norm_inf,
    laplacian,
    norm_lp,
)
from .monitor import RecordBuilder, TrajectoryRecord, snapshot_norms

COMPLETED = "completed"
BLOWUP = "blowup"
NEGATIVITY = "negativity"
NONFINITE = "nonfinite"


class SolverError(RuntimeError):
    """Base for early-exit conditions of the time stepper."""

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


class NonFiniteError(SolverError):
    pass


class NegativityError(SolverError):
    pass


@dataclass(frozen=True)
class State:
    """Cell density u, signal concentration v, and the current time."""

    u: Field2D
    v: Field2D
    t: float

    def __post_init__(self):
        if self.u.domain != self.v.domain:
            raise ValueError("u and v must share one domain")

    @property
    def domain(self) -> Domain2D:
        return self.u.domain


@dataclass(frozen=True)
class SolverConfig:
    t_end: float
    cfl_safety: float = 0.4
    dt_max: float = 0.1
    blowup_threshold: float = 1e6
    negativity_tolerance: float = 1e-12
    record_every: int = 50
    snapshot_times: tuple = ()

    def __post_init__(self):
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError(f"cfl_safety must be in (0, 1], got {self.cfl_safety}")
        if not self.dt_max > 0:
            raise ValueError(f"dt_max must be positive, got {self.dt_max}")
        if self.negativity_tolerance < 0:
            raise ValueError("negativity_tolerance must be nonnegative")
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")
        snaps = tuple(float(t) for t in self.snapshot_times)
        if any(t < 0 for t in snaps) or list(snaps) != sorted(snaps):
            raise ValueError("snapshot_times must be nonnegative and ascending")
        object.__setattr__(self, "snapshot_times", snaps)


@dataclass(frozen=True)
class RunOutcome:
    """Terminal status of a run plus the recorded trajectory.

    event_time is the trigger time for early exits; for a nonfinite exit
    final_state is the last finite state before the failed step.
    snapshots holds one state per requested snapshot time (captured at
    the first step past it).
    """

    status: str
    final_state: State
    record: TrajectoryRecord
    event_time: float | None = None
    snapshots: tuple = ()


def _dt_from_limits(
    max_gradv: float, max_u: float, d: Domain2D, p: ModelParams, cfg: SolverConfig, t: float
) -> float:
    diffusion = 1.0 / (2.0 * (1.0 / d.hx**2 + 1.0 / d.hy**2))
    drift = p.chi * max_gradv
    advection = min(d.hx, d.hy) / (2.0 * drift) if drift > 0 else math.inf
    reaction = 1.0 / (p.r + 2.0 * p.mu * max_u + 1.0)
    dt = cfg.cfl_safety * min(diffusion, advection, reaction)
    dt = min(dt, cfg.dt_max)
    remaining = cfg.t_end - t
    if remaining > 0:
        dt = min(dt, remaining)
    return dt


def stable_dt(s: State, p: ModelParams, cfg: SolverConfig) -> float:
    """Largest step the explicit update tolerates at this state."""
    return _dt_from_limits(grad_norm_inf(s.v), norm_lp(s.u, np.inf), s.domain, p, cfg, s.t)


def step(s: State, p: ModelParams, cfg: SolverConfig, dt: float) -> State:
    """One forward-Euler step; both updates read the old (u, v)."""
    d = s.domain
    u, v = s.u.values, s.v.values
    with np.errstate(over="ignore", invalid="ignore"):  # NonFiniteError is the report
        un = u + dt * (
            laplacian(s.u).values
            - chemo_flux_divergence(s.u, s.v, p.chi).values
            + p.r * u
            - p.mu * u * u
        )
        vn = v + dt * (laplacian(s.v).values - v + u)
    t_new = s.t + dt
    if not (np.isfinite(un).all() and np.isfinite(vn).all()):
        raise NonFiniteError(f"non-finite values after step to t={t_new}", t_new)
    if un.min() < -cfg.negativity_tolerance:
        raise NegativityError(
            f"u dropped to {un.min()} (tolerance {cfg.negativity_tolerance}) at t={t_new}",
            t_new,
        )
    return State(Field2D(d, un), Field2D(d, vn), t_new)


def run(u0: Field2D, v0: Field2D, p: ModelParams, cfg: SolverConfig) -> RunOutcome:
    """Integrate from (u0, v0) to t_end, recording norms along the way.

    Returns instead of raising on early exits so partial records survive.
    """
    if u0.values.min() < 0 or v0.values.min() < 0:
        raise ValueError("initial data must be nonnegative")
    if u0.domain != v0.domain:
        raise ValueError("u0 and v0 must share one domain")
    d = u0.domain

    u = u0.values.copy()
    v = v0.values.copy()
    un = np.empty_like(u)
    vn = np.empty_like(v)
    fx = np.zeros((d.nx + 1, d.ny))
    fy = np.zeros((d.nx, d.ny + 1))

    rb = RecordBuilder()
    rb.add(0.0, snapshot_norms(u, v, d))
    last_recorded = 0.0
    snapshots: list[State] = []
    snap_due = list(cfg.snapshot_times)

    def take_snapshots(t, uu, vv):
        while snap_due and t >= snap_due[0]:
            snap_due.pop(0)
            snapshots.append(State(Field2D(d, uu.copy()), Field2D(d, vv.copy()), t))

    def finish(status, t, uu, vv, event=None):
        if t > last_recorded:
            rb.add(t, snapshot_norms(uu, vv, d))
        final = State(Field2D(d, uu.copy()), Field2D(d, vv.copy()), t)
        return RunOutcome(status, final, rb.build(), event, tuple(snapshots))

    max_u = float(u.max())
    take_snapshots(0.0, u, v)
    if max_u > cfg.blowup_threshold:
        return finish(BLOWUP, 0.0, u, v, event=0.0)

    t = 0.0
    n_steps = 0
    while t < cfg.t_end:
        max_gradv = _stepper.flux_faces(u, v, fx, fy, d.hx, d.hy, p.chi)
        dt = _dt_from_limits(max_gradv, max_u, d, p, cfg, t)
        _stepper.euler_update(u, v, un, vn, fx, fy, d.hx, d.hy, p.r, p.mu, dt)
        u, un = un, u
        v, vn = vn, v
        t += dt
        n_steps += 1

        mn_u = float(u.min())
        max_u = float(u.max())
        mn_v = float(v.min())
        mx_v = float(v.max())
        if not all(map(math.isfinite, (mn_u, max_u, mn_v, mx_v))):
            # un/vn hold the pre-step state after the swap
            return finish(NONFINITE, t - dt, un, vn, event=t)
        if mn_u < -cfg.negativity_tolerance:
            return finish(NEGATIVITY, t, u, v, event=t)
        take_snapshots(t, u, v)
        if max_u > cfg.blowup_threshold:
            return finish(BLOWUP, t, u, v, event=t)
        if n_steps % cfg.record_every == 0 and t < cfg.t_end:
            rb.add(t, snapshot_norms(u, v, d))
            last_recorded = t

    return finish(COMPLETED, t, u, v)


def make_initial(kind: str, d: Domain2D, **params) -> Field2D:
    """Build nonnegative initial data.

    kinds:
      constant(value)
      gaussian(center=(x, y), width, mass)   renormalized so the discrete
                                             integral equals mass exactly
      perturbed_constant(value, amplitude, seed)
    """
    if kind == "constant":
        value = float(params.pop("value"))
        _no_extras(params)
        if value < 0:
            raise ValueError(f"constant value must be nonnegative, got {value}")
        return Field2D(d, np.full((d.nx, d.ny), value))

    if kind == "gaussian":
        width = float(params.pop("width"))
        mass = float(params.pop("mass"))
        cx, cy = params.pop("center", (d.Lx / 2.0, d.Ly / 2.0))
        _no_extras(params)
        if not width > 0:
            raise ValueError(f"width must be positive, got {width}")
        if mass < 0:
            raise ValueError(f"mass must be nonnegative, got {mass}")
        X, Y = d.cell_centers()
        raw = np.exp(-((X - cx) ** 2 + (Y - cy) ** 2) / (2.0 * width**2))
        return Field2D(d, raw * (mass / (raw.sum() * d.cell_area)))

    if kind == "perturbed_constant":
        value = float(params.pop("value"))
        amplitude = float(params.pop("amplitude"))
        seed = int(params.pop("seed", 0))
        _no_extras(params)
        if value < 0 or amplitude < 0:
            raise ValueError("value and amplitude must be nonnegative")
        if amplitude > value:
            raise ValueError(
                f"amplitude {amplitude} > value {value} would break nonnegativity"
            )
        rng = np.random.default_rng(seed)
        vals = value + amplitude * (2.0 * rng.random((d.nx, d.ny)) - 1.0)
        return Field2D(d, vals)

    raise ValueError(f"unknown initial-data kind {kind!r}")


def _no_extras(params: dict) -> None:
    if params:
        raise ValueError(f"unexpected initial-data parameters: {sorted(params)}")
