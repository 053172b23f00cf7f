"""Closed-form boundedness constants for the chemotaxis-logistic system.

Given model parameters (chi, mu, r, |Omega|) and norms of the initial
data, this module evaluates the full chain of explicit constants

    k1..k7, epsilon  ->  E, M, K = M*E, N, L  ->  uniform L2 bound

that controls solutions of

    u_t = div(grad u - chi u grad v) + r u - mu u^2,
    v_t = lap v - v + u,

on a bounded domain with no-flux boundaries.  All composite bounds are
finite only for mu > 0 and grow like exp(c/mu^2) as mu -> 0, so they are
computed in log space first; float fields overflow to +inf (an explicit
marker, never an exception) and callers treat +inf bounds as vacuously
satisfied.

The interpolation constant C_GN in

    |w|_{L4}^2 <= C_GN (|grad w|_{L2} |w|_{L2} + |w|_{L1}^2)

is not known in closed form for a rectangle; estimate_gn_constant probes
it from below by maximizing the ratio over random smooth fields, and
callers multiply by a safety factor (default 2) before use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .field import Domain2D, Field2D, grad_norm_l2_sq, norm_lp

# exp() saturates to +inf beyond this exponent instead of raising
_EXP_OVERFLOW = math.log(float(np.finfo(float).max))


class MuNonpositiveError(ValueError):
    """The bound formulas are defined only for mu > 0."""


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the PDE system plus the domain measure |Omega|.

    mu = 0 is accepted (needed for blow-up studies) but every bound
    formula raises MuNonpositiveError for it.
    """

    chi: float
    mu: float
    r: float
    omega_measure: float

    def __post_init__(self):
        if self.chi < 0:
            raise ValueError(f"chi must be nonnegative, got {self.chi}")
        if self.mu < 0:
            raise ValueError(f"mu must be nonnegative, got {self.mu}")
        if self.r < 0:
            raise ValueError(f"r must be nonnegative, got {self.r}")
        if not self.omega_measure > 0:
            raise ValueError(f"omega_measure must be positive, got {self.omega_measure}")


@dataclass(frozen=True)
class InitialNorms:
    """Norms of the initial data that enter the bound formulas."""

    u0_l1: float
    u0_l2_sq: float
    u0_l3_cubed: float
    u0_linf: float
    gradv0_l2_sq: float

    def __post_init__(self):
        for name in ("u0_l1", "u0_l2_sq", "u0_l3_cubed", "u0_linf", "gradv0_l2_sq"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @classmethod
    def from_fields(cls, u0: Field2D, v0: Field2D) -> "InitialNorms":
        return cls(
            u0_l1=norm_lp(u0, 1),
            u0_l2_sq=norm_lp(u0, 2) ** 2,
            u0_l3_cubed=norm_lp(u0, 3) ** 3,
            u0_linf=norm_lp(u0, np.inf),
            gradv0_l2_sq=grad_norm_l2_sq(v0),
        )

    def check_consistency(self, omega_measure: float) -> None:
        """Holder requires |u0|_L1 <= |Omega|^(1/2) |u0|_L2."""
        lim = math.sqrt(omega_measure * self.u0_l2_sq)
        if self.u0_l1 > lim * (1.0 + 1e-9):
            raise ValueError(
                f"inconsistent initial norms: u0_l1={self.u0_l1} exceeds "
                f"|Omega|^(1/2)*u0_l2={lim}"
            )


@dataclass(frozen=True)
class BoundConstants:
    """Every derived constant, evaluated for one (params, data) instance."""

    k1: float
    k2: float
    k3: float
    k4: float
    k5: float
    k6: float
    k7: float
    epsilon: float
    c_gn: float
    tau: float
    E: float
    M: float
    K: float
    N: float
    L: float
    l2_rhs: float

    @property
    def overflow(self) -> bool:
        """True when some composite bound saturated to +inf."""
        return not all(
            math.isfinite(x) for x in (self.E, self.K, self.N, self.L, self.l2_rhs)
        )

    def as_dict(self) -> dict:
        return {
            "k1": self.k1, "k2": self.k2, "k3": self.k3, "k4": self.k4,
            "k5": self.k5, "k6": self.k6, "k7": self.k7,
            "epsilon": self.epsilon, "c_gn": self.c_gn, "tau": self.tau,
            "E": self.E, "M": self.M, "K": self.K, "N": self.N, "L": self.L,
            "l2_rhs": self.l2_rhs,
        }


def _require_mu(p: ModelParams) -> None:
    if not p.mu > 0:
        raise MuNonpositiveError(f"bound formulas require mu > 0, got mu={p.mu}")


def chemo_epsilon(chi: float) -> float:
    """The Young-inequality weight min{1, 2/chi} (1 when chi = 0)."""
    return 1.0 if chi <= 2.0 else 2.0 / chi


def _exp(x: float) -> float:
    return math.inf if x > _EXP_OVERFLOW else math.exp(x)


def _log(x: float) -> float:
    return -math.inf if x == 0.0 else math.log(x)


def energy_exponent_bracket(p: ModelParams, ic: InitialNorms) -> float:
    """The data-dependent bracket inside the exponential bound E."""
    _require_mu(p)
    r, mu, om = p.r, p.mu, p.omega_measure
    return (
        (r + 3.0) / mu * ic.u0_l1
        + (r + 1.0) ** 3 / (4.0 * mu**2) * om
        + ic.gradv0_l2_sq
        + (r + 2.0) ** 2 / (2.0 * mu**2) * om
    )


def log_composite_bounds(p: ModelParams, ic: InitialNorms, c_gn: float) -> dict:
    """log(E), log(M), log(K), log(N), log(L) without overflow.

    The property suite compares bounds across parameters deep in the
    regime where the float values saturate to +inf; log space keeps the
    comparisons strict there.
    """
    _require_mu(p)
    chi, mu = p.chi, p.mu
    eps = chemo_epsilon(chi)
    log_e = chi * c_gn**2 / (2.0 * eps) * energy_exponent_bracket(p, ic)
    log_m = math.log(1.0 + 1.0 / mu + math.sqrt(chi) * (1.0 + 1.0 / mu**2))
    log_k = log_m + log_e
    base = math.log(1.0 + 1.0 / mu)
    log_n = np.logaddexp(base, 8.0 / 3.0 * (_log(chi) + log_k) - math.log(mu))
    log_l = np.logaddexp(base, _log(chi) + log_k + log_n)
    return {
        "log_E": float(log_e),
        "log_M": float(log_m),
        "log_K": float(log_k),
        "log_N": float(log_n),
        "log_L": float(log_l),
    }


def compute_constants(
    p: ModelParams, ic: InitialNorms, c_gn: float, tau: float = 1.0
) -> BoundConstants:
    """Evaluate every constant of the bound chain for mu > 0.

    Raises MuNonpositiveError for mu <= 0.  Composite bounds that exceed
    the double range come back as +inf.
    """
    _require_mu(p)
    if not c_gn > 0:
        raise ValueError(f"c_gn must be positive, got {c_gn}")
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    ic.check_consistency(p.omega_measure)

    chi, mu, r, om = p.chi, p.mu, p.r, p.omega_measure
    eps = chemo_epsilon(chi)
    k1 = ic.u0_l1 + (r + 1.0) ** 2 / (4.0 * mu) * om
    k2 = 2.0 / mu * (ic.u0_l1 + mu / 2.0 * ic.gradv0_l2_sq + (r + 2.0) ** 2 / (4.0 * mu) * om)
    k3 = (r + 1.0) * k1 / mu
    k4 = k3 + k2
    k5 = chi * c_gn**2 / (4.0 * eps)
    k6 = chi * k1**4 * c_gn**2 / 4.0 + 8.0 * r**3 / (27.0 * mu**2) * om
    k7 = k3 + 4.0 * eps / c_gn**2

    logs = log_composite_bounds(p, ic, c_gn)
    e_val = _exp(logs["log_E"])
    m_val = math.exp(logs["log_M"])
    k_val = m_val * e_val
    n_val = _exp(logs["log_N"])
    l_val = _exp(logs["log_L"])

    # uniform-in-time L2 bound: brace * max{1, tau, 1/tau} * E^max{1, tau}
    brace = (
        ic.u0_l2_sq
        + 8.0 * eps / c_gn**2
        + k3
        + 3.0 * chi * k1**4 * c_gn**2 / 4.0
        + 8.0 * r**3 / (9.0 * mu**2) * om
    )
    log_l2 = (
        math.log(brace)
        + math.log(max(1.0, tau, 1.0 / tau))
        + logs["log_E"] * max(1.0, tau)
    )
    l2_rhs = _exp(log_l2)

    return BoundConstants(
        k1=k1, k2=k2, k3=k3, k4=k4, k5=k5, k6=k6, k7=k7,
        epsilon=eps, c_gn=c_gn, tau=tau,
        E=e_val, M=m_val, K=k_val, N=n_val, L=l_val, l2_rhs=l2_rhs,
    )


def compute_paper_bounds(
    p: ModelParams, ic: InitialNorms, c_gn: float, tau: float = 1.0
) -> BoundConstants:
    """Composite bounds E, M, K, N, L and the uniform L2 right-hand side.

    Same object as compute_constants; kept as a named entry point for
    callers that only care about the composite bounds.
    """
    return compute_constants(p, ic, c_gn, tau)


def equilibrium(p: ModelParams) -> tuple[float, float]:
    """The constant steady state (r/mu, r/mu)."""
    _require_mu(p)
    return (p.r / p.mu, p.r / p.mu)


def gn_interpolation_ratio(w: Field2D) -> float:
    """|w|_{L4}^2 / (|grad w|_{L2} |w|_{L2} + |w|_{L1}^2) for a field.

    Scale invariant: w and a*w give the same ratio for a != 0.
    """
    num = norm_lp(w, 4) ** 2
    den = math.sqrt(grad_norm_l2_sq(w)) * norm_lp(w, 2) + norm_lp(w, 1) ** 2
    if den == 0.0:
        raise ValueError("zero field has no interpolation ratio")
    return num / den


def _random_bump_field(d: Domain2D, rng: np.random.Generator) -> Field2D:
    X, Y = d.cell_centers()
    vals = np.zeros((d.nx, d.ny))
    scale = min(d.Lx, d.Ly)
    for _ in range(int(rng.integers(1, 5))):
        cx = rng.uniform(0.0, d.Lx)
        cy = rng.uniform(0.0, d.Ly)
        w = rng.uniform(0.05, 0.3) * scale
        amp = rng.uniform(0.2, 1.0)
        vals += amp * np.exp(-((X - cx) ** 2 + (Y - cy) ** 2) / (2.0 * w**2))
    return Field2D(d, vals)


def estimate_gn_constant(d: Domain2D, n_samples: int, seed: int) -> float:
    """Lower estimate of the discrete C_GN on the given grid.

    Takes the running max of the interpolation ratio over the constant
    field (sample 1) and sums of random Gaussian bumps (samples 2..n),
    drawn sequentially from one seeded generator, so estimates for nested
    sample counts share a prefix and the result is deterministic.
    """
    if n_samples < 1:
        raise ValueError(f"need at least one sample, got {n_samples}")
    best = gn_interpolation_ratio(Field2D(d, np.ones((d.nx, d.ny))))
    rng = np.random.default_rng(seed)
    for _ in range(n_samples - 1):
        best = max(best, gn_interpolation_ratio(_random_bump_field(d, rng)))
    return best
