"""Cell-centered fields on uniform rectangular grids with no-flux boundaries.

Values live at cell centers ((i+1/2)hx, (j+1/2)hy) and are stored as
(nx, ny) arrays indexed [i, j] with i along x.  Homogeneous Neumann
boundaries are realized by ghost-cell reflection (the ghost value equals
the adjacent interior value), which keeps the five-point Laplacian
self-adjoint and makes all divergence sums telescope to zero.  Quadrature
is the midpoint rule, exact for constants and linears.

All operations are pure; reductions use numpy's fixed pairwise order, so
results are reproducible bit-for-bit for a given build.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class FieldError(ValueError):
    """Raised when a field violates its invariants (NaN/Inf entries, shape)."""


@dataclass(frozen=True)
class Domain2D:
    """Rectangle [0, Lx] x [0, Ly] split into nx x ny uniform cells."""

    Lx: float
    Ly: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.Lx > 0 and self.Ly > 0):
            raise ValueError(f"side lengths must be positive, got {self.Lx}, {self.Ly}")
        if self.nx < 4 or self.ny < 4:
            raise ValueError(f"need at least 4 cells per axis, got {self.nx} x {self.ny}")

    @property
    def hx(self) -> float:
        return self.Lx / self.nx

    @property
    def hy(self) -> float:
        return self.Ly / self.ny

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    @property
    def measure(self) -> float:
        """Domain measure |Omega| = Lx * Ly."""
        return self.Lx * self.Ly

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrid (X, Y) of cell-center coordinates, each shaped (nx, ny)."""
        x = (np.arange(self.nx) + 0.5) * self.hx
        y = (np.arange(self.ny) + 0.5) * self.hy
        return np.meshgrid(x, y, indexing="ij")


@dataclass(frozen=True)
class Field2D:
    """A scalar field sampled at the cell centers of a Domain2D."""

    domain: Domain2D
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.domain.nx, self.domain.ny):
            raise FieldError(
                f"values shape {vals.shape} does not match grid "
                f"({self.domain.nx}, {self.domain.ny})"
            )
        if not np.isfinite(vals).all():
            raise FieldError("field contains NaN or Inf entries")
        object.__setattr__(self, "values", vals)

    def copy(self) -> "Field2D":
        return Field2D(self.domain, self.values.copy())


def _same_domain(a: Field2D, b: Field2D) -> Domain2D:
    if a.domain != b.domain:
        raise FieldError(f"domain mismatch: {a.domain} vs {b.domain}")
    return a.domain


def _reflect_pad(vals: np.ndarray) -> np.ndarray:
    # even extension: ghost cell mirrors the first interior cell
    return np.pad(vals, 1, mode="edge")


def laplacian(f: Field2D) -> Field2D:
    """Five-point Laplacian with reflecting ghost cells.

    Annihilates constants, is self-adjoint under the midpoint inner
    product, and sums to zero over the grid (discrete divergence theorem).
    """
    d = f.domain
    p = _reflect_pad(f.values)
    u = f.values
    lap = (p[2:, 1:-1] - 2.0 * u + p[:-2, 1:-1]) / d.hx**2 + (
        p[1:-1, 2:] - 2.0 * u + p[1:-1, :-2]
    ) / d.hy**2
    return Field2D(d, lap)


def face_gradients(f: Field2D) -> tuple[np.ndarray, np.ndarray]:
    """Interior-face normal differences (gx: (nx-1, ny), gy: (nx, ny-1)).

    Boundary faces carry zero normal gradient and are omitted.
    """
    d = f.domain
    v = f.values
    gx = (v[1:, :] - v[:-1, :]) / d.hx
    gy = (v[:, 1:] - v[:, :-1]) / d.hy
    return gx, gy


def chemo_flux_divergence(u: Field2D, v: Field2D, chi: float) -> Field2D:
    """Divergence of the upwinded chemotactic face flux chi * u * grad(v).

    The face flux uses u from the donor cell (upwinding on the sign of the
    face gradient of v); boundary fluxes vanish, so the result integrates
    to zero exactly up to round-off.
    """
    if chi < 0:
        raise ValueError(f"chi must be nonnegative, got {chi}")
    d = _same_domain(u, v)
    gx, gy = face_gradients(v)
    uu = u.values
    fx = chi * np.where(gx > 0.0, uu[:-1, :], uu[1:, :]) * gx
    fy = chi * np.where(gy > 0.0, uu[:, :-1], uu[:, 1:]) * gy
    div = np.zeros_like(uu)
    div[:-1, :] += fx / d.hx
    div[1:, :] -= fx / d.hx
    div[:, :-1] += fy / d.hy
    div[:, 1:] -= fy / d.hy
    return Field2D(d, div)


def integrate(f: Field2D) -> float:
    """Midpoint quadrature: sum of cell values times cell area."""
    return float(f.values.sum()) * f.domain.cell_area


def norm_lp(f: Field2D, p) -> float:
    """L^p norm for p in {1, 2, 3, 4} or the sup norm for p = math.inf."""
    if p == np.inf:
        return float(np.abs(f.values).max())
    if p not in (1, 2, 3, 4):
        raise ValueError(f"unsupported exponent {p}")
    a = np.abs(f.values)
    return float((a**p).sum() * f.domain.cell_area) ** (1.0 / p)


def grad_norm_l2_sq(f: Field2D) -> float:
    """Squared L2 norm of the gradient from interior face differences."""
    d = f.domain
    gx, gy = face_gradients(f)
    return float((gx**2).sum() + (gy**2).sum()) * d.cell_area


def grad_norm_inf(f: Field2D) -> float:
    """Max face-difference magnitude; the discrete |grad f|_inf surrogate."""
    gx, gy = face_gradients(f)
    m = 0.0
    if gx.size:
        m = max(m, float(np.abs(gx).max()))
    if gy.size:
        m = max(m, float(np.abs(gy).max()))
    return m


def laplacian_l2_sq(f: Field2D) -> float:
    """Squared L2 norm of the discrete Laplacian."""
    return norm_lp(laplacian(f), 2) ** 2


def save_field(f: Field2D, path, meta: dict | None = None) -> None:
    """Write a field as text: optional '#' meta lines, a 'nx ny Lx Ly'
    header, then nx*ny values in row-major order (i outer, j inner)."""
    d = f.domain
    lines = []
    if meta:
        lines.append("# " + json.dumps(meta, sort_keys=True))
    lines.append(f"{d.nx} {d.ny} {d.Lx!r} {d.Ly!r}")
    lines.extend(repr(float(x)) for x in f.values.ravel(order="C"))
    Path(path).write_text("\n".join(lines) + "\n")


def load_field(path) -> Field2D:
    """Read a field written by save_field."""
    rows = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    nx, ny, lx, ly = rows[0].split()
    d = Domain2D(float(lx), float(ly), int(nx), int(ny))
    vals = np.array([float(x) for x in rows[1:]]).reshape(d.nx, d.ny)
    return Field2D(d, vals)
