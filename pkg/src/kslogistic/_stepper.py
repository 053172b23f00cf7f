"""Fused explicit-Euler kernels for the time loop.

The public operators in field.py define the scheme; these kernels repeat
the same arithmetic in a form the hot loop can afford (one flux sweep,
one update sweep, no temporaries).  Face-flux arrays carry one zero
boundary layer (fx[0] = fx[nx] = 0) so the divergence is branch-free and
telescopes exactly.

Numba is used when importable; the numpy fallbacks compute the identical
discrete formulas.  Either path is deterministic for a given build.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        if len(args) == 1 and callable(args[0]):
            return args[0]
        return wrap


def _flux_faces_py(u, v, fx, fy, hx, hy, chi):
    """Upwinded chemotactic face fluxes; returns max face |grad v|."""
    gx = (v[1:, :] - v[:-1, :]) / hx
    gy = (v[:, 1:] - v[:, :-1]) / hy
    fx[1:-1, :] = chi * np.where(gx > 0.0, u[:-1, :], u[1:, :]) * gx
    fy[:, 1:-1] = chi * np.where(gy > 0.0, u[:, :-1], u[:, 1:]) * gy
    maxg = 0.0
    if gx.size:
        maxg = max(maxg, float(np.abs(gx).max()))
    if gy.size:
        maxg = max(maxg, float(np.abs(gy).max()))
    return maxg


def _euler_update_py(u, v, un, vn, fx, fy, hx, hy, r, mu, dt):
    """One forward-Euler step of both equations into un, vn."""
    up = np.pad(u, 1, mode="edge")
    vp = np.pad(v, 1, mode="edge")
    ihx2 = 1.0 / (hx * hx)
    ihy2 = 1.0 / (hy * hy)
    lap_u = (up[2:, 1:-1] - 2.0 * u + up[:-2, 1:-1]) * ihx2 + (
        up[1:-1, 2:] - 2.0 * u + up[1:-1, :-2]
    ) * ihy2
    lap_v = (vp[2:, 1:-1] - 2.0 * v + vp[:-2, 1:-1]) * ihx2 + (
        vp[1:-1, 2:] - 2.0 * v + vp[1:-1, :-2]
    ) * ihy2
    div = (fx[1:, :] - fx[:-1, :]) / hx + (fy[:, 1:] - fy[:, :-1]) / hy
    un[:] = u + dt * (lap_u - div + r * u - mu * u * u)
    vn[:] = v + dt * (lap_v - v + u)


@njit(cache=True)
def _flux_faces_nb(u, v, fx, fy, hx, hy, chi):  # pragma: no cover - jitted
    nx, ny = u.shape
    ihx = 1.0 / hx
    ihy = 1.0 / hy
    maxg = 0.0
    for i in range(1, nx):
        for j in range(ny):
            g = (v[i, j] - v[i - 1, j]) * ihx
            ag = -g if g < 0.0 else g
            if ag > maxg:
                maxg = ag
            ud = u[i - 1, j] if g > 0.0 else u[i, j]
            fx[i, j] = chi * ud * g
    for i in range(nx):
        for j in range(1, ny):
            g = (v[i, j] - v[i, j - 1]) * ihy
            ag = -g if g < 0.0 else g
            if ag > maxg:
                maxg = ag
            ud = u[i, j - 1] if g > 0.0 else u[i, j]
            fy[i, j] = chi * ud * g
    return maxg


@njit(cache=True)
def _euler_update_nb(u, v, un, vn, fx, fy, hx, hy, r, mu, dt):  # pragma: no cover
    nx, ny = u.shape
    ihx = 1.0 / hx
    ihy = 1.0 / hy
    ihx2 = ihx * ihx
    ihy2 = ihy * ihy
    for i in range(nx):
        im = i - 1 if i > 0 else 0
        ip = i + 1 if i < nx - 1 else nx - 1
        for j in range(1, ny - 1):
            uc = u[i, j]
            vc = v[i, j]
            lap_u = (u[ip, j] - 2.0 * uc + u[im, j]) * ihx2 + (
                u[i, j + 1] - 2.0 * uc + u[i, j - 1]
            ) * ihy2
            lap_v = (v[ip, j] - 2.0 * vc + v[im, j]) * ihx2 + (
                v[i, j + 1] - 2.0 * vc + v[i, j - 1]
            ) * ihy2
            div = (fx[i + 1, j] - fx[i, j]) * ihx + (fy[i, j + 1] - fy[i, j]) * ihy
            un[i, j] = uc + dt * (lap_u - div + r * uc - mu * uc * uc)
            vn[i, j] = vc + dt * (lap_v - vc + uc)
        for j in (0, ny - 1):
            jm = j - 1 if j > 0 else 0
            jp = j + 1 if j < ny - 1 else ny - 1
            uc = u[i, j]
            vc = v[i, j]
            lap_u = (u[ip, j] - 2.0 * uc + u[im, j]) * ihx2 + (
                u[i, jp] - 2.0 * uc + u[i, jm]
            ) * ihy2
            lap_v = (v[ip, j] - 2.0 * vc + v[im, j]) * ihx2 + (
                v[i, jp] - 2.0 * vc + v[i, jm]
            ) * ihy2
            div = (fx[i + 1, j] - fx[i, j]) * ihx + (fy[i, j + 1] - fy[i, j]) * ihy
            un[i, j] = uc + dt * (lap_u - div + r * uc - mu * uc * uc)
            vn[i, j] = vc + dt * (lap_v - vc + uc)


if HAVE_NUMBA:
    flux_faces = _flux_faces_nb
    euler_update = _euler_update_nb
else:  # pragma: no cover
    flux_faces = _flux_faces_py
    euler_update = _euler_update_py
