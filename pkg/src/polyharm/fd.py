"""Finite-difference oracles for radial Laplacians (verification only)."""

from __future__ import annotations

import numpy as np


def radial_laplacian_fd(f, N: int, r, h: float | None = None):
    """5-point central differences of ``f'' + (N-1)/r f'`` at radii ``r``."""
    r = np.asarray(r, dtype=float)
    if h is None:
        h = 1e-3 * r
    f0 = f(r)
    fp1, fm1, fp2, fm2 = f(r + h), f(r - h), f(r + 2 * h), f(r - 2 * h)
    d1 = (-fp2 + 8 * fp1 - 8 * fm1 + fm2) / (12 * h)
    d2 = (-fp2 + 16 * fp1 - 30 * f0 + 16 * fm1 - fm2) / (12 * h * h)
    return d2 + (N - 1) / r * d1


def log_grid_laplacian(values, radii, N: int):
    """Radial Laplacian of samples on a uniform grid in ``log r``.

    With ``u = log r``: ``Lap f = (f_uu + (N-2) f_u) / r^2``.  Fourth-order
    central stencils; the two outermost nodes on each side are returned as NaN.
    """
    values = np.asarray(values, dtype=float)
    radii = np.asarray(radii, dtype=float)
    u = np.log(radii)
    h = np.diff(u)
    if not np.allclose(h, h[0], rtol=1e-8):
        raise ValueError("grid must be uniform in log r")
    h = h[0]
    out = np.full_like(values, np.nan)
    f = values
    fu = (-f[4:] + 8 * f[3:-1] - 8 * f[1:-3] + f[:-4]) / (12 * h)
    fuu = (-f[4:] + 16 * f[3:-1] - 30 * f[2:-2] + 16 * f[1:-3] - f[:-4]) / (12 * h * h)
    out[2:-2] = (fuu + (N - 2) * fu) / radii[2:-2] ** 2
    return out
