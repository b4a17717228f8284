"""Spherical-average tools: poly-superharmonicity, radial Poisson cascades,
Taylor-type bounds and the cutoff-integral diagnostic.

Conventions: for a radial ``u`` write ``L_k = Lap^k u`` and
``u_k = (-Lap)^k u = (-1)^k L_k``.  A cascade is rebuilt from its top level
``L_{m-1}`` and the centre values ``L_k(0)`` by inverting the radial Laplacian
with a regular centre,

    L_k(r) = L_k(0) + int_0^r t^(1-N) int_0^t s^(N-1) L_{k+1}(s) ds dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.special import roots_legendre

from .fd import log_grid_laplacian
from .profiles import smoothstep
from .radial_expr import RadialExpr, laplacian
from .riesz import sphere_area

LEVEL_TOL = 1e-12


# ---------------------------------------------------------------------------
# poly-superharmonicity


@dataclass
class LevelCheck:
    j: int
    minimum: float
    argmin: float
    scale: float

    @property
    def passed(self) -> bool:
        return self.minimum >= -LEVEL_TOL * self.scale

    def to_json_dict(self) -> dict:
        return {"j": self.j, "min": self.minimum, "argmin": self.argmin, "scale": self.scale,
                "passed": self.passed}


@dataclass
class PolySuperharmonicReport:
    levels: list[LevelCheck]
    nonnegative: bool
    min_value: float

    @property
    def passed(self) -> bool:
        return all(lv.passed for lv in self.levels)

    def to_json_dict(self) -> dict:
        return {"passed": self.passed, "nonnegative": self.nonnegative, "min_value": self.min_value,
                "levels": [lv.to_json_dict() for lv in self.levels]}


def _level_values(u, N: int, m: int, grid):
    """Yield ``(j, (-Lap)^j u on grid)`` for j = 0..m."""
    if isinstance(u, RadialExpr):
        expr = u
        for j in range(m + 1):
            yield j, np.asarray(expr(grid), dtype=float)
            expr = -laplacian(expr, N)
        return
    # builder construction: (-Lap)^j U = scale * [(-Lap)^j v + M W_{m-j}],  W_0 = phi
    from .builder import Construction

    if not isinstance(u, Construction):
        raise TypeError("u must be a RadialExpr or a builder Construction")
    if u.N != N or u.m < m:
        raise ValueError("construction does not match (N, m)")
    expr = u.v
    for j in range(m + 1):
        lower = u.chain[u.m - j - 1] if j < u.m else u.phi
        yield j, u.scale * (np.asarray(expr(grid), dtype=float) + u.M * np.asarray(lower(grid)))
        expr = -laplacian(expr, N)


def polysuperharmonic_check(u, N: int, m: int, grid=None) -> PolySuperharmonicReport:
    """Minimum of ``(-Lap)^j u`` on the grid for each ``1 <= j <= m``.

    A level passes iff its minimum is at least ``-1e-12`` times the largest
    absolute value of that level on the grid.  Negativity of ``u`` itself is
    reported separately in ``nonnegative``.
    """
    grid = np.geomspace(1e-2, 1e4, 200) if grid is None else np.asarray(grid, dtype=float)
    levels, u0 = [], None
    for j, vals in _level_values(u, N, m, grid):
        if j == 0:
            u0 = vals
            continue
        i = int(np.argmin(vals))
        levels.append(LevelCheck(j, float(vals[i]), float(grid[i]), float(np.abs(vals).max())))
    return PolySuperharmonicReport(levels, bool(np.all(u0 >= 0)), float(u0.min()))


# ---------------------------------------------------------------------------
# radial Poisson cascade


def _as_callable(g):
    if callable(g):
        return lambda r: np.broadcast_to(np.asarray(g(r), dtype=float), np.shape(r))
    c = float(g)
    return lambda r: np.full(np.shape(r), c)


def invert_laplacian(g, N: int, radii, center: float = 0.0) -> np.ndarray:
    """Radial ``w`` with ``Lap w = g``, ``w(0) = center`` and regular centre, on ``radii``."""
    radii = np.asarray(radii, dtype=float)
    if radii[0] <= 0 or np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be positive and strictly increasing")
    g = _as_callable(g)
    x, w = roots_legendre(8)
    x, w = 0.5 * (x + 1.0), 0.5 * w
    edges = np.concatenate([[0.0], radii])
    h = np.diff(edges)
    nodes = edges[:-1, None] + h[:, None] * x[None, :]
    gv = g(nodes.ravel()).reshape(nodes.shape)

    def cumulative(weight):
        return np.cumsum(h * ((weight * gv) @ w))

    if N >= 3:
        out = (cumulative(nodes) - radii ** (2 - N) * cumulative(nodes ** (N - 1))) / (N - 2)
    elif N == 2:
        out = np.log(radii) * cumulative(nodes) - cumulative(nodes * np.log(nodes))
    else:
        out = radii * cumulative(np.ones_like(nodes)) - cumulative(nodes)
    return center + out


@dataclass
class CascadeState:
    """Levels ``u_i = (-Lap)^i u`` (i = 0..m-1) of a radial cascade on ``radii``."""

    N: int
    radii: np.ndarray
    levels: list = field(repr=False)
    center_values: list = field(default_factory=list)

    def laplacian_residuals(self) -> list[float]:
        """Max relative mismatch of finite-difference ``-Lap u_i`` against ``u_{i+1}`` (interior)."""
        out = []
        for lo, hi in zip(self.levels[:-1], self.levels[1:]):
            fd = -log_grid_laplacian(lo, self.radii, self.N)
            ok = np.isfinite(fd)
            out.append(float(np.max(np.abs(fd[ok] - hi[ok])) / max(np.max(np.abs(hi[ok])), 1e-300)))
        return out

    def to_json_dict(self) -> dict:
        return {"N": self.N, "radii": self.radii.tolist(), "center_values": list(self.center_values),
                "levels": [lv.tolist() for lv in self.levels]}


def radial_poisson_cascade(top, N: int, m: int, center_values, radii=None) -> CascadeState:
    """Rebuild ``u, u_1, ..., u_{m-1}`` from ``top = Lap^(m-1) u`` and centre values.

    ``center_values[k] = Lap^k u(0)`` for k = 0..m-2 (a trailing entry for
    k = m-1 is accepted and ignored; the top profile fixes it).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    cv = [float(c) for c in center_values]
    if len(cv) < m - 1:
        raise ValueError(f"need {m - 1} centre values, got {len(cv)}")
    if not all(math.isfinite(c) for c in cv):
        raise ValueError("centre values must be finite")
    radii = np.geomspace(1e-3, 1e2, 1201) if radii is None else np.asarray(radii, dtype=float)
    g = _as_callable(top)
    L = [None] * m
    L[m - 1] = g(radii)
    current = g
    for k in range(m - 2, -1, -1):
        vals = invert_laplacian(current, N, radii, cv[k])
        L[k] = vals
        rr = np.concatenate([[0.0], radii])
        current = CubicSpline(rr, np.concatenate([[cv[k]], vals]), bc_type=((1, 0.0), "not-a-knot"))
    levels = [(-1) ** i * L[i] for i in range(m)]
    return CascadeState(N, radii, levels, cv[: m - 1])


def taylor_denominator(N: int, k: int) -> float:
    """``prod_{j=1}^k (2j)(N+2j-2)``."""
    return float(math.prod(2 * j * (N + 2 * j - 2) for j in range(1, k + 1)))


def taylor_bound(center_values, N: int, m: int, r):
    """``sum_{k=0}^{m-1} Lap^k u(0) r^(2k) / prod_{j=1}^k (2j)(N+2j-2)``."""
    cv = list(center_values)
    if len(cv) != m:
        raise ValueError(f"need m = {m} centre values, got {len(cv)}")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("r must be non-negative")
    out = sum(c * r ** (2 * k) / taylor_denominator(N, k) for k, c in enumerate(cv))
    out = out + np.zeros_like(r)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# cutoff-integral diagnostic


def cutoff(r, R: float, m: int):
    """``phi_R(r) = psi(r/R)^(2m)`` with the exp-smoothstep plateau ``psi``."""
    return smoothstep(np.asarray(r, dtype=float) / R) ** (2 * m)


def _radial_integral(f, N: int, R: float) -> float:
    pieces = [0.0, min(1.0, R), R, 2 * R] if R > 1 else [0.0, R, 2 * R]
    total = 0.0
    for lo, hi in zip(pieces[:-1], pieces[1:]):
        if hi > lo:
            total += quad(lambda r: float(f(r)) * r ** (N - 1), lo, hi, limit=200,
                          epsabs=0.0, epsrel=1e-10)[0]
    return sphere_area(N) * total


@dataclass
class CutoffReport:
    status: str
    R: list
    ratios: list
    min_ratio: float
    slope: float

    def to_json_dict(self) -> dict:
        return dict(self.__dict__)

    def to_csv(self) -> str:
        return "R,ratio\n" + "".join(f"{r!r},{v!r}\n" for r, v in zip(self.R, self.ratios))


def cutoff_integral_estimate(u, N: int, m: int, p: float, q: float, R_values=None,
                             min_slope: float = -0.05) -> CutoffReport:
    """Ratio ``int u phi_R / (R^(2m-N) (int u^((p+q)/2) phi_R)^2)`` across a ladder of R.

    Status is ``Bounded`` when every ratio is positive and the log-log slope is
    at least ``min_slope``, ``Decaying`` otherwise, and ``Degenerate`` when the
    integrals vanish (``u = 0``).
    """
    R_values = [4.0 * 2 ** i for i in range(8)] if R_values is None else [float(x) for x in R_values]
    if any(R <= 2 for R in R_values):
        raise ValueError("ladder radii must exceed 2")
    e = 0.5 * (p + q)

    def ufun(r):
        return float(np.asarray(u(np.asarray(r, dtype=float))))

    ratios = []
    for R in R_values:
        num = _radial_integral(lambda r: ufun(r) * cutoff(r, R, m), N, R)
        den_int = _radial_integral(lambda r: max(ufun(r), 0.0) ** e * cutoff(r, R, m), N, R)
        if num == 0 or den_int == 0:
            return CutoffReport("Degenerate", R_values, [], math.nan, math.nan)
        ratios.append(num / (R ** (2 * m - N) * den_int ** 2))
    ratios_arr = np.asarray(ratios)
    slope = float(np.polyfit(np.log(R_values), np.log(np.abs(ratios_arr)), 1)[0]) if len(ratios) > 1 else 0.0
    ok = bool(np.all(ratios_arr > 0) and slope >= min_slope)
    return CutoffReport("Bounded" if ok else "Decaying", R_values, ratios, float(ratios_arr.min()), slope)


def cutoff_derivative_bound(N: int, m: int, points: int = 101, digits: int = 40) -> dict:
    """Sup over the transition shell of ``|Lap^m(psi^(4m))| / psi^(2m)``.

    ``Lap^m`` is expanded symbolically in terms of the radial derivatives of a
    generic function; those derivatives of ``psi^(4m)`` are evaluated in high
    precision by mpmath.  On ``[0, 1]`` both sides vanish identically.
    """
    import mpmath
    import sympy

    r = sympy.Symbol("r", positive=True)
    f = sympy.Function("f")
    expr = f(r)
    for _ in range(m):
        expr = sympy.diff(expr, r, 2) + (N - 1) / r * sympy.diff(expr, r)
    expr = sympy.expand(expr)
    derivs = [sympy.Derivative(f(r), (r, k)) if k else f(r) for k in range(2 * m + 1)]
    coeffs = [sympy.lambdify(r, expr.coeff(d) if k else expr.subs(
        {dd: 0 for dd in derivs[1:]}).coeff(f(r)), "mpmath") for k, d in enumerate(derivs)]

    mpmath.mp.dps = digits

    def psi(t):
        up = mpmath.exp(-1 / (2 - t)) if t < 2 else mpmath.mpf(0)
        down = mpmath.exp(-1 / (t - 1)) if t > 1 else mpmath.mpf(0)
        return up / (up + down)

    def g(t):
        return psi(t) ** (4 * m)

    best, where = 0.0, math.nan
    for t in np.linspace(1.0, 2.0, points + 2)[1:-1]:
        t = mpmath.mpf(float(t))
        ds = list(mpmath.diffs(g, t, 2 * m))
        val = sum(c(t) * d for c, d in zip(coeffs, ds))
        ratio = float(abs(val) / psi(t) ** (2 * m))
        if ratio > best:
            best, where = ratio, float(t)
    return {"N": N, "m": m, "sup_ratio": best, "argmax": where, "samples": points}
