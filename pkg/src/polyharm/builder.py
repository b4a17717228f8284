"""Explicit supersolutions for the Riesz-kernel inequality inside the existence region.

Pipeline (all choices deterministic):

1. ``choose_kappa``: decay rate ``kappa`` of the building block
   ``v = (a + r^2)^(-kappa/2)``;
2. ``choose_a``: shift with positive leading coefficient ``b_m(a)`` of
   ``F = (-Lap)^m v``;
3. ``lower_bound_radius``: ``R`` with ``F >= c r^(-kappa-2m)`` on ``[R, inf)``;
4. ``build_correction``: ``W`` with ``(-Lap)^m W = phi`` exactly, ``phi`` a
   smooth plateau equal to 1 on ``[0, R]``;
5. ``assemble_and_scale``: ``V = v + M W`` and ``U = C^(1/(p+q-1)) V``;
6. ``verify_supersolution``: pointwise margin of ``(-Lap)^m U - (Psi * U^p) U^q``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .classifier import ProblemParams, in_riesz_region
from .kernels import RieszPower
from .profiles import Plateau, SampledProfile
from .radial_expr import RadialExpr, b_coefficients, neg_laplacian_power
from .riesz import Combination, convolve_radial, finiteness_check, newtonian_potential_chain

SAFETY = 0.9
A_FLOOR = 2.0 ** -40
R_SEARCH_MAX = 1e6
R_LIMIT = 1e4


class InfeasibleError(ValueError):
    """The requested exponents lie outside the existence region."""


class ConstructionError(ArithmeticError):
    """A construction step failed a positivity or search requirement."""


def _riesz_alpha(params: ProblemParams) -> float:
    if not isinstance(params.kernel, RieszPower):
        raise InfeasibleError("explicit constructions exist only for the Riesz kernel r^-alpha")
    return float(params.kernel.alpha)


def kappa_bounds(N: int, m: int, alpha: float, p: float, q: float) -> dict:
    """The three lower bounds on kappa (clamped at 0) and the upper bound N - 2m."""
    if q <= 1:
        raise InfeasibleError("construction needs q > 1")
    return {
        "kappa(p+q-1) > N-alpha+2m": max(0.0, (N - alpha + 2 * m) / (p + q - 1)),
        "kappa p > N-alpha": max(0.0, (N - alpha) / p),
        "kappa(q-1) > 2m-alpha": max(0.0, (2 * m - alpha) / (q - 1)),
        "upper": float(N - 2 * m),
    }


def choose_kappa(N: int, m: int, alpha: float, p: float, q: float) -> float:
    """Midpoint of ``(kappa_min, N-2m)``; nudged by 1% of the interval if ``p kappa = N``."""
    bounds = kappa_bounds(N, m, alpha, p, q)
    upper = bounds.pop("upper")
    binding = max(bounds, key=bounds.get)
    kmin = bounds[binding]
    if kmin >= upper:
        raise InfeasibleError(f"no admissible kappa: constraint '{binding}' needs kappa > {kmin:.6g} "
                              f"but kappa < N-2m = {upper:.6g}")
    kappa = 0.5 * (kmin + upper)
    if math.isclose(p * kappa, N, rel_tol=1e-12):
        kappa += 0.01 * (upper - kmin)
    return kappa


def choose_a(N: int, m: int, kappa: float) -> float:
    """Largest ``a`` in ``1, 1/2, 1/4, ...`` with ``b_m(a) > 0``."""
    a = 1.0
    while a >= A_FLOOR:
        if b_coefficients(N, m, kappa, a)[m] > 0:
            return a
        a *= 0.5
    raise ConstructionError("no a >= 2^-40 with b_m(a) > 0; b_m(0) should be positive")


def image(N: int, m: int, kappa: float, a: float) -> RadialExpr:
    """``F(a, r) = (-Lap)^m (a + r^2)^(-kappa/2)`` as an exact expression."""
    return neg_laplacian_power(RadialExpr.shifted_power(a, kappa / 2), N, m)


def _tail_ratio_bound(b, m, kappa, a, r_end) -> float:
    # F r^(kappa+2m) = x^(kappa/2+2m) * sum_j b_j r^(2(j-m)),  x = r^2/(a+r^2) increasing,
    # so for r >= r_end it is at least x_end^(kappa/2+2m) (b_m - sum_{j<m} |b_j| r_end^(2(j-m)))
    x = r_end ** 2 / (a + r_end ** 2)
    lead = b[m] - sum(abs(b[j]) * r_end ** (2 * (j - m)) for j in range(m))
    return x ** (kappa / 2 + 2 * m) * lead


def lower_bound_radius(N: int, m: int, kappa: float, a: float, points: int = 2401):
    """``(c_lower, R)`` with ``F(a, r) >= c_lower r^(-kappa-2m)`` for ``r >= R``.

    ``c_lower = b_m(a)/2``.  ``R`` is the smallest sampled radius above 1 from
    which every sampled ratio up to 1e6 is at least ``c_lower``; beyond 1e6 an
    explicit lower bound on the ratio is checked.
    """
    b = b_coefficients(N, m, kappa, a)
    if b[m] <= 0:
        raise ConstructionError(f"b_m(a) = {b[m]} is not positive")
    c = b[m] / 2
    if a == 0:
        return c, 1.0
    F = image(N, m, kappa, a)
    radii = np.geomspace(1.0, R_SEARCH_MAX, points)[1:]
    ratio = F(radii) * radii ** (kappa + 2 * m)
    bad = np.nonzero(ratio < c)[0]
    i = 0 if bad.size == 0 else bad[-1] + 1
    if i >= radii.size or radii[i] > R_LIMIT:
        raise ConstructionError(f"ratio F r^(kappa+2m) stays below {c:.4g} up to r = {R_LIMIT:g}; "
                                f"min ratio {ratio.min():.4g}")
    if _tail_ratio_bound(b, m, kappa, a, radii[-1]) < c:
        raise ConstructionError("tail bound on F r^(kappa+2m) falls below c_lower beyond the grid")
    return float(c), float(radii[i])


def correction_grid(R: float, points: int = 4097) -> np.ndarray:
    return np.geomspace(1e-4 * min(R, 1.0), 1e7 * max(R, 1.0), points)


def build_correction(N: int, m: int, R: float, radii=None):
    """Plateau ``phi`` (1 on ``[0, R]``, 0 beyond ``2R``) and its potential chain.

    The last chain element ``W`` satisfies ``(-Lap)^m W = phi``; the full chain
    ``[W_1, ..., W_m]`` is returned for poly-superharmonicity checks.
    """
    if N <= 2 * m:
        raise ValueError("correction requires N > 2m")
    phi = Plateau(float(R))
    chain = newtonian_potential_chain(phi, N, m, correction_grid(R) if radii is None else radii)
    return phi, chain


@dataclass
class Construction:
    N: int
    m: int
    alpha: float
    p: float
    q: float
    kappa: float
    a: float
    c_lower: float
    R: float
    M: float
    C1: float
    C2: float
    C: float
    scale: float
    chain: list = field(repr=False)
    safety: float = SAFETY
    argmin_radius: float = float("nan")

    @property
    def kernel(self) -> RieszPower:
        return RieszPower(self.alpha)

    @property
    def params(self) -> ProblemParams:
        return ProblemParams(self.N, self.m, "plus", self.kernel, self.p, self.q)

    @property
    def v(self) -> RadialExpr:
        return RadialExpr.shifted_power(self.a, self.kappa / 2)

    @property
    def F(self) -> RadialExpr:
        return image(self.N, self.m, self.kappa, self.a)

    @property
    def phi(self) -> Plateau:
        return Plateau(self.R)

    @property
    def W(self) -> SampledProfile:
        return self.chain[-1]

    @property
    def V(self) -> Combination:
        return Combination(((1.0, self.v), (self.M, self.W)))

    def U(self, scale: float | None = None) -> Combination:
        s = self.scale if scale is None else scale
        return Combination(((s, self.v), (s * self.M, self.W)))

    def lhs(self, r, scale: float | None = None):
        """``(-Lap)^m U = scale (F + M phi)``, exact."""
        s = self.scale if scale is None else scale
        r = np.asarray(r, dtype=float)
        return s * (self.F(r) + self.M * self.phi(r))

    def sample_u(self, radii) -> SampledProfile:
        radii = np.asarray(radii, dtype=float)
        return SampledProfile(radii, self.U()(radii), -self.kappa)

    def to_json_dict(self) -> dict:
        return {
            "params": {"N": self.N, "m": self.m, "alpha": self.alpha, "p": self.p, "q": self.q},
            "kappa": self.kappa, "a": self.a, "c_lower": self.c_lower, "R": self.R, "M": self.M,
            "C1": self.C1, "C2": self.C2, "C": self.C, "safety": self.safety, "scale": self.scale,
            "argmin_radius": self.argmin_radius,
            "v": self.v.to_json_list(),
            "chain": [w.to_json_dict() for w in self.chain],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Construction":
        pr = d["params"]
        chain = [SampledProfile.from_json_dict(w) for w in d["chain"]]
        return cls(int(pr["N"]), int(pr["m"]), float(pr["alpha"]), float(pr["p"]), float(pr["q"]),
                   float(d["kappa"]), float(d["a"]), float(d["c_lower"]), float(d["R"]),
                   float(d["M"]), float(d["C1"]), float(d["C2"]), float(d["C"]), float(d["scale"]),
                   chain, float(d.get("safety", SAFETY)), float(d.get("argmin_radius", "nan")))

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "Construction":
        return cls.from_json_dict(json.loads(text))


def construction_grid(points: int = 541) -> np.ndarray:
    """Radii where the constants C1, C2 are sampled (offset from the default verify grid)."""
    return np.geomspace(1e-3, 1e6, points) * 1.0137


def assemble_and_scale(params: ProblemParams, kappa: float, a: float, c_lower: float, R: float,
                       chain: list, radii=None, safety: float = SAFETY) -> Construction:
    """Combine ``v`` and the correction, then scale so the inequality holds.

    ``C1`` (``r >= R``) and ``C2`` (``r < R``) are sampled infima of
    ``(F + M phi) / ((Psi * V^p) V^q)``; ``C = safety * min(C1, C2)`` absorbs
    the variation between samples.
    """
    N, m, p, q = params.N, params.m, params.p, params.q
    alpha = _riesz_alpha(params)
    F = image(N, m, kappa, a)
    phi = Plateau(R)
    M = max(1.0, 2.0 * max(0.0, -float(np.min(F(np.linspace(0.0, R, 2001))))))
    cons = Construction(N, m, alpha, p, q, kappa, a, c_lower, R, M, math.nan, math.nan, math.nan,
                        math.nan, chain, safety)
    V = cons.V
    fin = finiteness_check(V, cons.kernel, p, N)
    if not fin.finite:
        raise ConstructionError(f"(Psi * V^p) is not finite: integrand exponent {fin.integrand_exponent}")
    radii = construction_grid() if radii is None else np.asarray(radii, dtype=float)
    lhs = F(radii) + M * phi(radii)
    rhs = convolve_radial(cons.kernel, V, p, N, radii) * V(radii) ** q
    ratio = lhs / rhs
    if np.any(~np.isfinite(ratio)) or np.any(ratio <= 0):
        raise ConstructionError(f"non-positive ratio at r = {radii[np.argmin(ratio)]:.4g}")
    outer = radii >= R
    cons.C1 = float(ratio[outer].min()) if outer.any() else math.inf
    cons.C2 = float(ratio[~outer].min()) if (~outer).any() else math.inf
    cons.C = safety * min(cons.C1, cons.C2)
    cons.scale = cons.C ** (1.0 / (p + q - 1))
    cons.argmin_radius = float(radii[np.argmin(ratio)])
    return cons


def construct(params: ProblemParams, radii=None) -> Construction:
    """Full pipeline for a point of the existence region."""
    params.validate()
    alpha = _riesz_alpha(params)
    N, m, p, q = params.N, params.m, params.p, params.q
    if not in_riesz_region(N, m, alpha, p, q) or p < 1:
        raise InfeasibleError("(p, q) lies outside the existence region")
    kappa = choose_kappa(N, m, alpha, p, q)
    a = choose_a(N, m, kappa)
    c_lower, R = lower_bound_radius(N, m, kappa, a)
    _, chain = build_correction(N, m, R)
    return assemble_and_scale(params, kappa, a, c_lower, R, chain, radii)


@dataclass
class Certification:
    passed: bool
    tol: float
    scale: float
    min_normalized_margin: float
    argmin_radius: float
    radii: np.ndarray = field(repr=False)
    lhs: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)

    @property
    def margin(self) -> np.ndarray:
        return self.lhs - self.rhs

    def to_json_dict(self, include_samples: bool = True) -> dict:
        out = {"status": "PASS" if self.passed else "FAIL", "tol": self.tol, "scale": self.scale,
               "min_normalized_margin": self.min_normalized_margin,
               "argmin_radius": self.argmin_radius, "points": int(self.radii.size)}
        if include_samples:
            out["samples"] = [{"r": float(r), "lhs": float(l), "rhs": float(h)}
                              for r, l, h in zip(self.radii, self.lhs, self.rhs)]
        return out


def verify_grid(r_min: float = 1e-2, r_max: float = 1e4, points: int = 200) -> np.ndarray:
    return np.geomspace(r_min, r_max, points)


def verify_supersolution(cons: Construction, radii=None, tol: float = 1e-8,
                         scale: float | None = None) -> Certification:
    """Check ``(-Lap)^m U >= (Psi * U^p) U^q`` at each radius.

    PASS iff ``margin >= -tol (1 + |lhs|)`` everywhere.  ``scale`` overrides
    the stored scale (used for mutation and scaling tests).
    """
    radii = verify_grid() if radii is None else np.asarray(radii, dtype=float)
    s = cons.scale if scale is None else float(scale)
    lhs = np.asarray(cons.lhs(radii, s), dtype=float)
    if s == 0:
        rhs = np.zeros_like(radii)
    else:
        U = cons.U(s)
        rhs = convolve_radial(cons.kernel, U, cons.p, cons.N, radii) * U(radii) ** cons.q
    normalized = (lhs - rhs) / (1.0 + np.abs(lhs))
    i = int(np.argmin(normalized))
    return Certification(bool(normalized[i] >= -tol), tol, s, float(normalized[i]),
                         float(radii[i]), radii, lhs, rhs)
