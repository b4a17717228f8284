"""Radial convolutions with admissible kernels, brute-force oracles, decay fits
and the radial Newtonian potential chain.

The production path reduces ``(Psi * f^p)(|x|)`` to a double integral over
``rho = |y|`` and the angle between ``x`` and ``y``.  In the relative variable
``s = rho / r`` the mesh is fixed: geometric panels graded toward ``s = 1``
(kernel singularity), toward ``s = 0`` and out to ``s = 2**60``.  For
homogeneous kernels the angular factor depends on ``s`` only, so its table is
computed once per ``(kernel, N)`` and reused for every target radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import gammaln, roots_legendre

from .kernels import LogBorderline, RieszPower
from .profiles import SampledProfile, log_grid

# Gauss-Kronrod 7/15 (QUADPACK qk15 constants)
_XGK = np.array([0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                 0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                 0.207784955007898467600689403773245, 0.0])
_WGK = np.array([0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                 0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                 0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                0.381830050505118944950369775488975, 0.417959183673469387755102040816327])
KRONROD_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes: +-xgk[1], +-xgk[3], +-xgk[5], 0
for _i, _w in zip((1, 3, 5), _WG[:3]):
    GAUSS_WEIGHTS[_i] = _w
    GAUSS_WEIGHTS[14 - _i] = _w
GAUSS_WEIGHTS[7] = _WG[3]

ANGLE_ORDER = 16
ANGLE_LEVELS_BELOW = 20
ANGLE_LEVELS_ABOVE = 56
S_LEVELS_ZERO = 40
S_LEVELS_NEAR = 40
S_LEVELS_FAR = 60


class NonIntegrableError(ArithmeticError):
    """The convolution integral diverges at infinity."""


class QuadratureError(ArithmeticError):
    """Panel refinement failed to reach the requested accuracy."""


class ResolutionError(ArithmeticError):
    """Brute-force grid too coarse for its singular-cell correction."""


class FitQualityError(ArithmeticError):
    """Least-squares decay fit has R^2 below threshold."""


class DecayError(ArithmeticError):
    """A potential in the chain decays too slowly for the next solve."""


def sphere_area(N: int) -> float:
    """Surface area of the unit sphere in R^N."""
    return float(2.0 * math.pi ** (N / 2) / math.exp(gammaln(N / 2)))


# ---------------------------------------------------------------------------
# profile helpers


@dataclass(frozen=True)
class Combination:
    """Linear combination ``sum c_i f_i`` of radial functions."""

    parts: tuple

    @property
    def tail_exponent(self):
        tails = [getattr(f, "tail_exponent", None) for c, f in self.parts if c != 0]
        tails = [t for t in tails if t is not None]
        return max(tails) if tails else None

    @property
    def breakpoints(self) -> tuple:
        out = set()
        for _, f in self.parts:
            out.update(getattr(f, "breakpoints", ()))
        return tuple(sorted(out))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for c, f in self.parts:
            out = out + c * np.asarray(f(r), dtype=float)
        return float(out) if out.ndim == 0 else out


def _profile_tail(f):
    t = getattr(f, "tail_exponent", None)
    return None if t is None else float(t)


def _power(values, p):
    values = np.asarray(values, dtype=float)
    if p == 1:
        return values
    return np.where(values > 0, np.abs(values) ** p, 0.0)


# ---------------------------------------------------------------------------
# angular factor


@lru_cache(maxsize=None)
def _angle_rule():
    x, w = roots_legendre(ANGLE_ORDER)
    return 0.5 * (x + 1.0), 0.5 * w


def angular_factor(k, N: int, r, rho, chunk: int = 4096) -> np.ndarray:
    """Integral of ``Psi(|r e - rho w|)`` over unit vectors ``w`` in R^N."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    r, rho = np.broadcast_arrays(r, rho)
    shape = r.shape
    r, rho = r.ravel(), rho.ravel()
    if N == 1:
        out = k(N, np.abs(r - rho)) + k(N, r + rho)
        return out.reshape(shape)
    u, wu = _angle_rule()
    levels = np.arange(-ANGLE_LEVELS_BELOW, ANGLE_LEVELS_ABOVE + 1, dtype=float)
    out = np.empty(r.size)
    area = sphere_area(N - 1)
    for start in range(0, r.size, chunk):
        rr = r[start:start + chunk]
        pp = rho[start:start + chunk]
        delta = np.abs(rr - pp)
        q = np.sqrt(rr * pp)
        theta_c = np.clip(delta / q, 2.0 ** -52, 1.0)
        edges = np.minimum(math.pi, theta_c[:, None] * 2.0 ** levels[None, :])
        edges[:, -1] = math.pi
        lo, hi = edges[:, :-1], edges[:, 1:]
        width = hi - lo
        theta = lo[:, :, None] + width[:, :, None] * u[None, None, :]
        half = np.sin(0.5 * theta)
        dist = np.sqrt(delta[:, None, None] ** 2 + 4.0 * (rr * pp)[:, None, None] * half * half)
        vals = k(N, dist) * np.sin(theta) ** (N - 2)
        total = (vals * wu[None, None, :]).sum(axis=2)
        total = (total * width).sum(axis=1)
        # leftover [0, theta_0]: distance ~ delta, sin(theta)^(N-2) ~ theta^(N-2)
        theta0 = edges[:, 0]
        total += k(N, np.maximum(delta, 1e-300)) * theta0 ** (N - 1) / (N - 1)
        out[start:start + chunk] = area * total
    return out.reshape(shape)


# ---------------------------------------------------------------------------
# relative mesh


@lru_cache(maxsize=None)
def _base_breakpoints() -> tuple:
    zero = 0.5 * 2.0 ** -np.arange(S_LEVELS_ZERO, 0, -1.0)
    below = 1.0 - 0.5 * 2.0 ** -np.arange(0, S_LEVELS_NEAR + 1.0)
    above = 1.0 + 2.0 ** -np.arange(S_LEVELS_NEAR, -1, -1.0)
    far = 2.0 ** np.arange(2, S_LEVELS_FAR + 1.0)
    pts = np.concatenate([zero, below, above, far])
    return tuple(np.unique(pts))


def _panels(bp):
    """Consecutive panels of ``bp`` except the strip straddling s = 1."""
    lo, hi = bp[:-1], bp[1:]
    keep = ~((lo < 1.0) & (hi > 1.0))
    return lo[keep], hi[keep]


def _panel_nodes(lo, hi):
    lo = np.asarray(lo, dtype=float)[:, None]
    hi = np.asarray(hi, dtype=float)[:, None]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    return mid + half * KRONROD_NODES[None, :], half


@lru_cache(maxsize=64)
def _homogeneous_table(k, N: int):
    """Angular factor A(1, s) on the base Kronrod nodes for a homogeneous kernel."""
    lo, hi = _panels(np.asarray(_base_breakpoints()))
    s, half = _panel_nodes(lo, hi)
    A = angular_factor(k, N, np.ones_like(s), s)
    return lo, hi, A


def _singular_exponent(a_near, a_far, ratio):
    # local power law |s-1|^gamma from two samples at distances eps and ratio*eps
    with np.errstate(divide="ignore", invalid="ignore"):
        gamma = np.log(a_far / a_near) / math.log(ratio)
    if not np.isfinite(gamma):
        return 0.0
    return float(np.clip(gamma, -0.999, 0.0))


class _Integrand:
    """Evaluates one convolution at radius r on a given panel set."""

    def __init__(self, k, f, p, N, r):
        self.k, self.f, self.p, self.N, self.r = k, f, p, N, r
        self.degree = k.homogeneity(N) if hasattr(k, "homogeneity") else None

    def angular(self, s):
        if self.degree is not None:
            return angular_factor(self.k, self.N, np.ones_like(s), s)
        return angular_factor(self.k, self.N, np.full_like(s, self.r), self.r * s)

    def weight(self, s):
        """``f(r s)^p (r s)^(N-1) r``, the non-kernel factor of the integrand."""
        r = self.r
        return _power(self.f(r * s), self.p) * (r * s) ** (self.N - 1) * r

    def kernel_scale(self):
        return self.r ** self.degree if self.degree is not None else 1.0


def convolve_radial(k, f, p: float, N: int, r, *, tol: float = 1e-6, max_refine: int = 12):
    """``(Psi(|.|) * f^p)(x)`` at ``|x| = r`` for a radial profile ``f``.

    ``f`` is any vectorised radial callable (``RadialExpr``, ``SampledProfile``,
    :class:`Combination`, ...).  Its ``tail_exponent`` drives the analytic
    tail beyond the mesh; profiles that do not vanish at infinity must declare
    one.  Raises :class:`NonIntegrableError` when the integral diverges and
    :class:`QuadratureError` when panel refinement stalls above ``tol``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if p < 0:
        raise ValueError("p must be non-negative")
    k.validate(N)
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r_arr <= 0):
        raise ValueError("target radius must be positive")
    _check_tail_integrable(k, f, p, N)
    one = _convolve_centered if isinstance(k, LogBorderline) else _convolve_one
    out = np.array([one(k, f, p, N, float(x), tol, max_refine) for x in r_arr])
    return float(out[0]) if np.ndim(r) == 0 else out


def _check_tail_integrable(k, f, p, N):
    t = _profile_tail(f)
    if t is None or p == 0:
        if t is None and p == 0:
            raise NonIntegrableError("f^0 = 1 is not integrable against the kernel")
        return
    tk, lk = k.tail_law(N)
    expo = p * t + tk + N
    if expo > 1e-12 or (abs(expo) <= 1e-12 and lk >= -1):
        raise NonIntegrableError(
            f"tail integrand ~ rho^{expo - 1:.6g}: f^p * Psi is not integrable at infinity")


def _convolve_one(k, f, p, N, r, tol, max_refine):
    integrand = _Integrand(k, f, p, N, r)
    base_bp = np.asarray(_base_breakpoints())
    extra = [b / r for b in getattr(f, "breakpoints", ()) if base_bp[0] < b / r < base_bp[-1]]
    bp = np.unique(np.concatenate([base_bp, extra])) if extra else base_bp

    # panels: reuse the homogeneous table where the panel is unchanged
    lo, hi = _panels(bp)
    s, half = _panel_nodes(lo, hi)
    if integrand.degree is not None:
        tlo, thi, tA = _homogeneous_table(k, N)
        A = np.empty_like(s)
        if extra:
            index = {(a, b): i for i, (a, b) in enumerate(zip(tlo, thi))}
            fresh = []
            for i, key in enumerate(zip(lo, hi)):
                j = index.get(key)
                if j is None:
                    fresh.append(i)
                else:
                    A[i] = tA[j]
            if fresh:
                A[fresh] = integrand.angular(s[fresh])
        else:
            A = tA
    else:
        A = integrand.angular(s)

    for _ in range(max_refine + 1):
        g = integrand.weight(s) * A
        kron = half[:, 0] * (g * KRONROD_WEIGHTS).sum(axis=1)
        gauss = half[:, 0] * (g * GAUSS_WEIGHTS).sum(axis=1)
        err = np.abs(kron - gauss)
        total = kron.sum()
        scale = integrand.kernel_scale()
        est = err.sum()
        if est <= tol * abs(total) or est * scale <= 1e-300:
            break
        # bisect the panels holding most of the error
        worst = np.argsort(err)[::-1]
        cum = np.cumsum(err[worst])
        pick = worst[: int(np.searchsorted(cum, 0.5 * est)) + 1]
        keep = np.setdiff1d(np.arange(len(lo)), pick)
        mids = 0.5 * (lo[pick] + hi[pick])
        new_lo = np.concatenate([lo[keep], lo[pick], mids])
        new_hi = np.concatenate([hi[keep], mids, hi[pick]])
        ns, nhalf = _panel_nodes(np.concatenate([lo[pick], mids]), np.concatenate([mids, hi[pick]]))
        nA = integrand.angular(ns)
        lo, hi = new_lo, new_hi
        s = np.concatenate([s[keep], ns])
        half = np.concatenate([half[keep], nhalf])
        A = np.concatenate([A[keep], nA])
    else:
        raise QuadratureError(f"relative error estimate {est / abs(total):.2e} above tol {tol:.1e} at r={r}")

    total += _near_correction(integrand)
    total += _zero_correction(integrand, float(lo.min()))
    total += _tail_correction(integrand, float(hi.max()))
    return float(total * integrand.kernel_scale())


def _near_correction(it: _Integrand) -> float:
    # leftover strip around s = 1 not covered by the graded panels
    eps_lo = 0.5 * 2.0 ** -S_LEVELS_NEAR
    eps_hi = 2.0 ** -S_LEVELS_NEAR
    s = np.array([1 - eps_lo, 1 - 2 * eps_lo, 1 + eps_hi, 1 + 2 * eps_hi])
    A = it.angular(s)
    w1 = it.weight(np.array([1.0]))[0]
    total = 0.0
    for a_near, a_far, eps in ((A[0], A[1], eps_lo), (A[2], A[3], eps_hi)):
        gamma = _singular_exponent(a_near, a_far, 2.0)
        total += w1 * a_near * eps / (gamma + 1.0)
    return total


def _zero_correction(it: _Integrand, s0: float) -> float:
    # [0, s0]: integrand ~ C s^(N-1) f(r s)^p with f locally a power law
    w0 = it.weight(np.array([s0, 0.5 * s0]))
    if w0[0] == 0:
        return 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        e = math.log(w0[0] / w0[1]) / math.log(2.0) if w0[1] > 0 else it.N - 1
    A0 = it.angular(np.array([s0]))[0]
    return float(w0[0] * A0 * s0 / (e + 1.0)) if e > -1 else 0.0


def _tail_correction(it: _Integrand, s_max: float) -> float:
    t = _profile_tail(it.f)
    wX = it.weight(np.array([s_max]))[0]
    if wX == 0:
        return 0.0
    if t is None:
        raise NonIntegrableError("profile does not vanish at the mesh end but declares no tail law")
    tk, _ = it.k.tail_law(it.N)
    AX = it.angular(np.array([s_max]))[0]
    expo = it.p * t + tk + it.N  # integrand in s ~ s^(expo-1)
    return float(wX * AX * s_max / (-expo))


# ---------------------------------------------------------------------------
# centred reduction for kernels with a log-type diagonal singularity
#
# For Psi = r^-N log(1+1/r)^-beta the angular factor behaves like
# |r - rho|^-1 log(1/|r - rho|)^-beta near the diagonal, whose strip integral
# converges only like 1/log.  Centring at x instead gives
#     (Psi * f^p)(x) = int_0^inf Psi(t) t^(N-1) M(t) dt,
# with M(t) the integral of f^p over the sphere of radius t about x.  M is
# bounded and continuous, so the whole singularity sits in Psi(t) t^(N-1) at
# t = 0, where the kernel's exact local mass takes over.

CENTER_THETA_PANELS = 8


@lru_cache(maxsize=None)
def _centered_breakpoints() -> tuple:
    zero = 2.0 ** -np.arange(S_LEVELS_ZERO, 0, -1.0)
    far = 2.0 ** np.arange(0, S_LEVELS_FAR + 1.0)
    return tuple(np.unique(np.concatenate([zero, far])))


def _sphere_mean_fp(f, p, N, r, t):
    """Integral of ``f^p`` over the sphere ``|y - x| = t`` (``|x| = r``), per unit area weight."""
    t = np.asarray(t, dtype=float)
    if N == 1:
        return _power(f(np.abs(r - t)), p) + _power(f(r + t), p)
    u, wu = _angle_rule()
    uniform = np.linspace(0.0, math.pi, CENTER_THETA_PANELS + 1)
    bps = [b for b in getattr(f, "breakpoints", ())]
    cols = [np.broadcast_to(uniform, (t.size, uniform.size))]
    for b in bps:
        with np.errstate(divide="ignore", invalid="ignore"):
            c = (b * b - r * r - t * t) / (2.0 * r * t)
        cols.append(np.where(np.abs(c) < 1, np.arccos(np.clip(c, -1, 1)), 0.0)[:, None])
    edges = np.sort(np.concatenate(cols, axis=1), axis=1)
    lo, width = edges[:, :-1], np.diff(edges, axis=1)
    theta = lo[:, :, None] + width[:, :, None] * u[None, None, :]
    dist = np.sqrt(np.maximum(r * r + t[:, None, None] ** 2
                              + 2.0 * r * t[:, None, None] * np.cos(theta), 0.0))
    vals = _power(f(dist.ravel()), p).reshape(dist.shape) * np.sin(theta) ** (N - 2)
    return sphere_area(N - 1) * ((vals * wu).sum(axis=2) * width).sum(axis=1)


def _convolve_centered(k, f, p, N, r, tol, max_refine):
    base = np.asarray(_centered_breakpoints())
    extra = []
    for b in getattr(f, "breakpoints", ()):
        extra += [abs(b - r) / r, (b + r) / r]
    extra.append(1.0)
    extra = [e for e in extra if base[0] < e < base[-1]]
    bp = np.unique(np.concatenate([base, extra]))
    lo, hi = bp[:-1], bp[1:]

    def panel(lo, hi):
        tau, half = _panel_nodes(lo, hi)
        t = r * tau
        g = (k(N, t.ravel()) * t.ravel() ** (N - 1)
             * _sphere_mean_fp(f, p, N, r, t.ravel())).reshape(t.shape)
        return r * half[:, 0] * (g * KRONROD_WEIGHTS).sum(axis=1), \
            r * half[:, 0] * (g * GAUSS_WEIGHTS).sum(axis=1)

    kron, gauss = panel(lo, hi)
    for _ in range(max_refine + 1):
        err = np.abs(kron - gauss)
        total, est = kron.sum(), err.sum()
        if est <= tol * abs(total) or est <= 1e-300:
            break
        worst = np.argsort(err)[::-1]
        pick = worst[: int(np.searchsorted(np.cumsum(err[worst]), 0.5 * est)) + 1]
        keep = np.setdiff1d(np.arange(len(lo)), pick)
        mids = 0.5 * (lo[pick] + hi[pick])
        nlo, nhi = np.concatenate([lo[pick], mids]), np.concatenate([mids, hi[pick]])
        nk, ng = panel(nlo, nhi)
        lo, hi = np.concatenate([lo[keep], nlo]), np.concatenate([hi[keep], nhi])
        kron, gauss = np.concatenate([kron[keep], nk]), np.concatenate([gauss[keep], ng])
    else:
        raise QuadratureError(f"relative error estimate {est / abs(total):.2e} above tol {tol:.1e} at r={r}")

    # [0, t0]: M(t) -> |S^(N-1)| f(r)^p, the kernel's local mass is exact
    t0 = r * float(lo.min())
    total += sphere_area(N) * float(_power(f(np.array([r])), p)[0]) * k.local_mass(N, t0)
    # beyond the mesh: M(t) ~ |S^(N-1)| f(t)^p
    t_end = r * float(hi.max())
    tail = _profile_tail(f)
    far = sphere_area(N) * float(_power(f(np.array([t_end])), p)[0]) * float(k(N, t_end)) * t_end ** N
    if far:
        if tail is None:
            raise NonIntegrableError("profile does not vanish at the mesh end but declares no tail law")
        total += far / -(p * tail + k.tail_law(N)[0] + N)
    return float(total)


# ---------------------------------------------------------------------------
# brute-force oracle


def _axis_cells(center: float, h: float, L: float, outer: float | None, growth: float):
    i_lo = math.ceil((-L + 0.5 * h - center) / h - 1e-9)
    i_hi = math.floor((L - 0.5 * h - center) / h + 1e-9)
    idx = np.arange(i_lo, i_hi + 1)
    mids = center + h * idx
    widths = np.full(mids.shape, h)
    singular = np.where(idx == 0)[0]
    if outer is not None and outer > L:
        right_edge = mids[-1] + 0.5 * h
        left_edge = mids[0] - 0.5 * h
        ext_r, w = [], h
        edge = right_edge
        while edge < outer:
            w *= growth
            ext_r.append((edge + 0.5 * w, w))
            edge += w
        ext_l, w = [], h
        edge = left_edge
        while edge > -outer:
            w *= growth
            ext_l.append((edge - 0.5 * w, w))
            edge -= w
        lm = np.array([c for c, _ in ext_l[::-1]])
        lw = np.array([w for _, w in ext_l[::-1]])
        rm = np.array([c for c, _ in ext_r])
        rw = np.array([w for _, w in ext_r])
        offset = len(lm)
        mids = np.concatenate([lm, mids, rm])
        widths = np.concatenate([lw, widths, rw])
        singular = singular + offset
    return mids, widths, (int(singular[0]) if singular.size else None)


def convolve_bruteforce(k, f, p: float, N: int, box_halfwidth: float, cells_per_axis: int, x,
                        *, outer_halfwidth: float | None = None, growth: float = 1.08) -> float:
    """Midpoint-rule oracle for ``(Psi * f^p)(x)`` on a tensor grid in R^N.

    Cells are cubes of side ``2 * box_halfwidth / cells_per_axis`` aligned so
    that ``x`` is a cell centre.  The singular cell is replaced by the
    integral over the ball of equal volume with ``f`` frozen at ``x``.  With
    ``outer_halfwidth`` the grid continues with geometrically growing cells.
    This is a verification oracle; it is slow and only supports N <= 3.
    """
    if N not in (1, 2, 3):
        raise ValueError("brute-force oracle supports N in {1, 2, 3}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size == 1 and N > 1:
        x = np.concatenate([x, np.zeros(N - 1)])
    if x.size != N:
        raise ValueError("point x must have N coordinates")
    k.validate(N)
    L = float(box_halfwidth)
    h = 2.0 * L / cells_per_axis
    axes = [_axis_cells(x[d], h, L, outer_halfwidth, growth) for d in range(N)]

    # declared tail beyond the box must be negligible
    extent = outer_halfwidth or L
    t = _profile_tail(f)
    fL = float(np.asarray(f(np.array([extent])))[0])
    if fL != 0 and t is None:
        raise ValueError("profile is non-zero at the box edge and declares no tail law")

    total = 0.0
    m0, w0, s0 = axes[0]
    rest = axes[1:]
    if rest:
        grids = np.meshgrid(*[a[0] for a in rest], indexing="ij")
        wgrid = np.ones_like(grids[0])
        for g_w in np.meshgrid(*[a[1] for a in rest], indexing="ij"):
            wgrid = wgrid * g_w
        rest_sq = sum(g * g for g in grids)
        rest_dsq = sum((g - x[d + 1]) ** 2 for d, g in enumerate(grids))
    else:
        rest_sq = np.zeros(())
        rest_dsq = np.zeros(())
        wgrid = np.ones(())
    sing_rest = tuple(a[2] for a in rest)
    for i, (c, w) in enumerate(zip(m0, w0)):
        rad = np.sqrt(c * c + rest_sq)
        dist = np.sqrt((c - x[0]) ** 2 + rest_dsq)
        vals = _power(f(rad), p)
        is_sing = (i == s0) and all(si is not None for si in sing_rest)
        with np.errstate(divide="ignore"):
            kv = k(N, np.where(dist > 0, dist, 1.0))
        if is_sing:
            kv = np.array(kv, copy=True)
            kv[sing_rest] = 0.0
        total += float((vals * kv * wgrid).sum() * w)

    correction = 0.0
    if s0 is not None and all(si is not None for si in sing_rest):
        area = sphere_area(N)
        rho_h = h * (N / area) ** (1.0 / N)
        fx = float(_power(f(np.array([np.linalg.norm(x)])), p)[0])
        if fx:
            val, _ = integrate.quad(lambda t_: k(N, np.array([t_]))[0] * t_ ** (N - 1), 0.0, rho_h,
                                    limit=200)
            correction = fx * area * val
    total += correction
    if total and abs(correction) > 0.01 * abs(total):
        raise ResolutionError(f"singular-cell correction is {abs(correction / total):.2%} of the total")
    if fL != 0:
        tk, _ = k.tail_law(N)
        expo = p * t + tk + N
        if expo >= 0:
            raise NonIntegrableError("tail not integrable")
        tail = sphere_area(N) * fL ** p * k(N, np.array([extent]))[0] * extent ** N / (-expo)
        if total and tail > 1e-3 * abs(total):
            raise ValueError(f"box too small: declared tail contributes {tail / total:.3%}")
    return total


# ---------------------------------------------------------------------------
# decay fits


@dataclass
class DecayFit:
    label: str
    slope: float
    predicted_slope: float
    log_power: float | None
    r_squared: float
    radii: np.ndarray
    values: np.ndarray

    def to_json_dict(self) -> dict:
        return {"label": self.label, "slope": self.slope, "predicted_slope": self.predicted_slope,
                "log_power": self.log_power, "r_squared": self.r_squared,
                "radii": self.radii.tolist(), "values": self.values.tolist()}


def decay_fit(alpha: float, f, N: int, window=(1e2, 1e6), points: int = 33,
              min_r_squared: float = 0.99) -> DecayFit:
    """Fit the large-r decay of ``|x|^-alpha * f`` and classify it.

    With ``f ~ r^-beta`` the three regimes are beta < N (slope N - alpha - beta),
    beta = N (slope -alpha times a log factor) and beta > N (slope -alpha).
    In the critical regime ``log g`` is regressed on ``log r`` and
    ``log log r`` jointly; the second coefficient is the fitted log power.
    """
    t = _profile_tail(f)
    if t is None:
        raise ValueError("decay fit needs a profile with a declared power tail")
    beta = -t
    if not beta > N - alpha:
        raise ValueError(f"decay rate beta={beta} must exceed N - alpha = {N - alpha}")
    lo, hi = window
    if lo < 1e2:
        raise ValueError("fit window must start at r >= 1e2")
    radii = np.geomspace(lo, hi, points)
    g = convolve_radial(RieszPower(alpha), f, 1.0, N, radii)
    lr, lg = np.log(radii), np.log(g)
    if abs(beta - N) <= 1e-9:
        label, predicted = "critical", -alpha
        X = np.column_stack([np.ones_like(lr), lr, np.log(lr)])
    elif beta < N:
        label, predicted = "subcritical", N - alpha - beta
        X = np.column_stack([np.ones_like(lr), lr])
    else:
        label, predicted = "supercritical", -alpha
        X = np.column_stack([np.ones_like(lr), lr])
    coef, *_ = np.linalg.lstsq(X, lg, rcond=None)
    resid = lg - X @ coef
    ss_tot = float(((lg - lg.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    if r2 < min_r_squared:
        raise FitQualityError(f"decay fit R^2 = {r2:.4f} < {min_r_squared}")
    return DecayFit(label, float(coef[1]), float(predicted),
                    float(coef[2]) if label == "critical" else None, r2, radii, g)


# ---------------------------------------------------------------------------
# Newtonian potential chain


@lru_cache(maxsize=None)
def _interval_rule(order: int = 8):
    x, w = roots_legendre(order)
    return 0.5 * (x + 1.0), 0.5 * w


def with_breakpoints(radii, f) -> np.ndarray:
    """``radii`` with the profile's in-range breakpoints inserted."""
    radii = np.asarray(radii, dtype=float)
    extra = [b for b in getattr(f, "breakpoints", ()) if radii[0] < b < radii[-1]]
    return np.unique(np.concatenate([radii, extra])) if extra else radii


def _interval_integrals(g, radii, power):
    """``int s^power g(s) ds`` over each grid interval (Gauss-Legendre in log s)."""
    x, w = _interval_rule()
    u = np.log(radii)
    lo, du = u[:-1], np.diff(u)
    nodes = np.exp(lo[:, None] + du[:, None] * x[None, :])
    vals = np.asarray(g(nodes.ravel()), dtype=float).reshape(nodes.shape)
    return du * ((nodes ** (power + 1) * vals) @ w)


def newtonian_potential(g, N: int, radii) -> np.ndarray:
    """Radial decaying solution of ``-Lap W = g`` in R^N (N >= 3) on ``radii``.

    Uses ``W(r) = [r^(2-N) int_0^r s^(N-1) g ds + int_r^inf s g ds] / (N - 2)``,
    which equals ``int_r^inf t^(1-N) int_0^t s^(N-1) g ds dt``.  Beyond the
    last radius ``g`` follows its declared tail law.
    """
    if N < 3:
        raise ValueError("decaying potentials need N >= 3")
    radii = np.asarray(radii, dtype=float)
    r0, r_end = radii[0], radii[-1]
    x, w = _interval_rule()
    head_nodes = r0 * x
    head = r0 * float((head_nodes ** (N - 1) * np.asarray(g(head_nodes), dtype=float)) @ w)
    inner = head + np.concatenate([[0.0], np.cumsum(_interval_integrals(g, radii, N - 1))])
    pieces = _interval_integrals(g, radii, 1)
    outer = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])
    g_end = float(np.asarray(g(np.array([r_end])))[0])
    t = _profile_tail(g)
    if g_end == 0:
        outer_tail = 0.0
    elif t is None:
        raise DecayError("source does not vanish at the grid end and declares no tail")
    elif t >= -2:
        raise DecayError(f"source tail r^{t} decays too slowly: int s g ds diverges")
    else:
        outer_tail = g_end * r_end ** 2 / (-t - 2)
    return (radii ** (2 - N) * inner + outer + outer_tail) / (N - 2)


def newtonian_potential_chain(f, N: int, m: int, radii=None) -> list[SampledProfile]:
    """Profiles ``W_1..W_m`` with ``-Lap W_1 = f`` and ``-Lap W_{k+1} = W_k``.

    ``(-Lap)^m W_m = f`` holds by construction.  Each ``W_k`` carries the
    declared tail ``r^(2k-N)``; :func:`chain_tail_constants` reports the
    matching constants.
    """
    if N <= 2 * m:
        raise ValueError("potential chain requires N > 2m")
    if radii is None:
        radii = f.radii if isinstance(f, SampledProfile) else log_grid()
    radii = with_breakpoints(radii, f)
    src_tail = _profile_tail(f)
    if src_tail is not None and src_tail >= -N:
        if float(np.asarray(f(radii[-1:]))[0]) != 0:
            raise DecayError("source must be compactly supported or decay faster than r^-N")
    chain = []
    g = f
    for level in range(1, m + 1):
        W = newtonian_potential(g, N, radii)
        if np.any(W < -1e-12 * np.abs(W).max()):
            raise DecayError(f"level {level} potential is negative; source must be non-negative")
        prof = SampledProfile(radii, np.maximum(W, 0.0), float(2 * level - N))
        chain.append(prof)
        g = prof
    return chain


def chain_tail_constants(chain, N: int, decades: float = 1.0) -> list[dict]:
    """Fit ``W_k ~ c r^e`` over the last ``decades`` of each level."""
    out = []
    for level, prof in enumerate(chain, start=1):
        sel = prof.radii >= prof.r_max / 10 ** decades
        lr, lw = np.log(prof.radii[sel]), np.log(prof.values[sel])
        slope, icpt = np.polyfit(lr, lw, 1)
        out.append({"level": level, "slope": float(slope), "expected_slope": float(2 * level - N),
                    "constant": float(prof.values[-1] * prof.r_max ** (N - 2 * level)),
                    "fitted_constant": float(math.exp(icpt))})
    return out


# ---------------------------------------------------------------------------
# finiteness of the convolution at infinity


@dataclass
class FinitenessReport:
    finite: bool | None
    profile_tail: float | None
    kernel_tail: float
    integrand_exponent: float | None
    method: str

    def to_json_dict(self) -> dict:
        return dict(self.__dict__)


def finiteness_check(f, k, p: float, N: int) -> FinitenessReport:
    """Decide whether ``int_{|y|>1} f(y)^p Psi(|y|/2) dy`` is finite.

    Symbolic from the declared tails when available; otherwise the local
    log-log slope of ``f`` over ``[1e3, 1e6]`` is used and the answer is
    ``None`` within 0.02 of the critical exponent.
    """
    tk, lk = k.tail_law(N)
    t = _profile_tail(f)
    if t is None:
        probe = np.asarray(f(np.array([1e6, 1e7, 1e8])), dtype=float)
        if np.all(probe == 0):
            return FinitenessReport(True, None, tk, None, "compact support")
        slope = float(np.polyfit(np.log([1e6, 1e7, 1e8]), np.log(np.maximum(probe, 1e-300)), 1)[0])
        expo = p * slope + tk + N - 1
        if abs(expo + 1) < 0.02:
            return FinitenessReport(None, slope, tk, expo, "numeric slope (inconclusive)")
        return FinitenessReport(bool(expo < -1), slope, tk, expo, "numeric slope")
    expo = p * t + tk + N - 1
    if abs(expo + 1) <= 1e-12:
        finite = lk < -1
    else:
        finite = expo < -1
    return FinitenessReport(bool(finite), t, tk, expo, "symbolic tails")
