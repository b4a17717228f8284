"""Admissible convolution kernels and the tail tests used by the classifier.

A kernel ``Psi`` is admissible in dimension N when it is positive, continuous
off the origin, locally integrable, non-increasing, and ``r**N * Psi(r)``
grows without bound.  Three families are supported:

* ``RieszPower(alpha)``: ``r**-alpha`` with ``0 < alpha < N``;
* ``LogBorderline(beta)``: ``r**-N * log(1 + 1/r)**-beta`` with ``1 < beta <= N``;
* ``Tabulated``: samples plus a declared power/log tail law.

Since ``log(1 + 1/r) = 1/r + O(r**-2)``, the log kernel behaves like
``r**(beta - N)`` at infinity with no residual log factor.  Its tail tests
therefore reduce to exponent arithmetic with effective decay ``N - beta``:

* the integral of ``|y|**(-p(N-2m)) Psi(|y|)`` over ``|y| > 1`` diverges iff
  ``p(N-2m) <= beta``;
* ``limsup r**(2N-(N-2m)tau) Psi(r) > 0`` iff ``N + beta - (N-2m)tau >= 0``
  (at equality the limit is 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre

from .profiles import SampledProfile

EXPONENT_TOL = 1e-12
SLOPE_TOL = 1e-9
INCONCLUSIVE_BAND = 0.02
LIMSUP_THRESHOLD = 1e-12


class KernelDomainError(ValueError):
    """Kernel parameters are not admissible in the requested dimension."""


@dataclass(frozen=True)
class RieszPower:
    alpha: float

    def validate(self, N: int) -> None:
        if not 0 < self.alpha < N:
            raise KernelDomainError(f"Riesz kernel needs 0 < alpha < N; got alpha={self.alpha}, N={N}")

    def __call__(self, N: int, r):
        return np.asarray(r, dtype=float) ** (-self.alpha)

    def tail_law(self, N: int) -> tuple[float, float]:
        return -float(self.alpha), 0.0

    def homogeneity(self, N: int) -> float | None:
        return -float(self.alpha)

    def to_json_dict(self) -> dict:
        return {"variant": "riesz", "alpha": self.alpha}


@dataclass(frozen=True)
class LogBorderline:
    beta: float

    def validate(self, N: int) -> None:
        if not 1 < self.beta <= N:
            raise KernelDomainError(f"log kernel needs 1 < beta <= N; got beta={self.beta}, N={N}")

    def __call__(self, N: int, r):
        r = np.asarray(r, dtype=float)
        return r ** (-N) * np.log1p(1.0 / r) ** (-self.beta)

    def tail_law(self, N: int) -> tuple[float, float]:
        return float(self.beta - N), 0.0

    def homogeneity(self, N: int) -> float | None:
        return None

    def local_mass(self, N: int, eps: float) -> float:
        """``int_0^eps Psi(t) t^(N-1) dt``.

        With ``v = log(1 + 1/t)`` this is ``v_eps^(1-beta)/(beta-1)`` plus the
        rapidly converging ``int_{v_eps}^inf v^-beta / (e^v - 1) dv``.
        """
        from scipy.integrate import quad

        v0 = math.log1p(1.0 / eps)
        head = v0 ** (1.0 - self.beta) / (self.beta - 1.0)
        rest = quad(lambda v: v ** -self.beta * math.exp(-v) / -math.expm1(-v), v0, np.inf,
                    epsabs=0.0, epsrel=1e-13)[0]
        return head + rest

    def to_json_dict(self) -> dict:
        return {"variant": "log", "beta": self.beta}


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Kernel known by samples, extended by ``c r**tail (log r)**log_power``.

    Inside the sample range values are interpolated linearly in log-log
    coordinates; below it the first log-log segment is continued.
    """

    profile: SampledProfile
    tail_exponent: float
    tail_log_power: float = 0.0
    _logr: np.ndarray = field(init=False, repr=False)
    _logv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        v = self.profile.values
        if np.any(v <= 0):
            raise KernelDomainError("tabulated kernel samples must be strictly positive")
        if np.any(np.diff(v) > 0):
            raise KernelDomainError("tabulated kernel samples must be non-increasing")
        object.__setattr__(self, "_logr", np.log(self.profile.radii))
        object.__setattr__(self, "_logv", np.log(v))

    def validate(self, N: int) -> None:
        pass

    def __call__(self, N: int, r):
        r = np.asarray(r, dtype=float)
        lr = np.log(r)
        out = np.interp(lr, self._logr, self._logv)
        lo = lr < self._logr[0]
        if np.any(lo):
            slope = (self._logv[1] - self._logv[0]) / (self._logr[1] - self._logr[0])
            out = np.where(lo, self._logv[0] + slope * (lr - self._logr[0]), out)
        hi = lr > self._logr[-1]
        if np.any(hi):
            r_end = self.profile.r_max
            tail = self._logv[-1] + self.tail_exponent * (lr - self._logr[-1])
            if self.tail_log_power and r_end > 1:
                with np.errstate(invalid="ignore", divide="ignore"):
                    tail = tail + self.tail_log_power * (np.log(np.log(np.maximum(r, r_end)))
                                                         - math.log(math.log(r_end)))
            out = np.where(hi, tail, out)
        return np.exp(out)

    def tail_law(self, N: int) -> tuple[float, float]:
        return float(self.tail_exponent), float(self.tail_log_power)

    def homogeneity(self, N: int) -> float | None:
        return None

    def top_decade_slope(self) -> float:
        """Least-squares log-log slope of the samples in the last decade."""
        sel = self._logr >= self._logr[-1] - math.log(10.0)
        if sel.sum() < 2:
            sel[-2:] = True
        return float(np.polyfit(self._logr[sel], self._logv[sel], 1)[0])

    def to_json_dict(self) -> dict:
        return {"variant": "tabulated", "radii": self.profile.radii.tolist(),
                "values": self.profile.values.tolist(),
                "tail_exponent": self.tail_exponent, "tail_log_power": self.tail_log_power}


Kernel = RieszPower | LogBorderline | Tabulated


def tabulate(kernel, N: int, radii, tail_log_power: float = 0.0) -> Tabulated:
    radii = np.asarray(radii, dtype=float)
    exponent, log_power = kernel.tail_law(N)
    return Tabulated(SampledProfile(radii, kernel(N, radii)), exponent, tail_log_power or log_power)


def kernel_from_json(d: dict):
    variant = d.get("variant")
    if variant == "riesz":
        return RieszPower(float(d["alpha"]))
    if variant == "log":
        return LogBorderline(float(d["beta"]))
    if variant == "tabulated":
        prof = SampledProfile(np.asarray(d["radii"], dtype=float), np.asarray(d["values"], dtype=float))
        return Tabulated(prof, float(d["tail_exponent"]), float(d.get("tail_log_power", 0.0)))
    raise ValueError(f"unknown kernel variant {variant!r}; expected riesz, log or tabulated")


def eval_kernel(k, N: int, r):
    """Pointwise kernel value; validates the variant for this dimension."""
    k.validate(N)
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise KernelDomainError("kernel is evaluated at r > 0 only")
    out = k(N, r_arr)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# admissibility


@dataclass
class AdmissibilityReport:
    precondition: bool
    positive: bool = False
    non_increasing: bool = False
    growth_at_infinity: bool = False
    locally_integrable: bool = False
    messages: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (self.precondition and self.positive and self.non_increasing
                and self.growth_at_infinity and self.locally_integrable)

    def to_json_dict(self) -> dict:
        return {"passed": self.passed, "precondition": self.precondition,
                "positive": self.positive, "non_increasing": self.non_increasing,
                "growth_at_infinity": self.growth_at_infinity,
                "locally_integrable": self.locally_integrable, "messages": self.messages}


def _shell_integrals(k, N: int, shells: int = 120, order: int = 16) -> np.ndarray:
    # integral of Psi(r) r^(N-1) over dyadic shells [2^-(i+1), 2^-i], i = 0..shells-1
    x, w = roots_legendre(order)
    lo = -np.arange(1, shells + 1) * math.log(2.0)
    hi = lo + math.log(2.0)
    u = 0.5 * (hi - lo)[:, None] * x[None, :] + 0.5 * (hi + lo)[:, None]
    r = np.exp(u)
    vals = k(N, r) * r ** N
    return 0.5 * (hi - lo) * (vals * w[None, :]).sum(axis=1)


def check_admissible(k, N: int, grid=None) -> AdmissibilityReport:
    """Numerically check the admissibility conditions on a sample grid."""
    grid = np.geomspace(1e-3, 1e5, 512) if grid is None else np.asarray(grid, dtype=float)
    if np.log10(grid[-1] / grid[0]) < 4 - 1e-9:
        raise ValueError("admissibility grid must span at least four decades")
    try:
        k.validate(N)
    except KernelDomainError as exc:
        return AdmissibilityReport(False, messages=[str(exc)])
    rep = AdmissibilityReport(True)
    vals = k(N, grid)
    rep.positive = bool(np.all(vals > 0) and np.all(np.isfinite(vals)))
    rep.non_increasing = bool(np.all(np.diff(vals) <= 1e-14 * np.abs(vals[:-1])))
    top = grid >= grid[-1] / 100.0
    growth = grid[top] ** N * vals[top]
    rep.growth_at_infinity = bool(np.all(np.diff(growth) >= -1e-14 * growth[:-1])
                                  and growth[-1] > growth[0] * (1 + 1e-9))

    shells = _shell_integrals(k, N)
    if not np.all(np.isfinite(shells)):
        rep.locally_integrable = False
        rep.messages.append("non-finite shell integral near the origin")
    else:
        # geometric decay -> integrable; otherwise fit shell ~ i^-b and require b > 1
        tail = shells[-40:]
        ratio = tail[-1] / tail[0] if tail[0] > 0 else 0.0
        if ratio < 1e-6:
            rep.locally_integrable = True
        else:
            idx = np.arange(len(shells) - 40, len(shells)) + 1.0
            b = -np.polyfit(np.log(idx), np.log(tail), 1)[0]
            rep.locally_integrable = bool(b > 1 + INCONCLUSIVE_BAND)
            rep.messages.append(f"shell integrals decay like i^-{b:.3f}")
    for name in ("positive", "non_increasing", "growth_at_infinity", "locally_integrable"):
        if not getattr(rep, name):
            rep.messages.append(f"check failed: {name}")
    return rep


# ---------------------------------------------------------------------------
# tail conditions


def _tail_exponent_numeric(k: Tabulated) -> float:
    return k.top_decade_slope()


def tail_condition_ii2(k, N: int, m: int, tau: float) -> bool:
    """Whether ``limsup_{r->inf} r**(2N - (N-2m) tau) * Psi(r) > 0``."""
    if N <= 2 * m:
        raise ValueError("tail condition requires N > 2m")
    if tau <= 0:
        raise ValueError("tau = p + q must be positive")
    e = 2 * N - (N - 2 * m) * tau
    if isinstance(k, RieszPower):
        return e - k.alpha >= -EXPONENT_TOL
    if isinstance(k, LogBorderline):
        return e + k.beta - N >= -EXPONENT_TOL
    slope = e + _tail_exponent_numeric(k)
    r_top = k.profile.r_max
    h_top = r_top ** e * k.profile.values[-1]
    return bool(slope >= -SLOPE_TOL and h_top > LIMSUP_THRESHOLD)


def integral_condition_ii1(k, N: int, m: int, p: float) -> bool | None:
    """Whether ``int_{|y|>1} |y|**(-p(N-2m)) Psi(|y|) dy`` diverges.

    Returns ``None`` when a tabulated kernel sits within 0.02 of the critical
    decay rate.
    """
    if N <= 2 * m:
        raise ValueError("integral condition requires N > 2m")
    if p <= 0:
        raise ValueError("p must be positive")
    decay = p * (N - 2 * m)
    if math.isinf(decay):
        return False
    if isinstance(k, RieszPower):
        return decay + k.alpha <= N + EXPONENT_TOL
    if isinstance(k, LogBorderline):
        return decay <= k.beta + EXPONENT_TOL
    # integrand ~ r^gamma in the radial variable; diverges iff gamma >= -1
    gamma = -decay + _tail_exponent_numeric(k) + N - 1
    if abs(gamma + 1) < INCONCLUSIVE_BAND:
        return None
    return gamma > -1
