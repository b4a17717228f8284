"""Exact calculus for radial functions of the form sum c * r^(2j) * (a + r^2)^(-s).

The family is closed under the radial Laplacian, so polyharmonic operators of
any order act on it without numerical differentiation.  Coefficients may be
floats or ``fractions.Fraction``; with fractions every operation below stays
exact until :meth:`RadialExpr.__call__` converts to floating point.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Iterable, Sequence

import numpy as np


class RepresentationError(ArithmeticError):
    """Raised when a polyharmonic image does not factor as expected."""


@dataclass(frozen=True)
class RadialTerm:
    """One term ``coeff * r**(2*j) * (a + r**2)**(-s)``."""

    coeff: Real
    j: int
    a: Real
    s: Real

    def __post_init__(self):
        if self.j < 0 or int(self.j) != self.j:
            raise ValueError(f"j must be a non-negative integer, got {self.j!r}")
        if self.a < 0:
            raise ValueError(f"shift a must be non-negative, got {self.a!r}")
        for name in ("coeff", "a", "s"):
            if not math.isfinite(float(getattr(self, name))):
                raise ValueError(f"{name} must be finite")

    @property
    def key(self):
        return (self.a, self.s, self.j)

    @property
    def is_pure_power(self) -> bool:
        return self.a == 0

    @property
    def tail_exponent(self) -> float:
        """Exponent of the large-r power law of this term."""
        return float(2 * self.j - 2 * self.s)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        c, a, s = float(self.coeff), float(self.a), float(self.s)
        if self.a == 0:
            return c * r ** (2 * self.j - 2 * s)
        return c * r ** (2 * self.j) * (a + r * r) ** (-s)


def _zero_like(value):
    return Fraction(0) if isinstance(value, Fraction) else 0.0


class RadialExpr:
    """Canonical finite sum of :class:`RadialTerm`.

    Terms sharing ``(j, a, s)`` are merged, zero coefficients dropped and the
    rest sorted lexicographically by ``(a, s, j)``.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[RadialTerm] = ()):
        merged: dict = {}
        for t in terms:
            if t.a == 0 and t.j:
                t = RadialTerm(t.coeff, 0, t.a, t.s - t.j)
            k = (t.j, t.a, t.s)
            merged[k] = merged.get(k, _zero_like(t.coeff)) + t.coeff
        out = [RadialTerm(c, j, a, s) for (j, a, s), c in merged.items() if c != 0]
        out.sort(key=lambda t: t.key)
        self.terms = tuple(out)

    # constructors -------------------------------------------------------
    @classmethod
    def shifted_power(cls, a, s, coeff=1.0) -> "RadialExpr":
        """``coeff * (a + r^2)^(-s)``."""
        return cls([RadialTerm(coeff, 0, a, s)])

    @classmethod
    def power(cls, exponent, coeff=1.0) -> "RadialExpr":
        """Pure power ``coeff * r**exponent``."""
        return cls([RadialTerm(coeff, 0, 0, -exponent / 2)])

    @classmethod
    def constant(cls, value) -> "RadialExpr":
        return cls([RadialTerm(value, 0, 0, 0)])

    # algebra ------------------------------------------------------------
    def __add__(self, other: "RadialExpr") -> "RadialExpr":
        return RadialExpr(self.terms + other.terms)

    def __sub__(self, other: "RadialExpr") -> "RadialExpr":
        return self + (-1) * other

    def __rmul__(self, scalar) -> "RadialExpr":
        return RadialExpr(RadialTerm(scalar * t.coeff, t.j, t.a, t.s) for t in self.terms)

    __mul__ = __rmul__

    def __neg__(self):
        return (-1) * self

    def __eq__(self, other):
        return isinstance(other, RadialExpr) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        body = " + ".join(f"{t.coeff}*r^{2 * t.j}*({t.a}+r^2)^(-{t.s})" for t in self.terms)
        return f"RadialExpr({body or '0'})"

    # evaluation ---------------------------------------------------------
    def __call__(self, r):
        return evaluate(self, r)

    @property
    def tail_exponent(self) -> float | None:
        """Leading power of r as r -> infinity, or ``None`` for the zero expression."""
        if not self.terms:
            return None
        return max(t.tail_exponent for t in self.terms)

    @property
    def tail_coefficient(self) -> float:
        e = self.tail_exponent
        if e is None:
            return 0.0
        return float(sum(t.coeff for t in self.terms if t.tail_exponent == e))

    breakpoints: tuple = ()

    # serialization ------------------------------------------------------
    def to_json_list(self) -> list[dict]:
        return [{"coeff": float(t.coeff), "j": t.j, "a": float(t.a), "s": float(t.s)}
                for t in self.terms]

    @classmethod
    def from_json_list(cls, data: Sequence[dict]) -> "RadialExpr":
        return cls(RadialTerm(float(d["coeff"]), int(d["j"]), float(d["a"]), float(d["s"]))
                   for d in data)

    def dumps(self) -> str:
        return json.dumps(self.to_json_list())

    @classmethod
    def loads(cls, text: str) -> "RadialExpr":
        return cls.from_json_list(json.loads(text))


def evaluate(expr: RadialExpr, r):
    """Evaluate ``expr`` at radius/radii ``r``.

    ``r = 0`` is accepted unless a pure-power term with negative exponent is
    present, in which case a ``ValueError`` is raised.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ValueError("radius must be non-negative")
    if np.any(r_arr == 0):
        for t in expr.terms:
            if t.is_pure_power and t.tail_exponent < 0:
                raise ValueError("singular pure-power term evaluated at r = 0")
    out = np.zeros_like(r_arr)
    with np.errstate(divide="ignore", invalid="ignore"):
        for t in expr.terms:
            out = out + t(r_arr)
    if out.ndim == 0:
        return float(out)
    return out


def _lap_term(t: RadialTerm, N: int) -> list[RadialTerm]:
    j, a, s, c = t.j, t.a, t.s, t.coeff
    one = Fraction(1) if isinstance(s, Fraction) or isinstance(c, Fraction) else 1
    if a == 0:
        # r^(-2s): one exact term, avoiding float drift from renormalizing j
        k = 2 * s * (2 * s + 2 - N)
        return [RadialTerm(c * k, 0, a, s + one)] if k != 0 else []
    out = []
    k0 = 2 * j * (2 * j + N - 2)
    if k0 != 0:
        out.append(RadialTerm(c * k0, j - 1, a, s))
    if s != 0:
        out.append(RadialTerm(-c * 2 * s * (4 * j + N), j, a, s + one))
        out.append(RadialTerm(c * 4 * s * (s + one), j + 1, a, s + 2 * one))
    return out


def laplacian(expr: RadialExpr, N: int) -> RadialExpr:
    """Radial Laplacian in dimension ``N``, term by term.

    Uses the identity
    Lap[r^2j (a+r^2)^-s] = 2j(2j+N-2) r^(2j-2)(a+r^2)^-s
                           - 2s(4j+N) r^2j (a+r^2)^(-s-1)
                           + 4s(s+1) r^(2j+2) (a+r^2)^(-s-2).
    """
    if N < 1:
        raise ValueError("dimension N must be >= 1")
    terms: list[RadialTerm] = []
    for t in expr.terms:
        terms.extend(_lap_term(t, N))
    return RadialExpr(terms)


def neg_laplacian_power(expr: RadialExpr, N: int, m: int) -> RadialExpr:
    """``(-Lap)^m expr``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    out = expr
    for _ in range(m):
        out = -laplacian(out, N)
    return out


def power_law_coefficient(N: int, m: int, kappa) -> float:
    """Constant c with ``(-Lap)^m r^-kappa = c * r^(-kappa-2m)``."""
    out = Fraction(1) if isinstance(kappa, Fraction) else 1.0
    for j in range(1, m + 1):
        out *= (kappa + 2 * j - 2) * (N - kappa - 2 * j)
    return out


def b_coefficients(N: int, m: int, kappa, a) -> list:
    """Polynomial coefficients of ``(-Lap)^m (a+r^2)^(-kappa/2)``.

    The image equals ``(a+r^2)^(-kappa/2-2m) * sum_j b[j] r^(2j)`` with j = 0..m;
    ``b[m]`` is the leading coefficient (of r^(2m)).  The same quantity is
    labelled ``b_{2m}`` in some texts even though the sum stops at j = m.
    """
    if not 0 < kappa < N - 2 * m:
        raise ValueError(f"kappa must lie in (0, N-2m) = (0, {N - 2 * m}), got {kappa}")
    if a < 0:
        raise ValueError("a must be non-negative")
    half = kappa / 2
    image = neg_laplacian_power(RadialExpr.shifted_power(a, half), N, m)
    zero = _zero_like(image.terms[0].coeff) if image.terms else 0.0
    b = [zero] * (m + 1)
    for t in image.terms:
        shift = t.s - half
        i = round(float(shift))
        if abs(float(shift) - i) > 1e-9 or not 0 <= i <= 2 * m:
            raise RepresentationError(f"term exponent {t.s} is not kappa/2 + integer in [0, 2m]")
        deg = 2 * m - i
        for l in range(deg + 1):
            jj = t.j + l
            if jj > m:
                raise RepresentationError("polynomial degree exceeds 2m")
            apow = a ** (deg - l) if deg - l > 0 else 1
            b[jj] = b[jj] + t.coeff * math.comb(deg, l) * apow
    return b
