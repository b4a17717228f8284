"""Radial profiles: tabulated samples and a few exact helper shapes.

Every profile is a vectorised callable ``f(r)`` carrying two attributes the
quadrature code relies on:

``tail_exponent``
    declared power law ``f ~ c r**tail`` beyond the data (``None`` means the
    profile vanishes identically at large r).
``breakpoints``
    radii where ``f`` is not smooth; convolution meshes split there.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator


class TailError(ValueError):
    """A profile is evaluated beyond its data without a declared tail law."""


def log_grid(r_min: float = 1e-3, r_max: float = 1e5, points: int = 512) -> np.ndarray:
    if not 0 < r_min < r_max:
        raise ValueError("grid bounds must satisfy 0 < r_min < r_max")
    if points < 2:
        raise ValueError("grid needs at least two points")
    return np.geomspace(r_min, r_max, points)


@dataclass(frozen=True, eq=False)
class SampledProfile:
    """Radial function known on a strictly increasing positive grid.

    Inside the grid values are interpolated with a cubic spline in
    ``(log r, log f)`` when every sample is positive and with PCHIP in
    ``(log r, f)`` otherwise.  Below the first radius the first value is
    continued (regular centre); above the last radius the declared tail law is
    matched to the last sample.
    """

    radii: np.ndarray
    values: np.ndarray
    tail_exponent: float | None = None
    breakpoints: tuple = ()
    _interp: object = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or r.size < 2:
            raise ValueError("radii and values must be 1-D arrays of equal length >= 2")
        if r[0] <= 0 or np.any(np.diff(r) <= 0):
            raise ValueError("radii must be positive and strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        if np.any(v < 0):
            raise ValueError("profile values must be non-negative")
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "values", v)
        lr = np.log(r)
        if np.all(v > 0):
            spline = CubicSpline(lr, np.log(v))
            interp = lambda x: np.exp(spline(x))  # noqa: E731
        else:
            interp = PchipInterpolator(lr, v)
        object.__setattr__(self, "_interp", interp)

    @property
    def r_min(self) -> float:
        return float(self.radii[0])

    @property
    def r_max(self) -> float:
        return float(self.radii[-1])

    @property
    def tail_coefficient(self) -> float:
        if self.tail_exponent is None:
            return 0.0
        return float(self.values[-1] * self.r_max ** (-self.tail_exponent))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        out = np.empty_like(r)
        lo = r < self.r_min
        hi = r > self.r_max
        mid = ~(lo | hi)
        out[lo] = self.values[0]
        out[mid] = self._interp(np.log(r[mid]))
        if np.any(hi):
            if self.tail_exponent is None:
                if self.values[-1] != 0:
                    raise TailError("profile has no declared tail_exponent; "
                                    "cannot evaluate beyond the last radius")
                out[hi] = 0.0
            else:
                out[hi] = self.values[-1] * (r[hi] / self.r_max) ** self.tail_exponent
        return float(out[0]) if scalar else out

    # I/O ------------------------------------------------------------------
    def to_json_dict(self) -> dict:
        return {
            "radii": self.radii.tolist(),
            "values": self.values.tolist(),
            "tail_exponent": self.tail_exponent,
            "breakpoints": list(self.breakpoints),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SampledProfile":
        return cls(np.asarray(d["radii"]), np.asarray(d["values"]),
                   d.get("tail_exponent"), tuple(d.get("breakpoints", ())))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["radius", "value"])
        for r, v in zip(self.radii, self.values):
            w.writerow([repr(float(r)), repr(float(v))])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source, tail_exponent: float | None = None) -> "SampledProfile":
        """Read a two-column ``radius,value`` CSV (header row required)."""
        text = Path(source).read_text() if not isinstance(source, str) or "\n" not in source else source
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], [row for row in rows[1:] if row]
        if [h.strip().lower() for h in header[:2]] != ["radius", "value"]:
            raise ValueError(f"expected header 'radius,value', got {header}")
        data = np.array([[float(a), float(b)] for a, b, *_ in body])
        return cls(data[:, 0], data[:, 1], tail_exponent)

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict())


def sample(f, radii, tail_exponent=None) -> SampledProfile:
    """Tabulate a callable on ``radii``."""
    radii = np.asarray(radii, dtype=float)
    if tail_exponent is None:
        tail_exponent = getattr(f, "tail_exponent", None)
    return SampledProfile(radii, np.asarray(f(radii), dtype=float), tail_exponent,
                          tuple(getattr(f, "breakpoints", ())))


def _smooth_zero(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def smoothstep(t):
    """C-infinity step: 1 for t <= 1, 0 for t >= 2, monotone in between."""
    t = np.asarray(t, dtype=float)
    up = _smooth_zero(2.0 - t)
    down = _smooth_zero(t - 1.0)
    return up / (up + down)


@dataclass(frozen=True)
class Plateau:
    """Smooth radial cutoff: 1 on [0, R], 0 on [2R, inf)."""

    R: float
    power: int = 1

    tail_exponent = None

    @property
    def breakpoints(self) -> tuple:
        return (self.R, 2 * self.R)

    def __call__(self, r):
        out = smoothstep(np.asarray(r, dtype=float) / self.R) ** self.power
        return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class Indicator:
    """``value`` on the ball of radius ``radius``, zero outside."""

    radius: float = 1.0
    value: float = 1.0

    tail_exponent = None

    @property
    def breakpoints(self) -> tuple:
        return (self.radius,)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.where(r <= self.radius, self.value, 0.0)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Bump:
    """Compactly supported smooth bump ``exp(-1/(1-(r/radius)^2))``."""

    radius: float = 1.0

    tail_exponent = None

    @property
    def breakpoints(self) -> tuple:
        return (self.radius,)

    def __call__(self, r):
        x = 1.0 - (np.asarray(r, dtype=float) / self.radius) ** 2
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = np.exp(-1.0 / x[pos])
        return float(out) if out.ndim == 0 else out
