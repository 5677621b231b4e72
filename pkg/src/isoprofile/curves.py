"""Sampled profile curves and their evaluation rule.

Curves are piecewise cubic Hermite interpolants. Profiles are interpolated in
the renormalized ordinate ``Y = I**((n+1)/n)`` and mapped back, because ``Y``
leaves 0 linearly while ``I ~ c * V**(n/(n+1))`` has infinite slope there.
Knot slopes come from the caller when known exactly and otherwise from the
shape-preserving PCHIP construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def _knot_slopes(x: np.ndarray, z: np.ndarray, slopes) -> np.ndarray:
    pchip = PchipInterpolator(x, z).derivative()(x)
    if slopes is None:
        return pchip
    m = np.array(slopes, dtype=float)
    bad = ~np.isfinite(m)
    m[bad] = pchip[bad]
    return m


def hermite_eval(x: np.ndarray, y: np.ndarray, m: np.ndarray, t) -> np.ndarray:
    """Evaluate the C^1 cubic Hermite interpolant of ``(x, y, m)`` at ``t``."""
    t = np.asarray(t, dtype=float)
    k = np.clip(np.searchsorted(x, t, side="right") - 1, 0, x.size - 2)
    h = x[k + 1] - x[k]
    s = (t - x[k]) / h
    s2 = s * s
    s3 = s2 * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    return h00 * y[k] + h10 * h * m[k] + h01 * y[k + 1] + h11 * h * m[k + 1]


@dataclass(frozen=True, eq=False)
class _Sampled:
    x: np.ndarray
    y: np.ndarray
    slopes: np.ndarray | None = None
    # interpolation runs on z = y**power
    power: float = 1.0
    _z: np.ndarray = field(init=False, repr=False)
    _m: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        x = _frozen(self.x)
        y = _frozen(self.y)
        if x.ndim != 1 or x.shape != y.shape or x.size < 2:
            raise ValueError("samples must be two equal-length 1-D sequences")
        if not np.all(np.diff(x) > 0):
            raise ValueError("abscissae must be strictly increasing")
        if np.any(~np.isfinite(y)):
            raise ValueError("ordinates must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        p = self.power
        z = y if p == 1.0 else np.abs(y) ** p
        zslopes = None
        if self.slopes is not None:
            m = _frozen(self.slopes)
            if m.shape != x.shape:
                raise ValueError("slopes must match the sample grid")
            object.__setattr__(self, "slopes", m)
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                zslopes = m if p == 1.0 else p * np.abs(y) ** (p - 1) * m
            if p != 1.0:
                # 0 * infinite slope: leave it to the PCHIP end condition
                zslopes = np.where(y == 0, np.nan, zslopes)
        object.__setattr__(self, "_z", _frozen(z))
        object.__setattr__(self, "_m", _frozen(_knot_slopes(x, z, zslopes)))

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.x[0]), float(self.x[-1])

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        lo, hi = self.domain
        span = hi - lo
        if np.any(t_arr < lo - 1e-12 * span) or np.any(t_arr > hi + 1e-12 * span):
            raise ValueError(f"evaluation outside the sampled domain [{lo}, {hi}]")
        t_arr = np.clip(t_arr, lo, hi)
        out = hermite_eval(self.x, self._z, self._m, t_arr)
        if self.power != 1.0:
            out = np.maximum(out, 0.0) ** (1.0 / self.power)
        return float(out) if out.ndim == 0 else out

    def midpoint_grid(self) -> np.ndarray:
        """Samples interleaved with the midpoints between them."""
        mids = 0.5 * (self.x[1:] + self.x[:-1])
        grid = np.empty(self.x.size + mids.size)
        grid[0::2] = self.x
        grid[1::2] = mids
        return grid


@dataclass(frozen=True, eq=False)
class ProfileCurve(_Sampled):
    """Sampled isoperimetric profile ``V -> I(V)``.

    ``total_volume`` is ``math.inf`` for bodies of unbounded volume.
    """

    ambient_dim: int = 2
    total_volume: float = math.inf

    def __post_init__(self):
        if self.ambient_dim < 2:
            raise ValueError("ambient dimension must be at least 2")
        n = self.ambient_dim - 1
        object.__setattr__(self, "power", (n + 1) / n)
        super().__post_init__()
        if self.x[0] != 0.0 or self.y[0] != 0.0:
            raise ValueError("a profile starts at (0, 0)")
        if np.any(self.y < 0):
            raise ValueError("perimeters must be nonnegative")
        if not self.total_volume > 0:
            raise ValueError("total volume must be positive")
        if self.x[-1] > self.total_volume * (1 + 1e-12):
            raise ValueError("samples extend beyond the total volume")

    @property
    def V(self) -> np.ndarray:
        return self.x

    @property
    def I(self) -> np.ndarray:  # noqa: E743
        return self.y

    @property
    def n(self) -> int:
        return self.ambient_dim - 1

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.total_volume)


@dataclass(frozen=True, eq=False)
class NormalizedProfile(_Sampled):
    """Probability-normalized profile ``beta -> I(beta * vol) / vol`` on [0, 1]."""

    ambient_dim: int = 2

    def __post_init__(self):
        if self.ambient_dim < 2:
            raise ValueError("ambient dimension must be at least 2")
        n = self.ambient_dim - 1
        object.__setattr__(self, "power", (n + 1) / n)
        super().__post_init__()
        if self.x[0] != 0.0 or self.x[-1] != 1.0:
            raise ValueError("normalized profile must span [0, 1]")
        if self.y[0] != 0.0 or self.y[-1] != 0.0:
            raise ValueError("normalized profile must vanish at both ends")
        if np.any(self.y < 0):
            raise ValueError("normalized profile must be nonnegative")

    @property
    def beta(self) -> np.ndarray:
        return self.x

    @property
    def h(self) -> np.ndarray:
        return self.y

    @property
    def n(self) -> int:
        return self.ambient_dim - 1

    def reflected(self) -> "NormalizedProfile":
        """The profile read from the other end, ``beta -> h(1 - beta)``."""
        slopes = None if self.slopes is None else -self.slopes[::-1]
        return NormalizedProfile(1.0 - self.x[::-1], self.y[::-1], slopes, ambient_dim=self.ambient_dim)

    @classmethod
    def from_function(cls, func, ambient_dim: int = 2, grid: int = 513, slope=None) -> "NormalizedProfile":
        """Sample ``func`` on a cosine-spaced grid of [0, 1]."""
        beta = 0.5 * (1 - np.cos(np.linspace(0.0, math.pi, grid)))
        beta[0], beta[-1] = 0.0, 1.0
        h = np.asarray(func(beta), dtype=float)
        h[0] = h[-1] = 0.0
        slopes = None if slope is None else np.asarray(slope(beta), dtype=float)
        return cls(beta, h, slopes, ambient_dim=ambient_dim)


@dataclass(frozen=True, eq=False)
class RenormalizedCurve(_Sampled):
    """Ordinates raised to ``exponent`` (``(n+1)/n`` for profiles).

    Also the output type of the ODE comparison solvers, whose exponent is 1.
    """

    exponent: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        if np.any(self.y < 0):
            raise ValueError("renormalized ordinates must be nonnegative")
        if self.y[0] != 0.0:
            raise ValueError("renormalized curve must start at 0")
