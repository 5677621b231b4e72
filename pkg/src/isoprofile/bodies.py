"""Flat convex bodies in the plane: exact profiles and Monte-Carlo cone estimates.

Every body is placed so that the origin is a boundary point with the body
locally inside the upper half-plane:

* ``half_plane``: y >= 0
* ``unit_square``: [0, 1]^2 (origin is a corner)
* ``disk``: centred at (0, radius)
* ``wedge``: polar angle in [0, angle] (origin is the vertex)
* ``slab``: 0 <= y <= width
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .compare import ComparisonReport, make_report
from .curves import ProfileCurve
from .space_forms import half_space_constant

KINDS = ("half_plane", "unit_square", "disk", "wedge", "slab")
MIN_SAMPLES = 1000


@dataclass(frozen=True)
class Body2D:
    kind: str
    param: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown body {self.kind!r}; expected one of {KINDS}")
        if self.kind in ("disk", "slab"):
            if self.param is None or not self.param > 0:
                raise ValueError(f"{self.kind} needs a positive size")
        elif self.kind == "wedge":
            if self.param is None or not 0 < self.param <= math.pi:
                raise ValueError("wedge angle must lie in (0, pi]")

    @classmethod
    def half_plane(cls) -> "Body2D":
        return cls("half_plane")

    @classmethod
    def unit_square(cls) -> "Body2D":
        return cls("unit_square")

    @classmethod
    def disk(cls, radius: float = 1.0) -> "Body2D":
        return cls("disk", float(radius))

    @classmethod
    def wedge(cls, angle: float) -> "Body2D":
        return cls("wedge", float(angle))

    @classmethod
    def slab(cls, width: float = 1.0) -> "Body2D":
        return cls("slab", float(width))

    @property
    def area(self) -> float:
        if self.kind == "unit_square":
            return 1.0
        if self.kind == "disk":
            return math.pi * self.param**2
        return math.inf

    def contains(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        if self.kind == "half_plane":
            return y >= 0
        if self.kind == "unit_square":
            return (x >= 0) & (x <= 1) & (y >= 0) & (y <= 1)
        if self.kind == "disk":
            R = self.param
            return x * x + (y - R) ** 2 <= R * R
        if self.kind == "slab":
            return (y >= 0) & (y <= self.param)
        theta = np.arctan2(y, x)
        theta = np.where(theta < 0, theta + 2 * math.pi, theta)
        return theta <= self.param


# --- disk competitors -----------------------------------------------------


def _lens(R: float, rho: float, D: float) -> tuple[float, float]:
    """Area of disk(R) cut by the circle (rho, centre at distance D), and that arc's length inside."""
    ca = np.clip((D * D + R * R - rho * rho) / (2 * D * R), -1.0, 1.0)
    cb = np.clip((D * D + rho * rho - R * R) / (2 * D * rho), -1.0, 1.0)
    a, b = math.acos(ca), math.acos(cb)
    kite = 0.5 * math.sqrt(max((-D + R + rho) * (D + R - rho) * (D - R + rho) * (D + R + rho), 0.0))
    return R * R * a + rho * rho * b - kite, 2 * rho * b


def _arc_for_area(R: float, rho: float, V: float) -> float:
    """Length of the arc of radius ``rho`` cutting area ``V`` from disk(R)."""
    lo = abs(R - rho) * (1 + 1e-15) + 1e-300
    hi = R + rho
    if _lens(R, rho, lo)[0] <= V:
        return math.inf
    D = brentq(lambda D: _lens(R, rho, D)[0] - V, lo, hi, xtol=1e-15, rtol=1e-15)
    return _lens(R, rho, D)[1]


def _chord_for_area(R: float, V: float) -> float:
    t = brentq(lambda t: R * R * math.acos(t / R) - t * math.sqrt(R * R - t * t) - V, 0.0, R, xtol=1e-15)
    return 2 * math.sqrt(R * R - t * t)


def orthogonal_arc(R: float, V: float) -> float:
    """Closed-form competitor: the arc meeting the boundary circle at right angles."""
    V = min(V, math.pi * R * R - V)
    if V >= 0.5 * math.pi * R * R * (1 - 1e-14):
        return 2 * R

    def area(rho):
        phi, psi = math.atan(R / rho), math.atan(rho / R)
        return rho * rho * phi + R * R * psi - R * rho

    lo, hi = 0.5 * math.sqrt(V / math.pi), R
    while area(hi) <= V:
        hi *= 2
    rho = brentq(lambda r: area(r) - V, lo, hi, xtol=1e-15, rtol=1e-15)
    return 2 * rho * math.atan(R / rho)


def disk_brute_force(R: float, V: float) -> float:
    """Minimum over every circular arc and chord cutting area ``V`` from disk(R).

    Independent of the orthogonality ansatz; used to confirm :func:`orthogonal_arc`.
    """
    V = min(V, math.pi * R * R - V)
    if V <= 0:
        return 0.0
    rho_min = math.sqrt(V / math.pi)
    lo, hi = math.log(rho_min) + 1e-12, math.log(1e4 * R)
    res = minimize_scalar(
        lambda s: _arc_for_area(R, math.exp(s), V),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-10},
    )
    return min(float(res.fun), _chord_for_area(R, V))


def _disk_profile(R: float, V: float) -> float:
    V = min(V, math.pi * R * R - V)
    if V <= 0:
        return 0.0
    return orthogonal_arc(R, V)


def body_profile(body: Body2D, V):
    """Least perimeter over the body's competitor family, at volume(s) ``V``."""
    V_arr = np.asarray(V, dtype=float)
    if np.any(V_arr < 0) or np.any(V_arr > body.area):
        raise ValueError(f"V outside [0, {body.area}]")
    kind = body.kind
    if kind == "half_plane":
        out = np.sqrt(2 * math.pi * V_arr)
    elif kind == "wedge":
        out = np.sqrt(2 * body.param * V_arr)
    elif kind == "unit_square":
        out = np.minimum.reduce([np.sqrt(math.pi * V_arr), np.ones_like(V_arr), np.sqrt(math.pi * (1 - V_arr))])
    elif kind == "slab":
        out = np.minimum(np.sqrt(2 * math.pi * V_arr), 2 * body.param)
    else:
        out = np.vectorize(lambda v: _disk_profile(body.param, v), otypes=[float])(V_arr)
    return float(out) if out.ndim == 0 else out


def body_curve(body: Body2D, grid: int = 512, v_max: float | None = None) -> ProfileCurve:
    """Sample :func:`body_profile` into a :class:`ProfileCurve`.

    Branch switches of the square and slab are added to the grid.
    """
    if grid < 16:
        raise ValueError("grid must be at least 16")
    total = body.area
    if math.isfinite(total):
        V = 0.5 * total * (1 - np.cos(math.pi * np.arange(grid) / (grid - 1)))
        V[-1] = total
    else:
        if v_max is None or not v_max > 0:
            raise ValueError("v_max is required for unbounded bodies")
        V = v_max * (1 - np.cos(0.5 * math.pi * np.arange(grid) / (grid - 1)))
        V[-1] = v_max
    extra = []
    if body.kind == "unit_square":
        extra = [1 / math.pi, 1 - 1 / math.pi]
    elif body.kind == "slab":
        extra = [2 * body.param**2 / math.pi]
    extra = [e for e in extra if 0 < e < V[-1]]
    V = np.unique(np.concatenate([V, extra]))
    I = body_profile(body, V)
    I[0] = 0.0
    if math.isfinite(total):
        I[-1] = 0.0
    return ProfileCurve(V, I, ambient_dim=2, total_volume=total)


# --- Monte-Carlo cone quantities ----------------------------------------


class MCEstimate(NamedTuple):
    value: float
    std_error: float
    samples: int
    seed: int


class ConeQuantities(NamedTuple):
    P: MCEstimate
    V: MCEstimate
    Vtilde: MCEstimate


def _counts(body: Body2D, x, r: float, n: int, seq: np.random.SeedSequence) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(seq))
    x = np.asarray(x, dtype=float)
    # perimeter: uniform angles on the circle of radius r
    phi = rng.uniform(0.0, 2 * math.pi, n)
    circle = x + r * np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    on_arc = int(body.contains(circle).sum())
    # areas: uniform points in the disk of radius r
    rad = r * np.sqrt(rng.uniform(0.0, 1.0, n))
    ang = rng.uniform(0.0, 2 * math.pi, n)
    direction = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    inside = int(body.contains(x + rad[:, None] * direction).sum())
    in_cone = int(body.contains(x + r * direction).sum())
    return np.array([on_arc, inside, in_cone])


def cone_quantities(
    body: Body2D, x=(0.0, 0.0), r: float = 1.0, samples: int = 10**6, seed: int = 42, shards: int = 1
) -> ConeQuantities:
    """Estimate P(r), V(r) and the subtended-cone area at boundary point ``x``.

    Shards draw from independent Philox streams spawned from ``seed``; results
    are deterministic for a given ``(seed, shards)``.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    if samples < MIN_SAMPLES:
        raise ValueError(f"at least {MIN_SAMPLES} samples required")
    if shards < 1:
        raise ValueError("shards must be >= 1")
    sizes = [samples // shards + (1 if i < samples % shards else 0) for i in range(shards)]
    seqs = np.random.SeedSequence(seed).spawn(shards)
    if shards == 1:
        counts = [_counts(body, x, r, sizes[0], seqs[0])]
    else:
        with ThreadPoolExecutor(max_workers=shards) as pool:
            counts = list(pool.map(lambda a: _counts(body, x, r, *a), zip(sizes, seqs)))
    total = np.sum(counts, axis=0)
    frac = total / samples
    err = np.sqrt(frac * (1 - frac) / samples)
    circ, disk = 2 * math.pi * r, math.pi * r * r
    return ConeQuantities(
        MCEstimate(circ * frac[0], circ * err[0], samples, seed),
        MCEstimate(disk * frac[1], disk * err[1], samples, seed),
        MCEstimate(disk * frac[2], disk * err[2], samples, seed),
    )


def _zscore(diff: float, sigma: float) -> float:
    if sigma > 0:
        return diff / sigma
    return 0.0 if diff == 0 else math.copysign(math.inf, diff)


def check_cone_relation(
    body: Body2D,
    x=(0.0, 0.0),
    r: float = 1.0,
    samples: int = 10**6,
    seed: int = 42,
    k_sigma: float = 3.0,
    vtilde_scale: float = 1.0,
    shards: int = 1,
) -> ComparisonReport:
    """Check ``P(r) = 2 * Vtilde(r) / r`` within ``k_sigma`` combined standard errors.

    ``vtilde_scale`` perturbs the cone estimate (a negative control).
    """
    q = cone_quantities(body, x, r, samples, seed, shards)
    predicted = 2 * vtilde_scale * q.Vtilde.value / r
    sigma = math.hypot(q.P.std_error, 2 * vtilde_scale * q.Vtilde.std_error / r)
    diff = q.P.value - predicted
    return make_report(
        [-abs(diff)],
        [r],
        k_sigma * sigma,
        name="cone_relation",
        P=q.P.value,
        predicted=predicted,
        sigma=sigma,
    )


def check_small_volume_bound(
    body: Body2D,
    x=(0.0, 0.0),
    r_values=(0.1, 0.3, 0.5),
    samples: int = 10**6,
    seed: int = 42,
    k_sigma: float = 3.0,
    shards: int = 1,
) -> ComparisonReport:
    """Check ``P(r) <= d_1 V(r)**(1/2)`` for small balls centred at ``x``.

    Margins are reported in standard errors, so the tolerance is ``k_sigma``.
    """
    d1 = half_space_constant(2)
    z, rows = [], []
    for i, r in enumerate(r_values):
        q = cone_quantities(body, x, r, samples, seed + i, shards)
        bound = d1 * math.sqrt(q.V.value)
        sigma = math.hypot(q.P.std_error, 0.5 * d1 * q.V.std_error / math.sqrt(q.V.value))
        z.append(_zscore(bound - q.P.value, sigma))
        rows.append({"r": r, "P": q.P.value, "bound": bound, "sigma": sigma})
    return make_report(z, list(r_values), k_sigma, name="small_volume_bound", rows=rows)
