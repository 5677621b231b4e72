"""Model spaces of constant curvature and their exact isoperimetric profiles.

Minimizers in the half-model are geodesic balls centred on the totally
geodesic boundary, so the profile is swept out parametrically by the radius
``r``::

    V(r) = c * omega_n * int_0^r S(t)**n dt
    P(r) = c * omega_n * S(r)**n

with ``c = 1/2`` for the half-model and ``c = 1`` for the full space form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import NormalizedProfile, ProfileCurve
from .quadrature import gauss_legendre

_SERIES_CUTOFF = 1e-8


def sphere_area(n: int) -> float:
    """Area of the unit n-sphere in R^(n+1)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return 2.0 * math.pi ** ((n + 1) / 2) / math.gamma((n + 1) / 2)


def gamma_const(d: int) -> float:
    """Euclidean isoperimetric constant in dimension ``d``: |S^n| / |B^d|^(n/d)."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    n = d - 1
    omega = sphere_area(n)
    return omega / (omega / d) ** (n / d)


def half_space_constant(d: int) -> float:
    """Constant ``d_n`` in the flat half-space profile ``I(V) = d_n V^(n/(n+1))``."""
    return 2.0 ** (-1.0 / d) * gamma_const(d)


def _check_domain(delta: float, t) -> None:
    if delta > 0 and np.any(np.asarray(t) > math.pi / math.sqrt(delta) * (1 + 1e-12)):
        raise ValueError(f"t exceeds pi/sqrt(delta) = {math.pi / math.sqrt(delta)}")


def s_delta(delta: float, t):
    """Generalized sine: solution of s'' + delta*s = 0, s(0)=0, s'(0)=1."""
    _check_domain(delta, t)
    t = np.asarray(t, dtype=float)
    k = delta * t * t
    if delta > 0:
        sq = math.sqrt(delta)
        exact = np.sin(sq * t) / sq
    elif delta < 0:
        sq = math.sqrt(-delta)
        exact = np.sinh(sq * t) / sq
    else:
        exact = t
    series = t * (1 - k / 6 + k * k / 120)
    out = np.where(np.abs(k) < _SERIES_CUTOFF, series, exact)
    return float(out) if out.ndim == 0 else out


def c_delta(delta: float, t):
    """Derivative of :func:`s_delta` in ``t``."""
    _check_domain(delta, t)
    t = np.asarray(t, dtype=float)
    k = delta * t * t
    if delta > 0:
        exact = np.cos(math.sqrt(delta) * t)
    elif delta < 0:
        exact = np.cosh(math.sqrt(-delta) * t)
    else:
        exact = np.ones_like(t)
    series = 1 - k / 2 + k * k / 24
    out = np.where(np.abs(k) < _SERIES_CUTOFF, series, exact)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SpaceForm:
    """Simply connected space form of curvature ``curvature``.

    With ``half=True`` this is the half-space bounded by a totally geodesic
    hypersurface (a half-sphere of radius 1/sqrt(delta) when delta > 0).
    """

    ambient_dim: int
    curvature: float
    half: bool = True

    def __post_init__(self):
        if int(self.ambient_dim) != self.ambient_dim or self.ambient_dim < 2:
            raise ValueError("ambient_dim must be an integer >= 2")
        if not math.isfinite(self.curvature):
            raise ValueError("curvature must be finite")

    @property
    def n(self) -> int:
        return self.ambient_dim - 1

    @property
    def delta(self) -> float:
        return float(self.curvature)

    @property
    def _scale(self) -> float:
        return (0.5 if self.half else 1.0) * sphere_area(self.n)

    @property
    def r_max(self) -> float:
        """Largest admissible radius (antipodal distance for delta > 0)."""
        return math.pi / math.sqrt(self.delta) if self.delta > 0 else math.inf

    @property
    def total_volume(self) -> float:
        if self.delta <= 0:
            return math.inf
        return float(self.volume_at_radius(self.r_max))

    @property
    def closed_form_volume(self) -> float:
        """Volume from |S^(n+1)| * delta^(-(n+1)/2), halved for the half-model."""
        if self.delta <= 0:
            return math.inf
        full = sphere_area(self.ambient_dim) * self.delta ** (-self.ambient_dim / 2)
        return 0.5 * full if self.half else full

    def volume_at_radius(self, r):
        r = np.asarray(r, dtype=float)
        _check_domain(self.delta, r)
        n, delta = self.n, self.delta
        integral = gauss_legendre(lambda t: s_delta(delta, t) ** n, np.zeros_like(r), r)
        return self._scale * integral

    def perimeter_at_radius(self, r):
        return self._scale * s_delta(self.delta, r) ** self.n

    def profile_slope_at_radius(self, r):
        """dI/dV along the sweep, equal to n * C(r) / S(r)."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.n * c_delta(self.delta, r) / s_delta(self.delta, r)

    def radius_for_volume(self, V, rtol: float = 1e-13, max_iter: int = 200):
        """Invert ``V(r)`` by safeguarded Newton iteration inside a bracket.

        ``V(r)`` is strictly increasing, so the bracket [lo, hi] always holds
        the root; Newton steps leaving it fall back to bisection.
        """
        V = np.asarray(V, dtype=float)
        scalar = V.ndim == 0
        V = np.atleast_1d(V).copy()
        total = self.total_volume
        if np.any(V < 0) or np.any(V > total * (1 + 1e-12)):
            raise ValueError(f"volume outside [0, {total}]")
        V = np.minimum(V, total)
        d = self.ambient_dim
        flat = (d * V / self._scale) ** (1.0 / d)
        if self.delta > 0:
            lo, hi = np.minimum(flat, self.r_max), np.full_like(V, self.r_max)
        elif self.delta < 0:
            lo, hi = np.zeros_like(V), flat
        else:
            return float(flat[0]) if scalar else flat
        r = np.clip(flat, lo, hi)
        active = V > 0
        r[~active] = 0.0
        for _ in range(max_iter):
            if not active.any():
                break
            ra = r[active]
            f = self.volume_at_radius(ra) - V[active]
            fp = self._scale * s_delta(self.delta, ra) ** self.n
            lo_a, hi_a = lo[active], hi[active]
            lo_a = np.where(f < 0, ra, lo_a)
            hi_a = np.where(f > 0, ra, hi_a)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = np.where(fp > 0, ra - f / fp, np.nan)
            inside = np.isfinite(step) & (step > lo_a) & (step < hi_a)
            new = np.where(inside, step, 0.5 * (lo_a + hi_a))
            done = (np.abs(new - ra) <= rtol * np.maximum(new, 1e-300)) | (f == 0)
            lo[active], hi[active] = lo_a, hi_a
            r[active] = new
            idx = np.flatnonzero(active)
            active[idx[done]] = False
        return float(r[0]) if scalar else r

    def profile_at(self, V):
        """Exact profile value at ``V`` (see :func:`model_profile_at`)."""
        r = self.radius_for_volume(V)
        return self.perimeter_at_radius(r)


def model_samples(space: SpaceForm, v_max: float | None = None, grid_size: int = 512):
    """Exact ``(V, I, dI/dV)`` on ``grid_size`` cosine-spaced radii (at least 2).

    ``v_max`` is required when the model has infinite volume. For delta > 0
    ``v_max=None`` (or ``"full"``) sweeps the whole volume range. Radii whose
    volumes coincide in floating point are dropped, so fewer rows may return.
    """
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    if v_max == "full":
        v_max = None
    total = space.total_volume
    if v_max is None and not math.isfinite(total):
        raise ValueError("v_max is required for models of infinite volume")
    if v_max is not None and not v_max > 0:
        raise ValueError("v_max must be positive")

    k = np.arange(grid_size)
    if v_max is None or v_max >= total:
        r_end = space.r_max
        r = 0.5 * r_end * (1 - np.cos(math.pi * k / (grid_size - 1)))
    else:
        r_end = float(space.radius_for_volume(v_max))
        r = r_end * (1 - np.cos(0.5 * math.pi * k / (grid_size - 1)))
    r[0], r[-1] = 0.0, r_end

    full_sweep = math.isfinite(total) and r_end == space.r_max
    if full_sweep:
        # S is symmetric about r_max/2; complements keep the upper end accurate
        upper = r > 0.5 * r_end
        V = np.empty_like(r)
        V[~upper] = space.volume_at_radius(r[~upper])
        V[upper] = total - space.volume_at_radius(r_end - r[upper])
    else:
        V = space.volume_at_radius(r)
    I = space.perimeter_at_radius(r)
    slopes = space.profile_slope_at_radius(r)
    if full_sweep:
        V[-1] = total
        I[-1] = 0.0
    I[0] = 0.0
    # drop radii whose volumes collapse onto their neighbour in floating point
    keep = np.concatenate([[True], np.diff(V) > 0])
    if full_sweep and not keep[-1]:
        keep[-1], keep[np.flatnonzero(keep)[-2]] = True, False
    return V[keep], np.maximum(I[keep], 0.0), slopes[keep]


def model_profile(space: SpaceForm, v_max: float | None = None, grid_size: int = 512) -> ProfileCurve:
    """Sample the exact profile of ``space`` into an interpolating :class:`ProfileCurve`."""
    if grid_size < 16:
        raise ValueError("grid_size must be at least 16 to resolve the profile maximum")
    V, I, slopes = model_samples(space, v_max, grid_size)
    return ProfileCurve(V, I, slopes, ambient_dim=space.ambient_dim, total_volume=space.total_volume)


def model_profile_at(space: SpaceForm, V):
    """Exact profile value(s), inverting V(r) to relative tolerance 1e-12."""
    return space.profile_at(V)


def normalize(curve: ProfileCurve) -> NormalizedProfile:
    """Map ``I`` to ``h(beta) = I(beta * vol) / vol``."""
    if not curve.bounded:
        raise ValueError("normalization requires a finite total volume")
    vol = curve.total_volume
    if curve.x[-1] < vol * (1 - 1e-12):
        raise ValueError("curve must be sampled up to its total volume")
    beta = curve.x / vol
    beta[-1] = 1.0
    h = curve.y / vol
    h[-1] = 0.0
    return NormalizedProfile(beta, h, curve.slopes, ambient_dim=curve.ambient_dim)
