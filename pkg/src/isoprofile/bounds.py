"""Geometric functionals read off a normalized profile, and their model values."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .compare import ComparisonReport, make_report
from .curves import NormalizedProfile, ProfileCurve
from .quadrature import gauss_legendre
from .space_forms import SpaceForm


def cheeger_constant(h: NormalizedProfile, assume_concave: bool = False) -> float:
    """Cheeger constant ``inf h(beta) / min(beta, 1 - beta)``.

    With ``assume_concave`` (nonnegative Ricci curvature) the infimum sits at
    beta = 1/2 and equals ``2 h(1/2)``.
    """
    if not np.any(h.h > 0):
        raise ValueError("profile is identically zero")
    if assume_concave:
        return 2.0 * float(h(0.5))

    def ratio(b):
        return h(b) / np.minimum(b, 1 - b)

    pts = h.midpoint_grid()[1:-1]
    vals = ratio(pts)
    i = int(np.argmin(vals))
    lo = pts[max(i - 1, 0)]
    hi = pts[min(i + 1, pts.size - 1)]
    best = float(vals[i])
    if hi > lo:
        res = minimize_scalar(ratio, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        best = min(best, float(res.fun))
    return best


def _end_exponent(beta: np.ndarray, h: np.ndarray) -> float:
    nz = np.flatnonzero(h > 0)
    if nz.size < 2:
        raise ValueError("not enough positive samples near the endpoint")
    i, j = nz[0], nz[1]
    return math.log(h[j] / h[i]) / math.log(beta[j] / beta[i])


def diameter_bound(h: NormalizedProfile, n: int | None = None) -> float:
    """Upper bound ``int_0^1 dbeta / h(beta)`` on the diameter.

    Each half is integrated in ``u`` with ``beta = u**(n+1)`` (mirrored on the
    right), which makes the ``beta**(-n/(n+1))`` endpoint behaviour bounded.
    """
    n = h.n if n is None else n
    if np.any(h.h[1:-1] <= 0):
        raise ValueError("profile must be positive on (0, 1)")
    for side in (h, h.reflected()):
        if _end_exponent(side.beta, side.h) >= 1 - 1e-3:
            raise ValueError("1/h is not integrable at an endpoint: profile decays too fast")

    p = n + 1
    u_mid = 0.5 ** (1 / p)

    def half(curve):
        u = curve.beta ** (1 / p)
        u = np.unique(np.concatenate([u[u < u_mid], [u_mid]]))

        def integrand(t):
            return p * t**n / curve(t**p)

        return float(np.sum(gauss_legendre(integrand, u[:-1], u[1:], atol=1e-15)))

    return half(h) + half(h.reflected())


def myers_diameter(delta: float) -> float:
    if not delta > 0:
        raise ValueError("delta must be positive")
    return math.pi / math.sqrt(delta)


def volume_comparison(
    profile: ProfileCurve, n: int, delta: float, tol: float | None = None
) -> ComparisonReport:
    """Compare the body volume with that of the model half-sphere."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    if not profile.bounded:
        raise ValueError("profile must have finite volume")
    model_vol = SpaceForm(n + 1, delta, half=True).total_volume
    tol = 1e-10 * model_vol if tol is None else tol
    return make_report(
        [model_vol - profile.total_volume],
        [profile.total_volume],
        tol,
        name="volume_comparison",
        model_volume=model_vol,
    )


def model_cheeger(d: int, delta: float) -> float:
    """Cheeger constant of the half-sphere, ``2 h(1/2)`` evaluated exactly."""
    model = SpaceForm(d, delta, half=True)
    vol = model.total_volume
    return 2.0 * float(model.profile_at(0.5 * vol)) / vol


def neumann_eigenvalue_model(d: int, delta: float) -> float:
    """First nonzero Neumann eigenvalue of the half-sphere: ``(n+1) delta``."""
    if d < 2:
        raise ValueError("d must be >= 2")
    if not delta > 0:
        raise ValueError("delta must be positive")
    return d * delta


def refined_eigenvalue_bound(d: int, delta: float, cheeger: float) -> float:
    if not cheeger > 0:
        raise ValueError("cheeger constant must be positive")
    ratio = cheeger / model_cheeger(d, delta)
    return ratio ** (2 / d) * neumann_eigenvalue_model(d, delta)


@dataclass
class BoundsSummary:
    cheeger: float
    diameter_upper: float
    myers_upper: float | None
    volume: float
    volume_model: float | None
    eigenvalue_lower: float
    refined_eigenvalue_lower: float
    consistent: bool

    def to_dict(self) -> dict:
        return asdict(self)


def bounds_summary(profile: ProfileCurve, delta: float, assume_concave: bool = True) -> BoundsSummary:
    """Collect every derived bound for a body of finite volume with ``Ric >= n delta``."""
    from .space_forms import normalize

    d = profile.ambient_dim
    h = normalize(profile)
    cheeger = cheeger_constant(h, assume_concave=assume_concave)
    diameter = diameter_bound(h, d - 1)
    if delta > 0:
        myers = myers_diameter(delta)
        vol_model = SpaceForm(d, delta, half=True).total_volume
        eig = neumann_eigenvalue_model(d, delta)
        refined = refined_eigenvalue_bound(d, delta, cheeger)
        consistent = profile.total_volume <= vol_model * (1 + 1e-10) and diameter <= myers * (1 + 1e-6)
    else:
        myers = vol_model = None
        eig = refined = 0.0
        consistent = True
    return BoundsSummary(
        cheeger=cheeger,
        diameter_upper=diameter,
        myers_upper=myers,
        volume=profile.total_volume,
        volume_model=vol_model,
        eigenvalue_lower=eig,
        refined_eigenvalue_lower=refined,
        consistent=bool(consistent),
    )
