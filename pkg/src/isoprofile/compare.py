"""Differential-inequality verifiers and the ODE comparison solvers.

The renormalized profile ``Y = I**((n+1)/n)`` of a convex body with
``Ric >= n*delta`` satisfies ``D2 Y <= -(n+1) delta Y**((1-n)/(1+n))``, with
equality on the model half-space. Comparison against solutions of the
matching ODE ``g'' = H(g)`` yields the upper and lower profile bounds.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import solve_ivp as _integrate
from scipy.optimize import brentq

from .curves import NormalizedProfile, ProfileCurve, RenormalizedCurve
from .space_forms import SpaceForm, half_space_constant, model_profile, normalize

DEFAULT_STEP_FRACTIONS = (1e-2, 10**-2.5, 1e-3)


class ZeroCrossingError(ValueError):
    """The comparison solution reached 0 before the requested abscissa."""

    def __init__(self, abscissa: float, x_max: float):
        super().__init__(f"solution vanishes at x={abscissa:.17g} before x_max={x_max:.17g}")
        self.abscissa = abscissa
        self.x_max = x_max


@dataclass
class ComparisonReport:
    passed: bool
    worst_margin: float
    worst_location: float
    tolerance: float
    equality_detected: bool
    name: str = ""
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def make_report(margins, locations, tol: float, name: str = "", slack=None, **details) -> ComparisonReport:
    """Summarize signed slacks; a negative margin is a violation.

    ``slack`` is a pointwise bound on how accurately each margin could be
    evaluated. Margins are shrunk towards zero by it before summarizing, so
    ``passed`` still means ``worst_margin >= -tol``.
    """
    margins = np.atleast_1d(np.asarray(margins, dtype=float))
    locations = np.atleast_1d(np.asarray(locations, dtype=float))
    if margins.size == 0:
        raise ValueError("no points to check")
    if slack is not None:
        margins = np.sign(margins) * np.maximum(np.abs(margins) - np.asarray(slack, dtype=float), 0.0)
    i = int(np.argmin(margins))
    worst = float(margins[i])
    return ComparisonReport(
        passed=bool(worst >= -tol),
        worst_margin=worst,
        worst_location=float(locations[i]),
        tolerance=tol,
        equality_detected=bool(np.all(np.abs(margins) <= tol)),
        name=name,
        details=details,
    )


@dataclass(frozen=True)
class OdeProblem:
    """``g'' = -alpha * delta * g**((2 - alpha)/alpha)``."""

    alpha: float
    delta: float

    def __post_init__(self):
        if not self.alpha >= 2:
            raise ValueError("alpha must be >= 2")

    @property
    def exponent(self) -> float:
        return (2 - self.alpha) / self.alpha

    def rhs(self, g):
        g = np.abs(g)
        if self.exponent == 0:
            return -self.alpha * self.delta * np.ones_like(g)
        return -self.alpha * self.delta * g**self.exponent

    def series_coefficients(self, slope: float, terms: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Exponents ``p_k = 1 + 2k/alpha`` and coefficients ``c_k`` of the start series.

        With ``g = s x + sum_k c_k x**p_k`` and ``t = x**(2/alpha)``, the
        equation reads ``c_k p_k (p_k - 1) = -alpha delta s**e a_{k-1}``, where
        ``a_j`` are the coefficients of ``(1 + sum_k (c_k/s) t**k)**e``
        (J. C. P. Miller's recurrence for powers of a series).
        """
        a, e = self.alpha, self.exponent
        if terms is None:
            # enough terms that the first omitted power exceeds x**4
            terms = max(3, math.ceil(1.5 * a))
        k = np.arange(1, terms + 1)
        powers = 1 + 2 * k / a
        b = np.zeros(terms + 1)  # b[k] = c_k / s
        pw = np.zeros(terms)  # pw[j] = a_j
        pw[0] = 1.0
        scale = -a * self.delta * slope**e
        for n in range(1, terms + 1):
            if n > 1:
                j = n - 1
                i = np.arange(1, j + 1)
                pw[j] = np.sum(((e + 1) * i - j) * b[i] * pw[j - i]) / j
            c = scale * pw[n - 1] / (powers[n - 1] * (powers[n - 1] - 1))
            b[n] = c / slope
        return powers, slope * b[1:]

    def start_series(self, slope: float, x):
        """Value and derivative of the series solution near the origin.

        The leading terms are ``s x + c1 x**((a+2)/a) + c2 x**((a+4)/a)`` with
        ``c1 = -delta s**e a**3 / (2 (a+2))``; higher terms follow the same
        recurrence (see :meth:`series_coefficients`).
        """
        powers, coef = self.series_coefficients(slope)
        x = np.asarray(x, dtype=float)
        xe = x[..., None]
        value = slope * x + np.sum(coef * xe**powers, axis=-1)
        deriv = slope + np.sum(coef * powers * xe ** (powers - 1), axis=-1)
        return value, deriv


def renormalize(curve: ProfileCurve | NormalizedProfile, n: int | None = None) -> RenormalizedCurve:
    """Raise the profile ordinates to the power ``(n+1)/n``."""
    n = curve.n if n is None else n
    if n < 1:
        raise ValueError("n must be >= 1")
    if np.any(curve.y < 0):
        raise ValueError("negative ordinate")
    p = (n + 1) / n
    if p == curve.power:
        # the curve already interpolates in the renormalized variable
        return RenormalizedCurve(curve.x, curve._z, curve._m, exponent=p)
    with np.errstate(divide="ignore", invalid="ignore"):
        slopes = None if curve.slopes is None else p * curve.y ** (p - 1) * curve.slopes
    return RenormalizedCurve(curve.x, curve.y**p, slopes, exponent=p)


def upper_second_difference(
    f: Callable, x: float, h_values=None, extrapolate: bool = True, domain=None
) -> float:
    """Sampled surrogate for ``limsup_{h->0} [f(x+h) + f(x-h) - 2 f(x)] / h**2``.

    The symmetric second difference is taken at each step in ``h_values``
    (decreasing). With ``extrapolate`` the sequence is Richardson extrapolated
    to h = 0 in powers of ``h**2``; otherwise the largest difference is
    returned. Smooth curves give their second derivative either way (the
    extrapolated value far more accurately), while kinks still blow up.
    """
    if domain is None:
        domain = getattr(f, "domain", None)
    if h_values is None:
        if domain is None:
            raise ValueError("h_values or a domain is required")
        span = domain[1] - domain[0]
        h_values = [c * span for c in DEFAULT_STEP_FRACTIONS]
    h = np.asarray(h_values, dtype=float)
    x = np.asarray(x, dtype=float)
    if domain is not None:
        lo, hi = domain
        if np.any(x - h.max() < lo) or np.any(x + h.max() > hi):
            raise ValueError("x +/- h leaves the domain")
    fx = f(x)
    diffs = np.array([(f(x + hk) + f(x - hk) - 2 * fx) / hk**2 for hk in h])
    if not extrapolate or h.size == 1:
        out = diffs.max(axis=0)
    else:
        # Richardson tableau in powers of h**2
        table = list(diffs)
        for k in range(1, h.size):
            for i in range(h.size - 1, k - 1, -1):
                q = (h[i - k] / h[i]) ** (2 * k)
                table[i] = table[i] + (table[i] - table[i - 1]) / (q - 1)
        out = np.asarray(table[-1])
        # Extrapolation assumes D(h) = D(0) + c h**2 + ...; near a kink the
        # steps that straddle it break that model. There the largest raw
        # difference is the honest upper estimate.
        if h.size >= 3:
            step_big = np.abs(diffs[-2] - diffs[-3])
            step_small = np.abs(diffs[-1] - diffs[-2])
            smooth = step_small <= 0.5 * step_big + 1e-8 * (1 + np.abs(diffs[-1]))
            out = np.where(smooth, out, diffs.max(axis=0))
    return float(out) if out.ndim == 0 else out


def _check_points(curve, h_values) -> tuple[np.ndarray, list[float]]:
    lo, hi = curve.domain
    span = hi - lo
    if h_values is None:
        h_values = [c * span for c in DEFAULT_STEP_FRACTIONS]
    hmax = max(h_values)
    pts = curve.midpoint_grid()
    pts = pts[(pts - hmax >= lo) & (pts + hmax <= hi)]
    interior = curve.y[1:-1] if curve.y[-1] == 0 else curve.y[1:]
    if np.any(interior <= 0):
        raise ValueError("curve touches 0 in the interior of its domain")
    return pts, list(h_values)


def check_differential_inequality(
    curve: RenormalizedCurve, n: int, delta: float, tol: float = 1e-4, h_values=None
) -> ComparisonReport:
    """Check ``D2 Y <= -(n+1) delta Y**((1-n)/(1+n)) + tol`` on grid points and midpoints."""
    pts, h = _check_points(curve, h_values)
    d2 = upper_second_difference(curve, pts, h)
    bound = -(n + 1) * delta * curve(pts) ** ((1 - n) / (1 + n))
    return make_report(bound - d2, pts, tol, name="differential_inequality", n=n, delta=delta)


def check_concavity(curve: RenormalizedCurve, tol: float = 1e-4, h_values=None) -> ComparisonReport:
    pts, h = _check_points(curve, h_values)
    d2 = upper_second_difference(curve, pts, h)
    return make_report(-d2, pts, tol, name="concavity")


@dataclass
class _Shot:
    sol: object
    x0: float
    crossing: float | None = None
    # tail data: where the threshold event fired and the exit slope |g'| at the zero
    x_event: float | None = None
    exit_slope: float | None = None


def _shoot(problem: OdeProblem, slope: float, x_end: float, rtol: float, eps_frac: float = 1e-6) -> _Shot:
    """Integrate from the series start towards ``x_end``.

    ``g**((2-alpha)/alpha)`` is singular at ``g = 0`` on the way down as well,
    so integration stops at a small threshold and the last stretch uses the
    start series run backwards (the equation is autonomous and reversible).
    The exit slope follows from conservation of ``g'**2/2 + (alpha**2 delta/2) g**(2/alpha)``.
    """
    x0 = eps_frac * x_end
    g0, dg0 = problem.start_series(slope, x0)
    threshold = eps_frac * slope * x_end

    def low(x, u):
        return u[0] - threshold

    low.terminal = True
    low.direction = -1
    sol = _integrate(
        lambda x, u: [u[1], problem.rhs(u[0])],
        (x0, x_end),
        [g0, dg0],
        method="DOP853",
        rtol=rtol,
        atol=1e-14,
        dense_output=True,
        events=low,
    )
    if sol.status < 0:
        raise RuntimeError(sol.message)
    shot = _Shot(sol, x0)
    if sol.t_events[0].size == 0:
        return shot
    x_e = float(sol.t_events[0][0])
    g_e, dg_e = sol.y_events[0][0]
    a = problem.alpha
    sigma = math.sqrt(max(dg_e**2 + a * a * problem.delta * abs(g_e) ** (2 / a), 0.0))
    if sigma == 0.0:
        return shot
    # invert the series g(tau) = g_e for the remaining distance tau
    tau = g_e / sigma
    for _ in range(50):
        val, der = problem.start_series(sigma, tau)
        step = (val - g_e) / der
        tau -= step
        if abs(step) <= 1e-15 * tau:
            break
    shot.x_event, shot.exit_slope = x_e, sigma
    shot.crossing = x_e + tau
    return shot


def _sample(problem, shot: _Shot, slope, x_end, grid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x = np.linspace(0.0, x_end, grid)
    g = np.empty(grid)
    dg = np.empty(grid)
    head = x <= shot.x0
    tail = np.zeros(grid, dtype=bool) if shot.x_event is None else x > shot.x_event
    body = ~head & ~tail
    g[head], dg[head] = problem.start_series(slope, x[head])
    u = shot.sol.sol(x[body])
    g[body], dg[body] = u[0], u[1]
    if tail.any():
        rest = np.maximum(shot.crossing - x[tail], 0.0)
        gt, dgt = problem.start_series(shot.exit_slope, rest)
        g[tail], dg[tail] = gt, -dgt
    g[0] = 0.0
    return x, np.maximum(g, 0.0), dg


def solve_ivp(
    problem: OdeProblem,
    slope: float,
    x_max: float,
    grid: int = 512,
    rtol: float = 1e-10,
    eps_frac: float = 1e-6,
) -> RenormalizedCurve:
    """Solve ``g'' = H(g)``, ``g(0) = 0``, ``g'(0) = slope`` on ``[0, x_max]``.

    The origin is singular when alpha > 2, so integration starts at
    ``eps_frac * x_max`` from the two-term series. Raises
    :class:`ZeroCrossingError` if ``g`` vanishes before ``x_max``.
    """
    if not slope > 0:
        raise ValueError("slope must be positive")
    if not x_max > 0:
        raise ValueError("x_max must be positive")
    shot = _shoot(problem, slope, x_max, rtol, eps_frac)
    if shot.crossing is not None and shot.crossing < x_max * (1 - 1e-8):
        raise ZeroCrossingError(shot.crossing, x_max)
    x, g, dg = _sample(problem, shot, slope, x_max, grid)
    if shot.crossing is not None:
        g[-1] = 0.0
    return RenormalizedCurve(x, g, dg)


def zero_crossing(problem: OdeProblem, slope: float, x_limit: float, rtol: float = 1e-12) -> float:
    """First positive zero of the IVP solution, ``inf`` if none before ``x_limit``."""
    crossing = _shoot(problem, slope, x_limit, rtol).crossing
    return math.inf if crossing is None else crossing


def solve_bvp(problem: OdeProblem, a: float, grid: int = 512, rtol: float = 1e-12) -> RenormalizedCurve:
    """Positive solution of ``g'' = H(g)`` with ``g(0) = g(a) = 0``, by shooting on the slope."""
    if not problem.delta > 0:
        raise ValueError("a positive solution vanishing at both ends needs delta > 0")
    if not a > 0:
        raise ValueError("a must be positive")

    def miss(s):
        return min(zero_crossing(problem, s, 4 * a, rtol), 4 * a) - a

    guess = problem.delta * a * problem.alpha / 2
    lo, hi = 0.5 * guess, 2.0 * guess
    for _ in range(60):
        if miss(lo) < 0 < miss(hi):
            break
        if miss(lo) >= 0:
            lo /= 2
        if miss(hi) <= 0:
            hi *= 2
    else:
        raise RuntimeError(f"could not bracket the shooting slope in [{lo}, {hi}]")
    slope = brentq(miss, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)

    shot = _shoot(problem, slope, 2 * a, rtol)
    x, g, dg = _sample(problem, shot, slope, a, grid)
    g[-1] = 0.0
    return RenormalizedCurve(x, g, dg)


def model_slope(n: int) -> float:
    """Right derivative at 0 of the renormalized profile: 2^(-1/n) gamma^((n+1)/n)."""
    d = n + 1
    return half_space_constant(d) ** (d / n)


def compare_upper(profile: ProfileCurve, n: int, delta: float, tol: float = 1e-10) -> ComparisonReport:
    """Check ``I(V) <= I_model(V) + tol`` against the half-model of curvature ``delta``."""
    if profile.ambient_dim != n + 1:
        raise ValueError("profile dimension does not match n + 1")
    model = SpaceForm(n + 1, delta, half=True)
    model_vol = model.total_volume
    if profile.bounded and profile.total_volume > model_vol * (1 + 1e-12):
        return ComparisonReport(
            passed=False,
            worst_margin=float(model_vol - profile.total_volume),
            worst_location=float(profile.total_volume),
            tolerance=tol,
            equality_detected=False,
            name="upper_bound",
            details={"volume_violation": True},
        )
    # sample points only: interpolating across a kink of a piecewise profile
    # would invent overshoot that the body does not have
    keep = profile.V <= model_vol
    pts = profile.V[keep]
    r = model.radius_for_volume(pts)
    margins = model.perimeter_at_radius(r) - profile.I[keep]
    # near the far end of a bounded model dI/dV is unbounded, so the model value
    # is only as good as the volume inversion there
    with np.errstate(invalid="ignore"):
        slope = np.abs(model.profile_slope_at_radius(r))
    slack = np.where(np.isfinite(slope), slope * (1e-13 * pts + 4 * np.spacing(pts)), 0.0)
    return make_report(margins, pts, tol, name="upper_bound", slack=slack, volume_violation=False)


def compare_lower_LG(
    h: NormalizedProfile, n: int, delta: float, tol: float = 1e-8, samples_only: bool = False
) -> ComparisonReport:
    """Check ``h(beta) >= h_model(beta) - tol`` for the half-sphere of curvature ``delta``.

    By default the check also runs at interval midpoints. Pass ``samples_only``
    for raw data without slopes, where midpoint values would only measure the
    interpolant.
    """
    return _lower(h, n, delta, 1.0, tol, "levy_gromov", samples_only=samples_only)


def refined_LG(
    h: NormalizedProfile, n: int, delta: float, cheeger: float, tol: float = 1e-8
) -> ComparisonReport:
    """Lower bound scaled by ``(cheeger / h_C(model))**(1/(n+1))``."""
    from .bounds import model_cheeger

    if not cheeger > 0:
        raise ValueError("cheeger constant must be positive")
    ratio = cheeger / model_cheeger(n + 1, delta)
    return _lower(h, n, delta, ratio ** (1 / (n + 1)), tol, "refined_levy_gromov", ratio=ratio)


def _lower(h, n, delta, factor, tol, name, samples_only=False, **details):
    if not delta > 0:
        raise ValueError("delta must be positive")
    model = SpaceForm(n + 1, delta, half=True)
    vol = model.total_volume
    pts = h.beta if samples_only else h.midpoint_grid()
    model_h = model.profile_at(pts * vol) / vol
    margins = h(pts) - factor * model_h
    return make_report(margins, pts, tol, name=name, factor=factor, **details)


class SideDerivatives(NamedTuple):
    left: float
    right: float
    mean_curvature: float | None


def side_derivatives(curve, V: float, n: int | None = None, step=None, pinch_tol: float = 1e-6) -> SideDerivatives:
    """One-sided derivatives of a profile at ``V`` by Richardson-extrapolated quotients.

    When left and right agree within ``pinch_tol`` (relative), also returns the
    mean curvature ``H = I'(V) / n`` of the corresponding minimizer boundary.
    """
    domain = getattr(curve, "domain", (0.0, math.inf))
    n = getattr(curve, "n", None) if n is None else n
    lo, hi = domain
    if not lo < V < hi:
        raise ValueError("V must be interior")
    if step is None:
        room = min(V - lo, hi - V)
        step = 1e-3 * min(room, 1.0) if math.isfinite(room) else 1e-3 * min(V, 1.0)
    f = curve
    fV = f(V)

    def quotient(h, sign):
        return sign * (f(V + sign * h) - fV) / h

    def extrapolated(sign):
        d1, d2, d4 = (quotient(step / k, sign) for k in (1, 2, 4))
        r1 = 2 * d2 - d1
        r2 = 2 * d4 - d2
        return (4 * r2 - r1) / 3

    left, right = extrapolated(-1), extrapolated(1)
    H = None
    if n and abs(left - right) <= pinch_tol * max(1.0, abs(left), abs(right)):
        H = 0.5 * (left + right) / n
    return SideDerivatives(float(left), float(right), H)


def model_renormalized(space: SpaceForm, grid_size: int = 512, v_max=None) -> RenormalizedCurve:
    return renormalize(model_profile(space, v_max, grid_size))


def model_normalized(d: int, delta: float, grid_size: int = 513) -> NormalizedProfile:
    return normalize(model_profile(SpaceForm(d, delta, half=True), None, grid_size))
