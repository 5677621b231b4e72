import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isoprofile.bodies import Body2D, body_curve
from isoprofile.compare import (
    ComparisonReport,
    OdeProblem,
    ZeroCrossingError,
    check_concavity,
    check_differential_inequality,
    compare_lower_LG,
    compare_upper,
    make_report,
    model_normalized,
    model_renormalized,
    model_slope,
    refined_LG,
    renormalize,
    side_derivatives,
    solve_bvp,
    solve_ivp,
    upper_second_difference,
)
from isoprofile.curves import NormalizedProfile, ProfileCurve, RenormalizedCurve
from isoprofile.space_forms import SpaceForm, gamma_const, model_profile, model_profile_at

TWO_PI = 2 * math.pi


def sampled(f, a, b, grid=257, df=None):
    x = np.linspace(a, b, grid)
    return RenormalizedCurve(x, f(x), None if df is None else df(x))


# --- reports -----------------------------------------------------------------


@given(st.lists(st.floats(-1, 1), min_size=1, max_size=20), st.floats(0, 0.5))
def test_report_invariant(margins, tol):
    rep = make_report(margins, np.arange(len(margins)), tol)
    assert rep.passed == (rep.worst_margin >= -tol)
    assert rep.equality_detected == all(abs(m) <= tol for m in margins)


def test_report_slack_keeps_invariant():
    rep = make_report([-3e-10, 1e-3], [0, 1], 1e-10, slack=[5e-10, 0.0])
    assert rep.passed and rep.worst_margin == 0.0
    assert isinstance(rep, ComparisonReport) and set(rep.to_dict()) >= {"passed", "worst_margin"}


# --- renormalization and second differences --------------------------------


def test_renormalize_examples():
    flat = renormalize(model_profile(SpaceForm(2, 0.0), v_max=5.0))
    np.testing.assert_allclose(flat.y, TWO_PI * flat.x, rtol=1e-13)
    assert flat.y[0] == 0.0
    sphere = renormalize(model_profile(SpaceForm(2, 1.0)))
    np.testing.assert_allclose(sphere.y, sphere.x * (TWO_PI - sphere.x), atol=1e-12)
    assert sphere.exponent == 2.0


def test_renormalize_rejects_bad_input():
    c = ProfileCurve([0.0, 1.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        renormalize(c, n=0)


def test_upper_second_difference_examples():
    lin = sampled(lambda x: TWO_PI * x, 0, 5)
    assert upper_second_difference(lin, 2.0) == pytest.approx(0.0, abs=1e-9)
    quad = sampled(lambda x: x * (TWO_PI - x), 0, TWO_PI, df=lambda x: TWO_PI - 2 * x)
    assert upper_second_difference(quad, 3.0) == pytest.approx(-2.0, abs=1e-8)
    convex = sampled(lambda x: x**2, 0, 2, df=lambda x: 2 * x)
    assert upper_second_difference(convex, 1.0) == pytest.approx(2.0, abs=1e-8)


def test_upper_second_difference_plain_function_and_max_mode():
    f = np.cos
    h = [1e-2, 10**-2.5, 1e-3]
    assert upper_second_difference(f, 0.3, h) == pytest.approx(-math.cos(0.3), abs=1e-10)
    # without extrapolation the largest raw difference is returned
    raw = upper_second_difference(f, 0.3, h, extrapolate=False)
    assert raw >= upper_second_difference(f, 0.3, h) - 1e-12


def test_upper_second_difference_domain():
    quad = sampled(lambda x: x * (1 - x), 0, 1)
    with pytest.raises(ValueError):
        upper_second_difference(quad, 0.005)


def test_kink_is_not_extrapolated_into_convexity():
    # min of two lines is concave; a point just off the kink must not look convex
    kink = sampled(lambda x: np.minimum(x, 0.5), 0, 1, grid=1001)
    assert upper_second_difference(kink, 0.5 + 2e-3) <= 1e-9


# --- inequality and concavity ------------------------------------------------


@pytest.mark.parametrize("delta", [0.0, 1.0])
def test_model_satisfies_inequality_with_equality(delta):
    Y = model_renormalized(SpaceForm(2, delta), v_max=None if delta > 0 else 10.0)
    rep = check_differential_inequality(Y, 1, delta)
    assert rep.passed and rep.equality_detected


def test_convex_curve_fails_inequality_and_concavity():
    convex = sampled(lambda x: x**2, 0, 2, df=lambda x: 2 * x)
    assert not check_differential_inequality(convex, 1, 0.0).passed
    assert not check_concavity(convex).passed


def test_concavity_examples():
    assert check_concavity(model_renormalized(SpaceForm(2, 1.0))).passed
    assert check_concavity(sampled(lambda x: 3 * x, 0, 1)).passed
    square = renormalize(body_curve(Body2D.unit_square()))
    assert check_concavity(square).passed


def test_interior_zero_is_rejected():
    x = np.linspace(0, 1, 51)
    bad = RenormalizedCurve(x, x * (1 - x) * (x - 0.5) ** 2)
    with pytest.raises(ValueError, match="interior"):
        check_differential_inequality(bad, 1, 1.0)


def test_monotone_on_first_half():
    flat = model_profile(SpaceForm(2, 0.0), v_max=10.0)
    assert np.all(np.diff(flat.I) >= 0)
    square = body_curve(Body2D.unit_square())
    half = square.I[square.V <= 0.5]
    assert np.all(np.diff(half) >= 0)


# --- ODE solvers -------------------------------------------------------------


def test_ivp_flat_is_linear():
    g = solve_ivp(OdeProblem(2, 0.0), TWO_PI, 3.0)
    np.testing.assert_allclose(g.y, TWO_PI * g.x, rtol=1e-12)


def test_ivp_sphere_is_quadratic_and_crosses_at_two_pi():
    g = solve_ivp(OdeProblem(2, 1.0), TWO_PI, TWO_PI)
    np.testing.assert_allclose(g.y, g.x * (TWO_PI - g.x), atol=1e-9)
    with pytest.raises(ZeroCrossingError) as info:
        solve_ivp(OdeProblem(2, 1.0), TWO_PI, 7.0)
    assert info.value.abscissa == pytest.approx(TWO_PI, rel=1e-9)


def test_ivp_d3_matches_model():
    space = SpaceForm(3, 1.0)
    g = solve_ivp(OdeProblem(3, 1.0), model_slope(2), 0.9 * space.total_volume)
    assert np.max(np.abs(g.y - space.profile_at(g.x) ** 1.5)) <= 1e-6


def test_model_slope_formula():
    for n in (1, 2, 3):
        assert model_slope(n) == pytest.approx(2 ** (-1 / n) * gamma_const(n + 1) ** ((n + 1) / n), rel=1e-14)
    assert model_slope(1) == pytest.approx(TWO_PI, rel=1e-15)


def test_ivp_rejects_bad_slope():
    with pytest.raises(ValueError):
        solve_ivp(OdeProblem(3, 1.0), 0.0, 1.0)
    with pytest.raises(ValueError):
        OdeProblem(1.5, 1.0)


@pytest.mark.parametrize("alpha", [3, 4])
def test_ivp_start_is_insensitive_to_epsilon(alpha):
    problem = OdeProblem(alpha, 1.0)
    s = model_slope(alpha - 1)
    a = solve_ivp(problem, s, 2.0, grid=200)
    b = solve_ivp(problem, s, 2.0, grid=200, eps_frac=0.5e-6)
    assert np.max(np.abs(a.y - b.y)) <= 1e-9


def test_bvp_examples():
    g = solve_bvp(OdeProblem(2, 1.0), TWO_PI)
    assert np.max(np.abs(g.y - g.x * (TWO_PI - g.x))) <= 1e-8
    g4 = solve_bvp(OdeProblem(2, 4.0), math.pi / 2)
    assert np.max(np.abs(g4.y - g4.x * (TWO_PI - 4 * g4.x))) <= 1e-10
    space = SpaceForm(3, 1.0)
    g3 = solve_bvp(OdeProblem(3, 1.0), space.total_volume)
    assert np.max(np.abs(g3.y - space.profile_at(g3.x) ** 1.5)) <= 1e-6


@pytest.mark.parametrize("alpha", [2, 3, 4])
def test_bvp_symmetry(alpha):
    g = solve_bvp(OdeProblem(alpha, 1.0), 3.0, grid=257)
    assert np.max(np.abs(g.y - g.y[::-1])) <= 1e-9 * g.y.max()


def test_bvp_requires_positive_curvature():
    with pytest.raises(ValueError):
        solve_bvp(OdeProblem(2, 0.0), 1.0)


@settings(max_examples=15, deadline=None)
@given(st.floats(min_value=1.0, max_value=3.0), st.sampled_from([2, 3]))
def test_bvp_is_a_lower_barrier(lam, alpha):
    # lam * g is a supersolution for lam >= 1, and it stays above g
    a = 4.0
    g = solve_bvp(OdeProblem(alpha, 1.0), a, grid=256)
    f = RenormalizedCurve(g.x, lam * g.y, lam * g.slopes)
    assert check_differential_inequality(f, alpha - 1, 1.0).passed
    assert np.all(f.y >= g.y - 1e-12)


@pytest.mark.parametrize("d", [2, 3])
def test_ivp_dominates_profiles_with_the_same_slope(d):
    # the delta=2 model has the same slope at 0 and satisfies the delta=1 inequality
    stronger = SpaceForm(d, 2.0)
    Y = model_renormalized(stronger)
    assert check_differential_inequality(Y, d - 1, 1.0).passed
    g = solve_ivp(OdeProblem(d, 1.0), model_slope(d - 1), stronger.total_volume)
    assert np.all(Y(g.x) <= g.y + 1e-9)


# --- headline comparisons ----------------------------------------------------


def test_compare_upper_examples():
    assert compare_upper(body_curve(Body2D.unit_square()), 1, 0.0).passed
    for d in (2, 3):
        rep = compare_upper(model_profile(SpaceForm(d, 1.0)), d - 1, 1.0)
        assert rep.passed and rep.equality_detected
    flat = model_profile(SpaceForm(2, 0.0), v_max=5.0)
    rep = compare_upper(flat, 1, 1.0)
    assert not rep.passed and rep.worst_location > 1.0


def test_compare_upper_volume_violation():
    sphere = model_profile(SpaceForm(2, 1.0, half=False))
    rep = compare_upper(sphere, 1, 1.0)
    assert not rep.passed and rep.details["volume_violation"]


def test_compare_upper_dimension_mismatch():
    with pytest.raises(ValueError):
        compare_upper(model_profile(SpaceForm(2, 1.0)), 2, 1.0)


def test_levy_gromov_examples():
    h = model_normalized(2, 1.0)
    rep = compare_lower_LG(h, 1, 1.0)
    assert rep.passed and rep.equality_detected
    double = NormalizedProfile(h.beta, 2 * h.h, 2 * h.slopes)
    rep = compare_lower_LG(double, 1, 1.0)
    assert rep.passed and not rep.equality_detected
    half = NormalizedProfile(h.beta, 0.5 * h.h, 0.5 * h.slopes)
    rep = compare_lower_LG(half, 1, 1.0)
    assert not rep.passed
    assert rep.worst_margin == pytest.approx(-0.25, abs=1e-6)
    assert rep.worst_location == pytest.approx(0.5, abs=1e-6)


def test_levy_gromov_on_raw_samples():
    # data without slopes: midpoints would only measure the interpolant
    h = model_normalized(2, 1.0)
    raw = NormalizedProfile(h.beta[::4], h.h[::4], None)
    rep = compare_lower_LG(raw, 1, 1.0, samples_only=True)
    assert rep.passed and rep.equality_detected
    assert rep.worst_location in raw.beta


def test_levy_gromov_needs_positive_curvature():
    with pytest.raises(ValueError):
        compare_lower_LG(model_normalized(2, 1.0), 1, 0.0)


def test_refined_levy_gromov_examples():
    h = model_normalized(2, 1.0)
    rep = refined_LG(h, 1, 1.0, cheeger=1.0)
    assert rep.passed and rep.equality_detected
    double = NormalizedProfile(h.beta, 2 * h.h, 2 * h.slopes)
    assert refined_LG(double, 1, 1.0, cheeger=2.0).passed
    assert not refined_LG(h, 1, 1.0, cheeger=4.0).passed


# --- one-sided derivatives ----------------------------------------------------


def test_side_derivative_examples():
    sphere = model_profile(SpaceForm(2, 1.0))
    sd = side_derivatives(sphere, math.pi)
    assert sd.left == pytest.approx(0.0, abs=1e-9) and sd.right == pytest.approx(0.0, abs=1e-9)
    assert sd.mean_curvature == pytest.approx(0.0, abs=1e-9)
    flat = model_profile(SpaceForm(2, 0.0), v_max=10.0)
    sd = side_derivatives(flat, math.pi / 2)
    assert sd.right == pytest.approx(1.0, abs=1e-8)
    assert sd.mean_curvature == pytest.approx(1.0, abs=1e-8)


def test_side_derivatives_at_a_kink_do_not_pinch():
    square = body_curve(Body2D.unit_square())
    sd = side_derivatives(square, 1 / math.pi)
    assert sd.left > sd.right + 1.0 and sd.mean_curvature is None


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("delta", [-1.0, 0.0, 1.0])
def test_derivative_matches_mean_curvature(d, delta):
    space = SpaceForm(d, delta)
    curve = model_profile(space, None if delta > 0 else 8.0)
    rng = np.random.default_rng(d + int(delta) + 10)
    for V in rng.uniform(0.02, 0.98, 20) * curve.domain[1]:
        sd = side_derivatives(curve, V)
        exact = space.profile_slope_at_radius(space.radius_for_volume(V))
        assert abs(sd.left - exact) <= 1e-5 and abs(sd.right - exact) <= 1e-5


@pytest.mark.parametrize("d, delta", [(2, 0.0), (2, 1.0), (2, -1.0), (3, 1.0)])
def test_derivative_blow_up_near_zero(d, delta):
    space = SpaceForm(d, delta)
    quotients = []
    for k in range(2, 9):
        V = 10.0**-k
        h = 1e-3 * V
        quotients.append((model_profile_at(space, V + h) - model_profile_at(space, V)) / h)
    assert np.all(np.diff(quotients) > 0)
    if d == 2:
        assert quotients[-1] > 1e3
