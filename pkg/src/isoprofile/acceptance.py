"""The twelve acceptance criteria as runnable checks.

Both ``isoprofile verify`` and ``tests/test_acceptance.py`` call
:func:`run_criterion`, so the gate the CLI reports is the gate the test
suite enforces.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bodies import Body2D, body_curve, check_cone_relation, check_small_volume_bound
from .bounds import cheeger_constant, diameter_bound, neumann_eigenvalue_model
from .compare import (
    ComparisonReport,
    OdeProblem,
    check_differential_inequality,
    compare_lower_LG,
    compare_upper,
    model_normalized,
    model_slope,
    renormalize,
    side_derivatives,
    solve_bvp,
    solve_ivp,
)
from .curves import NormalizedProfile
from .space_forms import SpaceForm, half_space_constant, model_profile, model_profile_at

CURVATURES = (-1.0, 0.0, 1.0)


def default_v_max(d: int, delta: float) -> float | None:
    """Sweep limit for unbounded models: ten unit half-balls."""
    if delta > 0:
        return None
    return 10 * SpaceForm(d, 0.0, half=True).volume_at_radius(1.0)


@dataclass
class Outcome:
    passed: bool
    measured: float
    threshold: float
    reports: list = field(default_factory=list)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    measured: float
    threshold: float
    runtime: float
    budget: float
    reports: list

    @property
    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (
            f"[{tag}] criterion {self.number:2d} {self.title}: "
            f"measured {self.measured:.3e} vs threshold {self.threshold:.1e}; "
            f"{self.runtime:.2f} s of {self.budget:g} s"
        )

    def summary(self) -> dict:
        return {
            "criterion": self.number,
            "title": self.title,
            "passed": self.passed,
            "measured": self.measured,
            "threshold": self.threshold,
            "runtime": self.runtime,
            "budget": self.budget,
        }


def _named(report: ComparisonReport, label: str) -> dict:
    out = report.to_dict()
    out["name"] = f"{report.name}[{label}]"
    return out


# --- criteria -------------------------------------------------------------


def closed_form_surface(**_) -> Outcome:
    worst = 0.0
    for delta in CURVATURES:
        space = SpaceForm(2, delta, half=True)
        curve = model_profile(space, default_v_max(2, delta))
        # 200 evenly spaced interior volumes, read off the sampled curve
        V = curve.domain[1] * np.arange(1, 201) / 201
        I = curve(V)
        exact = V * (2 * math.pi - delta * V)
        rel = np.abs(I**2 - exact) / exact
        worst = max(worst, float(rel.max()))
    return Outcome(worst <= 1e-8, worst, 1e-8)


def small_volume_asymptotics(**_) -> Outcome:
    V = 1e-8
    worst = 0.0
    for d in (2, 3):
        n = d - 1
        lead = half_space_constant(d) * V ** (n / (n + 1))
        for delta in CURVATURES:
            ratio = float(model_profile_at(SpaceForm(d, delta, half=True), V)) / lead
            worst = max(worst, abs(ratio - 1))
    return Outcome(worst <= 1e-3, worst, 1e-3)


def model_equality(**_) -> Outcome:
    worst, reports, ok = 0.0, [], True
    for d in (2, 3):
        for delta in CURVATURES:
            Y = renormalize(model_profile(SpaceForm(d, delta, half=True), default_v_max(d, delta)))
            rep = check_differential_inequality(Y, d - 1, delta, tol=1e-4)
            ok &= rep.equality_detected
            worst = max(worst, abs(rep.worst_margin))
            reports.append(_named(rep, f"d={d},delta={delta:g}"))
    return Outcome(ok and worst <= 1e-4, worst, 1e-4, reports)


def ivp_reproduces_model(**_) -> Outcome:
    worst = 0.0
    for d in (2, 3):
        space = SpaceForm(d, 1.0, half=True)
        g = solve_ivp(OdeProblem(d, 1.0), model_slope(d - 1), 0.9 * space.total_volume)
        exact = space.profile_at(g.x) ** (d / (d - 1))
        worst = max(worst, float(np.max(np.abs(g.y - exact))))
    return Outcome(worst <= 1e-6, worst, 1e-6)


def bvp_shooting(**_) -> Outcome:
    g = solve_bvp(OdeProblem(2, 1.0), 2 * math.pi)
    err2 = float(np.max(np.abs(g.y - g.x * (2 * math.pi - g.x))))
    space = SpaceForm(3, 1.0, half=True)
    g3 = solve_bvp(OdeProblem(3, 1.0), space.total_volume)
    err3 = float(np.max(np.abs(g3.y - space.profile_at(g3.x) ** 1.5)))
    ok = err2 <= 1e-8 and err3 <= 1e-6
    # report the worse of the two errors relative to its own threshold
    measured = max(err2 / 1e-8, err3 / 1e-6)
    return Outcome(ok, measured, 1.0)


def flat_upper_bound(**_) -> Outcome:
    bodies = [
        (Body2D.unit_square(), None),
        (Body2D.disk(1.0), None),
        (Body2D.wedge(math.pi / 2), 10.0),
        (Body2D.slab(1.0), 10.0),
    ]
    reports, ok, worst = [], True, math.inf
    for body, v_max in bodies:
        rep = compare_upper(body_curve(body, v_max=v_max), 1, 0.0, tol=1e-10)
        ok &= rep.passed
        worst = min(worst, rep.worst_margin)
        reports.append(_named(rep, body.kind))
    return Outcome(ok, worst, -1e-10, reports)


def levy_gromov_equality(**_) -> Outcome:
    h = model_normalized(2, 1.0)
    same = compare_lower_LG(h, 1, 1.0)
    half = NormalizedProfile(h.beta, 0.5 * h.h, 0.5 * h.slopes, ambient_dim=2)
    perturbed = compare_lower_LG(half, 1, 1.0)
    miss = abs(perturbed.worst_margin + 0.25)
    ok = (
        same.passed
        and same.equality_detected
        and not perturbed.passed
        and miss <= 1e-6
        and abs(perturbed.worst_location - 0.5) <= 1e-6
    )
    return Outcome(ok, miss, 1e-6, [_named(same, "model"), _named(perturbed, "half")])


def diameter_integral(**_) -> Outcome:
    worst = 0.0
    for delta in (0.25, 1.0, 4.0):
        h = model_normalized(2, delta)
        worst = max(worst, abs(diameter_bound(h) - math.pi / math.sqrt(delta)))
    return Outcome(worst <= 1e-6, worst, 1e-6)


def cone_relation(samples: int = 10**6, seed: int = 42, **_) -> Outcome:
    cases = [
        (Body2D.half_plane(), 1.0),
        (Body2D.wedge(math.pi / 2), 1.0),
        (Body2D.wedge(2 * math.pi / 3), 0.7),
        (Body2D.unit_square(), 0.5),
    ]
    reports, ok, worst = [], True, 0.0
    for body, r in cases:
        rep = check_cone_relation(body, r=r, samples=samples, seed=seed)
        ok &= rep.passed
        worst = max(worst, abs(rep.worst_margin) / rep.tolerance)
        reports.append(_named(rep, f"{body.kind}({body.param}),r={r}"))
    control = check_cone_relation(Body2D.half_plane(), r=1.0, samples=samples, seed=seed, vtilde_scale=1.1)
    reports.append(_named(control, "control x1.1"))
    ok &= not control.passed
    # measured: worst |P - 2 Vtilde / r| in units of the 3-sigma tolerance
    return Outcome(ok, worst, 1.0, reports)


def small_volume_bound(samples: int = 10**6, seed: int = 42, **_) -> Outcome:
    bodies = [
        Body2D.half_plane(),
        Body2D.unit_square(),
        Body2D.disk(1.0),
        Body2D.wedge(math.pi / 2),
        Body2D.wedge(2 * math.pi / 3),
        Body2D.wedge(math.pi),
        Body2D.slab(1.0),
    ]
    reports, ok, worst = [], True, math.inf
    for body in bodies:
        rep = check_small_volume_bound(body, r_values=(0.1, 0.3, 0.5), samples=samples, seed=seed)
        ok &= rep.passed
        worst = min(worst, rep.worst_margin)
        reports.append(_named(rep, f"{body.kind}({body.param})"))
    # measured: smallest z-score of (bound - P); passing means >= -3
    return Outcome(ok, worst, -3.0, reports)


def mean_curvature_relation(seed: int = 42, **_) -> Outcome:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for d in (2, 3):
        for delta in CURVATURES:
            space = SpaceForm(d, delta, half=True)
            curve = model_profile(space, default_v_max(d, delta))
            top = curve.domain[1]
            Vs = rng.uniform(0.02 * top, 0.98 * top, 20)
            for V in Vs:
                sd = side_derivatives(curve, float(V))
                exact = float(space.profile_slope_at_radius(space.radius_for_volume(V)))
                worst = max(worst, abs(sd.left - exact), abs(sd.right - exact))
    return Outcome(worst <= 1e-5, worst, 1e-5)


def eigenvalue_and_cheeger(**_) -> Outcome:
    exact_eig = neumann_eigenvalue_model(2, 1.0) == 2
    h = model_normalized(2, 1.0)
    err = max(abs(cheeger_constant(h) - 1), abs(cheeger_constant(h, assume_concave=True) - 1))
    return Outcome(exact_eig and err <= 1e-8, err, 1e-8)


CRITERIA: dict[int, tuple[str, float, Callable[..., Outcome]]] = {
    1: ("closed-form profile d=2", 1.0, closed_form_surface),
    2: ("small-volume asymptotics", 1.0, small_volume_asymptotics),
    3: ("differential-inequality equality on models", 5.0, model_equality),
    4: ("IVP reproduces model", 5.0, ivp_reproduces_model),
    5: ("BVP shooting", 5.0, bvp_shooting),
    6: ("flat upper bound on bodies", 30.0, flat_upper_bound),
    7: ("Levy-Gromov equality and perturbation", 1.0, levy_gromov_equality),
    8: ("diameter integral", 1.0, diameter_integral),
    9: ("cone relation", 60.0, cone_relation),
    10: ("small-volume bound", 60.0, small_volume_bound),
    11: ("derivative and mean curvature", 2.0, mean_curvature_relation),
    12: ("Neumann eigenvalue and Cheeger constant", 1.0, eigenvalue_and_cheeger),
}


def run_criterion(number: int, samples: int = 10**6, seed: int = 42) -> CriterionResult:
    title, budget, check = CRITERIA[number]
    start = time.perf_counter()
    outcome = check(samples=samples, seed=seed)
    runtime = time.perf_counter() - start
    return CriterionResult(
        number=number,
        title=title,
        passed=bool(outcome.passed) and runtime < budget,
        measured=float(outcome.measured),
        threshold=float(outcome.threshold),
        runtime=runtime,
        budget=budget,
        reports=outcome.reports,
    )


def run_all(samples: int = 10**6, seed: int = 42) -> list[CriterionResult]:
    return [run_criterion(k, samples, seed) for k in CRITERIA]
