"""Smooth strictly convex tables: chords, base angles, small-angle laws."""

import math

import numpy as np
import pytest

from billiards.errors import InputError
from billiards.smooth import (
    Circle,
    Ellipse,
    PerturbedCircle,
    base_angle_run,
    boundary_convergence_experiment,
    chord_deviation,
    smooth_bounce,
    verify_base_angle_laws,
)

TABLES = [Circle(1.0), Ellipse(2.0, 1.0), PerturbedCircle(0.05, 3)]


# -- parametrization plumbing ------------------------------------------------

@pytest.mark.parametrize("table", TABLES, ids=lambda t: type(t).__name__)
def test_boundary_points_satisfy_the_implicit_equation(table):
    for theta in np.linspace(0.0, 2.0 * math.pi, 37):
        x, y = table.point(theta)
        assert abs(table.implicit(x, y)) < 1e-12


@pytest.mark.parametrize("table", TABLES, ids=lambda t: type(t).__name__)
def test_theta_of_point_inverts_point(table):
    for theta in np.linspace(0.1, 2.0 * math.pi - 0.1, 23):
        x, y = table.point(theta)
        back = table.theta_of_point(x, y)
        bx, by = table.point(back)
        assert math.hypot(bx - x, by - y) < 1e-9


@pytest.mark.parametrize("table", TABLES, ids=lambda t: type(t).__name__)
def test_ray_exit_lands_on_the_boundary(table):
    rng = np.random.default_rng(5)
    for _ in range(100):
        theta = rng.uniform(0.0, 2.0 * math.pi)
        alpha = rng.uniform(0.05, 1.2)
        px, py = table.point(theta)
        dx, dy = table.launch_direction(theta, alpha, +1)
        t = table.ray_exit(px, py, dx, dy)
        assert t > 1e-9
        assert abs(table.implicit(px + t * dx, py + t * dy)) < 1e-9


def test_curvature_positive_everywhere():
    for table in TABLES:
        for theta in np.linspace(0.0, 2.0 * math.pi, 73):
            assert table.curvature(theta) > 1e-6


def test_overly_wavy_perturbation_rejected():
    with pytest.raises(InputError):
        PerturbedCircle(0.2, 5)  # curvature changes sign


def test_circle_distance_to_boundary():
    circle = Circle(1.0)
    assert math.isclose(
        circle.distance_to_boundary(0.3, 0.0), 0.7, abs_tol=1e-9
    )


# -- the circle is exactly solvable ------------------------------------------

def test_circle_bounce_is_exact():
    """On a circle of radius R a chord at base angle a subtends 2a, has
    length 2 R sin a, and leaves the base angle unchanged."""
    circle = Circle(1.3)
    for alpha in (0.7, 0.2, 0.03):
        step = smooth_bounce(circle, 0.4, alpha, +1)
        assert math.isclose(
            step.theta_next - step.theta, 2.0 * alpha, abs_tol=1e-12
        )
        assert math.isclose(
            step.chord, 2.0 * 1.3 * math.sin(alpha), abs_tol=1e-12
        )
        assert math.isclose(step.alpha_next, alpha, abs_tol=1e-12)


def test_circle_run_conserves_the_base_angle():
    # conservation is exact; rounding drifts ~1e-15 per bounce over 400 steps
    run = base_angle_run(Circle(1.0), 0.1, 0.01, 400)
    assert np.max(np.abs(run.alphas - 0.01)) < 1e-11


def test_circle_chord_deviation_is_the_sagitta():
    circle = Circle(1.0)
    alpha = 0.05
    step = smooth_bounce(circle, 0.0, alpha, +1)
    dev = chord_deviation(
        circle, step.point, step.point_next, step.theta, step.theta_next
    )
    assert math.isclose(dev, 1.0 - math.cos(alpha), abs_tol=1e-14)


# -- parameter advance and the branch cut ------------------------------------

@pytest.mark.parametrize("table", TABLES, ids=lambda t: type(t).__name__)
def test_theta_advances_monotonically_across_the_cut(table):
    theta, alpha = 2.0 * math.pi - 0.05, 0.1
    thetas = [theta]
    for _ in range(30):
        step = smooth_bounce(table, theta, alpha, +1)
        theta, alpha = step.theta_next, step.alpha_next
        thetas.append(theta)
    diffs = np.diff(thetas)
    assert np.all(diffs > 0.0)
    assert np.all(diffs < math.pi)


def test_negative_side_runs_clockwise():
    run = base_angle_run(Ellipse(2.0, 1.0), 1.0, 0.1, 50, side=-1)
    assert np.all(np.diff(run.thetas) < 0.0)


def test_bounce_points_stay_on_the_boundary():
    table = PerturbedCircle(0.05, 3)
    run = base_angle_run(table, 0.3, 0.02, 300)
    for x, y in run.points:
        assert abs(table.implicit(x, y)) < 1e-9


# -- the small-angle laws ----------------------------------------------------

def test_ellipse_laws_have_quadratic_exponents():
    report = verify_base_angle_laws(Ellipse(2.0, 1.0), (0.04, 0.02, 0.01))
    assert 1.8 <= report.increment_slope <= 2.2
    assert 1.8 <= report.deviation_slope <= 2.2
    assert report.chord_constant > 0.5


def test_perturbed_laws_have_quadratic_exponents():
    report = verify_base_angle_laws(PerturbedCircle(0.05, 3), (0.04, 0.02, 0.01))
    assert 1.8 <= report.increment_slope <= 2.2
    assert 1.8 <= report.deviation_slope <= 2.2
    assert report.chord_constant > 0.5


def test_circle_increments_are_identically_zero():
    report = verify_base_angle_laws(Circle(1.0), (0.04, 0.02, 0.01))
    assert np.max(report.max_increments) < 1e-13
    assert report.chord_constant > 1.9  # chord/alpha -> 2R


def test_circle_convergence_matches_the_closed_form():
    report = boundary_convergence_experiment(Circle(1.0), (0.02, 0.01, 0.005))
    assert report.max_prediction_error is not None
    assert report.max_prediction_error < 1e-12
    assert np.all(np.diff(report.max_deviations) < 0.0)


def test_ellipse_deviation_below_1e4_at_milli_angle():
    """A full-perimeter run at launch angle 1e-3 hugs the boundary to 1e-4."""
    table = Ellipse(2.0, 1.0)
    n = int(math.ceil(math.pi / 1e-3))
    run = base_angle_run(table, 0.1, 1e-3, n)
    worst = 0.0
    for k in range(run.n_bounces):
        dev = chord_deviation(
            table,
            tuple(run.points[k]),
            tuple(run.points[k + 1]),
            run.thetas[k],
            run.thetas[k + 1],
        )
        worst = max(worst, dev)
    assert worst < 1e-4


def test_rejects_flat_and_reversed_launch_angles():
    with pytest.raises(InputError):
        smooth_bounce(Circle(1.0), 0.0, 0.0, +1)
    with pytest.raises(InputError):
        smooth_bounce(Circle(1.0), 0.0, math.pi / 2.0, +1)
