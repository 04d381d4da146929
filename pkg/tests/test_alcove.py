"""Alcove recognition, diagram classification, folding maps."""

import math

import numpy as np
import pytest

from billiards.alcove import (
    AngleNearBinBoundary,
    check_alcove,
    classify,
    coxeter_diagram,
    dihedral_angles,
    fold_point,
    folded_flow,
    standard_alcove,
    standard_alcove_labels,
    CoxeterDiagram,
)
from billiards.dynamics import CornerPolicy, TrajectoryState, simulate
from billiards.errors import NotAnAlcoveError
from billiards.geometry import Polytope
from conftest import random_triangle


EQUILATERAL = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.5 * math.sqrt(3.0)]]
RIGHT_ISOSCELES = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]
HALF_EQUILATERAL = [[0.0, 0.0], [1.0, 0.0], [0.0, math.sqrt(3.0)]]


# -- dihedral geometry -------------------------------------------------------

def test_square_dihedrals_and_parallels():
    square = Polytope.box((0.0, 0.0), (1.0, 1.0))
    geom = dihedral_angles(square)
    n_adjacent = int(np.sum(geom.adjacent)) // 2
    n_parallel = int(np.sum(geom.parallel)) // 2
    assert n_adjacent == 4
    assert n_parallel == 2
    for i, j in zip(*np.nonzero(geom.adjacent)):
        assert math.isclose(geom.angles[i, j], math.pi / 2.0, abs_tol=1e-12)


def test_half_equilateral_angle_multiset():
    tri = Polytope.convex_polygon(HALF_EQUILATERAL)
    geom = dihedral_angles(tri)
    found = sorted(
        geom.angles[i, j]
        for i in range(3)
        for j in range(i + 1, 3)
        if geom.adjacent[i, j]
    )
    want = sorted([math.pi / 2.0, math.pi / 3.0, math.pi / 6.0])
    assert np.allclose(found, want, atol=1e-12)


# -- recognition on the catalogue of 2D tables -------------------------------

@pytest.mark.parametrize(
    "points, label",
    [
        (EQUILATERAL, "A2~"),
        (RIGHT_ISOSCELES, "C2~"),
        (HALF_EQUILATERAL, "G2~"),
    ],
)
def test_triangle_alcove_labels(points, label):
    verdict = check_alcove(Polytope.convex_polygon(points))
    assert verdict.is_alcove
    assert verdict.label == label


def test_boxes_are_product_alcoves():
    for lo, hi, label in [
        ((0.0, 0.0), (1.0, 1.0), "A1~ x A1~"),
        ((0.0, 0.0), (2.0, 1.0), "A1~ x A1~"),
        ((0.0, 0.0, 0.0), (1.0, 2.0, 3.0), "A1~ x A1~ x A1~"),
    ]:
        verdict = check_alcove(Polytope.box(lo, hi))
        assert verdict.is_alcove
        assert verdict.label == label


def test_generic_triangle_rejected_with_nearest_bins():
    tri = Polytope.convex_polygon([[0.0, 0.0], [1.0, 0.0], [0.3, 0.9]])
    verdict = check_alcove(tri)
    assert not verdict.is_alcove
    assert verdict.label is None
    assert len(verdict.failures) >= 1
    for failure in verdict.failures:
        assert math.isclose(
            failure.nearest_angle, math.pi / failure.nearest_m, abs_tol=1e-15
        )
        assert failure.error > 1e-9
        # the reported bin really is the nearest one
        for m in range(2, 65):
            assert abs(failure.angle - math.pi / m) >= failure.error - 1e-15


def test_diagram_raises_with_worst_failure_when_not_alcove():
    tri = Polytope.convex_polygon([[0.0, 0.0], [1.0, 0.0], [0.3, 0.9]])
    with pytest.raises(NotAnAlcoveError):
        coxeter_diagram(tri)


def test_near_bin_boundary_warning():
    angle = math.pi / 64.0 + 5e-5
    tri = Polytope.convex_polygon(
        [[0.0, 0.0], [1.0, 0.0], [math.cos(angle), math.sin(angle)]]
    )
    with pytest.warns(AngleNearBinBoundary):
        check_alcove(tri, eps=1e-4)


def test_random_triangles_never_classify(rng):
    for _ in range(200):
        verdict = check_alcove(random_triangle(rng))
        assert not verdict.is_alcove


# -- the standard alcove catalogue -------------------------------------------

def test_standard_alcoves_roundtrip_their_labels():
    """Build the canonical simplex for every affine label up to rank 8 and
    recover exactly that label from its dihedral angles."""
    labels = standard_alcove_labels(max_rank=8)
    assert len(labels) >= 15
    for label in labels:
        alcove = standard_alcove(label)
        verdict = check_alcove(alcove)
        assert verdict.is_alcove, label
        assert verdict.label == label


def test_unknown_component_gets_no_label():
    # a path with an edge labeled 5 belongs to no affine family
    diagram = CoxeterDiagram(3, {(0, 1): 5.0, (1, 2): 3.0})
    components = classify(diagram)
    assert len(components) == 1
    assert components[0].label is None


# -- folding -----------------------------------------------------------------

def _boxfold_oracle(x: float, width: float) -> float:
    """Triangle-wave folding of the line into [0, width]."""
    period = x % (2.0 * width)
    return period if period <= width else 2.0 * width - period


def test_fold_point_matches_triangle_wave_on_boxes(rng):
    box = Polytope.box((0.0, 0.0), (2.0, 1.0))
    for _ in range(300):
        x = rng.uniform(-20.0, 20.0, 2)
        y, word = fold_point(box, x)
        want = [_boxfold_oracle(x[0], 2.0), _boxfold_oracle(x[1], 1.0)]
        assert np.allclose(y, want, atol=1e-9)
        assert box.contains(y)


def test_fold_point_idempotent_and_word_replays(rng):
    alcove = standard_alcove("C2~")
    for _ in range(100):
        x = rng.uniform(-8.0, 8.0, 2)
        y, word = fold_point(alcove, x)
        z, word2 = fold_point(alcove, y)
        assert np.allclose(z, y, atol=1e-12)
        assert word2 == []
        # replaying the word on x reproduces y
        replay = np.asarray(x, dtype=float).copy()
        for k in word:
            n = alcove.normals[k]
            replay = replay - 2.0 * (replay @ n - alcove.offsets[k]) * n
        assert np.allclose(replay, y, atol=1e-9)


def test_folded_flow_equals_group_fold_simulation():
    triangle = Polytope.convex_polygon(EQUILATERAL)
    state = TrajectoryState((0.5, 0.2), (0.0, 1.0))  # runs into the apex
    a = folded_flow(triangle, state, 5.0)
    b = simulate(triangle, state, 5.0, CornerPolicy.FOLD_GROUP)
    assert a.n_bounces == b.n_bounces
    ts = np.linspace(0.0, 5.0, 501)
    assert np.max(np.linalg.norm(a.sample(ts) - b.sample(ts), axis=1)) < 1e-9


def test_folded_flow_refuses_non_alcoves():
    tri = Polytope.convex_polygon([[0.0, 0.0], [1.0, 0.0], [0.3, 0.9]])
    with pytest.raises(NotAnAlcoveError):
        folded_flow(tri, TrajectoryState((0.4, 0.2), (0.1, 1.0)), 2.0)
