import math

import numpy as np
import pytest
from hypothesis import given, settings

from curvlab.errors import CoincidentError, CollinearError, InvalidInput
from curvlab.geometry import (
    Point, TripleClass, admissible_frame, admissible_frames, apply_rigid_motion, classify_triple,
    menger_curvature, principal_arg,
)

from conftest import EQUILATERAL, good_triples, rel_close


def test_point_rejects_non_finite():
    with pytest.raises(InvalidInput):
        Point(float("nan"), 0.0)
    with pytest.raises(InvalidInput):
        classify_triple((0, 0), (1, float("inf")), (0, 1))


@pytest.mark.parametrize("pts, expected", [
    (((0, 0), (1, 0), (2, 0)), TripleClass.COLLINEAR),
    (((0, 0), (1, 0), (0, 1)), TripleClass.NONCOLLINEAR),
    (((0, 0), (0, 0), (1, 1)), TripleClass.COINCIDENT),
])
def test_classify_examples(pts, expected):
    assert classify_triple(*pts) is expected


def test_right_isosceles_frame():
    f = admissible_frame((0, 0), (1, 0), (0, 1))
    assert (f.z1, f.z2, f.z3) == (Point(1, 0), Point(0, 1), Point(0, 0))
    assert f.th3 == pytest.approx(math.pi / 2, abs=1e-15)
    assert f.th1 == pytest.approx(math.pi / 4) and f.th2 == pytest.approx(math.pi / 4)
    assert f.beta == pytest.approx(0.5)
    assert f.perm == (1, 2, 0)
    assert len(admissible_frames((0, 0), (1, 0), (0, 1))) == 1


def test_equilateral_tie_picks_smallest_index():
    f = admissible_frame(*EQUILATERAL)
    assert f.perm[2] == 0
    assert f.c == pytest.approx(1.0, rel=1e-12)
    assert len(admissible_frames(*EQUILATERAL)) == 3


def test_acute_and_obtuse_counts():
    acute = ((0, 0), (4, 0), (3, 2))
    assert admissible_frame(*acute).z3 == Point(3, 2)
    assert len(admissible_frames(*acute)) == 3
    obtuse = ((0, 0), (4, 4), (6, 3))
    frames = admissible_frames(*obtuse)
    assert len(frames) == 1 and frames[0].z3 == Point(4, 4)
    f = frames[0]
    assert rel_close(f.l2 * math.cos(f.th1), f.beta * f.l3, 1e-10)
    assert rel_close(f.l1 * math.cos(f.th2), (1 - f.beta) * f.l3, 1e-10)


def test_frame_errors():
    with pytest.raises(CollinearError):
        admissible_frame((0, 0), (1, 0), (2, 0))
    with pytest.raises(CoincidentError):
        admissible_frame((0, 0), (0, 0), (2, 1))


def test_menger_examples():
    assert menger_curvature(*EQUILATERAL) == pytest.approx(1.0, rel=1e-12)
    assert menger_curvature((0, 0), (1, 0), (2, 0)) == 0.0
    assert menger_curvature((0, 0), (1, 0), (0, 1)) == pytest.approx(math.sqrt(2), rel=1e-15)
    with pytest.raises(CoincidentError):
        menger_curvature((1, 1), (1, 1), (0, 0))


def test_rigid_motion_examples():
    (p, q, r) = apply_rigid_motion([(1, 0), (2, 0), (0, 3)], math.pi / 2)
    assert p.x == pytest.approx(0, abs=1e-16) and p.y == pytest.approx(1)
    tri = [(1.5, -2), (0.25, 3), (-1, 1)]
    assert [tuple(p) for p in apply_rigid_motion(tri, 0.0, (0, 0))] == [tuple(map(float, t)) for t in tri]


@settings(max_examples=200, deadline=None)
@given(good_triples())
def test_frame_invariants(tri):
    f = admissible_frame(*tri)
    z1, z2, z3 = f.vertices
    assert abs(f.th1 + f.th2 + f.th3 - math.pi) <= 1e-12
    assert f.th1 < math.pi / 2 and f.th2 < math.pi / 2
    assert f.area > 0 and 0 < f.beta < 1
    assert rel_close(f.l2 * math.cos(f.th1), f.beta * f.l3, 1e-10)
    assert rel_close(f.l1 * math.cos(f.th2), (1 - f.beta) * f.l3, 1e-10)
    for th, l in ((f.th1, f.l1), (f.th2, f.l2), (f.th3, f.l3)):
        assert rel_close(2 * math.sin(th) / l, f.c, 1e-10, floor=0)
    assert rel_close(4 * f.area / (f.l1 * f.l2 * f.l3), f.c, 1e-10, floor=0)
    mcos = math.cos(f.th1) / (f.l2 * f.l3) + math.cos(f.th2) / (f.l1 * f.l3) + math.cos(f.th3) / (f.l1 * f.l2)
    assert rel_close(mcos, f.c ** 2 / 2, 1e-10, floor=0)
    s2 = math.sin(2 * f.th1) + math.sin(2 * f.th2) + math.sin(2 * f.th3)
    assert rel_close(s2, 4 * math.sin(f.th1) * math.sin(f.th2) * math.sin(f.th3), 1e-10, floor=0)
    d = z2 - z1
    lhs1 = z2 - z3
    rhs1 = (1 - f.beta) / math.cos(f.th2) * complex(math.cos(f.th2), -math.sin(f.th2)) * d
    lhs2 = z3 - z1
    rhs2 = f.beta / math.cos(f.th1) * complex(math.cos(f.th1), math.sin(f.th1)) * d
    scale = abs(d)
    assert abs(lhs1 - rhs1) <= 1e-10 * scale
    assert abs(lhs2 - rhs2) <= 1e-10 * scale


def _arg02pi(u):
    return math.atan2(u.imag, u.real) % (2 * math.pi)


def _angle_mod_diff(a, b):
    d = (a - b) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


@settings(max_examples=200, deadline=None)
@given(good_triples())
def test_direction_angle_relations(tri):
    # alpha(j, k) = arg(j - k) in [0, 2pi); a, b = base endpoints, c = apex, counterclockwise
    f = admissible_frame(*tri)
    a, b, c = f.vertices
    alpha = lambda j, k: _arg02pi(j - k)  # noqa: E731
    assert _angle_mod_diff(alpha(a, c), alpha(b, a) + f.th1 + math.pi) <= 1e-10
    assert _angle_mod_diff(alpha(b, c), alpha(b, a) - f.th2) <= 1e-10
    assert -math.pi < f.alpha21 <= math.pi
    assert f.alpha21 == pytest.approx(principal_arg(b - a))


@settings(max_examples=200, deadline=None)
@given(good_triples())
def test_admissible_count_matches_shape(tri):
    f = admissible_frame(*tri)
    expected = 3 if f.th3 < math.pi / 2 else 1
    assert len(admissible_frames(*tri)) == expected


@settings(max_examples=150, deadline=None)
@given(good_triples())
def test_menger_invariance(tri):
    c = menger_curvature(*tri)
    for perm in ((1, 0, 2), (2, 1, 0), (1, 2, 0)):
        assert rel_close(menger_curvature(*(tri[i] for i in perm)), c, 1e-12, floor=0)
    moved = apply_rigid_motion(tri, 1.234, (3.5, -7.25))
    assert rel_close(menger_curvature(*moved), c, 1e-12, floor=0)


def test_principal_arg_branch():
    assert principal_arg(-1 + 0j) == math.pi
    assert principal_arg(complex(-1, -0.0)) == math.pi
    assert np.allclose(principal_arg(np.array([1j, -1j])), [math.pi / 2, -math.pi / 2])
