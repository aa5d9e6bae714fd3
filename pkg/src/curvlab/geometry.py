"""Triangle geometry in the complex plane.

Points are stored as pairs of doubles (:class:`Point`) but every computation
runs on Python/numpy complex numbers, so the vectorised helpers here accept
either scalars or arrays of shape ``(..., )``.  The admissible frame is the
labelling ``(z1, z2, z3)`` in which the foot of the altitude from ``z3`` falls
strictly inside ``[z1, z2]`` and the triangle is counterclockwise.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import CoincidentError, CollinearError, InvalidInput

COLLINEAR_TOL = 1e-12
# angles closer than this count as tied when picking the apex vertex
ANGLE_TIE_TOL = 1e-12


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidInput(f"non-finite point ({self.x}, {self.y})")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @classmethod
    def from_complex(cls, z: complex) -> "Point":
        return cls(float(z.real), float(z.imag))

    def __iter__(self):
        yield self.x
        yield self.y


PointLike = Union[Point, complex, Sequence[float]]


def as_complex(p: PointLike) -> complex:
    """Coerce a Point, complex number or (x, y) pair to a finite complex."""
    if isinstance(p, Point):
        return p.z
    if isinstance(p, (complex, float, int, np.number)):
        z = complex(p)
    else:
        x, y = p
        z = complex(float(x), float(y))
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InvalidInput(f"non-finite point {z!r}")
    return z


def as_points(triple) -> tuple[Point, Point, Point]:
    if len(triple) != 3:
        raise InvalidInput(f"expected three points, got {len(triple)}")
    return tuple(p if isinstance(p, Point) else Point.from_complex(as_complex(p)) for p in triple)


class TripleClass(enum.Enum):
    COINCIDENT = "coincident"
    COLLINEAR = "collinear"
    NONCOLLINEAR = "noncollinear"


def cross(u, v):
    """z-component of the planar cross product of complex vectors u, v."""
    return u.real * v.imag - u.imag * v.real


def dot(u, v):
    return u.real * v.real + u.imag * v.imag


def angle_at(p, q, r):
    """Interior angle at ``p`` of the triangle (p, q, r), via atan2(|cross|, dot)."""
    u = q - p
    v = r - p
    return np.arctan2(np.abs(cross(u, v)), dot(u, v))


def principal_arg(u):
    """Argument in (-pi, pi]; numpy gives -pi for negative reals with a -0.0 imaginary part."""
    a = np.angle(u)
    return np.where(a == -np.pi, np.pi, a) if np.ndim(a) else (math.pi if a == -math.pi else float(a))


def classify_triple(p1: PointLike, p2: PointLike, p3: PointLike, tol: float = COLLINEAR_TOL) -> TripleClass:
    if tol < 0:
        raise InvalidInput("tol must be non-negative")
    z1, z2, z3 = as_complex(p1), as_complex(p2), as_complex(p3)
    sides = (abs(z2 - z3), abs(z1 - z3), abs(z1 - z2))
    scale = max(sides)
    if z1 == z2 or z1 == z3 or z2 == z3 or min(sides) <= tol * scale:
        return TripleClass.COINCIDENT
    if abs(cross(z2 - z1, z3 - z1)) <= tol * scale * scale:
        return TripleClass.COLLINEAR
    return TripleClass.NONCOLLINEAR


def _require_noncollinear(z1, z2, z3, tol=COLLINEAR_TOL):
    cls = classify_triple(z1, z2, z3, tol)
    if cls is TripleClass.COINCIDENT:
        raise CoincidentError("triple has coincident points")
    if cls is TripleClass.COLLINEAR:
        raise CollinearError("triple is collinear")


def frame_quantities(z1, z2, z3) -> dict:
    """Side lengths, angles, signed area, beta and alpha21 of an ordered triple.

    Works elementwise on complex arrays.  ``l_j`` is the side opposite ``z_j``;
    ``area`` is positive for counterclockwise order; ``beta`` is the
    normalised position of the foot of the altitude from ``z3`` on [z1, z2].
    """
    d21 = z2 - z1
    l3 = np.abs(d21)
    return {
        "l1": np.abs(z2 - z3),
        "l2": np.abs(z1 - z3),
        "l3": l3,
        "th1": angle_at(z1, z2, z3),
        "th2": angle_at(z2, z1, z3),
        "th3": angle_at(z3, z1, z2),
        "area": 0.5 * cross(d21, z3 - z1),
        "beta": dot(z3 - z1, d21) / (l3 * l3),
        "alpha21": principal_arg(d21),
    }


def canonical_order(z: np.ndarray) -> np.ndarray:
    """Permutation indices (N, 3) of the canonical admissible order of each row of ``z``.

    The apex is the vertex with the largest angle (smallest input index on
    ties); the remaining two are taken in input order and swapped if needed
    to make the triangle counterclockwise.
    """
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    th = np.stack([angle_at(z[:, 0], z[:, 1], z[:, 2]),
                   angle_at(z[:, 1], z[:, 0], z[:, 2]),
                   angle_at(z[:, 2], z[:, 0], z[:, 1])], axis=1)
    apex = np.argmax(th >= th.max(axis=1, keepdims=True) - ANGLE_TIE_TOL, axis=1)
    others = np.array([[1, 2], [0, 2], [0, 1]])[apex]
    rows = np.arange(len(z))
    a, b = z[rows, others[:, 0]], z[rows, others[:, 1]]
    ccw = cross(b - a, z[rows, apex] - a) > 0
    first = np.where(ccw, others[:, 0], others[:, 1])
    second = np.where(ccw, others[:, 1], others[:, 0])
    return np.stack([first, second, apex], axis=1)


@dataclass(frozen=True)
class TriangleFrame:
    z1: Point
    z2: Point
    z3: Point
    l1: float
    l2: float
    l3: float
    th1: float
    th2: float
    th3: float
    area: float
    beta: float
    alpha21: float
    c: float
    perm: tuple[int, int, int]

    @property
    def vertices(self) -> tuple[complex, complex, complex]:
        return self.z1.z, self.z2.z, self.z3.z

    @property
    def min_angle(self) -> float:
        return min(self.th1, self.th2, self.th3)

    def is_admissible(self) -> bool:
        return self.area > 0 and self.th1 < math.pi / 2 and self.th2 < math.pi / 2


def _frame(zs: Sequence[complex], perm: Sequence[int]) -> TriangleFrame:
    z1, z2, z3 = (zs[i] for i in perm)
    q = {k: float(v) for k, v in frame_quantities(z1, z2, z3).items()}
    c = 4.0 * q["area"] / (q["l1"] * q["l2"] * q["l3"])
    return TriangleFrame(Point.from_complex(z1), Point.from_complex(z2), Point.from_complex(z3),
                         c=c, perm=tuple(int(i) for i in perm), **q)


def admissible_frame(p1: PointLike, p2: PointLike, p3: PointLike, tol: float = COLLINEAR_TOL) -> TriangleFrame:
    """Canonical admissible frame of a non-collinear triple."""
    zs = (as_complex(p1), as_complex(p2), as_complex(p3))
    _require_noncollinear(*zs, tol=tol)
    perm = canonical_order(np.array([zs]))[0]
    return _frame(zs, perm)


def admissible_frames(p1: PointLike, p2: PointLike, p3: PointLike, tol: float = COLLINEAR_TOL) -> list[TriangleFrame]:
    """Every admissible ordering: three for acute triangles, one otherwise."""
    zs = (as_complex(p1), as_complex(p2), as_complex(p3))
    _require_noncollinear(*zs, tol=tol)
    frames = []
    for apex in range(3):
        i, j = [k for k in range(3) if k != apex]
        if cross(zs[j] - zs[i], zs[apex] - zs[i]) < 0:
            i, j = j, i
        f = _frame(zs, (i, j, apex))
        if f.is_admissible():
            frames.append(f)
    return frames


def menger_curvature(p1: PointLike, p2: PointLike, p3: PointLike, tol: float = COLLINEAR_TOL) -> float:
    """Reciprocal circumradius 4*Area/(l1*l2*l3); exactly 0 for collinear triples."""
    z1, z2, z3 = as_complex(p1), as_complex(p2), as_complex(p3)
    cls = classify_triple(z1, z2, z3, tol)
    if cls is TripleClass.COINCIDENT:
        raise CoincidentError("Menger curvature needs pairwise distinct points")
    if cls is TripleClass.COLLINEAR:
        return 0.0
    area2 = abs(cross(z2 - z1, z3 - z1))
    return 2.0 * area2 / (abs(z2 - z3) * abs(z1 - z3) * abs(z1 - z2))


def menger_curvature_batch(z: np.ndarray) -> np.ndarray:
    """Vectorised Menger curvature for an (N, 3) complex array (no classification)."""
    z = np.asarray(z, dtype=complex)
    z1, z2, z3 = z[..., 0], z[..., 1], z[..., 2]
    return 2.0 * np.abs(cross(z2 - z1, z3 - z1)) / (np.abs(z2 - z3) * np.abs(z1 - z3) * np.abs(z1 - z2))


def apply_rigid_motion(triple, angle: float, translation: PointLike = 0j) -> tuple[Point, Point, Point]:
    """Rotate every point about the origin by ``angle``, then translate."""
    if not math.isfinite(angle):
        raise InvalidInput("non-finite rotation angle")
    rot = complex(math.cos(angle), math.sin(angle))
    t = as_complex(translation)
    return tuple(Point.from_complex(rot * as_complex(p) + t) for p in triple)


def collinear_limit_order(p1: PointLike, p2: PointLike, p3: PointLike) -> tuple[int, int, int]:
    """Order (first, last, middle) of distinct collinear points, sorted along the line.

    Used as the degenerate limit of the admissible frame: the middle point plays
    the apex (angle pi) and the two ends get angle 0.
    """
    zs = [as_complex(p) for p in (p1, p2, p3)]
    idx = sorted(range(3), key=lambda k: (zs[k].real, zs[k].imag))
    return idx[0], idx[2], idx[1]
