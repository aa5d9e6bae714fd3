"""Closed-form correction factors R_h and H and the collinear-safe products.

With ``(z1, z2, z3)`` admissible, ``l_j`` opposite ``z_j``, ``th_j`` the angle
at ``z_j`` and ``fh(z) = 2 h(z) - 2 arg(z2 - z1)``::

    R_h = l1 l2 l3 / (4 A)^2 * [ l1 cos(fh(z1) - th1) + l2 cos(fh(z2) + th2)
                                 - l3 cos(fh(z3) + th2 - th1) ]

    H   = 2 l1 l2 l3 / (4 A)^2 * [ l1 cos(h(z2) - h(z3) + th1)
                                   + l2 cos(h(z1) - h(z3) - th2)
                                   + l3 cos(h(z1) - h(z2) + th3) ]

so that S[Re K_h] = c^2 (1/2 + R_h), S[Im K_h] = c^2 (1/2 - R_h) and
S[K_h*] = c^2 H.  Since c^2 l1 l2 l3 / (4A)^2 = 1 / (l1 l2 l3), the products
c^2 R_h and c^2 H only divide by side lengths and stay finite on distinct
collinear points.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import CoincidentError, CollinearError
from .geometry import (
    COLLINEAR_TOL, TriangleFrame, TripleClass, admissible_frame, as_complex, canonical_order,
    classify_triple, collinear_limit_order, frame_quantities, menger_curvature_batch,
)
from .hfunc import HFunction

# below this minimal angle (radians) closed forms are flagged ill-conditioned
ILL_CONDITIONED_ANGLE = 1e-6


@dataclass(frozen=True)
class PhaseFrame:
    frame: TriangleFrame
    hvals: tuple[float, float, float]
    frak_h: tuple[float, float, float]


def phase_frame(h: HFunction, frame: TriangleFrame) -> PhaseFrame:
    hv = tuple(float(v) for v in h(np.array(frame.vertices)))
    return PhaseFrame(frame, hv, tuple(2.0 * v - 2.0 * frame.alpha21 for v in hv))


def rh_bracket(q, h1, h2, h3):
    """Bracket of R_h; ``q`` holds frame quantities (scalars or arrays)."""
    a = q["alpha21"]
    f1, f2, f3 = 2 * h1 - 2 * a, 2 * h2 - 2 * a, 2 * h3 - 2 * a
    return (q["l1"] * np.cos(f1 - q["th1"])
            + q["l2"] * np.cos(f2 + q["th2"])
            - q["l3"] * np.cos(f3 + q["th2"] - q["th1"]))


def hfactor_bracket(q, h1, h2, h3):
    """Bracket of H."""
    return (q["l1"] * np.cos(h2 - h3 + q["th1"])
            + q["l2"] * np.cos(h1 - h3 - q["th2"])
            + q["l3"] * np.cos(h1 - h2 + q["th3"]))


def _prefactor(q):
    lll = q["l1"] * q["l2"] * q["l3"]
    return lll / (4.0 * q["area"]) ** 2


def _quantities(frame: TriangleFrame) -> dict:
    return {k: getattr(frame, k) for k in ("l1", "l2", "l3", "th1", "th2", "th3", "area", "alpha21")}


def rh_from_frame(h: HFunction, frame: TriangleFrame) -> float:
    """R_h evaluated through a specific admissible frame."""
    h1, h2, h3 = h(np.array(frame.vertices))
    q = _quantities(frame)
    return float(_prefactor(q) * rh_bracket(q, h1, h2, h3))


def hfactor_from_frame(h: HFunction, frame: TriangleFrame) -> float:
    h1, h2, h3 = h(np.array(frame.vertices))
    q = _quantities(frame)
    return float(2.0 * _prefactor(q) * hfactor_bracket(q, h1, h2, h3))


def compute_rh(h: HFunction, triple, tol: float = COLLINEAR_TOL) -> float:
    """R_h of a non-collinear triple, via its canonical admissible frame."""
    return rh_from_frame(h, admissible_frame(*triple, tol=tol))


def compute_hfactor(h: HFunction, triple, tol: float = COLLINEAR_TOL) -> float:
    """H of a non-collinear triple, via its canonical admissible frame."""
    return hfactor_from_frame(h, admissible_frame(*triple, tol=tol))


class Target(str, enum.Enum):
    S_RE_KH = "SReKh"
    S_IM_KH = "SImKh"
    S_KH_STAR = "SKhStar"
    S_KH = "SKh"
    S_K0 = "SK0"


def closed_symm(target: Target, h: HFunction, triple, tol: float = COLLINEAR_TOL) -> float:
    """Closed-form value of a symmetrized form on a non-collinear triple."""
    target = Target(target)
    frame = admissible_frame(*triple, tol=tol)
    c2 = frame.c ** 2
    if target is Target.S_RE_KH:
        return c2 * (0.5 + rh_from_frame(h, frame))
    if target is Target.S_IM_KH:
        return c2 * (0.5 - rh_from_frame(h, frame))
    if target is Target.S_KH_STAR:
        return c2 * hfactor_from_frame(h, frame)
    return c2


def _product_quantities(triple, tol):
    zs = [as_complex(p) for p in triple]
    cls = classify_triple(*zs, tol=tol)
    if cls is TripleClass.COINCIDENT:
        raise CoincidentError("product forms need pairwise distinct points")
    if cls is TripleClass.NONCOLLINEAR:
        f = admissible_frame(*zs, tol=tol)
        return f.vertices, _quantities(f), False
    i, j, k = collinear_limit_order(*zs)
    z1, z2, z3 = zs[i], zs[j], zs[k]
    q = frame_quantities(z1, z2, z3)
    q = {key: float(v) for key, v in q.items()}
    # degenerate limit of the admissible frame: apex in the middle at angle pi
    q.update(th1=0.0, th2=0.0, th3=math.pi, area=0.0)
    return (z1, z2, z3), q, True


def product_c2rh(h: HFunction, triple, tol: float = COLLINEAR_TOL) -> float:
    """c^2 R_h = bracket / (l1 l2 l3); defined for any distinct triple."""
    verts, q, _ = _product_quantities(triple, tol)
    h1, h2, h3 = h(np.array(verts))
    return float(rh_bracket(q, h1, h2, h3) / (q["l1"] * q["l2"] * q["l3"]))


def product_c2hfactor(h: HFunction, triple, tol: float = COLLINEAR_TOL) -> float:
    """c^2 H = 2 bracket / (l1 l2 l3); defined for any distinct triple."""
    verts, q, _ = _product_quantities(triple, tol)
    h1, h2, h3 = h(np.array(verts))
    return float(2.0 * hfactor_bracket(q, h1, h2, h3) / (q["l1"] * q["l2"] * q["l3"]))


@dataclass(frozen=True)
class ClosedFormResult:
    """Closed forms of one triple together with conditioning metadata."""
    c2: float
    c2_rh: float
    c2_hfactor: float
    rh: float | None
    hfactor: float | None
    min_angle: float
    ill_conditioned: bool
    collinear_limit: bool


def evaluate_closed_forms(h: HFunction, triple, tol: float = COLLINEAR_TOL) -> ClosedFormResult:
    verts, q, collinear = _product_quantities(triple, tol)
    h1, h2, h3 = h(np.array(verts))
    lll = q["l1"] * q["l2"] * q["l3"]
    c2_rh = float(rh_bracket(q, h1, h2, h3) / lll)
    c2_hf = float(2.0 * hfactor_bracket(q, h1, h2, h3) / lll)
    if collinear:
        return ClosedFormResult(0.0, c2_rh, c2_hf, None, None, 0.0, True, True)
    pre = _prefactor(q)
    c = 4.0 * q["area"] / lll
    min_angle = min(q["th1"], q["th2"], q["th3"])
    return ClosedFormResult(
        c2=c * c, c2_rh=c2_rh, c2_hfactor=c2_hf,
        rh=float(pre * rh_bracket(q, h1, h2, h3)),
        hfactor=float(2.0 * pre * hfactor_bracket(q, h1, h2, h3)),
        min_angle=min_angle, ill_conditioned=min_angle < ILL_CONDITIONED_ANGLE, collinear_limit=False,
    )


def closed_forms_batch(h: HFunction, z) -> dict:
    """Vectorised c^2, R_h and H for an (N, 3) array of non-collinear triples.

    No classification is done; callers pass genuine triangles.  The canonical
    admissible order is used for every row.
    """
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    perm = canonical_order(z)
    zz = np.take_along_axis(z, perm, axis=1)
    z1, z2, z3 = zz[:, 0], zz[:, 1], zz[:, 2]
    q = frame_quantities(z1, z2, z3)
    hv = h(zz)
    pre = _prefactor(q)
    return {
        "c2": menger_curvature_batch(z) ** 2,
        "rh": pre * rh_bracket(q, hv[:, 0], hv[:, 1], hv[:, 2]),
        "hfactor": 2.0 * pre * hfactor_bracket(q, hv[:, 0], hv[:, 1], hv[:, 2]),
        "min_angle": np.minimum(np.minimum(q["th1"], q["th2"]), q["th3"]),
        "perm": perm,
    }
