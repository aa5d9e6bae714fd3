"""Constructive numerical witnesses of the instability of R_h and H.

All experiments are deterministic functions of their arguments (random
sampling is driven by an explicit seed) and return plain dataclasses that the
CLI serialises.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .closedform import ILL_CONDITIONED_ANGLE, closed_forms_batch, compute_hfactor, compute_rh, hfactor_bracket
from .errors import CoincidentError, InvalidInput, SearchExhausted
from .geometry import Point, PointLike, angle_at, as_complex, frame_quantities, menger_curvature, principal_arg
from .hfunc import Constant, HFunction, make_point_perturbed
from .kernels import KernelSpec
from .symmform import symmetrize


# --------------------------------------------------------------------------
# Domains and random triples
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Box:
    xmin: float = -1.0
    xmax: float = 1.0
    ymin: float = -1.0
    ymax: float = 1.0

    def from_unit(self, u: np.ndarray) -> np.ndarray:
        """Map points of [0, 1)^2 (shape (N, 2)) into the box."""
        return (self.xmin + (self.xmax - self.xmin) * u[:, 0]) + 1j * (self.ymin + (self.ymax - self.ymin) * u[:, 1])

    def contains(self, z):
        return (z.real >= self.xmin) & (z.real <= self.xmax) & (z.imag >= self.ymin) & (z.imag <= self.ymax)

    def corners(self) -> list[complex]:
        return [complex(x, y) for x in (self.xmin, self.xmax) for y in (self.ymin, self.ymax)]

    @property
    def scale(self) -> float:
        return math.hypot(self.xmax - self.xmin, self.ymax - self.ymin)


@dataclass(frozen=True)
class Disk:
    center: complex = 0j
    radius: float = 1.0

    def from_unit(self, u: np.ndarray) -> np.ndarray:
        return self.center + self.radius * np.sqrt(u[:, 0]) * np.exp(2j * np.pi * u[:, 1])

    def contains(self, z):
        return np.abs(z - self.center) <= self.radius

    def corners(self) -> list[complex]:
        return [self.center + self.radius * 1j ** k for k in range(4)]

    @property
    def scale(self) -> float:
        return 2.0 * self.radius


Domain = Box | Disk


def _vertex_angles(z):
    return np.stack([angle_at(z[:, 0], z[:, 1], z[:, 2]),
                     angle_at(z[:, 1], z[:, 0], z[:, 2]),
                     angle_at(z[:, 2], z[:, 0], z[:, 1])], axis=1)


def random_triples(rng: np.random.Generator, domain: Domain, count: int,
                   min_angle_floor: float = 1e-2, max_base_angle: float = 1.4) -> np.ndarray:
    """Random non-collinear triples (N, 3) inside ``domain`` with min angle >= floor.

    A triple is a random base segment [a, b], a foot ``a + beta (b - a)`` with
    beta in (0.1, 0.9) and an apex raised so the angle at ``a`` is a
    log-uniform theta in [floor, max_base_angle].  Thin triangles near the
    floor are therefore well represented.  Vertex order is shuffled.
    """
    out = []
    have = 0
    lo, hi = math.log(min_angle_floor), math.log(max_base_angle)
    while have < count:
        n = 2 * (count - have) + 16
        a = domain.from_unit(rng.random((n, 2)))
        b = domain.from_unit(rng.random((n, 2)))
        beta = rng.uniform(0.1, 0.9, n)
        theta = np.exp(rng.uniform(lo, hi, n))
        side = rng.choice([-1.0, 1.0], n)
        d = b - a
        apex = a + beta * d + side * 1j * d * beta * np.tan(theta)
        z = np.stack([a, b, apex], axis=1)
        ok = (np.abs(d) > 1e-3 * domain.scale) & domain.contains(apex)
        ok &= _vertex_angles(z).min(axis=1) >= min_angle_floor
        z = rng.permuted(z[ok], axis=1)
        out.append(z[: count - have])
        have += len(out[-1])
    return np.concatenate(out)[:count]


def random_acute_triples(rng: np.random.Generator, domain: Domain, count: int,
                         min_angle_floor: float = 1e-2, right_margin: float = 1e-6) -> np.ndarray:
    """Random acute triangles (all angles < pi/2 - right_margin) with min angle >= floor."""
    out = []
    have = 0
    while have < count:
        n = 4 * (count - have) + 16
        z = domain.from_unit(rng.random((3 * n, 2))).reshape(n, 3)
        th = _vertex_angles(z)
        ok = (th.max(axis=1) < math.pi / 2 - right_margin) & (th.min(axis=1) >= min_angle_floor)
        out.append(z[ok][: count - have])
        have += len(out[-1])
    return np.concatenate(out)[:count]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("CURVLAB_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items):
    items = list(items)
    workers = min(_threads(), len(items))
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))  # map preserves input order


# --------------------------------------------------------------------------
# Records
# --------------------------------------------------------------------------

@dataclass
class SweepRecord:
    params: dict
    triple: tuple
    c2: float
    rh: float | None = None
    hfactor: float | None = None
    s_bruteforce: float | None = None
    residual: float | None = None
    condition_flag: bool = False
    extra: dict = field(default_factory=dict)

    def as_row(self) -> dict:
        row = dict(self.params)
        for k, p in enumerate(self.triple, start=1):
            row[f"z{k}_x"] = p.x
            row[f"z{k}_y"] = p.y
        row.update(c2=self.c2, rh=self.rh, hfactor=self.hfactor,
                   s_bruteforce=self.s_bruteforce, residual=self.residual,
                   condition_flag=self.condition_flag)
        row.update(self.extra)
        return row


def _min_angle(zs) -> float:
    z = np.array([zs])
    return float(_vertex_angles(z).min())


# --------------------------------------------------------------------------
# Point-perturbed counterexamples
# --------------------------------------------------------------------------

def remark_h(variant: str, eps0: float) -> HFunction:
    """h = 0 except at the origin: eps0/2 for variant C, -eps0 for variant D."""
    value = eps0 / 2 if variant.upper() == "C" else -eps0
    return make_point_perturbed(Constant(0.0), [((0.0, 0.0), value)])


def remark_c_reference(lam: float, eps0: float) -> float:
    """Reference closed formula for the variant C family."""
    return (1 + lam * lam) / lam * math.sin(eps0)


def remark_d_reference(lam: float, eps0: float) -> float:
    """Reference closed formula for the variant D family; theta2 is the angle at vertex 1."""
    th2 = math.atan(lam)
    return 0.5 * math.sqrt(1 + lam * lam) / lam * (lam * math.cos(th2 + eps0) + math.sin(th2 + eps0))


def remark_counterexample_sweep(variant: str, eps0: float, lambdas) -> list[SweepRecord]:
    """R_h (variant C) or H (variant D) on the triples {0, 1, i*lambda}.

    ``residual`` compares the closed form with the brute-force symmetrized
    form; ``extra['reference']`` is the reference closed formula and
    ``extra['reference_residual']`` its distance from the computed value.
    """
    variant = variant.upper()
    if variant not in ("C", "D"):
        raise InvalidInput(f"unknown remark variant {variant!r}")
    if not math.sin(eps0) > 0.5:
        raise InvalidInput("eps0 must satisfy sin(eps0) > 1/2")
    lambdas = [float(v) for v in lambdas]
    if any(not (v > 0 and math.isfinite(v)) for v in lambdas):
        raise InvalidInput("lambda values must be positive")
    h = remark_h(variant, eps0)

    def one(lam):
        triple = (0j, 1 + 0j, 1j * lam)
        c2 = menger_curvature(*triple) ** 2
        points = tuple(Point.from_complex(z) for z in triple)
        params = {"variant": variant, "eps0": eps0, "lambda": lam}
        flag = _min_angle(triple) < ILL_CONDITIONED_ANGLE
        if variant == "C":
            rh = compute_rh(h, triple)
            s_bf = symmetrize(KernelSpec("kh", h, "re"), triple).value
            closed = c2 * (0.5 + rh)
            ref = remark_c_reference(lam, eps0)
            return SweepRecord(params, points, c2, rh=rh, s_bruteforce=s_bf, residual=abs(closed - s_bf),
                               condition_flag=flag,
                               extra={"reference": ref, "reference_residual": abs(rh - ref)})
        hf = compute_hfactor(h, triple)
        s_bf = symmetrize(KernelSpec("kh-star", h), triple).value
        ref = remark_d_reference(lam, eps0)
        return SweepRecord(params, points, c2, hfactor=hf, s_bruteforce=s_bf, residual=abs(c2 * hf - s_bf),
                           condition_flag=flag,
                           extra={"reference": ref, "reference_residual": abs(hf - ref)})

    return _map(one, lambdas)


# --------------------------------------------------------------------------
# Collapse families
# --------------------------------------------------------------------------

def _check_thetas(thetas):
    thetas = [float(t) for t in thetas]
    for t in thetas:
        if not 0 < t < math.pi / 2:
            raise InvalidInput(f"theta {t} outside (0, pi/2)")
    return thetas


def collapse_family_probe(h: HFunction, z2: PointLike, beta: float, thetas, side: str = "rh") -> list[SweepRecord]:
    """Follow a triangle family collapsing onto a segment as theta -> 0.

    ``side='rh'``: triples (0, z2, z3(theta)) with
    ``z3(theta) = beta z2 (1 + i tan theta)``, so the foot of the altitude is
    ``beta z2`` and the angle at the origin is theta.  Records the numerator
    E and denominator F of R_h = E / F together with the analytic theta -> 0
    limit of E,

        l3 [(1 - beta) cos fh(0) + beta cos fh(z2) - cos fh(beta z2)],

    with ``fh = 2 h - 2 arg z2``.  A non-zero limit forces |R_h| -> infinity.

    ``side='h'``: triples (z2 (1 + i tan theta), 0, beta z2), whose apex at
    ``beta z2`` is obtuse and whose altitude foot is z2 itself.  Records the
    H-bracket A and its limit

        l [cos(h(0) - h(b z2)) + (1/b - 1) cos(h(z2) - h(b z2)) - (1/b) cos(h(z2) - h(0))]

    where ``l = |beta z2|`` and b = beta.
    """
    z2 = as_complex(z2)
    if z2 == 0:
        raise InvalidInput("z2 must be non-zero")
    if not 0 < beta < 1:
        raise InvalidInput("beta must lie in (0, 1)")
    thetas = _check_thetas(thetas)
    side = side.lower()
    if side not in ("rh", "h"):
        raise InvalidInput(f"unknown side {side!r}")
    h0, hz2, hb = (float(v) for v in h(np.array([0j, z2, beta * z2])))

    if side == "rh":
        a21 = principal_arg(z2)
        fh = lambda v: 2.0 * v - 2.0 * a21  # noqa: E731
        l3 = abs(z2)
        e_limit = l3 * ((1 - beta) * math.cos(fh(h0)) + beta * math.cos(fh(hz2)) - math.cos(fh(hb)))

        def one(theta):
            z3 = beta * z2 * complex(1.0, math.tan(theta))
            triple = (0j, z2, z3)
            q = frame_quantities(*triple)
            th2 = float(q["th2"])
            e = (q["l1"] * math.cos(fh(h0) - theta) + q["l2"] * math.cos(fh(hz2) + th2)
                 - l3 * math.cos(fh(h(z3)) + th2 - theta))
            f = 4.0 * l3 * math.sin(theta) * math.sin(th2)
            rh = compute_rh(h, triple)
            c2 = menger_curvature(*triple) ** 2
            s_bf = symmetrize(KernelSpec("kh", h, "re"), triple).value
            return SweepRecord(
                {"theta": theta, "beta": beta}, tuple(Point.from_complex(z) for z in triple), c2,
                rh=rh, s_bruteforce=s_bf, residual=abs(c2 * (0.5 + rh) - s_bf),
                condition_flag=_min_angle(triple) < ILL_CONDITIONED_ANGLE,
                extra={"E": float(e), "F": f, "ratio": float(e) / f, "E_limit": e_limit},
            )
        return _map(one, thetas)

    z3 = beta * z2
    ell = abs(z3)
    bp = 1.0 / beta
    a_limit = ell * (math.cos(h0 - hb) + (bp - 1) * math.cos(hz2 - hb) - bp * math.cos(hz2 - h0))

    def one(theta):
        z1 = z2 * complex(1.0, math.tan(theta))
        triple = (z1, 0j, z3)
        q = frame_quantities(*triple)
        hv = h(np.array(triple))
        a = float(hfactor_bracket(q, hv[0], hv[1], hv[2]))
        hf = compute_hfactor(h, triple)
        c2 = menger_curvature(*triple) ** 2
        s_bf = symmetrize(KernelSpec("kh-star", h), triple).value
        return SweepRecord(
            {"theta": theta, "beta": beta}, tuple(Point.from_complex(z) for z in triple), c2,
            hfactor=hf, s_bruteforce=s_bf, residual=abs(c2 * hf - s_bf),
            condition_flag=_min_angle(triple) < ILL_CONDITIONED_ANGLE,
            extra={"A": a, "A_limit": a_limit},
        )
    return _map(one, thetas)


# --------------------------------------------------------------------------
# Interpolation deficit
# --------------------------------------------------------------------------

def interpolation_deficits(h: HFunction, z1: PointLike, z2: PointLike, betas) -> np.ndarray:
    """|cos fh(z1 + b (z2 - z1)) - (1 - b) cos fh(z1) - b cos fh(z2)| for each b,
    with fh = 2 h - 2 arg(z2 - z1)."""
    z1, z2 = as_complex(z1), as_complex(z2)
    if z1 == z2:
        raise CoincidentError("interpolation deficit needs z1 != z2")
    b = np.asarray(betas, dtype=float)
    if np.any((b <= 0) | (b >= 1)):
        raise InvalidInput("betas must lie in (0, 1)")
    a21 = principal_arg(z2 - z1)
    c = lambda z: np.cos(2.0 * h(z) - 2.0 * a21)  # noqa: E731
    ends = c(np.array([z1, z2]))
    return np.abs(c(z1 + b * (z2 - z1)) - (1 - b) * ends[0] - b * ends[1])


def interpolation_deficit(h: HFunction, z1: PointLike, z2: PointLike, betas) -> float:
    """Largest deviation from linear interpolation of cos fh along [z1, z2].

    A positive value certifies that R_h is unbounded for this h.
    """
    return float(np.max(interpolation_deficits(h, z1, z2, betas)))


# --------------------------------------------------------------------------
# Sign-change search
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SignChangeWitness:
    triple_pos: tuple
    triple_neg: tuple
    values: tuple[float, float]  # (R_h on triple_pos, R_h on triple_neg)
    seed_pair: tuple  # (z1, z2, z0, t0)
    params: dict
    verified: tuple[float, float]  # compensated brute-force S[Re K_h] on each triple
    evaluations: int


@dataclass(frozen=True)
class ConstantCertificate:
    """No pair with cos fh(z1) != cos fh(z2) was found within the budget."""
    pairs_tested: int
    max_gap: float
    evaluations: int


THETA_GRID = tuple(10.0 ** -k for k in range(1, 7))
R_GRID = tuple(2.0 ** m for m in range(1, 11))
STAGE2_RESERVE = 512


def _cos_fh(h, z, direction_arg):
    return np.cos(2.0 * h(z) - 2.0 * direction_arg)


def _find_seed_pair(h, domain, pairs_budget, seed, gap_tol):
    sobol = qmc.Sobol(d=4, scramble=True, seed=seed)
    corners = domain.corners()
    first = [(a, b) for a in corners for b in corners if a != b]
    tested = 0
    max_gap = 0.0
    chunk = np.array(first)
    while tested < pairs_budget:
        chunk = chunk[: pairs_budget - tested]
        z1, z2 = chunk[:, 0], chunk[:, 1]
        d = z2 - z1
        ok = np.abs(d) > 1e-9 * domain.scale
        a21 = np.angle(d)
        gap = np.where(ok, _cos_fh(h, z2, a21) - _cos_fh(h, z1, a21), 0.0)
        tested += len(chunk)
        k = int(np.argmax(np.abs(gap)))
        max_gap = max(max_gap, float(abs(gap[k])))
        if abs(gap[k]) > gap_tol:
            a, b = complex(z1[k]), complex(z2[k])
            # reversing the pair shifts fh by 2 pi, so swapping fixes the order
            return (a, b) if gap[k] > 0 else (b, a), tested, max_gap
        u = sobol.random(4096)
        chunk = np.stack([domain.from_unit(u[:, :2]), domain.from_unit(u[:, 2:])], axis=1)
    return None, tested, max_gap


def _bisect(h, z1, z2, tol=1e-12):
    a21 = principal_arg(z2 - z1)
    f = lambda t: float(_cos_fh(h, z1 + t * (z2 - z1), a21))  # noqa: E731
    f0, f1 = f(0.0), f(1.0)
    target = 0.5 * (f0 + f1)
    lo, hi = 0.0, 1.0
    steps = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < target:
            lo = mid
        else:
            hi = mid
        steps += 1
    for t in (0.5 * (lo + hi), lo, hi):
        if 0 < t < 1 and f0 < f(t) < f1:
            return t, steps
    return None, steps


def sign_change_search(h: HFunction, domain: Domain = Box(), budget: int = 200_000, seed: int = 0,
                       gap_tol: float = 1e-9):
    """Find triples on which 1/2 + R_h takes both signs, or certify none were found.

    Stage 1 looks for a pair z1 != z2 with cos fh(z1) < cos fh(z2) (domain
    corners first, then scrambled Sobol pairs) and bisects along the segment
    for z0 whose value lies strictly in between.  Stage 2 scans two collapsing
    families: (z0, z2^R, z2 + i (z2 - z0) tan theta) with
    z2^R = z0 + (1 + R)(z2 - z0), where 1/2 + R_h turns negative, and
    (z1^R, z0, z1 + i (z0 - z1) tan theta) with z1^R = z1 + R (z1 - z0),
    where it turns positive.  Candidates are re-verified by the compensated
    brute-force S[Re K_h], which has the sign of 1/2 + R_h.

    ``budget`` counts pair tests, bisection steps and R_h evaluations.
    """
    if budget < 1000:
        raise InvalidInput("budget must be at least 1000")
    pair, used, max_gap = _find_seed_pair(h, domain, budget - STAGE2_RESERVE, seed, gap_tol)
    if pair is None:
        return ConstantCertificate(pairs_tested=used, max_gap=max_gap, evaluations=used)
    z1, z2 = pair
    t0, steps = _bisect(h, z1, z2)
    used += steps
    partial = {"z1": z1, "z2": z2, "t0": t0, "evaluations": used}
    if t0 is None:
        raise SearchExhausted("no intermediate point z0 found between the seed pair", partial)
    z0 = z1 + t0 * (z2 - z1)
    spec = KernelSpec("kh", h, "re")

    def family_neg(theta, r):
        return (z0, z0 + (1 + r) * (z2 - z0), z2 + 1j * (z2 - z0) * math.tan(theta))

    def family_pos(theta, r):
        return (z1 + r * (z1 - z0), z0, z1 + 1j * (z0 - z1) * math.tan(theta))

    found = {}
    for label, family, sign in (("neg", family_neg, -1.0), ("pos", family_pos, 1.0)):
        for r in R_GRID:
            for theta in THETA_GRID:
                if used >= budget:
                    partial.update(evaluations=used, found=found)
                    raise SearchExhausted("budget exhausted during the family scan", partial)
                triple = family(theta, r)
                rh = compute_rh(h, triple)
                used += 1
                if sign * (0.5 + rh) > 0:
                    s = symmetrize(spec, triple, compensated=True).value
                    if sign * s > 0:
                        found[label] = (triple, rh, s, theta, r)
                        break
            if label in found:
                break
        if label not in found:
            partial.update(evaluations=used, found=found)
            raise SearchExhausted(f"family scan found no {label} triple", partial)

    pos, neg = found["pos"], found["neg"]
    pts = lambda t: tuple(Point.from_complex(z) for z in t)  # noqa: E731
    return SignChangeWitness(
        triple_pos=pts(pos[0]), triple_neg=pts(neg[0]), values=(pos[1], neg[1]),
        seed_pair=(Point.from_complex(z1), Point.from_complex(z2), Point.from_complex(z0), t0),
        params={"theta_pos": pos[3], "R_pos": pos[4], "theta_neg": neg[3], "R_neg": neg[4]},
        verified=(pos[2], neg[2]), evaluations=used,
    )


# --------------------------------------------------------------------------
# Bound probe
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundProbeResult:
    sup_abs_rh: float
    argmax_triple: tuple
    count: int
    min_angle_floor: float


def bound_probe(h: HFunction, domain: Domain = Disk(), count: int = 10_000,
                min_angle_floor: float = 1e-2, seed: int = 0) -> BoundProbeResult:
    """Observed supremum of |R_h| over random triples down to ``min_angle_floor``."""
    if count < 1:
        raise InvalidInput("count must be at least 1")
    rng = np.random.default_rng(seed)
    z = random_triples(rng, domain, count, min_angle_floor)
    rh = np.abs(closed_forms_batch(h, z)["rh"])
    k = int(np.argmax(rh))
    return BoundProbeResult(float(rh[k]), tuple(Point.from_complex(v) for v in z[k]), count, min_angle_floor)
