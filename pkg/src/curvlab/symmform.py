"""Brute-force symmetrized form S[K] over the six permutations of a triple.

This is the reference oracle for every closed form in :mod:`curvlab.closedform`;
it never uses triangle geometry, only kernel evaluations.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import CoincidentError
from .geometry import as_complex
from .kernels import KernelSpec, Part, kernel_values, select_part

# lexicographic order; the reduced form keeps 123, 213, 312
PERMUTATIONS = tuple(itertools.permutations(range(3)))
REDUCED_PERMUTATIONS = ((0, 1, 2), (1, 0, 2), (2, 0, 1))


class Mode(str, enum.Enum):
    FULL = "full"
    REDUCED = "reduced"


@dataclass(frozen=True)
class SymmValue:
    value: float
    imag_residual: float = 0.0

    def __float__(self):
        return self.value


def _sorted_rows(z: np.ndarray) -> np.ndarray:
    order = np.lexsort((z.imag, z.real), axis=-1)
    return np.take_along_axis(z, order, axis=-1)


def symmetrize_terms(spec: KernelSpec, z: np.ndarray, mode: Mode = Mode.FULL) -> np.ndarray:
    """Per-permutation summands, shape (N, 6) for the full form or (N, 3) reduced.

    Rows of ``z`` are sorted lexicographically first so the result does not
    depend on the input order of the points.
    """
    z = _sorted_rows(np.atleast_2d(np.asarray(z, dtype=complex)))
    mode = Mode(mode)
    perms = PERMUTATIONS if mode is Mode.FULL else REDUCED_PERMUTATIONS
    cols = []
    for a, b, c in perms:
        kab = select_part(kernel_values(spec, z[:, a], z[:, b]), spec.part)
        kac = select_part(kernel_values(spec, z[:, a], z[:, c]), spec.part)
        if spec.part is Part.FULL:
            t = kab * np.conj(kac)
            cols.append(t if mode is Mode.FULL else 2.0 * t.real)
        else:
            cols.append(kab * kac if mode is Mode.FULL else 2.0 * kab * kac)
    return np.stack(cols, axis=1)


def _check_distinct(z: np.ndarray) -> None:
    if np.any((z[:, 0] == z[:, 1]) | (z[:, 0] == z[:, 2]) | (z[:, 1] == z[:, 2])):
        raise CoincidentError("symmetrized form needs pairwise distinct points")


def symmetrize_batch(spec: KernelSpec, z, mode: Mode = Mode.FULL, compensated: bool = False):
    """S[K] for each row of an (N, 3) complex array.

    Returns ``(values, imag_residuals)`` as float arrays.
    """
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    _check_distinct(z)
    mode = Mode(mode)
    terms = symmetrize_terms(spec, z, mode)
    if compensated:
        re = np.array([math.fsum(row) for row in np.real(terms)])
        im = np.array([math.fsum(row) for row in np.imag(terms)])
    else:
        total = terms.sum(axis=1)
        re, im = np.real(total), np.imag(total)
    return re, np.abs(im)


def symmetrize(spec: KernelSpec, triple, mode: Mode = Mode.FULL, compensated: bool = False) -> SymmValue:
    """Brute-force S[K] of one triple.

    For ``part=full`` the complex 6-term sum is formed and its real part
    returned together with the size of the discarded imaginary part.  For
    ``re``/``im`` the real kernel A = Re K (or Im K) is symmetrized directly.
    ``mode='reduced'`` uses the equivalent 3-term forms.
    """
    z = np.array([[as_complex(p) for p in triple]])
    values, residuals = symmetrize_batch(spec, z, mode, compensated)
    return SymmValue(float(values[0]), float(residuals[0]))
