"""Pointwise evaluation of K0, K_h and the dual kernel K_h*."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, SingularityError
from .geometry import PointLike, as_complex
from .hfunc import Constant, HFunction


class Kind(str, enum.Enum):
    K0 = "k0"
    KH = "kh"
    KH_STAR = "kh-star"


class Part(str, enum.Enum):
    FULL = "full"
    RE = "re"
    IM = "im"


@dataclass(frozen=True)
class KernelSpec:
    kind: Kind
    h: HFunction | None = None
    part: Part = Part.FULL

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "part", Part(self.part))
        if self.kind is not Kind.K0 and self.h is None:
            raise InvalidInput(f"kernel {self.kind.value} needs an h function")

    def with_part(self, part) -> "KernelSpec":
        return KernelSpec(self.kind, self.h, Part(part))

    @property
    def phase(self) -> HFunction:
        return Constant(0.0) if self.kind is Kind.K0 else self.h


def _unimodular(hv):
    return np.cos(hv) + 1j * np.sin(hv)


def kernel_values(spec: KernelSpec, w, z) -> np.ndarray:
    """Full complex kernel K(w, z) on arrays; no diagonal check."""
    w = np.asarray(w, dtype=complex)
    z = np.asarray(z, dtype=complex)
    if spec.kind is Kind.K0:
        return 1.0 / (w - z)
    if spec.kind is Kind.KH:
        return _unimodular(spec.h(w)) / (w - z)
    # K_h*(w, z) = conj(K_h(z, w)) = e^{-i h(z)} / (conj z - conj w)
    return _unimodular(-spec.h(z)) / (np.conj(z) - np.conj(w))


def select_part(values, part: Part):
    if part is Part.RE:
        return np.real(values)
    if part is Part.IM:
        return np.imag(values)
    return values


def evaluate_kernel(spec: KernelSpec, w: PointLike, z: PointLike):
    """K(w, z) as a complex number, or its real/imaginary part as a float."""
    w, z = as_complex(w), as_complex(z)
    if w == z:
        raise SingularityError("kernel is singular on the diagonal w == z")
    val = complex(kernel_values(spec, w, z))
    if spec.part is Part.RE:
        return val.real
    if spec.part is Part.IM:
        return val.imag
    return val
