import math

import numpy as np
import pytest
from hypothesis import strategies as st

from curvlab.experiments import Box, random_triples
from curvlab.hfunc import load_registry

coord = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)


def _min_angle(z):
    from curvlab.geometry import angle_at
    a, b, c = z
    return min(angle_at(a, b, c), angle_at(b, a, c), angle_at(c, a, b))


@st.composite
def good_triples(draw, floor=1e-2):
    """Three points in [-10, 10]^2 with min angle >= floor and sides >= 1e-3."""
    pts = [complex(draw(coord), draw(coord)) for _ in range(3)]
    a, b, c = pts
    from hypothesis import assume
    assume(min(abs(a - b), abs(b - c), abs(a - c)) > 1e-3)
    assume(_min_angle(pts) >= floor)
    return tuple(pts)


@pytest.fixture(scope="session")
def registry():
    return load_registry()


@pytest.fixture
def triples():
    return random_triples(np.random.default_rng(12345), Box(-10, 10, -10, 10), 500, 1e-2)


def rel_close(a, b, rtol, floor=1.0):
    return abs(a - b) <= rtol * max(floor, abs(a), abs(b))


EQUILATERAL = tuple(complex(math.cos(t), math.sin(t)) for t in (0.3, 0.3 + 2 * math.pi / 3, 0.3 + 4 * math.pi / 3))
