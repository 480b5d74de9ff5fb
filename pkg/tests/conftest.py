import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from homodyne.modes import AffineMode, SidebandSector

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

OMEGA = 1.0


@pytest.fixture
def sector():
    return SidebandSector.standard(OMEGA)


def small_complex(bound: float = 2.0):
    f = st.floats(-bound, bound, allow_nan=False, allow_infinity=False)
    return st.builds(complex, f, f)


@st.composite
def affine_modes(draw, sector: SidebandSector | None = None):
    """Random affine mode over the standard sector's modes."""
    sec = sector or SidebandSector.standard(OMEGA)
    modes = sorted(sec)
    coeff = small_complex()
    u = {m: draw(coeff) for m in draw(st.lists(st.sampled_from(modes), max_size=4, unique=True))}
    v = {m: draw(coeff) for m in draw(st.lists(st.sampled_from(modes), max_size=4, unique=True))}
    return AffineMode(u, v, draw(coeff), sec.omega)


etas = st.floats(0.05, 0.95)
angles = st.floats(-math.pi, math.pi)


def rng(seed: int = 0) -> np.random.Generator:
    return np.random.default_rng(seed)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
