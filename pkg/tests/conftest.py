from fractions import Fraction
from fractions import Fraction as Fr

import pytest
from hypothesis import strategies as st

from wavefront.flux_core import EXACT_TOL, build_field, build_pl_flux


def pl(breaks, values, tol=EXACT_TOL):
    return build_pl_flux([Fraction(b) for b in breaks], [Fraction(v) for v in values], tol)


@pytest.fixture
def g():
    return pl([-2, -1, 0, 1, 2], [4, 1, 0, 1, 4])


@pytest.fixture
def f2g():
    return pl([-2, -1, 0, 1, 2], [8, 2, 0, 2, 8])


@pytest.fixture
def h():
    return pl([-2, -1, 1, 2], [1, 0, 0, 1])


@pytest.fixture
def two_cells(g, f2g):
    """Flux g left of x=1, 2g right of it."""
    return build_field([Fraction(1)], [g, f2g], tol=EXACT_TOL)


@st.composite
def convex_flux(draw):
    """Random exact PL convex flux with zero minimum, possibly with a plateau."""
    nl = draw(st.integers(1, 4))
    nr = draw(st.integers(1, 4))
    lo = Fr(draw(st.integers(-4, 0)), 4)
    hi = lo + Fr(draw(st.integers(0, 4)), 4)
    breaks, values = [lo], [Fr(0)]
    s = Fr(0)
    for _ in range(nl):
        s -= Fr(draw(st.integers(1, 8)), 4)
        dx = Fr(draw(st.integers(1, 4)), 4)
        breaks.insert(0, breaks[0] - dx)
        values.insert(0, values[0] - s * dx)
    if hi != lo:
        breaks.append(hi)
        values.append(Fr(0))
    s = Fr(0)
    for _ in range(nr):
        s += Fr(draw(st.integers(1, 8)), 4)
        dx = Fr(draw(st.integers(1, 4)), 4)
        breaks.append(breaks[-1] + dx)
        values.append(values[-1] + s * dx)
    return build_pl_flux(breaks, values, EXACT_TOL)


# -- acceptance reporting ------------------------------------------------


def pytest_configure(config):
    config.acceptance_lines = []


@pytest.fixture
def record(request):
    """record(n, title, ok, detail) logs one pass/fail line per acceptance criterion."""
    def _record(n, title, ok, detail=""):
        line = f"criterion {n:>2} {'PASS' if ok else 'FAIL'}  {title}  {detail}".rstrip()
        request.config.acceptance_lines.append(line)
        print(line)
        return ok
    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
