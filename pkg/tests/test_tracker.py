from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings, strategies as st

from wavefront.diagnostics import total_variation, transformed_tv
from wavefront.errors import BeyondReachedTime, EmptyData, EventBudgetExceeded, OffGrid
from wavefront.flux_core import EXACT_TOL, build_field, build_pl_flux, complete_field
from wavefront.piecewise import PiecewiseConstantFunction as PCF
from wavefront.riemann import CONTACT, INTERFACE, SHOCK
from wavefront.scenarios import RandomParams, random_scenario
from wavefront.tracker import COLLISION, INTERFACE_HIT, init_state, next_event, resolve_event, run

from conftest import pl


@pytest.fixture
def one_cell(g):
    return build_field([], [g], tol=EXACT_TOL)


def moving(state):
    return [f for f in state.fronts if f.kind != INTERFACE]


def test_init_single_shock(one_cell):
    st_ = init_state(one_cell, PCF((Fr(0),), (Fr(2), Fr(0))))
    fr = moving(st_)
    assert len(fr) == 1 and fr[0].speed == 2 and fr[0].kind == SHOCK


def test_init_constant(one_cell):
    assert init_state(one_cell, PCF.constant(Fr(1))).fronts == []


def test_init_interface_is_silent(two_cells):
    st_ = init_state(two_cells, PCF((Fr(0),), (Fr(2), Fr(0))))
    assert [(f.speed, f.kind) for f in st_.fronts] == [(2, SHOCK)]


def test_init_errors(one_cell):
    with pytest.raises(EmptyData):
        init_state(one_cell, None)
    with pytest.raises(OffGrid):
        init_state(one_cell, PCF((Fr(0),), (Fr(1, 3), Fr(0))))


def test_next_event_collision(one_cell):
    st_ = init_state(one_cell, PCF((Fr(0), Fr(1)), (Fr(2), Fr(0), Fr(-2))))
    ev = next_event(st_)
    assert ev.kind == COLLISION and (ev.time, ev.x) == (Fr(1, 4), Fr(1, 2))


def test_next_event_interface_hit(two_cells):
    ev = next_event(init_state(two_cells, PCF((Fr(0),), (Fr(2), Fr(0)))))
    assert ev.kind == INTERFACE_HIT and ev.time == Fr(1, 2) and ev.x == 1


def test_next_event_none(two_cells, one_cell):
    assert next_event(init_state(one_cell, PCF((Fr(0),), (Fr(2), Fr(0))))) is None
    # two parallel shocks of speed 1 never meet
    flux = pl([-2, -1, 0, 1, 2], [4, 2, 0, 2, 4])
    st_ = init_state(build_field([], [flux], tol=EXACT_TOL),
                     PCF((Fr(0), Fr(1)), (Fr(2), Fr(1), Fr(0))))
    assert len(st_.fronts) == 2 and next_event(st_) is None


def test_resolve_collision(one_cell):
    st_ = init_state(one_cell, PCF((Fr(0), Fr(1)), (Fr(2), Fr(0), Fr(-2))))
    resolve_event(st_, next_event(st_))
    fr = st_.fronts
    assert [(f.u_left, f.u_right, f.speed) for f in fr] == [(2, -2, 0)]


def test_resolve_interface_hit(two_cells):
    st_ = init_state(two_cells, PCF((Fr(0),), (Fr(2), Fr(0))))
    resolve_event(st_, next_event(st_))
    out = [(f.kind, f.u_left, f.u_right, f.speed) for f in st_.fronts]
    assert out == [(INTERFACE, 2, Fr(4, 3), 0), (SHOCK, Fr(4, 3), 0, 3)]


def test_triple_collision(one_cell):
    # speeds 3, 1, -1 from x = -3, -1, 1 all meet at the origin at t = 1
    st_ = init_state(one_cell, PCF((Fr(-3), Fr(-1), Fr(1)), (Fr(2), Fr(1), Fr(0), Fr(-1))))
    ev = next_event(st_)
    assert (ev.time, ev.x, len(ev.front_ids)) == (1, 0, 3)
    resolve_event(st_, ev)
    assert [(f.u_left, f.u_right, f.speed) for f in st_.fronts] == [(2, -1, 1)]


def test_run_two_shocks(one_cell):
    tr = run(init_state(one_cell, PCF((Fr(0), Fr(1)), (Fr(2), Fr(0), Fr(-2)))), Fr(1))
    assert len(tr.events) == 1 and len(tr.fronts_at(Fr(1))) == 1
    assert tr.termination == "reached t_max"


def test_run_constant(one_cell):
    tr = run(init_state(one_cell, PCF.constant(Fr(0))), 1)
    assert tr.events == []


def test_event_budget(one_cell):
    st_ = init_state(one_cell, PCF((Fr(0), Fr(1)), (Fr(2), Fr(0), Fr(-2))))
    with pytest.raises(EventBudgetExceeded):
        run(st_, Fr(1), event_budget=0)


def test_sample(one_cell):
    tr = run(init_state(one_cell, PCF((Fr(0), Fr(1)), (Fr(2), Fr(0), Fr(-2)))), Fr(1))
    assert tr.sample(0) == PCF((Fr(0), Fr(1)), (Fr(2), Fr(0), Fr(-2)))
    assert tr.sample(Fr(1, 5)) == PCF((Fr(2, 5), Fr(3, 5)), (Fr(2), Fr(0), Fr(-2)))
    assert tr.sample(Fr(1, 4)) == PCF((Fr(1, 2),), (Fr(2), Fr(-2)))
    with pytest.raises(BeyondReachedTime):
        tr.sample(2)


def test_fan_positions(one_cell):
    tr = run(init_state(one_cell, PCF((Fr(0),), (Fr(-2), Fr(2)))), Fr(1))
    u = tr.sample(Fr(1, 2))
    assert u.jumps == (Fr(-3, 2), Fr(-1, 2), Fr(1, 2), Fr(3, 2))


def test_contact_opens_at_interface(g):
    """A rarefaction lowering the interface flux opens a new wave on an affine left piece."""
    aff = pl([-2, -1, 0, 1, 2], [4, 2, 0, 2, 4])
    data = PCF((Fr(0), Fr(1)), (Fr(-1), Fr(-4, 3), Fr(-1)))
    fld = complete_field(build_field([Fr(0)], [aff, g], tol=EXACT_TOL), data.values)
    tr = run(init_state(fld, data), Fr(1))
    hit = [e for e in tr.events if e.kind == INTERFACE_HIT]
    assert hit and hit[0].t == Fr(1, 3)
    born = [f for f in tr.fronts if f.t0 == Fr(1, 3)]
    assert [(f.u_left, f.u_right, f.speed, f.kind) for f in born] == [
        (-1, Fr(-1, 2), -2, "rarefaction_fan_member"), (Fr(-1, 2), -1, 0, INTERFACE)]
    assert tr.contacts_have_pedigree()


def test_determinism():
    fld, data = random_scenario(7, 3, 12)
    a = run(init_state(fld, data), 2)
    b = run(init_state(fld, data), 2)
    assert [e.to_json() for e in a.events] == [e.to_json() for e in b.events]
    assert [f.to_json() for f in a.fronts] == [f.to_json() for f in b.fronts]


# -- invariants on random scenarios --------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(0, 5), st.integers(1, 20))
def test_random_invariants(seed, ni, nj):
    fld, data = random_scenario(seed, ni, nj)
    tr = run(init_state(fld, data), 2)       # strict: raises on TV or front-bound violations
    assert not tr.violations
    tvs = [tr.tv0] + [e.tv_after for e in tr.events]
    assert all(b <= a + 1e-9 for a, b in zip(tvs, tvs[1:]))
    assert tr.max_moving <= max(tr.front_bound, tr.initial_moving)
    assert tr.contacts_have_pedigree()
    for f in tr.fronts:
        for u in (f.u_left, f.u_right):
            assert abs(u) <= tr.M_state + 1e-12
            assert fld.on_grid(u)
    for t in tr.epoch_midpoints():
        u = tr.sample(t)
        assert transformed_tv(fld, u) <= tr.tv0 + 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(0, 4), st.integers(2, 12))
def test_conservation(seed, ni, nj):
    fld, data = random_scenario(seed, ni, nj, RandomParams(compact=True))
    tr = run(init_state(fld, data), 2)
    S = float(tr.speed_bound)
    xs = [float(x) for x in data.jumps + fld.interfaces] or [0.0]
    a, b = min(xs) - 2 * S - 1, max(xs) + 2 * S + 1
    m0 = float(data.integral(a, b))
    for t in (0.5, 1, 2):
        assert float(tr.sample(t).integral(a, b)) == pytest.approx(m0, abs=1e-10 * t + 1e-12)


def test_exact_run_from_int_tables_stays_rational():
    g = build_pl_flux([-2, -1, 0, 1, 2], [4, 1, 0, 1, 4], EXACT_TOL)
    f = build_pl_flux([-2, -1, 0, 1, 2], [8, 2, 0, 2, 8], EXACT_TOL)
    data = PCF((Fr(0),), (Fr(2), Fr(0)))
    field = complete_field(build_field([1], [g, f], EXACT_TOL), data.values)
    assert all(isinstance(p, Fr) for p in field.grid_points())
    u = run(init_state(field, data), 2).sample(2)
    assert u.jumps == (Fr(1), Fr(11, 2))
    assert u.values == (Fr(2), Fr(4, 3), Fr(0))
    assert all(isinstance(x, Fr) for x in u.jumps + u.values)
