"""Event-driven front tracking.

Fronts move on straight lines.  Candidate events (adjacent fronts meeting,
a front reaching an interface) sit in a heap with lazy invalidation.  Every
event is resolved by a Riemann problem between the outermost states of the
fronts that meet, so the profile stays an exact weak solution.
"""

from __future__ import annotations

import bisect
import heapq
import itertools
import logging
from dataclasses import dataclass, field as dc_field

from .diagnostics import sm_chain_tv, transformed_tv
from .errors import (
    BeyondReachedTime,
    DegenerateGrid,
    EmptyData,
    EventBudgetExceeded,
    InconsistentEvent,
    InvariantViolation,
    OffGrid,
)
from .flux_core import MINUS, PLUS, SpatialFluxField, count_pl, min_variation
from .piecewise import PiecewiseConstantFunction
from .riemann import CONTACT, INTERFACE, classical_fronts, interface_riemann

log = logging.getLogger("wavefront.tracker")

COLLISION = "collision"
INTERFACE_HIT = "interface_hit"
TV_TOL = 1e-9


@dataclass(eq=False, slots=True)
class TrackedFront:
    id: int
    x0: object
    t0: object
    speed: object
    u_left: object
    u_right: object
    kind: str
    cell: int  # cell index, or interface index for standing jumps
    parents: tuple = ()
    death: object = None
    prev: "TrackedFront | None" = None
    next: "TrackedFront | None" = None

    def x_at(self, t):
        if self.speed == 0:
            return self.x0
        return self.x0 + self.speed * (t - self.t0)

    @property
    def standing(self) -> bool:
        return self.kind == INTERFACE

    @property
    def alive(self) -> bool:
        return self.death is None

    def to_json(self) -> dict:
        return {"id": self.id, "x0": float(self.x0), "t0": float(self.t0),
                "speed": float(self.speed), "u_left": float(self.u_left),
                "u_right": float(self.u_right), "kind": self.kind, "cell": self.cell,
                "parents": list(self.parents),
                "death": None if self.death is None else float(self.death)}


@dataclass(frozen=True)
class Event:
    time: object
    x: object
    kind: str
    front_ids: tuple
    interface: int | None = None


@dataclass
class EventRecord:
    t: object
    x: object
    kind: str
    fronts_in: tuple
    fronts_out: tuple
    tv_before: object
    tv_after: object
    moving_before: int
    moving_after: int
    interface: int | None = None
    traces: tuple | None = None
    category: str = ""

    def to_json(self) -> dict:
        return {"t": float(self.t), "x": float(self.x), "kind": self.kind,
                "fronts_in": list(self.fronts_in), "fronts_out": list(self.fronts_out),
                "tv_psi_pi_before": float(self.tv_before),
                "tv_psi_pi_after": float(self.tv_after)}


@dataclass
class SimulationState:
    field: SpatialFluxField
    data: PiecewiseConstantFunction
    t: object
    u_far_left: object
    alpha_max: object
    M_state: object
    speed_bound: object
    n_pl: int
    xi: object
    strict: bool = True
    all_fronts: list = dc_field(default_factory=list)
    head: TrackedFront | None = None
    heap: list = dc_field(default_factory=list)
    log: list = dc_field(default_factory=list)
    init_records: list = dc_field(default_factory=list)
    violations: list = dc_field(default_factory=list)
    tv0: object = 0
    tv: object = 0
    moving: int = 0
    initial_moving: int = 0
    max_moving: int = 0
    _seq: itertools.count = dc_field(default_factory=itertools.count)

    @property
    def tol(self):
        return self.field.tol

    @property
    def fronts(self) -> list:
        out, f = [], self.head
        while f is not None:
            out.append(f)
            f = f.next
        return out

    @property
    def front_bound(self) -> int:
        return self.initial_moving * max(self.n_pl, 1)

    def violate(self, msg: str):
        self.violations.append((self.t, msg))
        if self.strict:
            raise InvariantViolation(msg)
        log.warning("invariant violation at t=%s: %s", self.t, msg)


# -- construction --------------------------------------------------------


def level_window(field_: SpatialFluxField, data: PiecewiseConstantFunction):
    amax = 0
    for f in field_.fluxes:
        for v in data.values:
            if f.in_domain(v):
                amax = max(amax, f.eval(v))
    M = 0
    for f in field_.fluxes:
        for br in (MINUS, PLUS):
            if amax <= f.branch_max(br):
                k = f.branch_inverse(amax, br)
            else:
                k = f.domain[0] if br == MINUS else f.domain[1]
            M = max(M, abs(k))
    speed = 0
    for f in field_.fluxes:
        speed = max(speed, f.max_abs_slope(-M, M))
    return amax, M, speed


def _new_front(state: SimulationState, fr, t, cell, parents) -> TrackedFront:
    tf = TrackedFront(len(state.all_fronts), fr.x, t, fr.speed, fr.u_left, fr.u_right,
                      fr.kind, cell, parents)
    state.all_fronts.append(tf)
    return tf


def _fan_cells(fan, k) -> list:
    """Cell index for each front of an interface fan at interface k."""
    out, side = [], k
    for fr in fan:
        if fr.kind == INTERFACE:
            out.append(k)
            side = k + 1
        elif fr.speed < 0:
            out.append(k)
        else:
            out.append(k + 1)
            side = k + 1
    return out


def _chain(fronts, cells, u_left, k_left, interface: int | None) -> list:
    """(state, cell) chain across a local group of fronts, for TV bookkeeping."""
    items = [(u_left, k_left)]
    if interface is None:
        for fr in fronts:
            items.append((fr.u_right, k_left))
        return items
    side = interface
    for fr, c in zip(fronts, cells):
        if fr.kind == INTERFACE:
            side = interface + 1
            items.append((fr.u_right, side))
        elif side == interface and c == interface + 1:
            side = interface + 1
            items.append((fr.u_left, side))
            items.append((fr.u_right, side))
        else:
            items.append((fr.u_right, c))
    if side == interface:
        items.append((items[-1][0], interface + 1))
    return items


def _traces(fronts, u_left, u_right) -> tuple:
    """States just left and right of an interface after an interface solve."""
    lt = rt = None
    for fr in fronts:
        if fr.kind == INTERFACE:
            return fr.u_left, fr.u_right
    left = [fr for fr in fronts if fr.speed < 0]
    right = [fr for fr in fronts if fr.speed >= 0]
    if left:
        lt = left[-1].u_right
    if right:
        rt = right[0].u_left
    if lt is None and rt is None:
        return u_left, u_right
    return (rt if lt is None else lt), (lt if rt is None else rt)


def init_state(field_: SpatialFluxField, data: PiecewiseConstantFunction,
               strict: bool = True, check_grid: bool = True) -> SimulationState:
    """Riemann problems at every data jump and every interface at t = 0."""
    if data is None or not data.values:
        raise EmptyData("initial data is empty")
    tol = field_.tol
    data = PiecewiseConstantFunction(tuple(data.jumps), tuple(data.values))
    # snap data jumps that sit on interfaces
    jumps = []
    for x in data.jumps:
        k = field_.interface_near(x)
        jumps.append(field_.interfaces[k] if k is not None else x)
    data = PiecewiseConstantFunction.from_pieces(jumps, data.values) if jumps else data
    for i, v in enumerate(data.values):
        if check_grid and not field_.on_grid(v):
            raise OffGrid(f"data value {v} is not on the shared grid; run the completion first")
        lo = data.jumps[i - 1] if i > 0 else None
        hi = data.jumps[i] if i < len(data.jumps) else None
        last = (bisect.bisect_left(field_.interfaces, hi) if hi is not None
                else field_.n_cells - 1)
        for c in range(field_.cell_index(lo) if lo is not None else 0, last + 1):
            if c < field_.n_cells and not field_.fluxes[c].in_domain(v):
                raise OffGrid(f"data value {v} outside the flux domain of cell {c}")
    amax, M, speed = level_window(field_, data)
    n_pl, _ = count_pl(field_)
    try:
        xi = min_variation(field_)
    except DegenerateGrid:
        xi = None
    state = SimulationState(field_, data, 0 * tol.eps_t, data.values[0], amax, M, speed,
                            n_pl, xi, strict)
    state.tv0 = transformed_tv(field_, data)
    state.tv = state.tv0
    locs = sorted(set(data.jumps) | set(field_.interfaces))
    prev = None
    for p in locs:
        ul, ur = data.left_limit(p), data(p)
        k = field_.interface_near(p)
        if k is not None:
            fan = interface_riemann(field_.fluxes[k], field_.fluxes[k + 1], ul, ur, x=p)
            cells = _fan_cells(fan, k)
            before = [(ul, k), (ur, k + 1)]
            after = _chain(fan.fronts, cells, ul, k, k)
        else:
            c = field_.cell_index(p)
            fan = classical_fronts(field_.fluxes[c], ul, ur, p)
            cells = [c] * len(fan)
            before = [(ul, c), (ur, c)]
            after = _chain(fan, cells, ul, c, None)
        d = sm_chain_tv(field_, after) - sm_chain_tv(field_, before)
        new = [_new_front(state, fr, state.t, c, ()) for fr, c in zip(fan, cells)]
        state.tv += d
        rec = EventRecord(state.t, p, "initial", (), tuple(f.id for f in new), 0, d, 0,
                          sum(not f.standing for f in new), k,
                          _traces(list(fan), ul, ur) if k is not None else None)
        state.init_records.append(rec)
        for f in new:
            f.prev = prev
            if prev is None:
                state.head = f
            else:
                prev.next = f
            prev = f
    state.moving = sum(not f.standing for f in state.all_fronts)
    state.initial_moving = state.moving
    state.max_moving = state.moving
    if abs(state.tv - state.tv0) > TV_TOL:
        state.violate(f"TV(Psi)+TV(pi) changed at t=0+: {state.tv0} -> {state.tv}")
    for f in state.all_fronts:
        _check_linf(state, f)
        _schedule_hit(state, f)
    for f in state.all_fronts:
        if f.next is not None:
            _schedule_pair(state, f, f.next)
    return state


# -- scheduling ----------------------------------------------------------


def _push(state, t, kind, a, b=None, k=None):
    heapq.heappush(state.heap, (t, next(state._seq), kind, a, b, k))


def _schedule_hit(state: SimulationState, f: TrackedFront):
    if f.standing or f.speed == 0:
        return
    z = state.field.interfaces
    k = f.cell if f.speed > 0 else f.cell - 1
    if k < 0 or k >= len(z):
        return
    t = f.t0 + (z[k] - f.x0) / f.speed
    _push(state, max(t, state.t), INTERFACE_HIT, f, None, k)


def _schedule_pair(state: SimulationState, a: TrackedFront, b: TrackedFront):
    if a.standing or b.standing or a.cell != b.cell or not a.speed > b.speed:
        return
    t = (b.x0 - a.x0 + a.speed * a.t0 - b.speed * b.t0) / (a.speed - b.speed)
    _push(state, max(t, state.t), COLLISION, a, b)


def _valid(entry) -> bool:
    _, _, kind, a, b, _ = entry
    if kind == INTERFACE_HIT:
        return a.death is None
    return a.death is None and b.death is None and a.next is b


def _location(state, entry):
    t, _, kind, a, b, k = entry
    if kind == INTERFACE_HIT:
        return state.field.interfaces[k]
    return a.x_at(t)


def next_event(state: SimulationState) -> Event | None:
    """Earliest event; co-located simultaneous arrivals form one event."""
    heap = state.heap
    while heap and not _valid(heap[0]):
        heapq.heappop(heap)
    if not heap:
        return None
    tol = state.tol
    t0 = heap[0][0]
    t_win = t0 + tol.eps_t * max(1, abs(t0))
    batch = []
    while heap and heap[0][0] <= t_win:
        e = heapq.heappop(heap)
        if _valid(e):
            batch.append(e)
    batch.sort(key=lambda e: _location(state, e))
    first_x = _location(state, batch[0])
    xtol = tol.eps_x * max(1, abs(first_x))
    group = [e for e in batch if abs(_location(state, e) - first_x) <= xtol]
    for e in batch:
        if e not in group:
            heapq.heappush(heap, e)
    t = max(e[0] for e in group)
    k = state.field.interface_near(first_x)
    x = state.field.interfaces[k] if k is not None else first_x
    # the span covers every front named by a grouped entry, plus neighbours within xtol
    members = {e[3].id for e in group} | {e[4].id for e in group if e[4] is not None}
    f = group[0][3]
    while f.prev is not None and f.prev.id in members:
        f = f.prev
    lo = f
    f = group[0][3]
    while f.next is not None and f.next.id in members:
        f = f.next
    hi = f
    while lo.prev is not None and abs(lo.prev.x_at(t) - x) <= xtol:
        lo = lo.prev
    while hi.next is not None and abs(hi.next.x_at(t) - x) <= xtol:
        hi = hi.next
    ids, f = [], lo
    while True:
        ids.append(f.id)
        if f is hi:
            break
        f = f.next
    # keep the group entries available to a caller that discards this event
    for e in group:
        heapq.heappush(heap, e)
    return Event(t, x, INTERFACE_HIT if k is not None else COLLISION, tuple(ids), k)


# -- resolution ----------------------------------------------------------


def _check_linf(state: SimulationState, f: TrackedFront):
    M = state.M_state
    eps = state.tol.eps_u * max(1, abs(M))
    if abs(f.u_left) > M + eps or abs(f.u_right) > M + eps:
        state.violate(f"state outside the L-infinity bound {M}: ({f.u_left}, {f.u_right})")


def resolve_event(state: SimulationState, event: Event) -> SimulationState:
    """Replace the fronts of ``event`` by the Riemann solution of its outer states."""
    fld = state.field
    eps_u = state.tol.eps_u
    parts = [state.all_fronts[i] for i in event.front_ids]
    for a, b in zip(parts[:-1], parts[1:]):
        if a.next is not b:
            raise InconsistentEvent("event fronts are not adjacent")
        if abs(a.u_right - b.u_left) > eps_u * max(1, abs(a.u_right)):
            raise InconsistentEvent(f"adjacent fronts disagree: {a.u_right} vs {b.u_left}")
    if any(p.death is not None for p in parts):
        raise InconsistentEvent("event refers to a dead front")
    if event.time < state.t - state.tol.eps_t * max(1, abs(state.t)):
        raise InconsistentEvent(f"event time {event.time} precedes state time {state.t}")
    t = max(event.time, state.t)
    x = event.x
    uL, uR = parts[0].u_left, parts[-1].u_right
    k = event.interface
    if k is not None:
        fan = list(interface_riemann(fld.fluxes[k], fld.fluxes[k + 1], uL, uR, x=x))
        cells = _fan_cells(fan, k)
        in_cells = [p.cell for p in parts]
        before = _chain(parts, in_cells, uL, k, k)
        after = _chain(fan, cells, uL, k, k)
        traces = _traces(fan, uL, uR)
    else:
        c = parts[0].cell
        if any(p.standing or p.cell != c for p in parts):
            raise InconsistentEvent("collision away from interfaces spans several cells")
        fan = classical_fronts(fld.fluxes[c], uL, uR, x)
        cells = [c] * len(fan)
        before = _chain(parts, cells, uL, c, None)
        after = _chain(fan, cells, uL, c, None)
        traces = None
    tv_b, tv_a = sm_chain_tv(fld, before), sm_chain_tv(fld, after)
    ids_in = tuple(p.id for p in parts)
    new = [_new_front(state, fr, t, cc, ids_in) for fr, cc in zip(fan, cells)]
    # splice into the list
    left, right = parts[0].prev, parts[-1].next
    for p in parts:
        p.death = t
        p.prev = p.next = None
    chain = [left] + new + [right]
    for a, b in zip(chain[:-1], chain[1:]):
        if a is not None:
            a.next = b
        if b is not None:
            b.prev = a
    if left is None:
        state.head = new[0] if new else right
    moving_before = state.moving
    state.moving += sum(not f.standing for f in new) - sum(not p.standing for p in parts)
    state.max_moving = max(state.max_moving, state.moving)
    tv_before = state.tv
    state.tv = state.tv + (tv_a - tv_b)
    state.t = t
    rec = EventRecord(t, x, event.kind, ids_in, tuple(f.id for f in new), tv_before, state.tv,
                      moving_before, state.moving, k, traces)
    _classify(state, rec, tv_b - tv_a)
    state.log.append(rec)
    for f in new:
        _check_linf(state, f)
        _schedule_hit(state, f)
    if new:
        if left is not None:
            _schedule_pair(state, left, new[0])
        if right is not None:
            _schedule_pair(state, new[-1], right)
    elif left is not None and right is not None:
        _schedule_pair(state, left, right)
    return state


def _classify(state: SimulationState, rec: EventRecord, drop):
    if drop < -TV_TOL:
        state.violate(f"TV(Psi)+TV(pi) increased by {-drop} at t={rec.t}, x={rec.x}")
    growth = rec.moving_after - rec.moving_before
    if rec.kind == INTERFACE_HIT:
        if state.xi is not None and drop >= state.xi - TV_TOL:
            rec.category = "decay"
        elif growth > 0:
            rec.category = "split"
        else:
            rec.category = "transmission"
        if growth > max(state.n_pl, 1) and not (state.xi is not None and drop >= state.xi - TV_TOL):
            state.violate(f"interface event gained {growth} fronts, more than #PL={state.n_pl}")
    else:
        rec.category = "merge" if drop > TV_TOL else "collision"
    if state.initial_moving and state.moving > state.front_bound:
        state.violate(f"{state.moving} fronts exceed the bound {state.front_bound}")


# -- driver and trajectory -----------------------------------------------


@dataclass
class Trajectory:
    field: SpatialFluxField
    data: PiecewiseConstantFunction
    fronts: list
    events: list
    init_records: list
    u_far_left: object
    reached_time: object
    termination: str
    M_state: object
    speed_bound: object
    alpha_max: object
    n_pl: int
    xi: object
    tv0: object
    initial_moving: int
    max_moving: int
    violations: list

    @property
    def front_bound(self) -> int:
        return self.initial_moving * max(self.n_pl, 1)

    def fronts_at(self, t) -> list:
        if t > self.reached_time + 1e-12 * max(1, abs(self.reached_time)):
            raise BeyondReachedTime(f"t={t} beyond reached time {self.reached_time}")
        alive = [f for f in self.fronts if f.t0 <= t and (f.death is None or f.death > t)]
        alive.sort(key=lambda f: (f.x_at(t), f.speed))
        return alive

    def sample(self, t) -> PiecewiseConstantFunction:
        alive = self.fronts_at(t)
        if not alive:
            return PiecewiseConstantFunction((), (self.u_far_left,))
        xs = [f.x_at(t) for f in alive]
        vals = [alive[0].u_left] + [f.u_right for f in alive]
        return PiecewiseConstantFunction.from_pieces(xs, vals)

    def event_times(self) -> list:
        return sorted({e.t for e in self.events})

    def epoch_midpoints(self) -> list:
        ts = [0] + self.event_times() + [self.reached_time]
        return [(a + b) / 2 for a, b in zip(ts[:-1], ts[1:]) if b > a]

    def default_sample_times(self) -> list:
        T = self.reached_time
        return [T * i / 8 for i in range(9)]

    def moving_count_at(self, t) -> int:
        return sum(not f.standing for f in self.fronts_at(t))

    def contacts_have_pedigree(self) -> bool:
        """Every contact descends from t=0, from an interface event, or from a contact."""
        by_id = {f.id: f for f in self.fronts}
        iface_out = {i for e in self.events if e.kind == INTERFACE_HIT for i in e.fronts_out}
        for f in self.fronts:
            if f.kind != CONTACT or not f.parents or f.id in iface_out:
                continue
            if not any(by_id[p].kind == CONTACT for p in f.parents):
                return False
        return True


def run(state: SimulationState, t_max, event_budget: int = 10 ** 7,
        raise_on_budget: bool = True) -> Trajectory:
    """Advance until t_max; events after t_max are left unprocessed."""
    termination = "reached t_max"
    n = 0
    while True:
        ev = next_event(state)
        if ev is None or ev.time > t_max:
            break
        if n >= event_budget:
            termination = "event budget"
            if raise_on_budget:
                raise EventBudgetExceeded(f"more than {event_budget} events before t={t_max}")
            break
        resolve_event(state, ev)
        n += 1
    reached = t_max if termination == "reached t_max" else state.t
    log.info("run finished: %d events, %d fronts alive, t=%s", n, state.moving, reached)
    return Trajectory(state.field, state.data, state.all_fronts, state.log, state.init_records,
                      state.u_far_left, reached, termination, state.M_state, state.speed_bound,
                      state.alpha_max, state.n_pl, state.xi, state.tv0, state.initial_moving,
                      state.max_moving, state.violations)


def sample(trajectory: Trajectory, t) -> PiecewiseConstantFunction:
    return trajectory.sample(t)


def solve(field_: SpatialFluxField, data: PiecewiseConstantFunction, t_max, **kw) -> Trajectory:
    """init_state followed by run."""
    strict = kw.pop("strict", True)
    return run(init_state(field_, data, strict=strict), t_max, **kw)
