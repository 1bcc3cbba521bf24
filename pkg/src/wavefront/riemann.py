"""Exact Riemann solvers for piecewise-linear convex fluxes.

``classical_riemann`` handles one flux.  ``interface_riemann`` handles a
jump from flux ``g`` (x < 0) to flux ``f`` (x > 0).  Both return a
:class:`WaveFan` whose fronts all start at the same point.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import AboveRange, InvariantViolation, LevelMismatch, OffGrid, OutOfDomain
from .flux_core import MINUS, PLUS, PLConvexFlux

SHOCK = "shock"
FAN = "rarefaction_fan_member"
CONTACT = "contact"
INTERFACE = "interface_jump"
MOVING_KINDS = (SHOCK, FAN, CONTACT)


@dataclass(frozen=True)
class Front:
    x: object
    speed: object
    u_left: object
    u_right: object
    kind: str

    def to_json(self) -> dict:
        return {"x": float(self.x), "speed": float(self.speed),
                "u_left": float(self.u_left), "u_right": float(self.u_right),
                "kind": self.kind}


@dataclass(frozen=True)
class WaveFan:
    fronts: tuple
    u_left: object
    u_right: object
    case: str = ""

    def __iter__(self):
        return iter(self.fronts)

    def __len__(self):
        return len(self.fronts)

    def __getitem__(self, i):
        return self.fronts[i]

    @property
    def speeds(self) -> list:
        return [fr.speed for fr in self.fronts]

    def to_json(self) -> dict:
        return {"case": self.case, "u_left": float(self.u_left),
                "u_right": float(self.u_right),
                "fronts": [fr.to_json() for fr in self.fronts]}


def _check_state(flux: PLConvexFlux, u, grid):
    if not flux.in_domain(u):
        raise OutOfDomain(f"state {u} outside flux domain {flux.domain}")
    if grid is not None and not grid(u):
        raise OffGrid(f"state {u} is not on the break-point grid; complete the grid first")


def classical_fronts(flux: PLConvexFlux, ul, ur, x=0) -> list:
    """Fronts of the single-flux Riemann problem, no validation."""
    if abs(ul - ur) <= flux.tol.eps_u:
        return []
    if ul > ur:
        s = (flux.eval(ul) - flux.eval(ur)) / (ul - ur)
        return [Front(x, s, ul, ur, SHOCK)]
    pts = [ul] + flux.kinks_between(ul, ur) + [ur]
    out = []
    for a, c in zip(pts[:-1], pts[1:]):
        s = (flux.eval(c) - flux.eval(a)) / (c - a)
        kind = CONTACT if flux.nodes_between(a, c) else FAN
        out.append(Front(x, s, a, c, kind))
    return out


def classical_riemann(flux: PLConvexFlux, u_l, u_r, x=0, grid=None) -> WaveFan:
    """Single shock if u_l > u_r, otherwise one front per affine piece.

    ``grid`` is an optional membership test; off-grid states raise OffGrid.
    """
    _check_state(flux, u_l, grid)
    _check_state(flux, u_r, grid)
    return WaveFan(tuple(classical_fronts(flux, u_l, u_r, x)), u_l, u_r, "classical")


def riemann_case(g: PLConvexFlux, f: PLConvexFlux, u_l, u_r) -> str:
    """Case label of the four-case interface solution."""
    gm, gp = g.flat_region()
    fm, fp = f.flat_region()
    if u_l <= gp and u_r >= fm:
        return "1"
    if u_l >= gm and u_r <= fp:
        return "4(a)" if g.eval(u_l) >= f.eval(u_r) else "4(b)"
    if u_l < gm:
        um = g.branch_inverse(f.eval(u_r), MINUS)
        return "2(a)" if u_l < um else "2(b)" if u_l > um else "2"
    up = f.branch_inverse(g.eval(u_l), PLUS)
    return "3(a)" if u_r > up else "3(b)" if u_r < up else "3"


def interface_traces(g: PLConvexFlux, f: PLConvexFlux, u_l, u_r) -> tuple:
    """(left trace, right trace) of the interface solution.

    The flux through the interface is the larger of the increasing part of
    g at u_l and the decreasing part of f at u_r; the traces are the states
    carrying that flux on the admissible branches.
    """
    gm, gp = g.flat_region()
    fm, fp = f.flat_region()
    A = g.eval(u_l) if u_l > gp else 0
    B = f.eval(u_r) if u_r < fm else 0
    try:
        if A == 0 and B == 0:
            return max(u_l, gm), min(u_r, fp)
        if A > B:
            return u_l, f.branch_inverse(A, PLUS)
        if B > A:
            return g.branch_inverse(B, MINUS), u_r
    except AboveRange as exc:
        raise LevelMismatch(f"no branch inverse for interface flux: {exc}") from None
    return u_l, u_r


def interface_riemann(g: PLConvexFlux, f: PLConvexFlux, u_l, u_r, x=0, grid=None) -> WaveFan:
    """Riemann problem with flux g on the left and f on the right of x."""
    _check_state(g, u_l, grid)
    _check_state(f, u_r, grid)
    lt, rt = interface_traces(g, f, u_l, u_r)
    try:
        case = riemann_case(g, f, u_l, u_r)
    except AboveRange:
        case = "?"
    left = classical_fronts(g, u_l, lt, x)
    right = classical_fronts(f, rt, u_r, x)
    # waves that do not move away from the interface become part of the standing jump
    while left and left[-1].speed == 0:
        lt = left.pop().u_left
    while right and right[0].speed == 0:
        rt = right.pop(0).u_right
    if any(fr.speed > 0 for fr in left) or any(fr.speed < 0 for fr in right):
        raise InvariantViolation(f"interface waves move the wrong way (case {case})")
    mid = []
    if abs(lt - rt) > max(g.tol.eps_u, f.tol.eps_u):
        mid = [Front(x, 0 * x, lt, rt, INTERFACE)]
    return WaveFan(tuple(left + mid + right), u_l, u_r, case)


def interface_flux(g: PLConvexFlux, f: PLConvexFlux, u_l, u_r):
    """Flux carried through the interface by the Riemann solution."""
    gp = g.flat_region()[1]
    fm = f.flat_region()[0]
    return max(g.eval(max(u_l, gp)), f.eval(min(u_r, fm)))
