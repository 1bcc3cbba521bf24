"""Entropy verification, total-variation functionals and stability checks."""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field as dc_field
from typing import TYPE_CHECKING, Sequence

from .errors import ConeEmpty, NotUniformlyConvex, OffGrid, PlateauPresent
from .flux_core import PLConvexFlux, SpatialFluxField
from .piecewise import PiecewiseConstantFunction
from .riemann import INTERFACE

if TYPE_CHECKING:
    from .tracker import Trajectory

__all__ = [
    "PiecewiseConstantFunction", "EntropyReport", "Verdict", "total_variation",
    "transformed_tv", "cell_pieces", "interface_entropy", "check_front",
    "check_interface_trace", "entropy_report_fronts", "adapted_entropy_report",
    "lambda_functional", "convexity_constants", "bv_bound", "l1_distance",
    "contraction_check", "sm_profile", "time_lipschitz_check", "mass",
]


def total_variation(f: PiecewiseConstantFunction):
    v = f.values
    return sum(abs(v[i + 1] - v[i]) for i in range(len(v) - 1))


def cell_pieces(field_: SpatialFluxField, u: PiecewiseConstantFunction) -> list:
    """(u value, cell index) along the line, split at jumps and interfaces."""
    cuts = sorted(set(u.jumps) | set(field_.interfaces))
    if not cuts:
        return [(u.values[0], 0)]
    out = []
    probes = [cuts[0] - 1] + [(a + b) / 2 for a, b in zip(cuts[:-1], cuts[1:])] + [cuts[-1] + 1]
    for p in probes:
        out.append((u(p), field_.cell_index(p)))
    return out


def sm_chain_tv(field_: SpatialFluxField, items: Sequence) -> object:
    """TV(Psi) + TV(pi) of a chain of (state, cell) pairs."""
    total = 0
    prev = None
    for uu, c in items:
        f = field_.fluxes[c]
        cur = (f.singular_map(uu), f.projection(uu))
        if prev is not None:
            total += abs(cur[0] - prev[0]) + abs(cur[1] - prev[1])
        prev = cur
    return total


def transformed_tv(field_: SpatialFluxField, u: PiecewiseConstantFunction, check_grid=False):
    """TV of x -> Psi(x, u(x)) plus TV of x -> pi(x, u(x))."""
    if check_grid:
        for v in u.values:
            if not field_.on_grid(v):
                raise OffGrid(f"value {v} not on the grid")
    return sm_chain_tv(field_, cell_pieces(field_, u))


def interface_entropy(g: PLConvexFlux, f: PLConvexFlux, u_minus, u_plus):
    """Interface functional for the connection of the two plateau midpoints."""
    tg, tf = g.midpoint(), f.midpoint()

    def sgn(a):
        return (a > 0) - (a < 0)

    return sgn(u_minus - tg) * g.eval(u_minus) - sgn(u_plus - tf) * f.eval(u_plus)


@dataclass(frozen=True)
class Verdict:
    where: str          # "front" or "interface"
    x: float
    u_left: float
    u_right: float
    label: str          # passing case, or "fail:<case>"
    passed: bool
    detail: str = ""
    interface_value: float | None = None

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in
                ("where", "x", "u_left", "u_right", "label", "passed", "detail",
                 "interface_value")}


@dataclass
class EntropyReport:
    verdicts: list = dc_field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    @property
    def failures(self) -> list:
        return [v for v in self.verdicts if not v.passed]

    @property
    def interface_values(self) -> list:
        return [v.interface_value for v in self.verdicts if v.interface_value is not None]

    def to_json(self) -> dict:
        return {"pass": self.passed, "n_verdicts": len(self.verdicts),
                "failures": [v.to_json() for v in self.failures],
                "min_interface_value": min(self.interface_values, default=None)}


def _rel_close(a, b, tol):
    return abs(a - b) <= tol * max(1, abs(a), abs(b))


def check_front(flux: PLConvexFlux, x, speed, u_l, u_r, tol=1e-9) -> Verdict:
    """Admissibility of a discontinuity away from interfaces."""
    rh = speed * (u_l - u_r) - (flux.eval(u_l) - flux.eval(u_r))
    args = ("front", float(x), float(u_l), float(u_r))
    if abs(rh) > tol * max(1, abs(flux.eval(u_l)), abs(flux.eval(u_r)), abs(speed)):
        return Verdict(*args, "fail:RH", False, f"Rankine-Hugoniot residual {float(rh)}")
    if u_l > u_r:
        return Verdict(*args, "S-2(a)", True)
    if not flux.nodes_between(u_l, u_r):
        return Verdict(*args, "S-2(b)", True)
    if flux.is_affine_on(u_l, u_r):
        return Verdict(*args, "S-2(c)", True)
    kinks = flux.kinks_between(u_l, u_r)
    return Verdict(*args, "fail:S-2", False,
                   f"increasing jump across kink(s) {[float(k) for k in kinks[:3]]}")


def check_interface_trace(g: PLConvexFlux, f: PLConvexFlux, x, u_l, u_r, tol=1e-9) -> Verdict:
    """Admissibility of the trace pair at an interface."""
    args = ("interface", float(x), float(u_l), float(u_r))
    I = interface_entropy(g, f, u_l, u_r)
    gl, fr = g.eval(u_l), f.eval(u_r)
    if not _rel_close(gl, fr, tol):
        return Verdict(*args, "fail:S-1", False, f"flux mismatch {float(gl)} vs {float(fr)}",
                       float(I))
    gm, gp = g.flat_region()
    fm, fp = f.flat_region()
    eps = tol
    label = None
    if u_l <= gp + eps and u_r <= fp + eps:
        label = "S-3(a)"
    elif u_l >= gm - eps and u_r >= fm - eps:
        label = "S-3(b)"
    elif u_l >= gm - eps and u_r <= fp + eps:
        label = "S-3(c)"
    if label is None:
        return Verdict(*args, "fail:S-3", False, "traces on the undercompressive branches",
                       float(I))
    if I < -tol * max(1, abs(gl)):
        return Verdict(*args, "fail:I", False, f"interface functional {float(I)} < 0", float(I))
    return Verdict(*args, label, True, "", float(I))


def entropy_report_fronts(field_: SpatialFluxField, fronts: Sequence, tol=1e-9) -> EntropyReport:
    """Check a list of (x, speed, u_left, u_right, kind) tuples or front objects."""
    rep = EntropyReport()
    for fr in fronts:
        x, s, ul, ur, kind = _front_tuple(fr)
        k = field_.interface_near(x)
        if kind == INTERFACE or (k is not None and s == 0):
            if k is None:
                rep.verdicts.append(Verdict("interface", float(x), float(ul), float(ur),
                                            "fail:position", False, "standing jump off interface"))
                continue
            rep.verdicts.append(check_interface_trace(field_.fluxes[k], field_.fluxes[k + 1],
                                                      x, ul, ur, tol))
        else:
            rep.verdicts.append(check_front(field_.flux_at(x), x, s, ul, ur, tol))
    return rep


def _front_tuple(fr):
    if isinstance(fr, tuple):
        return fr
    x = fr.x if hasattr(fr, "x") else fr.x0
    return x, fr.speed, fr.u_left, fr.u_right, fr.kind


def adapted_entropy_report(field_: SpatialFluxField, trajectory: "Trajectory",
                           tol=1e-9) -> EntropyReport:
    """Every front once, plus the interface traces produced by every interface solve.

    A standing jump is checked as a front of kind interface_jump; an
    interface solve without a standing jump still has to carry continuous
    flux, which is checked on its recorded trace pair.
    """
    rep = EntropyReport()
    for fr in trajectory.fronts:
        if fr.kind == INTERFACE:
            k = fr.cell
            rep.verdicts.append(check_interface_trace(field_.fluxes[k], field_.fluxes[k + 1],
                                                      fr.x0, fr.u_left, fr.u_right, tol))
        else:
            flux = field_.fluxes[fr.cell]
            rep.verdicts.append(check_front(flux, fr.x0, fr.speed, fr.u_left, fr.u_right, tol))
    by_id = {f.id: f for f in trajectory.fronts}
    for rec in list(trajectory.init_records) + list(trajectory.events):
        if rec.interface is None or rec.traces is None:
            continue
        if any(by_id[i].kind == INTERFACE for i in rec.fronts_out):
            continue
        k = rec.interface
        ul, ur = rec.traces
        rep.verdicts.append(check_interface_trace(field_.fluxes[k], field_.fluxes[k + 1],
                                                  rec.x, ul, ur, tol))
    return rep


# -- BV functional and bound ---------------------------------------------


def lambda_functional(field_: SpatialFluxField, u0: PiecewiseConstantFunction):
    """Per-cell TV of u0 plus the distance of its interface traces to the plateau midpoints."""
    total = 0
    z = field_.interfaces
    for j, x in enumerate(u0.jumps):
        if field_.interface_near(x) is None:
            total += abs(u0.values[j + 1] - u0.values[j])
    for k, zk in enumerate(z):
        total += abs(u0.left_limit(zk) - field_.fluxes[k].midpoint())
        total += abs(u0(zk) - field_.fluxes[k + 1].midpoint())
    return total


def convexity_constants(field_: SpatialFluxField) -> tuple:
    c1, c2 = None, None
    for f in field_.fluxes:
        lo, hi = f.curvature_range()
        c1 = lo if c1 is None else min(c1, lo)
        c2 = hi if c2 is None else max(c2, hi)
    return c1, c2


def bv_bound(field_: SpatialFluxField, u0: PiecewiseConstantFunction, t,
             trajectory: "Trajectory", tol=1e-9) -> tuple:
    """(measured TV(u(t)), TV(u_M) + (C2/C1)^{3/2} Lambda(u0), holds)."""
    for f in field_.fluxes:
        lo, hi = f.flat_region()
        if lo != hi:
            raise PlateauPresent(f"flux has plateau [{lo}, {hi}]")
    c1, c2 = convexity_constants(field_)
    if c1 is None or not c1 > 0:
        raise NotUniformlyConvex(f"discrete convexity floor {c1} is not positive")
    c3 = (float(c2) / float(c1)) ** 1.5
    mids = [f.midpoint() for f in field_.fluxes]
    tv_um = sum(abs(mids[i + 1] - mids[i]) for i in range(len(mids) - 1))
    bound = float(tv_um) + c3 * float(lambda_functional(field_, u0))
    measured = float(total_variation(trajectory.sample(t)))
    return measured, bound, measured <= bound + tol


# -- stability -----------------------------------------------------------


def l1_distance(u: PiecewiseConstantFunction, v: PiecewiseConstantFunction, a, b):
    """Exact integral of |u - v| over [a, b]."""
    cuts = sorted({x for x in list(u.jumps) + list(v.jumps) if a < x < b})
    pts = [a] + cuts + [b]
    total = 0
    for l, r in zip(pts[:-1], pts[1:]):
        m = (l + r) / 2
        total += (r - l) * abs(u(m) - v(m))
    return total


def contraction_check(traj_u: "Trajectory", traj_v: "Trajectory", a, b, t,
                      tol=1e-9) -> tuple:
    """(distance at t on the shrunken cone, initial distance, holds)."""
    M = max(traj_u.speed_bound, traj_v.speed_bound)
    lo, hi = a + M * t, b - M * t
    if not lo < hi:
        raise ConeEmpty(f"cone [{lo}, {hi}] is empty at t={t}")
    d0 = l1_distance(traj_u.data, traj_v.data, a, b)
    dt = l1_distance(traj_u.sample(t), traj_v.sample(t), lo, hi)
    return float(dt), float(d0), dt <= d0 + tol


def sm_profile(field_: SpatialFluxField, u: PiecewiseConstantFunction) -> PiecewiseConstantFunction:
    """x -> Psi(x, u) + pi(x, u) as a piecewise-constant function."""
    cuts = sorted(set(u.jumps) | set(field_.interfaces))
    vals = []
    for uu, c in cell_pieces(field_, u):
        vals.append(field_.fluxes[c].sm_value(uu))
    if not cuts:
        return PiecewiseConstantFunction((), (vals[0],))
    return PiecewiseConstantFunction(tuple(cuts), tuple(vals))


def time_lipschitz_check(trajectory: "Trajectory", times: Sequence | None = None,
                         tol=1e-9) -> tuple:
    """(max ratio, L, holds) for ||v(t1)-v(t2)||_1 / (|t1-t2| TV(v0))."""
    fld = trajectory.field
    if times is None:
        times = trajectory.default_sample_times()
    times = sorted(set(times))
    L = max(float(trajectory.speed_bound), 1.0)
    v0 = sm_profile(fld, trajectory.data)
    tv0 = total_variation(v0)
    if tv0 == 0 or len(times) < 2:
        return 0.0, L, True
    profs = [sm_profile(fld, trajectory.sample(t)) for t in times]
    span = _support(profs)
    worst = 0.0
    for i in range(len(times)):
        for j in range(i + 1, len(times)):
            d = l1_distance(profs[i], profs[j], span[0], span[1])
            r = float(d) / (float(times[j] - times[i]) * float(tv0))
            worst = max(worst, r)
    return worst, L, worst <= L + tol


def _support(profs) -> tuple:
    xs = [x for p in profs for x in p.jumps]
    if not xs:
        return (0, 1)
    return (min(xs) - 1, max(xs) + 1)


def mass(u: PiecewiseConstantFunction, a, b):
    return u.integral(a, b)
