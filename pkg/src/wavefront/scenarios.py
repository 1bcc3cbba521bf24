"""Scenario generators: randomised level-structured fields and the two
total-variation blow-up constructions, with their closed-form predictions."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .errors import ConvexityFloorViolated, GeometryViolated
from .flux_core import (
    DEFAULT_TOL,
    EXACT_TOL,
    PLUS,
    PLConvexFlux,
    SpatialFluxField,
    Tolerances,
    build_pl_flux,
    complete_field,
)
from .piecewise import PiecewiseConstantFunction


# -- randomised scenarios ------------------------------------------------


@dataclass(frozen=True)
class RandomParams:
    max_levels: int = 5
    level_step: tuple = (0.2, 1.0)
    slope0: tuple = (0.3, 1.5)
    slope_step: tuple = (0.2, 1.5)
    p_affine: float = 0.3      # chance that a branch keeps its slope across a level
    p_plateau: float = 0.4
    x_range: tuple = (-1.5, 1.5)
    iface_range: tuple = (-1.0, 1.0)
    min_gap: float = 0.1
    snap: float | None = None  # round interface positions to this spacing
    quadratic: bool = False    # c (u - m)^2 samples, point plateaus
    compact: bool = False      # far-field states on the plateaus of the outer cells
    # "descending": both plateau ends are nonincreasing from cell to cell, the
    # arrangement under which interface solves cannot raise TV(pi); "free" drops it
    plateau_order: str = "descending"


def _random_plateaus(rng: random.Random, n: int, p: RandomParams) -> list:
    out = []
    for _ in range(n):
        if rng.random() < p.p_plateau:
            lo = rng.uniform(-0.5, 0.2)
            out.append((lo, lo + rng.uniform(0.1, 0.6)))
        else:
            x = rng.uniform(-0.3, 0.3)
            out.append((x, x))
    if p.plateau_order == "descending":
        # k-th largest lower end never exceeds the k-th largest upper end
        los = sorted((a for a, _ in out), reverse=True)
        his = sorted((b for _, b in out), reverse=True)
        out = [(a, b if b > a else a) for a, b in zip(los, his)]
    return out


def _level_flux(rng: random.Random, levels, p: RandomParams, plateau=(0.0, 0.0)) -> PLConvexFlux:
    if p.quadratic:
        c = rng.uniform(0.5, 2.0)
        m = rng.uniform(-0.3, 0.3)
        minus = [m - math.sqrt(a / c) for a in levels]
        plus = [m + math.sqrt(a / c) for a in levels]
        breaks = minus[::-1] + [m] + plus
        values = list(levels[::-1]) + [0.0] + list(levels)
        return build_pl_flux(breaks, values)
    lo, hi = plateau

    def branch(start, sign):
        s = rng.uniform(*p.slope0)
        u, prev, out = start, 0.0, []
        for i, a in enumerate(levels):
            if i > 0 and rng.random() >= p.p_affine:
                s += rng.uniform(*p.slope_step)
            u = u + sign * (a - prev) / s
            prev = a
            out.append(u)
        return out

    plus = branch(hi, 1.0)
    minus = branch(lo, -1.0)
    mid = [lo] if lo == hi else [lo, hi]
    breaks = minus[::-1] + mid + plus
    values = list(levels[::-1]) + [0.0] * len(mid) + list(levels)
    return build_pl_flux(breaks, values)


def random_scenario(seed: int, n_interfaces: int = 2, n_jumps: int = 6,
                    params: RandomParams = RandomParams()) -> tuple:
    """Deterministic random field and on-grid data.

    All cell fluxes have their nodes on a common set of levels, so every
    state reachable by the tracker is a node and the completion adds no
    levels.  Data pieces never straddle an interface.
    """
    rng = random.Random(seed)
    p = params
    K = rng.randint(2, p.max_levels)
    levels, a = [], 0.0
    for _ in range(K):
        a += rng.uniform(*p.level_step)
        levels.append(a)
    plateaus = _random_plateaus(rng, n_interfaces + 1, p)
    fluxes = [_level_flux(rng, levels, p, pl) for pl in plateaus]
    z = []
    for _ in range(1000):
        z = sorted(rng.uniform(*p.iface_range) for _ in range(n_interfaces))
        if p.snap:
            z = [round(x / p.snap) * p.snap for x in z]
        if all(b - a > p.min_gap for a, b in zip(z[:-1], z[1:])):
            break
    jumps = sorted(set(rng.uniform(*p.x_range) for _ in range(n_jumps)) | set(z))
    field0 = SpatialFluxField(tuple(z), tuple(fluxes), None, DEFAULT_TOL)
    cell_seeds: dict = {}
    values = []
    pieces = [None] + jumps + [None]
    for i in range(len(jumps) + 1):
        lo, hi = pieces[i], pieces[i + 1]
        probe = (lo - 1 if hi is None else hi - 1) if lo is None else (lo + 1 if hi is None else (lo + hi) / 2)
        c = field0.cell_index(probe)
        f = fluxes[c]
        outer = lo is None or hi is None
        if p.compact and outer:
            v = rng.choice(f.flat_region())
        else:
            v = rng.choice(f.breaks)
        values.append(v)
        cell_seeds.setdefault(c, []).append(v)
    data = PiecewiseConstantFunction(tuple(jumps), tuple(values)).normalized()
    fld = complete_field(field0, (), cell_seeds=cell_seeds)
    return fld, data


def perturbed_data(seed: int, field_: SpatialFluxField, data: PiecewiseConstantFunction,
                   p_change: float = 0.5, shift: float = 0.2) -> PiecewiseConstantFunction:
    """Second datum on the same field: some pieces take other nodes, jumps move a bit."""
    rng = random.Random(seed)
    jumps = list(data.jumps)
    z = set(field_.interfaces)
    for i, x in enumerate(jumps):
        if x in z:
            continue
        lo = jumps[i - 1] if i > 0 else x - 1
        hi = jumps[i + 1] if i + 1 < len(jumps) else x + 1
        cand = x + rng.uniform(-shift, shift)
        if lo < cand < hi and field_.interface_near(cand, 1e-9) is None:
            # stay in the same cell
            if field_.cell_index(cand) == field_.cell_index(x):
                jumps[i] = cand
    values = list(data.values)
    pieces = [None] + jumps + [None]
    for i in range(1, len(values) - 1):
        if rng.random() < p_change:
            c = field_.cell_index((pieces[i] + pieces[i + 1]) / 2)
            f = field_.fluxes[c]
            lo_, hi_ = f.flat_region()
            own = [b for b in f.breaks if b in set(field_.grid_points())]
            values[i] = rng.choice(own)
    return PiecewiseConstantFunction(tuple(jumps), tuple(values)).normalized()


# -- counterexample I ----------------------------------------------------


@dataclass(frozen=True)
class BlockGeometry:
    n: int
    y_prev: float
    x1: float
    x2: float
    z: float
    y: float
    a: float
    b: float
    lam: float
    xi: float
    t_hit: float


def _cex1_fluxes(n: int):
    c = 2.0 / n ** 1.5
    return (lambda u: c * u * u + u ** 4), (lambda u: u ** 4), (lambda u: 2 * c * u + 4 * u ** 3)


def predict_counterexample1(N: int, delta: float = 0.2) -> tuple:
    """Block geometry and the partial-sum lower bound for the total variation at t = 1.

    The shock from x_n^2 travels at lam_n and reaches z_n at t_n = 1 - 1/n^2.
    """
    if not (N >= 1 and 0 < delta < 0.25):
        raise GeometryViolated("need N >= 1 and 0 < delta < 1/4")
    blocks = []
    y = 0.0
    for n in range(1, N + 1):
        a = n ** (-1.0 - delta)
        lam = 2 * a / n ** 1.5 + a ** 3
        b = (2 * a * a / n ** 1.5 + a ** 4) ** 0.25
        xi = b ** 3
        x1 = y + 1.0 / n ** 2
        x2 = x1 + 8.0 / n ** (delta + 2.5) + 8.0 / n ** (3 + 3 * delta)
        t = 1.0 - 1.0 / n ** 2
        z = x2 + lam * t
        y_next = z + 2 * xi
        blocks.append(BlockGeometry(n, y, x1, x2, z, y_next, a, b, lam, xi, t))
        y = y_next
    bound = sum(k ** -(0.875 + delta / 2) for k in range(1, N + 1))
    return blocks, bound


def _geometric_uniform(top: float, K: int, q: float = 0.5, depth: int = 30) -> list:
    pts = {top * k / K for k in range(K + 1)}
    pts.update(top * q ** k for k in range(1, depth + 1))
    return sorted(pts)


def _even_flux(func, pts, tol=DEFAULT_TOL) -> PLConvexFlux:
    pos = [p for p in pts if p > 0]
    breaks = [-p for p in pos[::-1]] + [0.0] + pos
    values = [func(abs(u)) for u in breaks]
    return build_pl_flux(breaks, values, tol)


def build_counterexample1(N: int, delta: float = 0.2, grid_refine: int = 64) -> tuple:
    """(field, data).  Cells alternate f_1, g_1, f_2, g_2, ..., g_N.

    Each block is completed on its own two fluxes; blocks never exchange
    waves before t = 1, so no level needs to cross from one block to another.
    """
    blocks, _ = predict_counterexample1(N, delta)
    fluxes, interfaces = [], []
    jumps, values = [], [0.0]
    level_pairs = []
    for blk in blocks:
        f_fun, g_fun, _ = _cex1_fluxes(blk.n)
        fpts = _geometric_uniform(blk.a, grid_refine)
        f = _even_flux(f_fun, fpts + [1.25 * blk.a])
        gpts = _geometric_uniform(1.25 * blk.b, grid_refine)
        g = _even_flux(g_fun, gpts)
        pair = complete_field(SpatialFluxField((0.0,), (f, g), None, DEFAULT_TOL), (),
                              cell_seeds={0: [0.0, blk.a], 1: [0.0]})
        fluxes += list(pair.fluxes)
        level_pairs.append(pair)
        interfaces += [blk.z] + ([blk.y] if blk.n < N else [])
        jumps += [blk.x1, blk.x2]
        values += [blk.a, 0.0]
    grid = sorted({u for fl in fluxes for u in fl.breaks})
    fld = SpatialFluxField(tuple(interfaces), tuple(fluxes), tuple(grid), DEFAULT_TOL)
    data = PiecewiseConstantFunction(tuple(jumps), tuple(values))
    _check_cex1_geometry(fld, blocks)
    return fld, data


def pl_cex1_quantities(fld: SpatialFluxField, blk: BlockGeometry) -> dict:
    f = fld.fluxes[2 * (blk.n - 1)]
    g = fld.fluxes[2 * (blk.n - 1) + 1]
    level = f.eval(blk.a)
    b_pl = g.branch_inverse(level, PLUS)
    lead = f.slopes[f.breaks.index(blk.a) - 1]
    return {"level": level, "b_pl": b_pl, "lam_pl": level / blk.a,
            "xi_pl": level / b_pl, "fan_lead": lead}


def _check_cex1_geometry(fld, blocks):
    for blk in blocks:
        q = pl_cex1_quantities(fld, blk)
        if blk.z - blk.x1 < q["fan_lead"]:
            raise GeometryViolated(f"block {blk.n}: fan reaches z_n before t = 1")
        if q["xi_pl"] * (1 - blk.t_hit) + blk.z >= blk.y:
            raise GeometryViolated(f"block {blk.n}: transmitted shock leaves the block")
        if not blk.y_prev < blk.x1 < blk.x2 <= blk.z < blk.y:
            raise GeometryViolated(f"block {blk.n}: positions out of order")


# -- counterexample II ---------------------------------------------------


def cex2_flux_value(n: int, u: float) -> float:
    """u^2 (1 + (1 - n^{4/3} u^2)^3 / n^{1/4}) on |u| <= n^{-2/3}, u^2 outside."""
    s = n ** (4.0 / 3.0) * u * u
    if s >= 1:
        return u * u
    return u * u * (1 + (1 - s) ** 3 / n ** 0.25)


def cex2_flux_second_derivative(n: int, u: float) -> float:
    if abs(u) >= n ** (-2.0 / 3.0):
        return 2.0
    return (2 + 2 / n ** 0.25 - 36 * n ** (13 / 12) * u ** 2 + 90 * n ** (29 / 12) * u ** 4
            - 56 * n ** (15 / 4) * u ** 6)


def _cex2_inverse(n: int, level: float, r: float) -> float:
    """Positive root of f_n(v) = level inside the perturbed region (bisection)."""
    lo, hi = 0.0, r
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if cex2_flux_value(n, mid) < level:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class Cex2Setup:
    field: SpatialFluxField
    data: PiecewiseConstantFunction
    n0: int
    N: int
    cells: dict = dc_field(default_factory=dict)   # n -> (a_n, b_n, cell index)


def _cex2_g_nodes(K: int) -> list:
    return [Fraction(i, K) for i in range(K + 1)]


def _cex2_flux(n: int | None, K: int, tol: Tolerances) -> PLConvexFlux:
    us = _cex2_g_nodes(K)
    pos = []
    r = None if n is None else n ** (-2.0 / 3.0)
    for u in us[1:]:
        level = u * u
        if r is not None and float(u) < r:
            pos.append((Fraction(_cex2_inverse(n, float(level), r)), level))
        else:
            pos.append((u, level))
    breaks = [-b for b, _ in pos[::-1]] + [Fraction(0)] + [b for b, _ in pos]
    values = [l for _, l in pos[::-1]] + [Fraction(0)] + [l for _, l in pos]
    return build_pl_flux(breaks, values, tol, error=ConvexityFloorViolated)


def cex2_convexity(n: int, K: int = 512) -> float:
    """Smallest discrete second difference of the sampled f_n in its perturbed region."""
    f = _cex2_flux(n, K, EXACT_TOL)
    r = n ** (-2.0 / 3.0)
    b, v = f.breaks, f.values
    worst = math.inf
    for i in range(1, len(b) - 1):
        if 0 < b[i] < r:
            s0 = (v[i] - v[i - 1]) / (b[i] - b[i - 1])
            s1 = (v[i + 1] - v[i]) / (b[i + 1] - b[i])
            worst = min(worst, float(2 * (s1 - s0) / (b[i + 1] - b[i - 1])))
    return worst


def cex2_n0(floor: float = 0.25, K: int = 512, n_max: int = 200) -> int:
    for n in range(2, n_max + 1):
        if cex2_convexity(n, K) >= floor:
            return n
    raise ConvexityFloorViolated(f"no n <= {n_max} reaches convexity floor {floor}")


def build_counterexample2(N: int, grid_refine: int = 64, floor: float = 0.25,
                          n0: int | None = None) -> tuple:
    """(field, data); see :func:`counterexample2_setup` for the cell table."""
    s = counterexample2_setup(N, grid_refine, floor, n0)
    return s.field, s.data


def counterexample2_setup(N: int, grid_refine: int = 64, floor: float = 0.25,
                          n0: int | None = None) -> Cex2Setup:
    """Exact-arithmetic field: g = u^2 sampled on i/K, f_n on cells [a_n, a_n + n^{-2n}].

    Every flux is noded on the same levels (i/K)^2, so no front ever splits.
    K is the smallest power of two giving ``grid_refine`` nodes inside the
    narrowest perturbed region.
    """
    K = 64
    while K * N ** (-2.0 / 3.0) < grid_refine:
        K *= 2
    if n0 is None:
        n0 = cex2_n0(floor, K)
    if N < n0:
        raise ConvexityFloorViolated(f"N={N} is below n0={n0}")
    tol = EXACT_TOL
    g = _cex2_flux(None, K, tol)
    fluxes, interfaces, cells = [g], [], {}
    for n in range(N, n0 - 1, -1):
        a = Fraction(n ** (-2.0 / 3.0))
        b = a + Fraction(1, n ** (2 * n))
        fluxes += [_cex2_flux(n, K, tol), g]
        interfaces += [a, b]
        cells[n] = (a, b, len(fluxes) - 2)
    fld = SpatialFluxField(tuple(interfaces), tuple(fluxes), None, tol)
    data = PiecewiseConstantFunction((Fraction(0),), (Fraction(0), Fraction(1)))
    return Cex2Setup(fld, data, n0, N, cells)


def predict_counterexample2(N: int, n0: int = 3) -> dict:
    """Wave speed bound and per-m leading-order jump floors at t = 1."""
    w = (N + 1) ** (-2.0 / 3.0)
    rows = []
    for m in range(n0, (N - 1) // 2 + 1):
        a = m ** (-2.0 / 3.0)
        wm = a / 2
        # state entering the thin cell at level wm^2, characteristic estimate
        vm = _cex2_inverse(m, wm * wm, a)
        rows.append({"m": m, "a_m": a, "J": m ** (-11.0 / 12.0) / 54,
                     "floor": m ** (-11.0 / 12.0) / 108, "characteristic_jump": wm - vm})
    return {"w_N": w, "speed": 2 * w, "rows": rows,
            "note": "constant B of the lower bound is not quantified; floors use the leading term"}
