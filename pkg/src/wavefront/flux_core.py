"""Piecewise-linear convex fluxes, singular maps and shared break-point grids.

A flux is a node table ``(breaks, values)``.  Evaluation is exact linear
interpolation, so with :class:`fractions.Fraction` inputs every operation in
this module (and in the tracker built on it) is exact rational arithmetic.
With floats the tolerances in :class:`Tolerances` apply.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .errors import (
    AboveRange,
    ClosureOverflow,
    DegenerateGrid,
    GeometryViolated,
    MinimumNotZero,
    NegativeLevel,
    NonConvex,
    NotConvexAfterSampling,
    OutOfDomain,
    OutOfRange,
)

MINUS = "minus"
PLUS = "plus"


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances.  All zero means exact arithmetic is assumed."""

    eps_u: float = 1e-12
    eps_t: float = 1e-12
    eps_x: float = 1e-12
    slope_rel: float = 1e-9

    @classmethod
    def exact(cls) -> "Tolerances":
        return cls(0, 0, 0, 0)

    @property
    def is_exact(self) -> bool:
        return not (self.eps_u or self.eps_t or self.eps_x or self.slope_rel)


DEFAULT_TOL = Tolerances()
EXACT_TOL = Tolerances.exact()


def coerce(x, exact: bool = False):
    """Keep exact rationals, turn everything else into a float.

    With ``exact`` every number becomes a Fraction (floats by their binary value).
    """
    if isinstance(x, Fraction):
        return x
    if type(x).__name__ == "mpq":
        return Fraction(int(x.numerator), int(x.denominator))
    if exact and not isinstance(x, str):
        return Fraction(x)
    return float(x)


def _same_slope(a, b, rel) -> bool:
    return abs(a - b) <= rel * max(abs(a), abs(b))


@dataclass(frozen=True)
class PLConvexFlux:
    breaks: tuple
    values: tuple
    tol: Tolerances = field(default=DEFAULT_TOL, compare=False, repr=False)

    # derived, filled in __post_init__
    slopes: tuple = field(init=False, compare=False, repr=False)
    plateau_idx: tuple = field(init=False, compare=False, repr=False)
    kink_idx: tuple = field(init=False, compare=False, repr=False)
    _kink_u: tuple = field(init=False, compare=False, repr=False)
    _plus_vals: tuple = field(init=False, compare=False, repr=False)
    _minus_vals: tuple = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        b, v = self.breaks, self.values
        n = len(b)
        slopes = tuple((v[i + 1] - v[i]) / (b[i + 1] - b[i]) for i in range(n - 1))
        zeros = [i for i in range(n) if v[i] == 0]
        lo, hi = zeros[0], zeros[-1]
        kinks = tuple(
            i for i in range(1, n - 1)
            if not _same_slope(slopes[i - 1], slopes[i], self.tol.slope_rel)
        )
        object.__setattr__(self, "slopes", slopes)
        object.__setattr__(self, "plateau_idx", (lo, hi))
        object.__setattr__(self, "kink_idx", kinks)
        object.__setattr__(self, "_kink_u", tuple(b[i] for i in kinks))
        object.__setattr__(self, "_plus_vals", tuple(v[hi:]))
        object.__setattr__(self, "_minus_vals", tuple(v[lo::-1]))

    # -- basic queries -------------------------------------------------

    @property
    def domain(self) -> tuple:
        return self.breaks[0], self.breaks[-1]

    def flat_region(self) -> tuple:
        lo, hi = self.plateau_idx
        return self.breaks[lo], self.breaks[hi]

    def midpoint(self):
        lo, hi = self.flat_region()
        return (lo + hi) / 2

    def in_domain(self, u) -> bool:
        eps = self.tol.eps_u
        return self.breaks[0] - eps <= u <= self.breaks[-1] + eps

    def __call__(self, u):
        return self.eval(u)

    def eval(self, u):
        b = self.breaks
        if not self.in_domain(u):
            raise OutOfDomain(f"u={u} outside flux domain [{b[0]}, {b[-1]}]")
        i = bisect.bisect_right(b, u) - 1
        if i < 0:
            return self.values[0]
        if b[i] == u or i >= len(b) - 1:
            return self.values[i]
        return self.values[i] + self.slopes[i] * (u - b[i])

    def branch_max(self, branch: str):
        return self.values[-1] if branch == PLUS else self.values[0]

    def branch_inverse(self, alpha, branch: str):
        """State on the requested monotone branch with flux value ``alpha``."""
        eps = self.tol.eps_u
        if alpha < -eps:
            raise NegativeLevel(f"level {alpha} < 0")
        lo, hi = self.plateau_idx
        b, v = self.breaks, self.values
        top = self.branch_max(branch)
        if alpha > top:
            if alpha - top > eps * max(1.0, abs(top)):
                raise AboveRange(f"level {alpha} above {branch} branch maximum {top}")
            return b[-1] if branch == PLUS else b[0]
        if alpha <= 0:
            return b[hi] if branch == PLUS else b[lo]
        if branch == PLUS:
            p = bisect.bisect_left(self._plus_vals, alpha)
            j = hi + p
            if v[j] == alpha:
                return b[j]
            return b[j - 1] + (alpha - v[j - 1]) / self.slopes[j - 1]
        p = bisect.bisect_left(self._minus_vals, alpha)
        j = lo - p
        if v[j] == alpha:
            return b[j]
        return b[j + 1] + (alpha - v[j + 1]) / self.slopes[j]

    def singular_map(self, u):
        lo, hi = self.flat_region()
        if u >= hi:
            return self.eval(u)
        if u <= lo:
            return -self.eval(u)
        if not self.in_domain(u):
            raise OutOfDomain(f"u={u} outside flux domain")
        return 0 * u

    def projection(self, u):
        lo, hi = self.flat_region()
        return min(max(u, lo), hi)

    def sm_value(self, u):
        """Psi(u) + pi(u), strictly increasing in u."""
        return self.singular_map(u) + self.projection(u)

    def sm_inverse(self, w):
        lo, hi = self.flat_region()
        try:
            if w > hi:
                return self.branch_inverse(w - hi, PLUS)
            if w < lo:
                return self.branch_inverse(lo - w, MINUS)
        except AboveRange as exc:
            raise OutOfRange(str(exc)) from None
        return w

    # -- node structure ------------------------------------------------

    def is_node(self, u) -> bool:
        b = self.breaks
        i = bisect.bisect_left(b, u - self.tol.eps_u)
        return i < len(b) and abs(b[i] - u) <= self.tol.eps_u

    def kinks_between(self, a, c) -> list:
        """Kink locations strictly inside (a, c)."""
        ku = self._kink_u
        eps = self.tol.eps_u
        i = bisect.bisect_right(ku, a + eps)
        j = bisect.bisect_left(ku, c - eps)
        return list(ku[i:j])

    def nodes_between(self, a, c) -> list:
        b = self.breaks
        eps = self.tol.eps_u
        i = bisect.bisect_right(b, a + eps)
        j = bisect.bisect_left(b, c - eps)
        return list(b[i:j])

    def is_affine_on(self, a, c) -> bool:
        return not self.kinks_between(min(a, c), max(a, c))

    def max_abs_slope(self, lo=None, hi=None):
        b = self.breaks
        best = 0
        for i, s in enumerate(self.slopes):
            if lo is not None and b[i + 1] <= lo:
                continue
            if hi is not None and b[i] >= hi:
                continue
            best = max(best, abs(s))
        return best

    def curvature_range(self) -> tuple:
        """(min, max) of 2*(slope jump)/(spacing) over kinks, collinear nodes ignored."""
        pts = [0] + list(self.kink_idx) + [len(self.breaks) - 1]
        b, v = self.breaks, self.values
        out = []
        for k in range(1, len(pts) - 1):
            i0, i1, i2 = pts[k - 1], pts[k], pts[k + 1]
            s_left = (v[i1] - v[i0]) / (b[i1] - b[i0])
            s_right = (v[i2] - v[i1]) / (b[i2] - b[i1])
            out.append(2 * (s_right - s_left) / (b[i2] - b[i0]))
        if not out:
            return (0, 0)
        return (min(out), max(out))

    def renode(self, points: Iterable, levels: Mapping | None = None) -> "PLConvexFlux":
        """Insert extra nodes.  ``levels`` may give exact values for some points."""
        levels = levels or {}
        lo, hi = self.domain
        eps = self.tol.eps_u
        b = list(self.breaks)
        v = list(self.values)
        for p in sorted(set(points)):
            if p < lo or p > hi:
                continue
            i = bisect.bisect_left(b, p)
            if (i < len(b) and abs(b[i] - p) <= eps) or (i > 0 and abs(b[i - 1] - p) <= eps):
                continue
            val = levels.get(p)
            if val is None:
                val = self.eval(p)
            b.insert(i, p)
            v.insert(i, val)
        return PLConvexFlux(tuple(b), tuple(v), self.tol)

    def to_json(self) -> dict:
        return {"breaks": [float(x) for x in self.breaks],
                "values": [float(x) for x in self.values]}


def build_pl_flux(breaks: Sequence, values: Sequence, tol: Tolerances = DEFAULT_TOL,
                  error=NonConvex) -> PLConvexFlux:
    """Validate a node table and normalise its minimum to exactly zero."""
    b = [coerce(x, tol.is_exact) for x in breaks]
    v = [coerce(x, tol.is_exact) for x in values]
    if len(b) != len(v) or len(b) < 2:
        raise NonConvex("breaks and values must have equal length >= 2")
    if any(not math.isfinite(float(x)) for x in b + v):
        raise NonConvex("non-finite entry in flux table")
    for i in range(len(b) - 1):
        if not b[i] < b[i + 1]:
            raise NonConvex(f"breaks not strictly increasing at index {i}")
    slopes = [(v[i + 1] - v[i]) / (b[i + 1] - b[i]) for i in range(len(b) - 1)]
    for i in range(len(slopes) - 1):
        s0, s1 = slopes[i], slopes[i + 1]
        if s1 < s0 and not _same_slope(s0, s1, tol.slope_rel):
            raise error(
                f"not convex: slope drops from {float(s0)} on segment "
                f"[{float(b[i])}, {float(b[i + 1])}] to {float(s1)} on segment "
                f"[{float(b[i + 1])}, {float(b[i + 2])}]")
    m = min(v)
    if abs(m) > tol.eps_u:
        raise MinimumNotZero(f"minimum flux value {float(m)} is not 0")
    if m != 0:
        v = [x - m for x in v]
    zeros = [i for i, x in enumerate(v) if x == 0]
    if any(v[i] != 0 for i in range(zeros[0], zeros[-1] + 1)):
        raise error("zero set of the flux is not an interval")
    return PLConvexFlux(tuple(b), tuple(v), tol)


def flux_from_json(obj: Mapping, tol: Tolerances = DEFAULT_TOL) -> PLConvexFlux:
    return build_pl_flux(obj["breaks"], obj["values"], tol)


# module-level spellings of the flux methods
def eval_flux(flux: PLConvexFlux, u):
    return flux.eval(u)


def branch_inverse(flux: PLConvexFlux, alpha, branch: str):
    return flux.branch_inverse(alpha, branch)


def flat_region(flux: PLConvexFlux) -> tuple:
    return flux.flat_region()


def singular_map(flux: PLConvexFlux, u):
    return flux.singular_map(u)


def projection(flux: PLConvexFlux, u):
    return flux.projection(u)


def sm_inverse(flux: PLConvexFlux, w):
    return flux.sm_inverse(w)


@dataclass(frozen=True)
class SpatialFluxField:
    """One flux per cell; cell j lies between ``interfaces[j-1]`` and ``interfaces[j]``."""

    interfaces: tuple
    fluxes: tuple
    grid: tuple | None = None
    tol: Tolerances = field(default=DEFAULT_TOL, compare=False, repr=False)

    def __post_init__(self):
        if len(self.fluxes) != len(self.interfaces) + 1:
            raise GeometryViolated("need exactly one flux per cell")
        for i in range(len(self.interfaces) - 1):
            if not self.interfaces[i + 1] - self.interfaces[i] > self.tol.eps_x:
                raise GeometryViolated(
                    f"cell [{self.interfaces[i]}, {self.interfaces[i + 1]}] is too narrow")

    @property
    def n_cells(self) -> int:
        return len(self.fluxes)

    def cell_index(self, x) -> int:
        """Cell containing x; a point exactly on interface k belongs to cell k+1."""
        return bisect.bisect_right(self.interfaces, x)

    def flux_at(self, x) -> PLConvexFlux:
        return self.fluxes[self.cell_index(x)]

    def interface_near(self, x, tol=None):
        tol = self.tol.eps_x if tol is None else tol
        k = bisect.bisect_left(self.interfaces, x - tol)
        if k < len(self.interfaces) and abs(self.interfaces[k] - x) <= tol * max(1, abs(x)):
            return k
        return None

    def grid_points(self) -> tuple:
        if self.grid is not None:
            return self.grid
        pts = set()
        for f in self.fluxes:
            pts.update(f.breaks)
        return tuple(sorted(pts))

    def on_grid(self, u) -> bool:
        g = self.grid_points()
        eps = self.tol.eps_u
        i = bisect.bisect_left(g, u - eps)
        return i < len(g) and abs(g[i] - u) <= eps

    def to_json(self) -> dict:
        return {"interfaces": [float(x) for x in self.interfaces],
                "fluxes": [f.to_json() for f in self.fluxes]}


def build_field(interfaces: Sequence, fluxes: Sequence[PLConvexFlux],
                tol: Tolerances = DEFAULT_TOL, grid=None) -> SpatialFluxField:
    return SpatialFluxField(tuple(coerce(x, tol.is_exact) for x in interfaces), tuple(fluxes),
                            grid, tol)


def field_from_json(obj: Mapping, tol: Tolerances = DEFAULT_TOL) -> SpatialFluxField:
    fluxes = [flux_from_json(f, tol) for f in obj["fluxes"]]
    return build_field(obj.get("interfaces", []), fluxes, tol)


# -- completion ----------------------------------------------------------


class _PointSet:
    """Sorted states with merging of near-duplicates."""

    def __init__(self, eps):
        self.eps = eps
        self.pts: list = []

    def add(self, u) -> bool:
        i = bisect.bisect_left(self.pts, u)
        if i < len(self.pts) and abs(self.pts[i] - u) <= self.eps:
            return False
        if i > 0 and abs(self.pts[i - 1] - u) <= self.eps:
            return False
        self.pts.insert(i, u)
        return True

    def find(self, u):
        i = bisect.bisect_left(self.pts, u - self.eps)
        if i < len(self.pts) and abs(self.pts[i] - u) <= self.eps:
            return self.pts[i]
        return None


def _level_max(field_: SpatialFluxField, seeds, cell_seeds) -> object:
    levels = [0]
    if cell_seeds is not None:
        for j, ss in cell_seeds.items():
            levels += [field_.fluxes[j].eval(s) for s in ss]
    else:
        for f in field_.fluxes:
            levels += [f.eval(s) for s in seeds if f.in_domain(s)]
    return max(levels)


def _inverses(f: PLConvexFlux, alpha):
    out = []
    for br in (MINUS, PLUS):
        if alpha <= f.branch_max(br):
            out.append(f.branch_inverse(alpha, br))
    return out


def complete_breakpoints(field_: SpatialFluxField, seeds: Iterable, value_bound=None,
                         mode: str = "cellwise", cell_seeds: Mapping | None = None,
                         cap: int = 10_000) -> tuple:
    """Shared state grid closed under level matching between cells.

    ``cellwise`` collects every level a state can carry (levels of the seeds,
    of each cell's own kinks, and 0) and inverts all of them in every cell;
    no iteration is needed.  ``global`` iterates the point-to-point closure
    and merges states closer than ``eps_u``.
    """
    pts, _ = _completion(field_, seeds, value_bound, mode, cell_seeds, cap)
    return tuple(pts)


def _completion(field_, seeds, value_bound, mode, cell_seeds, cap):
    eps = field_.tol.eps_u
    ex = field_.tol.is_exact
    seeds = [coerce(s, ex) for s in seeds]
    if cell_seeds is not None:
        cell_seeds = {j: [coerce(s, ex) for s in ss] for j, ss in cell_seeds.items()}
        seeds = seeds + [s for ss in cell_seeds.values() for s in ss]
    if value_bound is not None:
        bad = [s for s in seeds if abs(s) > value_bound + eps]
        if bad:
            raise OutOfDomain(f"seed {bad[0]} exceeds value bound {value_bound}")
    amax = _level_max(field_, seeds, cell_seeds)
    S = _PointSet(eps)
    exact_levels = [dict() for _ in field_.fluxes]
    for s in seeds:
        S.add(s)
    if mode == "cellwise":
        L = {0}
        if cell_seeds is not None:
            for j, ss in cell_seeds.items():
                L.update(field_.fluxes[j].eval(s) for s in ss)
        for f in field_.fluxes:
            L.update(f.eval(s) for s in seeds if f.in_domain(s))
            L.update(f.values[i] for i in f.kink_idx if f.values[i] <= amax)
        L = sorted(a for a in L if a <= amax)
        for j, f in enumerate(field_.fluxes):
            for a in L:
                for k in _inverses(f, a):
                    S.add(k)
                    exact_levels[j][S.find(k)] = a
    elif mode == "global":
        frontier = list(S.pts)
        for f in field_.fluxes:
            frontier += list(f.flat_region())
        for k in frontier:
            S.add(k)
        rounds = 0
        while frontier:
            rounds += 1
            if rounds > cap:
                raise ClosureOverflow(f"closure did not stabilise in {cap} rounds")
            new = []
            for u in frontier:
                for f in field_.fluxes:
                    if not f.in_domain(u):
                        continue
                    a = f.eval(u)
                    if a > amax:
                        continue
                    for j, g in enumerate(field_.fluxes):
                        for k in _inverses(g, a):
                            if S.add(k):
                                new.append(k)
                            exact_levels[j].setdefault(S.find(k), a)
            frontier = new
    else:
        raise ValueError(f"unknown completion mode {mode!r}")
    return S.pts, exact_levels


def complete_field(field_: SpatialFluxField, seeds: Iterable = (), value_bound=None,
                   mode: str = "cellwise", cell_seeds: Mapping | None = None,
                   cap: int = 10_000) -> SpatialFluxField:
    """Completed grid plus every cell flux re-noded on it."""
    pts, levels = _completion(field_, seeds, value_bound, mode, cell_seeds, cap)
    fluxes = []
    for j, f in enumerate(field_.fluxes):
        lv = {p: a for p, a in levels[j].items() if f.in_domain(p)}
        fluxes.append(f.renode([p for p in pts if f.in_domain(p)], lv))
    grid = set(pts)
    for f in fluxes:
        grid.update(f.breaks)
    merged = _PointSet(field_.tol.eps_u)
    for p in sorted(grid):
        merged.add(p)
    return SpatialFluxField(field_.interfaces, tuple(fluxes), tuple(merged.pts), field_.tol)


# -- grid statistics -----------------------------------------------------


def count_pl(field_: SpatialFluxField) -> tuple:
    """Grid points interior to maximal affine pieces, summed over cells."""
    grid = field_.grid_points()
    eps = field_.tol.eps_u
    per = []
    total = 0
    for j, f in enumerate(field_.fluxes):
        ends = [0] + list(f.kink_idx) + [len(f.breaks) - 1]
        for a_i, c_i in zip(ends[:-1], ends[1:]):
            a, c = f.breaks[a_i], f.breaks[c_i]
            lo = bisect.bisect_right(grid, a + eps)
            hi = bisect.bisect_left(grid, c - eps)
            cnt = max(0, hi - lo)
            per.append((j, (a, c), cnt))
            total += cnt
    return total, per


def min_variation(field_: SpatialFluxField):
    """Smallest gap between distinct singular-map values on the grid, any cell."""
    grid = field_.grid_points()
    eps = field_.tol.eps_u
    best = None
    for f in field_.fluxes:
        lo, hi = f.flat_region()
        vals = []
        plateau = False
        for u in grid:
            if not f.in_domain(u):
                continue
            if lo - eps <= u <= hi + eps:
                plateau = True
                continue
            vals.append(f.singular_map(u))
        if plateau:
            vals.append(0 * lo)
        vals.sort()
        for a, c in zip(vals[:-1], vals[1:]):
            gap = c - a
            if gap <= 0:
                raise DegenerateGrid("two grid states share a singular-map value off the plateau")
            best = gap if best is None else min(best, gap)
    if best is None:
        raise DegenerateGrid("grid has fewer than two distinct singular-map values")
    return best


# -- discretisation of analytic fluxes -----------------------------------


@dataclass(frozen=True)
class AnalyticFluxDescriptor:
    """A(x, u) with spatial BV profile a(x) and modulus eta(u)."""

    eval: Callable
    a: Callable
    eta: Callable
    x_range: tuple = (-1.0, 1.0)
    a_breaks: tuple = ()
    samples: int = 4096


def _tv_profile(desc: AnalyticFluxDescriptor):
    x0, x1 = desc.x_range
    xs = {x0 + (x1 - x0) * k / desc.samples for k in range(desc.samples + 1)}
    xs.update(x for x in desc.a_breaks if x0 <= x <= x1)
    xs = sorted(xs)
    av = [desc.a(x) for x in xs]
    F = [0.0]
    for i in range(1, len(xs)):
        F.append(F[-1] + abs(av[i] - av[i - 1]))
    return xs, av, F


def discretize_analytic(desc: AnalyticFluxDescriptor, n: int, data_values: Iterable = (),
                        M: float = 1.0, tol: Tolerances = DEFAULT_TOL) -> SpatialFluxField:
    """Piecewise-constant-in-x, piecewise-linear-in-u approximation of A."""
    xs, av, F = _tv_profile(desc)
    tv = F[-1]
    z = []
    if tv > 0:
        eps_tv = tv / n
        for j in range(1, n + 1):
            target = j * eps_tv - 1e-12 * tv
            k = bisect.bisect_left(F, target)
            k = min(k, len(F) - 1)
            lo, hi = (xs[k - 1], xs[k]) if k > 0 else (xs[0], xs[0])
            # bisect inside the bracketing sample interval
            for _ in range(60):
                if hi - lo <= 1e-14 * max(1.0, abs(hi)):
                    break
                mid = 0.5 * (lo + hi)
                if F[k - 1] + abs(desc.a(mid) - av[k - 1]) >= target:
                    hi = mid
                else:
                    lo = mid
            if not z or hi - z[-1] > tol.eps_x:
                z.append(hi)
    x0, x1 = desc.x_range
    reps = []
    edges = [None] + z + [None]
    for j in range(len(z) + 1):
        left, right = edges[j], edges[j + 1]
        lo = x0 if left is None else left
        hi = x1 if right is None else right
        if left is None and right is not None and lo >= hi:
            lo = hi - 1.0
        if right is None and left is not None and hi <= lo:
            hi = lo + 1.0
        reps.append(0.5 * (lo + hi))
    data_values = [float(u) for u in data_values]
    m = int(math.ceil(M * 2 ** n))
    us = sorted({k / 2 ** n for k in range(-m, m + 1)} | set(data_values))
    fluxes = []
    for xr in reps:
        vals = [float(desc.eval(xr, u)) for u in us]
        shift = min(vals)
        vals = [v - shift for v in vals]
        fluxes.append(build_pl_flux(us, vals, tol, error=NotConvexAfterSampling))
    field_ = SpatialFluxField(tuple(z), tuple(fluxes), None, tol)
    return complete_field(field_, data_values)
