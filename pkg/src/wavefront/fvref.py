"""First-order Godunov finite-volume reference solver.

Deliberately simple: explicit Euler in time, one numerical flux formula for
both interior and interface edges, transmissive boundaries.  Used only to
cross-check the front tracker in L1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CFLViolation, GeometryViolated
from .flux_core import PLConvexFlux, SpatialFluxField
from .piecewise import PiecewiseConstantFunction
from .tracker import level_window


def interface_godunov_flux(g: PLConvexFlux, f: PLConvexFlux, u_l, u_r):
    """max(g(max(u_l, theta_g+)), f(min(u_r, theta_f-)))."""
    return max(g.eval(max(u_l, g.flat_region()[1])), f.eval(min(u_r, f.flat_region()[0])))


@dataclass
class GridSolution:
    centers: np.ndarray
    dx: float
    dt: float
    times: list
    averages: list          # one array per output time
    edges: np.ndarray = None

    def at(self, t) -> np.ndarray:
        i = min(range(len(self.times)), key=lambda k: abs(self.times[k] - t))
        return self.averages[i]

    def rows(self):
        """(t, x, u_avg) rows for CSV output."""
        for t, u in zip(self.times, self.averages):
            for x, v in zip(self.centers, u):
                yield t, float(x), float(v)


class _Tables:
    """Float node tables plus plateau ends for vectorised evaluation."""

    def __init__(self, field_: SpatialFluxField):
        self.b = [np.asarray([float(x) for x in f.breaks]) for f in field_.fluxes]
        self.v = [np.asarray([float(x) for x in f.values]) for f in field_.fluxes]
        self.lo = [float(f.flat_region()[0]) for f in field_.fluxes]
        self.hi = [float(f.flat_region()[1]) for f in field_.fluxes]

    def eval(self, j, u):
        return np.interp(u, self.b[j], self.v[j])


def cell_averages(data: PiecewiseConstantFunction, edges: np.ndarray) -> np.ndarray:
    """Exact averages of a piecewise-constant function over mesh cells."""
    out = np.empty(len(edges) - 1)
    for i in range(len(out)):
        a, b = edges[i], edges[i + 1]
        out[i] = float(data.integral(a, b)) / (b - a)
    return out


def godunov_solve(field_: SpatialFluxField, data: PiecewiseConstantFunction, dx: float,
                  t_max: float, x_range: tuple, times=None, cfl: float = 0.5,
                  snap_tol: float = 1e-9) -> GridSolution:
    """March cell averages to t_max; interfaces must sit on mesh edges."""
    if not 0 < cfl <= 0.5:
        raise CFLViolation(f"CFL number {cfl} outside (0, 1/2]")
    xmin, xmax = map(float, x_range)
    n = int(round((xmax - xmin) / dx))
    if n < 1 or abs(n * dx - (xmax - xmin)) > snap_tol * max(1.0, xmax - xmin):
        raise GeometryViolated("domain length is not a multiple of dx")
    edges = xmin + dx * np.arange(n + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    for z in field_.interfaces:
        k = (float(z) - xmin) / dx
        if abs(k - round(k)) > snap_tol * max(1.0, abs(k)):
            raise GeometryViolated(f"interface {float(z)} is not on a mesh edge")
    cell = np.searchsorted(np.asarray([float(z) for z in field_.interfaces]), centers,
                           side="right")
    # flux cell on each side of every edge, ghosts copy the end cells
    left_cell = np.concatenate(([cell[0]], cell))
    right_cell = np.concatenate((cell, [cell[-1]]))
    tab = _Tables(field_)
    _, _, speed = level_window(field_, data)
    speed = max(float(speed), 1e-300)
    steps = int(math.ceil(float(t_max) * speed / (cfl * dx)))
    if t_max > 0:
        steps = max(1, steps)
    dt = float(t_max) / steps if steps else 0.0
    if dt * speed / dx > 0.5 + 1e-12:
        raise CFLViolation(f"dt*speed/dx = {dt * speed / dx} > 1/2")
    u = cell_averages(data, edges)
    times = sorted(set(float(t) for t in (times or [])) | {float(t_max)})
    out_steps = {min(steps, int(round(t / dt))) if dt else 0: t for t in times}
    saved_t, saved_u = [], []
    if 0 in out_steps:
        saved_t.append(out_steps[0])
        saved_u.append(u.copy())
    groups_l = [(j, np.nonzero(left_cell == j)[0]) for j in range(field_.n_cells)]
    groups_r = [(j, np.nonzero(right_cell == j)[0]) for j in range(field_.n_cells)]
    groups_l = [(j, ix) for j, ix in groups_l if len(ix)]
    groups_r = [(j, ix) for j, ix in groups_r if len(ix)]
    A = np.empty(n + 1)
    B = np.empty(n + 1)
    for step in range(1, steps + 1):
        ue = np.concatenate(([u[0]], u, [u[-1]]))
        ul, ur = ue[:-1], ue[1:]
        for j, ix in groups_l:
            A[ix] = tab.eval(j, np.maximum(ul[ix], tab.hi[j]))
        for j, ix in groups_r:
            B[ix] = tab.eval(j, np.minimum(ur[ix], tab.lo[j]))
        F = np.maximum(A, B)
        u = u - (dt / dx) * (F[1:] - F[:-1])
        if step in out_steps:
            saved_t.append(out_steps[step])
            saved_u.append(u.copy())
    return GridSolution(centers, dx, dt, saved_t, saved_u, edges)


def l1_to_piecewise(sol: GridSolution, u: np.ndarray, w: PiecewiseConstantFunction,
                    a=None, b=None) -> float:
    """Exact L1 distance between mesh averages and an exact piecewise-constant profile."""
    edges = sol.edges
    a = edges[0] if a is None else a
    b = edges[-1] if b is None else b
    jumps = np.asarray([float(x) for x in w.jumps])
    vals = np.asarray([float(v) for v in w.values])
    pts = np.unique(np.concatenate((edges, jumps, [a, b])))
    pts = pts[(pts >= a) & (pts <= b)]
    mid = 0.5 * (pts[:-1] + pts[1:])
    wv = vals[np.searchsorted(jumps, mid, side="right")]
    ci = np.clip(np.searchsorted(edges, mid, side="right") - 1, 0, len(u) - 1)
    return float(np.sum(np.abs(u[ci] - wv) * np.diff(pts)))
