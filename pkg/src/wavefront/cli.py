"""Command-line entry point: ``wavefront <subcommand> ...``.

Exit codes: 0 success, 1 check failed, 2 bad input or config, 3 runtime
invariant violation or other solver failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import fileio
from .diagnostics import adapted_entropy_report, entropy_report_fronts, total_variation
from .errors import ConfigError, WavefrontError
from .flux_core import DEFAULT_TOL, complete_breakpoints, complete_field
from .fvref import godunov_solve
from .riemann import classical_riemann, interface_riemann
from .scenarios import (
    build_counterexample1,
    counterexample2_setup,
    pl_cex1_quantities,
    predict_counterexample1,
    predict_counterexample2,
)
from .tracker import init_state, run

log = logging.getLogger("wavefront")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _setup_logging():
    level = os.environ.get("WAVEFRONT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _prepared(path):
    sc = fileio.load_scenario(path)
    fld = sc.field
    if sc.complete:
        fld = complete_field(fld, sc.data.values)
    return sc, fld


def _window(sc, u_list):
    if sc.domain is not None:
        return sc.domain
    xs = [float(x) for u in u_list for x in u.jumps] + [float(z) for z in sc.field.interfaces]
    if not xs:
        return (-1.0, 1.0)
    return (min(xs) - 1.0, max(xs) + 1.0)


def _solve_one(path, out, budget):
    sc, fld = _prepared(path)
    traj = run(init_state(fld, sc.data), sc.tmax, event_budget=budget)
    out = Path(out)
    snaps = [traj.sample(t) for t in sc.snapshots]
    a, b = _window(sc, snaps)
    rows = []
    for t, u in zip(sc.snapshots, snaps):
        for l, r, v in u.pieces(a, b):
            rows.append((t, l, r, v))
    fileio.write_csv(out / "snapshots.csv", ["t", "x_left", "x_right", "u"], rows)
    fileio.write_jsonl(out / "events.jsonl", [e.to_json() for e in traj.events])
    fileio.write_csv(out / "fronts.csv",
                     ["id", "x0", "t0", "speed", "t_death", "u_left", "u_right", "kind"],
                     [(f.id, f.x0, f.t0, f.speed, "" if f.death is None else f.death,
                       f.u_left, f.u_right, f.kind) for f in traj.fronts])
    diag = [(0, traj.tv0, traj.initial_moving, "initial")]
    diag += [(e.t, e.tv_after, e.moving_after, e.category) for e in traj.events]
    fileio.write_csv(out / "diagnostics.csv", ["t", "tv_psi_pi", "moving_fronts", "category"],
                     diag)
    fileio.write_csv(out / "summary.csv", ["t", "tv_u", "mass", "x_min", "x_max"],
                     [(t, total_variation(u), u.integral(a, b), a, b)
                      for t, u in zip(sc.snapshots, snaps)])
    return len(traj.events)


def cmd_solve(args) -> int:
    paths = args.scenario
    outs = [Path(args.out)] if len(paths) == 1 else [Path(args.out) / Path(p).stem for p in paths]
    if args.jobs > 1 and len(paths) > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            counts = list(ex.map(_solve_one, paths, outs, [args.event_budget] * len(paths)))
    else:
        counts = [_solve_one(p, o, args.event_budget) for p, o in zip(paths, outs)]
    for p, n in zip(paths, counts):
        log.info("%s: %d events", p, n)
    return 0


def cmd_riemann(args) -> int:
    tol = DEFAULT_TOL
    left = fileio.flux_from_obj(fileio.parse_json_arg(args.left), tol)
    if args.right is None:
        fan = classical_riemann(left, args.ul, args.ur)
    else:
        right = fileio.flux_from_obj(fileio.parse_json_arg(args.right), tol)
        fan = interface_riemann(left, right, args.ul, args.ur)
    print(fileio.dumps(fan.to_json()))
    return 0


def cmd_check(args) -> int:
    sc, fld = _prepared(args.scenario)
    if args.fronts:
        items = fileio.read_json(args.fronts)
        fronts = [(fr["x"], fr["speed"], fr["u_left"], fr["u_right"], fr.get("kind", "shock"))
                  for fr in items]
        rep = entropy_report_fronts(fld, fronts)
    else:
        traj = run(init_state(fld, sc.data), sc.tmax, event_budget=args.event_budget)
        rep = adapted_entropy_report(fld, traj)
    print(fileio.dumps(rep.to_json()))
    return 0 if rep.passed else 1


def cmd_complete(args) -> int:
    sc = fileio.load_scenario(args.scenario)
    pts = complete_breakpoints(sc.field, sc.data.values, mode=args.mode)
    print(fileio.dumps({"grid": [float(p) for p in pts], "size": len(pts)}))
    return 0


def cmd_fvref(args) -> int:
    sc, fld = _prepared(args.scenario)
    if sc.domain is None:
        raise ConfigError("fvref needs a domain {xmin, xmax} in the scenario")
    sol = godunov_solve(fld, sc.data, args.dx, float(sc.tmax), sc.domain,
                        times=[float(t) for t in sc.snapshots], cfl=args.cfl)
    fileio.write_csv(args.out, ["t", "x", "u_avg"], sol.rows())
    return 0


def _cex1(args):
    blocks, bound = predict_counterexample1(args.N, args.delta)
    fld, data = build_counterexample1(args.N, args.delta, args.grid_refine)
    traj = run(init_state(fld, data), 1.0, event_budget=args.event_budget)
    u = traj.sample(1.0)
    hits = {}
    for e in traj.events:
        if e.interface is not None and e.interface % 2 == 0:
            hits.setdefault(e.interface // 2 + 1, e.t)
    hits.setdefault(1, 0.0)  # block 1 starts on its interface
    out = Path(args.out)
    fileio.write_csv(out / "predictions.csv", ["n", "a_n", "lambda_n", "t_n", "b_n", "xi_n"],
                     [(b.n, b.a, b.lam, b.t_hit, b.b, b.xi) for b in blocks])
    meas, sums, s, ps = [], [], 0.0, 0.0
    for b in blocks:
        q = pl_cex1_quantities(fld, b)
        jump = float(u(b.z))
        s += jump
        ps += b.n ** -(0.875 + args.delta / 2)
        meas.append((b.n, hits.get(b.n, ""), jump, q["b_pl"]))
        sums.append((b.n, s, ps))
    fileio.write_csv(out / "measured.csv", ["n", "hit_time", "jump", "b_pl"], meas)
    fileio.write_csv(out / "partial_sums.csv", ["n", "measured_tv", "lower_bound"], sums)
    log.info("counterexample 1: sum of jumps %.6g vs bound %.6g", s, bound)


def _cex2(args):
    setup = counterexample2_setup(args.N, args.grid_refine, args.floor)
    traj = run(init_state(setup.field, setup.data), Fraction(1), event_budget=args.event_budget)
    u = traj.sample(Fraction(1))
    pred = predict_counterexample2(args.N, setup.n0)
    out = Path(args.out)
    fileio.write_csv(out / "predictions.csv",
                     ["m", "a_m", "J", "floor", "characteristic_jump", "w_N"],
                     [(r["m"], r["a_m"], r["J"], r["floor"], r["characteristic_jump"],
                       pred["w_N"]) for r in pred["rows"]])
    meas, sums, s = [], [], 0.0
    for r in pred["rows"]:
        a = setup.cells[r["m"]][0]
        jump = float(u.left_limit(a) - u(a))
        s += abs(jump)
        meas.append((r["m"], jump, jump * r["m"] ** (11 / 12)))
        sums.append((r["m"], s))
    fileio.write_csv(out / "measured.csv", ["m", "jump", "jump_times_m_11_12"], meas)
    fileio.write_csv(out / "partial_sums.csv", ["m", "sum_jumps"], sums)


def cmd_counterexample(args) -> int:
    (_cex1 if args.which == "1" else _cex2)(args)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wavefront", description="Exact front tracking for discontinuous-flux "
                                              "scalar conservation laws.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="track fronts and write snapshots, events, diagnostics")
    s.add_argument("--scenario", action="append", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--event-budget", type=int, default=10 ** 7)
    s.set_defaults(fn=cmd_solve)

    r = sub.add_parser("riemann", help="solve one Riemann problem and print the fan")
    r.add_argument("--left", required=True, help="flux JSON {breaks, values} (left of x=0)")
    r.add_argument("--right", help="flux JSON right of x=0; omit for a single flux")
    r.add_argument("--ul", type=float, required=True)
    r.add_argument("--ur", type=float, required=True)
    r.set_defaults(fn=cmd_riemann)

    c = sub.add_parser("check", help="entropy report of a tracked run or a given front list")
    c.add_argument("--scenario", required=True)
    c.add_argument("--fronts", help="JSON list of {x, speed, u_left, u_right, kind}")
    c.add_argument("--event-budget", type=int, default=10 ** 7)
    c.set_defaults(fn=cmd_check)

    x = sub.add_parser("counterexample", help="reproduce a blow-up construction")
    x.add_argument("which", choices=["1", "2"])
    x.add_argument("--N", type=int, default=None)
    x.add_argument("--delta", type=float, default=0.2)
    x.add_argument("--grid-refine", type=int, default=64)
    x.add_argument("--floor", type=float, default=0.25)
    x.add_argument("--out", required=True)
    x.add_argument("--event-budget", type=int, default=10 ** 7)
    x.set_defaults(fn=cmd_counterexample)

    f = sub.add_parser("fvref", help="Godunov reference solution as CSV (t, x, u_avg)")
    f.add_argument("--scenario", required=True)
    f.add_argument("--dx", type=float, required=True)
    f.add_argument("--cfl", type=float, default=0.5)
    f.add_argument("--out", required=True)
    f.set_defaults(fn=cmd_fvref)

    k = sub.add_parser("complete", help="print the completed break-point grid")
    k.add_argument("--scenario", required=True)
    k.add_argument("--mode", choices=["cellwise", "global"], default="cellwise")
    k.set_defaults(fn=cmd_complete)
    return p


def run_command(argv=None) -> int:
    _setup_logging()
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "which", None) is not None and args.N is None:
            args.N = 30 if args.which == "1" else 17
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except WavefrontError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
