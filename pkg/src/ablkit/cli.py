"""ablkit command line.

Exit codes: 0 success, 2 parse error, 3 validation error, 4 I/O error,
5 domain error.
"""
from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from . import serialize as ser
from .abl import counterfactual_assignment
from .cycles import cycle_instance, noncontextual_bound
from .errors import AblkitError, ParseError, ValidationError
from .hilbert import PVM, StateVector
from .montecarlo import SimConfig, verify_abl
from .scan import (
    ConjectureWarning,
    SphereGrid,
    check_conjecture,
    constrained_max,
    paradox_search,
    resolve_workers,
    scan_postselection,
    scan_preselections,
)
from .scenarios import classify_sector, exclusive_pairs, three_box_scenario
from .serialize import ScenarioFile

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_IO, EXIT_DOMAIN = 0, 2, 3, 4, 5
DEFAULT_THRESHOLDS = (1.4, 1.5, 1.6, 1.7, 2.0)
KCBS_PRE = (0.0, 0.0, 1.0)


def _evaluate_scenario(sc: ScenarioFile, args) -> dict:
    labels = list(sc.labels) or [str(i) for i in range(len(sc.settings))]
    zetas = counterfactual_assignment(sc.two_state, sc.settings)
    projectors = [s.pi for s in sc.settings]
    pairs = exclusive_pairs(projectors)
    sector = classify_sector(sc.two_state,
                             [(projectors[i], projectors[j]) for i, j in pairs])
    out = {
        "labels": labels,
        "zetas": [ser.fmt(z) for z in zetas],
        "exclusive_pairs": [list(p) for p in pairs],
        "sector": str(sector),
    }
    if args.mc:
        cfg = SimConfig(args.samples, args.seed)
        out["mc"] = []
        for label, s in zip(labels, sc.settings):
            report = verify_abl(sc.two_state.pre, PVM.dichotomic(s.pi),
                                sc.two_state.post, cfg, workers=args.workers)
            out["mc"].append({"setting": label, "report": ser.report_dicts(report)})
    return out


def _print_scenario(out: dict, args) -> None:
    if args.json:
        sys.stdout.write(ser.dump_json(out))
        return
    for label, z in zip(out["labels"], out["zetas"]):
        print(f"zeta_{label} = {z:.9g}")
    print(f"exclusive pairs: {out['exclusive_pairs']}")
    print(f"sector: {out['sector']}")
    for block in out.get("mc", []):
        print(f"Monte Carlo check, setting {block['setting']}:")
        for r in block["report"]:
            sd = "inf" if r["sigma_distance"] is None else f"{r['sigma_distance']:.9g}"
            print(f"  outcome {r['outcome']}: zeta={r['zeta']:.9g} freq={r['freq']:.9g} "
                  f"se={r['se']:.9g} sigma={sd}{'  FLAG' if r['flag'] else ''}")


def cmd_three_box(args) -> int:
    ts, settings = three_box_scenario()
    sc = ScenarioFile(ts, settings, ("A", "B"))
    _print_scenario(_evaluate_scenario(sc, args), args)
    return EXIT_OK


def cmd_abl(args) -> int:
    sc = ser.load_scenario(args.scenario)
    _print_scenario(_evaluate_scenario(sc, args), args)
    return EXIT_OK


def cmd_kcbs_scan(args) -> int:
    inst = cycle_instance(args.n)
    grid = SphereGrid(args.theta_steps, args.phi_steps, max(1, args.phases))
    pre = StateVector(KCBS_PRE)
    scan = scan_postselection(pre, inst, grid, args.workers)
    best = constrained_max(scan, args.refine)
    thresholds = args.k_min or list(DEFAULT_THRESHOLDS)
    summary = ser.scan_summary(scan, best, thresholds, args.n)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = out.with_suffix(".csv"), out.with_suffix(".json")
    witness_path = out.with_suffix(".witness.json")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConjectureWarning)
        holds = check_conjecture(best, args.n, witness_path)
    summary["within_noncontextual_bound"] = holds
    summary["witness_file"] = None if holds else str(witness_path)
    if holds and witness_path.exists():  # stale file from an earlier run
        witness_path.unlink()
    if args.pre_steps:
        pre_grid = SphereGrid(args.pre_steps, max(4, 2 * args.pre_steps))
        coarse = SphereGrid(max(2, args.theta_steps // 8), max(4, args.phi_steps // 8))
        rows = scan_preselections(inst, pre_grid, coarse, args.workers)
        summary["pre_scan"] = [
            {"pre_theta": ser.fmt(r.pre_theta), "pre_phi": ser.fmt(r.pre_phi),
             "k_grid": ser.fmt(r.k_grid), "theta": ser.fmt(r.theta), "phi": ser.fmt(r.phi)}
            for r in rows]

    ser.write_scan_csv(scan, csv_path)
    json_path.write_text(ser.dump_json(summary))

    if args.json:
        sys.stdout.write(ser.dump_json(summary))
    else:
        print(f"n = {args.n}, grid {grid.theta_steps}x{grid.phi_steps}"
              + (f", phases {grid.phase_steps}^2" if grid.phase_steps > 1 else ""))
        print(f"feasible cells: {summary['feasible_cells']} of {summary['cells']}")
        print(f"k_star = {best.k_star:.9g} at theta = {best.theta_star:.9g}, "
              f"phi = {best.phi_star:.9g} (grid max {best.grid_k:.9g})")
        print(f"noncontextual bound: {noncontextual_bound(args.n)}")
        for rc in summary["region_counts"]:
            print(f"  K > {rc['k_min']:.9g}: {rc['count']} cells")
        for w in caught:
            print(f"WARNING: {w.message}")
        print(f"wrote {csv_path} and {json_path}")
    return EXIT_OK


def cmd_paradox_search(args) -> int:
    inst = cycle_instance(args.n)
    i, j = args.pair
    if not (0 <= i < inst.n and 0 <= j < inst.n):
        raise ValidationError(f"pair indices must lie in [0, {inst.n})")
    grid = SphereGrid(args.theta_steps, args.phi_steps)
    witnesses = paradox_search(StateVector(KCBS_PRE), inst.projectors[i],
                               inst.projectors[j], grid, args.workers)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    ser.write_witness_csv(witnesses, out, (f"zeta_{i}", f"zeta_{j}"))
    best = max((w.total for w in witnesses), default=None)
    print(f"{len(witnesses)} witnesses for pair ({i}, {j}) on a "
          f"{grid.theta_steps}x{grid.phi_steps} grid"
          + (f"; largest sum {best:.9g}" if best is not None else ""))
    print(f"wrote {out}")
    return EXIT_OK


def _odd_n(text):
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid n {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ablkit",
        description="ABL retrodiction, PPS paradoxes and exclusivity-constrained KCBS scans.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_workers(p):
        p.add_argument("--workers", type=int, default=None,
                       help="parallel workers (default: $ABLKIT_WORKERS or CPU count)")

    def add_mc(p):
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--mc", action="store_true",
                       help="cross-check each setting by sequential-measurement simulation")
        p.add_argument("--samples", type=int, default=100_000)
        p.add_argument("--seed", type=int, default=0)
        add_workers(p)

    p = sub.add_parser("three-box", help="the three-box paradox")
    add_mc(p)
    p.set_defaults(func=cmd_three_box)

    p = sub.add_parser("abl", help="evaluate a scenario JSON file")
    p.add_argument("scenario", type=Path)
    add_mc(p)
    p.set_defaults(func=cmd_abl)

    p = sub.add_parser("kcbs-scan", help="exclusivity-constrained scan of K")
    p.add_argument("--n", type=_odd_n, default=5, help="odd cycle length (default 5)")
    p.add_argument("--theta-steps", type=int, default=512)
    p.add_argument("--phi-steps", type=int, default=1024)
    p.add_argument("--k-min", type=float, action="append",
                   help="region threshold; repeatable (default 1.4 1.5 1.6 1.7 2.0)")
    p.add_argument("--refine", type=int, default=40, help="refinement halvings")
    p.add_argument("--phases", type=int, default=0,
                   help="relative-phase steps per phase (0 = real post-selections)")
    p.add_argument("--pre-steps", type=int, default=0,
                   help="also scan pre-selections on a coarse theta grid of this size")
    p.add_argument("--out", default="kcbs_scan",
                   help="output prefix; writes PREFIX.csv and PREFIX.json")
    p.add_argument("--json", action="store_true")
    add_workers(p)
    p.set_defaults(func=cmd_kcbs_scan)

    p = sub.add_parser("paradox-search", help="grid search for logical paradoxes")
    p.add_argument("--pair", type=int, nargs=2, required=True, metavar=("I", "J"))
    p.add_argument("--n", type=_odd_n, default=5)
    p.add_argument("--theta-steps", type=int, default=256)
    p.add_argument("--phi-steps", type=int, default=512)
    p.add_argument("--out", default="witnesses.csv")
    add_workers(p)
    p.set_defaults(func=cmd_paradox_search)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.workers = resolve_workers(args.workers)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except AblkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
