"""Command-line front end.

Exit codes: 0 success or PASS, 2 verification FAIL, 1 usage or I/O error,
3 numerical failure (the error class name is printed).
"""

from __future__ import annotations

import argparse
import json
import sys as _sys

import numpy as np

from . import io
from .errors import SelfsimError
from .euler import mach_geometry
from .generator import PRESETS, Mutation, mutate, preset
from .profile import dumps, saltus_decompose, sample_csv, sector_layout, total_variation
from .riemann import solve_riemann
from .system import describe
from .verifier import classify_structure, structure_table, verify_profile
from .waves import curves_csv, tabulate_curves

EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(_sys.stderr)
        raise UsageError(message)


def _system(args):
    if getattr(args, "system", None):
        return io.system_from_config(io.read_json(args.system))
    return None


def _emit(text: str, out: str | None) -> None:
    if out:
        io.write_text(out, text)
    else:
        _sys.stdout.write(text)


def _parse_range(text: str) -> tuple[float, float]:
    try:
        a, b = (float(x) for x in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"--s-range expects a:b, got {text!r}") from exc
    return a, b


def cmd_curves(args) -> int:
    sys = _system(args)
    a, b = _parse_range(args.s_range)
    if not 0 <= args.family < sys.dim:
        raise UsageError(f"family must be in 0..{sys.dim - 1}")
    V0 = io.state_from_doc(sys, io.read_json(args.state)) if args.state else sys.V_bar
    rows = tabulate_curves(sys, V0, args.family, np.linspace(a, b, args.n))
    _emit(curves_csv(sys, rows, args.family), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    sys = _system(args)
    V_L = io.state_from_doc(sys, io.read_json(args.left))
    V_R = io.state_from_doc(sys, io.read_json(args.right))
    profile = solve_riemann(sys, V_L, V_R)
    _emit(dumps(io.profile_document(profile, sys)), args.out)
    return EXIT_OK


def _load(args):
    return io.load_profile(args.profile, _system(args))


def cmd_verify(args) -> int:
    profile, sys = _load(args)
    report = verify_profile(sys, profile, n_pairs=args.n_pairs, seed=args.seed, halfplane=args.halfplane)
    print(report.table())
    if report.reasons:
        print("reasons: " + ", ".join(report.reasons))
    if args.json:
        io.write_json(args.json, report.to_dict())
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_classify(args) -> int:
    profile, sys = _load(args)
    verdict = classify_structure(sys, sector_layout(sys), profile)
    print(structure_table(verdict))
    if args.json:
        io.write_json(args.json, verdict.to_dict())
    return EXIT_OK if verdict.passed else EXIT_FAIL


def cmd_generate(args) -> int:
    sys = _system(args) or io.system_from_config({})
    layout = sector_layout(sys)
    profile = preset(sys, layout, args.preset, n=args.n, seed=args.seed)
    if args.mutate:
        profile = mutate(sys, profile, args.mutate, index=args.index)
    _emit(dumps(io.profile_document(profile, sys)), args.out)
    if args.csv:
        bp = profile.breakpoints
        lo, hi = (float(bp[0]) - 0.05, float(bp[-1]) + 0.05) if bp.shape[0] else (-1.0, 1.0)
        io.write_text(args.csv, sample_csv(profile, np.linspace(lo, hi, 1001)))
    return EXIT_OK


def cmd_decompose(args) -> int:
    profile, sys = _load(args)
    dec = saltus_decompose(profile)
    doc = dec.to_dict()
    doc["total_variation"] = total_variation(profile)
    _emit(dumps(doc), args.out)
    return EXIT_OK


def cmd_sectors(args) -> int:
    sys = _system(args)
    layout = sector_layout(sys)
    info = describe(sys)
    doc = {
        "schema": "selfsim/1",
        "kind": "sectors",
        "delta_s": layout.delta_s,
        "delta_L": layout.delta_L,
        "sectors": [
            {"family": a, "center": layout.centers[a], "delta": layout.deltas[a],
             "interval": list(layout.interval(a)), "kind": layout.kinds[a].value,
             "forward_halfplane": info["fields"][a]["forward_halfplane"]}
            for a in range(sys.dim)
        ],
    }
    if sys.raw.params.get("model") == "euler":
        doc["mach_angle"] = mach_geometry(float(sys.raw.params["mach"])).mu
    if args.json:
        _emit(dumps(doc), None)
        return EXIT_OK
    print("family  center        delta         interval                      kind  forward")
    for s in doc["sectors"]:
        iv = f"({s['interval'][0]:+.8f}, {s['interval'][1]:+.8f})"
        print(f"{s['family']:<7} {s['center']:+.8f}  {s['delta']:.8f}    {iv:<29} {s['kind']:<5} {s['forward_halfplane']}")
    print(f"delta_s = {layout.delta_s:.8g}")
    print(f"delta_L = {layout.delta_L:.8g}")
    if "mach_angle" in doc:
        print(f"mach angle mu = {doc['mach_angle']:.7f} rad")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="selfsim", description="Steady self-similar solutions of 2-d systems near a supersonic state.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("curves", help="tabulate shock and simple-wave curves")
    c.add_argument("--system", required=True)
    c.add_argument("--family", type=int, required=True)
    c.add_argument("--s-range", required=True, help="a:b")
    c.add_argument("--n", type=int, default=33)
    c.add_argument("--state", help="start state document (default V_bar)")
    c.add_argument("--out")
    c.set_defaults(func=cmd_curves)

    c = sub.add_parser("solve", help="solve a forward Riemann problem")
    c.add_argument("--system", required=True)
    c.add_argument("--left", required=True)
    c.add_argument("--right", required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_solve)

    for name, func, help_ in (("verify", cmd_verify, "weak-form and entropy residuals plus the structural verdict"),
                              ("classify", cmd_classify, "structural verdict per sector")):
        c = sub.add_parser(name, help=help_)
        c.add_argument("--system", help="system document (default: the one embedded in the profile)")
        c.add_argument("--profile", required=True)
        c.add_argument("--json", help="also write the report as JSON")
        if name == "verify":
            c.add_argument("--halfplane", choices=("x>0", "x<0"))
            c.add_argument("--n-pairs", type=int, default=None)
            c.add_argument("--seed", type=int, default=0)
        c.set_defaults(func=func)

    c = sub.add_parser("generate", help="fixture factory")
    c.add_argument("--preset", required=True, choices=PRESETS)
    c.add_argument("--n", type=int)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--system", help="system document (default Euler, Mach 2, eps 0.05)")
    c.add_argument("--mutate", choices=[m.value for m in Mutation])
    c.add_argument("--index", type=int, default=-1)
    c.add_argument("--csv", help="also write a sampled (xi, V) table")
    c.add_argument("--out")
    c.set_defaults(func=cmd_generate)

    c = sub.add_parser("decompose", help="saltus decomposition, total variation, Lipschitz estimate")
    c.add_argument("--system")
    c.add_argument("--profile", required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_decompose)

    c = sub.add_parser("sectors", help="sector layout of a system")
    c.add_argument("--system", required=True)
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_sectors)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"selfsim: error: {exc}", file=_sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError, ValueError, KeyError) as exc:
        print(f"selfsim: error: {exc}", file=_sys.stderr)
        return EXIT_USAGE
    except SelfsimError as exc:
        print(f"selfsim: {type(exc).__name__}: {exc}", file=_sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
