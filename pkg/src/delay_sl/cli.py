"""Command-line entry point: ``delay-sl <subcommand> [options]``.

Exit status is 0 on success or a true verdict, 2 on a false verdict and 1
on any error (including usage errors).
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io as dio
from .charfn import ProblemSpec, char_fn_grid
from .discover import (DISCOVER_NODES, coefficient_grid, polish_candidate, scan_kernels,
                       to_operator)
from .numerics.zeros import Rectangle
from .operator import (DEFAULT_NODES, DEFAULT_TOL, builtin_eigenpair, check_delay,
                       eigen_residual, eigenpairs, rescale_to_unit)
from .potential import PiecewisePotential, random_potential
from .spectrum import (DEFAULT_GRID, INVARIANCE_THRESHOLD, isospec_check, locate_spectrum,
                       make_family, negative_control, verify_theorem_chain)

FAMILY_CHOICES = ("B0", "B1", "B0-smooth", "negative-control")
GLOBAL_DEFAULTS = {"a": "0.35pi", "nodes": None, "tol": DEFAULT_TOL, "out": None,
                   "format": "json", "seed": 0, "config": None}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        raise UsageError(message)


def _common() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--a", help="delay, e.g. 0.35pi or pi/3 (default 0.35pi)")
    g.add_argument("--nodes", type=int, help=f"quadrature nodes (default {DEFAULT_NODES})")
    g.add_argument("--tol", type=float, help=f"verification tolerance (default {DEFAULT_TOL:g})")
    g.add_argument("--out", help="write output to this path instead of stdout")
    g.add_argument("--format", choices=("csv", "json"), help="output format (default json)")
    g.add_argument("--seed", type=int, help="seed for randomised potentials (default 0)")
    g.add_argument("--config", help="JSON file supplying defaults for any option")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="delay-sl", description="Iso-bispectral families for "
                     "Sturm-Liouville operators with constant delay.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    parser.commands = sub.choices

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_, description=help_)

    p = add("verify-eigenpair", "check the closed-form eigenpair and its mean")
    p.add_argument("--nu", type=int, choices=(0, 1), default=1)

    p = add("build-potential", "emit a family member (JSON descriptor or sampled CSV)")
    p.add_argument("--family", choices=FAMILY_CHOICES + ("random",), default="B1")
    p.add_argument("--alpha", default="1")
    p.add_argument("--density", type=int, default=1001)

    for name, help_ in (("charfn", "evaluate characteristic functions on a grid"),
                        ("spectrum", "locate eigenvalues in a rho-plane window")):
        p = add(name, help_)
        p.add_argument("--potential", help="potential JSON written by build-potential")
        p.add_argument("--family", choices=FAMILY_CHOICES + ("zero",), default="zero")
        p.add_argument("--alpha", default="0")
        p.add_argument("--nu", type=int, choices=(0, 1), default=0)
        p.add_argument("--j", type=int, choices=(0, 1), default=1)
        if name == "charfn":
            p.add_argument("--lambdas", default=",".join(str(x) for x in DEFAULT_GRID))
            p.add_argument("--method", choices=("ode", "repr", "both"), default="both")
        else:
            p.add_argument("--window", default="-0.3,5.3,-0.7,0.7",
                           help="lo_re,hi_re,lo_im,hi_im in the rho-plane")
            p.add_argument("--method", choices=("ode", "repr"), default="ode")

    p = add("isospec-check", "alpha-invariance verdict for a family")
    p.add_argument("--family", choices=FAMILY_CHOICES, default="B1")
    p.add_argument("--alphas", default="0,1,-2,3+4i")
    p.add_argument("--lambdas", default=",".join(str(x) for x in DEFAULT_GRID))
    p.add_argument("--threshold", type=float, default=INVARIANCE_THRESHOLD)

    p = add("negative-control", "constant-kernel family that is not iso-bispectral")
    p.add_argument("--alphas", default="0,1")
    p.add_argument("--lambdas", default=",".join(str(x) for x in DEFAULT_GRID))

    p = add("theorem-chain", "per-hypothesis report for one family member")
    p.add_argument("--family", choices=FAMILY_CHOICES, default="B1")
    p.add_argument("--alpha", default="1")
    p.add_argument("--lambdas", default=",".join(str(x) for x in DEFAULT_GRID))

    p = add("discover", "scan cosine-series kernels for zero-mean eigenfunctions")
    p.add_argument("--dim", type=int, default=2, help="number of cosine coefficients (<= 8)")
    p.add_argument("--levels", type=int, default=3, help="grid points per coefficient")
    p.add_argument("--base", choices=("none", "chi1"), default="none")
    p.add_argument("--top", type=int, default=10, help="candidates to report")
    p.add_argument("--polish", type=int, default=0, help="polish the best N candidates")
    p.add_argument("--export-a", help="also verify the best candidate at this delay")
    return parser


def _explicit(parser, args, argv) -> set:
    """Destinations whose option string appears on the command line."""
    tokens = [t.split("=", 1)[0] for t in argv if t.startswith("--")]
    sub = parser.commands[args.command]
    return {act.dest for act in sub._actions if set(act.option_strings) & set(tokens)}


def _config_value(action, key, val):
    """Coerce a config value the way argparse would coerce the flag."""
    if action.type is not None and val is not None:
        try:
            val = action.type(val)
        except (TypeError, ValueError):
            raise UsageError(f"config key {key!r}: invalid value {val!r}") from None
    if action.choices is not None and val not in action.choices:
        raise UsageError(f"config key {key!r}: {val!r} not in {list(action.choices)}")
    return val


def _apply_config(args, parser, argv):
    cfg = {}
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config!r}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
    actions = {act.dest: act for act in parser.commands[args.command]._actions}
    known = set(vars(args)) - {"command", "config"}
    explicit = _explicit(parser, args, argv)
    for key, val in cfg.items():
        dest = key.replace("-", "_")
        if dest not in known:
            raise UsageError(f"unknown config key {key!r}")
        if dest not in explicit:
            setattr(args, dest, _config_value(actions[dest], key, val))
    for key, val in GLOBAL_DEFAULTS.items():
        if getattr(args, key) is None:
            setattr(args, key, val)
    try:
        args.a = check_delay(dio.parse_delay(args.a))
        args.nodes = DEFAULT_NODES if args.nodes is None else int(args.nodes)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _emit(args, payload: dict, header=None, rows=None) -> None:
    if args.format == "csv" and header is not None:
        text = dio.csv_text(header, rows)
    else:
        text = dio.dumps(payload)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _potential(args) -> PiecewisePotential | None:
    if getattr(args, "potential", None):
        with open(args.potential) as fh:
            return PiecewisePotential.from_dict(json.load(fh))
    if args.family == "zero":
        return None
    fam = make_family(args.family, args.a, args.nodes, args.tol)
    return fam.member(dio.parse_complex(args.alpha))


# -- subcommands ---------------------------------------------------------------

def cmd_verify_eigenpair(args) -> int:
    nu = args.nu
    op, p = builtin_eigenpair(args.a, nu, args.tol, verify=False)
    grid = op.core().grid(args.nodes).nodes
    res = eigen_residual(op, p.e, p.eta, grid)
    target = p.eta
    pairs = eigenpairs(op, args.nodes, 4, args.tol)
    best = min(pairs, key=lambda q: abs(q.eta - target))
    unit = rescale_to_unit(op, p, nu, args.tol)
    mean_ok = abs(p.mean) < 1e-12 if nu == 1 else True
    ok = res < args.tol and mean_ok and abs(best.eta - target) < args.tol
    report = {"a": args.a, "nu": nu, "nodes": args.nodes, "eta": target,
              "closed_form_residual": res, "mean": p.mean,
              "discrete_eta": best.eta, "discrete_eta_error": abs(best.eta - target),
              "discrete_multiplicity": best.multiplicity,
              "discrete_residual": best.residual,
              "unit_interval_residual": unit.residual,
              "ok": ok}
    rows = [(k, v) for k, v in sorted(report.items()) if not isinstance(v, bool)]
    _emit(args, report, ("quantity", "value"), rows)
    return 0 if ok else 2


def cmd_build_potential(args) -> int:
    if args.family == "random":
        q = random_potential(args.a, np.random.default_rng(args.seed))
    else:
        fam = make_family(args.family, args.a, args.nodes, args.tol)
        q = fam.member(dio.parse_complex(args.alpha))
    x, re_, im_ = q.sample(args.density)
    _emit(args, q.to_dict(), ("x", "re_q", "im_q"), zip(x, re_, im_))
    return 0


def cmd_charfn(args) -> int:
    q = _potential(args)
    a = q.a if q is not None else args.a
    spec = ProblemSpec(args.nu, args.j, a, q)
    lams = dio.parse_complex_list(args.lambdas)
    samples = char_fn_grid(spec, lams, args.method)
    payload = {"problem": {"nu": args.nu, "j": args.j, "a": a}, "method": args.method,
               "samples": [{"lambda": s.lam, "value": s.value,
                            "normalization": s.normalization, "method": s.method,
                            "discrepancy": s.discrepancy} for s in samples]}
    header = ("re_lambda", "im_lambda", "re_delta", "im_delta", "normalization", "method")
    _emit(args, payload, header, [s.row() for s in samples])
    return 0


def cmd_spectrum(args) -> int:
    q = _potential(args)
    a = q.a if q is not None else args.a
    spec = ProblemSpec(args.nu, args.j, a, q)
    w = dio.parse_real_list(args.window)
    if len(w) != 4:
        raise UsageError("--window needs four numbers")
    report = locate_spectrum(spec, Rectangle(*w), args.method)
    _emit(args, report.to_dict(), ("re_lambda", "im_lambda", "multiplicity", "residual"),
          report.rows())
    return 0 if report.consistent else 2


def cmd_isospec(args) -> int:
    fam = make_family(args.family, args.a, args.nodes, args.tol)
    v = isospec_check(fam, dio.parse_complex_list(args.alphas),
                      dio.parse_real_list(args.lambdas), args.threshold)
    d = v.to_dict()
    _emit(args, d, ("j", "lambda", "deviation"),
          [(p["j"], p["lambda"], p["deviation"]) for p in d["per_point"]])
    return 0 if v.verdict else 2


def cmd_negative_control(args) -> int:
    r = negative_control(args.a, dio.parse_complex_list(args.alphas),
                         dio.parse_real_list(args.lambdas), args.nodes, args.tol)
    rows = [(k, v) for k, v in sorted(r.items()) if isinstance(v, float)]
    _emit(args, r, ("quantity", "value"), rows)
    return 0 if r["verdict"] else 2


def cmd_theorem_chain(args) -> int:
    fam = make_family(args.family, args.a, args.nodes, args.tol)
    r = verify_theorem_chain(fam, dio.parse_complex(args.alpha),
                             dio.parse_real_list(args.lambdas))
    rows = [(k, l["status"], l["value"]) for k, l in r["links"].items()]
    _emit(args, r, ("link", "status", "value"), rows)
    return 0 if r["all_pass"] else 2


def cmd_discover(args) -> int:
    if not 1 <= args.dim <= 8:
        raise UsageError("--dim must be between 1 and 8")
    base = None if args.base == "none" else args.base
    nodes = args.nodes if args.nodes != DEFAULT_NODES else DISCOVER_NODES
    grid = coefficient_grid(args.dim, args.levels)
    if base is not None:
        grid = [tuple(0.0 for _ in range(args.dim))] + grid
    cands = scan_kernels(grid, nodes, base=base)[: args.top]
    polished = [polish_candidate(c, nodes) for c in cands[: args.polish]
                if c.residual <= 1e-6]
    payload = {"nodes": nodes, "base": args.base, "candidates": [c.to_dict() for c in cands],
               "polished": [c.to_dict() for c in polished]}
    if args.export_a and (polished or cands):
        best = min(polished or cands, key=lambda c: c.objective)
        op, pair = to_operator(best, dio.parse_delay(args.export_a))
        payload["export"] = {"a": op.a, "h": op.h.to_dict(), "eta": pair.eta,
                             "residual": pair.residual, "verified": pair.verified}
    rows = [(str(list(c.coefficients)), c.eta, c.mean, c.residual) for c in cands]
    _emit(args, payload, ("coefficients", "eta", "mean", "residual"), rows)
    return 0


COMMANDS = {"verify-eigenpair": cmd_verify_eigenpair, "build-potential": cmd_build_potential,
            "charfn": cmd_charfn, "spectrum": cmd_spectrum, "isospec-check": cmd_isospec,
            "negative-control": cmd_negative_control, "theorem-chain": cmd_theorem_chain,
            "discover": cmd_discover}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        argv = sys.argv[1:] if argv is None else list(argv)
        args = parser.parse_args(argv)
        _apply_config(args, parser, argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"delay-sl: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # reported, never a traceback
        print(f"delay-sl: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
