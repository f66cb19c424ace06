"""Command-line interface: bounds, region scans, tradeoff curves,
simulation, and analytic-vs-oracle verification.

Every run emits a provenance header (version, seed, config hash);
identical configurations produce byte-identical output bodies.  Exit
codes: 0 success, 2 usage or input validation, 3 verification failure,
4 domain error.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .adversary import EpsilonPair, LambdaDistribution, solve_lambda_distribution
from .errors import DomainError, SdiqracError, ValidationError
from .oracles import classical_enumeration, constrained_search, quantum_search
from .simulate import empirical_min_entropy, run, trial_log_to_csv
from .tradeoff import (
    convexify_F,
    curve,
    curve_header_json,
    curve_to_csv,
    envelope_G,
    threshold_witness,
)
from .witness import (
    classical_bound,
    feasibility_region,
    max_guess_probability,
    region_to_csv,
    witness_bounds,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VERIFY = 3
EXIT_DOMAIN = 4

#: Documented verification grid: bias axes linspace(0, EPS_CAP, GRID)^2,
#: every point of which is feasible.
DEFAULT_GRID = 5
DEFAULT_EPS_CAP = 0.12

_SUITE_TOL = {"classical": 1e-12, "quantum": 1e-4, "tradeoff": 1e-3}
_SUITE_BUDGET = {"quantum": 1_000_000, "tradeoff": 60_000}


def _round12(x):
    if x is None or isinstance(x, (bool, int, str)):
        return x
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else x
    return float(format(float(x), ".12g"))


def _config_hash(params: dict) -> str:
    canon = json.dumps(params, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def _provenance(args: argparse.Namespace) -> dict:
    params = {k: v for k, v in sorted(vars(args).items())
              if k not in ("func", "output") and v is not None}
    return {
        "version": __version__,
        "seed": getattr(args, "seed", None),
        "config_hash": _config_hash(params),
    }


def _provenance_comment(args: argparse.Namespace) -> str:
    p = _provenance(args)
    seed = p["seed"] if p["seed"] is not None else "none"
    return f"# sdiqrac {p['version']} seed={seed} config={p['config_hash']}"


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(payload: dict, args: argparse.Namespace) -> None:
    payload = dict(payload)
    payload["provenance"] = _provenance(args)
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.output)


def thread_count() -> int:
    """Worker count for data-parallel scans, from SDIQRAC_THREADS."""
    raw = os.environ.get("SDIQRAC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_points(fn, items):
    workers = thread_count()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _parse_eps(args: argparse.Namespace) -> EpsilonPair:
    return EpsilonPair(args.eps1, args.eps2)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_bounds(args: argparse.Namespace) -> int:
    wb = witness_bounds(_parse_eps(args))
    payload = {
        "eps1": wb.eps.eps1,
        "eps2": wb.eps.eps2,
        "t": _round12(wb.eps.t),
        "delta": _round12(wb.eps.delta),
        "sigma": _round12(wb.eps.sigma),
        "E_c": _round12(wb.E_c),
        "E_q": _round12(wb.E_q),
        "branch": wb.branch,
        "p_min": _round12(wb.p_min),
        "H_at_Eq": _round12(wb.H_at_Eq),
        "feasible": wb.feasible,
    }
    _emit_json(payload, args)
    return EXIT_OK


def cmd_region(args: argparse.Namespace) -> int:
    rows = feasibility_region(args.grid, args.eps_max)
    if args.format == "json":
        payload = {"rows": [
            {"eps1": r.eps1, "eps2": r.eps2, "feasible": r.feasible,
             "E_c": _round12(r.E_c), "E_q": _round12(r.E_q),
             "H_at_Eq": _round12(r.H_at_Eq)}
            for r in rows
        ]}
        _emit_json(payload, args)
    else:
        body = region_to_csv(rows)
        _emit(_provenance_comment(args) + "\n" + body, args.output)
    return EXIT_OK


def cmd_tradeoff(args: argparse.Namespace) -> int:
    c = curve(_parse_eps(args), n_points=args.points)
    if args.format == "json":
        payload = {
            "curve": json.loads(__import__("sdiqrac.tradeoff",
                                           fromlist=["curve_header_json"])
                                .curve_header_json(c)),
            "samples": [
                {"E": _round12(pt.E), "p": _round12(pt.p),
                 "H": _round12(pt.H), "case": pt.case,
                 "alpha_star": _round12(pt.alpha_star)}
                for pt in c.samples
            ],
        }
        _emit_json(payload, args)
    else:
        body = curve_to_csv(c, include_header=True)
        _emit(_provenance_comment(args) + "\n" + body, args.output)
    return EXIT_OK


def _load_distribution(args: argparse.Namespace) -> LambdaDistribution:
    if args.dist_file:
        with open(args.dist_file) as fh:
            return LambdaDistribution.from_json(fh.read())
    if args.dist == "uniform":
        return LambdaDistribution.uniform()
    return solve_lambda_distribution("parametrized", seed=args.dist_seed)


def cmd_simulate(args: argparse.Namespace) -> int:
    eps = _parse_eps(args)
    dist = _load_distribution(args)
    summary = run(eps, dist, strategy="optimal", trials=args.trials,
                  seed=args.seed, log_trials=args.log_trials is not None)
    if args.log_trials:
        with open(args.log_trials, "w") as fh:
            fh.write(trial_log_to_csv(summary))
    h_emp = empirical_min_entropy(summary, dist)
    wb = witness_bounds(eps)
    payload = summary.to_json_dict(observer_view=args.observer_view)
    payload["E_hat"] = _round12(payload["E_hat"])
    payload["std_err"] = _round12(payload["std_err"])
    payload["lambda_weights"] = [_round12(w) for w in dist.weights]
    payload["empirical_min_entropy"] = (
        None if math.isnan(h_emp) else _round12(h_emp))
    payload["E_q"] = _round12(wb.E_q)
    _emit_json(payload, args)
    return EXIT_OK


def _verify_points(args: argparse.Namespace) -> list[EpsilonPair]:
    axis = np.linspace(0.0, args.eps_cap, args.grid)
    return [EpsilonPair(float(e1), float(e2)) for e1 in axis for e2 in axis]


def _verify_classical(args, tol):
    def one(eps):
        rep = classical_enumeration(eps, LambdaDistribution.uniform())
        return {
            "eps1": eps.eps1, "eps2": eps.eps2,
            "analytic": _round12(rep.analytic_value),
            "oracle": _round12(rep.oracle_value),
            "gap": float(rep.gap),
            "ok": bool(abs(rep.gap) <= tol),
        }
    return _map_points(one, _verify_points(args))


def _verify_quantum(args, tol):
    budget = args.budget or _SUITE_BUDGET["quantum"]

    def one(eps):
        rep = quantum_search(eps, k=0, mode="planar", budget=budget,
                             seed=args.seed)
        return {
            "eps1": eps.eps1, "eps2": eps.eps2,
            "analytic": _round12(rep.analytic_value),
            "oracle": _round12(rep.oracle_value),
            "gap": float(rep.gap),
            "evaluations": rep.evaluations,
            "ok": bool(abs(rep.gap) <= tol),
        }
    return _map_points(one, _verify_points(args))


def _verify_tradeoff(args, tol, samples_per_point: int = 10):
    budget = args.budget or _SUITE_BUDGET["tradeoff"]

    def one(eps):
        p_floor = max_guess_probability(eps)
        e_c = classical_bound(eps)
        convexified = threshold_witness(eps) < e_c
        bound = convexify_F(eps)[1] if convexified else None
        rows = []
        for j in range(samples_per_point):
            frac = 0.5 - 0.5 * math.cos(
                math.pi * j / (samples_per_point - 1))
            p = p_floor + (1.0 - p_floor) * frac
            g_val = envelope_G(eps, p)
            f_val = bound(p) if bound is not None else g_val
            rep = constrained_search(eps, p, budget=budget, seed=args.seed)
            rows.append({
                "p": _round12(p),
                "G": _round12(g_val),
                "F": _round12(f_val),
                "oracle": _round12(rep.oracle_value),
                "ok": bool(g_val - tol <= rep.oracle_value <= f_val + tol),
            })
        return {"eps1": eps.eps1, "eps2": eps.eps2, "samples": rows,
                "ok": all(r["ok"] for r in rows)}
    return _map_points(one, _verify_points(args))


def cmd_verify(args: argparse.Namespace) -> int:
    suites = (["classical", "quantum", "tradeoff"]
              if args.suite == "all" else [args.suite])
    report = {"grid": args.grid, "eps_cap": args.eps_cap, "suites": {}}
    all_ok = True
    for suite in suites:
        tol = args.tol if args.tol is not None else _SUITE_TOL[suite]
        if suite == "classical":
            points = _verify_classical(args, tol)
        elif suite == "quantum":
            points = _verify_quantum(args, tol)
        else:
            points = _verify_tradeoff(args, tol)
        ok = all(pt["ok"] for pt in points)
        report["suites"][suite] = {"tol": tol, "ok": ok, "points": points}
        all_ok = all_ok and ok
    report["ok"] = all_ok
    _emit_json(report, args)
    return EXIT_OK if all_ok else EXIT_VERIFY


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdiqrac",
        description=(
            "Witness bounds, feasible bias region, randomness tradeoff "
            "curves, Monte Carlo simulation, and brute-force verification "
            "for the 2->1 quantum random access code with biased sources."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_eps(p):
        p.add_argument("--eps1", type=float, required=True,
                       help="bias of the encoder's source, in [0, 0.5)")
        p.add_argument("--eps2", type=float, required=True,
                       help="bias of the measurement-choice source")

    def add_output(p):
        p.add_argument("--output", "-o", help="write here instead of stdout")

    p = sub.add_parser("bounds", help="closed-form bounds for one bias pair")
    add_eps(p)
    add_output(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("region", help="feasibility scan over a bias grid")
    p.add_argument("--grid", type=int, default=100,
                   help="points per axis (>= 2)")
    p.add_argument("--eps-max", type=float, default=0.5, dest="eps_max",
                   help="upper edge of both axes (<= 0.5)")
    add_output(p)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("tradeoff",
                       help="witness-vs-min-entropy curve for one pair")
    add_eps(p)
    p.add_argument("--points", type=int, default=129,
                   help="number of curve samples")
    add_output(p)
    p.set_defaults(func=cmd_tradeoff)

    p = sub.add_parser("simulate", help="Monte Carlo protocol rounds")
    add_eps(p)
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dist", choices=["uniform", "parametrized"],
                   default="uniform",
                   help="hidden-variable mixture")
    p.add_argument("--dist-seed", type=int, default=0, dest="dist_seed",
                   help="seed for the parametrized mixture")
    p.add_argument("--dist-file", dest="dist_file",
                   help="JSON file with 8 mixture weights")
    p.add_argument("--log-trials", dest="log_trials",
                   help="also write a per-round CSV log here")
    p.add_argument("--observer-view", action="store_true",
                   dest="observer_view",
                   help="hide hidden-variable-indexed tables in the output")
    add_output(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify",
                       help="compare closed forms against brute-force "
                            "oracles on the documented grid")
    p.add_argument("--suite",
                   choices=["classical", "quantum", "tradeoff", "all"],
                   default="all")
    p.add_argument("--tol", type=float, default=None,
                   help="override the per-suite tolerance")
    p.add_argument("--budget", type=int, default=None,
                   help="override the per-suite search budget")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, default=DEFAULT_GRID,
                   help="points per axis of the verification grid")
    p.add_argument("--eps-cap", type=float, default=DEFAULT_EPS_CAP,
                   dest="eps_cap",
                   help="largest bias on the verification grid")
    add_output(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as err:
        print(f"domain error: {err}", file=sys.stderr)
        return EXIT_DOMAIN
    except SdiqracError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
