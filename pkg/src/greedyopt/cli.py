"""Command-line interface: solve, certify, run experiments, emit traces.

Exit codes: 0 success, 1 numerical failure (divergence, inconsistent
system, certification gap), 2 usage or configuration error.
"""

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from . import dynamic, endpoints, harness, moments, oracle, stateless
from .errors import GreedyOptError
from .switching import (adam_switch_step, init_adam_state, init_muon_state,
                        init_sgdm_state, muon_switch_step, sgdm_switch_step)

log = logging.getLogger("greedyopt")


def _setup_logging():
    level = os.environ.get("GREEDYOPT_LOG", "error").lower()
    logging.basicConfig(level={"error": logging.ERROR, "info": logging.INFO,
                               "debug": logging.DEBUG}.get(level,
                                                           logging.ERROR))


class UsageError(Exception):
    pass


def _load_matrix(path):
    if path.endswith(".csv"):
        return moments.load_matrix_csv(path)
    with open(path) as fh:
        return moments.matrix_from_json(json.load(fh))


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _write_json(path, obj):
    text = json.dumps(obj, indent=2)
    if path is None or path == "-":
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _region_from_args(args, dim):
    fam = args.family
    if fam == "frobenius":
        if args.budget is None:
            raise UsageError("frobenius family needs --budget")
        return stateless.Frobenius(args.budget)
    if fam == "spectral":
        if args.tau is None or getattr(args, "lam") is None:
            raise UsageError("spectral family needs --tau and --lambda")
        return stateless.Spectral(args.tau, args.lam)
    if fam == "lyapunov":
        if args.budget is None:
            raise UsageError("lyapunov family needs --budget")
        return stateless.Lyapunov(args.budget)
    if fam == "diagonal":
        if args.budget is None or args.costs is None:
            raise UsageError("diagonal family needs --budget and --costs")
        costs = _load_json(args.costs)
        if isinstance(costs, dict):
            costs = costs["costs"]
        if len(costs) != dim:
            raise UsageError("costs length must match matrix dim")
        return stateless.Diagonal(args.budget, tuple(costs))
    raise UsageError(f"unknown family {fam!r}")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_solve(args):
    sigma = moments.psd_project(_load_matrix(args.sigma))
    region = _region_from_args(args, sigma.dim)
    sol = stateless.solve(region, sigma)
    _write_json(args.out, stateless.solution_to_json(region, sol))
    return 0


def _cmd_solve_dynamic(args):
    r = moments.lag_moments_from_json(_load_json(args.moments))
    if args.family != "frobenius":
        raise UsageError("solve-dynamic currently takes a global "
                         "frobenius budget (--family frobenius --budget B)")
    if args.budget is None:
        raise UsageError("solve-dynamic needs --budget")
    filt = dynamic.solve_dynamic(stateless.Frobenius(args.budget), r)
    _write_json(args.out, dynamic.filter_to_json(filt))
    return 0


def _cmd_certify(args):
    lo, hi = args.dims
    rng = np.random.default_rng(args.seed)
    max_gap = 0.0
    max_excess = 0.0
    trials = []
    for t in range(args.trials):
        d = int(rng.integers(lo, hi + 1))
        base = rng.standard_normal((d, d))
        sigma = moments.psd_project(base @ base.T / d)
        if args.family == "frobenius":
            region = stateless.Frobenius(float(rng.uniform(0.5, 4.0)))
        elif args.family == "spectral":
            region = stateless.Spectral(float(rng.uniform(0.5, 3.0)),
                                        float(rng.uniform(0.3, 1.5)))
        elif args.family == "lyapunov":
            region = stateless.Lyapunov(float(rng.uniform(0.5, 4.0)))
        elif args.family == "diagonal":
            region = stateless.Diagonal(
                float(rng.uniform(0.5, 4.0)),
                tuple(rng.uniform(0.2, 3.0, size=d)))
            sigma = moments.MomentMatrix(np.diag(np.diag(sigma.entries)))
        else:
            raise UsageError(f"unknown family {args.family!r}")
        closed = stateless.solve(region, sigma)
        report = oracle.oracle_maximize(region, sigma, iters=150, restarts=2,
                                        seed=int(rng.integers(2 ** 31)))
        tol = 1e-6 * (1.0 + abs(closed.power))
        gap = report.best_value - closed.power
        max_excess = max(max_excess, gap)
        max_gap = max(max_gap, abs(min(gap, 0.0)))
        trials.append({"dim": d, "closed": closed.power,
                       "oracle": report.best_value})
        if gap > tol:
            log.error("oracle beat closed form on trial %d by %.3e", t, gap)
    ok = max_excess <= 1e-6 * (1.0 + max(abs(t["closed"]) for t in trials))
    _write_json(args.out, {"family": args.family, "trials": args.trials,
                           "max_oracle_excess": max_excess,
                           "max_gap": max_excess if max_excess > 0 else 0.0,
                           "passed": bool(ok)})
    return 0 if ok else 1


def _cmd_endpoint(args):
    cfg = _load_json(args.config)
    prob = endpoints.LeastSquaresProblem(np.asarray(cfg["jac"], dtype=float),
                                         np.asarray(cfg["y"], dtype=float))
    d = prob.jac.shape[1]
    q = np.asarray(cfg.get("q", np.eye(d).tolist()), dtype=float)
    analytic = endpoints.analytic_endpoint(q, prob)
    bound = endpoints.flow_stability_bound(q, prob)
    step = cfg.get("step", 0.5 * bound if math.isfinite(bound) else 0.1)
    flow = endpoints.flow_endpoint(q, prob, step,
                                   tol=cfg.get("tol", 1e-10),
                                   max_iters=cfg.get("max_iters", 200000))
    _write_json(args.out, {
        "analytic": [float(x) for x in analytic],
        "flow": [float(x) for x in flow],
        "max_abs_difference": float(np.max(np.abs(analytic - flow))),
    })
    return 0


def _cmd_train(args):
    cfg = _load_json(args.config)
    if args.seed is not None:
        cfg["seed"] = args.seed
    kind = cfg.get("kind")
    outdir = args.out or "."
    os.makedirs(outdir, exist_ok=True)
    if kind == "quadratic":
        a = np.asarray(cfg["a"], dtype=float)
        q = np.asarray(cfg["q"], dtype=float)
        trace = harness.run_quadratic(a, q, np.asarray(cfg["theta0"]),
                                      cfg.get("eta", 1e-2),
                                      cfg.get("steps", 200))
    elif kind == "rosenbrock":
        trace = harness.run_rosenbrock(cfg)
    elif kind == "mlp-switch":
        trace = harness.run_mlp_switch(cfg)
    else:
        raise UsageError(f"unknown train kind {kind!r}")
    harness.write_trace_csv(os.path.join(outdir, "trace.csv"), trace)
    harness.write_manifest(outdir, cfg)
    return 0


def _cmd_switch_demo(args):
    cfg = _load_json(args.config)
    stream_path = args.moments or cfg.get("stream")
    if stream_path is None:
        raise UsageError("switch-demo needs a gradient stream "
                         "(--moments file.csv or config \"stream\")")
    grads = moments.load_matrix_csv(stream_path)
    optimizer = cfg.get("optimizer", "sgdm")
    candidates = cfg.get("candidates")
    if not candidates:
        raise UsageError("config must list candidates")
    eta = cfg.get("eta", 0.1)
    eps = cfg.get("eps", 1e-8)
    d = grads.shape[1]
    if optimizer == "sgdm":
        state = init_sgdm_state([float(c) for c in candidates], d)
    elif optimizer == "adam":
        state = init_adam_state([tuple(c) for c in candidates], d)
    elif optimizer == "muon":
        side = int(round(math.sqrt(d)))
        if side * side != d:
            raise UsageError("muon demo expects square-matrix gradients "
                             "flattened row-major")
        state = init_muon_state([float(c) for c in candidates], (side, side))
    else:
        raise UsageError(f"unknown optimizer {optimizer!r}")
    rows = []
    for g in grads:
        if optimizer == "sgdm":
            delta, rec, state = sgdm_switch_step(state, g, eta)
        elif optimizer == "adam":
            delta, rec, state = adam_switch_step(state, g, eta, eps)
        else:
            side = state.momenta[0].shape[0]
            delta, rec, state = muon_switch_step(
                state, g.reshape(side, side), eta)
        rows.append([rec.step, rec.selected, *rec.objectives,
                     float(np.linalg.norm(rec.update))])
    header = ["step", "selected"] + \
        [f"J_{k}" for k in range(len(candidates))] + ["update_norm"]
    lines = [",".join(header)]
    lines += [",".join(repr(x) if isinstance(x, float) else str(x)
                       for x in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if args.out is None or args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return 0


# ---------------------------------------------------------------------------
# argument plumbing


def _dims_range(text):
    try:
        lo, hi = text.split("..")
        lo, hi = int(lo), int(hi)
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected a range like 2..6") from exc
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError("invalid dimension range")
    return lo, hi


def build_parser():
    parser = argparse.ArgumentParser(
        prog="greedyopt",
        description="Greedy-optimal optimizers from gradient statistics.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, family=True):
        if family:
            p.add_argument("--family", choices=["frobenius", "spectral",
                                                "lyapunov", "diagonal"])
            p.add_argument("--budget", type=float)
            p.add_argument("--tau", type=float)
            p.add_argument("--lambda", dest="lam", type=float)
            p.add_argument("--costs")
        p.add_argument("--out")
        p.add_argument("--seed", type=int)

    p = sub.add_parser("solve", help="stateless closed form from a moment file")
    common(p)
    p.add_argument("--sigma", required=True)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("solve-dynamic", help="filter solution from lag moments")
    common(p)
    p.add_argument("--moments", required=True)
    p.set_defaults(func=_cmd_solve_dynamic)

    p = sub.add_parser("certify", help="closed form vs brute-force oracle")
    common(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--dims", type=_dims_range, default=(2, 6))
    p.set_defaults(func=_cmd_certify, seed_default=0)

    p = sub.add_parser("endpoint", help="least-squares endpoints")
    common(p, family=False)
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_endpoint)

    p = sub.add_parser("train", help="harness runs")
    common(p, family=False)
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("switch-demo", help="stream through the K-choice switch")
    common(p, family=False)
    p.add_argument("--config", required=True)
    p.add_argument("--moments")
    p.set_defaults(func=_cmd_switch_demo)

    return parser


def dispatch(argv):
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if getattr(args, "seed", None) is None and hasattr(args, "seed"):
        args.seed = 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (json.JSONDecodeError, FileNotFoundError, KeyError,
            ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except GreedyOptError as exc:
        kind = type(exc).__name__
        print(f"numerical failure ({kind}): {exc}", file=sys.stderr)
        if kind in ("InvalidBudget", "NonPositiveCost", "ConfigError",
                    "DimensionMismatch"):
            return 2
        return 1


def main():
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
