"""Command-line entry point.

Exit codes: 0 all checks passed, 1 a check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import contextlib
import sys
from dataclasses import asdict

import numpy as np

from . import exact
from .coupling import CouplingKind, tail_curve
from .dynamics import Params, initial_config, run_chain, theorem_bounds
from .errors import ParameterError, RegimeError
from .experiments import (ExperimentConfig, degree_concentration_experiment, exact_battery,
                          regime_table, scaling_experiment, selfloop_experiment, to_json,
                          write_csv)
from .graph import read_graph, serialize_graph
from .random_graphs import Binomial, Poisson, gen_erdos_renyi, gen_galton_watson, gen_regular_multigraph
from .rng import stream


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v]


def _open_out(path):
    if path in (None, "-"):
        return contextlib.nullcontext(sys.stdout)
    return open(path, "w", encoding="utf-8", newline="\n")


def _chain_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", required=True, help="edge-list file")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--kappa", type=float, required=True)


def cmd_gen_graph(args) -> int:
    params = {"family": args.family, "n": args.n, "seed": args.seed}
    meta = None
    if args.family == "er":
        g = gen_erdos_renyi(args.n, args.p, args.seed)
        params["p"] = args.p
    elif args.family == "regular":
        g = gen_regular_multigraph(args.n, args.d, args.seed)
        params["d"] = args.d
    elif args.family == "gw-binomial":
        g, meta = gen_galton_watson(Binomial(args.m, args.p), args.n, args.seed)
        params.update(m=args.m, p=args.p)
    else:
        g, meta = gen_galton_watson(Poisson(args.theta), args.n, args.seed)
        params["theta"] = args.theta
    sidecar = {"generator": params}
    if meta is not None:
        sidecar["gw_meta"] = asdict(meta)
    if args.out:
        with open(args.out + ".graph", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(serialize_graph(g))
        with open(args.out + ".json", "w", encoding="utf-8") as fh:
            fh.write(to_json(sidecar))
    else:
        sys.stdout.write(serialize_graph(g))
    return 0


def cmd_simulate(args) -> int:
    g = read_graph(args.graph)
    params = Params(args.a, args.lam, args.kappa)
    sigma0 = initial_config(g.n, args.init, stream(args.seed, 1))
    tr = run_chain(g, params, sigma0, args.steps, args.stride, stream(args.seed, 0))
    header = {"graph": args.graph, "a": repr(args.a), "lambda": repr(args.lam),
              "kappa": repr(args.kappa), "steps": args.steps, "stride": args.stride,
              "seed": args.seed, "init": args.init}
    with _open_out(args.out) as fh:
        write_csv(fh, ["t", "infected_count"], zip(tr.times.tolist(), tr.infected_counts.tolist()), header)
    return 0


def cmd_couple(args) -> int:
    g = read_graph(args.graph)
    params = Params(args.a, args.lam, args.kappa)
    grid = range(0, args.tmax + 1, args.tstep)
    pts = tail_curve(g, params, CouplingKind(args.kind), args.pair, grid, args.replicas, args.seed)
    header = {"graph": args.graph, "a": repr(args.a), "lambda": repr(args.lam),
              "kappa": repr(args.kappa), "kind": args.kind, "pair": args.pair,
              "replicas": args.replicas, "seed": args.seed}
    with _open_out(args.out) as fh:
        write_csv(fh, ["t", "survival", "stderr"], [(p.t, p.survival, p.stderr) for p in pts], header)
    return 0


def cmd_exact(args) -> int:
    g = read_graph(args.graph)
    params = Params(args.a, args.lam, args.kappa)
    k = exact.build_kernel(g, params)
    pi = exact.stationary(k)
    tmix = exact.exact_tmix(k, pi, args.epsilon)
    t_max = args.tmax if args.tmax is not None else tmix
    prof = exact.distance_profile(k, pi, t_max)
    checks = {"n": g.n, "epsilon": args.epsilon, "exact_tmix": tmix,
              "row_sum_error": k.row_sum_error(),
              "stationary_residual": exact._residual(k, pi)}
    passed = True
    sandwich = bool(np.all(prof.d <= prof.dbar + 1e-12) and np.all(prof.dbar <= 2 * prof.d + 1e-12))
    checks["sandwich"] = {"pass": sandwich}
    passed &= sandwich
    try:
        b = theorem_bounds(g, params, args.epsilon)
        checks["bounds"] = {"upper": b.upper, "lower": b.lower, "gamma": b.gamma, "beta": b.beta,
                            "lower_vacuous": b.lower_vacuous, "upper_pass": tmix <= b.upper}
    except RegimeError as exc:
        checks["bounds"] = {"error": str(exc)}
    if args.coupled:
        kind = CouplingKind(args.coupled)
        kc = exact.build_coupled_kernel(g, params, kind)
        tail = exact.coupling_tail(kc, t_max)
        ci = bool(np.all(prof.d <= tail + 1e-10))
        checks["coupling_inequality"] = {"kind": kind.value, "pass": ci}
        passed &= ci
        if kind is CouplingKind.PAPER:
            try:
                cc = exact.exact_contraction_check(g, params, Kc=kc)
                checks["contraction"] = {**asdict(cc), "pass": cc.passed}
                sm = exact.exact_second_moment_check(g, params, t_max=max(t_max, 1), Kc=kc)
                checks["second_moment"] = {"pass": sm.passed,
                                           "min_slack": float((sm.bound - sm.e_rho2).min())}
                passed &= cc.passed and sm.passed
            except RegimeError as exc:
                checks["contraction"] = {"skipped": str(exc)}
    checks["pass"] = bool(passed)
    with open(args.out + ".profile.csv", "w", encoding="utf-8", newline="\n") as fh:
        write_csv(fh, ["t", "d", "dbar"], zip(prof.t.tolist(), prof.d.tolist(), prof.dbar.tolist()),
                  {"graph": args.graph, "a": repr(args.a), "lambda": repr(args.lam),
                   "kappa": repr(args.kappa)})
    with open(args.out + ".checks.json", "w", encoding="utf-8") as fh:
        fh.write(to_json(checks))
    return 0 if passed else 1


def cmd_scaling(args) -> int:
    fam_args = {}
    for kv in args.family_arg or []:
        k, _, v = kv.partition("=")
        fam_args[k] = v
    cfg = ExperimentConfig(family=args.family, family_args=fam_args, n_grid=_ints(args.n_grid),
                           eps=args.epsilon, replicas=args.replicas, seed=args.seed,
                           kind=args.kind, alpha=args.alpha, lam=args.lam)
    res = scaling_experiment(cfg)
    cols = ["n", "t_hat", "t_lo", "t_point", "theorem_upper", "theorem_lower", "gamma", "beta",
            "a", "lambda", "kappa", "max_degree", "error"]
    rows = [(r.n, r.t_hat, r.t_lo, r.t_point, r.theorem_upper, r.theorem_lower, r.gamma, r.beta,
             r.a, r.lam, r.kappa, r.max_degree, r.error) for r in res.rows]
    header = {"recipe": res.recipe, "seed": args.seed, "replicas": args.replicas,
              "kind": args.kind, "epsilon": repr(args.epsilon), "family": args.family}
    out = args.out
    with _open_out(out + ".csv" if out else None) as fh:
        write_csv(fh, cols, rows, header)
    ok = all(not r.error and r.within_upper for r in res.rows)
    if out:
        with open(out + ".json", "w", encoding="utf-8") as fh:
            fh.write(to_json({"config": asdict(cfg), "recipe": res.recipe, "fit": res.fit,
                              "rows": res.rows, "pass": ok}))
    return 0 if ok else 1


def cmd_verify(args) -> int:
    results = exact_battery(_ints(args.n), t_max=args.tmax, eps=args.epsilon)
    rows = [(r.check, r.graph, r.n, r.passed) for r in results]
    with _open_out(args.out + ".csv" if args.out else None) as fh:
        write_csv(fh, ["check", "graph", "n", "pass"], rows)
    if args.out:
        with open(args.out + ".json", "w", encoding="utf-8") as fh:
            fh.write(to_json(results))
    return 0 if all(r.passed for r in results) else 1


def cmd_regimes(args) -> int:
    rows = regime_table(_ints(args.n_grid), _floats(args.alpha_grid), args.max_degree)
    cols = ["n", "alpha", "kappa_lo", "kappa_hi", "alpha_min", "feasible", "kappa", "a",
            "lambda", "validated"]
    with _open_out(args.out) as fh:
        write_csv(fh, cols, [tuple(asdict(r).values()) for r in rows],
                  {"max_degree": args.max_degree})
    return 0


def cmd_concentration(args) -> int:
    if args.kind == "degree":
        rep = degree_concentration_experiment(args.n, args.p, args.graphs, args.seed,
                                              _floats(args.deltas or "0.3,0.5"))
        ok = all(d.passed for d in rep.deltas)
    else:
        rep = selfloop_experiment(args.n, args.d, args.graphs, args.seed,
                                  _floats(args.deltas or "1,2,3"))
        ok = rep.within_3sigma
    text = to_json({"report": rep, "pass": ok})
    if args.out:
        with open(args.out + ".json", "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="noisysis", allow_abbrev=False)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graph", allow_abbrev=False)
    p.add_argument("--family", choices=["er", "regular", "gw-binomial", "gw-poisson"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, default=0.1)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--theta", type=float, default=1.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_graph)

    p = sub.add_parser("simulate", allow_abbrev=False)
    _chain_args(p)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init", choices=["all0", "all1", "random"], default="all0")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("couple", allow_abbrev=False)
    _chain_args(p)
    p.add_argument("--kind", choices=["paper", "common"], default="paper")
    p.add_argument("--pair", default="extremal", help="extremal or random:K")
    p.add_argument("--replicas", type=int, default=1000)
    p.add_argument("--tmax", type=int, required=True)
    p.add_argument("--tstep", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_couple)

    p = sub.add_parser("exact", allow_abbrev=False)
    _chain_args(p)
    p.add_argument("--epsilon", type=float, default=0.25)
    p.add_argument("--tmax", type=int)
    p.add_argument("--coupled", choices=["paper", "common"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("scaling", allow_abbrev=False)
    p.add_argument("--family", default="none",
                   choices=["none", "er", "regular", "gw-binomial", "gw-poisson", "file"])
    p.add_argument("--family-arg", action="append", help="key=value, e.g. p=0.05 or d=3")
    p.add_argument("--n-grid", default="100,200,400,800,1600")
    p.add_argument("--epsilon", type=float, default=0.25)
    p.add_argument("--replicas", type=int, default=1000)
    p.add_argument("--kind", choices=["paper", "common"], default="paper")
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("verify", allow_abbrev=False)
    p.add_argument("--n", default="2,3,4")
    p.add_argument("--tmax", type=int, default=200)
    p.add_argument("--epsilon", type=float, default=0.25)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("regimes", allow_abbrev=False)
    p.add_argument("--n-grid", required=True)
    p.add_argument("--alpha-grid", required=True)
    p.add_argument("--max-degree", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_regimes)

    p = sub.add_parser("concentration", allow_abbrev=False)
    p.add_argument("--kind", choices=["degree", "selfloop"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, default=0.05)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--graphs", type=int, default=100)
    p.add_argument("--deltas")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_concentration)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, RegimeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
