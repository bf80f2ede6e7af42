"""Seeded experiment suites and their CSV/JSON output.

Floats are written with ``repr`` (shortest decimal that round-trips), so
every emitted number re-parses to the in-memory value bit for bit.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .coupling import CouplingKind, tmix_upper_estimate
from .dynamics import (Params, alpha_threshold, beta_const, check_regime, gamma_const,
                       lower_bound, p_star, upper_bound)
from .errors import CouplingTimeout, ParameterError
from .graph import MultiGraph, cycle_graph, empty_graph, max_degree, path_graph, read_graph, star_graph
from .random_graphs import (Binomial, Poisson, count_self_loops, gen_erdos_renyi,
                            gen_galton_watson, gen_regular_multigraph)
from .rng import derive_seed

_TAG_GRAPH = 7
_TAG_COUPLE = 8

FAMILIES = ("none", "er", "regular", "gw-binomial", "gw-poisson", "file")


# parameter recipes

def upper_recipe(n: int, max_deg: int = 0, kappa_div: float = 8.0) -> Params:
    """kappa = 1/(8(n-1)), a = 1 - kappa/2, lambda = kappa/(4 max_deg) (0 if edgeless).

    Satisfies the upper regime for every n >= 2 with p* = 1 - kappa/4 < 1.
    """
    kappa = 1.0 / (kappa_div * (n - 1))
    lam = kappa / (4 * max_deg) if max_deg > 0 else 0.0
    return Params(a=1 - kappa / 2, lam=lam, kappa=kappa)


UPPER_RECIPE_TEXT = "kappa(n)=1/(8(n-1)); a(n)=1-kappa(n)/2"


def _round_inside(lo: float, hi: float) -> float:
    mid = 0.5 * (lo + hi)
    for digits in range(1, 17):
        v = float(f"{mid:.{digits - 1}e}")
        if lo < v < hi:
            return v
    return mid


@dataclass(frozen=True)
class RegimeRow:
    n: int
    alpha: float
    kappa_lo: float  # n^-alpha
    kappa_hi: float  # 1/(4(n-1)^2)
    alpha_min: float
    feasible: bool
    kappa: float | None = None
    a: float | None = None
    lam: float | None = None
    validated: bool = False


def regime_row(n: int, alpha: float, max_deg: int = 0) -> RegimeRow:
    """Feasible kappa interval of the lower regime plus a suggested triple.

    Suggestion: kappa = interval midpoint rounded to the fewest significant
    digits that stay inside, a = 1 - n^-alpha / 2, lambda = n^-alpha / (4 max_deg)
    so that lambda * max_deg < n^-alpha and p* < 1.
    """
    lo = float(n) ** (-alpha)
    hi = 1.0 / (4 * (n - 1) ** 2)
    feasible = alpha > 1 and lo < hi
    row = RegimeRow(n, alpha, lo, hi, alpha_threshold(n), feasible)
    if not feasible:
        return row
    kappa = _round_inside(lo, hi)
    a = 1 - lo / 2
    lam = lo / (4 * max_deg) if max_deg > 0 else 0.0
    ok = check_regime(Params(a, lam, kappa), n, alpha, max_degree=max_deg)
    return RegimeRow(n, alpha, lo, hi, alpha_threshold(n), True, kappa, a, lam,
                     ok.regime_lower and ok.p_star_ok)


def regime_table(n_grid, alpha_grid, max_deg: int = 0) -> list[RegimeRow]:
    return [regime_row(int(n), float(al), max_deg) for n in n_grid for al in alpha_grid]


# fitting

@dataclass(frozen=True)
class FitResult:
    c: float
    r_squared: float
    residuals: list


def fit_nlogn(points) -> FitResult:
    """Least squares of t ~ c * n ln n through the origin."""
    pts = [(float(n), float(t)) for n, t in points]
    if not pts:
        raise ValueError("fit needs at least one point")
    n = np.array([p[0] for p in pts])
    t = np.array([p[1] for p in pts])
    if np.any(n < 2):
        raise ValueError("fit needs n >= 2")
    x = n * np.log(n)
    c = float((t * x).sum() / (x * x).sum())
    res = t - c * x
    ss_res = float((res**2).sum())
    ss_tot = float(((t - t.mean()) ** 2).sum())
    if len(pts) == 1:
        r2 = 1.0  # one point is always fitted exactly by a line through the origin
    elif ss_tot == 0.0:
        r2 = 1.0 if ss_res == 0.0 else 0.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return FitResult(c=c, r_squared=r2, residuals=res.tolist())


# scaling

@dataclass
class ExperimentConfig:
    family: str = "none"
    family_args: dict = field(default_factory=dict)
    n_grid: list = field(default_factory=lambda: [100, 200, 400, 800, 1600])
    eps: float = 0.25
    replicas: int = 1000
    seed: int = 0
    kind: str = "paper"
    alpha: float = 2.0
    lam: float | None = None  # only for family "file"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        grid = [int(n) for n in self.n_grid]
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("n_grid must be strictly increasing")
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        self.n_grid = grid


def family_graph(cfg: ExperimentConfig, n: int) -> MultiGraph:
    fa = cfg.family_args
    s = derive_seed(cfg.seed, _TAG_GRAPH, n)
    if cfg.family == "none":
        return empty_graph(n)
    if cfg.family == "er":
        return gen_erdos_renyi(n, float(fa["p"]), s)
    if cfg.family == "regular":
        return gen_regular_multigraph(n, int(fa["d"]), s)
    if cfg.family == "gw-binomial":
        return gen_galton_watson(Binomial(int(fa["m"]), float(fa["p"])), n, s)[0]
    if cfg.family == "gw-poisson":
        return gen_galton_watson(Poisson(float(fa["theta"])), n, s)[0]
    g = read_graph(fa["path"])
    if g.n != n:
        raise ValueError(f"graph file has n={g.n}, grid asks for {n}")
    return g


def family_lambda(cfg: ExperimentConfig, n: int) -> tuple[float, str]:
    """Infection rate meeting the family's degree hypothesis at this n."""
    fa, al = cfg.family_args, cfg.alpha
    if cfg.family == "none":
        return 0.0, "lambda=0"
    if cfg.family in ("er", "gw-binomial"):
        return 1.0 / (n ** (1 + al) * float(fa["p"])), f"lambda=1/(n^(1+{al}) p)"
    if cfg.family == "regular":
        return 1.0 / (int(fa["d"]) * n**al), f"lambda=1/(d n^{al})"
    if cfg.family == "gw-poisson":
        return math.log(math.log(n)) / (n**al * math.log(n)), f"lambda=loglog n/(n^{al} log n)"
    if cfg.lam is None:
        raise ValueError("family 'file' needs an explicit lambda")
    return float(cfg.lam), f"lambda={cfg.lam!r}"


@dataclass
class ScalingRow:
    n: int
    t_hat: int | None = None
    t_lo: int | None = None
    t_point: int | None = None
    theorem_upper: float | None = None
    theorem_lower: float | None = None
    gamma: float | None = None
    beta: float | None = None
    a: float | None = None
    lam: float | None = None
    kappa: float | None = None
    max_degree: int | None = None
    within_upper: bool | None = None
    within_lower: bool | None = None
    error: str = ""


@dataclass
class ScalingResult:
    rows: list
    fit: FitResult | None
    recipe: str
    config: ExperimentConfig


def scaling_experiment(cfg: ExperimentConfig) -> ScalingResult:
    """Coupling-based t_mix(eps) estimates along the n grid, plus the n ln n fit.

    Failing sizes (regime violation, p* >= 1, coupling timeout) become error
    rows and the experiment continues.
    """
    rows = []
    recipe = UPPER_RECIPE_TEXT
    for n in cfg.n_grid:
        row = ScalingRow(n=n)
        rows.append(row)
        try:
            g = family_graph(cfg, n)
            lam, lam_text = family_lambda(cfg, n)
            base = upper_recipe(n)
            params = Params(base.a, lam, base.kappa)
            recipe = f"{UPPER_RECIPE_TEXT}; {lam_text}"
            row.a, row.lam, row.kappa, row.max_degree = params.a, lam, params.kappa, max_degree(g)
            rep = check_regime(params, n, max_degree=row.max_degree)
            if not rep.regime_upper:
                raise ParameterError("upper regime violated: " + "; ".join(rep.failed))
            if not rep.p_star_ok:
                raise ParameterError(f"p* = {p_star(g, params)!r} >= 1")
            row.gamma = gamma_const(params, n)
            row.beta = beta_const(params, g)
            row.theorem_upper = upper_bound(n, row.gamma, cfg.eps)
            row.theorem_lower = lower_bound(n, row.beta, row.gamma, cfg.eps)
            est = tmix_upper_estimate(g, params, CouplingKind(cfg.kind), cfg.eps,
                                      replicas=cfg.replicas,
                                      seed=derive_seed(cfg.seed, _TAG_COUPLE, n))
            row.t_hat, row.t_lo, row.t_point = est.t_hat, est.t_lo, est.t_point
            row.within_upper = row.t_hat <= row.theorem_upper
            row.within_lower = row.theorem_lower <= 0 or row.t_hat >= row.theorem_lower
        except (ParameterError, CouplingTimeout, ValueError, OSError) as exc:
            row.error = f"{type(exc).__name__}: {exc}"
    good = [(r.n, r.t_hat) for r in rows if not r.error]
    fit = fit_nlogn(good) if good else None
    return ScalingResult(rows=rows, fit=fit, recipe=recipe, config=cfg)


# concentration

@dataclass
class DeltaReport:
    delta: float
    all_in_band: float
    stderr: float
    chernoff_lower: float  # 1 - 2n exp(-delta^2 np/3)
    vertex_tail_bound: float  # 2 exp(-delta^2 np/3)
    frac_outside: float
    frac_outside_stderr: float
    passed: bool


@dataclass
class DegreeReport:
    n: int
    p: float
    graphs: int
    seed: int
    max_degrees: list
    min_degrees: list
    deltas: list


def degree_concentration_experiment(n: int, p: float, graphs: int, seed: int,
                                    deltas=(0.3, 0.5)) -> DegreeReport:
    """Frequency with which every degree of G(n, p) lies in ((1-d)np, (1+d)np)."""
    mean = n * p
    if mean < 20:
        raise ValueError(f"need n*p >= 20 for the dense regime, got {mean}")
    for d in deltas:
        if not 0 < d < 1:
            raise ValueError(f"delta must lie in (0, 1), got {d}")
    degs = []
    for i in range(graphs):
        g = gen_erdos_renyi(n, p, derive_seed(seed, _TAG_GRAPH, i))
        degs.append(g.degree.copy())
    degs = np.array(degs)
    out = []
    for d in deltas:
        inside = (degs > (1 - d) * mean) & (degs < (1 + d) * mean)
        all_in = inside.all(axis=1)
        prob = float(all_in.mean())
        se = math.sqrt(prob * (1 - prob) / graphs)
        tail = 2 * math.exp(-d * d * mean / 3)
        frac = (~inside).mean(axis=1)
        fse = float(frac.std(ddof=1) / math.sqrt(graphs)) if graphs > 1 else 0.0
        lower = 1 - n * tail
        out.append(DeltaReport(d, prob, se, lower, tail, float(frac.mean()), fse,
                               prob >= lower - 5 * se))
    return DegreeReport(n, p, graphs, seed, degs.max(axis=1).tolist(),
                        degs.min(axis=1).tolist(), out)


@dataclass
class SelfLoopReport:
    n: int
    d: int
    graphs: int
    seed: int
    mean: float
    std: float
    stderr: float
    binomial_stderr: float
    target: float  # (d-1)/2
    exact_mean: float  # n d (d-1) / (2 (nd-1))
    within_3sigma: bool
    tails: list  # (delta, empirical P(|S - target| >= delta), 2 exp(-2 delta^2 / n))


def selfloop_experiment(n: int, d: int, graphs: int, seed: int,
                        deltas=(1.0, 2.0, 3.0)) -> SelfLoopReport:
    loops = np.array([count_self_loops(gen_regular_multigraph(n, d, derive_seed(seed, _TAG_GRAPH, i)))
                      for i in range(graphs)], dtype=float)
    target = (d - 1) / 2
    trials = n * d * (d - 1) / 2
    q = 1.0 / (n * d - 1)
    bin_se = math.sqrt(trials * q * (1 - q) / graphs)
    mean = float(loops.mean())
    std = float(loops.std(ddof=1)) if graphs > 1 else 0.0
    tails = [(float(dl), float(np.mean(np.abs(loops - target) >= dl)),
              2 * math.exp(-2 * dl * dl / n)) for dl in deltas]
    return SelfLoopReport(n, d, graphs, seed, mean, std, std / math.sqrt(graphs), bin_se,
                          target, trials * q, abs(mean - target) <= 3 * bin_se, tails)


# exact battery

@dataclass
class CheckResult:
    check: str
    graph: str
    n: int
    passed: bool
    detail: dict = field(default_factory=dict)


def small_graphs(n: int) -> list[tuple[str, MultiGraph]]:
    out = [("edgeless", empty_graph(n)), ("path", path_graph(n))]
    if n >= 3:
        out.append(("cycle", cycle_graph(n)))
        out.append(("star", star_graph(n - 1)))
    return out


def exact_battery(n_values=(2, 3, 4), t_max: int = 200, eps: float = 0.25) -> list[CheckResult]:
    """Exact verification of the contraction, second-moment, coupling and
    mixing-time inequalities on small standard graphs."""
    from . import exact

    results = []
    for n in n_values:
        for name, g in small_graphs(n):
            params = upper_recipe(n, max_degree(g))
            kc = exact.build_coupled_kernel(g, params, CouplingKind.PAPER)
            cc = exact.exact_contraction_check(g, params, Kc=kc)
            results.append(CheckResult("contraction", name, n, cc.passed, asdict(cc)))
            sm = exact.exact_second_moment_check(g, params, t_max=t_max, Kc=kc)
            gap = float((sm.bound - sm.e_rho2).min())
            results.append(CheckResult("second_moment", name, n, sm.passed, {"min_slack": gap}))
            k = exact.build_kernel(g, params)
            pi = exact.stationary(k)
            tmix = exact.exact_tmix(k, pi, eps)
            ub = upper_bound(n, gamma_const(params, n), eps)
            results.append(CheckResult("tmix_upper", name, n, tmix <= ub,
                                       {"tmix": tmix, "bound": ub}))
            prof = exact.distance_profile(k, pi, tmix)
            ok = bool(np.all(prof.d <= prof.dbar + 1e-12) and np.all(prof.dbar <= 2 * prof.d + 1e-12))
            results.append(CheckResult("sandwich", name, n, ok, {"t_max": tmix}))
            for kind in CouplingKind:
                kk = kc if kind is CouplingKind.PAPER else exact.build_coupled_kernel(g, params, kind)
                horizon = max(tmix, 1) * 3
                tail = exact.coupling_tail(kk, horizon)
                d = exact.distance_profile(k, pi, horizon, dbar=False).d
                ok = bool(np.all(d <= tail + 1e-10))
                results.append(CheckResult(f"coupling_{kind.value}", name, n, ok,
                                           {"t_max": horizon}))
    return results


# output

def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(fh, columns, rows, header: dict | None = None) -> None:
    """Rows of values under ``columns``; ``header`` becomes '# key=value' lines."""
    for k, v in (header or {}).items():
        fh.write(f"# {k}={v}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(v) for v in r])


def read_csv(text: str) -> tuple[dict, list[str], list[list[str]]]:
    header, body = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            k, _, v = line[2:].partition("=")
            header[k] = v
        else:
            body.append(line)
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    return header, rows[0], rows[1:]


def to_json(obj) -> str:
    def default(o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        if hasattr(o, "__dataclass_fields__"):
            return asdict(o)
        if isinstance(o, CouplingKind):
            return o.value
        raise TypeError(f"not serialisable: {type(o).__name__}")

    return json.dumps(obj, default=default, indent=2, sort_keys=True, allow_nan=True) + "\n"
