"""The noisy SIS chain: parameters, regime checks, closed-form constants,
single steps, long runs, and the mixing-time bounds.

One step picks a vertex ``x`` uniformly. A susceptible ``x`` becomes infected
with probability ``a + lam * n_I(x)``; an infected ``x`` recovers with
probability ``kappa``. Each step consumes two uniforms from the caller's
stream, vertex first, flip second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ParameterError, RegimeError
from .graph import MultiGraph, config_to_index, infected_neighbors, max_degree
from .rng import as_generator

CHUNK = 1 << 18


@dataclass(frozen=True)
class Params:
    a: float
    lam: float
    kappa: float

    def __post_init__(self):
        if not 0.0 < self.a < 1.0:
            raise ParameterError(f"a must lie in (0, 1), got {self.a}")
        if not self.lam >= 0.0:
            raise ParameterError(f"lambda must be >= 0, got {self.lam}")
        if not 0.0 < self.kappa < 1.0:
            raise ParameterError(f"kappa must lie in (0, 1), got {self.kappa}")


def p_star(g: MultiGraph, params: Params) -> float:
    return params.a + params.lam * max_degree(g)


def validate(g: MultiGraph, params: Params) -> None:
    ps = p_star(g, params)
    if not ps < 1.0:
        raise ParameterError(f"p* = a + lambda*max_degree = {ps!r} must be < 1")


def infection_prob(g: MultiGraph, params: Params, sigma: np.ndarray, x: int) -> float:
    validate(g, params)
    return params.a + params.lam * infected_neighbors(g, sigma, x)


def gamma_const(params: Params, n: int) -> float:
    """Contraction constant; may be <= 0 outside the strong-infection regime."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    a, k = params.a, params.kappa
    return (1 - k) * a + (1 - a) * k - 2 * (n - 1) * k * (1 - k)


def beta_const(params: Params, g: MultiGraph) -> float:
    validate(g, params)
    k = params.kappa
    return k + p_star(g, params) * (1 - 2 * k)


def alpha_threshold(n: int) -> float:
    """Smallest alpha for which the lower-bound regime admits any kappa."""
    return math.log(4 * (n - 1) ** 2) / math.log(n)


@dataclass(frozen=True)
class RegimeReport:
    n: int
    p_star: float
    p_star_ok: bool
    regime_upper: bool
    regime_lower: bool
    alpha: float | None
    gamma: float
    beta: float
    feasible_alpha_min: float
    failed: tuple[str, ...] = field(default=())


def check_regime(params: Params, n: int, alpha: float | None = None,
                 max_degree: int = 0) -> RegimeReport:
    """Evaluate both strong-infection regimes literally.

    Upper regime:  0 < kappa < 1/(4(n-1))  and  a > 1 - kappa > 1/2.
    Lower regime:  0 < kappa < 1/(4(n-1)^2), a > 1 - n^-alpha > 1 - kappa > 1/2,
    alpha > 1. Without ``alpha`` the lower regime is reported as not holding.
    ``failed`` names every inequality that does not hold.
    """
    if n < 2:
        raise ValueError(f"regime checks need n >= 2, got {n}")
    a, k = params.a, params.kappa
    failed = []

    def need(cond: bool, name: str) -> bool:
        if not cond:
            failed.append(name)
        return cond

    up = [
        need(0 < k < 1 / (4 * (n - 1)), "kappa < 1/(4(n-1))"),
        need(a > 1 - k, "a > 1 - kappa"),
        need(1 - k > 0.5, "1 - kappa > 1/2"),
    ]
    if alpha is None:
        low_ok = False
        failed.append("alpha not given")
    else:
        tail = float(n) ** (-alpha)
        low = [
            need(alpha > 1, "alpha > 1"),
            need(0 < k < 1 / (4 * (n - 1) ** 2), "kappa < 1/(4(n-1)^2)"),
            need(a > 1 - tail, "a > 1 - n^-alpha"),
            need(1 - tail > 1 - k, "1 - n^-alpha > 1 - kappa"),
            need(1 - k > 0.5, "1 - kappa > 1/2 (lower)"),
        ]
        low_ok = all(low)
    ps = a + params.lam * max_degree
    return RegimeReport(
        n=n, p_star=ps, p_star_ok=ps < 1, regime_upper=all(up), regime_lower=low_ok,
        alpha=alpha, gamma=gamma_const(params, n), beta=k + ps * (1 - 2 * k),
        feasible_alpha_min=alpha_threshold(n), failed=tuple(failed),
    )


def require_upper_regime(params: Params, n: int) -> RegimeReport:
    rep = check_regime(params, n)
    if not rep.regime_upper:
        bad = [f for f in rep.failed if f != "alpha not given"]
        raise RegimeError("upper regime violated: " + "; ".join(bad))
    return rep


# single steps

def _flip_probs(g: MultiGraph, params: Params, states: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Flip probability at vertex ``x[r]`` of ``states[r]`` for a batch."""
    n_i = np.asarray(g.adjacency[x].multiply(states).sum(axis=1)).ravel()
    cur = states[np.arange(len(x)), x]
    return np.where(cur == 1, params.kappa, params.a + params.lam * n_i)


def step_batch(g: MultiGraph, params: Params, states: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Apply one step to each row of ``states`` using uniforms ``u`` (R, 2)."""
    states = np.array(states, dtype=np.uint8, copy=True)
    x = np.minimum((u[:, 0] * g.n).astype(np.int64), g.n - 1)
    q = _flip_probs(g, params, states, x)
    flip = u[:, 1] < q
    rows = np.nonzero(flip)[0]
    states[rows, x[rows]] ^= 1
    return states


def step(g: MultiGraph, params: Params, sigma: np.ndarray, rng) -> np.ndarray:
    validate(g, params)
    rng = as_generator(rng)
    u = rng.random(2).reshape(1, 2)
    return step_batch(g, params, np.asarray(sigma)[None, :], u)[0]


@dataclass
class Trajectory:
    infected_counts: np.ndarray
    final: np.ndarray
    steps: int
    stride: int
    seed: object
    occupation: np.ndarray | None = None

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.infected_counts)) * self.stride


def initial_config(n: int, init: str, rng=None) -> np.ndarray:
    if init == "all0":
        return np.zeros(n, dtype=np.uint8)
    if init == "all1":
        return np.ones(n, dtype=np.uint8)
    if init == "random":
        return as_generator(rng).integers(0, 2, size=n).astype(np.uint8)
    raise ValueError(f"unknown init {init!r}")


def run_chain(g: MultiGraph, params: Params, sigma0: np.ndarray, steps: int,
              stride: int = 1, seed=0, occupation: bool = False) -> Trajectory:
    """Run ``steps`` updates from ``sigma0``.

    Infected totals are recorded at t = 0, stride, 2*stride, ... <= steps.
    With ``occupation=True`` (n <= 24) the visit counts of every state index
    over times 1..steps are returned as well.
    """
    validate(g, params)
    if stride < 1:
        raise ValueError("stride must be >= 1")
    sigma = np.array(sigma0, dtype=np.uint8, copy=True)
    if sigma.shape != (g.n,):
        raise ValueError(f"initial configuration has shape {sigma.shape}, expected ({g.n},)")
    rng = as_generator(seed)
    counts = np.zeros(steps // stride + 1, dtype=np.int64)
    counts[0] = int(sigma.sum())
    if occupation:
        if g.n > 24:
            raise ValueError("occupation tracking limited to n <= 24")
        occ = np.zeros(1 << g.n, dtype=np.int64)
    else:
        occ = np.zeros(0, dtype=np.int64)
    idx = config_to_index(sigma) if occupation else 0
    indptr, indices = g.csr
    done = 0
    while done < steps:
        block = min(CHUNK, steps - done)
        u = rng.random((block, 2))
        idx = _kernels.run_steps(sigma, indptr, indices, params.a, params.lam,
                                 params.kappa, u, done, stride, counts, occ, idx)
        done += block
    return Trajectory(infected_counts=counts, final=sigma, steps=steps, stride=stride,
                      seed=seed, occupation=occ if occupation else None)


# mixing-time bounds

def upper_bound(n: int, gamma: float, eps: float) -> float:
    """(n / gamma) (ln n + ln(1/eps))."""
    if not gamma > 0:
        raise RegimeError(f"upper bound needs gamma > 0, got {gamma}")
    return n / gamma * (math.log(n) + math.log(1 / eps))


def lower_bound(n: int, beta: float, gamma: float, eps: float) -> float:
    """(n / (2 beta)) (ln n + ln(gamma eps / 4)); negative values are vacuous."""
    if not gamma > 0:
        raise RegimeError(f"lower bound needs gamma > 0, got {gamma}")
    return n / (2 * beta) * (math.log(n) + math.log(gamma * eps / 4))


@dataclass(frozen=True)
class Bounds:
    lower: float
    upper: float
    gamma: float
    beta: float

    @property
    def lower_vacuous(self) -> bool:
        return self.lower <= 0


def theorem_bounds(g: MultiGraph, params: Params, eps: float) -> Bounds:
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    gam = gamma_const(params, g.n)
    bet = beta_const(params, g)
    return Bounds(lower=lower_bound(g.n, bet, gam, eps), upper=upper_bound(g.n, gam, eps),
                  gamma=gam, beta=bet)
