"""Two copies of the chain run jointly: coupled steps, coalescence times,
survival curves of the coalescence time, and Monte Carlo estimates built on
them.

Both couplings pick the same vertex for the two copies.

* ``PAPER``: independent flip draws at the chosen vertex while the copies
  differ, one shared draw once they are equal (3 uniforms per step).
* ``COMMON``: one shared uniform ``U`` at the chosen vertex; each copy flips
  iff ``U`` is below its own flip probability (2 uniforms per step).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dynamics import Params, _flip_probs, upper_bound, gamma_const, validate
from .errors import CouplingTimeout
from .graph import MultiGraph
from .parallel import map_ordered
from .rng import as_generator, stream

_TAG_RUN = 0
_TAG_PAIR = 1
_TAG_BASE = 2


class CouplingKind(enum.Enum):
    PAPER = "paper"
    COMMON = "common"

    @property
    def draws(self) -> int:
        return 3 if self is CouplingKind.PAPER else 2


def _kind(kind) -> CouplingKind:
    return kind if isinstance(kind, CouplingKind) else CouplingKind(kind)


def hamming(sigma: np.ndarray, eta: np.ndarray) -> int:
    sigma, eta = np.asarray(sigma), np.asarray(eta)
    if sigma.shape != eta.shape:
        raise ValueError(f"length mismatch: {sigma.shape} vs {eta.shape}")
    return int(np.count_nonzero(sigma != eta))


@dataclass(frozen=True)
class CoupledState:
    sigma: np.ndarray
    eta: np.ndarray
    coalesced: bool = False

    @classmethod
    def start(cls, sigma, eta) -> "CoupledState":
        s = np.array(sigma, dtype=np.uint8)
        e = np.array(eta, dtype=np.uint8)
        if s.shape != e.shape:
            raise ValueError("sigma and eta must have the same length")
        return cls(s, e, bool(np.array_equal(s, e)))


def coupled_step_batch(g: MultiGraph, params: Params, sig: np.ndarray, eta: np.ndarray,
                       kind, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One coupled step for each row pair, driven by uniforms ``u`` (R, k)."""
    kind = _kind(kind)
    sig = np.array(sig, dtype=np.uint8, copy=True)
    eta = np.array(eta, dtype=np.uint8, copy=True)
    x = np.minimum((u[:, 0] * g.n).astype(np.int64), g.n - 1)
    qs = _flip_probs(g, params, sig, x)
    qe = _flip_probs(g, params, eta, x)
    us = u[:, 1]
    if kind is CouplingKind.COMMON:
        ue = us
    else:
        equal = (sig == eta).all(axis=1)
        ue = np.where(equal, us, u[:, 2])
    rows = np.arange(len(x))
    fs = us < qs
    fe = ue < qe
    sig[rows[fs], x[fs]] ^= 1
    eta[rows[fe], x[fe]] ^= 1
    return sig, eta


def coupled_step(g: MultiGraph, params: Params, s: CoupledState, kind, rng) -> CoupledState:
    kind = _kind(kind)
    validate(g, params)
    u = as_generator(rng).random(kind.draws).reshape(1, -1)
    sig, eta = coupled_step_batch(g, params, s.sigma[None, :], s.eta[None, :], kind, u)
    sig, eta = sig[0], eta[0]
    coalesced = s.coalesced or bool(np.array_equal(sig, eta))
    return CoupledState(sig, eta, coalesced)


@dataclass(frozen=True)
class CoalescenceRecord:
    """``tau`` is None when the pair had not met by ``t_max``."""

    tau: int | None
    t_max: int
    seed: object
    pair: str = ""

    @property
    def timed_out(self) -> bool:
        return self.tau is None


def _tau(g: MultiGraph, params: Params, sigma0, eta0, kind: CouplingKind,
         rng: np.random.Generator, t_max: int) -> int | None:
    sig = np.array(sigma0, dtype=np.uint8, copy=True)
    eta = np.array(eta0, dtype=np.uint8, copy=True)
    rho = int(np.count_nonzero(sig != eta))
    if rho == 0:
        return 0
    indptr, indices = g.csr
    common = kind is CouplingKind.COMMON
    done = 0
    block = 1024
    while done < t_max:
        b = min(block, t_max - done)
        u = rng.random((b, kind.draws))
        r = _kernels.coalesce(sig, eta, indptr, indices, params.a, params.lam,
                              params.kappa, common, u, rho)
        if r >= 0:
            return done + r
        rho = int(np.count_nonzero(sig != eta))
        done += b
        block = min(block * 2, 1 << 18)
    return None


def coalescence_time(g: MultiGraph, params: Params, sigma0, eta0, kind, seed=0,
                     t_max: int = 10**7) -> CoalescenceRecord:
    kind = _kind(kind)
    validate(g, params)
    tau = _tau(g, params, sigma0, eta0, kind, as_generator(seed), t_max)
    return CoalescenceRecord(tau=tau, t_max=t_max, seed=seed)


def _pair_bank(n: int, pair: str, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    if pair == "extremal":
        return [(np.zeros(n, dtype=np.uint8), np.ones(n, dtype=np.uint8))]
    if pair.startswith("random"):
        k = int(pair.split(":", 1)[1]) if ":" in pair else 1
        if k < 1:
            raise ValueError("random:K needs K >= 1")
        bank = []
        for j in range(k):
            r = stream(seed, _TAG_PAIR, j)
            bank.append((r.integers(0, 2, n).astype(np.uint8), r.integers(0, 2, n).astype(np.uint8)))
        return bank
    raise ValueError(f"unknown pair spec {pair!r}; use 'extremal' or 'random:K'")


def _tau_job(args) -> list[float]:
    g, params, sigma0, eta0, kind, seed, j, reps, t_max = args
    out = []
    for r in reps:
        tau = _tau(g, params, sigma0, eta0, kind, stream(seed, _TAG_RUN, j, r), t_max)
        out.append(math.inf if tau is None else float(tau))
    return out


def sample_taus(g: MultiGraph, params: Params, kind, sigma0, eta0, replicas: int,
                seed: int, t_max: int, bank_id: int = 0) -> np.ndarray:
    """Coalescence times of ``replicas`` independent runs (inf = censored)."""
    kind = _kind(kind)
    validate(g, params)
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    chunk = max(1, replicas // 16)
    jobs = [(g, params, sigma0, eta0, kind, seed, bank_id, range(s, min(s + chunk, replicas)), t_max)
            for s in range(0, replicas, chunk)]
    return np.array([t for part in map_ordered(_tau_job, jobs) for t in part])


def survival(taus: np.ndarray, t) -> tuple[np.ndarray, np.ndarray]:
    """Empirical P(tau > t) and its binomial standard error."""
    taus = np.sort(np.asarray(taus, dtype=float))
    t = np.asarray(t, dtype=float)
    s = 1.0 - np.searchsorted(taus, t, side="right") / len(taus)
    return s, np.sqrt(s * (1 - s) / len(taus))


@dataclass(frozen=True)
class TailPoint:
    t: int
    survival: float
    stderr: float


def tail_curve(g: MultiGraph, params: Params, kind, pair: str = "extremal", t_grid=(0,),
               replicas: int = 1000, seed: int = 0) -> list[TailPoint]:
    """Monte Carlo survival curve of the coalescence time.

    For ``random:K`` each of K random initial pairs gets its own bank of
    replicas and the curve is the pointwise maximum over the banks.
    """
    t_grid = np.asarray(sorted(int(t) for t in t_grid))
    t_max = int(t_grid.max()) if len(t_grid) else 0
    best_s = np.full(len(t_grid), -1.0)
    best_e = np.zeros(len(t_grid))
    for j, (s0, e0) in enumerate(_pair_bank(g.n, pair, seed)):
        taus = sample_taus(g, params, kind, s0, e0, replicas, seed, t_max, bank_id=j)
        s, e = survival(taus, t_grid)
        better = s > best_s
        best_s[better] = s[better]
        best_e[better] = e[better]
    return [TailPoint(int(t), float(s), float(e)) for t, s, e in zip(t_grid, best_s, best_e)]


@dataclass(frozen=True)
class TmixEstimate:
    """``t_hat`` is the conservative estimate (survival + 3 stderr <= eps);
    ``t_lo`` uses survival - 3 stderr, ``t_point`` the bare survival."""

    t_hat: int
    t_lo: int
    t_point: int
    eps: float
    replicas: int
    budget: int
    censored: int


def _first_time(pred, budget: int) -> int | None:
    """Smallest t in [0, budget] with pred(t), by doubling then bisection."""
    if pred(0):
        return 0
    hi = 1
    while not pred(hi):
        if hi >= budget:
            return None
        hi = min(2 * hi, budget)
    lo = hi // 2  # pred(lo) is False
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def default_budget(g: MultiGraph, params: Params, eps: float) -> int:
    gam = gamma_const(params, g.n)
    if gam > 0 and g.n > 1:
        return int(math.ceil(4 * upper_bound(g.n, gam, min(eps, 0.5)))) + 100
    return int(200 * g.n * (math.log(g.n) + 1)) + 1000


def tmix_upper_estimate(g: MultiGraph, params: Params, kind, eps: float, replicas: int = 1000,
                        seed: int = 0, budget: int | None = None,
                        pair: str = "extremal") -> TmixEstimate:
    """Coupling-based upper estimate of the eps-mixing time."""
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    if budget is None:
        budget = default_budget(g, params, eps)
    bank = _pair_bank(g.n, pair, seed)
    taus_all = [sample_taus(g, params, kind, s0, e0, replicas, seed, budget, bank_id=j)
                for j, (s0, e0) in enumerate(bank)]

    def worst(t: int, z: float) -> float:
        vals = []
        for taus in taus_all:
            s, e = survival(taus, t)
            vals.append(float(s + z * e))
        return max(vals)

    t_hat = _first_time(lambda t: worst(t, 3.0) <= eps, budget)
    if t_hat is None:
        raise CouplingTimeout(f"P(tau > t) + 3 stderr stayed above eps={eps}", budget)
    t_lo = _first_time(lambda t: worst(t, -3.0) <= eps, budget)
    t_point = _first_time(lambda t: worst(t, 0.0) <= eps, budget)
    censored = int(sum(np.isinf(t).sum() for t in taus_all))
    return TmixEstimate(t_hat=t_hat, t_lo=t_lo, t_point=t_point, eps=eps,
                        replicas=replicas, budget=budget, censored=censored)


@dataclass(frozen=True)
class ContractionEstimate:
    max_mean: float
    stderr: float
    vertex: int
    base: str
    per_pair: list


def contraction_estimate(g: MultiGraph, params: Params, kind, replicas: int = 10000,
                         seed: int = 0, random_bases: int = 4) -> ContractionEstimate:
    """Largest Monte Carlo one-step expected Hamming distance over adjacent pairs.

    For every vertex ``x`` and every base configuration (all-0, all-1 and
    ``random_bases`` uniform draws) the pair is ``(base with x=0, base with x=1)``.
    """
    kind = _kind(kind)
    validate(g, params)
    n = g.n
    bases = [("all0", np.zeros(n, dtype=np.uint8)), ("all1", np.ones(n, dtype=np.uint8))]
    for b in range(random_bases):
        bases.append((f"random{b}", stream(seed, _TAG_BASE, b).integers(0, 2, n).astype(np.uint8)))
    per_pair = []
    best = None
    for bi, (name, base) in enumerate(bases):
        for x in range(n):
            s = base.copy()
            s[x] = 0
            e = base.copy()
            e[x] = 1
            u = stream(seed, _TAG_RUN, bi, x).random((replicas, kind.draws))
            s1, e1 = coupled_step_batch(g, params, np.tile(s, (replicas, 1)),
                                        np.tile(e, (replicas, 1)), kind, u)
            rho = np.count_nonzero(s1 != e1, axis=1)
            mean = float(rho.mean())
            se = float(rho.std(ddof=1) / math.sqrt(replicas)) if replicas > 1 else 0.0
            per_pair.append((name, x, mean, se))
            if best is None or mean > best[2]:
                best = (name, x, mean, se)
    return ContractionEstimate(max_mean=best[2], stderr=best[3], vertex=best[1],
                               base=best[0], per_pair=per_pair)
