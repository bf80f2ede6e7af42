"""Exact finite-state computations for small graphs.

Single-chain kernels live on the 2**n configurations, indexed as in
:func:`noisysis.graph.config_to_index`. Pair kernels live on 4**n states with
index ``(sigma_index << n) | eta_index``. Both are stored as CSR matrices:
a row has at most ``n + 1`` (single) or ``3n + 1`` (pair) nonzeros, so the
sparse form is what makes n = 7 pair kernels and n = 14 single kernels fit
in memory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.spatial.distance import cdist
import scipy.sparse.linalg as spla
from scipy.stats import binom

from .coupling import CouplingKind, _kind
from .dynamics import (Params, beta_const, gamma_const, require_upper_regime,
                       check_regime, validate)
from .errors import ConvergenceError, RegimeError, ResourceLimitError
from .graph import MultiGraph, all_configs

MAX_N_SINGLE = 14
MAX_N_PAIR = 7
MAX_N_PROFILE = 12
ROW_TOL = 1e-12
STATIONARY_TOL = 1e-12
POWER_TOL = 1e-13
POWER_MAX_ITER = 10**6


@dataclass(frozen=True)
class Kernel:
    matrix: sp.csr_matrix
    n: int
    kind: CouplingKind | None = None  # None for single-chain kernels

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def row_sum_error(self) -> float:
        return float(np.abs(np.asarray(self.matrix.sum(axis=1)).ravel() - 1.0).max())

    def check(self) -> None:
        err = self.row_sum_error()
        if err > ROW_TOL:
            raise AssertionError(f"row sums off by {err:.3e}")
        d = self.matrix.data
        if d.size and (d.min() < 0 or d.max() > 1):
            raise AssertionError("kernel entry outside [0, 1]")


def _single_flip_probs(g: MultiGraph, params: Params) -> tuple[np.ndarray, np.ndarray]:
    """Per-state, per-vertex flip probability (not divided by n)."""
    bits = all_configs(g.n)
    n_i = bits.astype(np.int64) @ g.adjacency.toarray()
    q = np.where(bits == 1, params.kappa, params.a + params.lam * n_i)
    return bits, q


def build_kernel(g: MultiGraph, params: Params, max_n: int = MAX_N_SINGLE) -> Kernel:
    """Transition matrix of the single chain over all 2**n configurations."""
    if g.n > max_n:
        raise ResourceLimitError(f"n={g.n} exceeds single-kernel cap {max_n}")
    validate(g, params)
    n, size = g.n, 1 << g.n
    _, q = _single_flip_probs(g, params)
    q = q / n
    states = np.arange(size, dtype=np.int64)
    rows = np.repeat(states, n)
    cols = (states[:, None] ^ (1 << np.arange(n, dtype=np.int64))).ravel()
    off = q.ravel()
    diag = 1.0 - q.sum(axis=1)
    m = sp.csr_matrix((np.concatenate([off, diag]),
                       (np.concatenate([rows, states]), np.concatenate([cols, states]))),
                      shape=(size, size))
    m.sum_duplicates()
    return Kernel(m, n)


def stationary(K: Kernel) -> np.ndarray:
    """Invariant law via a direct solve, with power iteration as fallback."""
    size = K.size
    if size == 1:
        return np.ones(1)
    rhs = np.zeros(size)
    rhs[-1] = 1.0
    pi = None
    try:
        if size <= 4096:
            m = K.dense().T - np.eye(size)
            m[-1, :] = 1.0
            pi = scipy.linalg.solve(m, rhs)
        else:
            m = (K.matrix.T - sp.identity(size, format="csr")).tolil()
            m[-1, :] = np.ones(size)
            pi = spla.spsolve(m.tocsc(), rhs)
    except (np.linalg.LinAlgError, RuntimeError):
        pi = None
    if pi is not None:
        pi = np.clip(pi, 0.0, None)
        pi /= pi.sum()
        res = _residual(K, pi)
        if res <= STATIONARY_TOL:
            return pi
    return _power_iteration(K, pi)


def _residual(K: Kernel, pi: np.ndarray) -> float:
    return float(np.abs(K.matrix.T @ pi - pi).sum())


def _power_iteration(K: Kernel, start: np.ndarray | None) -> np.ndarray:
    pi = np.full(K.size, 1.0 / K.size) if start is None else start.copy()
    kt = K.matrix.T.tocsr()
    for _ in range(POWER_MAX_ITER):
        nxt = kt @ pi
        nxt /= nxt.sum()
        change = float(np.abs(nxt - pi).sum())
        pi = nxt
        if change <= POWER_TOL:
            break
    res = _residual(K, pi)
    if res > STATIONARY_TOL:
        raise ConvergenceError("stationary law did not converge", res)
    return pi


def tv(mu: np.ndarray, nu: np.ndarray) -> float:
    mu, nu = np.asarray(mu, dtype=float), np.asarray(nu, dtype=float)
    if mu.shape != nu.shape:
        raise ValueError(f"size mismatch: {mu.shape} vs {nu.shape}")
    return 0.5 * float(np.abs(mu - nu).sum())


def _max_pair_tv(rows: np.ndarray, d_rows: np.ndarray, block: int = 64) -> float:
    """max_{i,j} tv(rows[i], rows[j]), pruned with tv <= d_i + d_j."""
    order = np.argsort(-d_rows)
    rows = np.ascontiguousarray(rows[order])
    d_sorted = d_rows[order]
    best = 0.5 * float(cdist(rows[:1], rows, "cityblock").max())
    for start in range(1, len(rows), block):
        if d_sorted[start] + d_sorted[0] <= best:
            break
        # rows j with d_start + d_j <= best cannot improve; they form a suffix
        cut = np.searchsorted(-d_sorted, -(best - d_sorted[start]), side="right")
        cand = rows[:max(cut, 1)]
        val = 0.5 * float(cdist(rows[start:start + block], cand, "cityblock").max())
        best = max(best, val)
    return best


@dataclass(frozen=True)
class DistanceProfile:
    d: np.ndarray
    dbar: np.ndarray | None

    @property
    def t(self) -> np.ndarray:
        return np.arange(len(self.d))


def distance_profile(K: Kernel, pi: np.ndarray, t_max: int, dbar: bool = True) -> DistanceProfile:
    """d(t) and d-bar(t) for t = 0..t_max, from point-mass starts."""
    if K.n > MAX_N_PROFILE:
        raise ResourceLimitError(f"n={K.n} exceeds profile cap {MAX_N_PROFILE}")
    p = np.eye(K.size)
    ds, dbars = [], []
    for t in range(t_max + 1):
        if t:
            p = p @ K.matrix
        d_rows = 0.5 * np.abs(p - pi).sum(axis=1)
        ds.append(float(d_rows.max()))
        if dbar:
            dbars.append(_max_pair_tv(p, d_rows))
    return DistanceProfile(np.array(ds), np.array(dbars) if dbar else None)


def exact_tmix(K: Kernel, pi: np.ndarray, eps: float, t_cap: int = 10**6) -> int:
    """Smallest t with d(t) <= eps.

    d(t) is nonincreasing and each step costs one sparse product, so a
    forward scan is exact and cheaper than squaring dense powers.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if K.n > MAX_N_PROFILE:
        raise ResourceLimitError(f"n={K.n} exceeds profile cap {MAX_N_PROFILE}")
    p = np.eye(K.size)
    for t in range(t_cap + 1):
        if t:
            p = p @ K.matrix
        if 0.5 * np.abs(p - pi).sum(axis=1).max() <= eps:
            return t
    raise RuntimeError(f"d(t) > eps up to t_cap={t_cap}")


def pair_index(sigma_idx, eta_idx, n: int):
    return (np.asarray(sigma_idx, dtype=np.int64) << n) | np.asarray(eta_idx, dtype=np.int64)


def build_coupled_kernel(g: MultiGraph, params: Params, kind,
                         max_n: int = MAX_N_PAIR) -> Kernel:
    """Exact joint transition matrix of :func:`noisysis.coupling.coupled_step`.

    Pairs with sigma == eta move together, so the diagonal set is closed.
    """
    kind = _kind(kind)
    if g.n > max_n:
        raise ResourceLimitError(f"n={g.n} exceeds pair-kernel cap {max_n}")
    validate(g, params)
    n, size = g.n, 1 << g.n
    _, q = _single_flip_probs(g, params)
    s_idx = np.repeat(np.arange(size, dtype=np.int64), size)
    e_idx = np.tile(np.arange(size, dtype=np.int64), size)
    src = pair_index(s_idx, e_idx, n)
    equal = s_idx == e_idx
    rows, cols, vals = [], [], []
    total = np.zeros(len(src))
    for x in range(n):
        bit = np.int64(1) << x
        qs = q[s_idx, x]
        qe = q[e_idx, x]
        if kind is CouplingKind.PAPER:
            both = np.where(equal, qs, qs * qe)
            only_s = np.where(equal, 0.0, qs * (1 - qe))
            only_e = np.where(equal, 0.0, (1 - qs) * qe)
        else:
            both = np.minimum(qs, qe)
            only_s = np.clip(qs - qe, 0.0, None)
            only_e = np.clip(qe - qs, 0.0, None)
        for prob, ds, de in ((both, bit, bit), (only_s, bit, 0), (only_e, 0, bit)):
            keep = prob > 0
            rows.append(src[keep])
            cols.append(pair_index(s_idx[keep] ^ ds, e_idx[keep] ^ de, n))
            vals.append(prob[keep] / n)
            total[keep] += prob[keep] / n
    rows.append(src)
    cols.append(src)
    vals.append(1.0 - total)
    m = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(size * size, size * size))
    m.sum_duplicates()
    return Kernel(m, n, kind)


def pair_hamming(n: int) -> np.ndarray:
    """Hamming distance of every pair state."""
    size = 1 << n
    x = np.repeat(np.arange(size, dtype=np.int64), size) ^ np.tile(np.arange(size, dtype=np.int64), size)
    return np.array([bin(v).count("1") for v in range(size)], dtype=np.int64)[x]


def marginals(Kc: Kernel, pair_state: int) -> tuple[np.ndarray, np.ndarray]:
    """Laws of sigma and eta after one coupled step from ``pair_state``."""
    n = Kc.n
    size = 1 << n
    row = Kc.matrix.getrow(pair_state)
    s = np.zeros(size)
    e = np.zeros(size)
    np.add.at(s, row.indices >> n, row.data)
    np.add.at(e, row.indices & (size - 1), row.data)
    return s, e


@dataclass(frozen=True)
class ContractionCheck:
    max_e_rho1: float
    min_e_rho1: float
    upper: float  # 1 - gamma/n
    lower: float  # 1 - beta/n
    passed_upper: bool
    passed_lower: bool

    @property
    def passed(self) -> bool:
        return self.passed_upper and self.passed_lower


def adjacent_pairs(n: int) -> np.ndarray:
    """Pair-state indices of all (sigma, sigma with one site flipped)."""
    size = 1 << n
    s = np.repeat(np.arange(size, dtype=np.int64), n)
    x = np.tile(np.arange(n, dtype=np.int64), size)
    return pair_index(s, s ^ (np.int64(1) << x), n)


def exact_contraction_check(g: MultiGraph, params: Params, kind=CouplingKind.PAPER,
                            Kc: Kernel | None = None) -> ContractionCheck:
    """Exact one-step expected Hamming distance over all adjacent pairs,
    compared with 1 - gamma/n (above) and 1 - beta/n (below)."""
    kind = _kind(kind)
    if kind is not CouplingKind.PAPER:
        raise ValueError("contraction check needs the independent-flip coupling (kind='paper')")
    require_upper_regime(params, g.n)
    if Kc is None:
        Kc = build_coupled_kernel(g, params, kind)
    rho = pair_hamming(g.n).astype(float)
    e1 = Kc.matrix[adjacent_pairs(g.n)] @ rho
    up = 1 - gamma_const(params, g.n) / g.n
    lo = 1 - beta_const(params, g) / g.n
    mx, mn = float(e1.max()), float(e1.min())
    return ContractionCheck(mx, mn, up, lo, mx <= up + 1e-12, mn >= lo - 1e-12)


@dataclass(frozen=True)
class SecondMomentCheck:
    e_rho: np.ndarray
    e_rho2: np.ndarray
    bound: np.ndarray
    var: np.ndarray
    var_bound: float
    var_checked: bool  # lower regime holds, so Var <= n/(2 gamma) is expected
    passed: bool

    @property
    def var_ok(self) -> bool:
        return bool(np.all(self.var <= self.var_bound + 1e-10))


def exact_second_moment_check(g: MultiGraph, params: Params, kind=CouplingKind.PAPER,
                              t_max: int = 200, alpha: float | None = None,
                              Kc: Kernel | None = None) -> SecondMomentCheck:
    """E[rho_t^2] <= n^2 (1 - 2 gamma/n)^t + n/(2 gamma) from the extremal pair."""
    kind = _kind(kind)
    n = g.n
    gam = gamma_const(params, n)
    if not gam > 0:
        raise RegimeError(f"second-moment bound needs gamma > 0, got {gam}")
    if Kc is None:
        Kc = build_coupled_kernel(g, params, kind)
    rho = pair_hamming(n).astype(float)
    mu = np.zeros(Kc.size)
    mu[int(pair_index(0, (1 << n) - 1, n))] = 1.0
    kt = Kc.matrix.T.tocsr()
    e1, e2 = [], []
    for t in range(t_max + 1):
        if t:
            mu = kt @ mu
        e1.append(float(mu @ rho))
        e2.append(float(mu @ rho**2))
    e1, e2 = np.array(e1), np.array(e2)
    ts = np.arange(t_max + 1)
    bound = n**2 * (1 - 2 * gam / n) ** ts + n / (2 * gam)
    var_checked = alpha is not None and n >= 2 and check_regime(params, n, alpha).regime_lower
    return SecondMomentCheck(e_rho=e1, e_rho2=e2, bound=bound, var=e2 - e1**2,
                             var_bound=n / (2 * gam), var_checked=bool(var_checked),
                             passed=bool(np.all(e2 <= bound + 1e-10)))


def coupling_tail(Kc: Kernel, t_max: int) -> np.ndarray:
    """sup over pairs of P(tau > t), t = 0..t_max, diagonal absorbing."""
    n = Kc.n
    alive = (pair_hamming(n) > 0).astype(float)
    v = alive.copy()
    out = []
    for t in range(t_max + 1):
        if t:
            v = Kc.matrix @ v
        out.append(float(v.max()))
    return np.array(out)


# edgeless graphs: exact lumped chain for larger n

def edgeless_profile(n: int, params: Params, t_max: int) -> np.ndarray:
    """Exact d(t), t = 0..t_max, on the edgeless graph with n vertices.

    From a start with k infected sites the law stays exchangeable within the
    initially infected and initially susceptible groups, and so does the
    product stationary law; TV therefore equals the TV of the two group
    counts, a chain on (k+1)(n-k+1) states.
    """
    a, kap = params.a, params.kappa
    p1 = a / (a + kap)
    worst = np.zeros(t_max + 1)
    for k in range(n + 1):
        m = n - k
        i = np.repeat(np.arange(k + 1), m + 1)
        j = np.tile(np.arange(m + 1), k + 1)
        idx = i * (m + 1) + j
        size = len(idx)
        rows, cols, vals = [], [], []
        moves = (
            (i > 0, -(m + 1), i * kap / n),
            (i < k, (m + 1), (k - i) * a / n),
            (j > 0, -1, j * kap / n),
            (j < m, 1, (m - j) * a / n),
        )
        out = np.zeros(size)
        for ok, shift, prob in moves:
            rows.append(idx[ok])
            cols.append(idx[ok] + shift)
            vals.append(prob[ok])
            out[ok] += prob[ok]
        rows.append(idx)
        cols.append(idx)
        vals.append(1 - out)
        kt = sp.csr_matrix((np.concatenate(vals), (np.concatenate(cols), np.concatenate(rows))),
                           shape=(size, size))
        pi = binom.pmf(i, k, p1) * binom.pmf(j, m, p1)
        mu = np.zeros(size)
        mu[k * (m + 1)] = 1.0
        for t in range(t_max + 1):
            if t:
                mu = kt @ mu
            worst[t] = max(worst[t], 0.5 * float(np.abs(mu - pi).sum()))
    return worst


def edgeless_tmix(n: int, params: Params, eps: float) -> int:
    t_max = 64
    while True:
        d = edgeless_profile(n, params, t_max)
        hit = np.nonzero(d <= eps)[0]
        if hit.size:
            return int(hit[0])
        t_max *= 2
        if t_max > 10**6:
            raise RuntimeError("edgeless d(t) did not reach eps")

