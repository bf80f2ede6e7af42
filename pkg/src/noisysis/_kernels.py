"""Compiled inner loops. Randomness is passed in as pre-drawn uniforms so the
loops are pure functions of their inputs; column 0 of ``u`` picks the
vertex, the remaining columns drive the flips."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def flip_prob(state, x, indptr, indices, a, lam, kappa):
    if state[x] == 1:
        return kappa
    k = 0
    for j in range(indptr[x], indptr[x + 1]):
        k += state[indices[j]]
    return a + lam * k


@njit(cache=True)
def pick_vertex(u, n):
    x = int(u * n)
    return x if x < n else n - 1


@njit(cache=True)
def run_steps(sigma, indptr, indices, a, lam, kappa, u, t0, stride, counts, occ, idx):
    """Advance ``sigma`` by ``len(u)`` steps in place.

    ``counts[t // stride]`` receives the infected total whenever the global
    step index ``t`` (after the update) is a multiple of ``stride``. ``occ``
    (length 0 to disable) accumulates visits of the state index after each
    step. Returns the updated state index.
    """
    n = sigma.shape[0]
    infected = 0
    for v in range(n):
        infected += sigma[v]
    use_occ = occ.shape[0] > 0
    for i in range(u.shape[0]):
        x = pick_vertex(u[i, 0], n)
        q = flip_prob(sigma, x, indptr, indices, a, lam, kappa)
        if u[i, 1] < q:
            if sigma[x] == 1:
                sigma[x] = 0
                infected -= 1
            else:
                sigma[x] = 1
                infected += 1
            idx ^= 1 << x
        t = t0 + i + 1
        if t % stride == 0:
            counts[t // stride] = infected
        if use_occ:
            occ[idx] += 1
    return idx


@njit(cache=True)
def coalesce(sigma, eta, indptr, indices, a, lam, kappa, common, u, rho):
    """Run the coupled pair in place until it meets or ``u`` runs out.

    Returns the number of steps consumed when the Hamming distance first
    hits 0, or -1 if it never did within this block.
    """
    n = sigma.shape[0]
    for i in range(u.shape[0]):
        x = pick_vertex(u[i, 0], n)
        qs = flip_prob(sigma, x, indptr, indices, a, lam, kappa)
        qe = flip_prob(eta, x, indptr, indices, a, lam, kappa)
        us = u[i, 1]
        ue = us if common else u[i, 2]
        was_diff = sigma[x] != eta[x]
        if us < qs:
            sigma[x] = 1 - sigma[x]
        if ue < qe:
            eta[x] = 1 - eta[x]
        now_diff = sigma[x] != eta[x]
        if was_diff and not now_diff:
            rho -= 1
        elif now_diff and not was_diff:
            rho += 1
        if rho == 0:
            return i + 1
    return -1


def warmup() -> None:
    """Trigger compilation once (useful before timing)."""
    s = np.zeros(2, dtype=np.uint8)
    ip = np.zeros(3, dtype=np.int64)
    ix = np.zeros(0, dtype=np.int64)
    u = np.full((1, 3), 0.5)
    run_steps(s, ip, ix, 0.5, 0.0, 0.1, u, 0, 1, np.zeros(2, dtype=np.int64),
              np.zeros(0, dtype=np.int64), 0)
    coalesce(s.copy(), s.copy(), ip, ix, 0.5, 0.0, 0.1, True, u, 1)
