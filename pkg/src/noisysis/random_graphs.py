"""Seeded random-graph generators: G(n, p), random d-regular multigraphs from
the configuration model, and Galton-Watson trees truncated to a fixed size."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GenerationError
from .graph import MultiGraph, max_degree
from .rng import as_generator, stream

MAX_GW_ATTEMPTS = 10**6


def gen_erdos_renyi(n: int, p: float, seed=None) -> MultiGraph:
    """Each of the C(n, 2) pairs is an edge independently with probability ``p``."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    rng = as_generator(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    return MultiGraph(n, np.column_stack([iu[keep], ju[keep]]))


def gen_regular_multigraph(n: int, d: int, seed=None) -> MultiGraph:
    """Configuration model: ``d`` stubs per vertex, uniform perfect matching.

    A uniformly random permutation of the stub list, paired consecutively,
    is a uniform perfect matching. Self-loops and parallel edges are kept.
    """
    if n < 1 or d < 1:
        raise ValueError(f"n and d must be positive, got n={n}, d={d}")
    if (n * d) % 2:
        raise ValueError(f"n*d must be even, got n={n}, d={d}")
    rng = as_generator(seed)
    stubs = rng.permutation(np.repeat(np.arange(n, dtype=np.int64), d))
    return MultiGraph(n, stubs.reshape(-1, 2))


def count_self_loops(g: MultiGraph) -> int:
    return int(g.loops.sum())


@dataclass(frozen=True)
class Binomial:
    m: int
    p: float

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be positive, got {self.m}")
        # p = 1 is the deterministic m-ary law; allowed on purpose
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"p must lie in (0, 1], got {self.p}")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.binomial(self.m, self.p, size=size)

    @property
    def mean(self) -> float:
        return self.m * self.p


@dataclass(frozen=True)
class Poisson:
    theta: float

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta}")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.poisson(self.theta, size=size)

    @property
    def mean(self) -> float:
        return self.theta


OffspringLaw = Binomial | Poisson


@dataclass
class GwMeta:
    """Generation sizes count every offspring drawn, including children
    discarded by truncation, so their sum can exceed the tree size."""

    generation_sizes: list[int] = field(default_factory=lambda: [1])
    restarts: int = 0
    truncated: bool = False


def _grow(law, n_target: int, rng: np.random.Generator):
    parents = []
    frontier = np.array([0], dtype=np.int64)
    count = 1
    gens = [1]
    truncated = False
    while count < n_target:
        if frontier.size == 0:
            return None
        k = law.sample(rng, frontier.size)
        gens.append(int(k.sum()))
        kids = np.repeat(frontier, k)
        room = n_target - count
        if kids.size > room:
            # breadth-first order: the vertex that fills the tree keeps only
            # part of its brood, later frontier vertices stay leaves
            kids = kids[:room]
            truncated = True
        parents.append(kids)
        frontier = np.arange(count, count + kids.size, dtype=np.int64)
        count += kids.size
    # unexpanded vertices left waiting also mean the process was cut short
    truncated = truncated or frontier.size > 0
    par = np.concatenate(parents) if parents else np.empty(0, dtype=np.int64)
    return par, gens, truncated


def gen_galton_watson(law, n_target: int, seed=0) -> tuple[MultiGraph, GwMeta]:
    """Breadth-first Galton-Watson tree with exactly ``n_target`` vertices.

    Vertex ids follow BFS order from the root 0. Extinct attempts are
    discarded and regrown from sub-stream ``attempt`` of ``seed``.
    """
    if n_target < 1:
        raise ValueError(f"n_target must be positive, got {n_target}")
    for attempt in range(MAX_GW_ATTEMPTS):
        rng = stream(seed, attempt)
        res = _grow(law, n_target, rng)
        if res is None:
            continue
        par, gens, truncated = res
        child = np.arange(1, n_target, dtype=np.int64)
        g = MultiGraph(n_target, np.column_stack([par, child]))
        return g, GwMeta(generation_sizes=gens, restarts=attempt, truncated=truncated)
    raise GenerationError(f"Galton-Watson process went extinct {MAX_GW_ATTEMPTS} times")


def tree_child_counts(g: MultiGraph) -> np.ndarray:
    """Children per vertex of a tree rooted at vertex 0."""
    c = g.degree.copy()
    c[1:] -= 1
    return c


@dataclass(frozen=True)
class DegreeCondition:
    ok: bool
    lhs: float  # lambda * max degree
    rhs: float  # n ** -alpha
    max_degree: int

    def __bool__(self) -> bool:
        return self.ok


def check_degree_condition(g: MultiGraph, lam: float, alpha: float) -> DegreeCondition:
    """Whether ``lam * max_degree(g) < n**-alpha``."""
    dmax = max_degree(g)
    lhs = lam * dmax
    rhs = float(g.n) ** (-alpha)
    return DegreeCondition(ok=lhs < rhs, lhs=lhs, rhs=rhs, max_degree=dmax)
