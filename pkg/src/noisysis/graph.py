"""Multigraphs with self-loops, neighbour counts, and the edge-list format.

Configurations are plain ``uint8`` arrays of length ``n`` (1 = infected).
For exact computations a configuration is identified with the integer
``sum(sigma[x] << x)``, i.e. vertex 0 is the least significant bit.
"""

from __future__ import annotations

from functools import cached_property
from typing import Iterable

import numpy as np
import scipy.sparse as sp

from .errors import GraphFormatError

HEADER_PREFIX = "nsis-graph v1 n="


class MultiGraph:
    """Undirected multigraph on vertices ``0..n-1``.

    Each row of ``edges`` is one edge instance ``(u, v)`` with ``u <= v``;
    ``u == v`` is a self-loop. Rows are kept sorted, so two graphs with the
    same edge multiset compare equal.
    """

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] | np.ndarray = ()):
        n = int(n)
        if n < 1:
            raise ValueError(f"graph needs at least one vertex, got n={n}")
        if not isinstance(edges, np.ndarray):
            edges = list(edges)
        e = np.asarray(edges, dtype=np.int64)
        if e.size == 0:
            e = np.empty((0, 2), dtype=np.int64)
        e = e.reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise ValueError(f"edge endpoint out of range for n={n}")
        e = np.sort(e, axis=1)
        order = np.lexsort((e[:, 1], e[:, 0]))
        self.n = n
        self.edges = e[order]
        self.edges.setflags(write=False)

    def __repr__(self) -> str:
        return f"MultiGraph(n={self.n}, m={self.num_edges}, loops={int(self.loops.sum())})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiGraph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    __hash__ = None

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def loops(self) -> np.ndarray:
        is_loop = self.edges[:, 0] == self.edges[:, 1]
        return np.bincount(self.edges[is_loop, 0], minlength=self.n)

    @cached_property
    def _plain(self) -> np.ndarray:
        return self.edges[self.edges[:, 0] != self.edges[:, 1]]

    @cached_property
    def degree(self) -> np.ndarray:
        """Non-loop degree of every vertex, parallel edges counted."""
        pe = self._plain
        return np.bincount(pe.ravel(), minlength=self.n)

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric multiplicity matrix of non-loop edges (zero diagonal)."""
        pe = self._plain
        rows = np.concatenate([pe[:, 0], pe[:, 1]])
        cols = np.concatenate([pe[:, 1], pe[:, 0]])
        data = np.ones(len(rows), dtype=np.int64)
        a = sp.coo_matrix((data, (rows, cols)), shape=(self.n, self.n)).tocsr()
        a.sum_duplicates()
        return a

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)`` with one neighbour entry per edge instance."""
        pe = self._plain
        src = np.concatenate([pe[:, 0], pe[:, 1]])
        dst = np.concatenate([pe[:, 1], pe[:, 0]])
        order = np.argsort(src, kind="stable")
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=self.n), out=indptr[1:])
        return indptr, dst[order].astype(np.int64)

    def multiplicity(self, u: int, v: int) -> int:
        u, v = min(u, v), max(u, v)
        return int(np.count_nonzero((self.edges[:, 0] == u) & (self.edges[:, 1] == v)))

    def infected_neighbor_counts(self, sigma: np.ndarray) -> np.ndarray:
        """``n_I`` at every vertex; ``sigma`` may be a batch of shape (R, n)."""
        s = np.asarray(sigma)
        if s.shape[-1] != self.n:
            raise ValueError(f"configuration length {s.shape[-1]} != n={self.n}")
        if s.ndim == 1:
            return self.adjacency @ s.astype(np.int64)
        return (self.adjacency @ s.astype(np.int64).T).T


def _check_vertex(g: MultiGraph, x: int) -> int:
    x = int(x)
    if not 0 <= x < g.n:
        raise IndexError(f"vertex {x} out of range [0, {g.n})")
    return x


def neighbor_degree(g: MultiGraph, x: int) -> int:
    """Number of non-loop edge instances at ``x``."""
    return int(g.degree[_check_vertex(g, x)])


def max_degree(g: MultiGraph) -> int:
    return int(g.degree.max()) if g.n else 0


def infected_neighbors(g: MultiGraph, sigma: np.ndarray, x: int) -> int:
    x = _check_vertex(g, x)
    sigma = np.asarray(sigma)
    if sigma.shape != (g.n,):
        raise ValueError(f"configuration length {sigma.shape} != n={g.n}")
    indptr, indices = g.csr
    return int(sigma[indices[indptr[x]:indptr[x + 1]]].sum())


def parse_graph(text: str) -> MultiGraph:
    lines = text.split("\n")
    header_line = None
    n = None
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if n is None:
            if not line.startswith(HEADER_PREFIX):
                raise GraphFormatError(f"expected header '{HEADER_PREFIX}<N>'", lineno)
            try:
                n = int(line[len(HEADER_PREFIX):])
            except ValueError:
                raise GraphFormatError("vertex count is not an integer", lineno) from None
            if n < 1:
                raise GraphFormatError(f"vertex count must be positive, got {n}", lineno)
            header_line = lineno
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"expected 'u v', got {line!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"non-integer endpoint in {line!r}", lineno) from None
        if u < 0 or v < 0:
            raise GraphFormatError("negative vertex index", lineno)
        if u >= n or v >= n:
            raise GraphFormatError(f"vertex index >= n={n}", lineno)
        edges.append((u, v))
    if header_line is None:
        raise GraphFormatError("missing header", 1)
    return MultiGraph(n, edges)


def serialize_graph(g: MultiGraph) -> str:
    out = [f"{HEADER_PREFIX}{g.n}"]
    out.extend(f"{u} {v}" for u, v in g.edges.tolist())
    return "\n".join(out) + "\n"


def read_graph(path) -> MultiGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


def write_graph(g: MultiGraph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_graph(g))


# small constructors used by tests and the exact battery

def path_graph(n: int) -> MultiGraph:
    return MultiGraph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> MultiGraph:
    if n < 3:
        raise ValueError("cycle needs n >= 3")
    return MultiGraph(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(leaves: int) -> MultiGraph:
    return MultiGraph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def empty_graph(n: int) -> MultiGraph:
    return MultiGraph(n)


# configuration <-> state index

def config_to_index(sigma: np.ndarray) -> int:
    sigma = np.asarray(sigma, dtype=np.int64)
    return int((sigma << np.arange(len(sigma), dtype=np.int64)).sum())


def index_to_config(index: int, n: int) -> np.ndarray:
    return ((int(index) >> np.arange(n)) & 1).astype(np.uint8)


def all_configs(n: int) -> np.ndarray:
    """Bit matrix of shape (2**n, n); row ``s`` is the configuration of index s."""
    s = np.arange(1 << n, dtype=np.int64)
    return ((s[:, None] >> np.arange(n)) & 1).astype(np.uint8)
