"""Undirected graphs, elimination orderings, and map sparsity patterns.

The sparsity pattern of a triangular map comes from the variable
elimination game: relabel the graph by an ordering, then for node m = p
down to 1 connect all of m's lower-ordered neighbors pairwise and mark m
processed.  The resulting (induced) graph's non-edges below the diagonal
are exactly the inactive pairs the map may drop.  No actual
marginalization happens; only the intermediate adjacency is tracked.

Fill-in depends on the ordering.  The greedy heuristics here follow the
sparse-Cholesky convention: the first greedily eliminated vertex gets
position 1.  Because the elimination game above runs from position p
downward, the ordering to feed it is the *reverse* of a good Cholesky
ordering; ``order_reverse_cholesky`` (the reverse of min-degree) is the
default used by the iterative driver.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .transport import SparsityPattern


@dataclass(frozen=True)
class Graph:
    """Undirected graph on vertices 1..p with an edge set of (j, k), j < k."""

    p: int
    edges: frozenset

    def __post_init__(self):
        for j, k in self.edges:
            if not (1 <= j < k <= self.p):
                raise ValueError(f"invalid edge ({j}, {k}) for p = {self.p}")

    @staticmethod
    def from_edges(p: int, edges) -> "Graph":
        norm = frozenset((min(a, b), max(a, b)) for a, b in edges)
        return Graph(p, norm)

    @staticmethod
    def empty(p: int) -> "Graph":
        return Graph(p, frozenset())

    @staticmethod
    def complete(p: int) -> "Graph":
        return Graph(p, frozenset((j, k) for j in range(1, p + 1) for k in range(j + 1, p + 1)))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def neighbors(self, v: int) -> set:
        out = set()
        for j, k in self.edges:
            if j == v:
                out.add(k)
            elif k == v:
                out.add(j)
        return out

    def adjacency_matrix(self) -> np.ndarray:
        out = np.zeros((self.p, self.p), dtype=int)
        for j, k in self.edges:
            out[j - 1, k - 1] = out[k - 1, j - 1] = 1
        return out

    @staticmethod
    def from_adjacency_matrix(mat: np.ndarray) -> "Graph":
        mat = np.asarray(mat)
        p = mat.shape[0]
        edges = {
            (j + 1, k + 1)
            for j in range(p)
            for k in range(j + 1, p)
            if mat[j, k] or mat[k, j]
        }
        return Graph(p, frozenset(edges))

    def sorted_edges(self) -> list:
        return sorted(self.edges)


@dataclass(frozen=True)
class Ordering:
    """A permutation of 1..p: ``positions[v-1]`` is the new position of v."""

    positions: tuple

    def __post_init__(self):
        p = len(self.positions)
        if sorted(self.positions) != list(range(1, p + 1)):
            raise ValueError("positions must be a bijection on 1..p")

    @staticmethod
    def identity(p: int) -> "Ordering":
        return Ordering(tuple(range(1, p + 1)))

    @property
    def p(self) -> int:
        return len(self.positions)

    def position(self, v: int) -> int:
        return self.positions[v - 1]

    def variable_at(self, pos: int) -> int:
        return self.positions.index(pos) + 1

    def inverse(self) -> "Ordering":
        inv = [0] * self.p
        for v, pos in enumerate(self.positions, start=1):
            inv[pos - 1] = v
        return Ordering(tuple(inv))

    def reverse(self) -> "Ordering":
        """Flip the position axis: position q becomes p + 1 - q."""
        return Ordering(tuple(self.p + 1 - pos for pos in self.positions))

    def compose_after(self, first: "Ordering") -> "Ordering":
        """Ordering sending v to self(first(v))."""
        return Ordering(tuple(self.positions[pos - 1] for pos in first.positions))


def relabel_graph(g: Graph, ordering: Ordering) -> Graph:
    pos = ordering.positions
    return Graph.from_edges(g.p, ((pos[j - 1], pos[k - 1]) for j, k in g.edges))


def permute_columns(X: np.ndarray, ordering: Ordering) -> np.ndarray:
    """Reorder columns so the column at position q holds the variable that
    the ordering sends to q."""
    inv = ordering.inverse().positions
    return np.ascontiguousarray(X[:, [v - 1 for v in inv]])


def induced_graph(g: Graph, ordering: Ordering | None = None) -> Graph:
    """Edges accumulated by the elimination game, in ordered labels.

    Processes position p first: its lower-positioned neighbors (in the
    current graph, fill included) become a clique, then the node is marked
    done.  Chordal relabelings incur zero fill.
    """
    ordering = ordering or Ordering.identity(g.p)
    p = g.p
    adj = np.zeros((p + 1, p + 1), dtype=bool)
    for j, k in g.edges:
        rj, rk = ordering.position(j), ordering.position(k)
        adj[rj, rk] = adj[rk, rj] = True
    for m in range(p, 0, -1):
        lower = np.flatnonzero(adj[m, 1:m]) + 1
        if lower.size >= 2:
            adj[np.ix_(lower, lower)] = True
            adj[lower, lower] = False
    edges = {(j, k) for j in range(1, p + 1) for k in range(j + 1, p + 1) if adj[j, k]}
    return Graph(p, frozenset(edges))


def elimination_fill_count(g: Graph, ordering: Ordering | None = None) -> int:
    return induced_graph(g, ordering).n_edges - g.n_edges


def sparsity_pattern(induced: Graph, permutation: Ordering | None = None) -> SparsityPattern:
    """Inactive pairs of a lower-triangular map from an induced graph: every
    (j, k), j < k, that is not an induced edge."""
    p = induced.p
    inactive = frozenset(
        (j, k)
        for k in range(2, p + 1)
        for j in range(1, k)
        if (j, k) not in induced.edges
    )
    perm = permutation or Ordering.identity(p)
    return SparsityPattern(p, inactive, perm.positions)


# ---------------------------------------------------------------------------
# ordering heuristics


def _greedy_elimination(g: Graph, score: str) -> list:
    """Greedy elimination sequence (first-eliminated first); ties break to
    the lowest original label.  ``score`` is 'degree' or 'fill'."""
    remaining = set(range(1, g.p + 1))
    adj = {v: g.neighbors(v) for v in remaining}
    seq = []
    while remaining:
        best = None
        best_score = None
        for v in sorted(remaining):
            nbrs = adj[v] & remaining
            if score == "degree":
                s = len(nbrs)
            else:
                nb = sorted(nbrs)
                s = sum(
                    1
                    for a, b in itertools.combinations(nb, 2)
                    if b not in adj[a]
                )
            if best_score is None or s < best_score:
                best, best_score = v, s
        nbrs = adj[best] & remaining
        for a, b in itertools.combinations(sorted(nbrs), 2):
            adj[a].add(b)
            adj[b].add(a)
        remaining.remove(best)
        seq.append(best)
    return seq


def order_min_degree(g: Graph) -> Ordering:
    """Greedy minimum-degree ordering, first pivot at position 1 (the
    sparse-Cholesky convention)."""
    seq = _greedy_elimination(g, "degree")
    positions = [0] * g.p
    for i, v in enumerate(seq, start=1):
        positions[v - 1] = i
    return Ordering(tuple(positions))


def order_min_fill(g: Graph) -> Ordering:
    """Greedy minimum-fill ordering, first pivot at position 1."""
    seq = _greedy_elimination(g, "fill")
    positions = [0] * g.p
    for i, v in enumerate(seq, start=1):
        positions[v - 1] = i
    return Ordering(tuple(positions))


def order_reverse_cholesky(g: Graph) -> Ordering:
    """Reverse of the min-degree ordering: the greedy pivot lands at
    position p, which is what the position-p-first elimination game wants."""
    return order_min_degree(g).reverse()


ORDERING_HEURISTICS = {
    "min-degree": order_min_degree,
    "min-fill": order_min_fill,
    "reverse-cholesky": order_reverse_cholesky,
    "identity": lambda g: Ordering.identity(g.p),
}


# ---------------------------------------------------------------------------
# I/O


def graph_to_json_dict(g: Graph) -> dict:
    return {"p": g.p, "edges": [[j, k] for j, k in g.sorted_edges()]}


def graph_from_json_dict(doc: dict) -> Graph:
    return Graph.from_edges(int(doc["p"]), ((int(a), int(b)) for a, b in doc["edges"]))


def save_graph(path, g: Graph) -> None:
    with open(path, "w") as fh:
        json.dump(graph_to_json_dict(g), fh, sort_keys=True)
        fh.write("\n")


def load_graph(path) -> Graph:
    with open(path) as fh:
        return graph_from_json_dict(json.load(fh))


def adjacency_csv_lines(g: Graph, names: list | None = None) -> list:
    names = names or [f"V{i}" for i in range(1, g.p + 1)]
    mat = g.adjacency_matrix()
    lines = [",".join(names)]
    lines.extend(",".join(str(v) for v in row) for row in mat)
    return lines
