"""Weighted graphs with positive vertex measure and symmetric edge weights.

A graph is a quadruple (vertices, edges, omega, mu): omega_xy >= 0 is a
symmetric edge weight with omega_xx = 0, mu(x) > 0 a vertex weight, and
y ~ x means omega_xy > 0.  The Laplacian acts on vertex functions as

    (L f)(x) = sum_{y ~ x} (omega_xy / mu(x)) * (f(y) - f(x)).

Vertex functions are plain 1-d numpy arrays aligned with the dense vertex
indices.  Graphs are immutable after construction: edges are stored once
per unordered pair and mirrored into a CSR adjacency for the Laplacian
hot loop.  External integer ids ("labels") survive file round trips.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

__all__ = [
    "GraphFormatError",
    "ValidationIssue",
    "ValidationReport",
    "WeightedGraph",
    "validate_graph",
    "laplacian_apply",
    "weighted_degree",
    "generate_lattice",
    "generate_tree",
    "generate_path",
    "lattice_origin",
    "load_graph",
    "loads_graph",
    "save_graph",
    "dumps_graph",
    "graphs_equal",
]


class GraphFormatError(ValueError):
    """Raised for unreadable or inconsistent graph files."""


@dataclass(frozen=True)
class ValidationIssue:
    kind: str  # "loop" | "negative_weight" | "nonpositive_mu" | "disconnected"
    detail: str
    vertices: tuple = ()


class ValidationReport:
    """Axiom violations of a graph; empty iff the graph is valid.

    Violations are data, not failures: constructing or validating an
    invalid graph never raises.
    """

    def __init__(self, issues=()):
        self.issues = list(issues)

    @property
    def ok(self) -> bool:
        return not self.issues

    def kinds(self) -> set:
        return {issue.kind for issue in self.issues}

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "issues": [
                {"kind": i.kind, "detail": i.detail, "vertices": list(i.vertices)}
                for i in self.issues
            ],
        }

    def __repr__(self):
        if self.ok:
            return "ValidationReport(ok)"
        return "ValidationReport(%s)" % "; ".join(
            f"{i.kind}: {i.detail}" for i in self.issues
        )


class WeightedGraph:
    """Finite weighted graph over dense vertex indices 0..n-1.

    Parameters
    ----------
    mu : array of positive vertex weights, one per vertex.
    edges : (m, 2) integer array of unordered vertex pairs, each stored once.
    weights : (m,) array of edge weights omega >= 0.
    labels : optional external integer ids (defaults to 0..n-1).
    coords : optional (n, dim) integer lattice coordinates.
    boundary : optional boolean mask marking truncation-boundary vertices.
    half_width : lattice truncation half-width when generated.

    The constructor accepts invalid data (loops, nonpositive mu) so that
    ``validate_graph`` can report it; numerical operations assume a valid
    graph.  Pair storage makes omega symmetric by construction.
    """

    def __init__(self, mu, edges=None, weights=None, *, labels=None,
                 coords=None, boundary=None, half_width=None):
        self.mu = np.ascontiguousarray(mu, dtype=float)
        if self.mu.ndim != 1 or self.mu.size == 0:
            raise ValueError("mu must be a nonempty 1-d array of vertex weights")
        n = self.mu.shape[0]
        if edges is None:
            edges = np.empty((0, 2), dtype=np.int64)
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if len(edges) and (edges.min() < 0 or edges.max() >= n):
            raise ValueError("edge endpoint out of range")
        if weights is None:
            weights = np.ones(len(edges))
        self.weights = np.ascontiguousarray(weights, dtype=float)
        if self.weights.shape != (len(edges),):
            raise ValueError("weights must be one per edge")
        # canonical orientation lo <= hi; loops stay representable
        self.edges = np.column_stack([edges.min(axis=1), edges.max(axis=1)])
        if labels is None:
            labels = np.arange(n, dtype=np.int64)
        self.labels = np.asarray(labels, dtype=np.int64)
        if self.labels.shape != (n,):
            raise ValueError("labels must be one per vertex")
        self.coords = None if coords is None else np.asarray(coords)
        self.boundary = None if boundary is None else np.asarray(boundary, dtype=bool)
        self.half_width = half_width
        self._adj = self._build_adjacency()
        self._wsum = np.asarray(self._adj.sum(axis=1)).ravel()

    def _build_adjacency(self):
        n = self.num_vertices
        keep = (self.weights != 0.0) & (self.edges[:, 0] != self.edges[:, 1])
        a = self.edges[keep, 0]
        b = self.edges[keep, 1]
        w = self.weights[keep]
        adj = sp.coo_matrix(
            (np.concatenate([w, w]), (np.concatenate([a, b]), np.concatenate([b, a]))),
            shape=(n, n),
        ).tocsr()
        adj.sum_duplicates()
        return adj

    @property
    def num_vertices(self) -> int:
        return self.mu.shape[0]

    @property
    def num_edges(self) -> int:
        keep = (self.weights > 0.0) & (self.edges[:, 0] != self.edges[:, 1])
        return int(keep.sum())

    @property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric CSR adjacency with weights (both directions stored)."""
        return self._adj

    @property
    def weight_sums(self) -> np.ndarray:
        """sum_y omega_xy per vertex."""
        return self._wsum

    def weighted_degrees(self) -> np.ndarray:
        """sum_y omega_xy / mu(x) per vertex."""
        return self._wsum / self.mu

    def edge_list(self):
        """Proper edges (omega > 0, no loops) as (pairs, weights)."""
        keep = (self.weights > 0.0) & (self.edges[:, 0] != self.edges[:, 1])
        return self.edges[keep], self.weights[keep]

    def neighbors(self, x: int):
        """Neighbor indices and edge weights of vertex x."""
        self._check_vertex(x)
        lo, hi = self._adj.indptr[x], self._adj.indptr[x + 1]
        return self._adj.indices[lo:hi], self._adj.data[lo:hi]

    def _check_vertex(self, x):
        if not 0 <= int(x) < self.num_vertices:
            raise ValueError(f"unknown vertex {x} (graph has {self.num_vertices})")

    def __repr__(self):
        return f"WeightedGraph(n={self.num_vertices}, m={self.num_edges})"


def validate_graph(g: WeightedGraph) -> ValidationReport:
    """Check the graph axioms; every violation becomes a report entry.

    Checked: absence of loops, nonnegative edge weights, positive mu,
    connectedness under omega > 0.  Symmetry of omega holds by pair
    storage and cannot be violated.
    """
    issues = []
    loops = g.edges[:, 0] == g.edges[:, 1]
    loop_vs = np.unique(g.edges[loops & (g.weights != 0.0), 0])
    if loop_vs.size:
        issues.append(ValidationIssue(
            "loop", f"{loop_vs.size} vertex(es) carry a loop", tuple(int(v) for v in loop_vs)))
    neg = g.weights < 0.0
    if neg.any():
        bad = np.unique(g.edges[neg].ravel())
        issues.append(ValidationIssue(
            "negative_weight", f"{int(neg.sum())} edge(s) with omega < 0",
            tuple(int(v) for v in bad[:20])))
    badmu = np.flatnonzero(~(g.mu > 0.0))
    if badmu.size:
        issues.append(ValidationIssue(
            "nonpositive_mu", f"{badmu.size} vertex(es) with mu <= 0",
            tuple(int(v) for v in badmu[:20])))
    ncomp, comp = csgraph.connected_components(g.adjacency, directed=False)
    if ncomp > 1:
        reps = [int(np.flatnonzero(comp == c)[0]) for c in range(ncomp)]
        issues.append(ValidationIssue(
            "disconnected", f"{ncomp} components", tuple(reps[:20])))
    return ValidationReport(issues)


def laplacian_apply(g: WeightedGraph, f) -> np.ndarray:
    """Apply the graph Laplacian to a vertex function (or a stack of them).

    Accepts shape (n,) or (n, k); returns the same shape.  Raises when f is
    not defined on every vertex.
    """
    f = np.asarray(f, dtype=float)
    if f.ndim not in (1, 2) or f.shape[0] != g.num_vertices:
        raise ValueError(
            f"vertex function has shape {f.shape}, expected ({g.num_vertices},) or ({g.num_vertices}, k)")
    if f.ndim == 1:
        return (g.adjacency @ f - g.weight_sums * f) / g.mu
    return (g.adjacency @ f - g.weight_sums[:, None] * f) / g.mu[:, None]


def weighted_degree(g: WeightedGraph, x: int) -> float:
    """sum_{y~x} omega_xy / mu(x); its maximum over x is the degree bound constant."""
    g._check_vertex(x)
    return float(g.weight_sums[int(x)] / g.mu[int(x)])


def generate_lattice(dim: int, half_width: int) -> WeightedGraph:
    """Integer lattice truncation [-L, L]^dim with unit weights.

    Nearest-neighbor edges, omega = mu = 1; (2L+1)^dim vertices in
    lexicographic coordinate order.  Vertices with some |coordinate| = L
    are marked as truncation boundary.
    """
    if dim not in (1, 2, 3, 4):
        raise ValueError("dim must be in 1..4")
    L = int(half_width)
    if L < 1:
        raise ValueError("half_width must be >= 1")
    side = 2 * L + 1
    coords = np.indices((side,) * dim).reshape(dim, -1).T.astype(np.int64) - L
    n = side ** dim
    flat = np.arange(n, dtype=np.int64)
    chunks = []
    for k in range(dim):
        stride = side ** (dim - 1 - k)
        src = flat[coords[:, k] < L]
        chunks.append(np.column_stack([src, src + stride]))
    edges = np.concatenate(chunks)
    boundary = np.abs(coords).max(axis=1) == L
    return WeightedGraph(np.ones(n), edges, np.ones(len(edges)),
                         coords=coords, boundary=boundary, half_width=L)


def lattice_origin(g: WeightedGraph) -> int:
    """Index of the all-zero coordinate vertex of a generated lattice."""
    if g.coords is None:
        raise ValueError("graph has no lattice coordinates")
    idx = np.flatnonzero((g.coords == 0).all(axis=1))
    if idx.size != 1:
        raise ValueError("graph has no unique origin vertex")
    return int(idx[0])


def generate_tree(branching: int, depth: int) -> WeightedGraph:
    """Rooted b-ary tree with `depth` levels below the root, unit weights."""
    b = int(branching)
    d = int(depth)
    if b < 2:
        raise ValueError("branching must be >= 2")
    if d < 1:
        raise ValueError("depth must be >= 1")
    sizes = [b ** level for level in range(d + 1)]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    n = int(offsets[-1])
    chunks = []
    for level in range(d):
        parents = np.arange(offsets[level], offsets[level + 1], dtype=np.int64)
        children = offsets[level + 1] + np.arange(sizes[level + 1], dtype=np.int64)
        chunks.append(np.column_stack([np.repeat(parents, b), children]))
    edges = np.concatenate(chunks)
    boundary = np.zeros(n, dtype=bool)
    boundary[offsets[d]:] = True
    return WeightedGraph(np.ones(n), edges, np.ones(len(edges)), boundary=boundary)


def generate_path(n: int) -> WeightedGraph:
    """Path graph 0 - 1 - ... - (n-1) with unit weights."""
    n = int(n)
    if n < 2:
        raise ValueError("path length must be >= 2")
    idx = np.arange(n - 1, dtype=np.int64)
    edges = np.column_stack([idx, idx + 1])
    boundary = np.zeros(n, dtype=bool)
    boundary[[0, n - 1]] = True
    return WeightedGraph(np.ones(n), edges, np.ones(n - 1), boundary=boundary)


# ---------------------------------------------------------------------------
# text format: `v <id> <mu>` then `e <id1> <id2> <omega>`, `#` comments

def dumps_graph(g: WeightedGraph) -> str:
    """Serialize to the text format, vertices sorted by id then sorted edges."""
    lines = []
    order = np.argsort(g.labels, kind="stable")
    for i in order:
        lines.append(f"v {int(g.labels[i])} {repr(float(g.mu[i]))}")
    if len(g.edges):
        la = g.labels[g.edges[:, 0]]
        lb = g.labels[g.edges[:, 1]]
        lo = np.minimum(la, lb)
        hi = np.maximum(la, lb)
        eorder = np.lexsort((hi, lo))
        for i in eorder:
            lines.append(f"e {int(lo[i])} {int(hi[i])} {repr(float(g.weights[i]))}")
    return "\n".join(lines) + "\n"


def save_graph(g: WeightedGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_graph(g))


def loads_graph(text: str, strict: bool = True) -> WeightedGraph:
    """Parse the text format.

    With strict=True (default), loop entries and nonpositive mu abort the
    load; with strict=False they are kept so `validate_graph` can report
    them.  Duplicate edges with conflicting weights always abort.
    """
    mus = {}
    edge_w = {}
    loops = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "v":
                if len(parts) != 3:
                    raise ValueError("expected `v <id> <mu>`")
                vid = int(parts[1])
                mu = float(parts[2])
                if vid < 0:
                    raise ValueError("vertex id must be nonnegative")
                if not np.isfinite(mu):
                    raise ValueError("mu must be finite")
                if vid in mus:
                    raise ValueError(f"vertex {vid} declared twice")
                if strict and mu <= 0:
                    raise ValueError(f"vertex {vid} has nonpositive mu")
                mus[vid] = mu
            elif parts[0] == "e":
                if len(parts) != 4:
                    raise ValueError("expected `e <id1> <id2> <omega>`")
                a, b = int(parts[1]), int(parts[2])
                w = float(parts[3])
                if not np.isfinite(w) or w < 0:
                    raise ValueError("omega must be finite and >= 0")
                if a not in mus or b not in mus:
                    raise ValueError(f"edge references undeclared vertex {a if a not in mus else b}")
                if a == b:
                    if strict:
                        raise ValueError(f"loop entry at vertex {a}")
                    loops.append((a, w))
                    continue
                key = (min(a, b), max(a, b))
                if key in edge_w and edge_w[key] != w:
                    raise ValueError(f"duplicate edge {key} with conflicting weight")
                edge_w[key] = w
            else:
                raise ValueError(f"unknown record type {parts[0]!r}")
        except ValueError as exc:
            raise GraphFormatError(f"line {lineno}: {exc}") from None
    if not mus:
        raise GraphFormatError("no vertices declared")
    labels = np.array(sorted(mus), dtype=np.int64)
    index = {int(v): i for i, v in enumerate(labels)}
    mu = np.array([mus[int(v)] for v in labels])
    pairs = list(edge_w.items()) + [((a, a), w) for a, w in loops]
    if pairs:
        edges = np.array([[index[a], index[b]] for (a, b), _ in pairs], dtype=np.int64)
        weights = np.array([w for _, w in pairs])
    else:
        edges, weights = None, None
    return WeightedGraph(mu, edges, weights, labels=labels)


def load_graph(path, strict: bool = True) -> WeightedGraph:
    if not os.path.exists(path):
        raise GraphFormatError(f"no such graph file: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        return loads_graph(fh.read(), strict=strict)


def graphs_equal(a: WeightedGraph, b: WeightedGraph) -> bool:
    """Equality of (labels, mu, edge multiset with weights)."""
    if a.num_vertices != b.num_vertices:
        return False
    pa = np.argsort(a.labels, kind="stable")
    pb = np.argsort(b.labels, kind="stable")
    if not np.array_equal(a.labels[pa], b.labels[pb]):
        return False
    if not np.array_equal(a.mu[pa], b.mu[pb]):
        return False

    def edge_set(g, perm):
        inv = np.empty(g.num_vertices, dtype=np.int64)
        inv[perm] = np.arange(g.num_vertices)
        out = set()
        for (x, y), w in zip(g.edges, g.weights):
            i, j = sorted((int(inv[x]), int(inv[y])))
            out.add((i, j, float(w)))
        return out

    return edge_set(a, pa) == edge_set(b, pb)
