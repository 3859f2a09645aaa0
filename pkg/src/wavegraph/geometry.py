"""Pseudo-metrics on graphs: distances, balls, jump size, decay diagnostics.

A pseudo-metric is symmetric, nonnegative, vanishes on the diagonal and
satisfies the triangle inequality (distinct vertices may sit at distance
zero).  The jump size is the largest distance across an edge.  The decay
report measures how fast the Laplacian of the distance function
x -> d(x, x0) falls off: the smallest constant C2 with

    (L d(., x0))(x) <= C2 / d(x, x0)^alpha      outside a core ball

together with the degree bound C1 and the jump size.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csgraph

from .graphs import WeightedGraph, laplacian_apply

__all__ = [
    "TruncationError",
    "PseudoMetric",
    "distance",
    "distances_from",
    "jump_size",
    "ball",
    "laplacian_of_distance",
    "interior_mask",
    "MetricStructureReport",
    "metric_structure_report",
    "AlphaFit",
    "fit_alpha",
]

_TRIANGLE_CHECK_LIMIT = 300


class TruncationError(ValueError):
    """The finite carrier is too small for the requested radius."""


class PseudoMetric:
    """Distance oracle on vertex pairs.

    Kinds:
      * "graph": minimum edge count over paths (requires connectedness),
      * "l1" / "l2": norms of lattice coordinate differences,
      * "table": explicit symmetric matrix; the triangle inequality is
        verified exhaustively at construction for up to 300 vertices.
    """

    KINDS = ("graph", "l1", "l2", "table")

    def __init__(self, kind: str, table=None):
        if kind not in self.KINDS:
            raise ValueError(f"unknown metric kind {kind!r}")
        if (kind == "table") != (table is not None):
            raise ValueError("a distance table is required exactly for kind='table'")
        self.kind = kind
        self.table = table

    @classmethod
    def graph_distance(cls) -> "PseudoMetric":
        return cls("graph")

    @classmethod
    def lattice_l1(cls) -> "PseudoMetric":
        return cls("l1")

    @classmethod
    def lattice_l2(cls) -> "PseudoMetric":
        return cls("l2")

    @classmethod
    def from_table(cls, matrix) -> "PseudoMetric":
        t = np.asarray(matrix, dtype=float)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise ValueError("distance table must be a square matrix")
        if not np.isfinite(t).all():
            raise ValueError("distance table must be finite")
        if (t < 0).any():
            raise ValueError("distances must be nonnegative")
        if np.abs(np.diag(t)).max(initial=0.0) > 0:
            raise ValueError("d(x, x) must be 0")
        if not np.allclose(t, t.T, rtol=0, atol=1e-12):
            raise ValueError("distance table must be symmetric")
        t = 0.5 * (t + t.T)
        n = t.shape[0]
        if n <= _TRIANGLE_CHECK_LIMIT:
            for z in range(n):
                slack = t - (t[:, [z]] + t[z][None, :])
                i, j = np.unravel_index(np.argmax(slack), slack.shape)
                if slack[i, j] > 1e-12:
                    raise ValueError(
                        f"triangle inequality fails: d({i},{j}) > d({i},{z}) + d({z},{j})")
        return cls("table", table=t)

    @classmethod
    def load_table(cls, source, g: WeightedGraph) -> "PseudoMetric":
        """Parse `d <id1> <id2> <value>` lines; symmetric closure is implied.

        Ids are the graph's external labels.  Every off-diagonal pair must
        be covered after mirroring.
        """
        if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
            with open(source, "r", encoding="utf-8") as fh:
                text = fh.read()
        else:
            text = str(source)
        n = g.num_vertices
        index = {int(v): i for i, v in enumerate(g.labels)}
        t = np.full((n, n), np.nan)
        np.fill_diagonal(t, 0.0)
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] != "d" or len(parts) != 4:
                raise ValueError(f"line {lineno}: expected `d <id1> <id2> <value>`")
            try:
                a, b, v = int(parts[1]), int(parts[2]), float(parts[3])
            except ValueError:
                raise ValueError(f"line {lineno}: malformed entry") from None
            if a not in index or b not in index:
                raise ValueError(f"line {lineno}: unknown vertex id")
            i, j = index[a], index[b]
            if i != j:
                t[i, j] = v
                t[j, i] = v
            elif v != 0.0:
                raise ValueError(f"line {lineno}: d(x, x) must be 0")
        missing = int(np.isnan(t).sum())
        if missing:
            raise ValueError(f"distance table incomplete: {missing} missing entries")
        return cls.from_table(t)


def distances_from(g: WeightedGraph, m: PseudoMetric, x0: int) -> np.ndarray:
    """Vector of d(x0, x) over all vertices."""
    g._check_vertex(x0)
    x0 = int(x0)
    if m.kind == "graph":
        dist = csgraph.shortest_path(
            g.adjacency, method="D", directed=False, unweighted=True, indices=x0)
        if np.isinf(dist).any():
            raise ValueError("graph-distance metric requires a connected graph")
        return np.asarray(dist, dtype=float)
    if m.kind in ("l1", "l2"):
        if g.coords is None:
            raise ValueError(f"{m.kind} metric requires lattice coordinates")
        diff = (g.coords - g.coords[x0]).astype(float)
        if m.kind == "l1":
            return np.abs(diff).sum(axis=1)
        return np.sqrt((diff * diff).sum(axis=1))
    if m.table.shape[0] != g.num_vertices:
        raise ValueError("distance table size does not match the graph")
    return m.table[x0].copy()


def distance(g: WeightedGraph, m: PseudoMetric, x: int, y: int) -> float:
    """d(x, y) for a single pair."""
    g._check_vertex(x)
    g._check_vertex(y)
    x, y = int(x), int(y)
    if x == y:
        return 0.0
    if m.kind == "graph":
        return float(distances_from(g, m, x)[y])
    if m.kind in ("l1", "l2"):
        if g.coords is None:
            raise ValueError(f"{m.kind} metric requires lattice coordinates")
        diff = (g.coords[x] - g.coords[y]).astype(float)
        return float(np.abs(diff).sum() if m.kind == "l1" else np.sqrt((diff * diff).sum()))
    return float(m.table[x, y])


def _edge_distances(g: WeightedGraph, m: PseudoMetric) -> np.ndarray:
    edges, _ = g.edge_list()
    if m.kind == "graph":
        return np.ones(len(edges))
    if m.kind in ("l1", "l2"):
        if g.coords is None:
            raise ValueError(f"{m.kind} metric requires lattice coordinates")
        diff = (g.coords[edges[:, 0]] - g.coords[edges[:, 1]]).astype(float)
        if m.kind == "l1":
            return np.abs(diff).sum(axis=1)
        return np.sqrt((diff * diff).sum(axis=1))
    return m.table[edges[:, 0], edges[:, 1]]


def jump_size(g: WeightedGraph, m: PseudoMetric) -> float:
    """Largest distance across an edge; undefined on edgeless graphs."""
    if g.num_edges == 0:
        raise ValueError("jump size undefined: graph has no edges")
    return float(_edge_distances(g, m).max())


def ball(g: WeightedGraph, m: PseudoMetric, x0: int, R: float) -> np.ndarray:
    """Closed metric ball {x : d(x0, x) <= R} as an index array (full scan)."""
    if R < 0:
        raise ValueError("ball radius must be >= 0")
    return np.flatnonzero(distances_from(g, m, x0) <= R)


def laplacian_of_distance(g: WeightedGraph, m: PseudoMetric, x0: int, x: int | None = None):
    """Laplacian of y -> d(y, x0), at vertex x or as a full vector."""
    lap = laplacian_apply(g, distances_from(g, m, x0))
    if x is None:
        return lap
    g._check_vertex(x)
    return float(lap[int(x)])


def interior_mask(g: WeightedGraph, m: PseudoMetric, x0: int):
    """Mask of vertices farther than one jump size from the truncation boundary.

    Vertices within jump distance of the boundary have potentially missing
    neighbors, which corrupts Laplacian-based scans.  Returns (mask, source)
    where source records how the boundary was determined: "declared" when
    the graph carries a boundary mask, "outer-shell-heuristic" otherwise
    (the outermost metric shell of width 2j around x0 is excluded).
    """
    j = jump_size(g, m)
    if g.boundary is None or not g.boundary.any():
        dvec = distances_from(g, m, x0)
        return dvec <= dvec.max() - 2.0 * j, "outer-shell-heuristic"
    if g.half_width is not None and g.coords is not None and m.kind in ("l1", "l2"):
        # hypercube truncation: metric distance to the boundary shell
        dist_bd = g.half_width - np.abs(g.coords).max(axis=1)
        return dist_bd > j, "declared"
    if m.kind == "table":
        dist_bd = m.table[:, g.boundary].min(axis=1)
        return dist_bd > j, "declared"
    # hop layers around the declared boundary; exact for hop metrics, a
    # conservative heuristic otherwise
    edge_d = _edge_distances(g, m)
    min_e = edge_d[edge_d > 0].min() if (edge_d > 0).any() else 0.0
    layers = int(np.ceil(j / min_e)) if min_e > 0 else 1
    mark = g.boundary.astype(float)
    for _ in range(layers):
        mark = np.maximum(mark, (g.adjacency @ mark > 0).astype(float))
    return mark == 0.0, "declared"


@dataclass
class MetricStructureReport:
    """Structural constants of a (graph, metric, base point) triple.

    c1 is the largest weighted degree, jump the jump size, c2 the measured
    decay constant sup (L d)(x) * d(x, x0)^alpha over the scanned vertices
    (clamped at 0).  c2_inner / c2_outer split the scan at the geometric
    midpoint radius; a stable constant has c2_outer <~ c2_inner.
    Violations are only populated against an explicitly supplied reference
    constant.  Finiteness of balls is not checkable on a finite truncation.
    """

    c1: float
    jump: float
    alpha: float
    c2: float
    r0: float
    c2_inner: float
    c2_outer: float
    n_scanned: int
    boundary_source: str
    violations: list = field(default_factory=list)
    excluded_boundary: list = field(default_factory=list)
    ball_finiteness: str = "not checkable on truncation"

    def to_dict(self) -> dict:
        return {
            "C1": self.c1,
            "j": self.jump,
            "alpha": self.alpha,
            "C2": self.c2,
            "R0": self.r0,
            "violations": [
                {"vertex": int(v), "lap_d": float(l), "allowed": float(b)}
                for v, l, b in self.violations
            ],
            "excluded_boundary": [int(v) for v in self.excluded_boundary],
            "C2_inner": self.c2_inner,
            "C2_outer": self.c2_outer,
            "n_scanned": self.n_scanned,
            "boundary_source": self.boundary_source,
            "ball_finiteness": self.ball_finiteness,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def metric_structure_report(g: WeightedGraph, m: PseudoMetric, x0: int,
                            alpha: float, r0: float, *,
                            include_boundary: bool = False,
                            c2: float | None = None,
                            max_violations: int = 50) -> MetricStructureReport:
    """Scan all vertices outside the core ball and measure the decay constant.

    With c2=None the reported constant is the empirical supremum, so the
    violation list is empty by construction; pass an explicit c2 to list
    the vertices exceeding it.  Vertices near the truncation boundary are
    excluded from the scan unless include_boundary is set.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if r0 <= 0:
        raise ValueError("r0 must be positive")
    dvec = distances_from(g, m, x0)
    j = jump_size(g, m)
    c1 = float(g.weighted_degrees().max())
    lap = laplacian_apply(g, dvec)
    if include_boundary:
        interior = np.ones(g.num_vertices, dtype=bool)
        source = "included"
    else:
        interior, source = interior_mask(g, m, x0)
    scan = (dvec > r0) & interior
    if not scan.any():
        raise TruncationError(
            f"no scannable vertices outside radius {r0}: core ball exceeds the truncation")
    prod = lap[scan] * dvec[scan] ** alpha
    c2_emp = max(float(prod.max()), 0.0)
    d_scan = dvec[scan]
    r_mid = float(np.sqrt(r0 * d_scan.max()))
    inner = d_scan <= r_mid
    c2_inner = max(float(prod[inner].max()), 0.0) if inner.any() else 0.0
    c2_outer = max(float(prod[~inner].max()), 0.0) if (~inner).any() else 0.0
    violations = []
    if c2 is not None:
        allowed = c2 / dvec[scan] ** alpha
        bad = np.flatnonzero(lap[scan] > allowed + 1e-12)
        idx = np.flatnonzero(scan)[bad]
        order = np.argsort(-(lap[idx] - c2 / dvec[idx] ** alpha))
        for i in idx[order][:max_violations]:
            violations.append((int(i), float(lap[i]), float(c2 / dvec[i] ** alpha)))
    excluded = np.flatnonzero(~interior & (dvec > r0)) if not include_boundary else np.array([], dtype=int)
    return MetricStructureReport(
        c1=c1, jump=float(j), alpha=float(alpha),
        c2=float(c2) if c2 is not None else c2_emp,
        r0=float(r0), c2_inner=c2_inner, c2_outer=c2_outer,
        n_scanned=int(scan.sum()), boundary_source=source,
        violations=violations,
        excluded_boundary=[int(v) for v in excluded[:1000]],
    )


@dataclass
class AlphaFit:
    """Least-squares decay exponent of shell maxima of (L d)^+ against radius."""

    alpha_hat: float
    c2_hat: float
    shells: list          # (r_lo, r_hi, max positive Laplacian of d)
    excluded_shells: list  # shells whose maximum was 0 or that were empty
    residual: float

    def to_dict(self) -> dict:
        return {
            "alpha_hat": self.alpha_hat,
            "C2_hat": self.c2_hat,
            "shells": [list(s) for s in self.shells],
            "excluded_shells": [list(s) for s in self.excluded_shells],
            "residual": self.residual,
        }


def fit_alpha(g: WeightedGraph, m: PseudoMetric, x0: int, r0: float, *,
              include_boundary: bool = False) -> AlphaFit:
    """Estimate the best decay exponent on geometric shells [r, 2r).

    Fits log(max shell value of (L d)^+) = log C2 - alpha * log r by least
    squares, with r the geometric mean radius of each shell; alpha_hat is
    clamped to [0, 1].  Shells with maximum 0 are excluded and reported.
    Requires at least 3 usable shells.
    """
    if r0 <= 0:
        raise ValueError("r0 must be positive")
    dvec = distances_from(g, m, x0)
    lap_pos = np.maximum(laplacian_apply(g, dvec), 0.0)
    if include_boundary:
        interior = np.ones(g.num_vertices, dtype=bool)
    else:
        interior, _ = interior_mask(g, m, x0)
    d_max = dvec[interior].max() if interior.any() else 0.0
    shells, excluded = [], []
    r = float(r0)
    while r < d_max:
        in_shell = interior & (dvec >= r) & (dvec < 2 * r)
        top = float(lap_pos[in_shell].max()) if in_shell.any() else 0.0
        if top > 0:
            shells.append((r, 2 * r, top))
        else:
            excluded.append((r, 2 * r, top))
        r *= 2
    if len(shells) < 3:
        raise ValueError(
            f"only {len(shells)} usable shells (excluded: {len(excluded)}); need at least 3")
    log_r = np.log([np.sqrt(lo * hi) for lo, hi, _ in shells])
    log_m = np.log([v for _, _, v in shells])
    slope, intercept = np.polyfit(log_r, log_m, 1)
    alpha_hat = float(np.clip(-slope, 0.0, 1.0))
    # recompute the level consistently with the clamped exponent
    c2_hat = float(np.exp(np.mean(log_m + alpha_hat * log_r)))
    fit = np.log(c2_hat) - alpha_hat * log_r
    residual = float(np.max(np.abs(fit - log_m)))
    return AlphaFit(alpha_hat=alpha_hat, c2_hat=c2_hat,
                    shells=shells, excluded_shells=excluded, residual=residual)
