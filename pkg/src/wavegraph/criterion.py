"""Volume-growth nonexistence criteria for coupled wave inequalities on graphs.

The coupled system  u_tt - L u >= h1 |v|^p,  v_tt - L v >= h2 |u|^q  with
p >= q > 1 admits no nontrivial nonnegative solution when certain weighted
space-time volumes grow no faster than R^kappa with

    kappa = p (q + 1) (1 + alpha) / (pq - 1),

alpha being the decay exponent of the distance Laplacian.  Two criteria are
implemented: the annulus form (integrals of h^(-1/(p-1)) over the region
R^theta1 <= d^theta1 + t^theta2 <= 2 R^theta1) and the exponential-weight
form (four ball/tail integrals against e^(-delta d / R)).  A power bound
"<= C R^kappa for every R" is operationalized as: the least-squares log-log
slope over a geometric R-grid is <= kappa + tol, with the fit residual
reported.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .graphs import WeightedGraph
from .geometry import PseudoMetric, TruncationError, distances_from
from .cutoffs import SpaceTimeRegion
from .potentials import Potential

__all__ = [
    "SystemParams",
    "critical_volume_exponent",
    "single_inequality_exponent",
    "region_integral",
    "growth_exponent_estimate",
    "CriterionVerdict",
    "annulus_criterion",
    "single_criterion",
    "expweight_criterion",
    "VolumeTerms",
    "weighted_volume_terms",
    "exp_weighted_norm",
    "InitialDataReport",
    "initial_data_conditions",
    "annulus_covering_check",
    "default_r_grid",
]

DEFAULT_TOLERANCE = 0.2
DEFAULT_POINTS_PER_UNIT = 32


@dataclass(frozen=True)
class SystemParams:
    """Exponents and scales of the coupled system and its criteria."""

    p: float
    q: float
    theta1: float = 2.0
    theta2: float = 2.0
    alpha: float = 1.0
    delta: float | None = None
    r0: float = 1.0

    def __post_init__(self):
        if not (self.p >= self.q > 1.0):
            raise ValueError("need p >= q > 1")
        if self.theta1 < 2 or self.theta2 < 2:
            raise ValueError("theta1 and theta2 must be >= 2")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if 2.0 * self.theta1 / self.theta2 < (1.0 + self.alpha) - 1e-12:
            raise ValueError("need 2*theta1/theta2 >= 1 + alpha")
        if self.delta is not None and self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.r0 <= 0:
            raise ValueError("r0 must be positive")

    def to_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "theta1": self.theta1,
                "theta2": self.theta2, "alpha": self.alpha,
                "delta": self.delta, "r0": self.r0}


def critical_volume_exponent(p: float, q: float, alpha: float) -> float:
    """p (q + 1) (1 + alpha) / (pq - 1), the coupled-system growth threshold."""
    if not (p >= q > 1.0):
        raise ValueError("need p >= q > 1")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    return p * (q + 1.0) * (1.0 + alpha) / (p * q - 1.0)


def single_inequality_exponent(p: float, alpha: float) -> float:
    """(1 + alpha) p / (p - 1), the single-inequality growth threshold."""
    if p <= 1.0:
        raise ValueError("need p > 1")
    return (1.0 + alpha) * p / (p - 1.0)


def _shadow_check(g: WeightedGraph, dvec: np.ndarray, reach: float):
    """Raise when a declared truncation boundary clips the spatial shadow."""
    if math.isinf(reach):
        return
    if g.boundary is not None and g.boundary.any():
        min_bd = float(dvec[g.boundary].min())
        if reach > min_bd:
            raise TruncationError(
                f"spatial shadow of radius {reach:.3g} clipped: boundary at {min_bd:.3g}")


def _simpson_weights(n_points: int) -> np.ndarray:
    # composite Simpson on an odd number of points
    w = np.ones(n_points)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / 3.0


def region_integral(g: WeightedGraph, m: PseudoMetric, x0: int,
                    reg: SpaceTimeRegion, h: Potential, gamma: float, *,
                    points_per_unit: int = DEFAULT_POINTS_PER_UNIT,
                    force_quadrature: bool = False) -> float:
    """integral over t of sum_x 1_reg(x, t) h(x, t)^(-gamma) mu(x) dt.

    Time-independent potentials use the exact per-vertex interval lengths;
    otherwise each vertex's interval is integrated by composite Simpson with
    `points_per_unit` points per unit time.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    dvec = distances_from(g, m, x0)
    _shadow_check(g, dvec, reg.spatial_reach())
    t_lo, t_hi = reg.time_interval(dvec)
    lengths = np.maximum(t_hi - t_lo, 0.0)
    active = lengths > 0.0
    if not active.any():
        return 0.0
    mu = g.mu[active]
    d_act = dvec[active]
    spatial = h.spatial_neg_power(d_act, gamma)
    if h.time_independent and not force_quadrature:
        return float(np.sum(mu * spatial * lengths[active]))
    lens = lengths[active]
    lo = t_lo[active]
    n_pts = int(math.ceil(float(lens.max()) * points_per_unit))
    n_pts = max(4, n_pts + (n_pts % 2))  # even interval count
    frac = np.linspace(0.0, 1.0, n_pts + 1)
    w = _simpson_weights(n_pts + 1)
    total = 0.0
    chunk = max(1, int(2_000_000 // (n_pts + 1)))
    for start in range(0, len(lens), chunk):
        sl = slice(start, start + chunk)
        tgrid = lo[sl, None] + frac[None, :] * lens[sl, None]
        temporal = h.temporal_neg_power(tgrid, gamma)
        rows = (temporal * w[None, :]).sum(axis=1) * (lens[sl] / n_pts)
        total += float(np.sum(mu[sl] * spatial[sl] * rows))
    return total


def growth_exponent_estimate(samples) -> tuple[float, float]:
    """Least-squares slope of log(value) against log(R).

    `samples` is a sequence of (R, value) pairs with strictly increasing
    positive R and positive values; returns (slope, max log-space residual).
    """
    pairs = [(float(r), float(v)) for r, v in samples]
    if len(pairs) < 3:
        raise ValueError("need at least 3 samples for a growth fit")
    rs = np.array([r for r, _ in pairs])
    vs = np.array([v for _, v in pairs])
    if (np.diff(rs) <= 0).any():
        raise ValueError("R values must be strictly increasing")
    if (vs <= 0).any():
        raise ValueError("growth fit needs positive values")
    slope, intercept = np.polyfit(np.log(rs), np.log(vs), 1)
    fit = intercept + slope * np.log(rs)
    residual = float(np.max(np.abs(fit - np.log(vs))))
    return float(slope), residual


@dataclass
class CriterionVerdict:
    """Outcome of a volume-growth criterion over an R-grid."""

    mode: str
    critical_exponent: float
    tolerance: float
    satisfied: bool
    exponents: dict
    fit_residuals: dict
    r_grid: list
    series: list
    params: dict
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "params": self.params,
            "R_grid": list(self.r_grid),
            "series": self.series,
            "exponents": self.exponents,
            "critical_exponent": self.critical_exponent,
            "satisfied": bool(self.satisfied),
            "tolerance": self.tolerance,
            "fit_residuals": self.fit_residuals,
            "notes": self.notes,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


_INITIAL_DATA_NOTE = ("initial-data conditions are reported separately by "
                      "initial_data_conditions and are not folded into this verdict")


def _check_r_grid(r_grid, minimum=4):
    rs = [float(r) for r in r_grid]
    if len(rs) < minimum:
        raise ValueError(f"R grid needs at least {minimum} points")
    if any(b <= a for a, b in zip(rs, rs[1:])):
        raise ValueError("R grid must be strictly increasing")
    return rs


def annulus_criterion(g: WeightedGraph, m: PseudoMetric, x0: int,
                      params: SystemParams, h1: Potential, h2: Potential,
                      r_grid, *, tol: float = DEFAULT_TOLERANCE,
                      points_per_unit: int = DEFAULT_POINTS_PER_UNIT) -> CriterionVerdict:
    """Coupled-system criterion: both annulus integrals must grow no faster
    than R^kappa, kappa = critical_volume_exponent(p, q, alpha)."""
    rs = _check_r_grid(r_grid)
    series = []
    for R in rs:
        reg = SpaceTimeRegion.annulus(R, params.theta1, params.theta2)
        i1 = region_integral(g, m, x0, reg, h1, 1.0 / (params.p - 1.0),
                             points_per_unit=points_per_unit)
        i2 = region_integral(g, m, x0, reg, h2, 1.0 / (params.q - 1.0),
                             points_per_unit=points_per_unit)
        series.append({"R": R, "I_h1": i1, "I_h2": i2})
    s1, res1 = growth_exponent_estimate([(e["R"], e["I_h1"]) for e in series])
    s2, res2 = growth_exponent_estimate([(e["R"], e["I_h2"]) for e in series])
    crit = critical_volume_exponent(params.p, params.q, params.alpha)
    return CriterionVerdict(
        mode="system-annulus",
        critical_exponent=crit, tolerance=tol,
        satisfied=(s1 <= crit + tol) and (s2 <= crit + tol),
        exponents={"I_h1": s1, "I_h2": s2},
        fit_residuals={"I_h1": res1, "I_h2": res2},
        r_grid=rs, series=series, params=params.to_dict(),
        notes=[_INITIAL_DATA_NOTE],
    )


def single_criterion(g: WeightedGraph, m: PseudoMetric, x0: int,
                     p: float, alpha: float, h: Potential, r_grid, *,
                     theta1: float = 2.0, theta2: float = 2.0,
                     tol: float = DEFAULT_TOLERANCE,
                     points_per_unit: int = DEFAULT_POINTS_PER_UNIT) -> CriterionVerdict:
    """Single-inequality comparison criterion with threshold (1+alpha)p/(p-1)."""
    rs = _check_r_grid(r_grid)
    series = []
    for R in rs:
        reg = SpaceTimeRegion.annulus(R, theta1, theta2)
        series.append({"R": R, "I_h": region_integral(
            g, m, x0, reg, h, 1.0 / (p - 1.0), points_per_unit=points_per_unit)})
    slope, res = growth_exponent_estimate([(e["R"], e["I_h"]) for e in series])
    crit = single_inequality_exponent(p, alpha)
    return CriterionVerdict(
        mode="single-annulus",
        critical_exponent=crit, tolerance=tol,
        satisfied=slope <= crit + tol,
        exponents={"I_h": slope}, fit_residuals={"I_h": res},
        r_grid=rs, series=series,
        params={"p": p, "alpha": alpha, "theta1": theta1, "theta2": theta2},
    )


@dataclass(frozen=True)
class VolumeTerms:
    """The four exponentially weighted volumes at one radius.

    ball_* integrate over the ball of radius R and the time window
    [R^beta, 2 R^beta]; tail_* integrate over the complement of the ball
    and [0, 2 R^beta]; 1/2 index the two potentials with their exponents.
    """

    ball_1: float
    tail_1: float
    ball_2: float
    tail_2: float

    @property
    def max(self) -> float:
        return max(self.ball_1, self.tail_1, self.ball_2, self.tail_2)

    def to_dict(self) -> dict:
        return {"V1": self.ball_1, "V2": self.tail_1,
                "V3": self.ball_2, "V4": self.tail_2, "Vmax": self.max}


def _temporal_integral(h: Potential, gamma: float, t_lo: float, t_hi: float,
                       points_per_unit: int) -> float:
    if t_hi <= t_lo:
        return 0.0
    if h.time_independent:
        return t_hi - t_lo
    n_pts = int(math.ceil((t_hi - t_lo) * points_per_unit))
    n_pts = max(4, n_pts + (n_pts % 2))
    ts = np.linspace(t_lo, t_hi, n_pts + 1)
    vals = h.temporal_neg_power(ts, gamma)
    return float((vals * _simpson_weights(n_pts + 1)).sum() * (t_hi - t_lo) / n_pts)


def weighted_volume_terms(g: WeightedGraph, m: PseudoMetric, x0: int,
                          params: SystemParams, h1: Potential, h2: Potential,
                          R: float, *,
                          points_per_unit: int = DEFAULT_POINTS_PER_UNIT) -> VolumeTerms:
    """Ball and tail integrals of h^(-gamma) e^(-delta d / R) mu at radius R."""
    if params.delta is None:
        raise ValueError("the exponential-weight criterion needs delta")
    dvec = distances_from(g, m, x0)
    if g.boundary is not None and g.boundary.any():
        min_bd = float(dvec[g.boundary].min())
        if 2.0 * R > min_bd:
            raise TruncationError(
                f"truncation must exceed 2R = {2 * R:.3g}: boundary at {min_bd:.3g}")
    beta = 0.5 * (1.0 + params.alpha)
    t1, t2 = R ** beta, 2.0 * R ** beta
    in_ball = dvec <= R
    weight = np.exp(-params.delta * dvec / R) * g.mu
    out = []
    for h, gamma in ((h1, 1.0 / (params.p - 1.0)), (h2, 1.0 / (params.q - 1.0))):
        spatial = h.spatial_neg_power(dvec, gamma) * weight
        band = _temporal_integral(h, gamma, t1, t2, points_per_unit)
        full = _temporal_integral(h, gamma, 0.0, t2, points_per_unit)
        out.append(float(spatial[in_ball].sum()) * band)
        out.append(float(spatial[~in_ball].sum()) * full)
    return VolumeTerms(ball_1=out[0], tail_1=out[1], ball_2=out[2], tail_2=out[3])


def expweight_criterion(g: WeightedGraph, m: PseudoMetric, x0: int,
                        params: SystemParams, h1: Potential, h2: Potential,
                        r_grid, *, tol: float = DEFAULT_TOLERANCE,
                        points_per_unit: int = DEFAULT_POINTS_PER_UNIT) -> CriterionVerdict:
    """Exponential-weight criterion: the largest of the four volume terms
    must grow no faster than R^kappa."""
    rs = _check_r_grid(r_grid)
    series = []
    for R in rs:
        terms = weighted_volume_terms(g, m, x0, params, h1, h2, R,
                                      points_per_unit=points_per_unit)
        entry = {"R": R}
        entry.update(terms.to_dict())
        series.append(entry)
    slope, res = growth_exponent_estimate([(e["R"], e["Vmax"]) for e in series])
    crit = critical_volume_exponent(params.p, params.q, params.alpha)
    return CriterionVerdict(
        mode="system-expweight",
        critical_exponent=crit, tolerance=tol,
        satisfied=slope <= crit + tol,
        exponents={"Vmax": slope}, fit_residuals={"Vmax": res},
        r_grid=rs, series=series, params=params.to_dict(),
    )


def exp_weighted_norm(g: WeightedGraph, m: PseudoMetric, x0: int,
                      f, delta: float) -> float:
    """sum_x |f(x)| e^(-delta d(x, x0)) mu(x) over the finite carrier."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    f = np.asarray(f, dtype=float)
    if f.shape != (g.num_vertices,):
        raise ValueError("f must be a vertex function")
    dvec = distances_from(g, m, x0)
    return float(np.sum(np.abs(f) * np.exp(-delta * dvec) * g.mu))


@dataclass
class InitialDataReport:
    """Sign conditions on the initial velocities u1, v1.

    total_*: sum of u1 mu (resp. v1 mu) with nonnegativity flags.
    Per radius R the report carries, for each field,
      pos_minus_neg = sum_{B_R} w^+ mu - sum_{B_2R} w^- mu   (its minimum over
        the grid is the liminf proxy), and
      pos_annulus   = sum_{B_2R} w^+ mu - sum_{B_R} w^+ mu   (the positive
        part in the annulus; nonnegative by construction).
    """

    total_u: float
    total_v: float
    total_u_nonneg: bool
    total_v_nonneg: bool
    per_radius: list
    liminf_proxy_u: float
    liminf_proxy_v: float
    liminf_ok_u: bool
    liminf_ok_v: bool

    def to_dict(self) -> dict:
        return {
            "total_u": self.total_u, "total_v": self.total_v,
            "total_u_nonneg": self.total_u_nonneg,
            "total_v_nonneg": self.total_v_nonneg,
            "per_radius": self.per_radius,
            "liminf_proxy_u": self.liminf_proxy_u,
            "liminf_proxy_v": self.liminf_proxy_v,
            "liminf_ok_u": self.liminf_ok_u,
            "liminf_ok_v": self.liminf_ok_v,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def initial_data_conditions(g: WeightedGraph, m: PseudoMetric, x0: int,
                            u1, v1, r_grid) -> InitialDataReport:
    """Evaluate the sign conditions on initial velocities over an R-grid."""
    u1 = np.asarray(u1, dtype=float)
    v1 = np.asarray(v1, dtype=float)
    for f in (u1, v1):
        if f.shape != (g.num_vertices,):
            raise ValueError("initial data must be vertex functions")
    dvec = distances_from(g, m, x0)
    mu = g.mu
    scale = float(np.sum((np.abs(u1) + np.abs(v1)) * mu)) + 1.0
    tiny = 1e-12 * scale
    total_u = float(np.sum(u1 * mu))
    total_v = float(np.sum(v1 * mu))
    per_radius = []
    for R in r_grid:
        R = float(R)
        in_r = dvec <= R
        in_2r = dvec <= 2.0 * R
        row = {"R": R}
        for name, f in (("u", u1), ("v", v1)):
            pos = np.maximum(f, 0.0) * mu
            neg = np.maximum(-f, 0.0) * mu
            row[f"pos_minus_neg_{name}"] = float(pos[in_r].sum() - neg[in_2r].sum())
            row[f"pos_annulus_{name}"] = float(pos[in_2r].sum() - pos[in_r].sum())
        per_radius.append(row)
    prox_u = min(r["pos_minus_neg_u"] for r in per_radius)
    prox_v = min(r["pos_minus_neg_v"] for r in per_radius)
    return InitialDataReport(
        total_u=total_u, total_v=total_v,
        total_u_nonneg=total_u >= -tiny, total_v_nonneg=total_v >= -tiny,
        per_radius=per_radius,
        liminf_proxy_u=prox_u, liminf_proxy_v=prox_v,
        liminf_ok_u=prox_u >= -tiny, liminf_ok_v=prox_v >= -tiny,
    )


def annulus_covering_check(g: WeightedGraph, m: PseudoMetric, x0: int,
                           theta1: float, theta2: float, R: float, *,
                           terms: int | None = None,
                           points_per_unit: int = 16) -> dict:
    """Diagnostic: the halo at R is covered by the annuli at radii
    2^(k/theta1 - 1) R, k = 0..terms.

    Pointwise set containment is verified on the truncation x time grid.
    Plays no role in any verdict.
    """
    if terms is None:
        terms = int(math.floor(3.0 * theta1 - 1.0)) + 1
    dvec = distances_from(g, m, x0)
    halo = SpaceTimeRegion.halo(R, theta1, theta2)
    annuli = [SpaceTimeRegion.annulus(2.0 ** (k / theta1 - 1.0) * R, theta1, theta2)
              for k in range(terms + 1)]
    t_max = halo.time_extent()
    ts = np.linspace(0.0, t_max, int(math.ceil(t_max * points_per_unit)) + 1)
    dpow = dvec ** theta1
    n_halo = 0
    n_uncovered = 0
    chunk = max(1, int(2_000_000 // max(g.num_vertices, 1)))
    lo_h, hi_h = halo.rho_bounds()
    bounds = [a.rho_bounds() for a in annuli]
    for start in range(0, len(ts), chunk):
        tc = ts[start:start + chunk]
        rho = dpow[:, None] + (tc ** theta2)[None, :]
        in_halo = (rho >= lo_h) & (rho <= hi_h)
        covered = np.zeros_like(in_halo)
        for lo_k, hi_k in bounds:
            covered |= (rho >= lo_k) & (rho <= hi_k)
        n_halo += int(in_halo.sum())
        n_uncovered += int((in_halo & ~covered).sum())
    return {"R": float(R), "terms": terms, "n_halo_samples": n_halo,
            "n_uncovered": n_uncovered, "all_covered": n_uncovered == 0}


def default_r_grid(g: WeightedGraph, m: PseudoMetric, x0: int, r0: float, *,
                   theta1: float = 2.0, mode: str = "annulus",
                   min_points: int = 4, max_points: int = 10) -> list:
    """Geometric grid r0 * {1, 2, 4, ...} extended while the truncation
    admits the spatial shadow (annulus reach 2^(1/theta1) R, exponential
    reach 2R)."""
    dvec = distances_from(g, m, x0)
    if g.boundary is not None and g.boundary.any():
        limit = float(dvec[g.boundary].min())
    else:
        limit = math.inf
    grid = []
    R = float(r0)
    while len(grid) < max_points:
        reach = (2.0 ** (1.0 / theta1)) * R if mode == "annulus" else 2.0 * R
        if reach > limit and len(grid) >= min_points:
            break
        if reach > limit:
            raise TruncationError(
                f"truncation admits only {len(grid)} grid radii, need {min_points}")
        grid.append(R)
        R *= 2.0
    return grid
