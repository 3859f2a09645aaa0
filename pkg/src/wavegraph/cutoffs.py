"""C^2 cut-off profiles, space-time test functions, and their scaling bounds.

Two families of space-time test functions are provided, both built from a
quintic-smoothstep interpolant so that plateaus are hit exactly and the
profiles are twice continuously differentiable:

* compact family:   f_R(x, t) = phi((t^theta2 + d(x, x0)^theta1) / R^theta1)^s
  with phi = 1 on [0, 1], 0 on [2, oo), nonincreasing.  Its support lives in
  the region d^theta1 + t^theta2 <= 2 R^theta1; time derivatives localize in
  the annulus R^theta1 <= d^theta1 + t^theta2 <= 2 R^theta1.

* exponential-tail family:  f_R(x, t) = eta(t / R^beta)^s * psi((d - j) / R),
  beta = (1 + alpha)/2, with eta shaped like phi and psi positive,
  = 1 on [-j, 1] and = exp(-delta r) for r >= 2.  Time derivatives localize
  in the slab t in [R^beta, 2 R^beta]; the spatial Laplacian vanishes
  wherever the whole neighborhood sits in psi's plateau.

The *_cutoff_constants verifiers scan a (vertex, time-grid) product and
report the empirical constants of the corresponding scaling bounds, plus
how large the quantities are outside their regions (they should vanish).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .graphs import WeightedGraph, laplacian_apply
from .geometry import (PseudoMetric, TruncationError, distances_from,
                       interior_mask, jump_size)

__all__ = [
    "smoothstep", "smoothstep_d1", "smoothstep_d2",
    "phi", "phi_d1", "phi_d2",
    "eta", "eta_d1", "eta_d2",
    "psi", "psi_d1", "psi_d2",
    "SpaceTimeRegion", "region_membership", "region_time_interval",
    "TestFunction", "testfun_eval", "default_power",
    "CutoffBoundReport", "compact_cutoff_constants", "exp_cutoff_constants",
]


# ---------------------------------------------------------------------------
# scalar profiles (all vectorized, exact on plateaus)

def smoothstep(t):
    """Quintic smoothstep: 0 below 0, 6t^5 - 15t^4 + 10t^3 on [0,1], 1 above."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def smoothstep_d1(t):
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    tc = np.where(inside, t, 0.0)
    return np.where(inside, 30.0 * tc * tc * (tc - 1.0) * (tc - 1.0), 0.0)


def smoothstep_d2(t):
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    tc = np.where(inside, t, 0.0)
    return np.where(inside, 60.0 * tc * (2.0 * tc - 1.0) * (tc - 1.0), 0.0)


def phi(r):
    """Nonincreasing C^2 cut-off: 1 on [0,1], 1 - smoothstep(r-1) on (1,2), 0 beyond."""
    r = np.asarray(r, dtype=float)
    return np.where(r <= 1.0, 1.0, 1.0 - smoothstep(r - 1.0))


def phi_d1(r):
    return -smoothstep_d1(np.asarray(r, dtype=float) - 1.0)


def phi_d2(r):
    return -smoothstep_d2(np.asarray(r, dtype=float) - 1.0)


# the time profile of the exponential-tail family has the same shape
eta = phi
eta_d1 = phi_d1
eta_d2 = phi_d2


def _psi_g(r):
    r = np.asarray(r, dtype=float)
    mid = (r > 1.0) & (r < 2.0)
    rc = np.where(mid, r, 0.0)
    return np.where(r <= 1.0, 0.0,
                    np.where(r >= 2.0, r, rc * smoothstep(rc - 1.0)))


def _psi_g1(r):
    r = np.asarray(r, dtype=float)
    mid = (r > 1.0) & (r < 2.0)
    rc = np.where(mid, r, 0.0)
    inner = smoothstep(rc - 1.0) + rc * smoothstep_d1(rc - 1.0)
    return np.where(r <= 1.0, 0.0, np.where(r >= 2.0, 1.0, inner))


def _psi_g2(r):
    r = np.asarray(r, dtype=float)
    mid = (r > 1.0) & (r < 2.0)
    rc = np.where(mid, r, 0.0)
    inner = 2.0 * smoothstep_d1(rc - 1.0) + rc * smoothstep_d2(rc - 1.0)
    return np.where(mid, inner, 0.0)


def _check_psi_args(r, delta, j):
    if delta <= 0:
        raise ValueError("delta must be positive")
    if j < 0:
        raise ValueError("j must be >= 0")
    r = np.asarray(r, dtype=float)
    if (r < -j).any():
        raise ValueError(f"psi argument below the domain edge -j = {-j}")
    return r


def psi(r, delta: float, j: float = 0.0):
    """Positive nonincreasing C^2 profile: 1 on [-j, 1], exp(-delta*r) on [2, oo)."""
    r = _check_psi_args(r, delta, j)
    return np.exp(-delta * _psi_g(r))


def psi_d1(r, delta: float, j: float = 0.0):
    r = _check_psi_args(r, delta, j)
    return -delta * _psi_g1(r) * np.exp(-delta * _psi_g(r))


def psi_d2(r, delta: float, j: float = 0.0):
    r = _check_psi_args(r, delta, j)
    g1 = _psi_g1(r)
    return (delta * delta * g1 * g1 - delta * _psi_g2(r)) * np.exp(-delta * _psi_g(r))


def default_power(p: float, q: float) -> int:
    """Smallest integer s with p*(q*(s-2) - 2) > s."""
    if p <= 1 or q <= 1:
        raise ValueError("p and q must exceed 1")
    s = 3
    while p * (q * (s - 2) - 2) <= s:
        s += 1
        if s > 10_000:
            raise ValueError("no admissible power found")
    return s


# ---------------------------------------------------------------------------
# space-time regions

@dataclass(frozen=True)
class SpaceTimeRegion:
    """Decidable space-time region in the variables (d, t), d = d(x, x0).

    Kinds:
      * "annulus":  R^theta1 <= d^theta1 + t^theta2 <= 2 R^theta1
      * "halo":     (R/2)^theta1 <= d^theta1 + t^theta2 <= (4R)^theta1
      * "slab":     t in [R^beta, 2 R^beta], beta = (1+alpha)/2, all d
    """

    kind: str
    R: float
    theta1: float = 2.0
    theta2: float = 2.0
    alpha: float = 1.0

    def __post_init__(self):
        if self.kind not in ("annulus", "halo", "slab"):
            raise ValueError(f"unknown region kind {self.kind!r}")
        if self.R <= 0:
            raise ValueError("R must be positive")

    @classmethod
    def annulus(cls, R, theta1=2.0, theta2=2.0):
        return cls("annulus", R, theta1, theta2)

    @classmethod
    def halo(cls, R, theta1=2.0, theta2=2.0):
        return cls("halo", R, theta1, theta2)

    @classmethod
    def slab(cls, R, alpha=1.0):
        return cls("slab", R, alpha=alpha)

    def rho_bounds(self):
        """Bounds on rho = d^theta1 + t^theta2 (annulus/halo only)."""
        if self.kind == "annulus":
            return self.R ** self.theta1, 2.0 * self.R ** self.theta1
        if self.kind == "halo":
            return (self.R / 2.0) ** self.theta1, (4.0 * self.R) ** self.theta1
        raise ValueError("slab has no rho bounds")

    def slab_interval(self):
        beta = 0.5 * (1.0 + self.alpha)
        return self.R ** beta, 2.0 * self.R ** beta

    def contains(self, d, t):
        """Vectorized membership for distances d and times t (broadcastable)."""
        d = np.asarray(d, dtype=float)
        t = np.asarray(t, dtype=float)
        if self.kind == "slab":
            lo, hi = self.slab_interval()
            return np.broadcast_to((t >= lo) & (t <= hi),
                                   np.broadcast_shapes(d.shape, t.shape)).copy()
        lo, hi = self.rho_bounds()
        rho = d ** self.theta1 + t ** self.theta2
        return (rho >= lo) & (rho <= hi)

    def time_interval(self, d):
        """Per-distance time interval [t_lo, t_hi]; empty encoded as t_hi < t_lo."""
        d = np.asarray(d, dtype=float)
        if self.kind == "slab":
            lo, hi = self.slab_interval()
            return (np.full(d.shape, lo), np.full(d.shape, hi))
        lo, hi = self.rho_bounds()
        dp = d ** self.theta1
        t_lo = np.maximum(lo - dp, 0.0) ** (1.0 / self.theta2)
        empty = dp > hi
        t_hi = np.where(empty, -1.0, np.maximum(hi - dp, 0.0) ** (1.0 / self.theta2))
        t_lo = np.where(empty, 0.0, t_lo)
        return t_lo, t_hi

    def spatial_reach(self) -> float:
        """Largest d with a nonempty time interval (inf for slabs)."""
        if self.kind == "slab":
            return math.inf
        return self.rho_bounds()[1] ** (1.0 / self.theta1)

    def time_extent(self) -> float:
        """Largest t that can belong to the region."""
        if self.kind == "slab":
            return self.slab_interval()[1]
        return self.rho_bounds()[1] ** (1.0 / self.theta2)


def region_membership(reg: SpaceTimeRegion, d, t):
    """Membership of (d, t); scalar in, bool out (arrays broadcast)."""
    out = reg.contains(d, t)
    return bool(out) if np.isscalar(d) and np.isscalar(t) else out


def region_time_interval(reg: SpaceTimeRegion, d):
    """Time interval at distance d; None when empty (scalar d)."""
    t_lo, t_hi = reg.time_interval(np.asarray(d, dtype=float))
    if np.ndim(d) == 0:
        if float(t_hi) < float(t_lo):
            return None
        return float(t_lo), float(t_hi)
    return t_lo, t_hi


# ---------------------------------------------------------------------------
# test functions

class TestFunction:
    """Space-time cut-off bound to a (graph, metric, base vertex) triple.

    Values lie in [0, 1]; time derivatives are exact (chain rule through the
    profile powers).  Evaluation is pure; instances are immutable.
    """

    def __init__(self, *, family, g, m, x0, R, s, theta1=None, theta2=None,
                 alpha=None, delta=None, j=None):
        if family not in ("compact", "exp-tail"):
            raise ValueError(f"unknown family {family!r}")
        if R <= 0:
            raise ValueError("R must be positive")
        if s < 1:
            raise ValueError("power s must be >= 1")
        self.family = family
        self.g = g
        self.m = m
        self.x0 = int(x0)
        self.R = float(R)
        self.s = float(s)
        self.theta1 = theta1
        self.theta2 = theta2
        self.alpha = alpha
        self.delta = delta
        self.j = j
        self.dvec = distances_from(g, m, x0)
        if family == "compact":
            if theta1 is None or theta2 is None:
                raise ValueError("compact family needs theta1 and theta2")
            if theta1 < 2 or theta2 < 2:
                raise ValueError("theta1 and theta2 must be >= 2")
            self._dpow = self.dvec ** theta1
        else:
            if alpha is None or delta is None:
                raise ValueError("exponential-tail family needs alpha and delta")
            if not 0.0 <= alpha <= 1.0:
                raise ValueError("alpha must lie in [0, 1]")
            if delta <= 0:
                raise ValueError("delta must be positive")
            if j is None:
                self.j = jump_size(g, m) if g.num_edges else 0.0
            self._beta = 0.5 * (1.0 + alpha)
            self._rho = (self.dvec - self.j) / self.R

    @classmethod
    def compact(cls, g, m, x0, R, theta1=2.0, theta2=2.0, s=1.0):
        return cls(family="compact", g=g, m=m, x0=x0, R=R, s=s,
                   theta1=float(theta1), theta2=float(theta2))

    @classmethod
    def exp_tail(cls, g, m, x0, R, alpha, delta, s, j=None):
        return cls(family="exp-tail", g=g, m=m, x0=x0, R=R, s=s,
                   alpha=float(alpha), delta=float(delta), j=j)

    @property
    def time_support(self) -> float:
        """Smallest T with value identically zero for t >= T."""
        if self.family == "compact":
            return (2.0 * self.R ** self.theta1) ** (1.0 / self.theta2)
        return 2.0 * self.R ** self._beta

    def region(self, kind: str) -> SpaceTimeRegion:
        if self.family == "compact":
            return SpaceTimeRegion(kind, self.R, self.theta1, self.theta2)
        return SpaceTimeRegion.slab(self.R, self.alpha)

    def _powers(self, w, wt, wtt):
        """(w^s, d/dt w^s, d2/dt2 w^s) with safe handling of w == 0."""
        s = self.s
        if s == 1.0:
            return w, wt, wtt
        pos = w > 0.0
        wsafe = np.where(pos, w, 1.0)
        wm1 = np.where(pos, wsafe ** (s - 1.0), 0.0)
        wm2 = np.where(pos, wsafe ** (s - 2.0), 0.0)
        value = np.where(pos, wsafe ** s, 0.0)
        d1 = s * wm1 * wt
        d2 = s * (s - 1.0) * wm2 * wt * wt + s * wm1 * wtt
        return value, d1, d2

    def eval_all(self, t: float):
        """(value, d/dt, d2/dt2) arrays over all vertices at time t >= 0."""
        if t < 0:
            raise ValueError("t must be >= 0")
        t = float(t)
        if self.family == "compact":
            th1, th2 = self.theta1, self.theta2
            a = (self._dpow + t ** th2) / self.R ** th1
            w = phi(a)
            # exponents are >= 0 since theta2 >= 2, and 0**0 == 1 gives the
            # correct theta2 == 2 limit at t == 0
            at = th2 * t ** (th2 - 1.0) / self.R ** th1
            att = th2 * (th2 - 1.0) * t ** (th2 - 2.0) / self.R ** th1
            wt = phi_d1(a) * at
            wtt = phi_d2(a) * at * at + phi_d1(a) * att
            return self._powers(w, wt, wtt)
        tau = t / self.R ** self._beta
        ps = psi(self._rho, self.delta, self.j / self.R if self.j > 0 else 0.0)
        e0 = float(eta(tau))
        e1 = float(eta_d1(tau))
        e2 = float(eta_d2(tau))
        ev, ed1, ed2 = self._powers(np.array(e0), np.array(e1), np.array(e2))
        scale = self.R ** self._beta
        return ps * float(ev), ps * float(ed1) / scale, ps * float(ed2) / scale ** 2

    def value_all(self, t: float) -> np.ndarray:
        return self.eval_all(t)[0]

    def base_value_all(self, t: float) -> np.ndarray:
        """Underlying profile before raising to the power s."""
        if self.family == "compact":
            a = (self._dpow + float(t) ** self.theta2) / self.R ** self.theta1
            return phi(a)
        tau = float(t) / self.R ** self._beta
        return psi(self._rho, self.delta, self.j / self.R if self.j > 0 else 0.0) * float(eta(tau))

    def eval(self, x: int, t: float):
        """(value, d/dt, d2/dt2) at a single vertex."""
        self.g._check_vertex(x)
        v, d1, d2 = self.eval_all(t)
        i = int(x)
        return float(v[i]), float(d1[i]), float(d2[i])


def testfun_eval(tf: TestFunction, x: int, t: float):
    """Value and exact first/second time derivatives of tf at (x, t)."""
    return tf.eval(x, t)


# ---------------------------------------------------------------------------
# empirical scaling constants of the cutoff families

@dataclass
class CutoffBoundReport:
    """Measured constants of the cutoff scaling bounds at one radius R.

    c_lap, c_dt, c_dtt are the suprema of the correspondingly rescaled
    quantities over their regions; the *_outside fields are the raw
    positive parts sampled outside the regions (should vanish).  The
    abs_* variants use |.| instead of the one-sided positive part.
    """

    family: str
    R: float
    c_lap: float
    c_dt: float
    c_dtt: float
    lap_outside: float
    dt_outside: float
    dtt_outside: float
    abs_lap: float
    abs_dt: float
    abs_dtt: float
    grid_points_per_unit: int
    n_time_samples: int
    support_ok: bool = True
    details: dict | None = None

    @property
    def outside_violation(self) -> float:
        return max(self.lap_outside, self.dt_outside, self.dtt_outside)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "R": self.R,
            "C_lap": self.c_lap,
            "C_dt": self.c_dt,
            "C_dtt": self.c_dtt,
            "outside_violation": self.outside_violation,
            "lap_outside": self.lap_outside,
            "dt_outside": self.dt_outside,
            "dtt_outside": self.dtt_outside,
            "abs_C_lap": self.abs_lap,
            "abs_C_dt": self.abs_dt,
            "abs_C_dtt": self.abs_dtt,
            "grid_resolution": self.grid_points_per_unit,
            "n_time_samples": self.n_time_samples,
            "support_ok": self.support_ok,
            "details": self.details or {},
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _support_clearance(g, m, x0, reach, j, dvec):
    """Raise unless every vertex within metric `reach` of x0 sits at least
    one jump inside the truncation (only checkable with a declared boundary)."""
    if g.boundary is None or not g.boundary.any():
        return
    min_bd = float(dvec[g.boundary].min())
    if reach + j > min_bd:
        raise TruncationError(
            f"cutoff support reaches {reach + j:.3g} but the boundary starts at {min_bd:.3g}")


def compact_cutoff_constants(g: WeightedGraph, m: PseudoMetric, x0: int,
                             theta1: float, theta2: float, alpha: float, R: float,
                             *, points_per_unit: int = 16,
                             time_chunk: int | None = None) -> CutoffBoundReport:
    """Scan the compact-family cutoff (power 1) on a time grid x all vertices.

    Reports
      c_lap = sup over the halo of R^(1+alpha) * (-(L f_R))^+
      c_dt  = sup over the annulus of R^(theta1/theta2) * (-(f_R)_t)^+
      c_dtt = sup over the annulus of R^(2 theta1/theta2) * (-(f_R)_tt)^+
    and the raw positive parts outside the respective regions, which vanish
    up to roundoff because the profile is exactly constant there.

    The time grid covers the full halo extent with at least
    `points_per_unit` samples per unit time.  The truncation must contain
    the spatial support of the cutoff with one jump to spare; beyond the
    support everything is identically zero, so the scan is complete.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    tf = TestFunction.compact(g, m, x0, R, theta1, theta2, s=1.0)
    ann = SpaceTimeRegion.annulus(R, theta1, theta2)
    halo = SpaceTimeRegion.halo(R, theta1, theta2)
    j = jump_size(g, m) if g.num_edges else 0.0
    dvec = tf.dvec
    support_reach = (2.0 * R ** theta1) ** (1.0 / theta1)
    _support_clearance(g, m, x0, support_reach, j, dvec)

    t_max = halo.time_extent()
    n_t = int(math.ceil(t_max * points_per_unit)) + 1
    ts = np.linspace(0.0, t_max, n_t)
    if time_chunk is None:
        time_chunk = max(1, int(2_000_000 // max(g.num_vertices, 1)))

    dpow = tf._dpow
    lo_a, hi_a = ann.rho_bounds()
    lo_h, hi_h = halo.rho_bounds()
    sc_lap = R ** (1.0 + alpha)
    sc_dt = R ** (theta1 / theta2)
    sc_dtt = R ** (2.0 * theta1 / theta2)
    c_lap = c_dt = c_dtt = 0.0
    lap_out = dt_out = dtt_out = 0.0
    a_lap = a_dt = a_dtt = 0.0
    # the whole field vanishes once t^theta2 >= 2 R^theta1
    t_alive = (2.0 * R ** theta1) ** (1.0 / theta2)

    for start in range(0, n_t, time_chunk):
        tc = ts[start:start + time_chunk]
        alive = tc < t_alive
        if not alive.any():
            continue  # identically zero: all quantities are exactly 0 there
        tc = tc[alive]
        tpow = tc ** theta2
        rho = dpow[:, None] + tpow[None, :]
        a = rho / R ** theta1
        vals = phi(a)
        lap = laplacian_apply(g, vals)
        at = (theta2 * tc ** (theta2 - 1.0) / R ** theta1)[None, :]
        att = (theta2 * (theta2 - 1.0) * tc ** (theta2 - 2.0) / R ** theta1)[None, :]
        p1 = phi_d1(a)
        dts = p1 * at
        dtts = phi_d2(a) * at * at + p1 * att
        in_ann = (rho >= lo_a) & (rho <= hi_a)
        in_halo = (rho >= lo_h) & (rho <= hi_h)

        neg_lap = np.maximum(-lap, 0.0)
        neg_dt = np.maximum(-dts, 0.0)
        neg_dtt = np.maximum(-dtts, 0.0)
        c_lap = max(c_lap, sc_lap * float(neg_lap[in_halo].max(initial=0.0)))
        c_dt = max(c_dt, sc_dt * float(neg_dt[in_ann].max(initial=0.0)))
        c_dtt = max(c_dtt, sc_dtt * float(neg_dtt[in_ann].max(initial=0.0)))
        lap_out = max(lap_out, float(neg_lap[~in_halo].max(initial=0.0)))
        dt_out = max(dt_out, float(neg_dt[~in_ann].max(initial=0.0)))
        dtt_out = max(dtt_out, float(neg_dtt[~in_ann].max(initial=0.0)))
        a_lap = max(a_lap, sc_lap * float(np.abs(lap[in_halo]).max(initial=0.0)))
        a_dt = max(a_dt, sc_dt * float(np.abs(dts[in_ann]).max(initial=0.0)))
        a_dtt = max(a_dtt, sc_dtt * float(np.abs(dtts[in_ann]).max(initial=0.0)))

    return CutoffBoundReport(
        family="compact", R=float(R),
        c_lap=c_lap, c_dt=c_dt, c_dtt=c_dtt,
        lap_outside=lap_out, dt_outside=dt_out, dtt_outside=dtt_out,
        abs_lap=a_lap, abs_dt=a_dt, abs_dtt=a_dtt,
        grid_points_per_unit=points_per_unit, n_time_samples=n_t,
        details={"theta1": theta1, "theta2": theta2, "alpha": alpha},
    )


def _neighbor_max(g: WeightedGraph, values: np.ndarray) -> np.ndarray:
    """Per-vertex maximum of `values` over the neighbors (-inf if none)."""
    indptr = g.adjacency.indptr
    indices = g.adjacency.indices
    out = np.full(g.num_vertices, -np.inf)
    has = np.diff(indptr) > 0
    if has.any():
        out[has] = np.maximum.reduceat(values[indices], indptr[:-1][has])
    return out


def exp_cutoff_constants(g: WeightedGraph, m: PseudoMetric, x0: int,
                         s: float, alpha: float, delta: float, R: float,
                         *, points_per_unit: int = 16) -> CutoffBoundReport:
    """Measure the scaling constants of the exponential-tail cutoff.

    The cutoff factorizes into a time profile and a space profile, so the
    ratios defining each constant separate exactly:

      c_dt  = sup |f_t|  * R^beta    / (eta^(s-1) e^(-delta d / R)) over the slab,
      c_dtt = sup |f_tt| * R^(1+alpha) / (eta^(s-2) e^(-delta d / R)) over the slab,
      c_lap = sup |L f|  * R^(1+alpha) / (eta^s e^(-delta d / R)) outside the
              ball of radius R (eta powers cancel; interior vertices only,
              since the spatial profile never vanishes and boundary vertices
              have corrupted Laplacians).

    support_ok aggregates the exact-zero checks: f_t vanishes at t = 0 and
    outside the slab's time band, L f vanishes wherever the whole
    neighborhood sits in the spatial plateau (in particular on the ball of
    radius R).
    """
    if s <= 2:
        raise ValueError("power s must exceed 2")
    tf = TestFunction.exp_tail(g, m, x0, R, alpha, delta, s)
    j = tf.j
    dvec = tf.dvec
    beta = tf._beta
    if g.boundary is not None and g.boundary.any():
        min_bd = float(dvec[g.boundary].min())
        if 2.0 * R + j > min_bd:
            raise TruncationError(
                f"ball of radius 2R = {2 * R:.3g} not contained: boundary at {min_bd:.3g}")

    rho = tf._rho
    expo = delta * (dvec / R - _psi_g(rho))  # log of psi(rho) * e^(delta d / R)
    space_ratio = np.exp(np.minimum(expo, 500.0))
    psivec = psi(rho, delta, j / R if j > 0 else 0.0)
    lap_psi = laplacian_apply(g, psivec)

    t_hi = 2.0 * R ** beta
    n_t = int(math.ceil(t_hi * points_per_unit)) + 1
    ts = np.linspace(0.0, t_hi, n_t)
    tau = ts / R ** beta
    e0 = eta(tau)
    e1 = eta_d1(tau)
    e2 = eta_d2(tau)
    in_band = (ts >= R ** beta) & (ts <= t_hi)
    live = e0 > 0.0

    # time factors of the separated ratios (eta powers cancelled)
    dt_t = s * np.abs(e1)
    dtt_t = np.abs(s * (s - 1.0) * e1 * e1 + s * e0 * e2)
    c_dt = float(dt_t[in_band & live].max(initial=0.0)) * float(space_ratio.max())
    c_dtt = float(dtt_t[in_band & live].max(initial=0.0)) * float(space_ratio.max())
    dt_out = float(dt_t[~in_band].max(initial=0.0))

    interior, _ = interior_mask(g, m, x0)
    outside_ball = (dvec > R) & interior
    c_lap = float((np.abs(lap_psi) * space_ratio * R ** (1.0 + alpha))[outside_ball].max(initial=0.0))
    # L f on the ball of radius R must vanish identically (plateau argument)
    in_ball = dvec <= R
    lap_in_ball = float(np.abs(lap_psi[in_ball]).max(initial=0.0))

    nbmax = _neighbor_max(g, rho)
    plateau = (rho <= 1.0) & (nbmax <= 1.0)
    lap_on_plateau = float(np.abs(lap_psi[plateau]).max(initial=0.0))
    ball_in_plateau = bool(np.all(plateau[in_ball]))
    dt_at_zero = float(np.abs(tf.eval_all(0.0)[1]).max(initial=0.0))

    support_ok = (dt_out <= 1e-14 and lap_on_plateau <= 1e-12
                  and lap_in_ball <= 1e-12 and ball_in_plateau
                  and dt_at_zero == 0.0)
    return CutoffBoundReport(
        family="exp-tail", R=float(R),
        c_lap=c_lap, c_dt=c_dt, c_dtt=c_dtt,
        lap_outside=lap_in_ball, dt_outside=dt_out, dtt_outside=0.0,
        abs_lap=c_lap, abs_dt=c_dt, abs_dtt=c_dtt,
        grid_points_per_unit=points_per_unit, n_time_samples=n_t,
        support_ok=support_ok,
        details={
            "s": s, "alpha": alpha, "delta": delta, "j": j,
            "lap_on_plateau": lap_on_plateau,
            "ball_in_plateau": ball_in_plateau,
            "dt_at_zero": dt_at_zero,
        },
    )
