import numpy as np
import pytest

import wavegraph as wg

L2 = wg.PseudoMetric.lattice_l2()
HOP = wg.PseudoMetric.graph_distance()
H1 = wg.Potential.constant(1.0)


def lattice(dim, L):
    g = wg.generate_lattice(dim, L)
    return g, wg.lattice_origin(g)


def single_vertex():
    return wg.WeightedGraph([1.0]), 0


# ---------------------------------------------------------------------------
# exponents

def test_critical_exponent_values():
    assert wg.critical_volume_exponent(2, 2, 1) == 4.0
    assert wg.critical_volume_exponent(3, 2, 0) == pytest.approx(1.8, abs=1e-15)
    assert wg.critical_volume_exponent(3, 3, 1) == 3.0


def test_single_exponent_values():
    assert wg.single_inequality_exponent(2, 1) == 4.0
    assert wg.single_inequality_exponent(2, 0) == 2.0


@pytest.mark.parametrize("p", [1.1, 1.5, 2, 3, 5, 10])
@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
def test_exponent_reduction_identity(p, alpha):
    """p(p+1)(1+a)/(p^2-1) collapses to p(1+a)/(p-1) when the exponents agree."""
    assert abs(wg.critical_volume_exponent(p, p, alpha)
               - wg.single_inequality_exponent(p, alpha)) < 1e-12


def test_exponent_preconditions():
    with pytest.raises(ValueError):
        wg.critical_volume_exponent(2, 3, 1)  # q > p
    with pytest.raises(ValueError):
        wg.single_inequality_exponent(1.0, 0.5)


def test_system_params_validation():
    with pytest.raises(ValueError, match="p >= q"):
        wg.SystemParams(p=2, q=3)
    with pytest.raises(ValueError, match="theta"):
        wg.SystemParams(p=2, q=2, theta1=1.5)
    with pytest.raises(ValueError, match="2\\*theta1/theta2"):
        wg.SystemParams(p=2, q=2, theta1=2, theta2=4, alpha=1.0)


# ---------------------------------------------------------------------------
# region integrals

def test_region_integral_single_vertex_closed_form():
    g, x0 = single_vertex()
    reg = wg.SpaceTimeRegion.annulus(1.0, 2, 2)
    val = wg.region_integral(g, HOP, x0, reg, H1, 1.0)
    assert val == pytest.approx(np.sqrt(2.0) - 1.0, abs=1e-15)


def test_region_integral_line_against_direct_sum():
    g, x0 = lattice(1, 100)
    reg = wg.SpaceTimeRegion.annulus(4.0, 2, 2)
    val = wg.region_integral(g, L2, x0, reg, H1, 1.0)
    oracle = sum(np.sqrt(32.0 - x * x) - np.sqrt(max(0.0, 16.0 - x * x))
                 for x in range(-5, 6))
    assert val == pytest.approx(oracle, rel=1e-14)


def test_region_integral_weight_free_when_h_is_one():
    g, x0 = lattice(1, 50)
    reg = wg.SpaceTimeRegion.annulus(4.0, 2, 2)
    a = wg.region_integral(g, L2, x0, reg, H1, 0.37)
    b = wg.region_integral(g, L2, x0, reg, H1, 1.0)
    assert a == b


def test_region_integral_closed_form_vs_quadrature():
    g, x0 = lattice(1, 60)
    reg = wg.SpaceTimeRegion.annulus(4.0, 2, 2)
    h = wg.Potential.radial_temporal(-1.2, 0.0)  # time independent
    exact = wg.region_integral(g, L2, x0, reg, h, 0.7)
    quad = wg.region_integral(g, L2, x0, reg, h, 0.7, force_quadrature=True)
    assert quad == pytest.approx(exact, rel=1e-8)


def test_region_integral_time_dependent_against_antiderivative():
    g, x0 = single_vertex()
    reg = wg.SpaceTimeRegion.annulus(2.0, 2, 2)
    h = wg.Potential.radial_temporal(0.0, 1.5)  # h = (1+t)^1.5
    gamma = 2.0
    val = wg.region_integral(g, HOP, x0, reg, h, gamma, points_per_unit=64)
    # integral of (1+t)^(-3) from R to sqrt(2) R in closed form
    t0, t1 = 2.0, np.sqrt(8.0)
    oracle = ((1.0 + t0) ** -2 - (1.0 + t1) ** -2) / 2.0
    assert val == pytest.approx(oracle, rel=1e-8)


def test_region_integral_halo_dominates_annulus():
    g, x0 = lattice(2, 40)
    for R in (4.0, 8.0):
        ann = wg.region_integral(g, L2, x0, wg.SpaceTimeRegion.annulus(R), H1, 1.0)
        hal = wg.region_integral(g, L2, x0, wg.SpaceTimeRegion.halo(R), H1, 1.0)
        assert hal >= ann


def test_region_integral_shadow_guard():
    g, x0 = lattice(1, 10)
    reg = wg.SpaceTimeRegion.annulus(20.0, 2, 2)
    with pytest.raises(wg.TruncationError, match="shadow"):
        wg.region_integral(g, L2, x0, reg, H1, 1.0)


def test_region_integral_rejects_zero_potential():
    g, x0 = single_vertex()
    reg = wg.SpaceTimeRegion.annulus(1.0, 2, 2)
    with pytest.raises(ValueError, match="nonpositive"):
        wg.region_integral(g, HOP, x0, reg, wg.Potential.zero(), 1.0)


# ---------------------------------------------------------------------------
# growth fit

def test_growth_fit_exact_power_law():
    slope, residual = wg.growth_exponent_estimate([(r, r ** 3) for r in (8, 16, 32, 64)])
    assert slope == pytest.approx(3.0, abs=1e-10)
    assert residual < 1e-10


def test_growth_fit_constant():
    slope, _ = wg.growth_exponent_estimate([(8, 5.0), (16, 5.0), (32, 5.0)])
    assert abs(slope) < 1e-12


def test_growth_fit_input_validation():
    with pytest.raises(ValueError, match="at least 3"):
        wg.growth_exponent_estimate([(1, 1.0), (2, 2.0)])
    with pytest.raises(ValueError, match="positive"):
        wg.growth_exponent_estimate([(1, 1.0), (2, 0.0), (4, 2.0)])
    with pytest.raises(ValueError, match="increasing"):
        wg.growth_exponent_estimate([(2, 1.0), (1, 1.0), (4, 2.0)])


def test_lattice_volume_slope_is_dimension_plus_one():
    g, x0 = lattice(2, 128)
    samples = []
    for R in (8.0, 16.0, 32.0, 64.0):
        reg = wg.SpaceTimeRegion.annulus(R, 2, 2)
        samples.append((R, wg.region_integral(g, L2, x0, reg, H1, 1.0)))
    slope, _ = wg.growth_exponent_estimate(samples)
    assert slope == pytest.approx(3.0, abs=0.2)


# ---------------------------------------------------------------------------
# criteria

def test_annulus_criterion_line_satisfied():
    g, x0 = lattice(1, 200)
    params = wg.SystemParams(p=2, q=2, alpha=1.0)
    verdict = wg.annulus_criterion(g, L2, x0, params, H1, H1, [8, 16, 32, 64])
    assert verdict.satisfied
    assert verdict.critical_exponent == 4.0
    assert verdict.exponents["I_h1"] == pytest.approx(2.0, abs=0.2)


def test_annulus_criterion_supercritical_not_satisfied():
    g, x0 = lattice(3, 24)
    params = wg.SystemParams(p=5, q=5, alpha=1.0)
    verdict = wg.annulus_criterion(g, L2, x0, params, H1, H1, [2, 4, 8, 16])
    assert verdict.critical_exponent == 2.5
    assert not verdict.satisfied


def test_annulus_criterion_single_vertex_slope():
    g, x0 = single_vertex()
    params = wg.SystemParams(p=2, q=2, theta1=4, theta2=2, alpha=1.0)
    verdict = wg.annulus_criterion(g, HOP, x0, params, H1, H1, [1, 2, 4, 8])
    assert verdict.exponents["I_h1"] == pytest.approx(2.0, abs=1e-10)  # theta1/theta2
    assert verdict.satisfied  # 2 <= 4


def test_annulus_matches_single_criterion_on_diagonal():
    g, x0 = lattice(1, 100)
    params = wg.SystemParams(p=2, q=2, alpha=1.0)
    va = wg.annulus_criterion(g, L2, x0, params, H1, H1, [4, 8, 16, 32])
    vs = wg.single_criterion(g, L2, x0, 2.0, 1.0, H1, [4, 8, 16, 32])
    assert va.satisfied == vs.satisfied
    assert va.exponents["I_h1"] == vs.exponents["I_h"]
    assert va.critical_exponent == vs.critical_exponent


def test_criterion_requires_four_grid_points():
    g, x0 = lattice(1, 100)
    params = wg.SystemParams(p=2, q=2, alpha=1.0)
    with pytest.raises(ValueError, match="at least 4"):
        wg.annulus_criterion(g, L2, x0, params, H1, H1, [8, 16, 32])


def test_verdict_serialization():
    g, x0 = lattice(1, 100)
    params = wg.SystemParams(p=2, q=2, alpha=1.0)
    d = wg.annulus_criterion(g, L2, x0, params, H1, H1, [4, 8, 16, 32]).to_dict()
    assert {"params", "R_grid", "series", "exponents", "critical_exponent",
            "satisfied", "tolerance"} <= set(d)
    assert {"R", "I_h1", "I_h2"} <= set(d["series"][0])
    assert any("initial-data" in note for note in d["notes"])


# ---------------------------------------------------------------------------
# exponential-weight criterion

def test_volume_terms_single_vertex():
    g, x0 = single_vertex()
    params = wg.SystemParams(p=2, q=2, alpha=1.0, delta=1.0)
    vt = wg.weighted_volume_terms(g, HOP, x0, params, H1, H1, 4.0)
    assert vt.ball_1 == 4.0
    assert vt.tail_1 == 0.0
    assert vt.ball_2 == 4.0
    assert vt.max == 4.0


def test_volume_terms_symmetry_in_potentials():
    g, x0 = lattice(1, 60)
    params = wg.SystemParams(p=3, q=2, alpha=1.0, delta=1.0)
    vt = wg.weighted_volume_terms(g, L2, x0, params, H1, H1, 8.0)
    # equal potentials but different exponents still give equal terms for h=1
    assert vt.ball_1 == vt.ball_2
    h_var = wg.Potential.radial_temporal(1.0, 0.0)
    vt2 = wg.weighted_volume_terms(g, L2, x0, params, h_var, H1, 8.0)
    assert vt2.ball_1 != vt2.ball_2


def test_volume_tail_growth_rate_on_line():
    g, x0 = lattice(1, 200)
    params = wg.SystemParams(p=2, q=2, alpha=1.0, delta=1.0)
    ratios = []
    for R in (8.0, 16.0, 32.0):
        vt = wg.weighted_volume_terms(g, L2, x0, params, H1, H1, R)
        ratios.append(vt.tail_1 / R ** 2)
    assert max(ratios) / min(ratios) <= 2.0


def test_expweight_criterion_line_satisfied():
    g, x0 = lattice(1, 200)
    params = wg.SystemParams(p=2, q=2, alpha=1.0, delta=1.0)
    verdict = wg.expweight_criterion(g, L2, x0, params, H1, H1, [8, 16, 32, 64])
    assert verdict.satisfied
    assert verdict.exponents["Vmax"] == pytest.approx(2.0, abs=0.25)


def test_expweight_criterion_single_vertex():
    g, x0 = single_vertex()
    params = wg.SystemParams(p=2, q=2, alpha=1.0, delta=1.0)
    verdict = wg.expweight_criterion(g, HOP, x0, params, H1, H1, [1, 2, 4, 8])
    assert verdict.exponents["Vmax"] == pytest.approx(1.0, abs=1e-10)
    assert verdict.satisfied


def test_expweight_criterion_supercritical():
    g, x0 = lattice(3, 24)
    params = wg.SystemParams(p=5, q=5, alpha=1.0, delta=1.0)
    verdict = wg.expweight_criterion(g, L2, x0, params, H1, H1, [1.5, 3, 6, 12])
    assert verdict.exponents["Vmax"] == pytest.approx(4.0, abs=0.5)
    assert not verdict.satisfied


def test_volume_terms_need_delta():
    g, x0 = single_vertex()
    params = wg.SystemParams(p=2, q=2, alpha=1.0)
    with pytest.raises(ValueError, match="delta"):
        wg.weighted_volume_terms(g, HOP, x0, params, H1, H1, 2.0)


# ---------------------------------------------------------------------------
# weighted norm and initial data

def test_exp_weighted_norm_zero_function():
    g, x0 = lattice(1, 10)
    assert wg.exp_weighted_norm(g, L2, x0, np.zeros(21), 1.0) == 0.0


def test_exp_weighted_norm_point_mass():
    g = wg.WeightedGraph([2.0])
    assert wg.exp_weighted_norm(g, HOP, 0, np.array([3.0]), 0.7) == 6.0


def test_exp_weighted_norm_geometric_series():
    g, x0 = lattice(1, 100)
    val = wg.exp_weighted_norm(g, L2, x0, np.ones(201), 1.0)
    e = np.exp(-1.0)
    oracle = 1.0 + 2.0 * (e - e ** 101) / (1.0 - e)
    assert val == pytest.approx(oracle, rel=1e-14)


def test_initial_data_zero_passes():
    g, x0 = lattice(1, 30)
    zero = np.zeros(61)
    rep = wg.initial_data_conditions(g, L2, x0, zero, zero, [2, 4, 8])
    assert rep.total_u == 0.0
    assert rep.total_u_nonneg and rep.liminf_ok_u
    assert all(r["pos_annulus_u"] == 0.0 for r in rep.per_radius)


def test_initial_data_point_mass():
    g, x0 = lattice(1, 30)
    u1 = np.zeros(61)
    u1[x0] = 1.0
    rep = wg.initial_data_conditions(g, L2, x0, u1, u1, [2, 4, 8])
    assert rep.total_u == 1.0
    assert rep.liminf_proxy_u == 1.0
    assert rep.liminf_ok_u


def test_initial_data_negative_total_flagged():
    g, x0 = lattice(1, 30)
    u1 = np.zeros(61)
    u1[x0] = -0.5
    v1 = np.zeros(61)
    rep = wg.initial_data_conditions(g, L2, x0, u1, v1, [2, 4])
    assert not rep.total_u_nonneg
    assert rep.total_v_nonneg
    assert rep.liminf_proxy_u == -0.5


# ---------------------------------------------------------------------------
# covering diagnostic, default grid

def test_halo_covered_by_annuli():
    g, x0 = lattice(2, 40)
    out = wg.annulus_covering_check(g, L2, x0, 2.0, 2.0, 8.0)
    assert out["all_covered"]
    assert out["terms"] == 6  # strictly above 3*theta1 - 1


def test_halo_not_covered_with_too_few_terms():
    g, x0 = lattice(2, 40)
    out = wg.annulus_covering_check(g, L2, x0, 2.0, 2.0, 8.0, terms=2)
    assert not out["all_covered"]


def test_default_r_grid_respects_truncation():
    g, x0 = lattice(2, 40)
    grid = wg.default_r_grid(g, L2, x0, 2.0)
    assert grid[:3] == [2.0, 4.0, 8.0]
    assert all((2 ** 0.5) * r <= 40.0 for r in grid)
    with pytest.raises(wg.TruncationError):
        wg.default_r_grid(g, L2, x0, 30.0)
