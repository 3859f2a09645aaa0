import numpy as np
import pytest

import wavegraph as wg

L2 = wg.PseudoMetric.lattice_l2()
H1 = wg.Potential.constant(1.0)
HZ = wg.Potential.zero()


def line(L=500):
    g = wg.generate_lattice(1, L)
    return g, wg.lattice_origin(g)


def single_vertex_problem(dt=0.002, T=4.0, amplitude=1.0):
    g = wg.WeightedGraph([1.0])
    one = np.full(1, amplitude)
    zero = np.zeros(1)
    return wg.WaveSystemProblem(graph=g, h1=H1, h2=H1, p=2, q=2,
                                u0=one, u1=zero, v0=one, v1=zero,
                                dt=dt, T=T)


def line_problem(g, x0, amplitude, dt, T, h1=H1, h2=H1, width=8.0, p=2.0, q=2.0):
    d = np.abs(g.coords[:, 0].astype(float))
    bump = amplitude * np.exp(-d ** 2 / width)
    return wg.WaveSystemProblem(graph=g, metric=L2, x0=x0, h1=h1, h2=h2,
                                p=p, q=q, u0=bump, u1=bump, v0=bump, v1=bump,
                                dt=dt, T=T)


def rk4_oracle(t_end, n_steps, y0=(1.0, 0.0)):
    """Independent reference for w'' = w^2 (step-halved to convergence by the caller)."""
    y = np.array(y0, dtype=float)
    h = t_end / n_steps
    def f(y):
        return np.array([y[1], y[0] ** 2])
    for _ in range(n_steps):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def converged_oracle(t_end, tol=1e-10):
    n = 512
    prev = rk4_oracle(t_end, n)
    while True:
        n *= 2
        cur = rk4_oracle(t_end, n)
        if abs(cur[0] - prev[0]) < tol:
            return cur[0]
        prev = cur


# ---------------------------------------------------------------------------
# stability bound

def test_cfl_lattice2d():
    assert wg.cfl_dt(wg.generate_lattice(2, 4)) == 0.25


def test_cfl_path():
    assert wg.cfl_dt(wg.generate_path(10)) == pytest.approx(2.0 / np.sqrt(8.0) / 2.0, abs=1e-15)


def test_cfl_edgeless_fallback():
    assert wg.cfl_dt(wg.WeightedGraph([1.0])) == 0.1


def test_cfl_safety_validation():
    with pytest.raises(ValueError):
        wg.cfl_dt(wg.generate_path(3), safety=0.0)


def test_simulate_rejects_unstable_dt():
    g, x0 = line(20)
    prob = line_problem(g, x0, 0.1, dt=2.0, T=4.0)
    with pytest.raises(ValueError, match="stability"):
        wg.simulate(prob)


# ---------------------------------------------------------------------------
# fixed point, symmetry, blow-up

def test_zero_data_stays_zero():
    g, x0 = line(50)
    zero = np.zeros(g.num_vertices)
    prob = wg.WaveSystemProblem(graph=g, h1=H1, h2=H1, p=2, q=3,
                                u0=zero, u1=zero, v0=zero, v1=zero,
                                dt=0.25, T=10.0)
    traj = wg.simulate(prob)
    assert traj.status == "completed"
    assert np.abs(traj.u).max() == 0.0
    assert np.abs(traj.v).max() == 0.0


def test_symmetric_data_gives_identical_fields():
    g, x0 = line(100)
    prob = line_problem(g, x0, 0.3, dt=0.25, T=5.0)
    traj = wg.simulate(prob)
    assert np.array_equal(traj.u, traj.v)


def test_initial_samples_match_data():
    g, x0 = line(50)
    prob = line_problem(g, x0, 0.5, dt=0.2, T=2.0)
    traj = wg.simulate(prob)
    assert np.array_equal(traj.u[0], prob.u0)
    # startup step is the second-order Taylor update
    s = prob.h1.spatial(None) * np.abs(prob.v0) ** prob.p
    expected = prob.u0 + prob.dt * prob.u1 + 0.5 * prob.dt ** 2 * (
        wg.laplacian_apply(g, prob.u0) + s)
    assert np.abs(traj.u[1] - expected).max() < 1e-15


def test_blowup_detected_and_monotone_in_amplitude():
    g, x0 = line(500)
    dt = wg.cfl_dt(g)
    t_small = wg.simulate(line_problem(g, x0, 1.0, dt, T=80.0))
    t_big = wg.simulate(line_problem(g, x0, 2.0, dt, T=80.0))
    assert t_small.status == "blowup"
    assert t_big.status == "blowup"
    assert t_big.blowup_time < t_small.blowup_time
    assert t_small.blowup_vertex is not None


def test_blowup_reports_maximizing_vertex():
    prob = single_vertex_problem(T=10.0)
    traj = wg.simulate(prob)
    assert traj.status == "blowup"
    assert traj.blowup_vertex == 0
    assert np.isfinite(traj.u).all()


def test_step_cap_reported():
    g, x0 = line(20)
    prob = line_problem(g, x0, 0.0, dt=0.25, T=1000.0)
    prob.step_cap = 10
    traj = wg.simulate(prob)
    assert traj.status == "completed"
    assert traj.step_cap_hit
    assert traj.n_steps == 10


def test_uncoupled_mode_differs():
    g, x0 = line(60)
    d = np.abs(g.coords[:, 0].astype(float))
    u0 = np.exp(-d ** 2 / 8.0)
    v0 = np.zeros_like(u0)
    zero = np.zeros_like(u0)
    common = dict(graph=g, h1=H1, h2=H1, p=2, q=2, u0=u0, u1=zero,
                  v0=v0, v1=zero, dt=0.25, T=5.0)
    coupled = wg.simulate(wg.WaveSystemProblem(coupled=True, **common))
    uncoupled = wg.simulate(wg.WaveSystemProblem(coupled=False, **common))
    # with v = 0 the coupled u-equation is linear, the uncoupled one is not
    assert not np.array_equal(coupled.u, uncoupled.u)
    assert np.abs(coupled.v).max() > 0.0  # driven by |u|^q
    assert np.abs(uncoupled.v).max() == 0.0


# ---------------------------------------------------------------------------
# single-vertex reduction against the independent integrator

def test_single_vertex_matches_ode_oracle():
    prob = single_vertex_problem(dt=0.002, T=4.0)
    traj = wg.simulate(prob)
    assert traj.status == "blowup"
    t_end = 2.5
    w_ref = converged_oracle(t_end)
    i = int(round(t_end / prob.dt))
    assert abs(traj.u[i, 0] - w_ref) / w_ref < 1e-3


def test_single_vertex_second_order_convergence():
    t_star = 2.5
    w_ref = converged_oracle(t_star)
    errs = []
    for dt in (0.004, 0.002):
        traj = wg.simulate(single_vertex_problem(dt=dt, T=2.6))
        i = int(round(t_star / dt))
        errs.append(abs(traj.u[i, 0] - w_ref))
    ratio = errs[0] / errs[1]
    assert 3.5 <= ratio <= 4.5


# ---------------------------------------------------------------------------
# weak-form residuals

def test_weak_residual_zero_trajectory():
    g, x0 = line(100)
    zero = np.zeros(g.num_vertices)
    prob = wg.WaveSystemProblem(graph=g, metric=L2, x0=x0, h1=H1, h2=H1,
                                p=2, q=2, u0=zero, u1=zero, v0=zero, v1=zero,
                                dt=0.25, T=16.0)
    traj = wg.simulate(prob)
    tf = wg.TestFunction.compact(g, L2, x0, R=8.0, s=5.0)
    rep = wg.weak_residual(traj, tf, H1, 2.0, "u")
    assert rep.lhs == 0.0
    assert rep.rhs == 0.0


def test_weak_residual_linear_wave_refines():
    g, x0 = line(300)
    dt0 = wg.cfl_dt(g)
    tf = wg.TestFunction.compact(g, L2, x0, R=10.0, s=5.0)
    lhs = {}
    for dt in (dt0, dt0 / 2.0):
        prob = line_problem(g, x0, 0.05, dt, T=16.0, h1=HZ, h2=HZ)
        traj = wg.simulate(prob)
        rep = wg.weak_residual(traj, tf, HZ, 2.0, "u")
        assert rep.rhs == 0.0
        lhs[dt] = abs(rep.lhs)
    assert lhs[dt0] / lhs[dt0 / 2.0] >= 3.0


def test_weak_residual_equality_system_nonnegative_limit():
    g, x0 = line(500)
    dt0 = wg.cfl_dt(g)
    tf = wg.TestFunction.compact(g, L2, x0, R=10.0, s=5.0)
    res = {}
    for dt in (dt0, dt0 / 2.0):
        prob = line_problem(g, x0, 0.01, dt, T=16.0)
        traj = wg.simulate(prob)
        assert traj.status == "completed"
        rep = wg.weak_residual(traj, tf, H1, 2.0, "u")
        res[dt] = rep
    scale = abs(res[dt0].lhs) + abs(res[dt0].rhs)
    neg0 = max(0.0, -res[dt0].residual)
    neg1 = max(0.0, -res[dt0 / 2.0].residual)
    assert neg1 <= max(neg0 / 3.0, 1e-12 * scale)
    # the residual itself converges at second order
    assert abs(res[dt0].residual) / abs(res[dt0 / 2.0].residual) >= 3.0


def test_weak_residual_breakdown_recomposes():
    g, x0 = line(200)
    prob = line_problem(g, x0, 0.01, wg.cfl_dt(g), T=16.0)
    traj = wg.simulate(prob)
    tf = wg.TestFunction.compact(g, L2, x0, R=10.0, s=5.0)
    for field, h, expo in (("u", H1, 2.0), ("v", H1, 2.0)):
        rep = wg.weak_residual(traj, tf, h, expo, field)
        recomposed = (rep.terms["dtt_term"] - rep.terms["laplacian_term"]
                      + rep.terms["u0_term"] - rep.terms["u1_term"])
        assert abs(recomposed - rep.lhs) <= 1e-12 * max(1.0, abs(rep.lhs))


def test_weak_residual_exp_tail_family():
    g, x0 = line(200)
    prob = line_problem(g, x0, 0.01, wg.cfl_dt(g), T=20.0)
    traj = wg.simulate(prob)
    tf = wg.TestFunction.exp_tail(g, L2, x0, R=8.0, alpha=1.0, delta=1.0, s=6.0)
    rep = wg.weak_residual(traj, tf, H1, 2.0, "u")
    assert rep.terms["u0_term"] == 0.0  # time derivative vanishes at t = 0
    assert np.isfinite(rep.residual)


def test_weak_residual_support_errors():
    g, x0 = line(100)
    prob = line_problem(g, x0, 0.01, 0.25, T=8.0)
    traj = wg.simulate(prob)
    tf = wg.TestFunction.compact(g, L2, x0, R=10.0, s=5.0)  # support 14.14 > 8
    with pytest.raises(wg.SupportError, match="support"):
        wg.weak_residual(traj, tf, H1, 2.0, "u")


def test_weak_residual_blowup_before_support_errors():
    g, x0 = line(500)
    dt = wg.cfl_dt(g)
    prob = line_problem(g, x0, 2.0, dt, T=80.0)  # blows up around t = 2.8
    traj = wg.simulate(prob)
    assert traj.status == "blowup"
    tf = wg.TestFunction.compact(g, L2, x0, R=10.0, s=5.0)
    with pytest.raises(wg.SupportError, match="blew up"):
        wg.weak_residual(traj, tf, H1, 2.0, "u")


# ---------------------------------------------------------------------------
# energy diagnostic

def test_energy_zero_trajectory():
    g, x0 = line(50)
    zero = np.zeros(g.num_vertices)
    prob = wg.WaveSystemProblem(graph=g, h1=HZ, h2=HZ, p=2, q=2, u0=zero,
                                u1=zero, v0=zero, v1=zero, dt=0.25, T=5.0)
    traj = wg.simulate(prob)
    assert wg.energy_diagnostic(traj, 1) == 0.0


def test_energy_single_vertex_kinetic_only():
    g = wg.WeightedGraph([1.0])
    one = np.ones(1)
    prob = wg.WaveSystemProblem(graph=g, h1=H1, h2=H1, p=2, q=2,
                                u0=one, u1=one, v0=one, v1=one, dt=0.01, T=0.1)
    traj = wg.simulate(prob)
    vel = (traj.u[1, 0] - traj.u[0, 0]) / traj.dt
    assert wg.energy_diagnostic(traj, 1) == pytest.approx(0.5 * vel ** 2, rel=1e-14)


def test_energy_drift_linear_wave():
    g = wg.generate_path(200)
    x = np.arange(200, dtype=float)
    u0 = np.exp(-(x - 100.0) ** 2 / 100.0)
    zero = np.zeros(200)
    dt = wg.cfl_dt(g) / 2.0
    prob = wg.WaveSystemProblem(graph=g, h1=HZ, h2=HZ, p=2, q=2,
                                u0=u0, u1=zero, v0=u0, v1=zero,
                                dt=dt, T=1001 * dt)
    traj = wg.simulate(prob)
    assert traj.n_steps >= 1000
    e_ref = wg.energy_diagnostic(traj, 1)
    drift = max(abs(wg.energy_diagnostic(traj, n) - e_ref)
                for n in range(1, traj.n_steps + 1)) / e_ref
    assert drift <= 1e-3


def test_energy_index_validation():
    g, x0 = line(20)
    prob = line_problem(g, x0, 0.1, 0.25, T=2.0)
    traj = wg.simulate(prob)
    with pytest.raises(ValueError, match="out of range"):
        wg.energy_diagnostic(traj, 0)


# ---------------------------------------------------------------------------
# exports

def test_trajectory_csv_headers():
    prob = single_vertex_problem(dt=0.01, T=0.05)
    traj = wg.simulate(prob)
    summary = wg.trajectory_to_csv(traj, "summary")
    assert summary.splitlines()[0] == "t,sup_u,sup_v"
    full = wg.trajectory_to_csv(traj, "full")
    assert full.splitlines()[0] == "t,vertex,u,v"
    assert len(full.splitlines()) == 1 + len(traj.times)


def test_blowup_event_json_roundtrip():
    import json
    traj = wg.simulate(single_vertex_problem(T=10.0))
    event = json.loads(wg.blowup_event_json(traj))
    assert set(event) == {"t_b", "vertex", "threshold"}
    assert event["t_b"] == traj.blowup_time
