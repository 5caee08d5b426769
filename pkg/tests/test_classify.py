"""Decision-table verdicts, beta identities, and the explicit perturbation."""

import dataclasses
import json

import numpy as np
import pytest
from scipy.optimize import brentq

import varstab as vs
from varstab.errors import BadWidths, NotASolution


def neumann_arc(pot, theta0, A, n, horizon=12.0):
    """Integrate from (theta0, A) and cut at the nth return of p to A."""
    probe = vs.integrate_ivp(pot, theta0, A, (0.0, horizon), tol=1e-12)
    s, r = probe.s_nodes, probe.p_nodes - A
    hits = []
    for i in range(len(s) - 1):
        if r[i] * r[i + 1] < 0:
            hits.append(brentq(lambda x: float(probe.p(x)) - A,
                               s[i], s[i + 1], xtol=1e-13))
    assert len(hits) >= n, f"only {len(hits)} returns before s={horizon}"
    return vs.integrate_ivp(pot, theta0, A, (0.0, hits[n - 1]),
                            tol=1e-12, A=A)


def test_dirichlet_no_turning_is_stable():
    pend = vs.make_builtin("pendulum", M=1.0)
    traj = vs.integrate_ivp(pend, 0.3, 2.1, (0.0, 1.0))
    v = vs.classify_dirichlet(traj)
    assert v.verdict == "stable" and v.theorem == "I=0"
    assert v.evidence["I"] == 0


def test_dirichlet_two_turnings_is_unstable():
    pend = vs.make_builtin("pendulum", M=4.0)
    traj = vs.integrate_ivp(pend, 0.1, 1.5, (0.0, 10.0))
    v = vs.classify_dirichlet(traj)
    assert v.verdict == "unstable" and v.theorem == "I>=2"
    assert v.evidence["I"] >= 2


def test_dirichlet_single_turning_alpha_positive():
    pend = vs.make_builtin("pendulum", M=1.0)
    traj = vs.shoot_dirichlet(vs.ProblemSpec(pend, 0.0, 1.0,
                                             vs.Dirichlet(0.3, 0.3)), 0.2)
    v = vs.classify_dirichlet(traj)
    assert v.verdict == "stable" and v.theorem == "alpha>0"
    assert v.evidence["alpha"] > 1.0
    # a wide enough marginal band swallows any finite alpha
    wide = vs.classify_dirichlet(traj, band=1e3)
    assert wide.verdict == "inconclusive" and wide.theorem == "alpha~0"


def test_dirichlet_single_turning_alpha_negative():
    pend = vs.make_builtin("pendulum", M=1.0)
    traj = vs.shoot_dirichlet(vs.ProblemSpec(pend, 0.0, 5.0,
                                             vs.Dirichlet(-0.5, -0.5)), 0.5)
    v = vs.classify_dirichlet(traj)
    assert v.verdict == "unstable" and v.theorem == "alpha<0"
    assert v.evidence["alpha"] < -1.0


def test_dirichlet_isochronous_arc_inconclusive():
    harm = vs.make_builtin("harmonic", k=1.0)
    traj = vs.integrate_ivp(harm, -0.2, 1.1, (0.0, np.pi))
    v = vs.classify_dirichlet(traj)
    assert v.verdict == "inconclusive" and v.theorem == "alpha~0"
    assert abs(v.evidence["alpha"]) < 1e-8


def test_neumann_rotating_arc_stable():
    # one pass over the hilltop between equal-V endpoints: J = -1
    pend = vs.make_builtin("pendulum", M=1.0)
    traj = neumann_arc(pend, 0.3, 2.1, 1)
    assert abs(traj.theta_b - (2.0 * np.pi - 0.3)) < 1e-8
    v = vs.classify_neumann(traj)
    assert v.verdict == "stable" and v.theorem == "J<0"
    assert v.evidence["J"] == -1
    assert vs.beta(traj) > 1.0


def test_neumann_well_crossing_unstable():
    pend = vs.make_builtin("pendulum", M=1.0)
    traj = neumann_arc(pend, -0.5, 0.9, 1)
    assert abs(traj.theta_b - 0.5) < 1e-8
    v = vs.classify_neumann(traj)
    assert v.verdict == "unstable" and v.theorem == "J>0"
    assert v.evidence["J"] == 1


def test_neumann_full_revolution_marginal_unstable():
    # second return closes a full period: J = 0 and beta = 0 by periodicity,
    # which still loses to the explicit perturbation
    pend = vs.make_builtin("pendulum", M=1.0)
    traj = neumann_arc(pend, 0.3, 2.1, 2)
    assert abs(traj.theta_b - (2.0 * np.pi + 0.3)) < 1e-8
    assert abs(vs.beta(traj)) < 1e-9
    v = vs.classify_neumann(traj)
    assert v.verdict == "unstable" and v.theorem == "beta<=0"


def test_neumann_zero_index_positive_beta_inconclusive():
    # asymmetric quartic: the second return crosses one minimum and one
    # maximum of V, so J = 0 with a genuinely positive beta
    pot = vs.make_builtin("polynomial", coeffs=[0.0, 0.3, -0.5, 0.0, 0.25])
    traj = neumann_arc(pot, 0.9, -0.8, 2)
    assert abs(traj.theta_b - 0.122) < 0.05
    v = vs.classify_neumann(traj)
    assert v.verdict == "inconclusive" and v.theorem == "beta>0"
    assert v.evidence["beta"] > 0.01


def test_constant_solutions():
    pend = vs.make_builtin("pendulum", M=81.0)
    top = vs.classify_constant(pend, np.pi)
    assert top.verdict == "stable" and top.theorem == "V''<0"
    bottom = vs.classify_constant(pend, 0.0)
    assert bottom.verdict == "unstable" and bottom.theorem == "V''>0"
    with pytest.raises(NotASolution):
        vs.classify_constant(pend, 0.3)
    qw = vs.make_builtin("quadwell", a=1.0, b=1.0)
    assert vs.classify_constant(qw, 0.0).verdict == "stable"
    quartic = vs.make_builtin("polynomial", coeffs=[0, 0, 0, 0, 1.0])
    assert vs.classify_constant(quartic, 0.0).verdict == "degenerate"


def test_constant_trajectory_routes_to_constant_rule():
    pend = vs.make_builtin("pendulum", M=81.0)
    traj = vs.integrate_ivp(pend, np.pi, 0.0, (0.0, 1.0))
    assert traj.constant
    v = vs.classify_dirichlet(traj)
    assert v.verdict == "stable" and v.theorem == "V''<0"
    assert vs.classify_neumann(traj).verdict == "stable"


def test_tangency_flag_gives_degenerate_verdict():
    pend = vs.make_builtin("pendulum", M=1.0)
    traj = vs.integrate_ivp(pend, 0.3, 2.1, (0.0, 1.0))
    poisoned = dataclasses.replace(traj, tangency_flags=[("h-dip", 0.5)])
    v = vs.classify_dirichlet(poisoned)
    assert v.verdict == "degenerate" and v.theorem == "precondition"
    # endpoint sitting on a stationary point of V blocks the Neumann rule
    on_wall = vs.integrate_ivp(pend, 0.0, 0.9, (0.0, 1.0))
    assert vs.classify_neumann(on_wall).verdict == "degenerate"


def test_beta_endpoint_formula():
    pend = vs.make_builtin("pendulum", M=1.0)
    traj = vs.integrate_ivp(pend, 0.4, 1.3, (0.0, 2.0))
    xi_a = traj.p_a * float(pend.dv(traj.theta_a))
    xi_b = traj.p_b * float(pend.dv(traj.theta_b))
    assert abs(vs.beta(traj) - (xi_a - xi_b)) < 1e-14


def test_second_variation_with_slope_test_function():
    # tau = theta' integrates by parts to exactly beta
    pend = vs.make_builtin("pendulum", M=1.0)
    traj = neumann_arc(pend, 0.3, 2.1, 2)
    tau = lambda s: float(traj.p(s))
    dtau = lambda s: -float(pend.dv(traj.theta(s)))
    d2 = vs.second_variation(traj, pend, tau, dtau)
    assert abs(d2 - vs.beta(traj)) < 1e-8


def test_second_variation_constant_test_function():
    pend = vs.make_builtin("pendulum", M=1.0)
    inner = vs.integrate_ivp(pend, 0.1, 0.3, (0.0, 1.0))   # V'' > 0 region
    one = lambda s: 1.0
    zero = lambda s: 0.0
    assert vs.second_variation(inner, pend, one, zero) < 0
    upper = vs.integrate_ivp(pend, np.pi - 0.3, 0.2, (0.0, 1.0))  # V'' < 0
    assert vs.second_variation(upper, pend, one, zero) > 0


def test_second_variation_sampled_tau():
    pend = vs.make_builtin("pendulum", M=1.0)
    traj = vs.integrate_ivp(pend, 0.4, 1.3, (0.0, 2.0))
    vals = np.asarray(traj.p_nodes)
    d2_grid = vs.second_variation(traj, pend, vals)
    assert abs(d2_grid - vs.beta(traj)) < 1e-6
    with pytest.raises(vs.errors.GridMismatch):
        vs.second_variation(traj, pend, vals[:-3])
    with pytest.raises(vs.errors.GridMismatch):
        vs.second_variation(traj, pend, lambda s: 1.0)  # callable, no dtau


def test_destabilizing_perturbation_beats_marginal_solution():
    pend = vs.make_builtin("pendulum", M=1.0)
    traj = neumann_arc(pend, 0.3, 2.1, 2)
    prof = vs.destabilizing_perturbation(traj)
    assert prof.delta2E < 0
    assert prof.eps == pytest.approx(1e-3 * (traj.b - traj.a))
    # tau is theta' in the bulk
    mid = 0.5 * (traj.a + traj.b)
    k = np.argmin(np.abs(prof.s_nodes - mid))
    assert abs(prof.tau_nodes[k] - float(traj.p(prof.s_nodes[k]))) < 1e-12
    span = traj.b - traj.a
    with pytest.raises(BadWidths):
        vs.destabilizing_perturbation(traj, eps=0.6 * span, nu=0.6 * span)
    with pytest.raises(BadWidths):
        vs.destabilizing_perturbation(traj, eps=-1e-3, nu=1e-3)


def test_settled_perturbation_sign():
    pend = vs.make_builtin("pendulum", M=1.0)
    traj = neumann_arc(pend, 0.3, 2.1, 2)
    prof = vs.settled_perturbation(traj)
    assert prof.delta2E < 0
    assert 0 < prof.eps <= 1e-3 * (traj.b - traj.a)
    # a comfortably stable solution keeps this direction positive
    stable = neumann_arc(pend, 0.3, 2.1, 1)
    assert vs.destabilizing_perturbation(stable).delta2E > 0


def test_confined_to_concave_region_stable_both_ways():
    # arc living entirely where V'' < 0 passes both decision paths
    pend = vs.make_builtin("pendulum", M=1.0)
    traj = neumann_arc(pend, 2.0, 1.5, 1)
    assert abs(traj.theta_b - (2.0 * np.pi - 2.0)) < 1e-8
    th = traj.theta_nodes
    assert np.all(np.asarray(pend.d2v(th)) < 0)
    assert vs.classify_neumann(traj).verdict == "stable"
    assert vs.classify_dirichlet(traj).verdict == "stable"


def test_verdict_json_shape():
    pend = vs.make_builtin("pendulum", M=1.0)
    traj = vs.integrate_ivp(pend, 0.3, 2.1, (0.0, 1.0))
    d = vs.classify_dirichlet(traj).to_json_dict()
    assert list(d.keys()) == ["verdict", "theorem", "I", "J", "alpha", "beta"]
    assert d["verdict"] == "stable" and d["I"] == 0
    assert d["J"] is None and d["alpha"] is None and d["beta"] is None
    json.dumps(d)  # must be serializable as-is
