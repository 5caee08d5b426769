"""Shared fixtures: deterministic rng, independent oracles, problem samplers.

Oracles here deliberately avoid the library's own machinery: elliptic values
come from adaptive quadrature, arc lengths from ODE event timing, so the
closed forms under test are checked against something they do not share code
with.
"""

import warnings

import numpy as np
import pytest
from scipy.integrate import IntegrationWarning, quad, solve_ivp

import varstab as vs

SEED = 20260816


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


# ---------------------------------------------------------------- oracles

def F_quad(phi, m):
    """Incomplete integral of the first kind by adaptive quadrature."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = quad(lambda t: 1.0 / np.sqrt(1.0 - m * np.sin(t) ** 2),
                        0.0, phi, epsabs=1e-15, epsrel=1e-14, limit=800,
                        points=[phi] if abs(m - 1.0) < 1e-3 else None)
    if err > 5e-13 * (1.0 + abs(val)):
        raise RuntimeError(f"oracle quadrature too loose: err={err:.3e}")
    return val


def K_quad(m):
    """Complete integral: quadrature, or the log series hugging m = 1.

    Below 1 - m = 1e-5 the quadrature peak outruns double precision while
    the asymptotic series truncation falls under 1e-15, so the two regimes
    hand over well inside both accuracy budgets.
    """
    m1 = 1.0 - m
    if 0 < m1 < 1e-5:
        L = np.log(4.0 / np.sqrt(m1))
        return L + 0.25 * m1 * (L - 1.0) + (9.0 / 64.0) * m1 * m1 * (L - 7.0 / 6.0)
    return F_quad(np.pi / 2.0, m)


def flight_time(spec, s_max=200.0):
    """Time for the phase point to run spec's arc, measured by ODE events.

    Starts at theta = T0 with the full momentum for pseudo-energy E, aimed
    in spec.direction. The arc's end abscissa is the ordinate-P root nearest
    the turning point, so for P != 0 the p = P hits are collected without
    stopping and the last one before the turning is returned (a trajectory
    can pass over an interior hump of V and meet the ordinate line several
    times). Integrated independently of the library (scipy solve_ivp).
    """
    pot, E, d = spec.potential, spec.E, spec.direction
    gap = E - float(pot.v(spec.T0))
    p0 = d * np.sqrt(max(2.0 * gap, 0.0))

    def rhs(s, y):
        return [y[1], -float(pot.dv(y[0]))]

    def hit(s, y):
        return y[1] - spec.P
    hit.terminal = spec.P == 0.0
    # p moves off P immediately when gap > 0, so direction=0 is safe
    hit.direction = 0

    def turn(s, y):
        return y[1]
    turn.terminal = True
    turn.direction = 0

    events = [hit] if spec.P == 0.0 else [hit, turn]
    sol = solve_ivp(rhs, (0.0, s_max), [spec.T0, p0], events=events,
                    rtol=1e-12, atol=1e-14, dense_output=False,
                    max_step=0.25)
    times = sol.t_events[0]
    times = times[times > 1e-12]
    if spec.P != 0.0:
        turns = sol.t_events[1]
        turns = turns[turns > 1e-12]
        if len(turns):
            times = times[times < turns[0]]
    if len(times) == 0:
        raise RuntimeError("flight-time oracle saw no event")
    return float(times[0] if spec.P == 0.0 else times[-1])


@pytest.fixture
def quad_F():
    return F_quad


@pytest.fixture
def quad_K():
    return K_quad


@pytest.fixture
def flight_oracle():
    return flight_time


# ---------------------------------------------------------------- samplers

def random_potential(rng):
    if rng.random() < 0.5:
        return vs.make_builtin("pendulum", M=float(rng.uniform(0.3, 4.0)))
    return vs.make_builtin("quadwell", a=float(rng.uniform(0.5, 2.0)),
                           b=float(rng.uniform(0.5, 2.0)))


def _theta_range(pot):
    if pot.descriptor.get("family") == "pendulum":
        return (-np.pi, np.pi)
    return (-2.0, 2.0)


def sample_dirichlet(rng, tol=1e-11):
    """Random non-constant Dirichlet solution.

    Any integrated trajectory solves the Dirichlet problem whose endpoint
    values it produces, so no shooting is involved.
    """
    while True:
        pot = random_potential(rng)
        lo, hi = _theta_range(pot)
        theta0 = float(rng.uniform(lo, hi))
        p0 = float(rng.uniform(0.1, 2.5)) * (1 if rng.random() < 0.5 else -1)
        span = float(rng.uniform(0.6, 6.0))
        try:
            traj = vs.integrate_ivp(pot, theta0, p0, (0.0, span), tol=tol)
        except vs.VarstabError:
            continue
        if traj.constant:
            continue
        return traj, pot


def sample_neumann(rng, tol=1e-11, max_crossing=4):
    """Random natural-BC solution: integrate from (theta0, A) until the
    ordinate next returns to A, picking one of the first few returns."""
    while True:
        pot = random_potential(rng)
        lo, hi = _theta_range(pot)
        theta0 = float(rng.uniform(lo, hi))
        A = float(rng.uniform(0.15, 2.2)) * (1 if rng.random() < 0.5 else -1)
        bset = vs.stationary_points(pot, lo - 7.0, hi + 7.0)
        walls = np.concatenate([bset.minima, bset.maxima])
        if np.min(np.abs(walls - theta0)) < 1e-3:
            continue
        try:
            probe = vs.integrate_ivp(pot, theta0, A, (0.0, 40.0), tol=tol)
        except vs.VarstabError:
            continue
        s = probe.s_nodes
        r = probe.p_nodes - A
        hits = []
        for i in range(len(s) - 1):
            if r[i] == 0.0 and s[i] > 1e-9:
                hits.append(s[i])
            elif r[i] * r[i + 1] < 0:
                from scipy.optimize import brentq
                hits.append(brentq(lambda x: float(probe.p(x)) - A,
                                   s[i], s[i + 1], xtol=1e-13))
        hits = [h for h in hits if h > 1e-6]
        if not hits:
            continue
        n = int(rng.integers(1, min(max_crossing, len(hits)) + 1))
        b = hits[n - 1]
        if b < 0.3:
            continue
        try:
            traj = vs.integrate_ivp(pot, theta0, A, (0.0, b), tol=tol, A=A)
        except vs.VarstabError:
            continue
        if traj.constant:
            continue
        if np.min(np.abs(walls - float(traj.theta_b))) < 1e-3:
            continue
        return traj, pot


@pytest.fixture
def dirichlet_sampler():
    return sample_dirichlet


@pytest.fixture
def neumann_sampler():
    return sample_neumann
