"""Arc length (flight time) L(T0, E, P) and its pseudo-energy derivative.

An arc of pseudo-energy E starts at abscissa T0 and ends where the ordinate
first equals P, just before the turning point the arc runs toward. Its length
is L = Sign[P]/sqrt(2) * int_{T0}^{T} dtheta/sqrt(E - V). As P -> 0 the end
abscissa T reaches the turning point and the integrand develops an inverse
square-root singularity; the substitution theta = T - d u^2 removes it, which
keeps the P = 0 limit (the one alpha needs) a smooth quadrature. dL/dE uses
the closed two-term expression when P != 0 and Richardson-extrapolated
central differences of the regularized length in the turning limit, where the
two closed-form terms diverge individually.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import (DivergentArc, InvalidParams, NoConvergence,
                     NonFiniteDerivative, NoRoot, TangencyAmbiguous, WrongIndex)
from .potential import Potential

__all__ = ["ArcSpec", "turning_abscissa", "arc_length", "dlength_dE", "alpha"]

QUAD_EPS = 1e-12
DIVERGE_TOL = 1e-12    # relative floor on E - V at an interior stationary point
SERIES_CUT = 1e-4      # u below this fraction of u0 evaluates the series form


@dataclass(frozen=True)
class ArcSpec:
    """An arc (T0, E, P) plus the travel direction toward its turning point.

    direction is +1/-1; it is implied by sign(P) when P != 0 and must be given
    explicitly for turning-limit arcs (P = 0).
    """

    potential: Potential
    T0: float
    E: float
    P: float
    direction: int | None = None

    def __post_init__(self):
        if self.P != 0.0:
            object.__setattr__(self, "direction", int(np.sign(self.P)))
        elif self.direction not in (-1, 1):
            raise InvalidParams("P = 0 arcs need direction = +1 or -1")
        gap = self.E - float(self.potential.v(self.T0))
        if gap < -1e-12 * (1.0 + abs(self.E)):
            raise InvalidParams(f"E - V(T0) = {gap:.3e} < 0: no motion at T0")


def _first_zero(spec: ArcSpec, span: float, n_scan: int) -> float:
    """First zero of E - V(theta) beyond T0 in the travel direction.

    A stationary point of V where E - V dips to zero before any sign change
    is a heteroclinic limit and raises DivergentArc; no zero within the span
    raises NoRoot. A cell whose nodes agree in sign can still hide a zero
    pair around an interior maximum of V, so stationary points are refined
    and probed before the cell is dismissed.
    """
    pot, E, d = spec.potential, spec.E, spec.direction
    grid = spec.T0 + d * np.linspace(0.0, span, n_scan)
    g = E - np.asarray(pot.v(grid), dtype=float)
    dv = np.asarray(pot.dv(grid), dtype=float)
    div_tol = DIVERGE_TOL * (1.0 + abs(E))
    g_fn = lambda th: E - float(pot.v(th))
    for i in range(n_scan - 1):
        if g[i + 1] == 0.0:
            return float(grid[i + 1])
        if g[i] * g[i + 1] < 0:
            lo, hi = sorted((grid[i], grid[i + 1]))
            return brentq(g_fn, lo, hi, xtol=1e-14, rtol=8.9e-16)
        if dv[i] * dv[i + 1] < 0:
            lo, hi = sorted((grid[i], grid[i + 1]))
            th_s = brentq(lambda th: float(pot.dv(th)), lo, hi,
                          xtol=1e-14, rtol=8.9e-16)
            gap = E - float(pot.v(th_s))
            if abs(gap) < div_tol:
                raise DivergentArc(f"E - V vanishes at the stationary point "
                                   f"theta={th_s:.12g}: infinite arc")
            if gap < 0 and g[i] > 0:
                lo, hi = sorted((grid[i], th_s))
                return brentq(g_fn, lo, hi, xtol=1e-14, rtol=8.9e-16)
    raise NoRoot(f"no turning point within {span:g} of T0={spec.T0:g}")


def turning_abscissa(spec: ArcSpec, span: float = 8.0 * np.pi,
                     n_scan: int = 4096) -> float:
    """End abscissa T: the root of V(T) = E - P^2/2 nearest the turning point.

    Found as the last sign change of V - (E - P^2/2) between T0 and the
    turning abscissa of the underlying trajectory.
    """
    theta_c = _first_zero(spec, span, n_scan)
    if spec.P == 0.0:
        return theta_c
    pot, c = spec.potential, spec.E - spec.P**2 / 2.0
    grid = np.linspace(spec.T0, theta_c, n_scan)
    h = np.asarray(pot.v(grid), dtype=float) - c
    last = None
    for i in range(n_scan - 1):
        if h[i] == 0.0:
            last = (float(grid[i]), float(grid[i]))
        elif h[i] * h[i + 1] < 0:
            last = (float(grid[i]), float(grid[i + 1]))
    if last is None:
        raise NoRoot(f"V never meets E - P^2/2 = {c:.12g} on the arc")
    if last[0] == last[1]:
        return last[0]
    lo, hi = sorted(last)
    return brentq(lambda th: float(pot.v(th)) - c, lo, hi,
                  xtol=1e-14, rtol=8.9e-16)


def _check_turning_regular(pot: Potential, T: float, E: float) -> float:
    dvT = float(pot.dv(T))
    if abs(dvT) < 1e-8 * (1.0 + abs(E)):
        raise DivergentArc(f"turning point theta={T:.12g} is nearly stationary")
    return dvT


def arc_length(spec: ArcSpec, span: float = 8.0 * np.pi,
               n_scan: int = 4096) -> float:
    """Length of the arc from T0 to the abscissa where the ordinate is P."""
    pot, E, d = spec.potential, spec.E, spec.direction
    T = turning_abscissa(spec, span, n_scan)
    if T == spec.T0:
        return 0.0
    if spec.P != 0.0:
        val, _ = quad(lambda th: 1.0 / np.sqrt(E - pot.v(th)), spec.T0, T,
                      epsabs=QUAD_EPS, epsrel=QUAD_EPS, limit=200)
        return float(np.sign(spec.P) * val / np.sqrt(2.0))

    # P = 0: remove the end singularity with theta = T - d u^2
    dvT = _check_turning_regular(pot, T, E)
    u0 = np.sqrt(abs(T - spec.T0))
    u_sw = SERIES_CUT * max(1.0, u0)
    w0 = d * dvT                      # lim w(u), positive as V rises toward T
    w2 = -0.5 * float(pot.d2v(T))

    def w(u):
        if u < u_sw:
            return w0 + w2 * u * u
        return (E - float(pot.v(T - d * u * u))) / (u * u)

    val, _ = quad(lambda u: 1.0 / np.sqrt(w(u)), 0.0, u0,
                  epsabs=QUAD_EPS, epsrel=QUAD_EPS, limit=200)
    return float(np.sqrt(2.0) * val)


def _dlde_analytic(spec: ArcSpec, span: float, n_scan: int) -> float:
    pot, E = spec.potential, spec.E
    T = turning_abscissa(spec, span, n_scan)
    dvT = float(pot.dv(T))
    if dvT == 0.0 or not np.isfinite(dvT):
        raise NonFiniteDerivative(f"V'(T) = {dvT:g} at T = {T:.12g}")
    val, _ = quad(lambda th: (E - pot.v(th)) ** -1.5, spec.T0, T,
                  epsabs=QUAD_EPS, epsrel=QUAD_EPS, limit=200)
    out = 1.0 / (spec.P * dvT) - np.sign(spec.P) * val / (2.0 * np.sqrt(2.0))
    if not np.isfinite(out):
        raise NonFiniteDerivative(f"dL/dE evaluated non-finite at {spec}")
    return float(out)


def _dlde_limit(spec: ArcSpec, span: float, n_scan: int) -> float:
    pot = spec.potential

    def L(E):
        return arc_length(ArcSpec(pot, spec.T0, E, 0.0, spec.direction),
                          span, n_scan)

    gap = spec.E - float(pot.v(spec.T0))
    h = 1e-3 * (1.0 + abs(spec.E))
    if gap > 0:
        h = min(h, 0.25 * gap)
    cache = {}

    def D(step):
        if step not in cache:
            cache[step] = (L(spec.E + step) - L(spec.E - step)) / (2.0 * step)
        return cache[step]

    prev = None
    for _ in range(40):
        rich = (4.0 * D(h / 2.0) - D(h)) / 3.0
        if not np.isfinite(rich):
            raise NonFiniteDerivative("turning-limit dL/dE is not finite")
        if prev is not None and abs(rich - prev) <= max(1e-6 * abs(rich), 1e-10):
            return float(rich)
        prev = rich
        h /= 2.0
    raise NoConvergence("turning-limit dL/dE did not stabilize")


def dlength_dE(spec: ArcSpec, span: float = 8.0 * np.pi,
               n_scan: int = 4096) -> float:
    """dL/dE at fixed (T0, P): closed form for P != 0, FD limit for P = 0."""
    if spec.P != 0.0:
        return _dlde_analytic(spec, span, n_scan)
    return _dlde_limit(spec, span, n_scan)


def alpha(traj, potential: Potential | None = None) -> float:
    """Flight-time sensitivity of an I = 1 trajectory to its pseudo-energy.

    The trajectory splits at its single turning point theta_c into two
    turning-limit arcs anchored at theta(a) and theta(b); alpha is the sum of
    their dL/dE values. Positive alpha settles the one-turning Dirichlet case
    as stable, negative as unstable.
    """
    from .phase import index_I

    pot = potential if potential is not None else traj.potential
    n_turn = index_I(traj)
    if n_turn != 1:
        raise WrongIndex(f"alpha needs exactly one turning point, trajectory has {n_turn}")
    for kind, s in traj.tangency_flags:
        if kind == "endpoint-turning":
            raise WrongIndex(f"turning point sits on the endpoint s={s:.12g}")
    theta_c = float(traj.theta(traj.crossings_h[0]))
    out = 0.0
    for end_s, th_end, p_end in ((traj.a, traj.theta_a, traj.p_a),
                                 (traj.b, traj.theta_b, traj.p_b)):
        d = int(np.sign(theta_c - th_end))
        if d == 0:
            raise TangencyAmbiguous(f"endpoint s={end_s:g} sits at the turning abscissa")
        # the endpoint must move toward the turning point it bounds
        if end_s == traj.a and int(np.sign(p_end)) != d:
            raise WrongIndex("theta(a) does not travel toward the turning point")
        if end_s == traj.b and int(np.sign(p_end)) != -d:
            raise WrongIndex("theta(b) does not travel away from the turning point")
        out += dlength_dE(ArcSpec(pot, th_end, traj.E, 0.0, d))
    return float(out)
