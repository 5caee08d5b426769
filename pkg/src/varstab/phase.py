"""Phase-plane trajectories of theta'' + V'(theta) = 0 and their indices.

The Euler-Lagrange equation is integrated as the first-order system
(theta, p) with p = theta'. A Trajectory carries the dense interpolant, the
conserved pseudo-energy E = p^2/2 + V(theta), and refined crossing lists:
crossings_h where p = 0 (their closed-interval count is the index I) and
crossings_min / crossings_max where theta(s) hits a stationary point of V,
split by the sign of V'' (their difference is the index J). Shooting solvers
for the Dirichlet and Neumann boundary-value problems live here as well.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import (EndpointOnBoundary, EnergyDrift, InvalidParams, NoBracket,
                     NoConvergence, StepFailure, TangencyAmbiguous)
from .potential import BoundarySet, Potential

__all__ = ["Dirichlet", "Neumann", "ProblemSpec", "Trajectory", "IndexReport",
           "integrate_ivp", "pseudo_energy", "index_I", "index_J",
           "index_report", "shoot_dirichlet", "shoot_neumann"]

DEFAULT_TOL = 1e-10
DEFAULT_SCAN = 4097
TANGENCY_TOL = 1e-9    # relative threshold on event value and its s-derivative


@dataclass(frozen=True)
class Dirichlet:
    """Fixed ends theta(a) = T_a, theta(b) = T_b."""
    T_a: float
    T_b: float


@dataclass(frozen=True)
class Neumann:
    """Natural ends theta'(a) = theta'(b) = A."""
    A: float


@dataclass(frozen=True)
class ProblemSpec:
    """A boundary-value problem for theta'' + V'(theta) = 0 on [a, b].

    A is the constant of the first-order term in the functional; it shifts the
    energy but not the equation. For Neumann problems A is taken from the bc.
    """

    potential: Potential
    a: float
    b: float
    bc: Dirichlet | Neumann
    A: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or self.a >= self.b:
            raise InvalidParams(f"need a < b, got [{self.a}, {self.b}]")
        if isinstance(self.bc, Neumann):
            object.__setattr__(self, "A", float(self.bc.A))


@dataclass
class Trajectory:
    """An integrated solution with dense output and refined crossings.

    crossings_h lists every s in [a, b] with theta'(s) = 0 (endpoints
    included); crossings_min / crossings_max list interior roots of
    V'(theta(s)) with V'' > 0 / V'' < 0 there. tangency_flags records
    near-degenerate events as (kind, s) pairs; the index functions refuse to
    count past them.
    """

    potential: Potential
    a: float
    b: float
    E: float
    A: float
    s_nodes: np.ndarray
    theta_nodes: np.ndarray
    p_nodes: np.ndarray
    crossings_h: np.ndarray
    crossings_min: np.ndarray
    crossings_max: np.ndarray
    tangency_flags: list = field(default_factory=list)
    constant: bool = False
    meta: dict = field(default_factory=dict)
    _theta_fn: Callable = None
    _p_fn: Callable = None

    def theta(self, s):
        return self._theta_fn(s)

    def p(self, s):
        return self._p_fn(s)

    @property
    def theta_a(self):
        return float(self._theta_fn(self.a))

    @property
    def theta_b(self):
        return float(self._theta_fn(self.b))

    @property
    def p_a(self):
        return float(self._p_fn(self.a))

    @property
    def p_b(self):
        return float(self._p_fn(self.b))

    def resample(self, n: int) -> "Trajectory":
        """Same solution, crossings re-scanned on an n-point grid."""
        return _analyze(self.potential, self.a, self.b, self.E, self.A,
                        self._theta_fn, self._p_fn, n, self.meta,
                        constant=self.constant)

    def export_csv(self, target) -> None:
        """Write the sampled profile as CSV with header s,theta,p."""
        own = isinstance(target, str)
        fh = open(target, "w") if own else target
        try:
            fh.write("s,theta,p\n")
            for s, th, p in zip(self.s_nodes, self.theta_nodes, self.p_nodes):
                fh.write(f"{s:.15g},{th:.15g},{p:.15g}\n")
        finally:
            if own:
                fh.close()

    def events_json(self) -> dict:
        return {"crossings_h": [float(s) for s in self.crossings_h],
                "crossings_min": [float(s) for s in self.crossings_min],
                "crossings_max": [float(s) for s in self.crossings_max],
                "tangency_flags": [[kind, float(s)] for kind, s in self.tangency_flags]}


@dataclass(frozen=True)
class IndexReport:
    I: int
    J: int
    tangency_flags: list


def pseudo_energy(theta, p, potential: Potential):
    """The conserved quantity p^2/2 + V(theta)."""
    return np.asarray(p, dtype=float) ** 2 / 2.0 + potential.v(theta)


def _rhs(potential: Potential):
    def rhs(s, y):
        return [y[1], -float(potential.dv(y[0]))]
    return rhs


def _solve(potential, theta0, p0, a, b, tol):
    sol = solve_ivp(_rhs(potential), (a, b), [float(theta0), float(p0)],
                    method="DOP853", rtol=tol, atol=tol, dense_output=True)
    if not sol.success:
        raise StepFailure(f"integrator failed on [{a}, {b}]: {sol.message}")
    return sol


def _refine(fn, lo, hi, span):
    try:
        return brentq(fn, lo, hi, xtol=1e-14 * max(1.0, span), rtol=8.9e-16)
    except RuntimeError:
        # brentq can stall on extremely flat crossings (fn values denormal
        # over a wide s-window, e.g. a triple root of V'); plain bisection
        # always lands within ~60 halvings
        flo = fn(lo)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                return mid
            fm = fn(mid)
            if fm == 0.0:
                return mid
            if flo * fm < 0:
                hi = mid
            else:
                lo, flo = mid, fm
        return 0.5 * (lo + hi)


def _scan_roots(fn_vec_vals, fn, grid, tol_val, tol_slope, slope_at, span):
    """Sign-change roots of fn on the grid, plus tangency flags.

    fn_vec_vals are fn's values at the grid nodes. Returns (roots, flags)
    where flags mark refined roots whose slope is also below tolerance and
    grid dips that approach zero without a sign change.
    """
    vals = fn_vec_vals
    roots, flags = [], []
    n = len(grid)
    for i in range(n - 1):
        x, y = vals[i], vals[i + 1]
        if x == 0.0:
            if 0 < i:
                roots.append(float(grid[i]))
        elif x * y < 0.0:
            roots.append(_refine(fn, grid[i], grid[i + 1], span))
    # dips: interior local minima of |fn| that come near zero but never cross
    av = np.abs(vals)
    for i in range(1, n - 1):
        if vals[i - 1] * vals[i] > 0 and vals[i] * vals[i + 1] > 0 \
                and av[i] < tol_val and av[i] <= av[i - 1] and av[i] <= av[i + 1]:
            flags.append(("dip", float(grid[i])))
    # refined roots with a degenerate slope are ambiguous crossings
    for r in roots:
        if abs(slope_at(r)) < tol_slope:
            flags.append(("flat-crossing", float(r)))
    return roots, flags


def _dedup(values, gap):
    out = []
    for x in sorted(values):
        if not out or x - out[-1] > gap:
            out.append(x)
    return out


def _analyze(potential, a, b, E, A, theta_fn, p_fn, n_scan, meta, constant=False):
    span = b - a
    s_grid = np.linspace(a, b, n_scan)
    th = np.asarray(theta_fn(s_grid), dtype=float)
    p = np.asarray(p_fn(s_grid), dtype=float)
    traj = Trajectory(potential=potential, a=a, b=b, E=E, A=A,
                      s_nodes=s_grid, theta_nodes=th, p_nodes=p,
                      crossings_h=np.array([]), crossings_min=np.array([]),
                      crossings_max=np.array([]), constant=constant, meta=meta,
                      _theta_fn=theta_fn, _p_fn=p_fn)
    if constant:
        traj.tangency_flags.append(("constant", a))
        return traj

    dv_grid = np.asarray(potential.dv(th), dtype=float)
    p_scale = 1.0 + float(np.max(np.abs(p)))
    g_scale = 1.0 + float(np.max(np.abs(dv_grid)))
    gap = 1e-12 * max(1.0, span)

    # horizontal-axis crossings: p = 0, slope p' = -V'(theta)
    p_at = lambda s: float(p_fn(s))
    slope_p = lambda s: -float(potential.dv(theta_fn(s)))
    roots_h, flags_h = _scan_roots(p, p_at, s_grid, TANGENCY_TOL * p_scale,
                                   TANGENCY_TOL * g_scale, slope_p, span)
    # endpoint turning points count toward I (closed interval) but are flagged
    for s_end, val in ((a, p[0]), (b, p[-1])):
        if abs(val) < TANGENCY_TOL * p_scale:
            roots_h.append(s_end)
            traj.tangency_flags.append(("endpoint-turning", s_end))
    traj.crossings_h = np.array(_dedup(roots_h, gap))
    traj.tangency_flags.extend(("h-" + k, s) for k, s in flags_h)

    # boundary crossings: V'(theta(s)) = 0, slope V''(theta) p
    g_at = lambda s: float(potential.dv(theta_fn(s)))
    slope_g = lambda s: float(potential.d2v(theta_fn(s))) * float(p_fn(s))
    roots_g, flags_g = _scan_roots(dv_grid, g_at, s_grid, TANGENCY_TOL * g_scale,
                                   TANGENCY_TOL * g_scale * p_scale, slope_g, span)
    traj.tangency_flags.extend(("boundary-" + k, s) for k, s in flags_g)
    for s_end, val in ((a, dv_grid[0]), (b, dv_grid[-1])):
        if abs(val) < TANGENCY_TOL * g_scale:
            traj.tangency_flags.append(("endpoint-on-boundary", s_end))
    mins, maxs = [], []
    for r in _dedup(roots_g, gap):
        curv = float(potential.d2v(theta_fn(r)))
        if abs(float(p_fn(r))) < TANGENCY_TOL * p_scale:
            traj.tangency_flags.append(("boundary-turning", float(r)))
            continue
        (mins if curv > 0 else maxs).append(float(r))
    traj.crossings_min = np.array(mins)
    traj.crossings_max = np.array(maxs)
    return traj


def integrate_ivp(potential: Potential, theta0: float, p0: float,
                  s_span: tuple, tol: float = DEFAULT_TOL, A: float = 0.0,
                  n_scan: int = DEFAULT_SCAN) -> Trajectory:
    """Integrate the EL equation from (theta0, p0) over s_span.

    Uses an adaptive 8th-order Runge-Kutta with dense output, then locates
    crossings by sign-change scanning plus bracketed refinement on the
    interpolant. The pseudo-energy is checked a posteriori; drift beyond
    100*tol*(1+|E|)*max(1, span) raises EnergyDrift. An equilibrium initial
    condition short-circuits to a constant trajectory.
    """
    if tol <= 0:
        raise InvalidParams(f"tol must be positive, got {tol}")
    a, b = float(s_span[0]), float(s_span[1])
    if not a < b:
        raise InvalidParams(f"bad span [{a}, {b}]")
    E = float(pseudo_energy(theta0, p0, potential))
    meta = {"rtol": tol, "atol": tol, "n_scan": n_scan}

    # near a stationary point, V' scales like V''*(theta0 - C): gate on that
    dv0 = float(potential.dv(theta0))
    d2v0 = float(potential.d2v(theta0))
    if abs(p0) < 1e-12 and abs(dv0) < 1e-12 * (1.0 + abs(d2v0)):
        th_c, p_c = float(theta0), 0.0
        theta_fn = lambda s: th_c * np.ones_like(np.asarray(s, dtype=float))
        p_fn = lambda s: p_c * np.zeros_like(np.asarray(s, dtype=float)) + p_c
        return _analyze(potential, a, b, E, A, theta_fn, p_fn, n_scan, meta,
                        constant=True)

    sol = _solve(potential, theta0, p0, a, b, tol)
    theta_fn = lambda s: sol.sol(s)[0]
    p_fn = lambda s: sol.sol(s)[1]
    traj = _analyze(potential, a, b, E, A, theta_fn, p_fn, n_scan, meta)

    drift = float(np.max(np.abs(pseudo_energy(traj.theta_nodes, traj.p_nodes,
                                              potential) - E)))
    limit = 100.0 * tol * (1.0 + abs(E)) * max(1.0, b - a)
    traj.meta["energy_drift"] = drift
    if drift > limit:
        raise EnergyDrift(f"pseudo-energy drift {drift:.3e} exceeds {limit:.3e}")
    return traj


def _no_tangency(traj: Trajectory, kinds: tuple) -> None:
    for kind, s in traj.tangency_flags:
        if kind in kinds:
            raise TangencyAmbiguous(f"{kind} at s={s:.12g}")


def index_I(traj: Trajectory) -> int:
    """Number of s in the closed interval [a, b] with theta'(s) = 0."""
    if traj.constant:
        raise TangencyAmbiguous("theta' vanishes identically on a constant "
                                "trajectory; classify it as a constant instead")
    _no_tangency(traj, ("h-dip", "h-flat-crossing"))
    return int(len(traj.crossings_h))


def index_J(traj: Trajectory, boundary_set: BoundarySet | None = None) -> int:
    """Min-boundary crossings minus max-boundary crossings.

    Crossings are interior roots of V'(theta(s)); the sign of V'' there says
    which boundary was hit. When a boundary_set is supplied, every crossing is
    checked to land on one of its points. Endpoints sitting on a boundary
    violate the hypothesis behind the count and raise EndpointOnBoundary.
    """
    if traj.constant:
        raise TangencyAmbiguous("constant trajectory has no crossing count")
    for kind, s in traj.tangency_flags:
        if kind == "endpoint-on-boundary":
            raise EndpointOnBoundary(f"theta({s:.12g}) is a stationary point of V")
    _no_tangency(traj, ("boundary-dip", "boundary-flat-crossing", "boundary-turning"))
    if boundary_set is not None:
        pts = boundary_set.all_points()
        for s in np.concatenate([traj.crossings_min, traj.crossings_max]):
            th = float(traj.theta(s))
            if pts.size == 0 or np.min(np.abs(pts - th)) > 1e-6 * (1.0 + abs(th)):
                raise InvalidParams(f"crossing at theta={th:.12g} matches no "
                                    "point of the supplied boundary set")
    return int(len(traj.crossings_min) - len(traj.crossings_max))


def index_report(traj: Trajectory, boundary_set: BoundarySet | None = None) -> IndexReport:
    return IndexReport(I=index_I(traj), J=index_J(traj, boundary_set),
                       tangency_flags=list(traj.tangency_flags))


def _endpoint_state(potential, theta0, p0, a, b, tol):
    # light integration for shooting residuals: final state only
    sol = solve_ivp(_rhs(potential), (a, b), [float(theta0), float(p0)],
                    method="DOP853", rtol=tol, atol=tol)
    if not sol.success:
        raise StepFailure(f"integrator failed on [{a}, {b}]: {sol.message}")
    return float(sol.y[0, -1]), float(sol.y[1, -1])


def _bracket_from_guess(res, guess, step, rings: int = 400):
    """Walk outward from the guess and return the nearest sign-change cell.

    Fixed-width steps: distinct solutions often sit close together, and a
    growing bracket can swallow a root pair without seeing a sign change.
    """
    r0 = res(guess)
    if r0 == 0.0:
        return guess, guess
    lo_x, lo_r = guess, r0
    hi_x, hi_r = guess, r0
    for i in range(1, rings + 1):
        nlo, nhi = guess - i * step, guess + i * step
        rlo = res(nlo)
        if rlo * lo_r < 0:
            return nlo, lo_x
        rhi = res(nhi)
        if rhi * hi_r < 0:
            return hi_x, nhi
        lo_x, lo_r = nlo, rlo
        hi_x, hi_r = nhi, rhi
    raise NoBracket(f"no sign change within {rings * step:.3g} of guess "
                    f"{guess:.12g}; pass an explicit (lo, hi) bracket")


def _shoot(res, guess, tol_root):
    if isinstance(guess, (tuple, list, np.ndarray)):
        lo, hi = float(guess[0]), float(guess[1])
        if res(lo) * res(hi) > 0:
            raise NoBracket(f"residual does not change sign on [{lo}, {hi}]")
    else:
        lo, hi = _bracket_from_guess(res, float(guess), 1e-3 * (1.0 + abs(guess)))
    if lo == hi:
        return lo
    return brentq(res, lo, hi, xtol=tol_root, rtol=8.9e-16)


def shoot_dirichlet(spec: ProblemSpec, guess, tol: float = 1e-8,
                    integrator_tol: float = 1e-12,
                    tol_root: float = 1e-12) -> Trajectory:
    """Solve the fixed-end problem by shooting on the initial slope.

    guess is either a starting p0 (the nearest sign change of the residual
    is bracketed by walking outward) or an explicit (lo, hi) bracket. The
    converged trajectory must land on T_b within tol*(1+|T_b|), else
    NoConvergence.
    """
    if not isinstance(spec.bc, Dirichlet):
        raise InvalidParams("shoot_dirichlet needs a Dirichlet bc")
    bc = spec.bc

    def res(p0):
        th_end, _ = _endpoint_state(spec.potential, bc.T_a, p0, spec.a, spec.b,
                                    integrator_tol)
        return th_end - bc.T_b

    p0 = _shoot(res, guess, tol_root)
    traj = integrate_ivp(spec.potential, bc.T_a, p0, (spec.a, spec.b),
                         tol=integrator_tol, A=spec.A)
    resid = abs(traj.theta_b - bc.T_b)
    if resid > tol * (1.0 + abs(bc.T_b)):
        raise NoConvergence(f"|theta(b) - T_b| = {resid:.3e} after shooting")
    traj.meta["shoot_residual"] = resid
    return traj


def _snap_to_stationary(potential, theta0, window: float = 1e-9):
    """Polish theta0 onto a stationary point of V when it already sits there.

    A zero-A shoot that converges to a constant solution lands within root
    tolerance of the stationary point; two Newton steps push it to machine
    precision so the constant short-circuit can recognize it. Roots farther
    than the window are genuine nonconstant solutions and stay untouched.
    """
    c = float(theta0)
    for _ in range(2):
        dv = float(potential.dv(c))
        d2v = float(potential.d2v(c))
        if d2v == 0.0:
            return theta0
        c -= dv / d2v
    if abs(c - theta0) <= window * (1.0 + abs(theta0)):
        return c
    return theta0


def shoot_neumann(spec: ProblemSpec, guess, tol: float = 1e-8,
                  integrator_tol: float = 1e-12,
                  tol_root: float = 1e-12) -> Trajectory:
    """Solve the natural-end problem by shooting on theta(a).

    theta'(a) = A holds exactly along every trial; the residual is
    theta'(b) - A. guess follows the shoot_dirichlet contract.
    """
    if not isinstance(spec.bc, Neumann):
        raise InvalidParams("shoot_neumann needs a Neumann bc")
    A = spec.bc.A

    def res(theta0):
        _, p_end = _endpoint_state(spec.potential, theta0, A, spec.a, spec.b,
                                   integrator_tol)
        return p_end - A

    theta0 = _shoot(res, guess, tol_root)
    if A == 0.0:
        theta0 = _snap_to_stationary(spec.potential, theta0)
    traj = integrate_ivp(spec.potential, theta0, A, (spec.a, spec.b),
                         tol=integrator_tol, A=A)
    resid = abs(traj.p_b - A)
    if not traj.constant and resid > tol * (1.0 + abs(A)):
        raise NoConvergence(f"|theta'(b) - A| = {resid:.3e} after shooting")
    traj.meta["shoot_residual"] = resid
    return traj
