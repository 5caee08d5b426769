"""Stability verdicts from the geometric indices.

Dirichlet ends: I = 0 is stable, I >= 2 unstable, and the single-turning
case is settled by the sign of alpha. Natural ends: J < 0 is stable, J > 0
unstable, and J = 0 falls to beta = xi(a) - xi(b) with xi = theta' V'(theta):
beta below the marginal band is unstable (the equality case carries an
explicit destabilizing perturbation, constructed here as well), larger beta
stays inconclusive. Constant solutions are classified by the sign of V''
alone. Verdicts never guess: any failed precondition comes back Degenerate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from . import arclen
from .errors import (BadWidths, EndpointOnBoundary, GridMismatch, NotASolution,
                     TangencyAmbiguous, VarstabError)
from .phase import Trajectory
from .potential import Potential

__all__ = ["StabilityVerdict", "PerturbationProfile", "classify_dirichlet",
           "classify_neumann", "classify_constant", "beta", "second_variation",
           "destabilizing_perturbation", "settled_perturbation",
           "STABLE", "UNSTABLE", "INCONCLUSIVE", "DEGENERATE"]

STABLE = "stable"
UNSTABLE = "unstable"
INCONCLUSIVE = "inconclusive"
DEGENERATE = "degenerate"

MARGINAL_BAND = 1e-6


@dataclass(frozen=True)
class StabilityVerdict:
    verdict: str
    theorem: str
    evidence: dict = field(default_factory=dict)

    @property
    def is_stable(self):
        return self.verdict == STABLE

    @property
    def is_unstable(self):
        return self.verdict == UNSTABLE

    def to_json_dict(self) -> dict:
        ev = self.evidence
        return {"verdict": self.verdict, "theorem": self.theorem,
                "I": ev.get("I"), "J": ev.get("J"),
                "alpha": ev.get("alpha"), "beta": ev.get("beta")}


def _degenerate(reason: str, **ev) -> StabilityVerdict:
    ev["notes"] = reason
    return StabilityVerdict(DEGENERATE, "precondition", ev)


def classify_constant(potential: Potential, C: float,
                      tol: float = 1e-8) -> StabilityVerdict:
    """Verdict for the constant solution theta = C.

    C must be a stationary point of V; a negative V''(C) makes the second
    variation positive for every perturbation, a positive one is defeated by
    the constant test function.
    """
    dv = float(potential.dv(C))
    d2v = float(potential.d2v(C))
    scale = 1.0 + max(abs(float(potential.v(C))), abs(d2v))
    if abs(dv) > tol * scale:
        raise NotASolution(f"V'({C:.12g}) = {dv:.3e}: not a stationary point")
    ev = {"constant": True, "C": C, "d2v": d2v}
    if d2v < -tol * scale:
        return StabilityVerdict(STABLE, "V''<0", ev)
    if d2v > tol * scale:
        return StabilityVerdict(UNSTABLE, "V''>0", ev)
    return _degenerate("V'' vanishes at the constant solution", **ev)


def classify_dirichlet(traj: Trajectory, potential: Potential | None = None,
                       band: float = MARGINAL_BAND) -> StabilityVerdict:
    """Decision-table verdict for a fixed-end solution."""
    pot = potential if potential is not None else traj.potential
    if traj.constant:
        return classify_constant(pot, traj.theta_a)
    try:
        I = _index_I(traj)
    except TangencyAmbiguous as exc:
        return _degenerate(str(exc))
    if I == 0:
        return StabilityVerdict(STABLE, "I=0", {"I": 0})
    if I >= 2:
        return StabilityVerdict(UNSTABLE, "I>=2", {"I": I})
    try:
        a_val = arclen.alpha(traj, pot)
    except VarstabError as exc:
        return _degenerate(f"alpha unavailable: {exc}", I=I)
    scale = (traj.b - traj.a) / (1.0 + abs(traj.E))
    ev = {"I": I, "alpha": a_val}
    if a_val > band * scale:
        return StabilityVerdict(STABLE, "alpha>0", ev)
    if a_val < -band * scale:
        return StabilityVerdict(UNSTABLE, "alpha<0", ev)
    return StabilityVerdict(INCONCLUSIVE, "alpha~0", ev)


def classify_neumann(traj: Trajectory, potential: Potential | None = None,
                     band: float = MARGINAL_BAND) -> StabilityVerdict:
    """Decision-table verdict for a natural-end solution.

    The marginal band sits entirely on the positive side of beta: beta = 0
    belongs to the unstable branch (it admits an explicit destabilizing
    perturbation), so only beta above the band is left inconclusive.
    """
    pot = potential if potential is not None else traj.potential
    if traj.constant:
        return classify_constant(pot, traj.theta_a)
    try:
        J = _index_J(traj)
    except (EndpointOnBoundary, TangencyAmbiguous) as exc:
        return _degenerate(str(exc))
    try:
        I = _index_I(traj)
    except TangencyAmbiguous:
        I = None
    if J < 0:
        return StabilityVerdict(STABLE, "J<0", {"I": I, "J": J})
    if J > 0:
        return StabilityVerdict(UNSTABLE, "J>0", {"I": I, "J": J})
    b_val = beta(traj, pot)
    scale = (1.0 + abs(traj.E)) ** 1.5
    ev = {"I": I, "J": J, "beta": b_val}
    if b_val < band * scale:
        return StabilityVerdict(UNSTABLE, "beta<=0", ev)
    return StabilityVerdict(INCONCLUSIVE, "beta>0", ev)


def beta(traj: Trajectory, potential: Potential | None = None) -> float:
    """xi(a) - xi(b) with xi = theta' V'(theta)."""
    pot = potential if potential is not None else traj.potential
    xi_a = traj.p_a * float(pot.dv(traj.theta_a))
    xi_b = traj.p_b * float(pot.dv(traj.theta_b))
    return xi_a - xi_b


def _index_I(traj):
    from .phase import index_I
    return index_I(traj)


def _index_J(traj):
    from .phase import index_J
    return index_J(traj)


def _as_callable_pair(traj, tau, dtau):
    if callable(tau):
        if dtau is None or not callable(dtau):
            raise GridMismatch("a callable tau needs a callable dtau")
        return tau, dtau
    if isinstance(tau, tuple) and len(tau) == 2:
        s, vals = np.asarray(tau[0], float), np.asarray(tau[1], float)
    else:
        vals = np.asarray(tau, dtype=float)
        if vals.shape != traj.s_nodes.shape:
            raise GridMismatch(f"tau has {vals.size} samples, trajectory grid "
                               f"has {traj.s_nodes.size}")
        s = traj.s_nodes
    if s.ndim != 1 or s.shape != vals.shape or s.size < 4:
        raise GridMismatch("sampled tau needs matching 1-d s and value arrays")
    if s[0] > traj.a + 1e-9 or s[-1] < traj.b - 1e-9:
        raise GridMismatch("sampled tau does not cover [a, b]")
    spl = CubicSpline(s, vals)
    return spl, spl.derivative(1)


def second_variation(traj: Trajectory, potential: Potential | None, tau,
                     dtau=None, breakpoints: tuple = ()) -> float:
    """Evaluate int_a^b (tau'^2 - V''(theta) tau^2) ds along the trajectory.

    tau is a callable (with dtau), a (s, values) pair, or values on the
    trajectory grid. breakpoints split the quadrature where tau' jumps.
    """
    pot = potential if potential is not None else traj.potential
    tau_f, dtau_f = _as_callable_pair(traj, tau, dtau)

    def integrand(s):
        th = traj.theta(s)
        return (dtau_f(s) ** 2 - float(pot.d2v(th)) * tau_f(s) ** 2)

    cuts = [traj.a] + sorted(float(c) for c in breakpoints) + [traj.b]
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi - lo <= 0:
            continue
        val, _ = quad(integrand, lo, hi, epsabs=1e-12, epsrel=1e-12, limit=200)
        total += val
    return float(total)


@dataclass(frozen=True)
class PerturbationProfile:
    s_nodes: np.ndarray
    tau_nodes: np.ndarray
    eps: float
    nu: float
    delta2E: float


def destabilizing_perturbation(traj: Trajectory,
                               potential: Potential | None = None,
                               eps: float | None = None,
                               nu: float | None = None) -> PerturbationProfile:
    """The explicit perturbation defeating a J = 0, beta <= 0 solution.

    tau equals theta' in the bulk and is blended to zero slope at both ends
    by quadratics over widths eps and nu, so tau'(a) = tau'(b) = 0. Its
    second variation expands as beta - (2/3)(eps V'(theta(a))^2 +
    nu V'(theta(b))^2) + O(eps^2 + nu^2).
    """
    pot = potential if potential is not None else traj.potential
    span = traj.b - traj.a
    if eps is None:
        eps = 1e-3 * span
    if nu is None:
        nu = 1e-3 * span
    if not (eps > 0 and nu > 0 and eps + nu < span):
        raise BadWidths(f"need 0 < eps, nu with eps + nu < {span:g}, "
                        f"got eps={eps:g}, nu={nu:g}")
    sa, sb = traj.a + eps, traj.b - nu
    pa, ka = float(traj.p(sa)), -float(pot.dv(traj.theta(sa)))
    pb, kb = float(traj.p(sb)), -float(pot.dv(traj.theta(sb)))

    def tau(s):
        s = np.asarray(s, dtype=float)
        out = np.asarray(traj.p(s), dtype=float).copy()
        left = s < sa
        right = s > sb
        dl = s[left] - sa
        out[left] = pa + ka * dl + ka / (2.0 * eps) * dl * dl
        dr = s[right] - sb
        out[right] = pb + kb * dr - kb / (2.0 * nu) * dr * dr
        return out

    def dtau(s):
        s = np.asarray(s, dtype=float)
        th = traj.theta(s)
        out = -np.asarray(pot.dv(th), dtype=float)
        left = s < sa
        right = s > sb
        out[left] = ka * (1.0 + (s[left] - sa) / eps)
        out[right] = kb * (1.0 - (s[right] - sb) / nu)
        return out

    scalar_tau = lambda s: float(tau(np.array([s]))[0])
    scalar_dtau = lambda s: float(dtau(np.array([s]))[0])
    d2 = second_variation(traj, pot, scalar_tau, scalar_dtau,
                          breakpoints=(sa, sb))
    s_nodes = np.linspace(traj.a, traj.b, 4097)
    return PerturbationProfile(s_nodes=s_nodes, tau_nodes=tau(s_nodes),
                               eps=float(eps), nu=float(nu), delta2E=d2)


def settled_perturbation(traj: Trajectory, potential: Potential | None = None,
                     max_halvings: int = 12) -> PerturbationProfile:
    """Shrink eps = nu until the sign of delta2E stabilizes twice running."""
    eps = 1e-3 * (traj.b - traj.a)
    prev = None
    streak = 0
    for _ in range(max_halvings):
        prof = destabilizing_perturbation(traj, potential, eps, eps)
        sign = np.sign(prof.delta2E)
        if prev is not None and sign == prev:
            streak += 1
            if streak >= 2:
                return prof
        else:
            streak = 0
        prev = sign
        eps /= 2.0
    return prof
