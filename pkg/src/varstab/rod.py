"""Equilibria of a naturally curved elastic rod loaded by a point weight.

The rod is inextensible and weightless, clamped to nothing: both ends are
natural, so the tangent angle theta(x) on x in [0, 1] solves the pendulum
equation theta'' + M sin(theta) = 0 with theta'(0) = theta'(1) = sqrt(2 M v).
M is the dimensionless load and v the dimensionless squared reference
curvature. Every equilibrium lives on a level set of the pseudo-energy,
written here through the scaled offset e = v - cos(theta(0)) in [v-1, v+1],
and falls into one of a handful of families distinguished by how the tangent
angle winds and swings. Each family has a closed-form length function
ell(e); solving ell(e) = sqrt(M)/2 on the family domain enumerates every
equilibrium up to a global 2 pi rotation.

Family tags: a (single full arch over the inverted position), b_simple (one
swing through the hanging position), b_complex (a swing that overshoots and
returns), b_multi (k complete swing cycles), c (k full loops, mirror
representative), d (k loops plus the extra arch), e (k loops plus a swing
across the next minimum).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import simpson, solve_ivp
from scipy.optimize import brentq

from . import arclen
from .classify import StabilityVerdict, classify_neumann
from .elliptic import ellip_F, ellip_K, jacobi_am
from .errors import DomainError, GridMismatch, InvalidParams, NoConvergence
from .phase import Trajectory, integrate_ivp
from .potential import Potential, make_builtin

__all__ = ["RodParams", "RodEquilibrium", "ell", "l_open", "swing_length",
           "enumerate_equilibria", "reconstruct_theta", "closed_form_theta",
           "total_energy", "fig8_curves", "Fig8Table", "FAMILIES"]

FAMILIES = ("a", "b_simple", "b_complex", "b_multi", "c", "d", "e")

# sign of theta(0) = sign * arccos(v - e) per family; mirror twins are
# suppressed as global rotations of these representatives
_THETA0_SIGN = {"a": +1, "b_simple": -1, "b_complex": +1, "b_multi": -1,
                "c": -1, "d": +1, "e": -1}

_LOOP_FAMILIES = ("c", "d", "e")


@lru_cache(maxsize=32)
def _pendulum(M: float) -> Potential:
    return make_builtin("pendulum", M=M)


@dataclass(frozen=True)
class RodParams:
    """Dimensionless rod constants: load M > 0 and reference curvature v > 0."""

    M: float
    v: float

    def __post_init__(self):
        if not (np.isfinite(self.M) and self.M > 0):
            raise InvalidParams(f"M must be positive and finite, got {self.M}")
        if not (np.isfinite(self.v) and self.v > 0):
            raise InvalidParams(f"v must be positive and finite, got {self.v}")

    @property
    def A(self) -> float:
        """End slope sqrt(2 M v) shared by both natural conditions."""
        return float(np.sqrt(2.0 * self.M * self.v))

    @property
    def n_loop(self) -> float:
        """Number of turns of the unloaded reference shape, A / (2 pi)."""
        return self.A / (2.0 * np.pi)

    @property
    def target(self) -> float:
        """Half-length value sqrt(M)/2 that the ell curves must meet."""
        return float(np.sqrt(self.M) / 2.0)

    @property
    def potential(self) -> Potential:
        return _pendulum(self.M)


def _phase_pieces(e: float, v: float):
    m = 2.0 / (1.0 + e)
    phi = np.arccos(np.clip(v - e, -1.0, 1.0)) / 2.0
    return m, phi, np.sqrt(m)


def ell(family: str, e: float, v: float, k: int = 0) -> float:
    """Closed-form length function of a family at pseudo-energy offset e.

    Lengths are in units of sqrt(M) times arclength fraction, so an
    equilibrium of family f exists exactly where ell(f, e, v) = sqrt(M)/2.
    Loop families (c, d, e) and b_multi take the count k >= 1.
    """
    if family not in FAMILIES and family != "b":
        raise InvalidParams(f"unknown family {family!r}")
    fam = "b_simple" if family == "b" else family
    if abs(v - e) > 1.0 + 1e-15:
        raise DomainError(f"e={e:g} outside [v-1, v+1] for v={v:g}")
    needs_k = fam in ("b_multi", "c", "d", "e")
    if needs_k and k < 1:
        raise InvalidParams(f"family {fam} needs k >= 1, got {k}")
    m, phi, pref = _phase_pieces(e, v)
    if fam == "b_simple":
        return float(pref * ellip_F(phi, m))
    if fam in ("a", "c", "d", "e"):
        if e <= 1.0:
            raise DomainError(f"family {fam} needs e > 1, got e={e:g}")
        K = ellip_K(m)
        if fam == "a":
            return float(pref * (K - ellip_F(phi, m)))
        if fam == "c":
            return float(k * pref * K)
        if fam == "d":
            return float(pref * ((1 + k) * K - ellip_F(phi, m)))
        return float(pref * (k * K + ellip_F(phi, m)))
    # swing variants only exist below the separatrix
    if e >= 1.0:
        raise DomainError(f"family {fam} needs e < 1, got e={e:g}")
    half_cycle = ellip_K((1.0 + e) / 2.0)      # = ell_b(e | v=0)
    if fam == "b_multi":
        return float(2.0 * k * half_cycle)
    return float(2.0 * half_cycle - pref * ellip_F(phi, m))


def _ell_scan(family: str, e: float, v: float, k: int = 0) -> float:
    try:
        return ell(family, e, v, k)
    except DomainError:
        return np.nan


def l_open(M: float, v: float) -> float:
    """Arclength of a single open arch at the boundary energy e = v - 1.

    Only defined for v > 2, where the arch modulus 2/v stays below 1. A
    family-(a) equilibrium exists iff this exceeds the rod length 1.
    """
    if not v > 2.0:
        raise DomainError(f"l_open needs v > 2, got v={v:g}")
    return float(4.0 * ellip_K(2.0 / v) / np.sqrt(2.0 * M * v))


def swing_length(M: float, e: float) -> float:
    """Duration of a half swing of the hanging pendulum at energy M*e.

    Monotonically increasing on e in (-1, 1), diverging at the separatrix.
    """
    if not -1.0 < e < 1.0:
        raise DomainError(f"swing needs -1 < e < 1, got e={e:g}")
    spec = arclen.ArcSpec(_pendulum(M), 0.0, M * e, 0.0, direction=+1)
    return 2.0 * arclen.arc_length(spec)


@dataclass(frozen=True)
class RodEquilibrium:
    category: str
    k: int
    e: float
    theta0: float
    profile: Trajectory
    energy: float
    verdict: StabilityVerdict
    residual: float

    def to_json_dict(self) -> dict:
        return {"category": self.category, "k": self.k, "e": self.e,
                "theta0": self.theta0, "energy": self.energy,
                "verdict": self.verdict.verdict}


def _theta0_of(family: str, e: float, v: float) -> float:
    return _THETA0_SIGN[family] * float(np.arccos(np.clip(v - e, -1.0, 1.0)))


def _roots_on_grid(f, grid) -> list:
    vals = np.array([f(x) for x in grid])
    out = []
    for i in range(len(grid) - 1):
        lo, hi = vals[i], vals[i + 1]
        if np.isnan(lo) or np.isnan(hi):
            continue
        if lo == 0.0:
            out.append(float(grid[i]))
        elif lo * hi < 0:
            out.append(brentq(f, grid[i], grid[i + 1],
                              xtol=1e-15, rtol=8.9e-16))
    return out


def _grids(v: float, n_grid: int):
    lo, hi = v - 1.0, v + 1.0
    if lo < 1.0:
        # refine geometrically into the e = 1 asymptote from both sides
        grid_hi = 1.0 + np.geomspace(1e-13, hi - 1.0, n_grid)
        grid_lo = 1.0 - np.geomspace(1e-13, 1.0 - lo, n_grid)[::-1]
    else:
        grid_hi = np.linspace(lo, hi, n_grid)
        grid_lo = None
    return grid_lo, grid_hi


def _loop_k_cap(grid_hi) -> float:
    m = 2.0 / (1.0 + grid_hi)
    with np.errstate(invalid="ignore"):
        lin = np.where(m < 1.0, np.sqrt(m), np.nan)
    mask = np.isfinite(lin)
    if not mask.any():
        return 0.0
    lin[mask] *= ellip_K(m[mask])
    return float(np.nanmin(lin))


def _scan_family_roots(params: RodParams, n_grid: int) -> list:
    """All (family, k, e) roots of ell = sqrt(M)/2, k-window by monotonicity."""
    v, t = params.v, params.target
    grid_lo, grid_hi = _grids(v, n_grid)
    found = []
    for e in _roots_on_grid(lambda x: _ell_scan("a", x, v) - t, grid_hi):
        found.append(("a", 0, e))
    # each loop family grows linearly in k with slope >= min(pref*K), so no
    # roots survive once k * min exceeds the target; two extra k for margin
    lin_min = _loop_k_cap(grid_hi)
    if lin_min > 0.0:
        k = 1
        while k * lin_min <= t + 2.0 * lin_min and k <= 1000:
            for fam in _LOOP_FAMILIES:
                for e in _roots_on_grid(
                        lambda x: _ell_scan(fam, x, v, k) - t, grid_hi):
                    found.append((fam, k, e))
            k += 1
    simple_grid = np.linspace(v - 1.0, v + 1.0, n_grid)
    for e in _roots_on_grid(lambda x: _ell_scan("b_simple", x, v) - t,
                            simple_grid):
        found.append(("b_simple", 0, e))
    if v < 2.0:
        for e in _roots_on_grid(lambda x: _ell_scan("b_complex", x, v) - t,
                                grid_lo):
            found.append(("b_complex", 0, e))
        cycle_min = float(2.0 * ellip_K((1.0 + (v - 1.0)) / 2.0))
        k = 1
        while k * cycle_min <= t + 2.0 * cycle_min and k <= 1000:
            for e in _roots_on_grid(lambda x: _ell_scan("b_multi", x, v, k) - t,
                                    grid_lo):
                found.append(("b_multi", k, e))
            k += 1
    return _dedup(found)


def _dedup(found: list) -> list:
    out = []
    for fam, k, e in found:
        dup = any(f == fam and kk == k and abs(ee - e) < 1e-9 * (1.0 + abs(e))
                  for f, kk, ee in out)
        if not dup:
            out.append((fam, k, e))
    return out


def _end_slope(params: RodParams, family: str, e: float,
               tol: float = 1e-12) -> float:
    M, A = params.M, params.A
    th0 = _theta0_of(family, e, params.v)
    sol = solve_ivp(lambda s, y: (y[1], -M * np.sin(y[0])), (0.0, 1.0),
                    [th0, A], method="DOP853", rtol=tol, atol=tol)
    return float(sol.y[1, -1])


def _polish_e(params: RodParams, family: str, e: float) -> float:
    """One or two secant corrections of e against the true end-slope residual.

    The closed-form root is exact for the length equation; near the e = 1
    asymptote the shooting map is stiff enough that the last digits of e
    matter, so the flight residual is polished directly.
    """
    de = 1e-6 * abs(e - 1.0) + 1e-13
    r0 = _end_slope(params, family, e) - params.A
    e_best, r_best = e, abs(r0)
    e1 = e + de
    for _ in range(5):
        r1 = _end_slope(params, family, e1) - params.A
        if abs(r1) < r_best:
            e_best, r_best = e1, abs(r1)
        if r_best < 1e-9 * (1.0 + params.A) or r1 == r0:
            break
        e_next = e1 - r1 * (e1 - e) / (r1 - r0)
        e, r0, e1 = e1, r1, e_next
    return e_best


def _build_equilibrium(params: RodParams, family: str, k: int, e: float,
                       integrator_tol: float, n_scan: int) -> RodEquilibrium:
    A = params.A
    theta0 = _theta0_of(family, e, params.v)
    traj = integrate_ivp(params.potential, theta0, A, (0.0, 1.0),
                         tol=integrator_tol, A=A, n_scan=n_scan)
    residual = abs(traj.p_b - A)
    if residual > 2e-7:
        e = _polish_e(params, family, e)
        theta0 = _theta0_of(family, e, params.v)
        traj = integrate_ivp(params.potential, theta0, A, (0.0, 1.0),
                             tol=integrator_tol, A=A, n_scan=n_scan)
        residual = abs(traj.p_b - A)
    verdict = classify_neumann(traj, params.potential)
    energy = total_energy(traj, params)
    return RodEquilibrium(category=family, k=k, e=float(e),
                          theta0=float(theta0), profile=traj,
                          energy=float(energy), verdict=verdict,
                          residual=float(residual))


def enumerate_equilibria(params: RodParams, n_grid: int = 4000,
                         workers: int | None = None,
                         integrator_tol: float = 1e-12,
                         n_scan: int = 4097) -> list:
    """Every rod equilibrium at (M, v), classified, sorted by family then k.

    Root searches and per-root classification are independent; workers > 1
    fans them out over a thread pool. The merged result is deterministic
    regardless of worker count.
    """
    roots = _scan_family_roots(params, n_grid)

    def build(item):
        fam, k, e = item
        return _build_equilibrium(params, fam, k, e, integrator_tol, n_scan)

    if workers is not None and workers > 1 and len(roots) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            eqs = list(pool.map(build, roots))
    else:
        eqs = [build(item) for item in roots]
    eqs.sort(key=lambda q: (q.category, q.k, q.e))
    return eqs


def closed_form_theta(params: RodParams, e: float, s):
    """Family-(a) profile 2 am(K(m) + sqrt(2M(1+e))/2 (s - 1/2) | m)."""
    if e <= 1.0:
        raise DomainError(f"closed form needs e > 1, got e={e:g}")
    if e >= params.v + 1.0 - 1e-12:
        raise DomainError("arch degenerates at e = v + 1")
    m = 2.0 / (1.0 + e)
    u = ellip_K(m) + 0.5 * np.sqrt(2.0 * params.M * (1.0 + e)) \
        * (np.asarray(s, dtype=float) - 0.5)
    return 2.0 * jacobi_am(u, m)


def reconstruct_theta(equilibrium: RodEquilibrium, params: RodParams,
                      n_samples: int = 4097) -> Trajectory:
    """Re-integrate an equilibrium profile on its own sample grid.

    Family (a) is additionally cross-checked against the Jacobi-amplitude
    closed form; disagreement beyond 1e-6 raises NoConvergence.
    """
    e, fam = equilibrium.e, equilibrium.category
    if fam == "a" and e >= params.v + 1.0 - 1e-12:
        raise DomainError("arch degenerates at e = v + 1")
    theta0 = _theta0_of(fam, e, params.v)
    traj = integrate_ivp(params.potential, theta0, params.A, (0.0, 1.0),
                         tol=1e-12, A=params.A, n_scan=n_samples)
    if fam == "a":
        s_chk = np.linspace(0.0, 1.0, 65)
        dev = float(np.max(np.abs(np.asarray(traj.theta(s_chk))
                                  - closed_form_theta(params, e, s_chk))))
        traj.meta["closed_form_max_dev"] = dev
        if dev > 1e-6:
            raise NoConvergence(f"closed form and integration disagree "
                                f"by {dev:.3e}")
    return traj


def _profile_arrays(profile):
    if isinstance(profile, Trajectory):
        return profile.s_nodes, profile.theta_nodes, profile.p_nodes
    try:
        s, th, p = profile
        s = np.asarray(s, dtype=float)
        th = np.asarray(th, dtype=float)
        p = np.asarray(p, dtype=float)
    except (TypeError, ValueError) as exc:
        raise GridMismatch(f"profile must be a Trajectory or an (s, theta, "
                           f"theta') triple: {exc}") from None
    if not (s.ndim == 1 and s.shape == th.shape == p.shape):
        raise GridMismatch("profile arrays must be 1-d and equally sized")
    return s, th, p


def total_energy(profile, params: RodParams) -> float:
    """Composite-Simpson value of int_0^1 (theta' - A)^2/2 + M cos(theta) dx."""
    s, th, p = _profile_arrays(profile)
    if s.size < 129:
        raise GridMismatch(f"profile too coarse for quadrature: {s.size} "
                           f"samples, need at least 129")
    if abs(s[0]) > 1e-9 or abs(s[-1] - 1.0) > 1e-9:
        raise GridMismatch("profile must cover x in [0, 1]")
    integrand = 0.5 * (p - params.A) ** 2 - np.asarray(
        params.potential.v(th), dtype=float)
    return float(simpson(integrand, x=s))


@dataclass(frozen=True)
class Fig8Table:
    v: float
    names: tuple
    columns: dict

    def to_csv(self, target) -> None:
        own = isinstance(target, str)
        fh = open(target, "w") if own else target
        try:
            fh.write(",".join(self.names) + "\n")
            cols = [self.columns[n] for n in self.names]
            for row in zip(*cols):
                fh.write(",".join("" if np.isnan(x) else f"{x:.15g}"
                                  for x in row) + "\n")
        finally:
            if own:
                fh.close()


def _default_e_grid(v: float, n: int = 1025):
    lo, hi = v - 1.0, v + 1.0
    pad = 1e-9 * (hi - lo)
    base = np.linspace(lo + pad, hi - pad, n)
    if lo < 1.0:
        # cluster extra nodes against the asymptote of K at e = 1
        near = np.concatenate([1.0 - np.geomspace(1e-8, 1e-2, 48),
                               1.0 + np.geomspace(1e-8, 1e-2, 48)])
        base = np.unique(np.concatenate([base, near]))
        base = base[(base > lo) & (base < hi)]
    return base


def fig8_curves(v: float, e_grid=None, k_max: int = 3) -> Fig8Table:
    """Tabulate every family length curve over a pseudo-energy grid.

    Swing-variant columns (complex, multi) only exist for v < 2 and are
    omitted entirely otherwise; out-of-domain cells hold NaN and serialize
    to empty CSV fields.
    """
    if e_grid is None:
        e_grid = _default_e_grid(v)
    e_grid = np.asarray(e_grid, dtype=float)
    if e_grid.ndim != 1 or e_grid.size < 2:
        raise InvalidParams("e_grid must be a 1-d grid with >= 2 nodes")
    if np.any(np.abs(v - e_grid) > 1.0):
        raise InvalidParams("e_grid must stay inside [v-1, v+1]")
    names = ["e", "ell_a", "ell_b"]
    if v < 2.0:
        names.append("ell_b_complex")
        names += [f"ell_b_multi_k{k}" for k in range(1, k_max + 1)]
    for fam in _LOOP_FAMILIES:
        names += [f"ell_{fam}_k{k}" for k in range(1, k_max + 1)]

    def scan(fam, k=0):
        return np.array([_ell_scan(fam, e, v, k) for e in e_grid])

    columns = {"e": e_grid, "ell_a": scan("a"), "ell_b": scan("b_simple")}
    if v < 2.0:
        columns["ell_b_complex"] = scan("b_complex")
        for k in range(1, k_max + 1):
            columns[f"ell_b_multi_k{k}"] = scan("b_multi", k)
    for fam in _LOOP_FAMILIES:
        for k in range(1, k_max + 1):
            columns[f"ell_{fam}_k{k}"] = scan(fam, k)
    return Fig8Table(v=float(v), names=tuple(names), columns=columns)
