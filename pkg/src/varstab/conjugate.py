"""Conjugate-point oracle for the operator -d^2/ds^2 + f(s).

Along a solution theta(s) the relevant coefficient is f = -V''(theta(s)).
Conjugate points to a are located from two initial-value problems: h1 with
h(a) = 0, h'(a) = 1 for Dirichlet ends (conjugate points are roots of h1)
and h2 with h(a) = 1, h'(a) = 0 for Neumann ends (roots of h2'). The Neumann
negative-eigenvalue count follows the signed formula
(1 - Sign f(a))/2 - sum_c Sign f(sigma_c); the Dirichlet count is the number
of interior conjugate points. A finite-difference spectrum of the same
operator provides a fully independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.linalg import eigvalsh_tridiagonal
from scipy.optimize import brentq

from .errors import DegenerateProblem, InvalidParams, SimultaneousZero, StepFailure
from .potential import Potential

__all__ = ["SLProblem", "ConjugateReport", "from_trajectory", "inborn_eigenvalues",
           "solve_h", "conjugate_points", "index_dirichlet", "index_neumann",
           "fd_spectrum", "fd_negative_count", "oracle_verdict"]

B_CONJ_TOL = 1e-8      # |root - b| below this fraction of (b - a) is degenerate
SIMZERO_TOL = 1e-9


@dataclass(frozen=True)
class SLProblem:
    """Coefficient f(s) on [a, b] with one of the two end conditions."""

    f: Callable
    a: float
    b: float
    bc: str

    def __post_init__(self):
        if self.bc not in ("dirichlet", "neumann"):
            raise InvalidParams(f"bc must be dirichlet or neumann, got {self.bc!r}")
        if not self.a < self.b:
            raise InvalidParams(f"bad interval [{self.a}, {self.b}]")


@dataclass(frozen=True)
class ConjugateReport:
    points: np.ndarray
    signs_at_points: np.ndarray
    index: int
    b_is_conjugate: bool


def from_trajectory(traj, bc: str, potential: Potential | None = None,
                    n_nodes: int = 2049) -> SLProblem:
    """Spline -V''(theta(s)) through dense trajectory nodes."""
    pot = potential if potential is not None else traj.potential
    s = np.linspace(traj.a, traj.b, n_nodes)
    f_vals = -np.asarray(pot.d2v(traj.theta(s)), dtype=float)
    return SLProblem(CubicSpline(s, f_vals), traj.a, traj.b, bc)


def inborn_eigenvalues(f_a: float, width: float, bc: str, k_max: int) -> np.ndarray:
    """Eigenvalues in the vanishing-interval limit: f(a) + k^2 pi^2 / width^2."""
    if width <= 0:
        raise InvalidParams(f"width must be positive, got {width}")
    k0 = 1 if bc == "dirichlet" else 0
    ks = np.arange(k0, k_max + 1)
    return f_a + ks**2 * np.pi**2 / width**2


@dataclass(frozen=True)
class HSolution:
    h: Callable
    dh: Callable
    bc: str


def solve_h(problem: SLProblem, tol: float = 1e-12) -> HSolution:
    """Integrate h'' = f h with the bc-matched seed, dense output."""
    h0 = [0.0, 1.0] if problem.bc == "dirichlet" else [1.0, 0.0]
    sol = solve_ivp(lambda s, y: [y[1], float(problem.f(s)) * y[0]],
                    (problem.a, problem.b), h0, method="DOP853",
                    rtol=tol, atol=tol, dense_output=True)
    if not sol.success:
        raise StepFailure(f"h integration failed: {sol.message}")
    return HSolution(h=lambda s: sol.sol(s)[0], dh=lambda s: sol.sol(s)[1],
                     bc=problem.bc)


def conjugate_points(problem: SLProblem, n_scan: int = 4097,
                     tol: float = 1e-12) -> ConjugateReport:
    """Roots of h1 (Dirichlet) or h2' (Neumann) in (a, b].

    Roots landing within B_CONJ_TOL*(b-a) of b set b_is_conjugate and stay
    out of the index; the verdict for such problems is degenerate. In the
    Neumann case f must be nonzero at a and at every located point, else the
    signed index formula does not apply.
    """
    hs = solve_h(problem, tol)
    target = hs.h if problem.bc == "dirichlet" else hs.dh
    a, b = problem.a, problem.b
    span = b - a
    grid = np.linspace(a, b, n_scan)
    vals = np.asarray(target(grid), dtype=float)
    scale = float(np.max(np.abs(vals)))
    roots = []
    # skip the seeded zero at s = a (h1(a) = 0, h2'(a) = 0)
    i0 = 1
    while i0 < n_scan - 1 and abs(vals[i0]) < 1e-12 * scale:
        i0 += 1
    for i in range(i0, n_scan - 1):
        x, y = vals[i], vals[i + 1]
        if x == 0.0:
            roots.append(float(grid[i]))
        elif x * y < 0:
            roots.append(brentq(lambda s: float(target(s)), grid[i], grid[i + 1],
                                xtol=1e-14 * max(1.0, span), rtol=8.9e-16))
    if vals[-1] == 0.0:
        roots.append(b)

    b_conj = any(abs(r - b) < B_CONJ_TOL * span for r in roots)
    # a root sitting on b itself produces no sign change inside the
    # interval; catch it by value instead
    if abs(vals[-1]) < B_CONJ_TOL * scale:
        b_conj = True
    interior = np.array([r for r in roots if abs(r - b) >= B_CONJ_TOL * span])

    if problem.bc == "dirichlet":
        f_signs = np.array([np.sign(float(problem.f(r))) for r in interior])
        return ConjugateReport(points=interior, signs_at_points=f_signs,
                               index=len(interior), b_is_conjugate=b_conj)

    f_scale = 1.0 + float(np.max(np.abs([float(problem.f(s)) for s in grid[:: max(1, n_scan // 64)]])))
    f_a = float(problem.f(a))
    if abs(f_a) < SIMZERO_TOL * f_scale:
        raise DegenerateProblem(f"f(a) = {f_a:.3e} is too close to zero for the "
                                "signed index formula")
    signs = []
    for r in interior:
        fr = float(problem.f(r))
        if abs(fr) < SIMZERO_TOL * f_scale:
            raise SimultaneousZero(f"f and h2' vanish together at s={r:.12g}")
        signs.append(np.sign(fr))
    signs = np.array(signs)
    index = int(round((1 - np.sign(f_a)) / 2 - signs.sum()))
    return ConjugateReport(points=interior, signs_at_points=signs,
                           index=index, b_is_conjugate=b_conj)


def index_dirichlet(problem: SLProblem, **kw) -> int:
    if problem.bc != "dirichlet":
        raise InvalidParams("problem bc is not dirichlet")
    return conjugate_points(problem, **kw).index


def index_neumann(problem: SLProblem, **kw) -> int:
    if problem.bc != "neumann":
        raise InvalidParams("problem bc is not neumann")
    return conjugate_points(problem, **kw).index


def fd_spectrum(problem: SLProblem, n: int) -> np.ndarray:
    """Eigenvalues of the central-difference discretization, ascending.

    Dirichlet uses n interior nodes with zero ends. Neumann closes h'(a) =
    h'(b) = 0 with ghost nodes; the resulting matrix is symmetrized by the
    similarity diag(1/sqrt(2), 1, ..., 1, 1/sqrt(2)), which scales the two
    end off-diagonals to -sqrt(2)/dx^2 and leaves eigenvalues unchanged.
    """
    if n < 16:
        raise InvalidParams(f"need n >= 16 nodes, got {n}")
    a, b = problem.a, problem.b
    if problem.bc == "dirichlet":
        dx = (b - a) / (n + 1)
        s = a + dx * np.arange(1, n + 1)
        f_vals = np.array([float(problem.f(x)) for x in s])
        diag = 2.0 / dx**2 + f_vals
        off = np.full(n - 1, -1.0 / dx**2)
    else:
        dx = (b - a) / n
        s = a + dx * np.arange(0, n + 1)
        f_vals = np.array([float(problem.f(x)) for x in s])
        diag = 2.0 / dx**2 + f_vals
        off = np.full(n, -1.0 / dx**2)
        off[0] *= np.sqrt(2.0)
        off[-1] *= np.sqrt(2.0)
    return eigvalsh_tridiagonal(diag, off)


def fd_negative_count(problem: SLProblem, n: int = 800) -> int:
    """Negative eigenvalues of the FD operator, Richardson-extrapolated.

    Eigenvalues at grids n and 2n (2n+1 for Dirichlet, halving dx exactly)
    are combined as (4 l_fine - l_coarse)/3 before counting, so O(dx^2)
    discretization bias cannot flip a near-zero eigenvalue.
    """
    n_fine = 2 * n + 1 if problem.bc == "dirichlet" else 2 * n
    coarse = fd_spectrum(problem, n)
    fine = fd_spectrum(problem, n_fine)
    m = min(len(coarse), len(fine)) // 2
    rich = (4.0 * fine[:m] - coarse[:m]) / 3.0
    return int(np.sum(rich < 0.0))


def oracle_verdict(problem: SLProblem, **kw) -> tuple[str, ConjugateReport]:
    """Stability verdict implied by the conjugate-point count."""
    report = conjugate_points(problem, **kw)
    if report.b_is_conjugate:
        return "degenerate", report
    return ("stable" if report.index == 0 else "unstable"), report
