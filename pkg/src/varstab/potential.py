"""Potentials V(theta) with two derivatives, and their stationary structure.

A Potential evaluates (V, V', V'') vectorized. Built-in families cover the
cases used throughout: pendulum wells, polynomial wells, and tabulated data
with spline derivatives. stationary_points scans a window for roots of V' and
splits them into minima (V'' > 0) and maxima (V'' < 0); these are the
min/max boundaries that trajectory crossings are counted against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import DegeneratePotential, InvalidParams, UnknownFamily

__all__ = ["Potential", "BoundarySet", "make_builtin", "stationary_points"]

ROOT_TOL = 1e-12       # |V'| at an accepted stationary point
DEGEN_TOL = 1e-8       # |V''| below this at a root -> degenerate
DEFAULT_CELLS = 1024


@dataclass(frozen=True)
class Potential:
    """A potential with first and second derivatives.

    fn maps theta (scalar or ndarray) to the triple (V, V', V''). descriptor
    is a JSON-serializable {"family": ..., "params": {...}} record; period is
    the spatial period of V when one exists (None otherwise).
    """

    fn: Callable
    descriptor: dict = field(default_factory=dict)
    period: float | None = None

    def __call__(self, theta):
        return self.fn(theta)

    def v(self, theta):
        return self.fn(theta)[0]

    def dv(self, theta):
        return self.fn(theta)[1]

    def d2v(self, theta):
        return self.fn(theta)[2]

    def to_json_dict(self) -> dict:
        return {"family": self.descriptor.get("family", "custom"),
                "params": dict(self.descriptor.get("params", {}))}


@dataclass(frozen=True)
class BoundarySet:
    """Stationary points of V inside a window, split by type.

    minima are the min-boundaries (V'' > 0), maxima the max-boundaries
    (V'' < 0). Both arrays are sorted ascending.
    """

    minima: np.ndarray
    maxima: np.ndarray
    window: tuple[float, float]

    def all_points(self) -> np.ndarray:
        return np.sort(np.concatenate([self.minima, self.maxima]))


def _require_positive(params: dict, keys: tuple[str, ...], family: str) -> None:
    for k in keys:
        val = params[k]
        if not np.isfinite(val) or val <= 0:
            raise InvalidParams(f"{family}: parameter {k} must be positive and finite, got {val}")


def make_builtin(name: str, params: dict | None = None, **kw) -> Potential:
    """Construct a built-in potential family.

    Families:
      pendulum    V = -M cos(theta),            params M > 0
      harmonic    V = k theta^2 / 2,            params k > 0 (default 1)
      quadwell    V = a theta^4/4 - b theta^2/2, params a, b > 0 (default 1)
      polynomial  V = sum c_i theta^i,          params coeffs (ascending)
      table       spline through (theta, values) samples
    """
    p = dict(params or {})
    p.update(kw)
    if name == "pendulum":
        p.setdefault("M", 1.0)
        _require_positive(p, ("M",), name)
        M = float(p["M"])

        def fn(theta):
            theta = np.asarray(theta, dtype=float)
            return -M * np.cos(theta), M * np.sin(theta), M * np.cos(theta)

        return Potential(fn, {"family": "pendulum", "params": {"M": M}}, period=2.0 * np.pi)

    if name == "harmonic":
        p.setdefault("k", 1.0)
        _require_positive(p, ("k",), name)
        k = float(p["k"])

        def fn(theta):
            theta = np.asarray(theta, dtype=float)
            return 0.5 * k * theta**2, k * theta, k * np.ones_like(theta)

        return Potential(fn, {"family": "harmonic", "params": {"k": k}})

    if name == "quadwell":
        p.setdefault("a", 1.0)
        p.setdefault("b", 1.0)
        _require_positive(p, ("a", "b"), name)
        a, b = float(p["a"]), float(p["b"])

        def fn(theta):
            theta = np.asarray(theta, dtype=float)
            t2 = theta * theta
            return 0.25 * a * t2 * t2 - 0.5 * b * t2, a * t2 * theta - b * theta, 3.0 * a * t2 - b

        return Potential(fn, {"family": "quadwell", "params": {"a": a, "b": b}})

    if name in ("polynomial", "poly"):
        if "coeffs" not in p:
            raise InvalidParams("polynomial: missing coeffs")
        coeffs = [float(c) for c in p["coeffs"]]
        if not coeffs or not all(np.isfinite(coeffs)):
            raise InvalidParams(f"polynomial: bad coeffs {coeffs}")
        poly = np.polynomial.Polynomial(coeffs)
        d1 = poly.deriv()
        d2 = d1.deriv()

        def fn(theta):
            theta = np.asarray(theta, dtype=float)
            return poly(theta), d1(theta), d2(theta)

        return Potential(fn, {"family": "polynomial", "params": {"coeffs": coeffs}})

    if name == "table":
        if "theta" not in p or "values" not in p:
            raise InvalidParams("table: needs theta and values arrays")
        th = np.asarray(p["theta"], dtype=float)
        val = np.asarray(p["values"], dtype=float)
        if th.ndim != 1 or th.shape != val.shape or th.size < 4:
            raise InvalidParams("table: theta and values must be equal-length 1-d, size >= 4")
        if not (np.all(np.isfinite(th)) and np.all(np.isfinite(val))):
            raise InvalidParams("table: non-finite samples")
        if np.any(np.diff(th) <= 0):
            raise InvalidParams("table: theta must be strictly increasing")
        spl = CubicSpline(th, val)
        spl1 = spl.derivative(1)
        spl2 = spl.derivative(2)

        def fn(theta):
            theta = np.asarray(theta, dtype=float)
            return spl(theta), spl1(theta), spl2(theta)

        return Potential(fn, {"family": "table",
                              "params": {"theta": th.tolist(), "values": val.tolist()}})

    raise UnknownFamily(f"unknown potential family {name!r}")


def stationary_points(potential: Potential, lo: float, hi: float,
                      n_cells: int = DEFAULT_CELLS,
                      degen_tol: float = DEGEN_TOL) -> BoundarySet:
    """Find all roots of V' in [lo, hi] and classify them by the sign of V''.

    The window is scanned on a uniform grid of n_cells cells; each sign change
    of V' is refined by bracketed root finding. A root where |V''| falls below
    degen_tol (scaled by the cell's V'' magnitude) raises DegeneratePotential.
    """
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
        raise InvalidParams(f"bad window [{lo}, {hi}]")
    grid = np.linspace(lo, hi, n_cells + 1)
    dv = np.asarray(potential.dv(grid), dtype=float)
    if not np.all(np.isfinite(dv)):
        raise InvalidParams("V' is not finite on the window")
    scale_dv = max(1.0, float(np.max(np.abs(dv))))
    scale_d2v = max(1.0, float(np.max(np.abs(potential.d2v(grid)))))

    roots: list[float] = []
    f = lambda x: float(potential.dv(x))
    for i in range(n_cells):
        a, b = grid[i], grid[i + 1]
        fa, fb = dv[i], dv[i + 1]
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0.0:
            roots.append(brentq(f, a, b, xtol=1e-14, rtol=8.9e-16))
    if dv[-1] == 0.0:
        roots.append(float(grid[-1]))

    # merge near-duplicates from roots landing on grid nodes
    roots.sort()
    merged: list[float] = []
    gap = (hi - lo) * 1e-12
    for r in roots:
        if not merged or r - merged[-1] > gap:
            merged.append(r)

    minima, maxima = [], []
    for r in merged:
        if abs(f(r)) > ROOT_TOL * scale_dv:
            raise NoStationaryConvergence(r, f(r))
        curv = float(potential.d2v(r))
        if abs(curv) < degen_tol * scale_d2v:
            raise DegeneratePotential(
                f"stationary point at theta={r:.12g} has |V''|={abs(curv):.3g}, "
                f"below {degen_tol:g} of scale {scale_d2v:.3g}")
        (minima if curv > 0 else maxima).append(r)

    bset = BoundarySet(np.array(minima), np.array(maxima), (float(lo), float(hi)))
    _check_interlacing(bset)
    return bset


class NoStationaryConvergence(DegeneratePotential):
    def __init__(self, root, residual):
        super().__init__(f"root refinement left |V'({root:.12g})| = {abs(residual):.3g}")


def _check_interlacing(bset: BoundarySet) -> None:
    # consecutive stationary points of a smooth V alternate in type; a
    # violation means the scan missed a root between them
    pts = bset.all_points()
    if pts.size < 2:
        return
    kinds = np.array([+1 if p in bset.minima else -1 for p in pts])
    if np.any(kinds[1:] == kinds[:-1]):
        raise DegeneratePotential(
            "stationary points do not alternate min/max; refine the scan grid")
