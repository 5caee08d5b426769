"""Incomplete and complete elliptic integrals in the parameter convention.

K(m)      = int_0^{pi/2} dt / sqrt(1 - m sin^2 t)
F(phi|m)  = int_0^{phi}  dt / sqrt(1 - m sin^2 t)
am(u|m)   = the inverse of F in its first argument.

All three take the parameter m (not the modulus k; m = k^2). F supports the
real branch for m > 1, where the integrand stays real as long as
m sin^2 phi <= 1; equality is treated as a limit via the reciprocal-modulus
identity F(phi|m) = F(arcsin(sqrt(m) sin phi) | 1/m) / sqrt(m).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, NoConvergence

__all__ = ["ellip_K", "ellip_F", "jacobi_am"]

_RF_ERRTOL = 1.2e-3          # truncation error ~ ERRTOL^6 < 4e-18
_RF_MAXIT = 64
_AGM_TOL = 4e-16
_BRANCH_CLAMP = 1e-9         # treat sqrt(m) sin phi in (1, 1+clamp] as the limit
_AM_MAXIT = 80


def _carlson_rf(x: float, y: float, z: float) -> float:
    """Carlson symmetric integral R_F(x, y, z) for non-negative arguments."""
    for _ in range(_RF_MAXIT):
        sx, sy, sz = math.sqrt(x), math.sqrt(y), math.sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
        mu = (x + y + z) / 3.0
        dx, dy, dz = (mu - x) / mu, (mu - y) / mu, (mu - z) / mu
        if max(abs(dx), abs(dy), abs(dz)) < _RF_ERRTOL:
            e2 = dx * dy - dz * dz
            e3 = dx * dy * dz
            return (1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / math.sqrt(mu)
    raise NoConvergence("Carlson R_F did not converge")


def _K(m: float) -> float:
    if not math.isfinite(m):
        raise DomainError(f"K(m) needs finite m, got {m}")
    if m >= 1.0:
        raise DomainError(f"K(m) diverges for m >= 1, got m={m}")
    a, b = 1.0, math.sqrt(1.0 - m)
    while abs(a - b) > _AGM_TOL * a:
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (a + b)


def _F_principal(phi: float, m: float) -> float:
    """F(phi|m) for |phi| <= pi/2 and m < 1, via Carlson R_F."""
    s = math.sin(phi)
    c2 = math.cos(phi) ** 2
    # 1 - m sin^2 written cancellation-free: both terms stay positive even
    # in the joint limit m -> 1, phi -> pi/2 where the naive form loses
    # every significant digit
    q = c2 + (1.0 - m) * s * s
    return s * _carlson_rf(c2, q, 1.0)


def _F(phi: float, m: float) -> float:
    if not (math.isfinite(phi) and math.isfinite(m)):
        raise DomainError(f"F(phi|m) needs finite arguments, got phi={phi}, m={m}")
    if phi == 0.0:
        return 0.0
    if phi < 0.0:
        return -_F(-phi, m)
    if m == 0.0:
        return phi
    if m < 1.0:
        n = round(phi / math.pi)
        r = phi - n * math.pi
        val = _F_principal(r, m)
        if n != 0:
            val += 2.0 * n * _K(m)
        return val
    if m == 1.0:
        s = math.sin(phi)
        if phi >= 0.5 * math.pi:
            raise DomainError("F(phi|1) diverges at phi = pi/2")
        return math.atanh(s)
    # m > 1: real branch, valid only while m sin^2 stays below 1
    if phi > 0.5 * math.pi:
        raise DomainError(
            f"F(phi|m) with m={m} > 1 leaves the real branch beyond phi=pi/2, got phi={phi}"
        )
    s = math.sqrt(m) * math.sin(phi)
    if s > 1.0 + _BRANCH_CLAMP:
        raise DomainError(
            f"F(phi|m) real branch needs m sin^2(phi) <= 1, got {s * s:.6g} with m={m}"
        )
    if s >= 1.0:
        return _K(1.0 / m) / math.sqrt(m)
    return _F_principal(math.asin(s), 1.0 / m) / math.sqrt(m)


def _am(u: float, m: float) -> float:
    if not (math.isfinite(u) and math.isfinite(m)):
        raise DomainError(f"am(u|m) needs finite arguments, got u={u}, m={m}")
    if m >= 1.0:
        raise DomainError(f"am(u|m) is implemented for m < 1, got m={m}")
    if m == 0.0:
        return u
    if u == 0.0:
        return 0.0
    K = _K(m)
    n = math.floor(u / (2.0 * K) + 0.5)
    ur = u - 2.0 * n * K
    # descending Landen: run the AGM forward, seed the amplitude at the
    # deepest scale, and fold it back level by level; unlike Newton on F
    # this does not degrade as m -> 1 where dF/dphi blows up
    a, b = 1.0, math.sqrt(1.0 - m)
    levels = []
    for _ in range(_AM_MAXIT):
        an, cn = 0.5 * (a + b), 0.5 * (a - b)
        a, b = an, math.sqrt(a * b)
        levels.append((an, cn))
        if abs(cn) <= _AGM_TOL * an:
            break
    else:
        raise NoConvergence(f"AGM for am(u|m) stalled at m={m}")
    phi = math.ldexp(a * ur, len(levels))
    for an, cn in reversed(levels):
        phi = 0.5 * (phi + math.asin(max(-1.0, min(1.0, cn / an * math.sin(phi)))))
    # Newton polish on the F residual; from the Landen seed this converges
    # immediately and pins the round trip F(am(u)) = u to machine accuracy
    for _ in range(8):
        f = _F(phi, m) - ur
        if abs(f) <= 4e-16 * (1.0 + abs(ur)):
            break
        s, c = math.sin(phi), math.cos(phi)
        phi -= f * math.sqrt(c * c + (1.0 - m) * s * s)
    return n * math.pi + phi


def _vectorize(fn, *args):
    shape = np.broadcast(*[np.asarray(a) for a in args]).shape
    if shape == ():
        return fn(*(float(a) for a in args))
    flat = [np.broadcast_to(np.asarray(a, dtype=float), shape).ravel() for a in args]
    out = np.array([fn(*vals) for vals in zip(*flat)])
    return out.reshape(shape)


def ellip_K(m):
    """Complete elliptic integral K(m), computed by the arithmetic-geometric mean.

    Requires m < 1 (K diverges logarithmically as m -> 1). Accepts scalars or
    arrays.
    """
    return _vectorize(_K, m)


def ellip_F(phi, m):
    """Incomplete elliptic integral F(phi|m).

    For m < 1 any real phi is accepted (reduction by F(phi + pi) = F(phi) + 2K).
    For m > 1 the real branch requires |phi| <= pi/2 and m sin^2(phi) <= 1;
    boundary equality returns the limit K(1/m)/sqrt(m).
    """
    return _vectorize(_F, phi, m)


def jacobi_am(u, m):
    """Jacobi amplitude am(u|m) for m < 1, the inverse of F(.|m).

    Solved by a bracketed Newton iteration on F after reduction modulo the
    half period 2K(m).
    """
    return _vectorize(_am, u, m)
