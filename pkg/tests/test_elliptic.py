"""Elliptic integrals and the amplitude inverse against quadrature."""

import numpy as np
import pytest

import varstab as vs
from varstab import DomainError, InvalidParams

from conftest import F_quad, K_quad


def test_complete_matches_quadrature(rng):
    # 300 parameter values, negative m included, close approach to m = 1
    m = np.concatenate([
        rng.uniform(-3.0, 0.95, 260),
        1.0 - 10.0 ** rng.uniform(-9.0, -1.5, 40),
    ])
    K = vs.ellip_K(m)
    for mi, ki in zip(m, K):
        assert abs(ki - K_quad(mi)) <= 1e-12 * (1.0 + abs(ki))


def test_complete_log_divergence():
    # K(m) ~ ln(16/(1-m))/2 near m = 1
    m = 1.0 - 1e-8
    assert abs(vs.ellip_K(m) - 0.5 * np.log(16.0 / (1.0 - m))) < 1e-6


def test_complete_domain():
    with pytest.raises(DomainError):
        vs.ellip_K(1.0)
    with pytest.raises(DomainError):
        vs.ellip_K(1.5)


def test_incomplete_matches_quadrature(rng):
    checked = 0
    # m < 1 with large amplitudes exercising period reduction
    for _ in range(250):
        m = float(rng.uniform(-2.0, 0.995))
        phi = float(rng.uniform(-3.0 * np.pi, 3.0 * np.pi))
        val = vs.ellip_F(phi, m)
        ref = F_quad(phi, m)
        assert abs(val - ref) <= 1e-12 * (1.0 + abs(ref))
        checked += 1
    # real branch above m = 1, amplitude kept inside the branch
    for _ in range(150):
        m = float(rng.uniform(1.0 + 1e-6, 4.0))
        phi_max = np.arcsin(1.0 / np.sqrt(m))
        phi = float(rng.uniform(0.0, 0.999 * phi_max))
        val = vs.ellip_F(phi, m)
        ref = F_quad(phi, m)
        assert abs(val - ref) <= 1e-12 * (1.0 + abs(ref))
        checked += 1
    assert checked == 400


def test_incomplete_exact_cases():
    assert vs.ellip_F(0.7, 0.0) == pytest.approx(0.7, abs=1e-15)
    assert vs.ellip_F(np.pi / 2, 0.3) == pytest.approx(vs.ellip_K(0.3),
                                                       abs=1e-14)
    # m = 1 collapses to the inverse Gudermannian
    phi = 0.9
    assert vs.ellip_F(phi, 1.0) == pytest.approx(np.arctanh(np.sin(phi)),
                                                 abs=1e-13)


def test_incomplete_reciprocal_modulus(rng):
    # F(phi|m) = F(arcsin(sqrt(m) sin phi) | 1/m)/sqrt(m) for m > 1
    for _ in range(50):
        m = float(rng.uniform(1.1, 3.5))
        phi = float(rng.uniform(0.0, 0.95 * np.arcsin(1.0 / np.sqrt(m))))
        lhs = vs.ellip_F(phi, m)
        rhs = vs.ellip_F(np.arcsin(np.sqrt(m) * np.sin(phi)), 1.0 / m)
        assert lhs == pytest.approx(rhs / np.sqrt(m), abs=1e-12)


def test_incomplete_monotone_in_phi(rng):
    m = 0.83
    phi = np.sort(rng.uniform(-6.0, 6.0, 200))
    vals = vs.ellip_F(phi, m)
    assert np.all(np.diff(vals) > 0)


def test_amplitude_matches_quadrature(rng):
    # invert the quadrature oracle by bisection and compare
    from scipy.optimize import brentq
    for _ in range(300):
        m = float(rng.uniform(0.05, 0.95))
        u = float(rng.uniform(-8.0, 8.0))
        phi = vs.jacobi_am(u, m)
        hi = abs(u) / np.sqrt(1.0 - m) + 1.0
        ref = brentq(lambda x: F_quad(x, m) - u, -hi, hi, xtol=1e-14)
        assert abs(phi - ref) <= 1e-12 * (1.0 + abs(ref))


def test_amplitude_round_trip(rng):
    for m in np.arange(0.1, 0.95, 0.1):
        K = float(vs.ellip_K(m))
        u = np.linspace(0.0, 4.0 * K, 37)
        phi = vs.jacobi_am(u, m)
        back = vs.ellip_F(phi, m)
        assert np.max(np.abs(back - u)) < 1e-11


def test_amplitude_exact_cases():
    assert vs.jacobi_am(0.37, 0.0) == pytest.approx(0.37, abs=1e-14)
    m = 0.6
    assert vs.jacobi_am(float(vs.ellip_K(m)), m) == pytest.approx(np.pi / 2,
                                                                  abs=1e-12)


def test_vectorized_shapes():
    m = np.array([[0.1, 0.4], [0.7, -0.3]])
    assert vs.ellip_K(m).shape == (2, 2)
    phi = np.linspace(0, 1, 5)
    assert vs.ellip_F(phi, 0.5).shape == (5,)
    assert vs.jacobi_am(phi, 0.5).shape == (5,)
    assert isinstance(vs.ellip_K(0.5), float)
