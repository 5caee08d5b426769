"""Builtin potential families and stationary-point structure."""

import numpy as np
import pytest

import varstab as vs
from varstab import DegeneratePotential, InvalidParams, UnknownFamily


def test_pendulum_values():
    pot = vs.make_builtin("pendulum", M=81.0)
    th = np.linspace(-7, 7, 11)
    assert np.allclose(pot.v(th), -81.0 * np.cos(th), rtol=0, atol=1e-12)
    assert np.allclose(pot.dv(th), 81.0 * np.sin(th), rtol=0, atol=1e-12)
    assert np.allclose(pot.d2v(th), 81.0 * np.cos(th), rtol=0, atol=1e-12)
    assert pot.period == pytest.approx(2.0 * np.pi)


def test_harmonic_and_quadwell_values():
    hp = vs.make_builtin("harmonic", k=2.5)
    qw = vs.make_builtin("quadwell", a=1.5, b=0.5)
    th = np.linspace(-3, 3, 13)
    assert np.allclose(hp.v(th), 1.25 * th**2, atol=1e-12)
    assert np.allclose(qw.v(th), 1.5 * th**4 / 4 - 0.5 * th**2 / 2,
                       atol=1e-12)
    assert np.allclose(qw.dv(th), 1.5 * th**3 - 0.5 * th, atol=1e-12)


def test_polynomial_family():
    pot = vs.make_builtin("polynomial", coeffs=[1.0, 0.0, -0.5, 0.25])
    th = np.linspace(-2, 2, 9)
    assert np.allclose(pot.v(th), 1 - 0.5 * th**2 + 0.25 * th**3, atol=1e-12)
    assert np.allclose(pot.dv(th), -th + 0.75 * th**2, atol=1e-12)


def test_table_family_tracks_samples():
    grid = np.linspace(-6.5, 6.5, 4097)
    pot = vs.make_builtin("table", theta=grid, values=-2.0 * np.cos(grid))
    probe = np.linspace(-6, 6, 400)
    assert np.max(np.abs(pot.v(probe) + 2.0 * np.cos(probe))) < 1e-9
    assert np.max(np.abs(pot.dv(probe) - 2.0 * np.sin(probe))) < 1e-6


def test_derivative_consistency_fd(rng):
    """Analytic derivatives agree with O(h^2) central differences."""
    pots = [vs.make_builtin("pendulum", M=2.0),
            vs.make_builtin("harmonic", k=0.7),
            vs.make_builtin("quadwell"),
            vs.make_builtin("polynomial", coeffs=[0, 0.3, -0.5, 0, 0.25])]
    h = 1e-5
    for pot in pots:
        th = rng.uniform(-3.0, 3.0, 100)
        fd = (np.asarray(pot.v(th + h)) - np.asarray(pot.v(th - h))) / (2 * h)
        assert np.max(np.abs(fd - pot.dv(th))) < 5e-9 * (
            1.0 + np.max(np.abs(fd)))


def test_bad_construction():
    with pytest.raises(UnknownFamily):
        vs.make_builtin("cubicwell")
    with pytest.raises(InvalidParams):
        vs.make_builtin("pendulum", M=-3.0)
    with pytest.raises(InvalidParams):
        vs.make_builtin("polynomial")
    with pytest.raises(InvalidParams):
        vs.make_builtin("table", theta=[0, 1, 2], values=[1, 2, 3])


def test_stationary_points_pendulum():
    pot = vs.make_builtin("pendulum", M=2.0)
    bset = vs.stationary_points(pot, -7.0, 7.0)
    assert np.allclose(bset.minima, [-2 * np.pi, 0.0, 2 * np.pi], atol=1e-10)
    assert np.allclose(bset.maxima, [-np.pi, np.pi], atol=1e-10)


def test_stationary_points_quadwell():
    pot = vs.make_builtin("quadwell", a=2.0, b=1.0)
    bset = vs.stationary_points(pot, -3.0, 3.0)
    r = np.sqrt(0.5)
    assert np.allclose(bset.minima, [-r, r], atol=1e-10)
    assert np.allclose(bset.maxima, [0.0], atol=1e-10)


def test_stationary_points_grid_invariance():
    pot = vs.make_builtin("polynomial", coeffs=[0, 0.3, -0.5, 0, 0.25])
    b1 = vs.stationary_points(pot, -3.0, 3.0, n_cells=1024)
    b2 = vs.stationary_points(pot, -3.0, 3.0, n_cells=2048)
    assert np.allclose(b1.minima, b2.minima, atol=1e-10)
    assert np.allclose(b1.maxima, b2.maxima, atol=1e-10)


def test_stationary_points_interlace():
    pot = vs.make_builtin("pendulum", M=1.0)
    bset = vs.stationary_points(pot, -10.0, 10.0)
    tagged = sorted([(m, "min") for m in bset.minima]
                    + [(m, "max") for m in bset.maxima])
    kinds = [k for _, k in tagged]
    for x, y in zip(kinds, kinds[1:]):
        assert x != y


def test_degenerate_stationary_point():
    # quartic bottom: V' root with V'' = 0
    pot = vs.make_builtin("polynomial", coeffs=[0, 0, 0, 0, 1.0])
    with pytest.raises(DegeneratePotential):
        vs.stationary_points(pot, -1.0, 1.0)


def test_descriptor_json_round_trip():
    import json
    pot = vs.make_builtin("pendulum", M=81.0)
    d = pot.to_json_dict()
    assert d == {"family": "pendulum", "params": {"M": 81.0}}
    assert json.loads(json.dumps(d)) == d
