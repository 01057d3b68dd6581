import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pointersim.model import MeasurementConfig
from pointersim.oracle import closed_form_eta0
from pointersim.propagator import (
    build_generator,
    consistency_residual,
    kdot,
    propagate,
    propagate_grid,
    response_matrices,
)

_SEL = np.diag([0.0, 1.0, 1.0])


def test_generator_dimensions(open_config, closed_config):
    assert build_generator(closed_config).dim == 6
    assert build_generator(open_config, "renormalized").dim == 8
    assert build_generator(open_config, "raw").dim == 8


def test_unknown_mode_rejected(open_config):
    with pytest.raises(ValueError):
        build_generator(open_config, "physical")


def test_negative_time_rejected(open_config):
    with pytest.raises(ValueError):
        propagate(build_generator(open_config), -0.1)


def test_closed_generator_nilpotent(closed_config):
    c = build_generator(closed_config).generator
    assert np.abs(np.linalg.matrix_power(c, 4)).max() == 0.0


def test_initial_conditions(open_config):
    gen = build_generator(open_config)
    k, g, gd = propagate(gen, 0.0)
    np.testing.assert_allclose(k, np.eye(3), atol=1e-14)
    np.testing.assert_allclose(g, np.zeros((3, 3)), atol=1e-14)
    np.testing.assert_allclose(gd, gen.coupling.mass_inverse, atol=1e-13)


def test_small_time_taylor(open_config):
    """e^(C*t) at tiny t matches a 6-term Taylor expansion to 1e-12."""
    gen = build_generator(open_config)
    c = gen.generator
    t = 1e-3
    from scipy.linalg import expm

    taylor = np.eye(c.shape[0])
    term = np.eye(c.shape[0])
    for n in range(1, 6):
        term = term @ (c * t) / n
        taylor = taylor + term
    assert np.abs(expm(c * t) - taylor).max() < 1e-12


def test_closed_propagators_match_polynomials(closed_config):
    gen = build_generator(closed_config)
    for t in np.linspace(0.0, 3.0, 31):
        k, g, gd = propagate(gen, float(t))
        kc, gc, gdc = closed_form_eta0(closed_config, float(t))
        np.testing.assert_allclose(k, kc, atol=1e-12)
        np.testing.assert_allclose(g, gc, atol=1e-12)
        np.testing.assert_allclose(gd, gdc, atol=1e-12)


def test_closed_polynomials_generic_parameters():
    cfg = MeasurementConfig(kappa1=1.3, kappa2=0.7, mass_ratio=2.0, eta=0.0)
    gen = build_generator(cfg)
    for t in (0.4, 1.7):
        k, g, gd = propagate(gen, t)
        kc, gc, gdc = closed_form_eta0(cfg, t)
        np.testing.assert_allclose(k, kc, atol=1e-12)
        np.testing.assert_allclose(g, gc, atol=1e-12)
        np.testing.assert_allclose(gd, gdc, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(t1=st.floats(0.0, 1.5), t2=st.floats(0.0, 1.5))
def test_semigroup_property(t1, t2):
    from scipy.linalg import expm

    gen = build_generator(MeasurementConfig())
    c = gen.generator
    e12 = expm(c * (t1 + t2))
    np.testing.assert_allclose(e12, expm(c * t1) @ expm(c * t2), atol=1e-10)


def test_consistency_identity_raw(open_config):
    """K = Gdot*M + G*D^T holds exactly for the raw dynamics."""
    gen = build_generator(open_config, "raw")
    for t in (0.3, 1.0, 2.5):
        assert consistency_residual(gen, t) < 1e-10


def test_consistency_identity_closed(closed_config):
    gen = build_generator(closed_config)
    for t in (0.3, 1.0, 2.5):
        assert consistency_residual(gen, t) < 1e-12


def test_consistency_renormalized_memory_correction(open_config):
    """In renormalized mode the identity gains the memory convolution term

    K = Gdot*M + G*D^T + eta*omega_c * int_0^t G(t-s) e^(-omega_c*s) ds * S
    with S = diag(0,1,1), because the memory variable multiplies the
    velocity history rather than the initial position.
    """
    gen = build_generator(open_config, "renormalized")
    coup = gen.coupling
    x, w = np.polynomial.legendre.leggauss(200)
    for t in (0.5, 1.0, 2.0):
        k, g, gd = propagate(gen, t)
        s_nodes = 0.5 * t * (x + 1.0)
        ws = 0.5 * t * w
        corr = np.zeros((3, 3))
        for si, wi in zip(s_nodes, ws):
            _, gs, _ = propagate(gen, t - si)
            corr += wi * np.exp(-open_config.omega_c * si) * gs
        corr = open_config.eta * open_config.omega_c * corr @ _SEL
        alt = gd @ coup.mass_matrix + g @ coup.damping_matrix.T + corr
        assert np.abs(k - alt).max() < 1e-10
        # and without the correction the identity visibly fails
        bare = gd @ coup.mass_matrix + g @ coup.damping_matrix.T
        assert np.abs(k - bare).max() > 0.1


def test_kdot_matches_finite_difference(open_config):
    gen = build_generator(open_config, "renormalized")
    t, h = 0.8, 1e-6
    kp, _, _ = propagate(gen, t + h)
    km, _, _ = propagate(gen, t - h)
    fd = (kp - km) / (2 * h)
    np.testing.assert_allclose(kdot(gen, t), fd, atol=1e-6)


def test_propagate_grid_matches_pointwise(open_config):
    gen = build_generator(open_config)
    times = np.array([0.1, 0.7, 1.9])
    grid = propagate_grid(gen, times)
    for i, t in enumerate(times):
        k, g, gd = propagate(gen, float(t))
        np.testing.assert_allclose(grid.k[i], k)
        np.testing.assert_allclose(grid.g[i], g)
        np.testing.assert_allclose(grid.gdot[i], gd)


def test_response_matrices_closed_det(closed_config):
    gen = build_generator(closed_config)
    for t in (0.5, 1.0, 2.0):
        k, g, _ = propagate(gen, t)
        a, b, det_a = response_matrices(k, g)
        assert a.shape == (2, 2)
        assert b.shape == (2, 4)
        assert det_a == pytest.approx(4.0 * t**2, rel=1e-12)


def test_response_matrix_entries(closed_config):
    gen = build_generator(closed_config)
    t = 1.3
    k, g, _ = propagate(gen, t)
    a, _, _ = response_matrices(k, g)
    assert a[0, 0] == pytest.approx(2.0 * t, rel=1e-12)  # K_21
    assert a[0, 1] == pytest.approx(t**2, rel=1e-12)  # G_21
    assert a[1, 0] == pytest.approx(0.0, abs=1e-13)  # K_31
    assert a[1, 1] == pytest.approx(2.0 * t, rel=1e-12)  # G_31
