import numpy as np
import pytest
from hypothesis import given, strategies as st

from pointersim.errors import (
    NonPositive,
    NonZeroMean,
    SingularLagrangian,
    UncertaintyViolation,
)
from pointersim.model import (
    GaussianMoments,
    MeasurementConfig,
    build_coupling_matrices,
    gaussian_state_moments,
    require_zero_mean,
    rescale_physical,
    unrescale_config,
    validate_config,
)


def test_default_config_values():
    cfg = MeasurementConfig()
    assert cfg.kappa1 == 2.0
    assert cfg.kappa2 == 2.0
    assert cfg.mass_ratio == 1.0
    assert cfg.eta == 0.25
    assert cfg.omega_c == 20.0
    assert cfg.inv_beta == 1.0
    assert cfg.beta == 1.0


def test_config_is_frozen():
    with pytest.raises(AttributeError):
        MeasurementConfig().eta = 0.5


def test_validate_rejects_singular_lagrangian():
    with pytest.raises(SingularLagrangian):
        validate_config(MeasurementConfig(kappa2=1.0, mass_ratio=1.0))


@pytest.mark.parametrize(
    "kwargs",
    [{"mass_ratio": 0.0}, {"omega_c": -1.0}, {"inv_beta": 0.0}],
)
def test_validate_rejects_nonpositive(kwargs):
    with pytest.raises(NonPositive):
        validate_config(MeasurementConfig(**kwargs))


def test_validate_rejects_negative_viscosity():
    from pointersim.errors import NegativeViscosity

    with pytest.raises(NegativeViscosity):
        validate_config(MeasurementConfig(eta=-0.1))


def test_validate_warns_on_low_cutoff():
    with pytest.warns(UserWarning):
        validate_config(MeasurementConfig(omega_c=2.0), t_max=3.0)


def test_coupling_matrices_structure(open_config):
    coup = build_coupling_matrices(open_config)
    k2, m0 = open_config.kappa2, open_config.mass_ratio
    a = m0 / (k2**2 - m0)
    assert coup.a == pytest.approx(a)
    expected = np.array([[-a, 0, a * k2], [0, m0, 0], [a * k2, 0, -a * m0]])
    np.testing.assert_allclose(coup.mass_matrix, expected)
    d = np.zeros((3, 3))
    d[1, 0] = open_config.kappa1
    np.testing.assert_allclose(coup.damping_matrix, d)
    np.testing.assert_allclose(
        coup.mass_inverse @ coup.mass_matrix, np.eye(3), atol=1e-13
    )


def test_default_moments_minimum_uncertainty(default_moments):
    np.testing.assert_allclose(
        default_moments.cov_j, np.diag([1.0, 1.0, 0.25, 0.25])
    )
    assert default_moments.var_xs0 == 1.0
    assert default_moments.var_ps0 == 0.25
    assert default_moments.dx_s0 == 1.0
    assert default_moments.dp_s0 == 0.5


def test_moments_reject_uncertainty_violation():
    with pytest.raises(UncertaintyViolation):
        gaussian_state_moments(
            pointer_position_variances=(1.0, 1.0),
            pointer_momentum_variances=(0.1, 0.25),
        )
    with pytest.raises(UncertaintyViolation):
        gaussian_state_moments(
            pointer_momentum_variances=(0.25, 0.25),
            pointer_correlations=(0.2, 0.0),
        )


def test_moments_reject_nonpositive_variance():
    with pytest.raises(NonPositive):
        gaussian_state_moments(system_position_variance=-1.0)


@given(
    vx=st.floats(0.1, 10.0),
    ratio=st.floats(1.0, 5.0),
    corr_frac=st.floats(0.0, 0.9),
)
def test_moments_accept_valid_states(vx, ratio, corr_frac):
    """Any pair with DX^2*DP^2 >= 1/4 + c^2 must be accepted."""
    vp = ratio * 0.25 / vx
    c = corr_frac * np.sqrt(max(vx * vp - 0.25, 0.0))
    m = gaussian_state_moments(
        pointer_position_variances=(vx, vx),
        pointer_momentum_variances=(vp, vp),
        pointer_correlations=(c, c),
    )
    for i in range(2):
        prod = m.cov_j[i, i] * m.cov_j[2 + i, 2 + i]
        assert prod >= 0.25 + m.cov_j[i, 2 + i] ** 2 - 1e-9


def test_require_zero_mean():
    m = gaussian_state_moments()
    assert require_zero_mean(m) is m
    biased = GaussianMoments(
        mean_j=np.array([0.1, 0.0, 0.0, 0.0]),
        cov_j=m.cov_j,
        var_xs0=1.0,
        var_ps0=0.25,
    )
    with pytest.raises(NonZeroMean):
        require_zero_mean(biased)


def test_rescale_round_trip():
    cfg = rescale_physical(
        system_mass=2.0,
        pointer_mass=3.0,
        kappa1=0.7,
        kappa2=0.4,
        eta=0.1,
        omega_c=5.0,
        inv_beta=2.5,
        var_xs0=0.8,
        var_ps0=0.3,
        hbar=1.0,
    )
    back = unrescale_config(cfg, system_mass=2.0, var_xs0=0.8, var_ps0=0.3)
    assert back["pointer_mass"] == pytest.approx(3.0)
    assert back["kappa1"] == pytest.approx(0.7)
    assert back["kappa2"] == pytest.approx(0.4)
    assert back["eta"] == pytest.approx(0.1)
    assert back["omega_c"] == pytest.approx(5.0)
    assert back["inv_beta"] == pytest.approx(2.5)


def test_rescale_identity_scales():
    """With T = 1 scales the rescaled couplings reduce to simple products."""
    cfg = rescale_physical(
        system_mass=1.0,
        pointer_mass=1.0,
        kappa1=2.0,
        kappa2=2.0,
        eta=0.25,
        omega_c=20.0,
        inv_beta=1.0,
        var_xs0=1.0,
        var_ps0=1.0,
    )
    assert cfg.kappa1 == pytest.approx(2.0)
    assert cfg.kappa2 == pytest.approx(2.0)
    assert cfg.eta == pytest.approx(0.25)
    assert cfg.omega_c == pytest.approx(20.0)


def test_numerical_settings_doubled():
    cfg = MeasurementConfig()
    doubled = cfg.numerical.doubled()
    assert doubled.conv_panel_nodes == 2 * cfg.numerical.conv_panel_nodes
    assert doubled.conv_inner_nodes == 2 * cfg.numerical.conv_inner_nodes
    assert doubled.conv_graded_panels == cfg.numerical.conv_graded_panels + 4
