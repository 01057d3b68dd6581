import numpy as np
import pytest

from pointersim.errors import EvaluationAtZero, SeriesResonance
from pointersim.kernels import (
    BathKernel,
    dissipation_from_spectral_density,
    dissipation_kernel,
    dissipation_kernel_scalar,
    noise_autocorrelation,
    spectral_density,
    spectral_density_scalar,
)

KERNEL = BathKernel(eta=0.25, omega_c=20.0, inv_beta=1.0)


def test_spectral_density_shape_and_peak():
    # peak value at omega = omega_c is eta*omega_c/pi
    assert spectral_density_scalar(20.0, KERNEL) == pytest.approx(
        0.25 * 20.0 / np.pi
    )
    mat = spectral_density(5.0, KERNEL)
    assert mat[0, 0] == 0.0
    assert mat[1, 1] == mat[2, 2] == pytest.approx(
        float(spectral_density_scalar(5.0, KERNEL))
    )
    # linear (Ohmic) at low frequency
    lo = spectral_density_scalar(1e-4, KERNEL)
    assert lo == pytest.approx(2.0 * 0.25 / np.pi * 1e-4, rel=1e-6)


def test_dissipation_kernel_closed_form():
    assert dissipation_kernel_scalar(0.0, KERNEL) == pytest.approx(0.25 * 400.0)
    t = 0.3
    assert dissipation_kernel_scalar(t, KERNEL) == pytest.approx(
        100.0 * np.exp(-20.0 * t)
    )
    mat = dissipation_kernel(t, KERNEL)
    assert mat[0, 0] == 0.0
    assert mat[1, 1] == mat[2, 2]


def test_dissipation_sine_transform_reconstruction():
    """mu(t) from the I(omega) sine transform matches the closed form."""
    for t in np.linspace(0.05, 0.8, 12):
        direct = float(dissipation_kernel_scalar(t, KERNEL))
        recon = dissipation_from_spectral_density(float(t), KERNEL)
        assert abs(recon - direct) / direct < 1e-8
    # beyond t ~ 1 the kernel is below the cancellation floor of the
    # oscillatory quadrature; only absolute accuracy is meaningful there
    mu0 = float(dissipation_kernel_scalar(0.0, KERNEL))
    for t in (1.0, 1.5, 2.0):
        direct = float(dissipation_kernel_scalar(t, KERNEL))
        recon = dissipation_from_spectral_density(float(t), KERNEL)
        assert abs(recon - direct) < 1e-12 * mu0


def test_nu_series_matches_quadrature_20_points():
    # restricted to times where |nu| stays above the absolute-error floor
    # of the quadrature oracle; beyond that the relative metric compares
    # noise against noise
    rng = np.random.default_rng(7)
    ts = rng.uniform(0.02, 1.0, 10)
    for inv_beta in (0.5, 2.0):
        kern = BathKernel(eta=0.25, omega_c=20.0, inv_beta=inv_beta)
        for t in ts:
            s = noise_autocorrelation(float(t), kern, method="series")
            q = noise_autocorrelation(float(t), kern, method="quadrature")
            assert abs(s - q) / max(abs(q), 1e-300) < 1e-8


def test_nu_frozen_values():
    # values cross-checked between the series and direct quadrature
    expected = {
        0.01: 34.734615365982016,
        0.1: -4.66588760690116,
        0.5: -0.17324253043096657,
        1.0: -0.006545768835541948,
    }
    for t, ref in expected.items():
        assert noise_autocorrelation(t, KERNEL) == pytest.approx(ref, rel=1e-9)


def test_nu_even_in_t():
    assert noise_autocorrelation(-0.3, KERNEL) == pytest.approx(
        noise_autocorrelation(0.3, KERNEL), rel=1e-14
    )


def test_nu_array_evaluation():
    ts = np.array([0.01, 0.1, 0.7])
    vals = noise_autocorrelation(ts, KERNEL)
    assert vals.shape == (3,)
    for t, v in zip(ts, vals):
        assert v == pytest.approx(noise_autocorrelation(float(t), KERNEL))


def test_nu_continuous_at_small_time_switch():
    """The exp-integral and series branches agree at the crossover."""
    cut = 0.05 * KERNEL.beta
    below = noise_autocorrelation(cut * (1 - 1e-9), KERNEL)
    above = noise_autocorrelation(cut * (1 + 1e-9), KERNEL)
    assert below == pytest.approx(above, rel=1e-7)


def test_nu_rejects_t_zero():
    with pytest.raises(EvaluationAtZero):
        noise_autocorrelation(0.0, KERNEL)


def test_nu_eta_zero():
    kern = BathKernel(eta=0.0, omega_c=20.0, inv_beta=1.0)
    assert noise_autocorrelation(0.5, kern) == 0.0


def test_nu_classical_limit():
    """nu -> eta*omega_c*inv_beta*exp(-omega_c*t) for beta*omega_c -> 0."""
    for inv_beta in (1e4, 2e4):  # beta*omega_c = 2e-3, 1e-3
        kern = BathKernel(eta=0.25, omega_c=20.0, inv_beta=inv_beta)
        for t in (0.01, 0.05, 0.1):
            ref = 0.25 * 20.0 * inv_beta * np.exp(-20.0 * t)
            assert abs(noise_autocorrelation(t, kern) - ref) / ref < 1e-6


def test_nu_classical_limit_quadratic_approach():
    """The leading correction to the classical limit is (beta*omega_c)^2/12."""
    inv_beta = 2e3  # beta*omega_c = 0.01
    kern = BathKernel(eta=0.25, omega_c=20.0, inv_beta=inv_beta)
    t = 0.05
    ref = 0.25 * 20.0 * inv_beta * np.exp(-20.0 * t)
    rel = abs(noise_autocorrelation(t, kern) - ref) / ref
    bw = 20.0 / inv_beta
    assert rel == pytest.approx(bw**2 / 12.0, rel=0.05)


def test_nu_series_resonance_detection():
    # omega_c sitting exactly on the third Matsubara frequency
    inv_beta = 20.0 / (3 * 2.0 * np.pi)
    kern = BathKernel(eta=0.25, omega_c=20.0, inv_beta=inv_beta)
    with pytest.raises(SeriesResonance):
        noise_autocorrelation(0.5, kern, method="series")
    # auto mode falls back to quadrature and agrees with a nearby
    # non-resonant series evaluation
    val = noise_autocorrelation(0.5, kern, method="auto")
    near = BathKernel(eta=0.25, omega_c=20.0, inv_beta=inv_beta * (1 + 1e-4))
    assert val == pytest.approx(
        noise_autocorrelation(0.5, near), rel=1e-2
    )


def test_nu_unknown_method_rejected():
    with pytest.raises(ValueError):
        noise_autocorrelation(0.5, KERNEL, method="magic")
