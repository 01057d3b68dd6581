"""Rescaled model definition: parameters, coupling matrices, initial moments.

All quantities live in the dimensionless units based on the system's
spreading time scale T and length scale lambda = sqrt(T*hbar/M_S); see
:func:`rescale_physical` for the conversion from laboratory units.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    NegativeViscosity,
    NonPositive,
    NonZeroMean,
    SingularLagrangian,
    UncertaintyViolation,
)

__all__ = [
    "NumericalSettings",
    "MeasurementConfig",
    "CouplingMatrices",
    "GaussianMoments",
    "validate_config",
    "build_coupling_matrices",
    "gaussian_state_moments",
    "rescale_physical",
    "unrescale_config",
]


@dataclass(frozen=True)
class NumericalSettings:
    """Tolerances and resolutions shared by the numerical pipeline."""

    quad_abs_tol: float = 1e-10
    quad_rel_tol: float = 1e-8
    expm_tol: float = 1e-12
    #: dense propagator-table resolution (points per unit of rescaled time)
    table_points_per_time: int = 512
    #: outer convolution quadrature: regular panel width and nodes per panel
    conv_panel_width: float = 0.1
    conv_panel_nodes: int = 10
    #: graded panels toward the logarithmic singularity of nu at u = 0
    conv_graded_panels: int = 16
    conv_graded_ratio: float = 0.18
    conv_graded_start: float = 0.05
    #: nodes of the inner (smooth) propagator-product integral
    conv_inner_nodes: int = 48
    #: relative change allowed when the quadrature resolution is doubled
    conv_doubling_rtol: float = 1e-4
    #: |det A| threshold relative to ||A||^2 below which inference fails
    det_a_rtol: float = 1e-12
    #: distance of beta*omega_c/(2*pi) to an integer treated as resonant
    matsubara_resonance_tol: float = 1e-6

    def doubled(self) -> "NumericalSettings":
        """Settings with twice the convolution-quadrature resolution."""
        return replace(
            self,
            conv_panel_nodes=2 * self.conv_panel_nodes,
            conv_graded_panels=self.conv_graded_panels + 4,
            conv_inner_nodes=2 * self.conv_inner_nodes,
        )


@dataclass(frozen=True)
class MeasurementConfig:
    """Rescaled parameters of the open pointer-based measurement.

    Parameters
    ----------
    kappa1, kappa2:
        Rescaled couplings of the system position (momentum) to the first
        (second) pointer momentum.
    mass_ratio:
        Pointer-to-system mass ratio M0 > 0.
    eta:
        Frequency-independent bath viscosity; eta = 0 selects the closed
        (environment-free) measurement.
    omega_c:
        Algebraic cutoff frequency of the Ohmic bath spectral density.
    inv_beta:
        Rescaled thermal energy of the bath.
    """

    kappa1: float = 2.0
    kappa2: float = 2.0
    mass_ratio: float = 1.0
    eta: float = 0.25
    omega_c: float = 20.0
    inv_beta: float = 1.0
    numerical: NumericalSettings = field(default_factory=NumericalSettings)

    @property
    def beta(self) -> float:
        return 1.0 / self.inv_beta


def validate_config(cfg: MeasurementConfig, t_max: float | None = None) -> MeasurementConfig:
    """Check the model invariants and return ``cfg`` unchanged.

    Raises
    ------
    SingularLagrangian
        If kappa2**2 equals the mass ratio (no nonsingular Lagrangian).
    NonPositive
        If the mass ratio, cutoff frequency, or thermal energy is <= 0.
    NegativeViscosity
        If eta < 0.
    """
    if cfg.mass_ratio <= 0:
        raise NonPositive(f"mass_ratio must be > 0, got {cfg.mass_ratio}")
    if cfg.omega_c <= 0:
        raise NonPositive(f"omega_c must be > 0, got {cfg.omega_c}")
    if cfg.inv_beta <= 0:
        raise NonPositive(f"inv_beta must be > 0, got {cfg.inv_beta}")
    if cfg.eta < 0:
        raise NegativeViscosity(f"eta must be >= 0, got {cfg.eta}")
    if cfg.kappa2**2 == cfg.mass_ratio:
        raise SingularLagrangian(
            f"kappa2**2 == mass_ratio ({cfg.mass_ratio}): singular Lagrangian"
        )
    if t_max is not None and cfg.eta > 0 and cfg.omega_c * t_max < 10.0:
        warnings.warn(
            f"omega_c * t_max = {cfg.omega_c * t_max:.3g} is not >> 1; the "
            "high-cutoff renormalization may be inaccurate",
            stacklevel=2,
        )
    return cfg


@dataclass(frozen=True)
class CouplingMatrices:
    """Effective mass matrix M, damping coupling D, and abbreviation a."""

    mass_matrix: np.ndarray
    damping_matrix: np.ndarray
    a: float

    @property
    def mass_inverse(self) -> np.ndarray:
        return np.linalg.inv(self.mass_matrix)


def build_coupling_matrices(cfg: MeasurementConfig) -> CouplingMatrices:
    """Assemble the 3x3 coupling matrices of the equations of motion.

    a = M0 / (kappa2**2 - M0); M mixes the second derivatives of system
    and second pointer, D carries the single velocity coupling kappa1.
    """
    m0 = cfg.mass_ratio
    a = m0 / (cfg.kappa2**2 - m0)
    mass = np.array(
        [
            [-a, 0.0, a * cfg.kappa2],
            [0.0, m0, 0.0],
            [a * cfg.kappa2, 0.0, -a * m0],
        ]
    )
    damping = np.zeros((3, 3))
    damping[1, 0] = cfg.kappa1
    return CouplingMatrices(mass_matrix=mass, damping_matrix=damping, a=a)


@dataclass(frozen=True)
class GaussianMoments:
    """First and symmetrized second moments of the initial Gaussian states.

    ``cov_j`` is the 4x4 covariance of J = (X1, X2, P1, P2) at t = 0;
    ``var_xs0`` and ``var_ps0`` are the initial system variances.
    """

    mean_j: np.ndarray
    cov_j: np.ndarray
    var_xs0: float
    var_ps0: float

    @property
    def dx_s0(self) -> float:
        return float(np.sqrt(self.var_xs0))

    @property
    def dp_s0(self) -> float:
        return float(np.sqrt(self.var_ps0))


def _check_pair(var_x: float, var_p: float, corr: float, label: str) -> None:
    if var_x <= 0 or var_p <= 0:
        raise NonPositive(f"{label}: variances must be > 0")
    if var_x * var_p < 0.25 + corr**2 - 1e-12:
        raise UncertaintyViolation(
            f"{label}: DX^2*DP^2 = {var_x * var_p:.6g} < 1/4 + c^2 "
            f"= {0.25 + corr**2:.6g}"
        )


def gaussian_state_moments(
    system_position_variance: float = 1.0,
    pointer_position_variances: tuple[float, float] = (1.0, 1.0),
    system_momentum_variance: float | None = None,
    pointer_momentum_variances: tuple[float, float] | None = None,
    pointer_correlations: tuple[float, float] = (0.0, 0.0),
) -> GaussianMoments:
    """Moments of initially uncorrelated Gaussian system and pointer states.

    By default each state is a pure Gaussian with a real-valued wave
    function, so the momentum variance is the minimum-uncertainty value
    1/(4*DX^2) and the symmetrized position-momentum correlation vanishes.
    Explicit momentum variances or correlations may be supplied as long as
    DX^2*DP^2 >= 1/4 + c^2 holds per state.
    """
    vxs = float(system_position_variance)
    vps = 0.25 / vxs if system_momentum_variance is None else float(system_momentum_variance)
    _check_pair(vxs, vps, 0.0, "system")

    vx1, vx2 = (float(v) for v in pointer_position_variances)
    if pointer_momentum_variances is None:
        vp1, vp2 = 0.25 / vx1, 0.25 / vx2
    else:
        vp1, vp2 = (float(v) for v in pointer_momentum_variances)
    c1, c2 = (float(c) for c in pointer_correlations)
    _check_pair(vx1, vp1, c1, "pointer 1")
    _check_pair(vx2, vp2, c2, "pointer 2")

    cov = np.diag([vx1, vx2, vp1, vp2]).astype(float)
    cov[0, 2] = cov[2, 0] = c1
    cov[1, 3] = cov[3, 1] = c2
    return GaussianMoments(
        mean_j=np.zeros(4), cov_j=cov, var_xs0=vxs, var_ps0=vps
    )


def require_zero_mean(moments: GaussianMoments) -> GaussianMoments:
    """Reject nonzero initial pointer means instead of silently biasing."""
    if np.any(moments.mean_j != 0.0):
        raise NonZeroMean("initial pointer means must be zero")
    return moments


def rescale_physical(
    system_mass: float,
    pointer_mass: float,
    kappa1: float,
    kappa2: float,
    eta: float,
    omega_c: float,
    inv_beta: float,
    var_xs0: float,
    var_ps0: float,
    hbar: float = 1.0,
    numerical: NumericalSettings | None = None,
) -> MeasurementConfig:
    """Convert laboratory-unit parameters to the rescaled configuration.

    The characteristic time is T = DX_S(0) * M_S / DP_S(0) and the
    characteristic length lambda = sqrt(T*hbar/M_S).  Couplings map as
    kappa1' = kappa1*T*M/M_S and kappa2' = kappa2*M, the viscosity as
    eta' = eta*T/M_S, frequencies as omega' = omega*T, and the thermal
    energy as beta'^{-1} = beta^{-1}*T/hbar.
    """
    if system_mass <= 0 or pointer_mass <= 0:
        raise NonPositive("masses must be > 0")
    if var_xs0 <= 0 or var_ps0 <= 0:
        raise NonPositive("initial system variances must be > 0")
    T = np.sqrt(var_xs0) * system_mass / np.sqrt(var_ps0)
    return MeasurementConfig(
        kappa1=kappa1 * T * pointer_mass / system_mass,
        kappa2=kappa2 * pointer_mass,
        mass_ratio=pointer_mass / system_mass,
        eta=eta * T / system_mass,
        omega_c=omega_c * T,
        inv_beta=inv_beta * T / hbar,
        numerical=numerical or NumericalSettings(),
    )


def unrescale_config(
    cfg: MeasurementConfig,
    system_mass: float,
    var_xs0: float,
    var_ps0: float,
    hbar: float = 1.0,
) -> dict:
    """Invert :func:`rescale_physical` given the physical system scales."""
    if system_mass <= 0 or var_xs0 <= 0 or var_ps0 <= 0:
        raise NonPositive("physical scales must be > 0")
    T = np.sqrt(var_xs0) * system_mass / np.sqrt(var_ps0)
    pointer_mass = cfg.mass_ratio * system_mass
    return {
        "system_mass": system_mass,
        "pointer_mass": pointer_mass,
        "kappa1": cfg.kappa1 * system_mass / (T * pointer_mass),
        "kappa2": cfg.kappa2 / pointer_mass,
        "eta": cfg.eta * system_mass / T,
        "omega_c": cfg.omega_c / T,
        "inv_beta": cfg.inv_beta * hbar / T,
        "var_xs0": var_xs0,
        "var_ps0": var_ps0,
    }
