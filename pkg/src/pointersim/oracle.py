"""Independent brute-force validators for the continuum pipeline.

Two oracles are provided: the exact polynomial propagators of the closed
(eta = 0) measurement, obtained by hand integration of the Heisenberg
equations, and a discrete bath of N harmonic oscillators per pointer whose
full Gaussian covariance is evolved symplectically under the complete
quadratic Hamiltonian.  The discrete bath contains the potential shift and
the slip term, so it validates the RAW (unrenormalized) continuum
dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import ExpNonConvergence, InsufficientModes
from .kernels import BathKernel, dissipation_kernel_scalar
from .model import GaussianMoments, MeasurementConfig
from .noise import PropagatorTable, lambda_covariance
from .propagator import build_generator, propagate

__all__ = [
    "DiscreteBath",
    "discretize_bath",
    "reconstructed_dissipation",
    "closed_form_eta0",
    "closed_form_response",
    "build_full_generator",
    "initial_covariance",
    "symplectic_covariance_evolution",
    "symplectic_form",
    "discrete_pointer_covariance",
    "continuum_pointer_covariance",
]


# ---------------------------------------------------------------------------
# closed (eta = 0) measurement: exact polynomial propagators


def closed_form_eta0(cfg: MeasurementConfig, t: float):
    """Exact (K, G, Gdot) of the closed measurement at time t.

    The pointer momenta are conserved, the system momentum is linear in t,
    and the positions are polynomials of degree up to three; the
    coefficient tables below follow from direct integration of
    dX_S/dt = P_S + (k2/M0) P_2, dX_1/dt = P_1/M0 + (k1/M0) X_S,
    dX_2/dt = P_2/M0 + (k2/M0) P_S, dP_S/dt = -(k1/M0) P_1.
    """
    k1, k2, m0 = cfg.kappa1, cfg.kappa2, cfg.mass_ratio
    k = np.array(
        [
            [1.0, 0.0, 0.0],
            [k1 / m0 * t, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ]
    )
    g = np.array(
        [
            [t, -k1 / (2 * m0) * t**2, k2 / m0 * t],
            [
                k1 / (2 * m0) * t**2,
                t / m0 - k1**2 / (6 * m0**2) * t**3,
                k1 * k2 / (2 * m0**2) * t**2,
            ],
            [k2 / m0 * t, -k1 * k2 / (2 * m0**2) * t**2, t / m0],
        ]
    )
    gdot = np.array(
        [
            [1.0, -k1 / m0 * t, k2 / m0],
            [k1 / m0 * t, 1.0 / m0 - k1**2 / (2 * m0**2) * t**2, k1 * k2 / m0**2 * t],
            [k2 / m0, -k1 * k2 / m0**2 * t, 1.0 / m0],
        ]
    )
    return k, g, gdot


def closed_form_response(cfg: MeasurementConfig, t: float):
    """A(t), B(t), det A of the closed measurement; det A = k1*k2*t^2/M0^2."""
    k, g, _ = closed_form_eta0(cfg, t)
    a = np.array([[k[1, 0], g[1, 0]], [k[2, 0], g[2, 0]]])
    b = np.array(
        [
            [k[1, 1], k[1, 2], g[1, 1], g[1, 2]],
            [k[2, 1], k[2, 2], g[2, 1], g[2, 2]],
        ]
    )
    return a, b, cfg.kappa1 * cfg.kappa2 * t**2 / cfg.mass_ratio**2


# ---------------------------------------------------------------------------
# discrete bath


@dataclass(frozen=True)
class DiscreteBath:
    """Two disjoint N-oscillator baths, one per pointer (bath mass 1).

    The first ``n_modes`` entries sit on a linear grid up to ``omega_max``
    and resolve the dynamics.  When ``has_tail`` is set, one extra stiff
    mode follows; it carries the static potential shift of the spectral
    tail beyond the cutoff, which acts adiabatically on the slow degrees
    of freedom.  Without it the shift error decays only like 1/omega_max
    and is amplified exponentially by the unstable inverted-potential
    dynamics.
    """

    n_modes: int
    omega_max: float
    frequencies: np.ndarray  # (N,) or (N+1,) with the tail mode last
    couplings: np.ndarray  # coupling g_j of mode j to its pointer
    has_tail: bool = False

    @property
    def mode_spacing(self) -> float:
        return self.omega_max / self.n_modes

    @property
    def recurrence_time(self) -> float:
        return 2.0 * np.pi / self.mode_spacing

    @property
    def potential_shift(self) -> float:
        """Total bath-induced static potential shift sum_j g_j^2/omega_j^2."""
        return float(np.sum(self.couplings**2 / self.frequencies**2))


def reconstructed_dissipation(bath: DiscreteBath, t, resolved_only: bool = True):
    """mu_N(t) = sum_j g_j^2/omega_j * sin(omega_j t) of the discrete sum.

    By default only the resolved linear-grid modes enter: the tail mode
    oscillates far above the band of interest and is excluded from
    pointwise kernel comparisons.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    n = bath.n_modes if resolved_only else bath.frequencies.size
    w, g2 = bath.frequencies[:n], bath.couplings[:n] ** 2
    return np.sin(np.outer(t, w)) @ (g2 / w)


def discretize_bath(
    cfg: MeasurementConfig,
    n_modes: int = 400,
    omega_max: float | None = None,
    include_tail: bool = True,
    tail_factor: float = 5.0,
    check_tol: float = 0.03,
    check_window: tuple[float, float] = (0.2, 2.0),
) -> DiscreteBath:
    """Equal-spacing midpoint discretization of the Ohmic spectral density.

    Mode couplings are g_j^2 = omega_j * I(omega_j) * d_omega so that the
    discrete sine sum reproduces the continuum dissipation kernel.  The
    default cutoff keeps the mode spacing at omega_c / 20 so that the
    recurrence time stays fixed while more modes extend the frequency
    coverage.  With ``include_tail`` one stiff mode at
    ``tail_factor * omega_max`` is appended whose coupling makes the
    total static potential shift exactly eta * omega_c; its dynamical
    effect on the slow modes is of order (omega / omega_tail)^2.  The
    kernel reconstruction is verified on ``check_window`` (which must end
    before the recurrence time); failure raises
    :class:`InsufficientModes`.
    """
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    omega_max = omega_max or n_modes * cfg.omega_c / 20.0
    if omega_max <= cfg.omega_c:
        raise ValueError("omega_max must exceed omega_c")
    dw = omega_max / n_modes
    w = (np.arange(n_modes) + 0.5) * dw
    kernel = BathKernel(eta=cfg.eta, omega_c=cfg.omega_c, inv_beta=cfg.inv_beta)
    dens = (2.0 * cfg.eta / np.pi) * w / (w**2 / cfg.omega_c**2 + 1.0)
    g2 = w * dens * dw
    if include_tail and cfg.eta > 0:
        w_tail = tail_factor * omega_max
        g2_tail = w_tail**2 * (cfg.eta * cfg.omega_c - np.sum(g2 / w**2))
        if g2_tail < 0:
            raise InsufficientModes("discrete shift exceeds the continuum value")
        w = np.append(w, w_tail)
        g2 = np.append(g2, g2_tail)
    bath = DiscreteBath(
        n_modes=n_modes,
        omega_max=omega_max,
        frequencies=w,
        couplings=np.sqrt(g2),
        has_tail=include_tail and cfg.eta > 0,
    )

    if cfg.eta > 0:
        if bath.recurrence_time < 2.0 * check_window[1]:
            raise InsufficientModes(
                f"recurrence time {bath.recurrence_time:.3g} shorter than "
                f"2x the validation window end {check_window[1]}"
            )
        ts = np.linspace(*check_window, 64)
        mu_n = reconstructed_dissipation(bath, ts)
        mu = np.asarray(dissipation_kernel_scalar(ts, kernel))
        err = float(np.max(np.abs(mu_n - mu))) / float(
            dissipation_kernel_scalar(0.0, kernel)
        )
        if err > check_tol:
            raise InsufficientModes(
                f"discrete dissipation kernel off by {err:.3g} (> {check_tol}) "
                f"on t in {list(check_window)}"
            )
    return bath


def build_full_generator(cfg: MeasurementConfig, bath: DiscreteBath) -> np.ndarray:
    """Classical-equations generator F of the complete quadratic model.

    State ordering: (X_S, X_1, X_2, q_(bath 1), q_(bath 2),
    P_S, P_1, P_2, k_(bath 1), k_(bath 2)); F = J_c H with the canonical
    antisymmetric form J_c and the symmetric Hamiltonian matrix H.
    """
    n = bath.frequencies.size
    d = 3 + 2 * n  # positions
    h = np.zeros((2 * d, 2 * d))
    k1, k2, m0 = cfg.kappa1, cfg.kappa2, cfg.mass_ratio

    ip = d  # momentum offset
    h[ip + 0, ip + 0] = 1.0
    h[ip + 1, ip + 1] = 1.0 / m0
    h[ip + 2, ip + 2] = 1.0 / m0
    h[0, ip + 1] = h[ip + 1, 0] = k1 / m0
    h[ip + 0, ip + 2] = h[ip + 2, ip + 0] = k2 / m0
    for b, ptr in ((0, 1), (1, 2)):  # bath b couples to pointer index ptr
        idx = np.arange(3 + b * n, 3 + (b + 1) * n)
        h[idx, idx] = bath.frequencies**2
        h[idx + d, idx + d] = 1.0
        h[idx, ptr] = bath.couplings
        h[ptr, idx] = bath.couplings
    jc = symplectic_form(d)
    return jc @ h


def symplectic_form(d: int) -> np.ndarray:
    """Canonical antisymmetric form for (positions, momenta) ordering."""
    j = np.zeros((2 * d, 2 * d))
    j[:d, d:] = np.eye(d)
    j[d:, :d] = -np.eye(d)
    return j


def thermal_mode_variances(bath: DiscreteBath, inv_beta: float):
    """Per-mode thermal (q, k) variances, coth(beta*w/2)/(2w) and w*.../2."""
    occ = 1.0 / np.tanh(0.5 * bath.frequencies / inv_beta)
    return occ / (2.0 * bath.frequencies), 0.5 * bath.frequencies * occ


def initial_covariance(
    cfg: MeasurementConfig, moments: GaussianMoments, bath: DiscreteBath
) -> np.ndarray:
    """Block-diagonal initial covariance: product state times thermal bath."""
    n = bath.frequencies.size
    d = 3 + 2 * n
    sig = np.zeros((2 * d, 2 * d))
    cj = moments.cov_j
    # system and pointers
    sig[0, 0] = moments.var_xs0
    sig[d, d] = moments.var_ps0
    sig[1, 1], sig[2, 2] = cj[0, 0], cj[1, 1]
    sig[d + 1, d + 1], sig[d + 2, d + 2] = cj[2, 2], cj[3, 3]
    sig[1, d + 1] = sig[d + 1, 1] = cj[0, 2]
    sig[2, d + 2] = sig[d + 2, 2] = cj[1, 3]
    # thermal bath, twice (two disjoint baths)
    vq, vk = thermal_mode_variances(bath, cfg.inv_beta)
    for b in range(2):
        idx = np.arange(3 + b * n, 3 + (b + 1) * n)
        sig[idx, idx] = vq
        sig[idx + d, idx + d] = vk
    return sig


def symplectic_covariance_evolution(
    generator: np.ndarray, sigma0: np.ndarray, t: float
) -> np.ndarray:
    """Sigma(t) = S Sigma(0) S^T with S = exp(F t)."""
    s = expm(generator * t)
    if not np.all(np.isfinite(s)):
        raise ExpNonConvergence(f"flow matrix not finite at t = {t}")
    return s @ sigma0 @ s.T


def discrete_pointer_covariance(
    cfg: MeasurementConfig,
    moments: GaussianMoments,
    bath: DiscreteBath,
    times: np.ndarray,
) -> np.ndarray:
    """Pointer-position 2x2 covariance blocks on a uniform time grid.

    The grid must be uniformly spaced starting at its step (t_m = m*dt);
    the covariance is advanced stepwise with a single matrix exponential.
    """
    times = np.asarray(times, dtype=float)
    dt = times[0]
    if not np.allclose(np.diff(times), dt, rtol=1e-9, atol=1e-12):
        raise ValueError("times must be a uniform grid t_m = m*dt")
    f = build_full_generator(cfg, bath)
    step = expm(f * dt)
    if not np.all(np.isfinite(step)):
        raise ExpNonConvergence("flow step matrix not finite")
    sig = initial_covariance(cfg, moments, bath)
    out = np.empty((times.size, 2, 2))
    for m in range(times.size):
        sig = step @ sig @ step.T
        out[m] = sig[1:3, 1:3]
    return out


def continuum_pointer_covariance(
    cfg: MeasurementConfig,
    moments: GaussianMoments,
    times: np.ndarray,
    mode: str = "raw",
) -> np.ndarray:
    """Pointer-position covariance from the continuum propagator pipeline."""
    times = np.asarray(times, dtype=float)
    gen = build_generator(cfg, mode)
    kernel = BathKernel(eta=cfg.eta, omega_c=cfg.omega_c, inv_beta=cfg.inv_beta)
    table = (
        PropagatorTable(gen, float(times.max()), cfg.numerical) if cfg.eta > 0 else None
    )
    cj = moments.cov_j
    cov_x = np.diag([moments.var_xs0, cj[0, 0], cj[1, 1]])
    cov_p = np.diag([moments.var_ps0, cj[2, 2], cj[3, 3]])
    cov_xp = np.diag([0.0, cj[0, 2], cj[1, 3]])
    out = np.empty((times.size, 2, 2))
    for i, t in enumerate(times):
        k, g, _ = propagate(gen, float(t))
        full = (
            k @ cov_x @ k.T
            + g @ cov_p @ g.T
            + k @ cov_xp @ g.T
            + g @ cov_xp.T @ k.T
        )
        block = full[1:3, 1:3]
        if cfg.eta > 0:
            block = block + lambda_covariance(table, kernel, float(t))
        out[i] = block
    return out
