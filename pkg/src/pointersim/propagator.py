"""Time-domain propagators of the generalized Langevin dynamics.

The exponential memory kernel turns the integro-differential equations of
motion into a constant-coefficient first-order system with two auxiliary
memory variables, one per pointer.  Matrix exponentials of the augmented
generator then yield the position propagators K(t), G(t), their time
derivative, and the 2x2 / 2x4 response matrices A(t) and B(t) used for
the inference of the system observables.

State ordering of the augmented system: (X_S, X_1, X_2, V_S, V_1, V_2,
y_1, y_2) with velocities V = dX/dt and memory variables y that start at
zero.  In "renormalized" mode y accumulates the velocity convolution
eta*omega_c * int exp(-omega_c(t-s)) V_k(s) ds; in "raw" mode it holds the
position convolution with the full dissipation kernel (potential shift
and slip term retained).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import ExpNonConvergence, SingularMass
from .model import CouplingMatrices, MeasurementConfig, build_coupling_matrices

__all__ = [
    "AugmentedGenerator",
    "PropagatorSet",
    "build_generator",
    "propagate",
    "propagate_grid",
    "response_matrices",
]

#: selection matrix sending the two pointer components into 3-vectors
_S_SEL = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


@dataclass(frozen=True)
class AugmentedGenerator:
    """Constant-coefficient generator of the augmented linear system."""

    mode: str
    generator: np.ndarray  # (n, n)
    noise_map: np.ndarray  # (n, 3): injects the stochastic force
    coupling: CouplingMatrices
    cfg: MeasurementConfig

    @property
    def dim(self) -> int:
        return self.generator.shape[0]


def _second_order_blocks(cfg: MeasurementConfig, coup: CouplingMatrices):
    """M^-1 times the position and velocity couplings of the bare dynamics."""
    m_inv = coup.mass_inverse
    if not np.all(np.isfinite(m_inv)):
        raise SingularMass("effective mass matrix is singular")
    d = coup.damping_matrix
    pos = (cfg.kappa1**2 / cfg.mass_ratio) * np.outer(
        np.array([1.0, 0.0, 0.0]), np.array([1.0, 0.0, 0.0])
    )
    vel = d - d.T
    return m_inv, m_inv @ pos, m_inv @ vel


def build_generator(cfg: MeasurementConfig, mode: str = "renormalized") -> AugmentedGenerator:
    """Assemble the augmented generator for the requested dynamics mode.

    For eta = 0 no memory variables are needed and the generator reduces
    to the closed (nilpotent) position/velocity dynamics.
    """
    if mode not in ("renormalized", "raw"):
        raise ValueError(f"unknown mode: {mode!r}")
    coup = build_coupling_matrices(cfg)
    m_inv, pos, vel = _second_order_blocks(cfg, coup)
    eta, wc = cfg.eta, cfg.omega_c

    if eta == 0.0:
        n = 6
        gen = np.zeros((n, n))
        gen[0:3, 3:6] = np.eye(3)
        gen[3:6, 0:3] = pos
        gen[3:6, 3:6] = vel
    else:
        n = 8
        gen = np.zeros((n, n))
        gen[0:3, 3:6] = np.eye(3)
        gen[3:6, 0:3] = pos
        gen[3:6, 3:6] = vel
        if mode == "renormalized":
            # memory term enters the force with a minus sign
            gen[3:6, 6:8] = -m_inv @ _S_SEL
            gen[6:8, 3:6] = eta * wc * _S_SEL.T
        else:
            # raw position convolution adds to the force
            gen[3:6, 6:8] = m_inv @ _S_SEL
            gen[6:8, 0:3] = eta * wc**2 * _S_SEL.T
        gen[6:8, 6:8] = -wc * np.eye(2)

    noise = np.zeros((n, 3))
    noise[3:6, :] = m_inv
    return AugmentedGenerator(
        mode=mode, generator=gen, noise_map=noise, coupling=coup, cfg=cfg
    )


def _checked_expm(gen: AugmentedGenerator, t: float) -> np.ndarray:
    e = expm(gen.generator * t)
    if not np.all(np.isfinite(e)):
        raise ExpNonConvergence(f"matrix exponential not finite at t = {t}")
    return e


def _extract(gen: AugmentedGenerator, e: np.ndarray):
    """K, G, Gdot from one augmented matrix exponential.

    Positions respond to initial positions both directly and through the
    initial velocities V(0) = M^-1 (P(0) + D X(0)), hence
    K = E_xx + G D with G = E_xv M^-1; Gdot comes from the velocity rows.
    """
    m_inv = gen.coupling.mass_inverse
    d = gen.coupling.damping_matrix
    g = e[0:3, 3:6] @ m_inv
    k = e[0:3, 0:3] + g @ d
    gdot = e[3:6, 3:6] @ m_inv
    return k, g, gdot


def propagate(gen: AugmentedGenerator, t: float):
    """Propagators (K(t), G(t), Gdot(t)) at a single time t >= 0."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return _extract(gen, _checked_expm(gen, t))


def kdot(gen: AugmentedGenerator, t: float) -> np.ndarray:
    """Time derivative of K, from the velocity rows of the exponential."""
    e = _checked_expm(gen, t)
    m_inv = gen.coupling.mass_inverse
    d = gen.coupling.damping_matrix
    return e[3:6, 0:3] + (e[3:6, 3:6] @ m_inv) @ d


def consistency_residual(gen: AugmentedGenerator, t: float) -> float:
    """|| K - (Gdot M + G D^T) || / (1 + ||K||), the cross-check relation."""
    k, g, gd = propagate(gen, t)
    m = gen.coupling.mass_matrix
    d = gen.coupling.damping_matrix
    alt = gd @ m + g @ d.T
    return float(np.linalg.norm(k - alt) / (1.0 + np.linalg.norm(k)))


@dataclass(frozen=True)
class PropagatorSet:
    """Propagators sampled on an explicit time grid."""

    times: np.ndarray  # (n,)
    k: np.ndarray  # (n, 3, 3)
    g: np.ndarray  # (n, 3, 3)
    gdot: np.ndarray  # (n, 3, 3)

    def at(self, i: int):
        return self.k[i], self.g[i], self.gdot[i]


def propagate_grid(gen: AugmentedGenerator, times: np.ndarray) -> PropagatorSet:
    """Propagators on a (possibly non-uniform) time grid."""
    times = np.asarray(times, dtype=float)
    k = np.empty((times.size, 3, 3))
    g = np.empty_like(k)
    gd = np.empty_like(k)
    for i, t in enumerate(times):
        k[i], g[i], gd[i] = propagate(gen, float(t))
    return PropagatorSet(times=times, k=k, g=g, gdot=gd)


def response_matrices(k: np.ndarray, g: np.ndarray):
    """Response matrix A, inhomogeneity B, and det A from K(t), G(t).

    A maps the initial system phase-space point onto the pointer
    positions; B carries the pointer-state leakage.
    """
    a = np.array([[k[1, 0], g[1, 0]], [k[2, 0], g[2, 0]]])
    b = np.array(
        [
            [k[1, 1], k[1, 2], g[1, 1], g[1, 2]],
            [k[2, 1], k[2, 2], g[2, 1], g[2, 2]],
        ]
    )
    det_a = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    return a, b, float(det_a)
