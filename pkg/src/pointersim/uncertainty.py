"""Inferred-observable variances, collective uncertainty, and its bound.

The variance of the inferred position (momentum) observable decomposes
into three parts: the initial system variance, the pointer-state
contribution sigma_k^2, and the environmental noise contribution Xi_k^2.
The collective uncertainty is the product of the two inferred variances,
bounded from below by a state-dependent extension of the closed
measurement bound U^2 >= 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularInference
from .kernels import BathKernel
from .model import GaussianMoments, MeasurementConfig, require_zero_mean
from .noise import PropagatorTable, lambda_covariance, xi_matrix
from .propagator import build_generator, propagate, response_matrices

__all__ = [
    "UncertaintyPoint",
    "UncertaintyCurve",
    "pointer_contributions",
    "inferred_variances",
    "collective_uncertainty",
    "expanded_uncertainty",
    "lower_bound",
    "wodkiewicz_f",
    "matching_distance",
    "CurveEvaluator",
    "uncertainty_curve",
]


def pointer_contributions(a: np.ndarray, b: np.ndarray, cov_j: np.ndarray):
    """Pointer-state contributions sigma_1^2, sigma_2^2.

    sigma_k^2 = v_k cov_J v_k^T with rows v_k of A^-1 B.
    """
    det_a = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if abs(det_a) <= 1e-12 * max(np.linalg.norm(a) ** 2, 1e-300):
        raise SingularInference(f"det A = {det_a:.3g} too small for inference")
    v = np.linalg.solve(a, b)  # (2, 4)
    s1 = float(v[0] @ cov_j @ v[0])
    s2 = float(v[1] @ cov_j @ v[1])
    return s1, s2


def inferred_variances(
    moments: GaussianMoments,
    sigma1_sq: float,
    sigma2_sq: float,
    xi1_sq: float,
    xi2_sq: float,
):
    """Three-part sums for the inferred position and momentum variances."""
    var_x = moments.var_xs0 + sigma1_sq + xi1_sq
    var_p = moments.var_ps0 + sigma2_sq + xi2_sq
    return var_x, var_p


def collective_uncertainty(var_x: float, var_p: float) -> float:
    """U^2, the product of the inferred variances."""
    return var_x * var_p


def expanded_uncertainty(
    moments: GaussianMoments,
    sigma1_sq: float,
    sigma2_sq: float,
    xi1_sq: float,
    xi2_sq: float,
) -> float:
    """Five-term expanded form of U^2; algebraically identical to the
    product form and used as a consistency oracle."""
    dx, dp = moments.dx_s0, moments.dp_s0
    s1, s2 = np.sqrt(sigma1_sq), np.sqrt(sigma2_sq)
    return (
        (dx * s2 - dp * s1) ** 2
        + 0.5 * xi2_sq * ((dx + s1) ** 2 + (dx - s1) ** 2)
        + xi1_sq * xi2_sq
        + (dx * dp + s1 * s2) ** 2
        + 0.5 * xi1_sq * ((dp + s2) ** 2 + (dp - s2) ** 2)
    )


def lower_bound(
    moments: GaussianMoments,
    sigma1_sq: float,
    sigma2_sq: float,
    xi1_sq: float,
    xi2_sq: float,
) -> float:
    """State-dependent lower bound of the collective uncertainty.

    bound = 1 + Xi1^2 Xi2^2 + (Xi2^2/2)(DX_S(0) + sigma1)^2
              + (Xi1^2/2)(DP_S(0) + sigma2)^2
    evaluated with the actual time-dependent sigma_k and Xi_k^2.
    """
    s1, s2 = np.sqrt(sigma1_sq), np.sqrt(sigma2_sq)
    return (
        1.0
        + xi1_sq * xi2_sq
        + 0.5 * xi2_sq * (moments.dx_s0 + s1) ** 2
        + 0.5 * xi1_sq * (moments.dp_s0 + s2) ** 2
    )


def wodkiewicz_f(u_min_sq: float):
    """Both branches of f = -1 +/- 2*sqrt(U_min^2)."""
    root = 2.0 * np.sqrt(u_min_sq)
    return (-1.0 - root, -1.0 + root)


def matching_distance(moments: GaussianMoments, sigma1_sq: float, sigma2_sq: float):
    """Diagnostic distance from the bound-saturating matching conditions
    sigma_1 = DX_S(0), sigma_2 = DP_S(0)."""
    return (
        float(np.sqrt(sigma1_sq) - moments.dx_s0),
        float(np.sqrt(sigma2_sq) - moments.dp_s0),
    )


@dataclass(frozen=True)
class UncertaintyPoint:
    """All measurement figures of merit at a single interaction time."""

    t: float
    sigma1_sq: float
    sigma2_sq: float
    xi1_sq: float
    xi2_sq: float
    var_x: float
    var_p: float
    u_sq: float
    bound: float
    det_a: float


@dataclass(frozen=True)
class UncertaintyCurve:
    """Uncertainty figures sampled on a time grid."""

    points: tuple[UncertaintyPoint, ...]

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(p, name) for p in self.points])


class CurveEvaluator:
    """Reusable single-time evaluator for one measurement configuration.

    Builds the augmented generator and the dense propagator table once;
    the bath kernel can be swapped cheaply (the dynamics do not depend on
    the thermal energy, only the noise does).
    """

    def __init__(
        self,
        cfg: MeasurementConfig,
        moments: GaussianMoments,
        t_max: float,
        mode: str = "renormalized",
    ):
        require_zero_mean(moments)
        self.cfg = cfg
        self.moments = moments
        self.mode = mode
        self.gen = build_generator(cfg, mode)
        self.table = (
            PropagatorTable(self.gen, t_max, cfg.numerical) if cfg.eta > 0 else None
        )
        self.kernel = BathKernel(eta=cfg.eta, omega_c=cfg.omega_c, inv_beta=cfg.inv_beta)

    def with_inv_beta(self, inv_beta: float) -> "CurveEvaluator":
        """Shallow copy sharing the propagator table, different bath energy."""
        import copy

        other = copy.copy(self)
        other.kernel = BathKernel(
            eta=self.cfg.eta, omega_c=self.cfg.omega_c, inv_beta=inv_beta
        )
        return other

    def point(self, t: float, settings=None) -> UncertaintyPoint:
        k, g, _ = propagate(self.gen, t)
        a, b, det_a = response_matrices(k, g)
        s1, s2 = pointer_contributions(a, b, self.moments.cov_j)
        if self.cfg.eta > 0:
            lam = lambda_covariance(self.table, self.kernel, t, settings)
            xi = xi_matrix(a, lam, self.cfg.numerical.det_a_rtol)
            xi1, xi2 = float(xi[0, 0]), float(xi[1, 1])
        else:
            xi1 = xi2 = 0.0
        var_x, var_p = inferred_variances(self.moments, s1, s2, xi1, xi2)
        return UncertaintyPoint(
            t=t,
            sigma1_sq=s1,
            sigma2_sq=s2,
            xi1_sq=xi1,
            xi2_sq=xi2,
            var_x=var_x,
            var_p=var_p,
            u_sq=collective_uncertainty(var_x, var_p),
            bound=lower_bound(self.moments, s1, s2, xi1, xi2),
            det_a=det_a,
        )

    def u_sq(self, t: float) -> float:
        return self.point(t).u_sq


def uncertainty_curve(
    cfg: MeasurementConfig,
    moments: GaussianMoments,
    times: np.ndarray,
    mode: str = "renormalized",
    max_workers: int = 1,
) -> UncertaintyCurve:
    """Evaluate the full uncertainty curve on a time grid."""
    times = np.asarray(times, dtype=float)
    ev = CurveEvaluator(cfg, moments, float(times.max()), mode)
    if max_workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            points = list(pool.map(ev.point, [float(t) for t in times]))
    else:
        points = [ev.point(float(t)) for t in times]
    return UncertaintyCurve(points=tuple(points))
