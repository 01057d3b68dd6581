"""Accumulated-noise covariance and the inference-transformed matrix Xi^2.

The pointer components of the accumulated noise are
Lambda_a(t) = int_0^t sum_k G_ak(t-s) xi_k(s) ds with k running over the
two bath-coupled pointer rows, so the symmetrized covariance is the double
convolution of the pointer block of G with the noise autocorrelation nu.

The double integral is reduced to one dimension along the difference
coordinate u = s1 - s2, where the logarithmic singularity of nu lives:

    <Lambda Lambda^T>_ab = int_0^t du nu(u) * (H(u) + H(u)^T)_ab,
    H(u) = int_0^{t-u} G_p(r) G_p(r+u)^T dr,

with G_p the 2x2 pointer block of G.  The outer integral uses
Gauss-Legendre panels with a geometrically graded mesh toward u = 0; the
smooth inner integral uses a fixed Gauss-Legendre rule.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import NegativeEigenvalue, SingularInference
from .kernels import BathKernel, noise_autocorrelation
from .model import NumericalSettings
from .propagator import AugmentedGenerator, propagate

__all__ = ["PropagatorTable", "lambda_covariance", "xi_matrix"]


class PropagatorTable:
    """Dense-grid spline of the pointer block of G for fast quadrature."""

    def __init__(self, gen: AugmentedGenerator, t_max: float, settings: NumericalSettings):
        n = max(16, int(np.ceil(t_max * settings.table_points_per_time))) + 1
        self.times = np.linspace(0.0, t_max, n)
        block = np.empty((n, 2, 2))
        for i, t in enumerate(self.times):
            _, g, _ = propagate(gen, float(t))
            block[i] = g[1:3, 1:3]
        self._spline = CubicSpline(self.times, block, axis=0)
        self.t_max = t_max
        self.gen = gen

    def pointer_block(self, tau) -> np.ndarray:
        """G pointer block at times tau (array-shaped result (..., 2, 2))."""
        return self._spline(np.asarray(tau, dtype=float))


def _gl_nodes(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w  # on [0, 1]


def _u_panels(t: float, settings: NumericalSettings):
    """Panel edges of the outer u-integral on (0, t], graded near zero."""
    u0 = min(settings.conv_graded_start, 0.5 * t)
    edges = [t]
    # regular panels from t down to u0
    n_reg = max(1, int(np.ceil((t - u0) / settings.conv_panel_width)))
    for i in range(1, n_reg):
        edges.append(t - i * (t - u0) / n_reg)
    edges.append(u0)
    # graded panels from u0 toward 0
    lo = u0
    for _ in range(settings.conv_graded_panels):
        lo *= settings.conv_graded_ratio
        edges.append(lo)
    edges.append(0.0)
    return np.array(edges[::-1])  # ascending, starting at 0


def lambda_covariance(
    table: PropagatorTable,
    kernel: BathKernel,
    t: float,
    settings: NumericalSettings | None = None,
) -> np.ndarray:
    """Symmetrized 2x2 covariance of the accumulated pointer noise at t.

    Raises
    ------
    NegativeEigenvalue
        If the result has an eigenvalue below -1e-10 * trace, which
        signals a quadrature failure rather than physics.
    """
    settings = settings or table.gen.cfg.numerical
    if kernel.eta == 0.0 or t == 0.0:
        return np.zeros((2, 2))
    if t > table.t_max * (1.0 + 1e-12):
        raise ValueError(f"t = {t} exceeds the tabulated range {table.t_max}")

    xg, wg = _gl_nodes(settings.conv_panel_nodes)
    xr, wr = _gl_nodes(settings.conv_inner_nodes)
    edges = _u_panels(t, settings)

    cov = np.zeros((2, 2))
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi - lo <= 0.0:
            continue
        u = lo + (hi - lo) * xg  # (nu,)
        wu = (hi - lo) * wg
        nu_vals = noise_autocorrelation(u, kernel)
        # inner integral over r in [0, t-u]
        span = t - u  # (nu,)
        r = span[:, None] * xr[None, :]  # (nu, nr)
        w_in = span[:, None] * wr[None, :]
        g1 = table.pointer_block(r)  # (nu, nr, 2, 2)
        g2 = table.pointer_block(r + u[:, None])
        # H(u)_ab = sum_k int G_ak(r) G_bk(r+u) dr
        h = np.einsum("urak,urbk,ur->uab", g1, g2, w_in)
        sym = h + np.transpose(h, (0, 2, 1))
        cov += np.einsum("u,u,uab->ab", wu, nu_vals, sym)

    cov = 0.5 * (cov + cov.T)
    trace = np.trace(cov)
    min_eig = float(np.linalg.eigvalsh(cov)[0])
    if min_eig < -1e-10 * max(trace, 1e-300):
        raise NegativeEigenvalue(
            f"noise covariance eigenvalue {min_eig:.3g} below PSD tolerance "
            f"(trace {trace:.3g})"
        )
    return cov


def xi_matrix(
    a: np.ndarray,
    lambda_cov: np.ndarray,
    det_rtol: float = 1e-12,
) -> np.ndarray:
    """Congruence transform Xi^2 = A^-1 <Lambda Lambda^T> A^-T.

    Raises SingularInference when |det A| is below det_rtol * ||A||^2.
    """
    det_a = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    scale = np.linalg.norm(a) ** 2
    if abs(det_a) <= det_rtol * max(scale, 1e-300):
        raise SingularInference(f"det A = {det_a:.3g} too small for inference")
    a_inv = np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]]) / det_a
    return a_inv @ lambda_cov @ a_inv.T
