"""Optimal measurement times and thermal-energy sweeps.

A coarse geometric scan guards against missed basins; golden-section
refinement then locates the minimum of the scalar uncertainty landscape.
Everything is deterministic: identical inputs give identical results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BoundaryMinimum
from .model import GaussianMoments, MeasurementConfig
from .uncertainty import CurveEvaluator

__all__ = ["Optimum", "SweepResult", "golden_section", "find_optimal_time", "thermal_sweep"]

_INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Optimum:
    """Result of a single optimal-time search."""

    t_opt: float
    u_sq_min: float
    multiple_minima: bool = False
    #: coarse-grid candidates (t, value) within 1% of the best local minimum
    candidates: tuple = ()


@dataclass(frozen=True)
class SweepResult:
    """Per-thermal-energy optima of a sweep."""

    inv_betas: np.ndarray
    t_opt: np.ndarray
    u_sq_min: np.ndarray
    flags: tuple = ()
    grid_info: dict = field(default_factory=dict)


def golden_section(f, a: float, b: float, rel_tol: float = 1e-5):
    """Golden-section search for the minimum of a unimodal f on [a, b]."""
    h = b - a
    c = b - _INV_PHI * h
    d = a + _INV_PHI * h
    fc, fd = f(c), f(d)
    while h > rel_tol * max(abs(a), abs(b)):
        if fc < fd:
            b, d, fd = d, c, fc
            h = b - a
            c = b - _INV_PHI * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + _INV_PHI * h
            fd = f(d)
    t = c if fc < fd else d
    return t, (fc if fc < fd else fd)


def find_optimal_time(
    evaluator,
    t_interval: tuple[float, float] = (0.02, 3.0),
    coarse_points: int = 60,
    rel_tol: float = 1e-5,
) -> Optimum:
    """Locate the global minimum of a scalar landscape on (0, t_max].

    ``evaluator`` is a callable t -> value (e.g. ``CurveEvaluator.u_sq``).
    The coarse grid is geometric, dense near the t -> 0 divergence.  A
    minimum sitting on an interval edge raises :class:`BoundaryMinimum`;
    near-degenerate local minima are reported, not resolved.
    """
    lo, hi = t_interval
    if not 0.0 < lo < hi:
        raise ValueError("interval must satisfy 0 < lo < hi")
    grid = np.geomspace(lo, hi, coarse_points)
    vals = np.array([evaluator(float(t)) for t in grid])

    best = int(vals.argmin())
    if best == 0 or best == coarse_points - 1:
        raise BoundaryMinimum(
            f"minimum at interval edge t = {grid[best]:.6g}; widen the interval"
        )

    interior = np.arange(1, coarse_points - 1)
    local = interior[
        (vals[interior] <= vals[interior - 1]) & (vals[interior] <= vals[interior + 1])
    ]
    near = [
        (float(grid[i]), float(vals[i]))
        for i in local
        if vals[i] <= vals[best] * 1.01
    ]
    multiple = len(near) > 1

    t_opt, u_min = golden_section(
        evaluator, float(grid[best - 1]), float(grid[best + 1]), rel_tol
    )
    return Optimum(
        t_opt=float(t_opt),
        u_sq_min=float(u_min),
        multiple_minima=multiple,
        candidates=tuple(near) if multiple else (),
    )


def thermal_sweep(
    cfg: MeasurementConfig,
    moments: GaussianMoments,
    inv_betas,
    t_interval: tuple[float, float] = (0.02, 3.0),
    mode: str = "renormalized",
    coarse_points: int = 60,
    rel_tol: float = 1e-5,
    max_workers: int = 1,
) -> SweepResult:
    """Optimal measurement time and minimal uncertainty per thermal energy.

    The propagator table is shared across the sweep: the dynamics do not
    depend on the thermal energy, only the noise covariance does.
    """
    inv_betas = np.asarray(inv_betas, dtype=float)
    if np.any(inv_betas <= 0) or np.any(np.diff(inv_betas) < 0):
        raise ValueError("inv_beta values must be positive and ascending")
    base = CurveEvaluator(cfg, moments, t_interval[1], mode)

    def one(ib: float):
        ev = base.with_inv_beta(float(ib))
        flag = ""
        try:
            opt = find_optimal_time(ev.u_sq, t_interval, coarse_points, rel_tol)
        except BoundaryMinimum as exc:
            return np.nan, np.nan, f"boundary_minimum: {exc}"
        if opt.multiple_minima:
            flag = f"multiple_minima: {opt.candidates}"
        return opt.t_opt, opt.u_sq_min, flag

    if max_workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(one, inv_betas))
    else:
        rows = [one(ib) for ib in inv_betas]

    t_opt = np.array([r[0] for r in rows])
    u_min = np.array([r[1] for r in rows])
    flags = tuple(
        (float(ib), r[2]) for ib, r in zip(inv_betas, rows) if r[2]
    )
    return SweepResult(
        inv_betas=inv_betas,
        t_opt=t_opt,
        u_sq_min=u_min,
        flags=flags,
        grid_info={
            "t_interval": list(t_interval),
            "coarse_points": coarse_points,
            "rel_tol": rel_tol,
            "mode": mode,
        },
    )
