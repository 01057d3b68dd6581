"""Command-line interface: config ingestion, pipeline runs, CSV emission.

Subcommands: ``uncertainty`` (time series of all figures of merit),
``optimize`` (single optimal-time search), ``sweep`` (thermal-energy
sweep), ``validate`` (self-check gates against the independent oracles).
All numeric output is deterministic: identical configs give byte-identical
files.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .errors import BoundaryMinimum, ConfigError, NumericalError, PointerSimError
from .kernels import (
    BathKernel,
    dissipation_from_spectral_density,
    dissipation_kernel_scalar,
    noise_autocorrelation,
)
from .model import MeasurementConfig, gaussian_state_moments, validate_config
from .optimize import find_optimal_time, thermal_sweep
from .uncertainty import CurveEvaluator, uncertainty_curve
from .propagator import build_generator, propagate, response_matrices
from . import oracle

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_GATE = 4

_CURVE_COLUMNS = (
    "t",
    "var_x",
    "var_p",
    "u_sq",
    "bound",
    "sigma1_sq",
    "sigma2_sq",
    "xi1_sq",
    "xi2_sq",
    "det_a",
)
_SWEEP_COLUMNS = ("inv_beta", "t_opt", "u_sq_min")

_DEFAULT_CONFIG = {
    "kappa1": 2.0,
    "kappa2": 2.0,
    "mass_ratio": 1.0,
    "eta": 0.25,
    "omega_c": 20.0,
    "inv_beta": 1.0,
    "state": {
        "system_position_variance": 1.0,
        "pointer_position_variances": [1.0, 1.0],
    },
    "time_grid": {"start": 0.02, "stop": 3.0, "count": 200, "spacing": "linear"},
    "optimize": {"t_interval": [0.02, 3.0], "coarse_points": 60, "rel_tol": 1e-5},
    # default sweep grid hits the reference energies 1 and 2 exactly
    "sweep": {"start": 0.5, "stop": 5.0, "count": 10},
}


def load_config(path: str | None) -> dict:
    """Defaults overlaid with the JSON config file, if one is given."""
    cfg = json.loads(json.dumps(_DEFAULT_CONFIG))  # deep copy
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        for key, val in user.items():
            if isinstance(val, dict) and isinstance(cfg.get(key), dict):
                cfg[key].update(val)
            else:
                cfg[key] = val
    return cfg


def build_measurement(raw: dict) -> MeasurementConfig:
    try:
        cfg = MeasurementConfig(
            kappa1=float(raw["kappa1"]),
            kappa2=float(raw["kappa2"]),
            mass_ratio=float(raw["mass_ratio"]),
            eta=float(raw["eta"]),
            omega_c=float(raw["omega_c"]),
            inv_beta=float(raw["inv_beta"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid measurement parameters: {exc}") from exc
    validate_config(cfg, t_max=float(raw["time_grid"]["stop"]))
    return cfg


def build_moments(raw: dict):
    state = raw.get("state", {})
    kwargs = {}
    if "system_position_variance" in state:
        kwargs["system_position_variance"] = float(state["system_position_variance"])
    if "pointer_position_variances" in state:
        kwargs["pointer_position_variances"] = tuple(
            float(v) for v in state["pointer_position_variances"]
        )
    for name in (
        "system_momentum_variance",
        "pointer_momentum_variances",
        "pointer_correlations",
    ):
        if name in state and state[name] is not None:
            val = state[name]
            kwargs[name] = (
                tuple(float(v) for v in val) if isinstance(val, (list, tuple)) else float(val)
            )
    return gaussian_state_moments(**kwargs)


def time_grid(raw: dict) -> np.ndarray:
    tg = raw["time_grid"]
    start, stop, count = float(tg["start"]), float(tg["stop"]), int(tg["count"])
    spacing = tg.get("spacing", "linear")
    if not 0.0 < start < stop or count < 2:
        raise ConfigError("time grid needs 0 < start < stop and count >= 2")
    if spacing == "linear":
        return np.linspace(start, stop, count)
    if spacing == "log":
        return np.geomspace(start, stop, count)
    raise ConfigError(f"unknown time grid spacing {spacing!r}")


def _fmt(x: float) -> str:
    return "%.12g" % x


def _header_lines(raw: dict, mode: str) -> list[str]:
    echoed = dict(raw)
    echoed["mode"] = mode
    return [
        f"# pointersim {__version__}",
        "# config: " + json.dumps(echoed, sort_keys=True, separators=(",", ":")),
    ]


def _write(out_path: str | None, lines: list[str]) -> None:
    text = "\n".join(lines) + "\n"
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w") as fh:
            fh.write(text)


def cmd_uncertainty(args) -> int:
    raw = load_config(args.config)
    cfg = build_measurement(raw)
    moments = build_moments(raw)
    times = time_grid(raw)
    curve = uncertainty_curve(cfg, moments, times, args.mode, max_workers=args.threads)
    lines = _header_lines(raw, args.mode)
    lines.append(",".join(_CURVE_COLUMNS))
    for p in curve:
        lines.append(",".join(_fmt(getattr(p, c)) for c in _CURVE_COLUMNS))
    _write(args.out, lines)
    if args.out is not None:
        _check_emitted_curve(args.out)
    return EXIT_OK


def _check_emitted_curve(path: str) -> None:
    """Post-write pass: every emitted row must satisfy u_sq >= bound."""
    with open(path) as fh:
        rows = [ln for ln in fh if not ln.startswith("#")]
    cols = rows[0].strip().split(",")
    iu, ib = cols.index("u_sq"), cols.index("bound")
    for ln in rows[1:]:
        vals = ln.strip().split(",")
        if float(vals[iu]) < float(vals[ib]) - 1e-8:
            raise NumericalError(
                f"emitted row violates u_sq >= bound: {ln.strip()}"
            )


def cmd_optimize(args) -> int:
    raw = load_config(args.config)
    cfg = build_measurement(raw)
    moments = build_moments(raw)
    opts = raw["optimize"]
    interval = tuple(float(v) for v in opts["t_interval"])
    ev = CurveEvaluator(cfg, moments, interval[1], args.mode)
    lines = _header_lines(raw, args.mode)
    lines.append(",".join(_SWEEP_COLUMNS))
    try:
        opt = find_optimal_time(
            ev.u_sq, interval, int(opts["coarse_points"]), float(opts["rel_tol"])
        )
    except BoundaryMinimum as exc:
        lines.append(f"# boundary_minimum inv_beta={_fmt(cfg.inv_beta)}: {exc}")
        lines.append(",".join([_fmt(cfg.inv_beta), "nan", "nan"]))
        _write(args.out, lines)
        return EXIT_OK
    if opt.multiple_minima:
        lines.append(
            f"# multiple_minima inv_beta={_fmt(cfg.inv_beta)}: "
            + " ".join(f"({_fmt(t)},{_fmt(v)})" for t, v in opt.candidates)
        )
    lines.append(",".join(_fmt(v) for v in (cfg.inv_beta, opt.t_opt, opt.u_sq_min)))
    _write(args.out, lines)
    return EXIT_OK


def _sweep_grid(raw: dict) -> np.ndarray:
    sw = raw["sweep"]
    if "inv_betas" in sw:
        return np.asarray([float(v) for v in sw["inv_betas"]], dtype=float)
    return np.linspace(float(sw["start"]), float(sw["stop"]), int(sw["count"]))


def cmd_sweep(args) -> int:
    raw = load_config(args.config)
    cfg = build_measurement(raw)
    moments = build_moments(raw)
    opts = raw["optimize"]
    interval = tuple(float(v) for v in opts["t_interval"])
    grid = _sweep_grid(raw)
    result = thermal_sweep(
        cfg,
        moments,
        grid,
        t_interval=interval,
        mode=args.mode,
        coarse_points=int(opts["coarse_points"]),
        rel_tol=float(opts["rel_tol"]),
        max_workers=args.threads,
    )
    lines = _header_lines(raw, args.mode)
    lines.append(",".join(_SWEEP_COLUMNS))
    flagged = dict(result.flags)
    for ib, t_opt, u_min in zip(result.inv_betas, result.t_opt, result.u_sq_min):
        if float(ib) in flagged:
            lines.append(f"# flagged inv_beta={_fmt(ib)}: {flagged[float(ib)]}")
        lines.append(",".join(_fmt(v) for v in (ib, t_opt, u_min)))
    _write(args.out, lines)
    return EXIT_OK


# ---------------------------------------------------------------------------
# validation gates


def _gate_closed_limit():
    cfg = MeasurementConfig(eta=0.0)
    gen = build_generator(cfg, "renormalized")
    worst = 0.0
    for t in np.linspace(0.0, 3.0, 61):
        k, g, gd = propagate(gen, float(t))
        kc, gc, gdc = oracle.closed_form_eta0(cfg, float(t))
        worst = max(
            worst,
            float(np.abs(k - kc).max()),
            float(np.abs(g - gc).max()),
            float(np.abs(gd - gdc).max()),
        )
    return worst, 1e-10


def _gate_discrete_bath(n_modes: int = 200):
    cfg = MeasurementConfig()
    moments = gaussian_state_moments()
    times = np.arange(1, 11) * 0.2
    bath = oracle.discretize_bath(cfg, n_modes=n_modes)
    disc = oracle.discrete_pointer_covariance(cfg, moments, bath, times)
    cont = oracle.continuum_pointer_covariance(cfg, moments, times, "raw")
    err = np.linalg.norm(disc - cont, axis=(1, 2)) / np.linalg.norm(cont, axis=(1, 2))
    return float(err.max()), 0.02


def _gate_classical_limit():
    worst = 0.0
    for inv_beta in (1e4, 2e4):
        kernel = BathKernel(eta=0.25, omega_c=20.0, inv_beta=inv_beta)
        for t in (0.01, 0.05, 0.1):
            nu = noise_autocorrelation(t, kernel)
            ref = kernel.eta * kernel.omega_c * inv_beta * np.exp(-kernel.omega_c * t)
            worst = max(worst, abs(nu - ref) / ref)
    return worst, 1e-6


def _gate_dissipation_transform():
    kernel = BathKernel(eta=0.25, omega_c=20.0, inv_beta=1.0)
    worst = 0.0
    for t in np.linspace(0.05, 0.8, 12):
        direct = dissipation_kernel_scalar(float(t), kernel)
        recon = dissipation_from_spectral_density(float(t), kernel)
        worst = max(worst, abs(direct - recon) / abs(direct))
    return worst, 1e-8


def _gate_inequality_chain():
    cfg = MeasurementConfig()
    moments = gaussian_state_moments()
    times = np.linspace(0.05, 3.0, 40)
    worst = -np.inf
    for inv_beta in (1.0, 2.0):
        curve = uncertainty_curve(
            MeasurementConfig(inv_beta=inv_beta), moments, times
        )
        for p in curve:
            worst = max(worst, p.bound - p.u_sq, 1.0 - p.bound)
    return float(worst), 1e-8


def cmd_validate(args) -> int:
    gates = [
        ("closed-limit equivalence", _gate_closed_limit),
        ("discrete-bath covariance", _gate_discrete_bath),
        ("kernel classical limit", _gate_classical_limit),
        ("dissipation sine transform", _gate_dissipation_transform),
        ("inequality chain", _gate_inequality_chain),
    ]
    failed = False
    lines = []
    for name, gate in gates:
        try:
            measured, tol = gate()
        except PointerSimError as exc:
            lines.append(f"FAIL {name}: {type(exc).__name__}: {exc}")
            failed = True
            continue
        ok = measured <= tol
        failed = failed or not ok
        lines.append(
            f"{'PASS' if ok else 'FAIL'} {name}: measured {_fmt(measured)} "
            f"(tolerance {_fmt(tol)})"
        )
    _write(args.out, lines)
    return EXIT_GATE if failed else EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pointersim",
        description="Simultaneous position/momentum pointer measurement "
        "under an Ohmic thermal environment.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("uncertainty", cmd_uncertainty),
        ("optimize", cmd_optimize),
        ("sweep", cmd_sweep),
        ("validate", cmd_validate),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="JSON config path")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument(
            "--mode",
            choices=("raw", "renormalized"),
            default="renormalized",
            help="bath dynamics variant",
        )
        p.add_argument("--threads", type=int, default=1)
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
