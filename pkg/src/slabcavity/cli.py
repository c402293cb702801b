"""``slabcavity`` command-line tool: parameter sweeps to CSV/JSON and the validation suite.

Exit codes: 0 success, 1 configuration error, 2 validation failure,
3 convergence failure with ``--strict``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Optional

from . import __version__, constants, kernels
from .config import ConfigError, RunConfig, as_plain, load_config, require
from .force import (a1_ideal, casimir_ideal, force_delta_form, force_lifshitz_difference, taylor_a1,
                    thickness_residual, thickness_correction)
from .multilayer import GeometryError, NumericalDegeneracyError
from .oscillator import (InstabilityError, OscillatorSetup, frequency_shift, harmonic_region,
                         open_vs_closed)
from .spectral import ConvergenceError
from .validation import run_all

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION, EXIT_CONVERGENCE = 0, 1, 2, 3

COLUMNS = {
    "force-sweep": ["delta_m", "temperature_K", "pressure_N_m2", "ratio_to_ideal", "quadrature_error",
                    "matsubara_terms", "status"],
    "taylor": ["temperature_K", "a1_N_m3", "a1_ideal_N_m3", "a1_finite_difference_N_m3", "fd_relative_diff",
               "quadrature_error", "matsubara_terms", "status"],
    "freq-shift": ["temperature_K", "a1_N_m3", "omega0_rad_s", "omega_rad_s", "shift_exact_rad_s",
                   "shift_first_order_rad_s", "harmonic_delta_m", "status"],
    "thickness": ["b_m", "temperature_K", "delta_m", "thickness_correction_N_m2", "full_minus_lifshitz_N_m2",
                  "residual_N_m2", "quadrature_error", "status"],
    "compare-geometries": ["delta_m", "delta_over_a", "closed_correction", "open_correction",
                           "closed_model_5x2", "open_model_m2p5x"],
    "validate": ["check", "value", "tolerance", "passed"],
}

# failures recorded per row instead of aborting the sweep
_ROW_ERRORS = (ConvergenceError, NumericalDegeneracyError, GeometryError, InstabilityError, FloatingPointError,
               ValueError, ArithmeticError)


class _Settings:
    """Picklable bundle handed to worker processes."""

    def __init__(self, cfg: RunConfig, scale: float):
        self.stack = cfg.stack
        self.h = cfg.h
        self.b = cfg.b
        self.qspec = cfg.qspec.scaled(scale) if scale != 1.0 else cfg.qspec
        self.cfg = cfg
        self.scale = scale

    def mspec(self, temperature):
        return self.cfg.mspec(temperature, self.scale)


def _status(exc: BaseException) -> str:
    kind = "convergence" if isinstance(exc, ConvergenceError) else "error"
    return f"{kind}: {type(exc).__name__}: {exc}".replace("\n", " ")


def _nan(n):
    return [math.nan] * n


def _row_force(s: _Settings, delta: float, temperature: float):
    try:
        r = force_delta_form(s.h, s.b, delta, s.stack, temperature, s.qspec, s.mspec(temperature))
        ratio = r.pressure / casimir_ideal(s.h, delta) if delta != 0 else math.nan
        return [delta, temperature, r.pressure, ratio, r.quadrature_error, r.matsubara_terms, "ok"]
    except _ROW_ERRORS as exc:
        return [delta, temperature] + _nan(3) + [0, _status(exc)]


def _row_taylor(s: _Settings, temperature: float, fd_fraction: float):
    ideal = a1_ideal(s.h)
    try:
        t = taylor_a1(s.h, s.b, s.stack, temperature, s.qspec, s.mspec(temperature))
        d = fd_fraction * s.h
        fp = force_delta_form(s.h, s.b, d, s.stack, temperature, s.qspec, s.mspec(temperature)).pressure
        fm = force_delta_form(s.h, s.b, -d, s.stack, temperature, s.qspec, s.mspec(temperature)).pressure
        fd = (fp - fm) / (2 * d)
        return [temperature, t.a1, ideal, fd, (fd - t.a1) / t.a1, t.quadrature_error, t.matsubara_terms, "ok"]
    except _ROW_ERRORS as exc:
        return [temperature, math.nan, ideal] + _nan(3) + [0, _status(exc)]


def _row_freq(s: _Settings, temperature: float, k_spring: float, m_area: float, accuracy: Optional[float]):
    a1 = math.nan
    try:
        a1 = taylor_a1(s.h, s.b, s.stack, temperature, s.qspec, s.mspec(temperature)).a1
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            shift = frequency_shift(OscillatorSetup(k_spring, m_area, a1, temperature))
        status = "ok" if not caught else "ok; " + "; ".join(str(w.message) for w in caught)
        d_star = math.nan
        if accuracy is not None:
            d_star = harmonic_region(s.h, s.b, s.stack, temperature, accuracy, s.qspec, s.mspec(temperature))
        return [temperature, a1, shift.omega0, shift.omega, shift.shift, shift.shift_first_order, d_star, status]
    except _ROW_ERRORS as exc:
        return [temperature, a1] + _nan(5) + [_status(exc)]


def _row_thickness(s: _Settings, b: float, temperature: float, delta: float):
    try:
        ms = s.mspec(temperature)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            dF = thickness_correction(s.h, b, delta, s.stack, temperature, s.qspec, ms)
        full = force_delta_form(s.h, b, delta, s.stack, temperature, s.qspec, ms).pressure
        lif = force_lifshitz_difference(s.h, delta, s.stack, temperature, s.qspec, ms).pressure
        res = thickness_residual(s.h, b, delta, s.stack, temperature, s.qspec, ms, with_kappa_bar=False)
        status = "ok" if not caught else "ok; " + "; ".join(str(w.message) for w in caught)
        return [b, temperature, delta, dF.pressure, full - lif, res.residual,
                dF.quadrature_error + res.quadrature_error, status]
    except _ROW_ERRORS as exc:
        return [b, temperature, delta] + _nan(4) + [_status(exc)]


def _call(task):
    fn, args = task
    return fn(*args)


def _run_rows(tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [_call(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves input order whatever the completion order
        return list(pool.map(_call, tasks))


def _metadata(cmd: str, cfg: RunConfig, scale: float, extra: Optional[dict] = None) -> dict:
    qspec = cfg.qspec.scaled(scale) if scale != 1.0 else cfg.qspec
    meta = {
        "tool": "slabcavity",
        "version": __version__,
        "command": cmd,
        "constants": constants.as_metadata(),
        "sign_convention": constants.SIGN_CONVENTION,
        "tolerances": {
            **qspec.as_dict(),
            "tolerance_scale": scale,
            "matsubara_max_terms": cfg.matsubara_max_terms,
            "matsubara_term_rel_tol": cfg.matsubara_term_rel_tol * scale,
        },
        "materials": cfg.material_digests(),
        "geometry": {"h_m": cfg.h, "b_m": cfg.b, "a_m": cfg.a},
        "kernel_backend": kernels.BACKEND,
    }
    if extra:
        meta.update(extra)
    return as_plain(meta)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def render(cmd: str, meta: dict, rows: list, fmt: str) -> str:
    cols = COLUMNS[cmd]
    if fmt == "json":
        doc = {"metadata": meta, "columns": cols,
               "rows": [[_json_safe(as_plain(v)) for v in r] for r in rows]}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write(f"# slabcavity {cmd}\n")
    buf.write("# metadata: " + json.dumps(meta, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(as_plain(v)) for v in r])
    return buf.getvalue()


# -- commands ------------------------------------------------------------

def cmd_force_sweep(cfg: RunConfig, scale=1.0, workers=1):
    require(cfg, "h", "b", "delta_grid")
    s = _Settings(cfg, scale)
    tasks = [(_row_force, (s, d, t)) for t in cfg.temperatures for d in cfg.delta_grid]
    return _metadata("force-sweep", cfg, scale), _run_rows(tasks, workers)


def cmd_taylor(cfg: RunConfig, scale=1.0, workers=1):
    require(cfg, "h", "b")
    s = _Settings(cfg, scale)
    tasks = [(_row_taylor, (s, t, cfg.fd_fraction)) for t in cfg.temperatures]
    return _metadata("taylor", cfg, scale, {"fd_delta_m": cfg.fd_fraction * cfg.h}), _run_rows(tasks, workers)


def cmd_freq_shift(cfg: RunConfig, scale=1.0, workers=1):
    require(cfg, "h", "b", "k_spring", "m_area")
    s = _Settings(cfg, scale)
    tasks = [(_row_freq, (s, t, cfg.k_spring, cfg.m_area, cfg.accuracy)) for t in cfg.temperatures]
    extra = {"oscillator": {"k_spring_N_m3": cfg.k_spring, "m_area_kg_m2": cfg.m_area, "accuracy": cfg.accuracy}}
    return _metadata("freq-shift", cfg, scale, extra), _run_rows(tasks, workers)


def cmd_thickness(cfg: RunConfig, scale=1.0, workers=1):
    require(cfg, "h", "b_grid", "delta_grid")
    s = _Settings(cfg, scale)
    tasks = [(_row_thickness, (s, b, t, d)) for t in cfg.temperatures for d in cfg.delta_grid for b in cfg.b_grid]
    return _metadata("thickness", cfg, scale, {"b_grid_m": cfg.b_grid}), _run_rows(tasks, workers)


def cmd_compare_geometries(cfg: RunConfig, scale=1.0, workers=1):
    require(cfg, "a", "k_spring", "delta_grid")
    stack = cfg.stack if cfg.dispersive else None
    t = cfg.temperatures[0]
    qspec = cfg.qspec.scaled(scale) if scale != 1.0 else cfg.qspec
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        cmp = open_vs_closed(cfg.a, cfg.k_spring, cfg.delta_grid, stack, t, qspec, cfg.mspec(t, scale),
                             sigma=cfg.power_law_sigma)
    rows = []
    for d, c, o in zip(cmp.delta, cmp.closed_correction, cmp.open_correction):
        x = d / cfg.a
        rows.append([d, x, c, o, 5 * x * x, -2.5 * x])
    summary = {k: v for k, v in cmp.as_dict().items() if k not in ("delta", "closed_correction", "open_correction")}
    summary["warnings"] = [str(w.message) for w in caught]
    return _metadata("compare-geometries", cfg, scale, {"comparison": summary, "temperature_K": t}), rows


def cmd_validate(cfg: RunConfig, scale=1.0, workers=1, delta_sign=1.0):
    results = run_all(cfg.stack, cfg.n_draws, cfg.seed, delta_sign=delta_sign)
    rows = [[r.name, r.value, r.tolerance, r.passed] for r in results]
    extra = {"n_draws": cfg.n_draws, "seed": cfg.seed, "delta_sign_mutation": delta_sign != 1.0}
    return _metadata("validate", cfg, scale, extra), rows


COMMANDS: dict[str, Callable] = {
    "force-sweep": cmd_force_sweep,
    "taylor": cmd_taylor,
    "freq-shift": cmd_freq_shift,
    "thickness": cmd_thickness,
    "compare-geometries": cmd_compare_geometries,
    "validate": cmd_validate,
}

HELP = {
    "force-sweep": "pressure on the slab over a delta grid and temperatures",
    "taylor": "linear force coefficient a1 per temperature, with a finite-difference check",
    "freq-shift": "oscillator eigenfrequency shift per temperature",
    "thickness": "first-order thickness correction and its residual over a b grid",
    "compare-geometries": "slab between two walls vs slab near one wall",
    "validate": "oracle, series and dual-path checks; nonzero exit on failure",
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slabcavity", description="Casimir force on a slab inside a planar cavity.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sp = sub.add_parser(name, help=HELP[name], description=HELP[name])
        sp.add_argument("config", help="YAML run configuration")
        sp.add_argument("--out", "-o", help="output file (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--workers", type=int, default=1, help="worker processes for sweep rows")
        sp.add_argument("--tolerance-scale", type=float, default=1.0,
                        help="multiply every quadrature and Matsubara tolerance by this factor")
        sp.add_argument("--strict", action="store_true", help="exit 3 if any row failed to converge")
        if name == "validate":
            sp.add_argument("--inject-delta-sign-flip", action="store_true", help=argparse.SUPPRESS)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.workers < 1:
        print("slabcavity: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    if not args.tolerance_scale > 0:
        print("slabcavity: --tolerance-scale must be > 0", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        fn = COMMANDS[args.command]
        kw = {}
        if args.command == "validate" and args.inject_delta_sign_flip:
            kw["delta_sign"] = -1.0
        meta, rows = fn(cfg, args.tolerance_scale, args.workers, **kw)
    except ConfigError as exc:
        print(f"slabcavity: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = render(args.command, meta, rows, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)

    if args.command == "validate":
        failed = [r[0] for r in rows if not r[3]]
        if failed:
            print("slabcavity: validation failed: " + ", ".join(failed), file=sys.stderr)
            return EXIT_VALIDATION
        return EXIT_OK
    failures = [r[-1] for r in rows if isinstance(r[-1], str) and r[-1].startswith("convergence")]
    if failures:
        print(f"slabcavity: {len(failures)} row(s) did not converge", file=sys.stderr)
        if args.strict:
            return EXIT_CONVERGENCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
