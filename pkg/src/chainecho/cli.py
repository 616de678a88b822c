"""Command-line front end: echo runs, sweeps, entanglement, oracle checks.

Flags override config-file keys; every output file embeds the config
fingerprint and repeated runs with the same config produce byte-identical
CSV/SVG and JSON equal up to the labeled timestamp.

Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 numerical quality.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import __version__
from .analysis import detect_revival, extract_envelope, sweep_distance, sweep_lambda
from .chain import ChainSpec, DiagonalizationError, QubitLabels
from .echo import (
    EchoQualityError,
    TimeGrid,
    default_grid,
    echo_series,
    fingerprint,
)
from .entanglement import (
    SystemState,
    entanglement_report,
    sudden_death_threshold,
)
from .oracle import fock_echo
from .serialize import utc_timestamp, write_csv, write_json, write_line_svg

COMMANDS = ("echo", "envelope", "sweep-d", "sweep-lambda", "entanglement", "oracle-check")
FORMATS = ("csv", "json", "svg")
ORACLE_TOL = 1e-8

DEFAULTS = {
    "n": 100,
    "gamma": 1.0,
    "lam": 1.0,
    "coupling": 0.1,
    "site_a": 1,
    "site_b": None,
    "d": 1,
    "boundary": "periodic",
    "label_a": 1,
    "label_b": 1,
    "t_start": 0.0,
    "t_end": 20.0,
    "n_points": None,
    "alpha": None,
    "beta": None,
    "p": 0.0,
    "window": None,
    "prominence": 0.1,
    "distances": "2:10",
    "lambdas": "0.5:0.95:0.05",
    "out": "chainecho-run",
    "formats": "csv,json",
    "threads": None,
}


class UsageError(ValueError):
    """Invalid configuration; reported with exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run configuration (spec, labels, grid, state, knobs)."""

    command: str
    spec: ChainSpec
    labels: QubitLabels
    grid: TimeGrid
    state: SystemState
    window: float | None
    prominence: float
    distances: tuple
    lambdas: tuple
    out: str
    formats: tuple
    threads: int

    def fingerprint(self) -> str:
        raw = repr(self).encode()
        return hashlib.sha256(raw).hexdigest()[:16]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainecho",
        description="Loschmidt echo of two qubits locally coupled to an XY chain.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name, help=f"run the {name} pipeline")
        _add_common(cmd)
        if name == "sweep-d":
            cmd.add_argument("--distances", help="list '2,4,6' or range '2:18[:step]'")
        if name == "sweep-lambda":
            cmd.add_argument("--lambdas", help="list or range of field values")
    return parser


def _add_common(cmd: argparse.ArgumentParser) -> None:
    cmd.add_argument("--config", help="JSON file with defaults; flags override")
    cmd.add_argument("--n", type=int, help="chain size N (default 100)")
    cmd.add_argument("--gamma", type=float, help="anisotropy (default 1)")
    cmd.add_argument("--lambda", dest="lam", type=float, help="transverse field (default 1)")
    cmd.add_argument("--g", dest="coupling", type=float, help="coupling strength (default 0.1)")
    cmd.add_argument("--site-a", type=int, help="site of the first qubit (default 1)")
    site = cmd.add_mutually_exclusive_group()
    site.add_argument("--site-b", type=int, help="site of the second qubit")
    site.add_argument("--d", type=int, help="separation; site_b = site_a + d (default 1)")
    cmd.add_argument("--boundary", choices=("periodic", "open"))
    cmd.add_argument("--label-a", type=int, choices=(0, 1), help="first qubit label (default 1)")
    cmd.add_argument("--label-b", type=int, choices=(0, 1), help="second qubit label (default 1)")
    cmd.add_argument("--t-start", type=float)
    cmd.add_argument("--t-end", type=float, help="end of the time window (default 20)")
    cmd.add_argument("--n-points", type=int, help="grid points (default: resolve fastest mode)")
    cmd.add_argument("--alpha", type=float, help="|alpha| of alpha|00>+beta|11> (default 1/sqrt 2)")
    cmd.add_argument("--beta", type=float, help="|beta| (default: from normalization)")
    cmd.add_argument("--p", type=float, help="identity admixture (default 0)")
    cmd.add_argument("--window", type=float, help="envelope window (default: fastest period)")
    cmd.add_argument("--prominence", type=float, help="revival prominence (default 0.1)")
    cmd.add_argument("--out", help="output path prefix (default chainecho-run)")
    cmd.add_argument("--formats", help="comma subset of csv,json,svg (default csv,json)")
    cmd.add_argument("--threads", type=int, help="worker threads (default: available cores)")


def _merge(args: argparse.Namespace) -> dict:
    """Flags override config-file keys override built-in defaults."""
    merged = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except OSError as exc:
            raise UsageError(f"config: cannot read {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config: invalid JSON in {args.config}: {exc}") from exc
        unknown = set(file_cfg) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"config: unknown keys {sorted(unknown)}")
        merged.update(file_cfg)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def parse_config(argv) -> RunConfig:
    """Parse flags (and optional config file) into a validated RunConfig."""
    args = build_parser().parse_args(argv)
    raw = _merge(args)
    try:
        spec = _build_spec(raw, args)
        labels = QubitLabels(raw["label_a"], raw["label_b"])
        grid = _build_grid(raw, spec, labels, args.command)
        state = _build_state(raw)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    formats = tuple(f.strip() for f in str(raw["formats"]).split(",") if f.strip())
    bad = set(formats) - set(FORMATS)
    if bad:
        raise UsageError(f"formats: unknown {sorted(bad)}; choose from {FORMATS}")
    threads = raw["threads"] if raw["threads"] is not None else (os.cpu_count() or 1)
    if threads < 1:
        raise UsageError(f"threads: must be >= 1, got {threads}")
    prominence = float(raw["prominence"])
    if not 0.0 < prominence < 1.0:
        raise UsageError(f"prominence: must lie in (0, 1), got {prominence}")
    return RunConfig(
        command=args.command,
        spec=spec,
        labels=labels,
        grid=grid,
        state=state,
        window=raw["window"],
        prominence=prominence,
        distances=_parse_values(raw["distances"], "distances", integers=True),
        lambdas=_parse_values(raw["lambdas"], "lambdas"),
        out=str(raw["out"]),
        formats=formats,
        threads=int(threads),
    )


def _build_spec(raw: dict, args: argparse.Namespace) -> ChainSpec:
    site_a = int(raw["site_a"])
    if getattr(args, "site_b", None) is not None or (
        raw["site_b"] is not None and getattr(args, "d", None) is None
    ):
        site_b = int(raw["site_b"])
    else:
        site_b = site_a + int(raw["d"])
    return ChainSpec(
        n_sites=int(raw["n"]),
        gamma=float(raw["gamma"]),
        lam=float(raw["lam"]),
        coupling=float(raw["coupling"]),
        site_a=site_a,
        site_b=site_b,
        boundary=str(raw["boundary"]),
    )


def _build_grid(raw: dict, spec: ChainSpec, labels: QubitLabels, command: str) -> TimeGrid:
    t_start = float(raw["t_start"])
    t_end = float(raw["t_end"])
    if raw["n_points"] is not None:
        return TimeGrid(t_start, t_end, int(raw["n_points"]))
    if command == "oracle-check":
        return TimeGrid(t_start, t_end, 201)
    probe = labels if labels != QubitLabels(0, 0) else QubitLabels(1, 1)
    return default_grid(spec, probe, t_end, t_start=t_start)


def _build_state(raw: dict) -> SystemState:
    alpha = raw["alpha"]
    beta = raw["beta"]
    if alpha is None and beta is None:
        alpha = beta = 1.0 / math.sqrt(2.0)
    elif beta is None:
        if not 0.0 <= float(alpha) <= 1.0:
            raise ValueError(f"alpha: |alpha| must lie in [0, 1], got {alpha}")
        beta = math.sqrt(max(0.0, 1.0 - float(alpha) ** 2))
    elif alpha is None:
        if not 0.0 <= float(beta) <= 1.0:
            raise ValueError(f"beta: |beta| must lie in [0, 1], got {beta}")
        alpha = math.sqrt(max(0.0, 1.0 - float(beta) ** 2))
    return SystemState(alpha=float(alpha), beta=float(beta), mixing_p=float(raw["p"]))


def _parse_values(text, name: str, integers: bool = False):
    """'2,4,6' or '2:18[:step]' into a tuple of numbers."""
    if isinstance(text, (list, tuple)):
        seq = [float(v) for v in text]
    else:
        text = str(text)
        if ":" in text:
            parts = text.split(":")
            if len(parts) not in (2, 3):
                raise UsageError(f"{name}: expected 'start:stop[:step]', got {text!r}")
            start, stop = float(parts[0]), float(parts[1])
            step = float(parts[2]) if len(parts) == 3 else 1.0
            if step <= 0:
                raise UsageError(f"{name}: step must be positive")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            seq = [start + i * step for i in range(max(count, 0))]
        else:
            try:
                seq = [float(v) for v in text.split(",") if v.strip()]
            except ValueError as exc:
                raise UsageError(f"{name}: cannot parse {text!r}") from exc
    if not seq:
        raise UsageError(f"{name}: empty list")
    if integers:
        return tuple(int(round(v)) for v in seq)
    return tuple(seq)


# -- command dispatch ---------------------------------------------------------

def run(config: RunConfig) -> int:
    """Execute one parsed run and write its artifacts; returns exit code."""
    runner = {
        "echo": _run_echo,
        "envelope": _run_envelope,
        "sweep-d": _run_sweep_d,
        "sweep-lambda": _run_sweep_lambda,
        "entanglement": _run_entanglement,
        "oracle-check": _run_oracle_check,
    }[config.command]
    return runner(config)


def _provenance(config: RunConfig) -> dict:
    return {
        "fingerprint": config.fingerprint(),
        "version": __version__,
        "command": config.command,
        "spec": repr(config.spec),
        "labels": f"({config.labels.a}, {config.labels.b})",
    }


def _config_dict(config: RunConfig) -> dict:
    payload = {
        "command": config.command,
        "spec": asdict(config.spec),
        "labels": asdict(config.labels),
        "grid": asdict(config.grid),
        "state": {
            "alpha": abs(config.state.alpha),
            "beta": abs(config.state.beta),
            "p": config.state.mixing_p,
        },
        "window": config.window,
        "prominence": config.prominence,
        "out": config.out,
        "formats": list(config.formats),
        "threads": config.threads,
    }
    return payload


def _emit(config: RunConfig, columns: dict, results: dict, fits: dict, events: list,
          svg_curves: dict | None = None, svg_x=None, csv_extra_provenance: dict | None = None) -> None:
    base = config.out
    prov = _provenance(config)
    if csv_extra_provenance:
        prov.update(csv_extra_provenance)
    if "csv" in config.formats:
        write_csv(base + ".csv", columns, prov)
    if "json" in config.formats:
        write_json(
            base + ".json",
            {
                "config": _config_dict(config),
                "results": results,
                "fits": fits,
                "events": events,
                "version": __version__,
                "fingerprint": config.fingerprint(),
                "provenance": {"generated_at": utc_timestamp()},
            },
        )
    if "svg" in config.formats and svg_curves:
        write_line_svg(
            base + ".svg",
            svg_x,
            svg_curves,
            title=f"chainecho {config.command}",
            fingerprint=config.fingerprint(),
        )


def _run_echo(config: RunConfig) -> int:
    series = echo_series(config.spec, config.labels, config.grid, workers=config.threads)
    _emit(
        config,
        columns={"t": series.times, "L": series.values},
        results={"series_fingerprint": series.spec_fingerprint,
                 "max_energy": series.max_energy,
                 "l_final": float(series.values[-1]),
                 "l_min": float(series.values.min())},
        fits={},
        events=[],
        svg_curves={"L": series.values},
        svg_x=series.times,
    )
    return 0


def _run_envelope(config: RunConfig) -> int:
    series = echo_series(config.spec, config.labels, config.grid, workers=config.threads)
    env = extract_envelope(series, window=config.window)
    record = detect_revival(env, prominence=config.prominence, distance=config.spec.distance)
    results = {"series_fingerprint": series.spec_fingerprint, "revival": None}
    if record is not None:
        results["revival"] = {"distance": record.distance, "t_r": record.t_r, "l_r": record.l_r}
    _emit(
        config,
        columns={"t": series.times, "L": series.values, "envelope": env.upper},
        results=results,
        fits={},
        events=[],
        svg_curves={"L": series.values, "envelope": env.upper},
        svg_x=series.times,
    )
    return 0


def _fit_payload(fits: dict) -> dict:
    out = {}
    for name, fit in fits.items():
        out[name] = {"model": fit.model, "params": list(fit.params), "residual": fit.residual}
        if fit.model == "linear":
            out[name]["slope"] = fit.params[1]
        if fit.model == "power":
            out[name]["exponent"] = fit.params[1]
    return out


def _sweep_columns(result, axis_name: str) -> dict:
    values = [p.value for p in result.points]
    t_r = [p.record.t_r if p.record else float("nan") for p in result.points]
    l_r = [p.record.l_r if p.record else float("nan") for p in result.points]
    finite = [p.finite_size for p in result.points]
    errors = [p.error or "" for p in result.points]
    return {axis_name: values, "t_r": t_r, "l_r": l_r, "finite_size": finite, "error": errors}


def _run_sweep_d(config: RunConfig) -> int:
    result = sweep_distance(
        config.spec,
        config.distances,
        grid=config.grid,
        prominence=config.prominence,
        window=config.window,
        workers=config.threads,
    )
    _emit(
        config,
        columns=_sweep_columns(result, "d"),
        results={"points": [
            {"d": p.value,
             "t_r": p.record.t_r if p.record else None,
             "l_r": p.record.l_r if p.record else None,
             "finite_size": p.finite_size,
             "error": p.error}
            for p in result.points
        ]},
        fits=_fit_payload(result.fits),
        events=[],
    )
    return 0


def _run_sweep_lambda(config: RunConfig) -> int:
    result = sweep_lambda(
        config.spec,
        config.lambdas,
        grid=config.grid,
        prominence=config.prominence,
        window=config.window,
        workers=config.threads,
    )
    _emit(
        config,
        columns=_sweep_columns(result, "lambda"),
        results={"points": [
            {"lambda": p.value,
             "t_r": p.record.t_r if p.record else None,
             "l_r": p.record.l_r if p.record else None,
             "error": p.error}
            for p in result.points
        ]},
        fits=_fit_payload(result.fits),
        events=[],
    )
    return 0


def _run_entanglement(config: RunConfig) -> int:
    series = echo_series(config.spec, config.labels, config.grid, workers=config.threads)
    report = entanglement_report(series, config.state)
    results = {"series_fingerprint": series.spec_fingerprint}
    if 0.0 < config.state.mixing_p < 1.0 and config.state.overlap > 0.0:
        threshold = sudden_death_threshold(config.state)
        results["echo_threshold"] = threshold
        if threshold >= 1.0:
            results["note"] = "threshold >= 1: entanglement dead at all times"
    _emit(
        config,
        columns={
            "t": series.times,
            "L": series.values,
            "purity": report.purity,
            "negativity": report.negativity,
        },
        results=results,
        fits={},
        events=[{"time": t, "kind": kind} for t, kind in report.events],
        svg_curves={"L": series.values, "purity": report.purity, "negativity": report.negativity},
        svg_x=series.times,
    )
    return 0


def _run_oracle_check(config: RunConfig) -> int:
    spec = config.spec
    if spec.n_sites > 10:
        spec = replace(spec, n_sites=8, site_a=1, site_b=1 + min(2, spec.distance))
    rows = {"gamma": [], "lambda": [], "g": [], "d": [], "deviation": []}
    worst = 0.0
    for coupling in (0.1, 50.0):
        for lam in (0.5, 1.5):
            probe = replace(spec, coupling=coupling, lam=lam)
            det = echo_series(probe, config.labels, config.grid)
            fock = fock_echo(probe, config.labels, QubitLabels(0, 0), config.grid)
            deviation = float(np.max(np.abs(det.values - fock.values)))
            worst = max(worst, deviation)
            rows["gamma"].append(probe.gamma)
            rows["lambda"].append(probe.lam)
            rows["g"].append(probe.coupling)
            rows["d"].append(probe.distance)
            rows["deviation"].append(deviation)
    passed = worst < ORACLE_TOL
    _emit(
        config,
        columns=rows,
        results={"max_deviation": worst, "tolerance": ORACLE_TOL, "passed": passed},
        fits={},
        events=[],
        csv_extra_provenance={"max_deviation": repr(worst)},
    )
    print(f"oracle-check: max deviation {worst:.3e} ({'PASS' if passed else 'FAIL'})")
    return 0 if passed else 3


def main(argv=None) -> int:
    try:
        config = parse_config(argv if argv is not None else sys.argv[1:])
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(config)
    except (EchoQualityError, DiagonalizationError) as exc:
        print(f"numerical quality error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
