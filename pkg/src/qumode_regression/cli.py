"""Command-line harness: run, sweep, report, convert-squeezing.

Exit codes separate the three failure families so scripts can react:
0 success, 2 configuration error (also argparse's own usage errors),
3 data error, 4 simulation error.  Results are emitted as schema-
versioned JSON; sweeps additionally write a flat CSV next to the JSON
for plotting.

The sweep parameter is any numeric config field, or the virtual
``eps_q`` readout-window budget: for each budget value ``eps`` the
window radius is set to ``sqrt(alpha0 * eps)`` and the squeezing scale
to ``(alpha0**2 * eps)**(-1/4)`` with ``alpha0`` the heaviest branch's
phase coefficient — the coupling that keeps the readout distortion
fixed while the window shrinks, which is what makes the acceptance
probability a clean power law in the budget.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields, replace
from pathlib import Path

from .analysis import db_to_squeezing, fit_power_law
from .config import MODES, SimConfig, apply_overrides, load_config
from .data import Dataset, QueryPoint, load_dataset, load_query
from .errors import ConfigError, DataError, SimulationError
from .pipeline import encoded_phase_coefficient, run_pipeline
from .results import (
    SCHEMA_VERSION,
    RunResult,
    result_to_json,
    save_result,
    write_sweep_csv,
)

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_SIMULATION = 4

# Config fields whose values may be swept over, plus the virtual
# readout-window budget.
SWEEPABLE_FIELDS = tuple(
    f.name for f in fields(SimConfig) if f.type in ("int", "float")
)
VIRTUAL_SWEEP_PARAM = "eps_q"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qumode-regress",
        description=(
            "Numerical simulator of hybrid qubit-qumode regularized "
            "linear regression."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io_flags(p: argparse.ArgumentParser, out_required: bool) -> None:
        p.add_argument("--config", help="key=value config file (defaults if omitted)")
        p.add_argument("--data", required=True, help="training CSV (headed)")
        p.add_argument("--query", required=True, help="query CSV (one data row)")
        p.add_argument("--target", default="y", help="target column name (default y)")
        p.add_argument(
            "--out",
            required=out_required,
            help="output JSON path" + ("" if out_required else " (default stdout)"),
        )
        p.add_argument("--mode", choices=MODES, help="override the config's mode")
        p.add_argument("--seed", type=int, help="override the config's seed")

    run_p = sub.add_parser("run", help="run one simulation end to end")
    add_io_flags(run_p, out_required=False)

    sweep_p = sub.add_parser("sweep", help="run once per parameter value")
    add_io_flags(sweep_p, out_required=True)
    sweep_p.add_argument(
        "--param",
        required=True,
        help=f"field to sweep ({', '.join(SWEEPABLE_FIELDS)}, or {VIRTUAL_SWEEP_PARAM})",
    )
    sweep_p.add_argument(
        "--values", required=True, help="comma-separated numeric values"
    )
    sweep_p.add_argument(
        "--workers", type=int, default=1, help="concurrent sweep workers"
    )

    report_p = sub.add_parser("report", help="summarize a results JSON file")
    report_p.add_argument("results", help="JSON file written by run or sweep")

    conv_p = sub.add_parser(
        "convert-squeezing", help="convert a squeezing level in dB to the scale s"
    )
    conv_p.add_argument("db", type=float, help="squeezing level in decibels")

    return parser


def _load_inputs(args) -> tuple[SimConfig, Dataset, QueryPoint]:
    cfg = load_config(args.config) if args.config else SimConfig()
    cfg = apply_overrides(cfg, mode=args.mode, seed=args.seed)
    dataset = load_dataset(args.data, target_column=args.target)
    query = load_query(args.query, target_column=args.target)
    return cfg, dataset, query


def _cmd_run(args) -> int:
    cfg, dataset, query = _load_inputs(args)
    result = run_pipeline(dataset, query, cfg)
    text = result_to_json(result)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _parse_values(raw: str) -> list[float]:
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    if not parts:
        raise ConfigError("no sweep values given", field="values")
    values = []
    for part in parts:
        try:
            values.append(float(part))
        except ValueError:
            raise ConfigError(
                f"bad sweep value {part!r}: not a number", field="values"
            ) from None
    return values


_FIELD_KINDS = {f.name: f.type for f in fields(SimConfig)}


def _field_override(param: str, value: float):
    if _FIELD_KINDS[param] == "int":
        if value != int(value):
            raise ConfigError(
                f"{param} needs integer values, got {value}", field=param
            )
        return int(value)
    return value


def _sweep_configs(
    cfg: SimConfig, dataset: Dataset, param: str, values: list[float]
) -> list[SimConfig]:
    if param == VIRTUAL_SWEEP_PARAM:
        alpha0 = encoded_phase_coefficient(dataset, cfg)
        configs = []
        for eps in values:
            if eps <= 0:
                raise ConfigError(
                    f"eps_q values must be > 0, got {eps}", field="values"
                )
            configs.append(
                apply_overrides(
                    cfg,
                    window_radius=float((alpha0 * eps) ** 0.5),
                    s=float((alpha0**2 * eps) ** -0.25),
                )
            )
        return configs
    if param not in SWEEPABLE_FIELDS:
        raise ConfigError(
            f"cannot sweep {param!r}; choose one of "
            f"{', '.join(SWEEPABLE_FIELDS)}, or {VIRTUAL_SWEEP_PARAM}",
            field=param,
        )
    return [
        apply_overrides(cfg, **{param: _field_override(param, v)}) for v in values
    ]


def _run_sweep_point(job: tuple[Dataset, QueryPoint, SimConfig]) -> RunResult:
    dataset, query, cfg = job
    return run_pipeline(dataset, query, cfg)


def _cmd_sweep(args) -> int:
    cfg, dataset, query = _load_inputs(args)
    values = _parse_values(args.values)
    configs = _sweep_configs(cfg, dataset, args.param, values)
    jobs = [(dataset, query, c) for c in configs]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_run_sweep_point, jobs))
    else:
        results = [_run_sweep_point(job) for job in jobs]
    results = [
        replace(
            res,
            diagnostics={
                **res.diagnostics,
                "sweep_param": args.param,
                "sweep_value": value,
            },
        )
        for res, value in zip(results, values)
    ]
    out = Path(args.out)
    save_result(out, results)
    csv_path = out.with_suffix(".csv")
    write_sweep_csv(csv_path, args.param, values, results)
    print(f"wrote {out} and {csv_path}", file=sys.stderr)
    return EXIT_OK


def _load_records(path: str) -> list[dict]:
    p = Path(path)
    if not p.exists():
        raise DataError(f"results file not found: {p}")
    try:
        payload = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"results file is not valid JSON: {exc}") from None
    records = payload if isinstance(payload, list) else [payload]
    if not records:
        raise DataError("results file has no records")
    for i, rec in enumerate(records):
        if not isinstance(rec, dict):
            raise DataError(f"record {i} is not an object")
        version = rec.get("schema_version")
        if version != SCHEMA_VERSION:
            raise DataError(
                f"record {i} has schema_version {version!r}, "
                f"expected {SCHEMA_VERSION}"
            )
    return records


def _format_cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _cmd_report(args) -> int:
    records = _load_records(args.results)
    sweep_params = {
        rec.get("diagnostics", {}).get("sweep_param") for rec in records
    }
    sweep_param = sweep_params.pop() if len(sweep_params) == 1 else None

    headers = [
        sweep_param or "record",
        "mode",
        "prediction",
        "success_prob",
        "fidelity",
        "cond_number",
    ]
    rows = []
    for i, rec in enumerate(records):
        label = (
            rec.get("diagnostics", {}).get("sweep_value")
            if sweep_param
            else i
        )
        rows.append(
            [
                _format_cell(label),
                _format_cell(rec.get("mode")),
                _format_cell(rec.get("prediction")),
                _format_cell(rec.get("success_probability")),
                _format_cell(rec.get("fidelity_vs_ideal")),
                _format_cell(rec.get("condition_number")),
            ]
        )
    widths = [
        max(len(headers[j]), *(len(r[j]) for r in rows)) for j in range(len(headers))
    ]
    print("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
    for row in rows:
        print("  ".join(c.ljust(w) for c, w in zip(row, widths)))

    if sweep_param == VIRTUAL_SWEEP_PARAM and len(records) >= 3:
        xs = [rec["diagnostics"]["sweep_value"] for rec in records]
        ys = [rec["success_probability"] for rec in records]
        try:
            fit = fit_power_law(xs, ys)
        except ValueError as exc:
            raise DataError(f"cannot fit acceptance power law: {exc}") from None
        print(
            f"acceptance ~ {fit.prefactor:.4g} * eps_q^{fit.exponent:.4f}"
            f"  (r^2 = {fit.r_squared:.6f})"
        )
    return EXIT_OK


def _cmd_convert(args) -> int:
    print(db_to_squeezing(args.db))
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "report": _cmd_report,
    "convert-squeezing": _cmd_convert,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        field = f" [field: {exc.field}]" if exc.field else ""
        print(f"config error{field}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SimulationError as exc:
        stage = f" [stage: {exc.stage}]" if exc.stage else ""
        print(f"simulation error{stage}: {exc}", file=sys.stderr)
        return EXIT_SIMULATION


if __name__ == "__main__":
    sys.exit(main())
