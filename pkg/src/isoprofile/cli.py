"""Command-line front end.

Data goes to stdout (CSV or JSON), diagnostics to stderr. Exit status is 0 on
success, 1 when a comparison or verification fails, 2 on invalid input.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from typing import TextIO

import numpy as np

from . import acceptance
from .bodies import KINDS, Body2D, body_curve
from .bounds import bounds_summary
from .compare import compare_lower_LG, compare_upper
from .curves import ProfileCurve
from .space_forms import SpaceForm, model_samples, normalize

COMMANDS = ("model", "body", "compare", "bounds", "verify")
SEED_ENV = "ISOPROFILE_SEED"
COLUMNS = ("V", "I", "Y", "h")

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    dim: int = 2
    curvature: float = 0.0
    half: bool = True
    v_max: float | None = None
    grid: int = 512
    samples: int = 10**6
    seed: int = 42
    tol: float = 1e-8
    format: str | None = None
    body: str | None = None
    body_param: float | None = None
    input: str | None = None

    def __post_init__(self):
        if self.format is None:
            self.format = "csv" if self.command in ("model", "body") else "json"

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise UsageError("format must be csv or json")
        # `model` prints exact samples and needs no interpolation, so it takes
        # coarse grids; everything else builds interpolating curves
        min_grid = 2 if self.command == "model" else 16
        if self.grid < min_grid:
            raise UsageError(f"grid must be at least {min_grid} for {self.command}")
        if self.samples < 1000:
            raise UsageError("samples must be at least 1000")
        if not self.tol > 0:
            raise UsageError("tol must be positive")
        if self.dim < 2:
            raise UsageError("dim must be at least 2")
        if self.v_max is not None and not self.v_max > 0:
            raise UsageError("v-max must be positive")
        if self.command == "body" and self.body is None:
            raise UsageError("body needs --body")
        if self.body is not None and self.dim != 2:
            raise UsageError("flat bodies are planar: use --dim 2")
        if self.command == "compare" and (self.body is None) == (self.input is None):
            raise UsageError("compare needs exactly one of --body or --input")
        return self


# --- helpers ----------------------------------------------------------------


def _fmt(x: float) -> str:
    return "%.17g" % x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _write_json(out: TextIO, config: RunConfig, results, reports) -> None:
    doc = {"config": asdict(config), "results": results, "reports": reports}
    json.dump(_jsonable(doc), out, indent=2, allow_nan=False)
    out.write("\n")


def _write_table(out: TextIO, header, rows) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def profile_rows(V, I, n: int, total: float) -> np.ndarray:
    """Columns ``V, I, Y, h`` (``h`` is NaN when the volume is infinite)."""
    V = np.asarray(V, dtype=float)
    I = np.asarray(I, dtype=float)
    Y = I ** ((n + 1) / n)
    h = I / total if math.isfinite(total) else np.full_like(I, math.nan)
    return np.column_stack([V, I, Y, h])


def read_profile_csv(path: str, dim: int) -> ProfileCurve:
    """Load ``V, I`` columns. A final row with ``I = 0`` marks a bounded profile."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"V", "I"} <= set(reader.fieldnames):
            raise UsageError(f"{path}: header must contain V and I")
        rows = [(float(r["V"]), float(r["I"])) for r in reader]
    if len(rows) < 2:
        raise UsageError(f"{path}: need at least two rows")
    V, I = map(np.array, zip(*rows))
    total = float(V[-1]) if I[-1] == 0 else math.inf
    return ProfileCurve(V, I, ambient_dim=dim, total_volume=total)


def _space(config: RunConfig) -> SpaceForm:
    return SpaceForm(config.dim, config.curvature, half=config.half)


def _v_max(config: RunConfig, space: SpaceForm) -> float | None:
    if config.v_max is not None:
        return config.v_max
    if math.isfinite(space.total_volume):
        return None
    # ten unit-radius half-balls, whichever model is being swept
    return 10 * SpaceForm(config.dim, 0.0, half=True).volume_at_radius(1.0)


def _body(config: RunConfig) -> Body2D:
    return Body2D(config.body, config.body_param)


def _body_profile(config: RunConfig) -> ProfileCurve:
    body = _body(config)
    v_max = config.v_max
    if v_max is None and not math.isfinite(body.area):
        v_max = 10 * math.pi / 2
    return body_curve(body, config.grid, v_max)


# --- commands ---------------------------------------------------------------


def _emit_profile(out, config, V, I, total) -> int:
    table = profile_rows(V, I, config.dim - 1, total)
    if config.format == "csv":
        _write_table(out, COLUMNS, table.tolist())
    else:
        results = {name: table[:, k] for k, name in enumerate(COLUMNS)}
        results["total_volume"] = total
        _write_json(out, config, results, [])
    return EXIT_OK


def cmd_model(config: RunConfig, out) -> int:
    space = _space(config)
    V, I, _ = model_samples(space, _v_max(config, space), config.grid)
    return _emit_profile(out, config, V, I, space.total_volume)


def cmd_body(config: RunConfig, out) -> int:
    curve = _body_profile(config)
    return _emit_profile(out, config, curve.V, curve.I, curve.total_volume)


def _emit_reports(out, config, reports, results) -> None:
    if config.format == "json":
        _write_json(out, config, results, reports)
        return
    header = ("name", "passed", "worst_margin", "worst_location", "tolerance", "equality_detected")
    _write_table(out, header, [[r[k] for k in header] for r in reports])


def cmd_compare(config: RunConfig, out) -> int:
    if config.input is not None:
        profile = read_profile_csv(config.input, config.dim)
    else:
        profile = _body_profile(config)
    n = config.dim - 1
    reports = [compare_upper(profile, n, config.curvature, config.tol)]
    if config.curvature > 0 and profile.bounded:
        raw = config.input is not None
        reports.append(compare_lower_LG(normalize(profile), n, config.curvature, config.tol, samples_only=raw))
    dicts = [r.to_dict() for r in reports]
    _emit_reports(out, config, dicts, {"passed": all(r.passed for r in reports)})
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


def cmd_bounds(config: RunConfig, out) -> int:
    if config.body is not None:
        profile = _body_profile(config)
    else:
        space = _space(config)
        if not math.isfinite(space.total_volume):
            raise UsageError("bounds needs finite volume: positive curvature or a bounded --body")
        from .space_forms import model_profile

        profile = model_profile(space, None, config.grid)
    if not profile.bounded:
        raise UsageError("bounds needs a body of finite volume")
    summary = bounds_summary(profile, config.curvature).to_dict()
    if config.format == "json":
        _write_json(out, config, summary, [])
    else:
        _write_table(out, ("quantity", "value"), [[k, "" if v is None else v] for k, v in summary.items()])
    return EXIT_OK


def cmd_verify(config: RunConfig, out) -> int:
    results = acceptance.run_all(samples=config.samples, seed=config.seed)
    for res in results:
        print(res.line, file=sys.stderr)
    ok = all(r.passed for r in results)
    if config.format == "json":
        reports = [rep for res in results for rep in res.reports]
        _write_json(out, config, [r.summary() for r in results], reports)
    else:
        header = ("criterion", "passed", "measured", "threshold", "runtime", "budget")
        _write_table(out, header, [[r.summary()[k] for k in header] for r in results])
    return EXIT_OK if ok else EXIT_FAILED


HANDLERS = {
    "model": cmd_model,
    "body": cmd_body,
    "compare": cmd_compare,
    "bounds": cmd_bounds,
    "verify": cmd_verify,
}


def run(config: RunConfig, out: TextIO | None = None) -> int:
    """Execute ``config``, writing data to ``out``; returns the exit status."""
    out = sys.stdout if out is None else out
    try:
        config.validate()
        return HANDLERS[config.command](config, out)
    except (UsageError, ValueError, OSError) as exc:
        print(f"isoprofile: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


# --- argument parsing -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dim", type=int, default=2, help="ambient dimension d = n + 1")
    common.add_argument("--curvature", type=float, default=0.0, help="curvature bound delta")
    side = common.add_mutually_exclusive_group()
    side.add_argument("--half", dest="half", action="store_true", default=True, help="half-space model (default)")
    side.add_argument("--full", dest="half", action="store_false", help="whole space form")
    common.add_argument("--v-max", type=float, default=None, help="largest volume to sample")
    common.add_argument("--grid", type=int, default=512)
    common.add_argument("--samples", type=int, default=10**6, help="Monte-Carlo samples")
    common.add_argument("--seed", type=int, default=None, help=f"RNG seed (default 42, or ${SEED_ENV})")
    common.add_argument("--tol", type=float, default=1e-8)
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--body", choices=KINDS, default=None, help="flat body")
    common.add_argument("--param", type=float, default=None, help="disk radius, wedge angle or slab width")
    common.add_argument("--input", default=None, help="CSV profile with V and I columns")

    parser = argparse.ArgumentParser(prog="isoprofile", description="Isoperimetric profiles of convex bodies.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("model", parents=[common], help="profile of a space-form model")
    sub.add_parser("body", parents=[common], help="profile of a flat planar body")
    sub.add_parser("compare", parents=[common], help="upper and lower comparison reports")
    sub.add_parser("bounds", parents=[common], help="Cheeger, diameter and eigenvalue bounds")
    sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    return parser


def resolve_seed(flag: int | None, environ=os.environ) -> int:
    if flag is not None:
        return flag
    raw = environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 42
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def config_from_args(args: argparse.Namespace, environ=os.environ) -> RunConfig:
    return RunConfig(
        command=args.command,
        dim=args.dim,
        curvature=args.curvature,
        half=args.half,
        v_max=args.v_max,
        grid=args.grid,
        samples=args.samples,
        seed=resolve_seed(args.seed, environ),
        tol=args.tol,
        format=args.format,
        body=args.body,
        body_param=args.param,
        input=args.input,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except UsageError as exc:
        print(f"isoprofile: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
