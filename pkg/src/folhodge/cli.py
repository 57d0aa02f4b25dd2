"""Command-line front end.

Exit codes: 0 success, 2 validation failure, 3 numerical reliability
failure (including identity residuals above tolerance), 4 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import catalog as catalogs
from . import hodge, operators
from .errors import (
    DegreeError,
    ModelValidationError,
    NumericalReliabilityError,
    OrientationError,
    SchemaError,
    TautnessMismatchError,
)
from .model import CoframeModel, dumps, load_model, validate

REPORT_SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_USAGE = 4

DEFAULT_IDENTITY_TOL = 1e-10
TOL_ENV = "FOLHODGE_TOL_OVERRIDE"

MODEL_CATALOG = ("carriere", "flat-torus", "carriere-product")
SUSPENSION_CATALOG = {"suspension-7.2": "7.2", "suspension-7.3": "7.3"}
COMMANDS = ("verify", "betti", "spectrum", "duality", "conformal", "suspend", "export-model", "dump")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Everything one CLI invocation needs."""

    command: str
    catalog: str | None = None
    model_path: str | None = None
    lam: float | None = None
    lambda_trace: float | None = None
    grid: int | None = None
    q: int = 2
    m: int = 1
    potential: list = field(default_factory=list)
    h_terms: list = field(default_factory=list)
    operator: str = "twisted-laplacian"
    degree: int = 0
    count: int | None = None
    identity_tol: float = DEFAULT_IDENTITY_TOL
    harmonic_rel: float = hodge.HARMONIC_REL
    fmt: str = "text"
    output: str | None = None
    preset: str | None = None
    base_betti: list | None = None
    pattern: str = catalogs.CONSTANTS_ONLY
    fiber_codim: int = 0
    oriented: bool = True
    taut: bool = False

    def check(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.command != "suspend" and (self.catalog is None) == (self.model_path is None):
            raise UsageError("give exactly one of --catalog or --model")
        if self.identity_tol <= 0 or self.harmonic_rel <= 0:
            raise UsageError("tolerances must be positive")
        if self.count is not None and self.count < 1:
            raise UsageError("--count must be at least 1")
        if self.fmt == "csv" and self.command != "spectrum":
            raise UsageError("csv output is only available for spectrum")


# helpers ---------------------------------------------------------------------------


def parse_term(text: str) -> tuple[str, float, tuple[int, ...]]:
    """Parse ``kind:amplitude:m1[,m2...]``, e.g. ``sin:0.3:1``."""
    parts = text.split(":")
    if len(parts) != 3 or parts[0] not in ("sin", "cos", "exp"):
        raise UsageError(f"bad term {text!r}; expected kind:amplitude:modes with kind sin, cos or exp")
    try:
        amp = float(parts[1])
        modes = tuple(int(x) for x in parts[2].split(","))
    except ValueError:
        raise UsageError(f"bad term {text!r}") from None
    return parts[0], amp, modes


def _lambda(cfg: RunConfig) -> float:
    if cfg.lam is not None and cfg.lambda_trace is not None:
        raise UsageError("give at most one of --lambda and --lambda-trace")
    if cfg.lambda_trace is not None:
        try:
            return catalogs.lambda_from_trace(cfg.lambda_trace)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return catalogs.GOLDEN_LAMBDA if cfg.lam is None else cfg.lam


def build_model(cfg: RunConfig) -> CoframeModel:
    if cfg.model_path is not None:
        try:
            model = load_model(cfg.model_path, check=False)
        except OSError as exc:
            raise UsageError(f"cannot read model file: {exc}") from None
        return model if cfg.grid is None else model.with_grid(cfg.grid)
    name = cfg.catalog
    try:
        if name == "carriere":
            return catalogs.make_carriere(_lambda(cfg), cfg.grid or 64)
        if name == "carriere-product":
            return catalogs.make_carriere_product(_lambda(cfg), cfg.m, cfg.grid or 64)
        if name == "flat-torus":
            n = cfg.grid or (64 if cfg.q == 1 else 32)
            h = catalogs.h_table(cfg.potential, cfg.q) if cfg.potential else None
            return catalogs.make_flat_torus(cfg.q, n, h)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if name in SUSPENSION_CATALOG:
        raise UsageError(f"{name} is bookkeeping only; use the suspend command")
    raise UsageError(f"unknown catalog model {name!r}; choose from {', '.join(MODEL_CATALOG + tuple(SUSPENSION_CATALOG))}")


def _identity_tol(cfg: RunConfig) -> float:
    raw = os.environ.get(TOL_ENV)
    if raw:
        try:
            value = float(raw)
        except ValueError:
            raise UsageError(f"{TOL_ENV} must be a float") from None
        if not value > 0:
            raise UsageError(f"{TOL_ENV} must be positive")
        return value
    return cfg.identity_tol


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def _model_info(model: CoframeModel) -> dict:
    return {"name": model.name, "q": model.q, "grid": list(model.grid_shape), "fingerprint": model.fingerprint}


def atomic_write(path: str | os.PathLike, data: str | bytes) -> None:
    """Write via a temporary file in the target directory and rename into place."""
    path = Path(path)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(cfg: RunConfig, payload: dict, text: str, rows: list | None = None) -> None:
    if cfg.fmt == "json":
        body = dict(payload, schema_version=REPORT_SCHEMA_VERSION, command=cfg.command)
        out = json.dumps(_clean(body), sort_keys=True, indent=2) + "\n"
    elif cfg.fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["operator", "degree", "index", "eigenvalue", "residual"])
        for row in rows or []:
            writer.writerow([row[0], row[1], row[2], repr(float(row[3])), repr(float(row[4]))])
        out = buf.getvalue()
    else:
        out = text if text.endswith("\n") else text + "\n"
    if cfg.output:
        atomic_write(cfg.output, out)
    else:
        sys.stdout.write(out)


# commands --------------------------------------------------------------------------


def _validated(cfg: RunConfig) -> CoframeModel:
    model = build_model(cfg)
    validate(model).raise_if_failed()
    return model


def cmd_verify(cfg: RunConfig) -> int:
    model = build_model(cfg)
    report = validate(model)
    if not report.passed:
        _emit(cfg, {"model": _model_info(model), "validation": report.to_dict()}, "validation failed: " + report.summary())
        return EXIT_VALIDATION
    tol = _identity_tol(cfg)
    suite = operators.identity_suite(model)
    bad = suite.failures(tol)
    lines = [f"model {model.name} grid {model.grid_shape}: validation passed (taut={report.taut})"]
    lines.append(f"{'identity':40s} {'degree':>6s} {'residual':>12s}")
    for r in suite.residuals:
        flag = "" if r.residual < tol else "  FAIL"
        lines.append(f"{r.name:40s} {r.degree:6d} {r.residual:12.3e}{flag}")
    lines.append(f"worst residual {suite.worst():.3e} (tolerance {tol:.1e}): {'ok' if not bad else 'FAILED'}")
    payload = {
        "model": _model_info(model),
        "validation": report.to_dict(),
        "identities": suite.to_dict(),
        "tolerance": tol,
        "passed": not bad,
    }
    _emit(cfg, payload, "\n".join(lines))
    return EXIT_OK if not bad else EXIT_NUMERICAL


def cmd_betti(cfg: RunConfig) -> int:
    model = _validated(cfg)
    rep = hodge.cohomology_report(model, rel=cfg.harmonic_rel)
    text = "\n".join(
        [
            f"model {model.name} grid {rep.grid}",
            f"betti   {list(rep.betti)}",
            f"twisted {list(rep.twisted)}",
            f"euler {rep.euler}  twisted euler {rep.twisted_euler}",
            f"taut {str(rep.taut).lower()}",
            f"signature {rep.signature if rep.signature is not None else 'n/a'}",
        ]
    )
    _emit(cfg, dict(rep.to_dict(), model=_model_info(model)), text)
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig) -> int:
    model = _validated(cfg)
    count = cfg.count or 10
    try:
        res = hodge.spectrum(model, cfg.operator, cfg.degree, count)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = [(res.operator, res.degree, i, v, r) for i, (v, r) in enumerate(zip(res.eigenvalues, res.residuals))]
    lines = [f"{res.operator} degree {res.degree} on {model.name} grid {model.grid_shape}"]
    lines += [f"{i:4d} {v:.12g}  (residual {r:.1e})" for _, _, i, v, r in rows]
    lines.append("multiplicities: " + ", ".join(f"{v:.8g} x{m}" for v, m in res.multiplicities))
    _emit(cfg, dict(res.to_dict(), model=_model_info(model)), "\n".join(lines), rows)
    return EXIT_OK


def cmd_duality(cfg: RunConfig) -> int:
    model = _validated(cfg)
    k = cfg.degree
    rep = hodge.duality_check(model, (k, model.q - k), cfg.count or 20)
    text = (
        f"degrees ({k}, {model.q - k}) first {rep.count} eigenvalues: max gap {rep.eigenvalue_gap:.3e}, "
        f"star residual {rep.star_residual:.3e}"
    )
    _emit(cfg, dict(rep.to_dict(), model=_model_info(model)), text)
    return EXIT_OK


def cmd_conformal(cfg: RunConfig) -> int:
    if not cfg.h_terms:
        raise UsageError("conformal needs at least one --h-term")
    model = _validated(cfg)
    table = catalogs.h_table(cfg.h_terms, len(model.active))
    rep = hodge.conformal_compare(model, table, cfg.count or 10)
    lines = [f"conformal change on {model.name}: first {rep.count} eigenvalues per degree"]
    lines += [f"degree {k}: max gap {g:.3e}" for k, g in enumerate(rep.eigenvalue_gaps)]
    lines.append(f"min eigenvector alignment {rep.min_alignment:.12f}")
    if rep.normalized:
        lines.append("note: the mean of h was removed")
    _emit(cfg, dict(rep.to_dict(), model=_model_info(model)), "\n".join(lines))
    return EXIT_OK


def cmd_suspend(cfg: RunConfig) -> int:
    preset = cfg.preset
    if cfg.catalog is not None:
        if cfg.catalog not in SUSPENSION_CATALOG:
            raise UsageError(f"suspend accepts {', '.join(SUSPENSION_CATALOG)}")
        preset = SUSPENSION_CATALOG[cfg.catalog]
    try:
        if preset is not None:
            if preset not in catalogs.PRESETS:
                raise UsageError(f"unknown preset {preset!r}")
            source = preset
        elif cfg.base_betti:
            source = catalogs.SuspensionInput(
                tuple(cfg.base_betti), cfg.pattern, cfg.fiber_codim, cfg.oriented, cfg.taut
            )
        else:
            raise UsageError("suspend needs --preset, a suspension catalog name, or --base-betti")
        rep = catalogs.suspension_report(source)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    text = "\n".join(
        [f"betti {list(rep.betti)}", f"euler {rep.euler}"] + [f"constraint {c}" for c in rep.constraints]
    )
    _emit(cfg, rep.to_dict(), text)
    return EXIT_OK


def cmd_export(cfg: RunConfig) -> int:
    model = build_model(cfg)
    if cfg.output:
        atomic_write(cfg.output, dumps(model))
    else:
        sys.stdout.write(dumps(model))
    return EXIT_OK


def cmd_dump(cfg: RunConfig) -> int:
    """Write an operator matrix as column-major (re, im) float64 pairs plus a JSON sidecar."""
    if not cfg.output:
        raise UsageError("dump needs --output")
    model = _validated(cfg)
    name = cfg.operator
    if name not in operators.OPERATOR_NAMES:
        raise UsageError(f"unknown operator {name!r}; choose from {', '.join(operators.OPERATOR_NAMES)}")
    block = operators.assemble(model, name, cfg.degree)
    mat = block.dense()
    pairs = np.stack([mat.real, mat.imag], axis=-1)
    data = np.ascontiguousarray(pairs.transpose(1, 0, 2)).astype("<f8").tobytes()
    sidecar = {
        "name": name,
        "k": cfg.degree,
        "codomain": list(block.codomain) if isinstance(block.codomain, tuple) else block.codomain,
        "dims": list(mat.shape),
        "layout": "column-major complex128 as little-endian (re, im) float64 pairs",
        "model_hash": model.fingerprint,
    }
    atomic_write(cfg.output, data)
    atomic_write(str(cfg.output) + ".json", json.dumps(sidecar, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


HANDLERS = {
    "verify": cmd_verify,
    "betti": cmd_betti,
    "spectrum": cmd_spectrum,
    "duality": cmd_duality,
    "conformal": cmd_conformal,
    "suspend": cmd_suspend,
    "export-model": cmd_export,
    "dump": cmd_dump,
}


def run(cfg: RunConfig) -> int:
    """Execute one command; diagnostics go to stderr as one line."""
    try:
        cfg.check()
        return HANDLERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"folhodge: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SchemaError, ModelValidationError) as exc:
        print(f"folhodge: validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalReliabilityError, TautnessMismatchError) as exc:
        print(f"folhodge: numerical reliability failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DegreeError, OrientationError) as exc:
        print(f"folhodge: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


# argument parsing ------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_model_args(p: argparse.ArgumentParser) -> None:
    src = p.add_argument_group("model source")
    src.add_argument("--catalog", help="catalog model: " + ", ".join(MODEL_CATALOG + tuple(SUSPENSION_CATALOG)))
    src.add_argument("--model", dest="model_path", metavar="PATH", help="model file (JSON)")
    src.add_argument("--lambda", dest="lam", type=float, help="Carrière eigenvalue λ > 1")
    src.add_argument("--lambda-trace", type=float, help="trace of the hyperbolic matrix; λ + 1/λ = trace")
    src.add_argument("-N", "--grid", type=int, help="grid size per active axis")
    src.add_argument("--q", type=int, default=2, help="codimension of the flat torus (default 2)")
    src.add_argument("--m", type=int, default=1, help="extra circles in carriere-product (default 1)")
    src.add_argument(
        "--potential-term",
        dest="potential",
        action="append",
        default=[],
        type=_term,
        metavar="KIND:AMP:MODES",
        help="flat-torus potential term, κ = dh (repeatable)",
    )


def _add_output_args(p: argparse.ArgumentParser, csv_ok: bool = False) -> None:
    choices = ["json", "csv", "text"] if csv_ok else ["json", "text"]
    p.add_argument("--format", dest="fmt", choices=choices, default="text")
    p.add_argument("--output", "-o", help="write the report atomically to this path")


def _term(text: str):
    try:
        return parse_term(text)
    except UsageError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="folhodge", description="Twisted basic cohomology on coframe models.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify", help="validation gates and the operator identity suite")
    _add_model_args(p)
    p.add_argument("--identity-tol", type=float, default=DEFAULT_IDENTITY_TOL)
    _add_output_args(p)

    p = sub.add_parser("betti", help="ordinary and twisted Betti numbers")
    _add_model_args(p)
    p.add_argument("--harmonic-rel", type=float, default=hodge.HARMONIC_REL)
    _add_output_args(p)

    p = sub.add_parser("spectrum", help="lowest eigenvalues of a Laplacian")
    _add_model_args(p)
    p.add_argument("--op", dest="operator", choices=["twisted-laplacian", "basic-laplacian"], default="twisted-laplacian")
    p.add_argument("--degree", type=int, default=0)
    p.add_argument("--count", type=int, default=10)
    _add_output_args(p, csv_ok=True)

    p = sub.add_parser("duality", help="compare spectra in degrees k and q-k")
    _add_model_args(p)
    p.add_argument("--degree", type=int, default=0)
    p.add_argument("--count", type=int, default=20)
    _add_output_args(p)

    p = sub.add_parser("conformal", help="spectra before and after κ -> κ + dh")
    _add_model_args(p)
    p.add_argument("--h-term", dest="h_terms", action="append", default=[], type=_term, metavar="KIND:AMP:MODES")
    p.add_argument("--count", type=int, default=10)
    _add_output_args(p)

    p = sub.add_parser("suspend", help="suspension Betti bookkeeping")
    p.add_argument("--catalog", choices=sorted(SUSPENSION_CATALOG))
    p.add_argument("--preset", choices=sorted(catalogs.PRESETS))
    p.add_argument("--base-betti", type=lambda s: [int(x) for x in s.split(",")])
    p.add_argument("--pattern", choices=[catalogs.CONSTANTS_ONLY, catalogs.WITH_VOLUME], default=catalogs.CONSTANTS_ONLY)
    p.add_argument("--fiber-codim", type=int, default=0)
    p.add_argument("--non-oriented", dest="oriented", action="store_false")
    p.add_argument("--taut", action="store_true")
    _add_output_args(p)

    p = sub.add_parser("export-model", help="write a model file")
    _add_model_args(p)
    p.add_argument("--output", "-o")

    p = sub.add_parser("dump", help="write an operator matrix and its descriptor")
    _add_model_args(p)
    p.add_argument("--op", dest="operator", default="d", help="operator name, e.g. d, delta_tilde, Delta_tilde")
    p.add_argument("--degree", type=int, default=0)
    p.add_argument("--output", "-o")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    known = set(RunConfig.__dataclass_fields__)
    return RunConfig(**{k: v for k, v in vars(args).items() if k in known})


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return run(config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
