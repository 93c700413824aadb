"""``ctxkit`` command line: validate, analyze, bootstrap, batch, dump.

Exit codes: 0 ok, 1 validation failure, 2 usage or parse error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import __version__
from .core import DEFAULT_NORM_TOL, DEFAULT_TOL, validate
from .modelfile import ModelFileError, dumps, load
from .report import BATCH_COLUMNS, analyze, batch_row, parse_measures
from .scenarios import PRESETS, preset
from .stats import DEFAULT_BINS, DEFAULT_SAMPLES, BootstrapConfig, bootstrap, histogram_csv

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _err(msg):
    print(msg, file=sys.stderr)


def _load_source(args):
    """Model and a source label from ``path`` or ``--preset``."""
    path, name = getattr(args, "path", None), getattr(args, "preset", None)
    if (path is None) == (name is None):
        raise UsageError("give exactly one of a model file or --preset")
    if name is not None:
        return preset(name), f"preset:{name}"
    try:
        model = load(path, renormalize_rows=args.renormalize)
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise UsageError(f"{path}: {exc}") from None
    return model, str(path)


def _require_valid(model, norm_tol):
    problems = validate(model, norm_tol)
    for p in problems:
        _err(str(p))
    return not problems


def cmd_validate(args) -> int:
    try:
        model = load(args.path, renormalize_rows=args.renormalize)
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        _err(f"{args.path}: {exc}")
        return EXIT_USAGE
    except ModelFileError as exc:
        for d in exc.diagnostics:
            print(d)
        return EXIT_INVALID
    problems = validate(model, args.tol)
    for p in problems:
        print(p)
    if problems:
        return EXIT_INVALID
    print("ok")
    return EXIT_OK


def _table(report: dict) -> str:
    lines = []

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k, v in obj.items():
                walk(f"{prefix}.{k}" if prefix else k, v)
        elif isinstance(obj, list) and obj and not isinstance(obj[0], (int, float)):
            for item in obj:
                lines.append(f"{prefix:<30} {item}")
        else:
            lines.append(f"{prefix:<30} {obj}")

    walk("", report)
    return "\n".join(lines) + "\n"


def cmd_analyze(args) -> int:
    model, source = _load_source(args)
    if not _require_valid(model, args.norm_tol):
        return EXIT_INVALID
    report = analyze(model, source, parse_measures(args.measures), args.tol, args.norm_tol)
    if args.format == "json":
        payload = {"ctxkit_version": __version__, "report": report}
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    else:
        sys.stdout.write(_table(report))
    return EXIT_OK


def _parse_counts(text):
    try:
        values = [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"invalid counts {text!r}") from None
    if any(v < 1 for v in values):
        raise UsageError("counts must be positive")
    return values[0] if len(values) == 1 else values


def cmd_bootstrap(args) -> int:
    model, source = _load_source(args)
    if not _require_valid(model, DEFAULT_NORM_TOL):
        return EXIT_INVALID
    try:
        config = BootstrapConfig(args.samples, _parse_counts(args.counts), args.seed,
                                 args.measure, args.bins)
        result = bootstrap(model, config)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    summary = {"source": source, **result.summary()}
    if args.format == "json":
        sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    else:
        for k, v in summary.items():
            print(f"{k:<20} {v}")
    if args.hist_out:
        Path(args.hist_out).write_text(histogram_csv(result), encoding="utf-8")
    return EXIT_OK


def cmd_batch(args) -> int:
    directory = Path(args.dir)
    if not directory.is_dir():
        raise UsageError(f"{directory} is not a directory")
    measures = parse_measures(args.measures)
    rows, failed = [], False
    for path in sorted(directory.glob("*.json")):
        try:
            model = load(path, renormalize_rows=args.renormalize)
            problems = validate(model, args.norm_tol)
            if problems:
                raise ModelFileError([str(p) for p in problems])
            rows.append(batch_row(path.name, analyze(model, path.name, measures, args.tol, args.norm_tol)))
        except (OSError, json.JSONDecodeError, UnicodeDecodeError, ModelFileError) as exc:
            failed = True
            rows.append(batch_row(path.name, None, str(exc)))
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BATCH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    if args.out:
        Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_INVALID if failed else EXIT_OK


def cmd_dump(args) -> int:
    text = dumps(preset(args.preset), name=args.preset)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _add_source(p):
    p.add_argument("path", nargs="?", help="model JSON file")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--renormalize", action="store_true", help="divide each row by its sum on load")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctxkit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ctxkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a model file")
    p.add_argument("path")
    p.add_argument("--tol", type=float, default=DEFAULT_NORM_TOL, help="normalization tolerance")
    p.add_argument("--renormalize", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("analyze", help="compute contextuality and signalling measures")
    _add_source(p)
    p.add_argument("--measures", default=None, help="comma list of cf,sf,emeriau,chsh,cbd")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="LP / non-signalling tolerance")
    p.add_argument("--norm-tol", type=float, default=DEFAULT_NORM_TOL)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bootstrap", help="multinomial bootstrap of a measure")
    _add_source(p)
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--counts", default="87", help="per-context sample size, one value or a comma list")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--measure", default="violation", help="violation, cnt1 or cf")
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p.add_argument("--hist-out", default=None, help="write histogram CSV here")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("batch", help="analyze every *.json model in a directory")
    p.add_argument("dir")
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p.add_argument("--measures", default=None)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--norm-tol", type=float, default=DEFAULT_NORM_TOL)
    p.add_argument("--renormalize", action="store_true")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("dump", help="write a preset model file")
    p.add_argument("--preset", required=True, choices=sorted(PRESETS))
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_dump)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        _err(f"ctxkit {args.command}: {exc}")
        return EXIT_USAGE
    except ModelFileError as exc:
        for d in exc.diagnostics:
            _err(d)
        return EXIT_INVALID
    except ValueError as exc:
        _err(f"ctxkit {args.command}: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
