"""Command-line entry point.

``quasispline <command> --config <path> [--out <dir>] [--seed <u64>]``

Writes ``report.json`` and ``table.csv`` (plus ``field.dump`` when the config
asks for it) into the output directory.  ``field.dump`` holds one or more
field records, read back by :func:`quasispline.multiscale.loads_fields`.
Each file is written to a temporary name first and moved into place, so
readers never see partial output.
Exit status is 0 exactly when every asserted check passes.
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
from pathlib import Path
from typing import Any, Sequence

from . import kernels
from .config import COMMANDS, ConfigError, load_config
from .experiments import Report, rate_experiment
from .selftest import run_selftest

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2


def _jsonable(value: Any) -> Any:
    """Replace non-finite floats and numpy scalars so the output is strict JSON."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        value = value.item()
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_json(report: Report) -> str:
    body = dict(_jsonable(report.summary))
    body["rows"] = _jsonable(report.rows)
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


def render_csv(report: Report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(report.columns)
    for row in report.rows:
        writer.writerow([_cell(row.get(c)) for c in report.columns])
    return buf.getvalue()


def write_atomic(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def selftest_report(seed: int) -> Report:
    checks = run_selftest(seed)
    ok = all(c.ok for c in checks)
    summary = {
        "command": "selftest",
        "seed": seed,
        "backend": kernels.BACKEND,
        "checks": len(checks),
        "failed": [c.name for c in checks if not c.ok],
        "pass": ok,
    }
    return Report("selftest", summary, [c.row() for c in checks], columns=("check", "value", "limit", "pass"))


def _seed(text: str) -> int:
    try:
        value = int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quasispline", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=Path, help="JSON experiment config (optional for selftest)")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory (default: current)")
    parser.add_argument("--seed", type=_seed, default=None, help="override the config seed")
    return parser


def run(command: str, config: Path | None, out: Path, seed: int | None = None) -> tuple[int, Report | None]:
    """Execute one command and write its artifacts; returns (exit status, report)."""
    try:
        if command == "selftest":
            if config is not None:
                cfg_seed = load_config(config, seed).seed
            else:
                cfg_seed = 0 if seed is None else seed
            report = selftest_report(cfg_seed)
            dump = None
        else:
            if config is None:
                raise ConfigError("--config", f"required for {command}")
            cfg = load_config(config, seed)
            report = rate_experiment(command, cfg)
            dump = "".join(report.dumps) if cfg.dump_field and report.dumps else None
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG, None

    out.mkdir(parents=True, exist_ok=True)
    write_atomic(out / "report.json", render_json(report))
    write_atomic(out / "table.csv", render_csv(report))
    if dump is not None:
        write_atomic(out / "field.dump", dump)
    status = "PASS" if report.ok else "FAIL"
    print(f"{command}: {status} ({out / 'report.json'})")
    return (EXIT_OK if report.ok else EXIT_FAIL), report


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    code, _ = run(args.command, args.config, args.out, args.seed)
    return code


if __name__ == "__main__":
    sys.exit(main())
