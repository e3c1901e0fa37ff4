"""``refcheck`` command line: ``check``, ``validate`` and ``emit-smt``.

Options may also come from a ``refcheck.toml`` next to the source (or
schema) file; command-line flags win over the file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional, Sequence

import tomli

from .errors import RefcheckError, UnknownTypeName
from .lang import parse_program, resolve
from .lang.resolve import ResolvedProgram
from .report import EXIT_OK, EXIT_USAGE, Report, check_program
from .smt.encode import EncodeOptions, Vc, encode_program, generate_call_sites
from .solver import SolverConfig, default_executable
from .validator import validate_named
from .values import parse_json_value

CONFIG_NAME = "refcheck.toml"


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class CheckConfig:
    solver_path: Optional[str] = None
    timeout_ms: int = 10000
    jobs: int = 1
    legacy_smt_names: bool = False
    emit_smt: Optional[str] = None
    format: Optional[str] = None  # None: text for check, json for validate
    open_world: bool = False

    def solver(self) -> SolverConfig:
        return SolverConfig(
            executable=self.solver_path or default_executable(),
            timeout_ms=self.timeout_ms,
            legacy_names=self.legacy_smt_names,
        )

    def encode_options(self) -> EncodeOptions:
        return EncodeOptions(legacy_names=self.legacy_smt_names, timeout_ms=self.timeout_ms)


_TYPES = {f.name: f.type for f in fields(CheckConfig)}


def load_config(source: str | os.PathLike, overrides: Optional[dict] = None) -> CheckConfig:
    """Defaults, then ``refcheck.toml`` beside ``source``, then ``overrides`` (non-None values)."""
    cfg = CheckConfig()
    path = Path(source).resolve().parent / CONFIG_NAME
    if path.is_file():
        try:
            data = tomli.loads(path.read_text(encoding="utf-8"))
        except (tomli.TOMLDecodeError, OSError) as e:
            raise UsageError(f"{path}: {e}") from None
        settings = {}
        for key, value in data.items():
            name = key.replace("-", "_")
            if name not in _TYPES:
                raise UsageError(f"{path}: unknown option {key!r}")
            settings[name] = value
        cfg = _apply(cfg, settings, str(path))
    if overrides:
        cfg = _apply(cfg, {k: v for k, v in overrides.items() if v is not None}, "command line")
    return cfg


def _apply(cfg: CheckConfig, settings: dict, origin: str) -> CheckConfig:
    for name, value in settings.items():
        if name in ("timeout_ms", "jobs"):
            if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
                raise UsageError(f"{origin}: {name} must be a positive integer")
        elif name in ("legacy_smt_names", "open_world"):
            if not isinstance(value, bool):
                raise UsageError(f"{origin}: {name} must be true or false")
        elif name == "format":
            if value not in ("text", "json"):
                raise UsageError(f"{origin}: format must be 'text' or 'json'")
        elif not isinstance(value, str):
            raise UsageError(f"{origin}: {name} must be a string")
    return replace(cfg, **settings)


def load_program(path: str | os.PathLike) -> ResolvedProgram:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    return resolve(parse_program(data))


def cmd_check(source: str | os.PathLike, cfg: CheckConfig) -> tuple[Report, int]:
    """Parse, resolve, encode and solve; returns the report and the exit code."""
    rp = load_program(source)
    if cfg.emit_smt:
        cmd_emit_smt(source, cfg.emit_smt, cfg)
    solver = cfg.solver()
    has_vcs = any(isinstance(s, Vc) for s in generate_call_sites(rp, cfg.encode_options()))
    if has_vcs and not solver.available():
        raise UsageError(
            f"SMT solver {solver.executable!r} not found; install z3 (e.g. `pip install z3-solver`), "
            f"pass --solver-path or set REFCHECK_SOLVER"
        )
    report = check_program(rp, solver, cfg.jobs)
    return report, report.exit_code


def cmd_validate(schema: str | os.PathLike, type_name: str, json_text: str | bytes, cfg: CheckConfig) -> tuple[list, int]:
    """Validate one JSON value against ``type_name``; exit 0 valid, 1 invalid."""
    rp = load_program(schema)
    value = parse_json_value(json_text)
    errors = validate_named(value, type_name, rp, open_world=cfg.open_world)
    return errors, (1 if errors else EXIT_OK)


def cmd_emit_smt(source: str | os.PathLike, out_dir: str | os.PathLike, cfg: CheckConfig) -> list[Path]:
    """Write ``prelude.smt2`` plus one ``<procedure>.<call>.smt2`` per VC; returns the paths."""
    rp = load_program(source)
    opts = cfg.encode_options()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    prelude, _ = encode_program(rp, opts)
    files = [("prelude.smt2", prelude.render())]
    files += [(s.filename, s.script.render()) for s in generate_call_sites(rp, opts) if isinstance(s, Vc)]
    for name, text in files:
        p = out / name
        with open(p, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        written.append(p)
    return written


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="refcheck", description="Refinement type checker for .rj service sources.")
    sub = ap.add_subparsers(dest="command", required=True)

    def solver_flags(p):
        p.add_argument("--solver-path", help="SMT solver executable (default: $REFCHECK_SOLVER or z3)")
        p.add_argument("--timeout-ms", type=int, help="per-VC solver timeout (default 10000)")
        p.add_argument("--legacy-smt-names", action="store_const", const=True,
                       help="use pre-2.6 names such as str.in.re")

    p = sub.add_parser("check", help="statically check every call site")
    p.add_argument("source")
    solver_flags(p)
    p.add_argument("--jobs", type=int, help="number of VCs solved in parallel")
    p.add_argument("--emit-smt", metavar="DIR", help="also write the SMT scripts to DIR")
    p.add_argument("--format", choices=("text", "json"))

    p = sub.add_parser("validate", help="validate a JSON value against a type")
    p.add_argument("schema")
    p.add_argument("type_name")
    p.add_argument("json", nargs="?", default="-", help="JSON file, or - for stdin")
    p.add_argument("--open-world", action="store_const", const=True, help="accept undeclared fields")
    p.add_argument("--format", choices=("text", "json"))

    p = sub.add_parser("emit-smt", help="write the SMT-LIB scripts without solving")
    p.add_argument("source")
    p.add_argument("out_dir")
    solver_flags(p)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        if args.command == "check":
            cfg = load_config(args.source, {
                "solver_path": args.solver_path, "timeout_ms": args.timeout_ms, "jobs": args.jobs,
                "legacy_smt_names": args.legacy_smt_names, "emit_smt": args.emit_smt, "format": args.format,
            })
            report, code = cmd_check(args.source, cfg)
            if (cfg.format or "text") == "json":
                print(json.dumps(report.to_json(), indent=2))
            else:
                sys.stdout.write(report.to_text())
            return code
        if args.command == "validate":
            cfg = load_config(args.schema, {"open_world": args.open_world, "format": args.format})
            if args.json == "-":
                text = sys.stdin.buffer.read()
            else:
                try:
                    text = Path(args.json).read_bytes()
                except OSError as e:
                    raise UsageError(f"cannot read {args.json}: {e.strerror}") from None
            errors, code = cmd_validate(args.schema, args.type_name, text, cfg)
            if (cfg.format or "json") == "text":
                for e in errors:
                    print(e)
                if not errors:
                    print("valid")
            else:
                print(json.dumps([e.to_json() for e in errors], indent=2))
            return code
        cfg = load_config(args.source, {
            "solver_path": args.solver_path, "timeout_ms": args.timeout_ms, "legacy_smt_names": args.legacy_smt_names,
        })
        for p in cmd_emit_smt(args.source, args.out_dir, cfg):
            print(p)
        return EXIT_OK
    except UnknownTypeName as e:
        print(f"refcheck: {e}", file=sys.stderr)
        return EXIT_USAGE
    except RefcheckError as e:
        where = getattr(args, "source", None) or getattr(args, "schema", "")
        print(f"{where}:{e}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as e:
        print(f"refcheck: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
