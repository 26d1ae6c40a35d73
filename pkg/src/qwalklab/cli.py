"""Command-line front end: validate, run, and estimate experiment configs.

Exit codes: 0 success, 1 invalid config or usage, 2 resource budget
exceeded, 3 numerical accuracy failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import parse_config, validate
from .errors import (
    InvalidParameterError,
    NumericalFailureError,
    QwalkError,
    ResourceLimitError,
)
from .runner import estimate, run

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RESOURCE = 2
EXIT_NUMERICAL = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qwalklab",
        description="Quantum-walk experiments driven by TOML configs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check a config and report diagnostics")
    p_validate.add_argument("config", type=Path)

    p_run = sub.add_parser("run", help="execute a config and write artifacts")
    p_run.add_argument("config", type=Path)
    p_run.add_argument("--out", type=Path, required=True, help="output directory")
    p_run.add_argument("--seed", type=int, default=None, help="override run.seed")
    p_run.add_argument(
        "--threads", type=int, default=1, help="sweep values evaluated in parallel"
    )

    p_est = sub.add_parser("estimate", help="print resource needs without running")
    p_est.add_argument("config", type=Path)
    return parser


def _load(path: Path):
    if not path.exists():
        print(f"config file not found: {path}", file=sys.stderr)
        return None
    try:
        return parse_config(path)
    except InvalidParameterError as exc:
        print(str(exc), file=sys.stderr)
        return None


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    config = _load(args.config)
    if config is None:
        return EXIT_INVALID

    if args.command == "validate":
        diags = validate(config)
        for d in diags:
            print(str(d), file=sys.stderr)
        if diags:
            return EXIT_INVALID
        print("ok")
        return EXIT_OK

    if args.command == "estimate":
        try:
            rows = estimate(config)
        except QwalkError as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_INVALID
        for row in rows:
            bits = [
                f"{row['label']}:",
                f"n_vertices={row['n_vertices']}",
                f"required_amplitudes={row['required_amplitudes']}",
                f"budget={row['amplitude_budget']}",
                f"fits={'yes' if row['fits_budget'] else 'no'}",
                f"bytes@complex128={row['memory_bytes_complex128']}",
            ]
            if "qubits_needed" in row:
                bits.append(f"qubits_needed={row['qubits_needed']}")
            print("  ".join(bits))
        return EXIT_OK

    # run
    diags = validate(config)
    if diags:
        for d in diags:
            print(str(d), file=sys.stderr)
        return EXIT_INVALID
    try:
        manifest = run(config, args.out, threads=args.threads, seed_override=args.seed)
    except ResourceLimitError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_RESOURCE
    except NumericalFailureError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_NUMERICAL
    except QwalkError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INVALID
    for entry in manifest["runs"]:
        label = entry["label"] or "single"
        sigma = entry["metrics"].get("sigma")
        extra = f"  sigma={sigma:.6g}" if sigma is not None else ""
        print(f"{label}: wrote {', '.join(entry['files'])}{extra}")
    print(f"manifest: {Path(args.out) / 'manifest.json'}")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
