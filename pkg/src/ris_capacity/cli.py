"""
Command-line front end::

    ris-capacity <kind> --config <path> --out <path> [--seed N] [--samples N] [--threads N]

Exit status is 0 on success, 2 when the experiment does not validate and 1
when a numerical failure stops the run.
"""

import argparse
import csv
import hashlib
import logging
import platform
import sys
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np
import scipy

from .config import KINDS, ConfigError, load_spec, validate
from .experiments import run_pipeline

__all__ = ["main", "run", "write_csv", "manifest_lines", "format_cell"]

log = logging.getLogger("ris_capacity")


def _package_version():
    try:
        return version("ris-capacity")
    except PackageNotFoundError:
        return "unknown"


def format_cell(value):
    """Deterministic text for a CSV cell: floats with 12 significant
    digits."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def manifest_lines(spec):
    config_hash = ""
    if spec.source and Path(spec.source).exists():
        config_hash = hashlib.sha256(Path(spec.source).read_bytes()).hexdigest()
    return [
        f"ris-capacity {_package_version()} kind={spec.kind} seed={spec.seed} "
        f"samples={spec.option('samples')} threads={spec.threads}",
        "fixed_point_tol=1e-10 fixed_point_damping=0.5 quadrature_rtol=1e-06 "
        f"optimizer_tol={spec.option('optimizer_tol')}",
        f"python={platform.python_version()} numpy={np.__version__} scipy={scipy.__version__}",
        f"config={spec.source} sha256={config_hash}",
    ]


def write_csv(path, table, manifest):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        for line in manifest:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.header)
        for row in table.rows:
            writer.writerow([format_cell(v) for v in row])


def _side_path(out, name):
    out = Path(out)
    return out.with_name(f"{out.stem}_{name}{out.suffix or '.csv'}")


def run(spec):
    """Validate and execute ``spec``, writing the CSV outputs.

    Returns
    -------
    list of pathlib.Path
        Files written.

    Raises
    ------
    ConfigError
        If validation fails; nothing is written.
    """
    problems = validate(spec)
    if problems:
        raise ConfigError(problems)
    table = run_pipeline(spec)
    manifest = manifest_lines(spec)
    written = [Path(spec.output_path)]
    write_csv(spec.output_path, table, manifest)
    for name, extra in table.extras.items():
        path = _side_path(spec.output_path, name)
        write_csv(path, extra, manifest)
        written.append(path)
    return written


def _parser():
    p = argparse.ArgumentParser(prog="ris-capacity", description=__doc__.split("::")[0].strip())
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--config", required=True, help="YAML experiment file")
    p.add_argument("--out", help="output CSV path (overrides the file)")
    p.add_argument("--seed", type=int, help="64-bit master seed")
    p.add_argument("--samples", type=int, help="Monte Carlo sample count")
    p.add_argument("--threads", type=int, help="worker threads")
    p.add_argument("--check", action="store_true",
                   help="only validate the experiment and print diagnostics")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        spec = load_spec(args.config, kind=args.kind, output_path=args.out, seed=args.seed,
                         samples=args.samples, threads=args.threads)
        if args.check:
            problems = validate(spec)
            for msg in problems:
                print(msg, file=sys.stderr)
            return 2 if problems else 0
        written = run(spec)
        for line in manifest_lines(spec):
            print(f"# {line}")
        for path in written:
            print(f"wrote {path}")
    except ConfigError as exc:
        for msg in exc.diagnostics:
            print(f"error: {msg}", file=sys.stderr)
        return 2
    except (ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
