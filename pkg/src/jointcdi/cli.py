"""Command-line entry point ``jointcdi``.

Subcommands
-----------
simulate
    Run a sum-rate experiment from a config file; writes ``sum_rates.csv``
    and ``manifest.json`` into ``--out``.
decompose
    Nearest-Kronecker decomposition of a correlation matrix file, printing
    B, C, the residual, U_h, U_v and Lambda in the matrix text format.
validate
    Run one of the Monte-Carlo property suites; exit 0 iff it passes.

Exit codes: 0 ok, 1 config or input error, 2 numerical failure, 3 validation
failure. ``JOINTCDI_WORKERS`` sets the default worker count.
"""

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__, _kernels
from . import config as cfgmod
from . import matrixio
from .errors import ConfigError, JointCDIError
from .mumimo import SNR_CONVENTION, default_workers, run_experiment
from .stats import hermitian_eig, nearest_kronecker, best_factorization, power_coupling, truncation_rank
from .validate import DEFAULT_SAMPLES, DEFAULT_SIGMAS, SUITES, run_suite

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_VALIDATION = 3

CSV_NAME = "sum_rates.csv"
MANIFEST_NAME = "manifest.json"


def _err(msg):
    print(f"jointcdi: error: {msg}", file=sys.stderr)


def _workers(args):
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        return args.workers
    try:
        return default_workers()
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _load_values(path):
    return {} if path is None else cfgmod.load(path)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(args):
    if args.config is None:
        raise ConfigError("simulate needs --config")
    values = _load_values(args.config)
    if args.seed is not None:
        values["experiment.seed"] = args.seed
    exp = cfgmod.experiment_config(values)
    workers = _workers(args)
    out_dir = args.out or "."

    t0 = time.perf_counter()
    report = run_experiment(exp, workers=workers)
    elapsed = time.perf_counter() - t0

    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, CSV_NAME)
    manifest_path = os.path.join(out_dir, MANIFEST_NAME)
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(report.to_csv())
    echo = cfgmod.serialize(values)
    manifest = {
        "artifact": "jointcdi",
        "version": __version__,
        "command": "simulate",
        "config_path": os.path.abspath(args.config),
        "config": echo,
        "config_sha256": hashlib.sha256(echo.encode()).hexdigest(),
        "master_seed": exp.master_seed,
        "workers": workers,
        "numba": _kernels.USE_NUMBA,
        "snr_convention": SNR_CONVENTION,
        "timing_s": round(elapsed, 3),
        "outputs": {"csv": os.path.abspath(csv_path)},
    }
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    print(f"wrote {csv_path} and {manifest_path} ({elapsed:.1f} s)")
    if np.any(report.n_ok == 0):
        _err("every realization failed for at least one (strategy, snr) row")
        return EXIT_NUMERICAL
    return EXIT_OK


# ---------------------------------------------------------------------------
# decompose
# ---------------------------------------------------------------------------

def cmd_decompose(args):
    try:
        R = matrixio.read_matrix(args.matrix)
    except OSError as e:
        raise ConfigError(f"cannot read matrix {args.matrix}: {e.strerror}") from None
    except ValueError as e:
        raise ConfigError(f"{args.matrix}: {e}") from None
    n = R.shape[0]
    if R.shape[0] != R.shape[1]:
        raise ConfigError(f"matrix must be square, got {R.shape[0]}x{R.shape[1]}")
    if np.linalg.norm(R - R.conj().T) > 1e-8 * max(np.linalg.norm(R), 1e-300):
        raise ConfigError("matrix is not Hermitian")
    if (args.n_h is None) != (args.n_v is None):
        raise ConfigError("give both --n-h and --n-v, or neither")
    if args.n_h is not None:
        if args.n_h < 1 or args.n_v < 1 or args.n_h * args.n_v != n:
            raise ConfigError(f"--n-h {args.n_h} x --n-v {args.n_v} does not match size {n}")
        kf = nearest_kronecker(R, args.n_h, args.n_v)
    else:
        kf = best_factorization(R)
    lam_v, U_v = hermitian_eig(kf.B)
    lam_h, U_h = hermitian_eig(kf.C)
    Lam = power_coupling(R, U_h, U_v)
    parts = [
        f"# n_h {kf.n_h} n_v {kf.n_v}",
        f"# residual {kf.residual!r}",
        f"# r_h {truncation_rank(lam_h, args.energy_threshold)} "
        f"r_v {truncation_rank(lam_v, args.energy_threshold)}",
    ]
    for name, M in (("B", kf.B), ("C", kf.C), ("U_h", U_h), ("U_v", U_v), ("Lambda", Lam)):
        parts.append(f"# {name}")
        parts.append(matrixio.format_matrix(M).rstrip("\n"))
    text = "\n".join(parts) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def cmd_validate(args):
    values = _load_values(args.config)
    params = cfgmod.validate_params(values)
    suite = args.suite or params.get("suite")
    if suite is None:
        raise ConfigError(f"no suite given; choose one of {SUITES}")
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; choose one of {SUITES}")
    seed = args.seed if args.seed is not None else values.get("experiment.seed", 0)
    geom = cfgmod.array_geometry(values)
    scen = cfgmod.scenario_config(values)
    samples = args.samples or params.get("samples", DEFAULT_SAMPLES)
    result = run_suite(suite, geom, scen, seed=seed, samples=samples,
                       sigmas=params.get("sigma_deg", DEFAULT_SIGMAS),
                       users=params.get("users", 1), threshold=params.get("threshold"),
                       trials=params.get("trials", 100))
    text = "\n".join(result.lines()) + "\n"
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return EXIT_OK if result.passed else EXIT_VALIDATION


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--seed", type=int, help="master seed (overrides experiment.seed)")
    common.add_argument("--workers", type=int,
                        help="worker processes (default: $JOINTCDI_WORKERS or 1)")
    common.add_argument("--out", help="output directory (simulate) or file (decompose, validate)")

    p = argparse.ArgumentParser(prog="jointcdi", description="Joint CDI quantization for 3D MIMO.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="run a sum-rate experiment")
    s.set_defaults(func=cmd_simulate)

    d = sub.add_parser("decompose", parents=[common], help="nearest-Kronecker decomposition of a matrix file")
    d.add_argument("matrix", help="matrix text file ('rows cols' then 're im' pairs)")
    d.add_argument("--n-h", type=int, help="horizontal factor size (default: best split)")
    d.add_argument("--n-v", type=int, help="vertical factor size")
    d.add_argument("--energy-threshold", type=float, default=0.9)
    d.set_defaults(func=cmd_decompose)

    v = sub.add_parser("validate", parents=[common], help="run a property suite")
    v.add_argument("suite", nargs="?", choices=SUITES)
    v.add_argument("--samples", type=int, help="channel samples per case")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors; usage errors are config errors here
        return EXIT_CONFIG if e.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as e:
        _err(str(e))
        return EXIT_CONFIG
    except (JointCDIError, ArithmeticError, np.linalg.LinAlgError) as e:
        _err(f"numerical failure: {e}")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
