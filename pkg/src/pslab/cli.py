"""Command-line entry point.

Every command writes one CSV (the reproducibility contract: 17 significant
digits, locale-independent, byte-identical across worker counts for a fixed
config and seed) plus a JSON run-manifest recording parameters, versions and
wall time.  `pslab run --config cfg.json` consumes a saved configuration and
`pslab rerun manifest.json` replays a previous run.

Exit codes: 0 ok, 2 configuration, 3 precision exhausted, 4 capacity,
5 validator assertion (approximation/majorization/curvature/separation/range).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
import time
from importlib import resources
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__, experiments
from .errors import (
    ApproximationViolation,
    CapacityExceeded,
    ConfigError,
    CurvatureAssumptionFailed,
    DegreeTooSmall,
    InvalidCharacter,
    MajorizationViolation,
    PrecisionExhausted,
    RangeMismatch,
    SeparationViolated,
)

DEFAULT_SEED = 20250809

_VALIDATION_ERRORS = (
    ApproximationViolation,
    CurvatureAssumptionFailed,
    DegreeTooSmall,
    InvalidCharacter,
    MajorizationViolation,
    RangeMismatch,
    SeparationViolated,
    AssertionError,
)

COMMANDS = [
    "ps-count", "ap-count", "goldbach3", "discorrelate", "sawtooth-check",
    "vdc-check", "et-check", "gowers", "majorant-check", "lff-average",
    "phase-sum", "local-density",
]


def _schema() -> dict:
    with resources.files("pslab.schemas").joinpath("config.schema.json").open() as fh:
        return json.load(fh)


def validate_params(command: str, params: dict) -> None:
    import jsonschema

    schema = _schema()
    if command not in schema["definitions"]:
        raise ConfigError(f"unknown command {command!r}")
    sub = dict(schema["definitions"][command])
    sub["definitions"] = schema["definitions"]
    try:
        jsonschema.validate(params, sub)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid parameters for {command}: {exc.message}") from exc


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path: str, header: Sequence[str], rows: Sequence[Tuple]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


# ---------------------------------------------------------------------------
# Dispatch: params dict -> (header, rows, gamma_mode-or-None).
# ---------------------------------------------------------------------------

def _dispatch(command: str, params: dict, seed: int, threads: int):
    g = None
    if "gamma" in params and command not in ("vdc-check", "phase-sum"):
        g = experiments.parse_gamma(params["gamma"])
    if command == "ps-count":
        header, rows = experiments.ps_count(g, int(params["x"]), threads=threads)
    elif command == "ap-count":
        header, rows = experiments.ap_count(int(params["k"]), int(params["x"]), g,
                                            threads=threads,
                                            prime_cut=int(params.get("prime_cut", 100)))
    elif command == "goldbach3":
        header, rows = experiments.goldbach3(int(params["n"]), g, threads=threads)
    elif command == "discorrelate":
        header, rows = experiments.discorrelate(g, [int(n) for n in params["n_values"]],
                                                params["phase"], threads=threads)
    elif command == "sawtooth-check":
        header, rows = experiments.sawtooth_check_cmd([int(h) for h in params["h_values"]],
                                                      grid=int(params.get("grid", 100000)))
    elif command == "vdc-check":
        header, rows = experiments.vdc_cmd(params["kind"], float(params["x"]), float(params["y"]),
                                           h=float(params.get("h", 1.0)),
                                           gamma=float(params.get("gamma", 0.95)),
                                           q=float(params.get("q", 1000.0)), threads=threads)
    elif command == "et-check":
        header, rows = experiments.et_cmd(params["kind"], int(params["n"]), int(params["j"]),
                                          interval=(float(params.get("interval_start", 0.0)),
                                                    float(params.get("interval_length", 0.5))),
                                          seed=seed)
    elif command == "gowers":
        header, rows = experiments.gowers_cmd(params["input"], int(params["n"]), int(params["s"]),
                                              seed=seed, gamma=g,
                                              w=int(params.get("w", 3)), b=int(params.get("b", 1)),
                                              threads=threads)
    elif command == "majorant-check":
        header, rows = experiments.majorant_check_cmd(int(params["n"]), float(params["r_exp"]), g,
                                                      int(params["w"]), int(params["b"]),
                                                      m=int(params.get("m", 2)),
                                                      c=float(params.get("c", 1.0)),
                                                      threads=threads)
    elif command == "lff-average":
        samples = params.get("samples")
        header, rows = experiments.lff_average_cmd(params["system"], int(params["n"]),
                                                   float(params["r_exp"]), g,
                                                   int(params["w"]), int(params["b"]),
                                                   m=int(params.get("m", 2)),
                                                   samples=None if samples is None else int(samples),
                                                   seed=seed, threads=threads)
    elif command == "phase-sum":
        forms = [tuple(int(v) for v in f) for f in params["forms"]]
        header, rows = experiments.phase_sum_cmd([float(x) for x in params["h"]], forms,
                                                 float(params["gamma"]),
                                                 int(params["lo"]), int(params["hi"]),
                                                 threads=threads)
    elif command == "local-density":
        header, rows = experiments.local_density_cmd(params["system"],
                                                     [int(p) for p in params["primes"]])
    else:
        raise ConfigError(f"unknown command {command!r}")
    return header, rows, (g.mode if g is not None else None)


def run_experiment(command: str, params: dict, out_dir: str = ".", seed: int = DEFAULT_SEED,
                   threads: int = 1, plot: bool = False) -> Dict:
    """Validate, execute, and persist one experiment; returns the manifest."""
    validate_params(command, params)
    os.makedirs(out_dir, exist_ok=True)
    t0 = time.perf_counter()
    header, rows, gamma_mode = _dispatch(command, params, seed, threads)
    wall = time.perf_counter() - t0
    csv_path = os.path.join(out_dir, f"{command}.csv")
    write_csv(csv_path, header, rows)
    figures: List[str] = []
    if plot:
        from . import plotting

        png_path = os.path.join(out_dir, f"{command}.png")
        plotting.render(command, header, rows, png_path)
        figures.append(os.path.basename(png_path))
    manifest = {
        "command": command,
        "params": params,
        "seed": seed,
        "threads": threads,
        "pslab_version": __version__,
        "python": platform.python_version(),
        "gamma_mode": gamma_mode,
        "csv": os.path.basename(csv_path),
        "figures": figures,
        "wall_time_s": wall,
    }
    with open(os.path.join(out_dir, f"{command}.manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


# ---------------------------------------------------------------------------
# Argument parsing.
# ---------------------------------------------------------------------------

def _int_arg(text: str) -> int:
    """Integers possibly given in scientific notation (1e7)."""
    v = float(text)
    if v != int(v):
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    return int(v)


def _csv_ints(text: str) -> List[int]:
    return [_int_arg(t) for t in text.split(",") if t.strip()]


def _csv_floats(text: str) -> List[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _forms_arg(text: str) -> List[List[int]]:
    out = []
    for part in text.split(";"):
        a, b = part.split(",")
        out.append([int(a), int(b)])
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pslab", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"pslab {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory (default: cwd)")
    common.add_argument("--threads", type=int, default=1, help="worker threads")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="RNG seed")
    common.add_argument("--plot", action="store_true", help="render a PNG next to the CSV")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ps-count", parents=[common], help="pi_c(x) vs x^gamma/log x")
    p.add_argument("--gamma", required=True)
    p.add_argument("--x", type=_int_arg, required=True)

    p = sub.add_parser("ap-count", parents=[common], help="k-AP counts, Lambda vs Lambda_gamma")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--x", type=_int_arg, required=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--prime-cut", type=int, default=100)

    p = sub.add_parser("goldbach3", parents=[common], help="ternary representation counts")
    p.add_argument("--n", type=_int_arg, required=True)
    p.add_argument("--gamma", required=True)

    p = sub.add_parser("discorrelate", parents=[common],
                       help="weighted PS sum vs plain prime sum with a phase")
    p.add_argument("--gamma", required=True)
    p.add_argument("--n", dest="n_values", type=_csv_ints, required=True,
                   help="comma-separated N values")
    p.add_argument("--phase", default="zero",
                   help="zero | linear:<alpha|sqrt2|golden> | monomial:<h>:<gamma> | poly:<c0,c1,..>")

    p = sub.add_parser("sawtooth-check", parents=[common], help="Vaaler approximant validator")
    p.add_argument("--h", dest="h_values", type=_csv_ints, required=True)
    p.add_argument("--grid", type=_int_arg, default=100000)

    p = sub.add_parser("vdc-check", parents=[common], help="van der Corput bound probe")
    p.add_argument("--kind", choices=["quadratic", "monomial"], required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--h", type=float, default=1.0)
    p.add_argument("--phase-gamma", dest="phase_gamma", type=float, default=0.95)
    p.add_argument("--q", type=float, default=1000.0)

    p = sub.add_parser("et-check", parents=[common], help="Erdos-Turan inequality probe")
    p.add_argument("--kind", choices=["sqrt2", "golden", "random", "zero"], required=True)
    p.add_argument("--n", type=_int_arg, required=True)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--interval-start", type=float, default=0.0)
    p.add_argument("--interval-length", type=float, default=0.5)

    p = sub.add_parser("gowers", parents=[common], help="Gowers U^s norm of a built-in input")
    p.add_argument("--input", choices=["constant", "fourier", "random", "wtricked"], required=True)
    p.add_argument("--n", type=_int_arg, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--gamma")
    p.add_argument("--w", type=int, default=3)
    p.add_argument("--b", type=int, default=1)

    p = sub.add_parser("majorant-check", parents=[common], help="nu mean and majorization")
    p.add_argument("--n", type=_int_arg, required=True)
    p.add_argument("--r-exp", dest="r_exp", type=float, required=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--w", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--c", type=float, default=1.0)

    p = sub.add_parser("lff-average", parents=[common], help="linear forms condition average")
    p.add_argument("--system", required=True, help="preset (3ap, single, two-form) or JSON")
    p.add_argument("--n", type=_int_arg, required=True)
    p.add_argument("--r-exp", dest="r_exp", type=float, required=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--w", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--samples", type=_int_arg, default=None)

    p = sub.add_parser("phase-sum", parents=[common], help="Vandermonde-separated phase sum")
    p.add_argument("--h", type=_csv_floats, required=True)
    p.add_argument("--forms", type=_forms_arg, required=True, help="a1,b1;a2,b2;...")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--lo", type=_int_arg, required=True)
    p.add_argument("--hi", type=_int_arg, required=True)

    p = sub.add_parser("local-density", parents=[common], help="exact beta_p factors")
    p.add_argument("--system", required=True)
    p.add_argument("--primes", type=_csv_ints, required=True)

    p = sub.add_parser("run", parents=[common], help="run from a JSON config file")
    p.add_argument("--config", required=True)

    p = sub.add_parser("rerun", parents=[common], help="replay a run-manifest")
    p.add_argument("manifest")

    return parser


def _params_from_args(command: str, args: argparse.Namespace) -> dict:
    ns = vars(args)
    mapping = {
        "ps-count": {"gamma": "gamma", "x": "x"},
        "ap-count": {"k": "k", "x": "x", "gamma": "gamma", "prime_cut": "prime_cut"},
        "goldbach3": {"n": "n", "gamma": "gamma"},
        "discorrelate": {"gamma": "gamma", "n_values": "n_values", "phase": "phase"},
        "sawtooth-check": {"h_values": "h_values", "grid": "grid"},
        "vdc-check": {"kind": "kind", "x": "x", "y": "y", "h": "h",
                      "gamma": "phase_gamma", "q": "q"},
        "et-check": {"kind": "kind", "n": "n", "j": "j",
                     "interval_start": "interval_start", "interval_length": "interval_length"},
        "gowers": {"input": "input", "n": "n", "s": "s", "gamma": "gamma", "w": "w", "b": "b"},
        "majorant-check": {"n": "n", "r_exp": "r_exp", "gamma": "gamma", "w": "w", "b": "b",
                           "m": "m", "c": "c"},
        "lff-average": {"system": "system", "n": "n", "r_exp": "r_exp", "gamma": "gamma",
                        "w": "w", "b": "b", "m": "m", "samples": "samples"},
        "phase-sum": {"h": "h", "forms": "forms", "gamma": "gamma", "lo": "lo", "hi": "hi"},
        "local-density": {"system": "system", "primes": "primes"},
    }
    params = {}
    for key, attr in mapping[command].items():
        v = ns.get(attr)
        if v is not None:
            params[key] = v
    if command in ("lff-average", "local-density") and isinstance(params.get("system"), str):
        s = params["system"].strip()
        if s.startswith("{"):
            params["system"] = json.loads(s)
    if command == "gowers" and params.get("gamma") is None:
        params.pop("gamma", None)
    return params


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command: str = args.command
    try:
        if command == "run":
            with open(args.config) as fh:
                cfg = json.load(fh)
            if not isinstance(cfg, dict) or "command" not in cfg or "params" not in cfg:
                raise ConfigError("config must be an object with 'command' and 'params'")
            run_experiment(cfg["command"], cfg["params"], out_dir=args.out,
                           seed=int(cfg.get("seed", args.seed)), threads=args.threads,
                           plot=args.plot)
        elif command == "rerun":
            with open(args.manifest) as fh:
                manifest = json.load(fh)
            run_experiment(manifest["command"], manifest["params"], out_dir=args.out,
                           seed=int(manifest["seed"]), threads=args.threads, plot=args.plot)
        else:
            params = _params_from_args(command, args)
            run_experiment(command, params, out_dir=args.out, seed=args.seed,
                           threads=args.threads, plot=args.plot)
        return 0
    except (ConfigError, json.JSONDecodeError, FileNotFoundError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PrecisionExhausted as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return 3
    except CapacityExceeded as exc:
        print(f"capacity exceeded: {exc}", file=sys.stderr)
        return 4
    except _VALIDATION_ERRORS as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
