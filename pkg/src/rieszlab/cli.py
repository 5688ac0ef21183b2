"""Command-line surface: generation, measurement and verification.

Subcommands: generate, energy, discrepancy, separation, verify-lemmas,
rate.  Exit codes: 0 success, 1 input error (including usage), 2
numerical-domain error (coincident points, exponent outside (0, d)).

Point sets travel as a small text format: '#'-prefixed key=value header
lines followed by one whitespace-separated coordinate row per point,
printed with 17 significant digits so save/load round-trips are lossless.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .discrepancy import estimate_discrepancy
from .energy import DEFAULT_QUAD_TOL, energy_report
from .errors import DomainError, InputError
from .experiment import RateExperimentConfig, geometric_schedule, run_rate_experiment
from .manifold import Manifold, make_manifold, sample_uniform
from .pointsets import (PointSet, farthest_point_sample, fibonacci_sphere,
                        kronecker_torus, min_geodesic_distance)
from .verify import run_all_checks

FORMAT_VERSION = 1
GENERATORS = ("fibonacci", "kronecker", "farthest-point", "uniform")


# ----------------------------------------------------------------------
# point-set files
# ----------------------------------------------------------------------

def format_pointset(X: PointSet) -> str:
    prov = X.provenance
    lines = [
        f"# rieszlab pointset format={FORMAT_VERSION}",
        f"# manifold={X.manifold.kind.value} dim={X.manifold.dim}",
        f"# n={X.n} generator={prov.get('generator', 'unknown')} seed={prov.get('seed', '')}",
    ]
    for row in X.coords:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def save_pointset(X: PointSet, path: str) -> None:
    text = format_pointset(X)
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def parse_pointset(text: str) -> PointSet:
    header: dict = {}
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for token in line[1:].split():
                if "=" in token:
                    key, _, value = token.partition("=")
                    header[key] = value
            continue
        try:
            rows.append([float(tok) for tok in line.split()])
        except ValueError as exc:
            raise InputError(f"bad coordinate row at line {lineno}: {line!r}") from exc
    for key in ("manifold", "dim", "n"):
        if key not in header:
            raise InputError(f"point-set file is missing the {key}= header")
    if header.get("format", str(FORMAT_VERSION)) != str(FORMAT_VERSION):
        raise InputError(f"unsupported point-set format {header.get('format')!r}")
    m = make_manifold(header["manifold"], int(header["dim"]))
    n = int(header["n"])
    if len(rows) != n:
        raise InputError(f"header says n={n} but the file has {len(rows)} rows")
    coords = np.array(rows, dtype=float)
    if coords.ndim != 2 or coords.shape[1] != m.ambient_dim:
        raise InputError(
            f"rows must have {m.ambient_dim} coordinates, got shape {coords.shape}")
    _warn_on_drift(m, coords)
    prov = {"generator": header.get("generator", "unknown")}
    if header.get("seed", "") not in ("", "None"):
        prov["seed"] = int(header["seed"])
    return PointSet(m, coords, provenance=prov)


def _warn_on_drift(m: Manifold, coords: np.ndarray) -> None:
    if m.kind.value == "sphere":
        drift = np.abs(np.linalg.norm(coords, axis=1) - 1.0).max()
    else:
        drift = max(0.0, float(np.max(coords - 1.0)), float(np.max(-coords)))
    if drift > 1e-9:
        print(f"warning: point coordinates off the manifold by {drift:.3g}; "
              "renormalizing", file=sys.stderr)


def load_pointset(path: str) -> PointSet:
    if path == "-":
        return parse_pointset(sys.stdin.read())
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_pointset(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read point-set file {path}: {exc}") from exc


# ----------------------------------------------------------------------
# dispatch
# ----------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


def _emit_json(payload: dict, path: str) -> None:
    payload = {"version": __version__, **payload}
    text = json.dumps(payload, indent=2) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _build_parser() -> _Parser:
    parser = _Parser(prog="rieszlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("generate", help="generate a point set and write it as text")
    p.add_argument("--manifold", required=True, help="sphere or torus")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--gen", required=True, choices=GENERATORS)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pool", type=int, default=None,
                   help="candidate pool size for farthest-point")
    p.add_argument("--out", default="-")

    p = sub.add_parser("energy", help="discrete vs continuous Riesz energy of a file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--tol", type=float, default=DEFAULT_QUAD_TOL)
    p.add_argument("--out", default="-")

    p = sub.add_parser("discrepancy", help="lower-bound ball discrepancy of a file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--extra-centers", type=int, default=None,
                   help="uniform centers besides the code points (default 4N)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")

    p = sub.add_parser("separation", help="minimum pairwise geodesic distance of a file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--method", choices=("brute", "grid"), default="brute")
    p.add_argument("--out", default="-")

    p = sub.add_parser("verify-lemmas", help="run the fitted-bound checks")
    p.add_argument("--manifold", required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")

    p = sub.add_parser("rate", help="N-sweep rate experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out-csv", default="rate.csv")
    p.add_argument("--out-json", default="-")
    return parser


def _cmd_generate(args) -> int:
    m = make_manifold(args.manifold, args.dim)
    if args.gen == "fibonacci":
        if m.kind.value != "sphere" or m.dim != 2:
            raise InputError("the fibonacci generator requires --manifold sphere --dim 2")
        X = fibonacci_sphere(args.n)
    elif args.gen == "kronecker":
        if m.kind.value != "flat-torus":
            raise InputError("the kronecker generator requires --manifold torus")
        X = kronecker_torus(m.dim, args.n)
    elif args.gen == "farthest-point":
        X = farthest_point_sample(m, args.n, seed=args.seed, candidate_pool=args.pool)
    else:
        X = sample_uniform(m, args.seed, args.n)
    save_pointset(X, args.out)
    return 0


def _cmd_energy(args) -> int:
    X = load_pointset(args.infile)
    report = energy_report(X, args.s, tol=args.tol)
    _emit_json(report.to_dict(), args.out)
    return 0


def _cmd_discrepancy(args) -> int:
    X = load_pointset(args.infile)
    est = estimate_discrepancy(X, extra_centers=args.extra_centers, seed=args.seed)
    _emit_json(est.to_dict(), args.out)
    return 0


def _cmd_separation(args) -> int:
    X = load_pointset(args.infile)
    rep = min_geodesic_distance(X, method=args.method)
    _emit_json(rep.to_dict(), args.out)
    return 0


def _cmd_verify(args) -> int:
    m = make_manifold(args.manifold, args.dim)
    reports = run_all_checks(m, args.s, seed=args.seed)
    payload = {
        "manifold": m.describe(),
        "s": args.s,
        "seed": args.seed,
        "checks": [r.to_dict() for r in reports],
    }
    _emit_json(payload, args.out)
    return 0


def parse_rate_config(text: str) -> RateExperimentConfig:
    """Plain key=value lines; '#' starts a comment."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"config line {lineno} is not key=value: {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    known = {"manifold", "dim", "s", "generator", "ns", "n_min", "n_max",
             "extra_centers", "seed", "quad_tol", "candidate_pool"}
    unknown = set(values) - known
    if unknown:
        raise InputError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key in ("manifold", "dim", "s", "generator"):
        if key not in values:
            raise InputError(f"config is missing required key {key}")
    m = make_manifold(values["manifold"], int(values["dim"]))
    if "ns" in values:
        ns = [int(tok) for tok in values["ns"].split(",") if tok.strip()]
    elif "n_min" in values and "n_max" in values:
        ns = geometric_schedule(int(values["n_min"]), int(values["n_max"]))
    else:
        raise InputError("config needs either ns=a,b,c or n_min=/n_max=")
    params = {}
    if "candidate_pool" in values:
        params["candidate_pool"] = int(values["candidate_pool"])
    return RateExperimentConfig(
        manifold=m,
        s=float(values["s"]),
        generator=values["generator"],
        ns=ns,
        extra_centers=int(values.get("extra_centers", 0)),
        seed=int(values.get("seed", 0)),
        quad_tol=float(values.get("quad_tol", 1e-10)),
        generator_params=params,
    )


def _cmd_rate(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = parse_rate_config(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read config {args.config}: {exc}") from exc
    report = run_rate_experiment(cfg)
    with open(args.out_csv, "w", encoding="utf-8") as fh:
        fh.write(report.to_csv())
    _emit_json(report.to_dict(), args.out_json)
    for row in report.rows:
        print(f"N={row.n}: {row.runtime_s:.2f}s", file=sys.stderr)
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "energy": _cmd_energy,
    "discrepancy": _cmd_discrepancy,
    "separation": _cmd_separation,
    "verify-lemmas": _cmd_verify,
    "rate": _cmd_rate,
}


def cli_dispatch(argv) -> int:
    """Parse argv (without the program name) and run one subcommand."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            print("error: a subcommand is required", file=sys.stderr)
            return 1
        return _COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DomainError as exc:
        print(f"numerical-domain error: {exc}", file=sys.stderr)
        return 2


def main() -> int:
    return cli_dispatch(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
