"""Command-line surface: generation, convergence studies, verification,
and single-point potential queries.

Set definition grammar (plain text, one ``key = value`` per line, ``#``
comments allowed)::

    shape = ball | sphere | box | union
    center = <d numbers>            # ball, sphere
    radius = <number>               # ball, sphere
    low  = <d numbers>              # box
    high = <d numbers>              # box
    ball = <d numbers> <radius>     # union, repeatable
    holder_A = <number>             # optional Green-function bound data
    holder_s = <number>             # (declared together; default 1 1 for
                                    #  ball/sphere/box, absent for union)

Vectors accept spaces or commas between numbers. The ambient dimension is
inferred from the vector lengths.

Commands: ``generate`` (points CSV + run manifest), ``study`` (one CSV
row per configuration size), ``verify`` (acceptance criteria, verdict
JSON), ``potential`` (single-point deficit query).

Exit codes: 0 success, 1 verification failure, 2 parse error,
3 infeasible input, 4 unsupported set/oracle.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .acceptance import DEFAULT_SEED, run_criteria, verdict_json
from .configurations import FeketeSearchParams, fekete_search_run, leja_sequence, random_config
from .discrepancy import phi_for_potential, sup_potential_deficit, discrepancy_bound, potential_error
from .errors import InfeasiblePointError, SetDefinitionError, UnsupportedOracleError
from .kernel import KernelSpec
from .measures import (
    PointConfig,
    closeness_m_E,
    discrete_energy,
    discrete_potential,
    moment_distance,
    read_points_csv,
    write_points_csv,
)
from .sets import distance_to_set, equilibrium_oracle, load_set_definition, project_to_set
from .seeding import child_seed

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_PARSE_ERROR = 2
EXIT_INFEASIBLE = 3
EXIT_UNSUPPORTED = 4

STUDY_COLUMNS = ["n", "energy", "energy_gap", "m_E", "moment_distance",
                 "deficit_at_probe", "sup_deficit", "lhs", "rhs", "r"]


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.replace(",", " ").split()], dtype=float)
    except ValueError as exc:
        raise SetDefinitionError(f"cannot parse vector {text!r}") from exc


def _load_set(path: str):
    E = load_set_definition(path)
    with open(path, "r", encoding="utf-8") as fh:
        return E, fh.read()


def _write_manifest(path, command, set_text, spec, seed, params, outputs, result=None):
    manifest = {
        "command": command,
        "set_definition": set_text,
        "kernel": {"alpha": spec.alpha, "dim": spec.dim},
        "seed": seed,
        "params": params,
        "outputs": [str(p) for p in outputs],
        "tool_version": __version__,
        "result": result,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _default_probe(E) -> np.ndarray:
    """Deterministic exterior probe at distance 1 from E along +e1."""
    c = E.enclosing_center
    far = np.array(c, dtype=float)
    far[0] += E.enclosing_radius + 10.0
    base = project_to_set(E, far)
    out = far - base
    out /= np.linalg.norm(out)
    return base + out


def _generate_config(E, spec, method, n, seed, args):
    if method == "fekete":
        params = FeketeSearchParams(
            n=n, restarts=args.restarts, max_iters=args.max_iters,
            tol=args.tol, seed=seed,
        )
        run = fekete_search_run(E, spec, params)
        return run.config, {"final_energy": run.energy, "iterations": run.iterations,
                            "converged": run.converged}
    if method == "leja":
        if args.xi0 is not None:
            xi0 = _parse_vector(args.xi0)
        else:
            xi0 = project_to_set(E, E.enclosing_center + np.eye(E.dim)[0] * (E.enclosing_radius + 1.0))
        config = leja_sequence(E, spec, n, xi0, candidate_count=args.candidates, seed=seed)
    else:
        config = random_config(E, n, seed)
    energy = discrete_energy(config, spec) if config.n >= 2 else None
    return config, {"final_energy": energy, "iterations": None, "converged": None}


def cmd_generate(args) -> int:
    E, set_text = _load_set(args.set)
    spec = KernelSpec(alpha=args.alpha, dim=E.dim)
    if args.method == "fekete" and args.n < 2:
        raise SetDefinitionError("fekete needs --n >= 2")
    if args.n < 1:
        raise SetDefinitionError("--n must be >= 1")
    config, result = _generate_config(E, spec, args.method, args.n, args.seed, args)
    write_points_csv(config, args.out)
    outputs = [args.out]
    if args.manifest:
        outputs.append(args.manifest)
        _write_manifest(
            args.manifest, "generate", set_text, spec, args.seed,
            {"method": args.method, "n": args.n, "restarts": args.restarts,
             "max_iters": args.max_iters, "tol": args.tol,
             "candidates": args.candidates, "xi0": args.xi0, "out": str(args.out)},
            outputs, result,
        )
    if result["final_energy"] is not None:
        print(f"energy {result['final_energy']!r}")
    else:
        print("energy n/a (single point)")
    return EXIT_OK


def cmd_study(args) -> int:
    E, set_text = _load_set(args.set)
    spec = KernelSpec(alpha=args.alpha, dim=E.dim)
    oracle = equilibrium_oracle(E, spec)  # exit 4 when unsupported
    schedule = [int(t) for t in args.schedule.replace(",", " ").split()]
    if any(n < 2 for n in schedule):
        raise SetDefinitionError("study schedule entries must be >= 2")
    probe = _parse_vector(args.probe) if args.probe else _default_probe(E)
    if distance_to_set(E, probe) <= 0:
        raise InfeasiblePointError("probe must lie outside the set")
    r_a = args.r_a if args.r_a is not None else 1.0 / E.dim
    W = oracle.robin_constant

    rows = []
    for n in schedule:
        seed_n = child_seed(args.seed, "study", n)
        config, _ = _generate_config(E, spec, args.method, n, seed_n, args)
        energy = discrete_energy(config, spec)
        r_n = args.r_c * n ** (-r_a)
        phi = phi_for_potential(E, probe, spec)
        rep = discrepancy_bound(E, oracle, config, phi, r_n, spec, seed=child_seed(args.seed, "study-bound", n))
        deficit = abs(float(oracle.potential(probe)) - discrete_potential(config, spec, probe))
        rows.append({
            "n": n,
            "energy": energy,
            "energy_gap": energy - W,
            "m_E": closeness_m_E(config, E, oracle),
            "moment_distance": moment_distance(config, oracle, degree=2, samples=100_000,
                                               seed=child_seed(args.seed, "study-moments", n)),
            "deficit_at_probe": deficit,
            "sup_deficit": sup_potential_deficit(oracle, config, E, spec, grid=512,
                                                 seed=child_seed(args.seed, "study-sup", n)),
            "lhs": rep.lhs,
            "rhs": rep.rhs,
            "r": r_n,
        })

    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=STUDY_COLUMNS)
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    outputs = [args.out]
    if args.manifest:
        outputs.append(args.manifest)
        _write_manifest(
            args.manifest, "study", set_text, spec, args.seed,
            {"method": args.method, "schedule": schedule, "probe": probe.tolist(),
             "r_c": args.r_c, "r_a": r_a, "restarts": args.restarts,
             "max_iters": args.max_iters, "tol": args.tol, "candidates": args.candidates,
             "xi0": args.xi0, "out": str(args.out)},
            outputs,
        )
    print(f"study written to {args.out} ({len(rows)} rows)")
    return EXIT_OK


def cmd_potential(args) -> int:
    E, _ = _load_set(args.set)
    spec = KernelSpec(alpha=args.alpha, dim=E.dim)
    oracle = equilibrium_oracle(E, spec)
    X = read_points_csv(args.points)
    y = _parse_vector(args.y)
    if distance_to_set(E, y) <= 0:
        raise InfeasiblePointError("query point must lie outside the set")
    deficit = float(oracle.potential(y)) - discrete_potential(X, spec, y)
    out = {
        "y": y.tolist(),
        "d_E": float(distance_to_set(E, y)),
        "equilibrium_potential": float(oracle.potential(y)),
        "discrete_potential": discrete_potential(X, spec, y),
        "deficit": deficit,
    }
    if E.holder is not None and bool(np.all(np.atleast_1d(distance_to_set(E, X.points)) <= 1e-9)):
        _, shape = potential_error(E, oracle, X, y, spec)
        out["bound_shape"] = shape
    print(json.dumps(out, sort_keys=True, indent=2))
    return EXIT_OK


def cmd_verify(args) -> int:
    only = args.only.split(",") if args.only else None
    results = run_criteria(seed=args.seed, only=only, ledger_path=args.ledger)
    text = verdict_json(results, args.seed)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    failed = [r.name for r in results if not r.passed]
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}", file=sys.stderr)
    if failed:
        print(f"failed criteria: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rieszpoints", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common_gen(p):
        p.add_argument("--set", required=True, help="set definition file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--alpha", type=float, default=2.0)
        p.add_argument("--restarts", type=int, default=4)
        p.add_argument("--max-iters", dest="max_iters", type=int, default=2000)
        p.add_argument("--tol", type=float, default=1e-13)
        p.add_argument("--candidates", type=int, default=4096)
        p.add_argument("--xi0", default=None, help="start point for leja, e.g. '1,0,0'")

    g = sub.add_parser("generate", help="write a configuration CSV and manifest")
    common_gen(g)
    g.add_argument("--method", required=True, choices=["fekete", "leja", "random"])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--manifest", default=None)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("study", help="convergence study: one CSV row per n")
    common_gen(s)
    s.add_argument("--method", required=True, choices=["fekete", "leja", "random"])
    s.add_argument("--schedule", required=True, help="comma-separated n values")
    s.add_argument("--out", required=True)
    s.add_argument("--probe", default=None, help="exterior probe point (default: distance 1 along +e1)")
    s.add_argument("--r-c", dest="r_c", type=float, default=1.0)
    s.add_argument("--r-a", dest="r_a", type=float, default=None, help="smoothing decay r_n = c*n^-a (default 1/d)")
    s.add_argument("--manifest", default=None)
    s.set_defaults(func=cmd_study)

    q = sub.add_parser("potential", help="single-point deficit query")
    q.add_argument("--set", required=True)
    q.add_argument("--points", required=True, help="configuration CSV")
    q.add_argument("--y", required=True, help="query point, e.g. '2,0,0'")
    q.add_argument("--alpha", type=float, default=2.0)
    q.set_defaults(func=cmd_potential)

    v = sub.add_parser("verify", help="run the acceptance criteria")
    v.add_argument("--only", default=None, help="comma-separated name filters, e.g. 'energy'")
    v.add_argument("--seed", type=int, default=DEFAULT_SEED)
    v.add_argument("--out", default=None, help="write the verdict JSON here instead of stdout")
    v.add_argument("--ledger", default=None, help="path to oracle_ledger.csv")
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SetDefinitionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    except InfeasiblePointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except UnsupportedOracleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED


if __name__ == "__main__":
    sys.exit(main())
