"""Command-line surface: simulate, build-cycle, audit, limit-curve, oracle-check.

Exit codes: 0 success, 1 structured failure, 2 usage error.
"""

import argparse
import csv
import json
import math
import sys

import numpy as np

from .builder import BuilderConstants, build_hamilton_cycle, verify_cycle
from .dissection import AuditConstants, audit_properties, build_dissection, classify_and_extract
from .experiments import TrialConfig, limit_probability, run_trials
from .geometry import NormSpec, sample_uniform_points
from .graph import build_edge_process, geometric_graph
from .hitting import min_degree_hit
from .oracles import (brute_vertex_connectivity_at_least, cycle_length_spectrum,
                      cycle_lengths_by_enumeration, hamiltonian_by_enumeration,
                      is_hamiltonian_exact, vertex_connectivity_at_least)


def load_points(path) -> np.ndarray:
    """One point per line, whitespace-separated coordinates, 0-based order."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append([float(x) for x in line.split()])
    if not rows:
        raise ValueError(f"no points in {path}")
    return np.asarray(rows, dtype=np.float64)


def save_points(points, path):
    with open(path, "w") as fh:
        for row in np.asarray(points, dtype=np.float64):
            fh.write(" ".join(repr(float(x)) for x in row) + "\n")


def _norm_from(args) -> NormSpec:
    p = math.inf if str(args.p) == "inf" else float(args.p)
    return NormSpec(args.d, p)


def _points_from(args, norm):
    if getattr(args, "points_file", None):
        pts = load_points(args.points_file)
        if pts.shape[1] != norm.d:
            raise ValueError(f"points have dimension {pts.shape[1]}, expected {norm.d}")
        return pts
    return sample_uniform_points(args.n, norm, args.seed)


def cmd_simulate(args) -> int:
    overrides = dict(n=args.n, trials=args.trials, master_seed=args.seed, d=args.d,
                     p=None if args.p is None else (math.inf if str(args.p) == "inf" else float(args.p)),
                     k_max=args.k_max, oracle_mode=args.oracle_mode,
                     workers=args.workers, out=args.out)
    if args.config:
        cfg = TrialConfig.from_json(args.config, **overrides)
    else:
        missing = [k for k in ("n", "trials") if overrides.get(k) is None]
        if missing:
            print(f"missing required flags: {missing}", file=sys.stderr)
            return 2
        overrides = {k: v for k, v in overrides.items() if v is not None}
        overrides.setdefault("master_seed", 0)
        cfg = TrialConfig(**overrides)
    records, summary = run_trials(cfg)
    print(json.dumps(summary, sort_keys=True))
    return 0 if summary["failed_trials"] == 0 else 1


def cmd_build_cycle(args) -> int:
    norm = _norm_from(args)
    pts = _points_from(args, norm)
    consts = BuilderConstants.desk(norm, K=args.K, eta=args.eta,
                                   r2_budget=args.r2_budget)
    rho = args.rho
    if rho is None:
        proc = build_edge_process(pts, norm)
        rho = min_degree_hit(proc, 2).radius
    result = build_hamilton_cycle(pts, norm, rho, consts, r=args.r,
                                  audit_first=args.audit_first)
    diag = {
        "n": int(len(pts)),
        "rho": float(rho),
        "success": result.success,
        "stats": {k: v for k, v in vars(result.stats).items()},
    }
    if not result.success:
        diag["failure"] = {
            "stage": result.failure.stage,
            "reason": result.failure.reason,
            "witness": repr(result.failure.witness),
        }
    if args.diagnostics:
        with open(args.diagnostics, "w") as fh:
            json.dump(diag, fh, indent=2, sort_keys=True)
    if result.success:
        check = verify_cycle(pts, norm, rho, result.cycle)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write("\n".join(str(v) for v in result.cycle) + "\n")
        if not check:
            print(f"cycle failed verification: {check.reason}", file=sys.stderr)
            return 1
        print(f"cycle found: n={len(pts)} rho={rho:.6g}")
        return 0
    print(f"build failed at stage {result.failure.stage}: {result.failure.reason}",
          file=sys.stderr)
    return 1


def cmd_audit(args) -> int:
    norm = _norm_from(args)
    pts = _points_from(args, norm)
    diss = build_dissection(pts, norm, args.eta, args.r, args.K)
    sg = classify_and_extract(diss)
    if args.separation is not None:
        constants = AuditConstants(args.separation, args.locality, args.proximity)
    else:
        constants = AuditConstants.desk(args.r, norm)
    audit = audit_properties(sg, diss, constants, seed=args.seed or 0)
    if args.out:
        audit.write_csv(args.out)
    for name, status, witness in audit.to_csv_rows():
        print(f"{name}: {status}" + (f" ({witness})" if witness else ""))
    return 0 if audit.passed else 1


def cmd_limit_curve(args) -> int:
    if args.step <= 0:
        print("step must be positive", file=sys.stderr)
        return 2
    xs = []
    x = args.start
    while x <= args.stop + 1e-12:
        xs.append(x)
        x += args.step
    rows = [(repr(float(x)), repr(limit_probability(x))) for x in xs]
    out = args.out or "limit_curve.csv"
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "probability"])
        w.writerows(rows)
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def cmd_oracle_check(args) -> int:
    """Cross-validate the fast oracles against brute force on random instances."""
    norm = NormSpec(2, 2.0)
    rng = np.random.Generator(np.random.Philox(key=np.array([args.seed, 0], dtype=np.uint64)))
    bad = 0
    for t in range(args.instances):
        n = int(rng.integers(4, args.n_max + 1))
        pts = rng.random((n, 2))
        radius = float(rng.uniform(0.2, 0.9))
        g = geometric_graph(pts, norm, radius)
        if hamiltonian_by_enumeration(g) != is_hamiltonian_exact(g)[0]:
            print(f"instance {t}: Hamiltonicity mismatch", file=sys.stderr)
            bad += 1
        if n <= 9:
            k = int(rng.integers(1, 4))
            if k < n and brute_vertex_connectivity_at_least(g, k) != vertex_connectivity_at_least(g, k):
                print(f"instance {t}: {k}-connectivity mismatch", file=sys.stderr)
                bad += 1
            if cycle_length_spectrum(g) != cycle_lengths_by_enumeration(g):
                print(f"instance {t}: cycle spectrum mismatch", file=sys.stderr)
                bad += 1
    print(f"checked {args.instances} instances, {bad} disagreements")
    return 0 if bad == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rggham",
                                 description="random geometric graphs: hitting radii, "
                                             "exact oracles and constructive Hamilton cycles")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="Monte Carlo trial farm, CSV output")
    s.add_argument("--config", help="JSON file with TrialConfig fields; flags override")
    s.add_argument("--n", type=int)
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int, dest="seed")
    s.add_argument("--d", type=int, default=None)
    s.add_argument("--p", default=None)
    s.add_argument("--k-max", type=int, dest="k_max", default=None)
    s.add_argument("--oracle-mode", dest="oracle_mode",
                   choices=["exact", "constructive", "both"], default=None)
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--out", help="CSV output path")
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("build-cycle", help="run the constructive builder on one instance")
    b.add_argument("--points-file", dest="points_file")
    b.add_argument("--n", type=int, default=1000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--d", type=int, default=2)
    b.add_argument("--p", default=2.0)
    b.add_argument("--rho", type=float, help="graph radius; defaults to the min-degree-2 radius")
    b.add_argument("--r", type=float, help="dissection scale, defaults to rho")
    b.add_argument("--eta", type=float, default=0.1)
    b.add_argument("--K", type=int, default=35)
    b.add_argument("--r2-budget", type=int, dest="r2_budget",
                   help="entries-per-cell budget; defaults to the degree bound - 1")
    b.add_argument("--audit-first", action="store_true", dest="audit_first")
    b.add_argument("--out", help="cycle output: one 0-based vertex index per line")
    b.add_argument("--diagnostics", help="JSON diagnostics path")
    b.set_defaults(func=cmd_build_cycle)

    a = sub.add_parser("audit", help="dissection audit, verdict CSV")
    a.add_argument("--points-file", dest="points_file")
    a.add_argument("--n", type=int, default=2000)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--d", type=int, default=2)
    a.add_argument("--p", default=2.0)
    a.add_argument("--r", type=float, required=True)
    a.add_argument("--eta", type=float, default=0.1)
    a.add_argument("--K", type=int, default=35)
    a.add_argument("--separation", type=float, help="audit S (defaults to desk profile)")
    a.add_argument("--locality", type=float, default=100.0)
    a.add_argument("--proximity", type=float, default=25.0)
    a.add_argument("--out", help="verdict CSV path")
    a.set_defaults(func=cmd_audit)

    c = sub.add_parser("limit-curve", help="tabulate the limiting probability")
    c.add_argument("--from", dest="start", type=float, required=True)
    c.add_argument("--to", dest="stop", type=float, required=True)
    c.add_argument("--step", type=float, required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_limit_curve)

    o = sub.add_parser("oracle-check", help="cross-validate oracles on random instances")
    o.add_argument("--instances", type=int, default=50)
    o.add_argument("--n-max", dest="n_max", type=int, default=10)
    o.add_argument("--seed", type=int, default=0)
    o.set_defaults(func=cmd_oracle_check)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
