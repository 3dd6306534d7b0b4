"""Command-line interface: validate, trajectory, fixed-points, ergodic,
conjecture, presets, replay.

Exit codes are a stable contract: 0 success, 1 domain failure (invalid
matrix, off-simplex start, failed replay), 2 usage or parse error.  All
randomness flows from explicit ``--seed`` flags with a fixed default of
0, so every run is reproducible; CSV floats use the shortest
round-tripping representation so replays reload exact values.
"""

import argparse
import csv
import sys

import numpy as np

from . import analysis, dynamics
from .core import QsoError, SimplexPoint, classify, validate_stochastic
from .documents import DocumentError, expand, load_document
from .operators import PRESETS, apply_unnormalized

DEFAULT_SEED = 0
REPLAY_TOL = 1e-9
NEAR_ONE = 1e-9


def _fmt(value: float) -> str:
    return repr(float(value))


def _fmt_point(coords) -> str:
    return "(" + ", ".join(_fmt(v) for v in coords) + ")"


def _load_matrix(path, symmetrize: bool = False):
    doc = load_document(path)
    return doc, expand(doc, symmetrize=symmetrize)


def _parse_start(spec: str, n: int) -> SimplexPoint:
    if spec == "uniform":
        return SimplexPoint.uniform(n)
    if spec.startswith("random:"):
        seed = int(spec.split(":", 1)[1])
        rng = np.random.default_rng(seed)
        draw = rng.standard_exponential(n)
        return SimplexPoint(draw / draw.sum())
    values = np.array([float(part) for part in spec.split(",")], dtype=float)
    return SimplexPoint(values)


def _parse_females(text: str) -> frozenset[int]:
    parts = [part for part in text.replace(";", ",").split(",") if part]
    return frozenset(int(part) for part in parts)


def _females_cell(females) -> str:
    return ";".join(str(i) for i in sorted(females))


def _open_writer(path):
    handle = open(path, "w", newline="", encoding="utf-8")
    return handle, csv.writer(handle, lineterminator="\n")


# --- commands --------------------------------------------------------------


def cmd_validate(args) -> int:
    doc, P = _load_matrix(args.file, symmetrize=args.symmetrize)
    print(f"document: {args.file} (kind={doc.kind}, n={doc.n})")
    report = validate_stochastic(P)
    if not report.ok:
        print(f"stochasticity: FAILED ({len(report.violations)} violation(s))")
        for v in report.violations:
            where = f"({v.i},{v.j})" if v.k is None else f"({v.i},{v.j},{v.k})"
            print(f"  - {v.kind} at {where}, residual {v.residual:.3e}")
        return 1
    print("stochasticity: OK")

    near = P.p[:, :, 0]
    for i, j in zip(*np.nonzero((near > 1.0 - NEAR_ONE) & (near < 1.0))):
        if i <= j:
            print(
                f"warning: first-row entry at ({i},{j}) is within {NEAR_ONE:g} of 1 "
                f"but not exactly 1; it counts toward N1~"
            )

    cls = classify(P)
    print(
        f"classification: volterra={'yes' if cls.is_volterra else 'no'}, "
        f"strictly_non_volterra={'yes' if cls.is_strictly_non_volterra else 'no'}"
    )
    if cls.f_qso_sets is None:
        print("f-qso female sets: not enumerated (too many states)")
    elif cls.f_qso_sets:
        rendered = ", ".join("{" + ",".join(map(str, sorted(s))) + "}" for s in cls.f_qso_sets)
        print(f"f-qso female sets: {rendered}")
    else:
        print("f-qso female sets: none")

    count = analysis.count_first_row(P)
    print(f"first row: N1={count.n1}, N1~={count.n1_tilde}, total pairs={count.total_pairs}")
    if count.females is not None:
        f_txt = "{" + ",".join(map(str, sorted(count.females))) + "}"
        print(
            f"two-sex bounds (F={f_txt}): N1 >= {count.n1_lower_bound} "
            f"({'ok' if count.n1 >= count.n1_lower_bound else 'VIOLATED'}), "
            f"N1~ <= {count.n1_tilde_upper_bound} "
            f"({'ok' if count.n1_tilde <= count.n1_tilde_upper_bound else 'VIOLATED'}), "
            f"N1 > N1~ ({'ok' if count.n1 > count.n1_tilde else 'VIOLATED'})"
        )
    return 0


def _resolve_reference(spec: str, P) -> SimplexPoint | None:
    if spec == "none":
        return None
    if spec == "vertex0":
        return SimplexPoint.vertex(P.n)
    if spec == "auto":
        cls = classify(P)
        return SimplexPoint.vertex(P.n) if cls.f_qso_sets else None
    return SimplexPoint(np.array([float(part) for part in spec.split(",")], dtype=float))


def cmd_trajectory(args) -> int:
    _, P = _load_matrix(args.file)
    x0 = _parse_start(args.start, P.n)
    reference = _resolve_reference(args.reference, P)
    traj = dynamics.trajectory(P, x0, max_steps=args.steps, tol=args.tol, reference=reference)

    single_male = dynamics.is_single_male_shape(P)
    handle, writer = _open_writer(args.output)
    with handle:
        writer.writerow(["step"] + [f"x_{i}" for i in range(P.n)] + ["phi", "phi_bound", "dist_max"])
        for step, point in enumerate(traj.points):
            phi = traj.lyapunov_values[step]
            row = [str(step)] + [_fmt(v) for v in point.coords]
            row.append("" if np.isnan(phi) else _fmt(phi))
            row.append(_fmt(dynamics.lyapunov_bound(step).value) if single_male else "")
            row.append(_fmt(traj.dist_to_limit[step]) if traj.dist_to_limit is not None else "")
            writer.writerow(row)
    print(f"wrote {len(traj.points)} rows to {args.output}; stop reason: {traj.stop_reason}")
    return 0


def cmd_fixed_points(args) -> int:
    _, P = _load_matrix(args.file)
    report = dynamics.find_fixed_points(P, starts=args.starts, seed=args.seed)
    print(f"multistart search: starts={args.starts}, seed={args.seed}")
    if not report.candidates:
        print("  no candidates found (legal outcome; residual threshold 1e-10)")
    for cand in report.candidates:
        flag = "in simplex" if cand.in_simplex else "REJECTED: not in simplex"
        print(f"  {_fmt_point(cand.point)} residual={cand.residual:.3e} [{flag}]")

    if P.n == 3 and dynamics.is_single_male_shape(P):
        a, b, c = (float(P.p[1, 2, k]) for k in range(3))
        alg = dynamics.fixed_points_m2(a, b, c)
        print(f"algebraic candidates of the three-state family (a={_fmt(a)}, b={_fmt(b)}, c={_fmt(c)}):")
        for cand in alg.candidates:
            flag = "in simplex" if cand.in_simplex else "REJECTED: not in simplex"
            print(f"  {_fmt_point(cand.point)} residual={cand.residual:.3e} [{flag}]")

    if report.unique_in_simplex is not None:
        print(f"unique in-simplex fixed point: {_fmt_point(report.unique_in_simplex.coords)}")
    return 0


def _log_schedule(n: int) -> list[int]:
    out = []
    value = 1
    while value < n:
        out.append(value)
        value *= 2
    out.append(n)
    return out


def cmd_ergodic(args) -> int:
    _, P = _load_matrix(args.file)
    x0 = _parse_start(args.start, P.n)
    schedule = _log_schedule(args.n)
    rows = dynamics.cesaro_running(P, x0, schedule)
    handle, writer = _open_writer(args.output)
    with handle:
        writer.writerow(["n"] + [f"avg_{i}" for i in range(P.n)])
        for count, avg in rows:
            writer.writerow([str(count)] + [_fmt(v) for v in avg])
    print(f"wrote {len(rows)} rows to {args.output} (running averages up to n={args.n})")
    return 0


def cmd_conjecture(args) -> int:
    if args.f is not None:
        policy = "fixed"
        females = _parse_females(args.f)
    else:
        if args.f_policy is None:
            raise DocumentError("either --f or --f-policy is required")
        policy = args.f_policy
        females = None
    report = analysis.conjecture_scan(
        m=args.m,
        trials=args.trials,
        iterations=args.iterations,
        tol=args.tol,
        seed=args.seed,
        f_policy=policy,
        females=females,
    )
    params = report.parameters
    f_txt = "{" + ",".join(map(str, sorted(params.females))) + "}" if params.females else "-"
    print(
        f"scan: m={params.m} policy={params.f_policy} F={f_txt} trials={params.trials} "
        f"iterations={params.iterations} tol={params.tol:g} seed={params.seed}"
    )
    print(f"converged: {report.converged}/{report.trials}  max final distance: {report.max_final_distance:.3e}")
    worst = report.worst_case
    print(
        f"worst trial: #{worst.trial} seed={worst.seed} F={_females_cell(worst.females)} "
        f"steps={worst.steps} final_dist={worst.final_dist:.3e}"
    )
    print(f"note: {report.note}")

    if args.csv:
        handle, writer = _open_writer(args.csv)
        with handle:
            writer.writerow(["trial", "seed", "F", "steps", "final_dist", "converged"])
            for r in report.results:
                writer.writerow(
                    [
                        str(r.trial),
                        str(r.seed),
                        _females_cell(r.females),
                        str(r.steps),
                        _fmt(r.final_dist),
                        "1" if r.converged else "0",
                    ]
                )
        print(f"wrote {len(report.results)} trial rows to {args.csv}")
    return 0


def cmd_presets(args) -> int:
    for name in sorted(PRESETS):
        _, description = PRESETS[name]
        print(f"{name}: {description}")
    return 0


# --- replay ----------------------------------------------------------------


def _read_csv(path) -> list[list[str]]:
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.reader(handle))


def _replay_trajectory(rows: list[list[str]], args) -> int:
    if args.operator is None:
        raise DocumentError("replaying a trajectory CSV requires --operator")
    _, P = _load_matrix(args.operator)
    header = rows[0]
    n = len(header) - 4
    if n != P.n or header[1 : 1 + n] != [f"x_{i}" for i in range(n)]:
        raise DocumentError("CSV columns do not match the operator's state count")
    single_male = dynamics.is_single_male_shape(P)
    worst = 0.0
    for prev, nxt in zip(rows[1:], rows[2:]):
        x = np.array([float(v) for v in prev[1 : 1 + n]])
        y = apply_unnormalized(P, x)
        y /= y.sum()
        stored = np.array([float(v) for v in nxt[1 : 1 + n]])
        worst = max(worst, float(np.max(np.abs(y - stored))))
        if nxt[1 + n]:
            phi = stored[1] * stored[2:].sum()
            worst = max(worst, abs(phi - float(nxt[1 + n])))
        if single_male and nxt[2 + n]:
            bound = dynamics.lyapunov_bound(int(nxt[0])).value
            worst = max(worst, abs(bound - float(nxt[2 + n])))
    print(f"replayed {len(rows) - 1} trajectory rows; max deviation {worst:.3e}")
    return 0 if worst <= REPLAY_TOL else 1


def _replay_ergodic(rows: list[list[str]], args) -> int:
    if args.operator is None:
        raise DocumentError("replaying an ergodic CSV requires --operator")
    _, P = _load_matrix(args.operator)
    n = len(rows[0]) - 1
    if n != P.n:
        raise DocumentError("CSV columns do not match the operator's state count")
    counts = [int(r[0]) for r in rows[1:]]
    if not counts or counts[0] != 1:
        raise DocumentError("ergodic CSV must start at n=1 so the start point is recoverable")
    x0 = SimplexPoint(np.array([float(v) for v in rows[1][1:]]))
    recomputed = dict(dynamics.cesaro_running(P, x0, counts))
    worst = 0.0
    for row in rows[1:]:
        stored = np.array([float(v) for v in row[1:]])
        worst = max(worst, float(np.max(np.abs(recomputed[int(row[0])] - stored))))
    print(f"replayed {len(rows) - 1} ergodic rows; max deviation {worst:.3e}")
    return 0 if worst <= REPLAY_TOL else 1


def _replay_conjecture(rows: list[list[str]], args) -> int:
    if args.m is None or args.iterations is None or args.tol is None:
        raise DocumentError("replaying a conjecture CSV requires --m, --iterations and --tol")
    worst = 0.0
    mismatches = 0
    for row in rows[1:]:
        _, seed, f_cell, steps, final_dist, converged = row
        females = _parse_females(f_cell)
        _, steps2, dist2, conv2, _ = analysis.run_trial(
            args.m, females, int(seed), args.iterations, args.tol
        )
        worst = max(worst, abs(dist2 - float(final_dist)))
        if steps2 != int(steps) or conv2 != (converged == "1"):
            mismatches += 1
    print(f"replayed {len(rows) - 1} conjecture rows; max deviation {worst:.3e}, mismatches {mismatches}")
    return 0 if worst <= REPLAY_TOL and mismatches == 0 else 1


def cmd_replay(args) -> int:
    rows = _read_csv(args.csvfile)
    if not rows or len(rows) < 2:
        raise DocumentError("CSV has no data rows")
    head = rows[0][0]
    if head == "step":
        return _replay_trajectory(rows, args)
    if head == "n":
        return _replay_ergodic(rows, args)
    if head == "trial":
        return _replay_conjecture(rows, args)
    raise DocumentError(f"unrecognized CSV header starting with {head!r}")


# --- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsodyn",
        description="Quadratic stochastic operators on the simplex: validation, dynamics, scanning.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="stochasticity, classification and first-row counts")
    p.add_argument("file", help="operator document (JSON)")
    p.add_argument("--symmetrize", action="store_true", help="average both orientations of cubic entries")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("trajectory", help="iterate an operator and write per-step CSV")
    p.add_argument("file")
    p.add_argument("--start", required=True, help="coords 'a,b,c', 'uniform', or 'random:<seed>'")
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument(
        "--reference",
        default="auto",
        help="'auto' (vertex 0 for two-sex operators), 'vertex0', 'none', or coords",
    )
    p.add_argument("--output", required=True, help="CSV path")
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser("fixed-points", help="multistart fixed-point search")
    p.add_argument("file")
    p.add_argument("--starts", type=int, default=100)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_fixed_points)

    p = sub.add_parser("ergodic", help="running Cesaro averages at a logarithmic schedule")
    p.add_argument("file")
    p.add_argument("--start", required=True)
    p.add_argument("--n", type=int, required=True, help="number of averaged points")
    p.add_argument("--output", required=True, help="CSV path")
    p.set_defaults(func=cmd_ergodic)

    p = sub.add_parser("conjecture", help="randomized convergence scan over two-sex operators")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--iterations", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--f", help="fixed female set, e.g. '2,3'")
    p.add_argument("--f-policy", choices=["all", "random"], help="female-set policy when --f is absent")
    p.add_argument("--csv", help="write per-trial rows to this path")
    p.set_defaults(func=cmd_conjecture)

    p = sub.add_parser("presets", help="list the named operators")
    p.set_defaults(func=cmd_presets)

    p = sub.add_parser("replay", help="recompute an emitted CSV and check consistency")
    p.add_argument("csvfile")
    p.add_argument("--operator", help="operator document (trajectory/ergodic CSVs)")
    p.add_argument("--m", type=int, help="scan m (conjecture CSVs)")
    p.add_argument("--iterations", type=int, help="scan iterations (conjecture CSVs)")
    p.add_argument("--tol", type=float, help="scan tolerance (conjecture CSVs)")
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DocumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except QsoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
