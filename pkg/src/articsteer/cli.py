"""Command-line front end for case runs and result files.

For every requested case/controller pair the tool writes a run directory
with states.csv (17 significant digits), metrics.json and two SVG figures,
then prints a comparison table.  Outputs are deterministic: running the
same configuration twice produces byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import shutil
import sys

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .plots import save_path_plot, save_state_plot
from .simulate import SimResult, run_case

OUTPUT_DIR_ENV = "ARTICSTEER_OUT"

CSV_COLUMNS = (
    "t",
    "ydot1",
    "psidot1",
    "phidot",
    "phi",
    "rho",
    "theta",
    "alpha",
    "x_global",
    "y_global",
)


def _write_states_csv(result: SimResult, path: str):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for i in range(result.time.shape[0]):
            row = [
                result.time[i],
                *result.states[i],
                result.alpha[i],
                result.pos_x[i],
                result.pos_y[i],
            ]
            writer.writerow(f"{value:.17g}" for value in row)


def read_states_csv(path: str) -> dict:
    """Parse a states.csv back into named float arrays."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    data = np.array(rows)
    return {name: data[:, j] for j, name in enumerate(header)}


def _write_metrics_json(result: SimResult, path: str):
    payload = {
        "l2_rho": result.metrics.l2_rho,
        "l2_theta": result.metrics.l2_theta,
        "max_steer_rate": result.metrics.max_steer_rate,
        "max_abs_steer": result.metrics.max_abs_steer,
        "converged": True,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run(config: RunConfig, cases, controllers, out_dir: str) -> int:
    """Run the selected case/controller grid and write result directories."""
    results = []
    for case_id in cases:
        for kind in controllers:
            run_dir = os.path.join(out_dir, f"case{case_id}_{kind}")
            try:
                result = run_case(case_id, kind, config)
            except (ValueError, RuntimeError) as exc:
                print(f"error: case {case_id} {kind}: {exc}", file=sys.stderr)
                return 1
            try:
                os.makedirs(run_dir, exist_ok=True)
                _write_states_csv(result, os.path.join(run_dir, "states.csv"))
                _write_metrics_json(result, os.path.join(run_dir, "metrics.json"))
                label = f"case {case_id} {kind}"
                save_state_plot(result, os.path.join(run_dir, "states.svg"), title=label)
                save_path_plot(
                    result,
                    os.path.join(run_dir, "path.svg"),
                    v=config.vehicle.v,
                    corridor_width=config.vehicle.width_eps,
                    title=label,
                )
            except Exception as exc:
                shutil.rmtree(run_dir, ignore_errors=True)
                print(f"error: writing outputs for case {case_id} {kind}: {exc}", file=sys.stderr)
                return 1
            results.append((case_id, kind, result))
    _print_table(results)
    return 0


def _print_table(results):
    header = f"{'case':>4}  {'controller':<10}  {'l2_rho':>10}  {'l2_theta':>10}  {'max_rate':>10}  {'max_steer':>10}"
    print(header)
    print("-" * len(header))
    for case_id, kind, result in results:
        m = result.metrics
        print(
            f"{case_id:>4}  {kind:<10}  {m.l2_rho:>10.4f}  {m.l2_theta:>10.4f}"
            f"  {m.max_steer_rate:>10.4f}  {m.max_abs_steer:>10.4f}"
        )


def _seed_check() -> int:
    """Small self-contained battery of numeric oracles."""
    from .discretize import DiscreteModel, tustin
    from .rlqr import RlqrWeights, rlqr_synthesize
    from .robust_ls import RlsProblem, RobustRlsProblem, solve_robust_rls
    from .simulate import Metrics, SimResult, compute_metrics
    from .vehicle import VehicleParams, compute_axle_loads

    failures = 0

    def check(name: str, ok: bool, detail: str = ""):
        nonlocal failures
        status = "ok" if ok else "FAIL"
        suffix = f" ({detail})" if detail and not ok else ""
        print(f"{status}: {name}{suffix}")
        if not ok:
            failures += 1

    f, _ = _scalar_tustin()
    check("bilinear map, scalar pole", abs(f - 0.99004975124378114) < 1e-15, f"f = {f!r}")

    rng = np.random.default_rng(7)
    a = rng.standard_normal((6, 6))
    a = a - (np.max(np.abs(np.linalg.eigvals(a))) + 0.5) * np.eye(6)
    disc = tustin(a, np.ones((6, 1)), 0.01)
    mapped = (1.0 + 0.005 * np.linalg.eigvals(a)) / (1.0 - 0.005 * np.linalg.eigvals(a))
    actual = np.linalg.eigvals(disc.f_mat)
    err = float(max(np.min(np.abs(actual - m)) for m in mapped))
    check("bilinear eigenvalue map", err < 1e-9, f"err = {err:.2e}")

    loads = compute_axle_loads(VehicleParams())
    check("rear axle load", abs(loads.fz3 - 196415.82) < 0.01, f"fz3 = {loads.fz3!r}")

    model = DiscreteModel(f_mat=np.array([[1.0]]), g_mat=np.array([[1.0]]), ts=1.0)
    w = RlqrWeights(q_mat=np.array([[1.0]]), r_mat=np.array([[1.0]]), mu=math.inf)
    sol = rlqr_synthesize(model, None, w)
    golden = 0.5 * (1.0 + math.sqrt(5.0))
    ok = abs(sol.p_cost[0, 0] - golden) < 1e-9 and abs(sol.k_gain[0, 0] + 1.0 / golden) < 1e-9
    check("scalar steady-state regulator", ok, f"p = {sol.p_cost[0, 0]!r}")

    prob = RobustRlsProblem(
        base=RlsProblem(
            q_mat=np.array([[1.0]]),
            w_mat=np.array([[1.0]]),
            a_mat=np.array([[1.0]]),
            b_vec=np.array([1.0]),
        ),
        h_mat=np.array([[1.0]]),
        ea_mat=np.array([[0.5]]),
        eb_vec=np.array([0.3]),
    )
    x, _, cost = solve_robust_rls(prob)
    ok = abs(x[0] - 0.6) < 1e-6 and abs(cost - 0.52) < 1e-6
    check("robust least squares, 1-d", ok, f"x = {x[0]!r}, cost = {cost!r}")

    ts = 0.01
    n = 100
    t = np.arange(n + 1) * ts
    states = np.zeros((n + 1, 6))
    states[:, 4] = np.sin(2.0 * np.pi * t)
    res = SimResult(
        time=t,
        states=np.zeros((n + 1, 6)),
        alpha=np.zeros(n + 1),
        x_ref=states,
        u_ref=np.zeros(n + 1),
        pos_x=np.zeros(n + 1),
        pos_y=np.zeros(n + 1),
        metrics=Metrics(0.0, 0.0, 0.0, 0.0),
    )
    m = compute_metrics(res)
    ok = abs(m.l2_rho - math.sqrt(0.5)) < 0.01 * math.sqrt(0.5)
    check("l2 metric on unit sine", ok, f"l2_rho = {m.l2_rho!r}")

    if failures:
        print(f"{failures} check(s) failed")
        return 1
    print("all checks passed")
    return 0


def _scalar_tustin():
    from .discretize import tustin

    disc = tustin(np.array([[-1.0]]), np.array([[1.0]]), 0.01)
    return disc.f_mat[0, 0], disc.g_mat[0, 0]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="articsteer",
        description="Synthesize steering controllers and run double lane-change cases.",
    )
    parser.add_argument("--config", help="YAML run configuration (defaults apply when omitted)")
    parser.add_argument(
        "--case",
        default="all",
        choices=["1", "2", "3", "4", "all"],
        help="which evaluated case to run (default: all configured cases)",
    )
    parser.add_argument(
        "--controller",
        default="both",
        choices=["rlqr", "hinf", "both"],
        help="which controller to run (default: both)",
    )
    parser.add_argument(
        "--out",
        help=f"output directory (default: ${OUTPUT_DIR_ENV} or the configured directory)",
    )
    parser.add_argument(
        "--seed-check",
        action="store_true",
        help="run the built-in numeric oracle battery and exit",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed_check:
        return _seed_check()
    try:
        config = load_config(args.config) if args.config else RunConfig()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out_dir = args.out or os.environ.get(OUTPUT_DIR_ENV) or config.output_dir
    cases = config.cases if args.case == "all" else (int(args.case),)
    controllers = ("rlqr", "hinf") if args.controller == "both" else (args.controller,)
    return run(config, cases, controllers, out_dir)


if __name__ == "__main__":
    sys.exit(main())
