"""Command-line entry point: ``twoway-qkd {curves,sweep,check-condition,verify}``.

Exit codes: 0 success, 2 usage or configuration error, 3 oracle failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from .attacks import AttackAngles, mutual_info_curves
from .channel import ChannelParams, Protocol, load_preset
from .errors import DomainError, PresetError
from .keyrate import RateMode
from .optimize import SweepResult, check_sufficient_condition, distance_grid, optimize_mu, sweep
from .oracle import OracleReport, dense_grid_mu_check, enumerate_two_path_fidelity, monte_carlo_ir

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ORACLE = 3

SWEEP_COLUMNS = ("distance_km", "protocol", "mu_opt", "gain", "qber", "beta", "rate")
CURVE_COLUMNS = ("e", "I_AB", "I_ToM", "I_IR", "I_BB84")
VERIFY_COLUMNS = ("check", "analytic", "oracle", "deviation", "tolerance", "samples", "std_error", "passed")


class UsageError(Exception):
    pass


def fmt(value) -> str:
    """Locale-free CSV cell: 9 significant digits for floats, blank for None."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        return f"{float(value):.9g}"
    return str(value)


def write_csv(stream: TextIO, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])


def _open_out(out: Optional[str], name: str):
    if out is None:
        return None
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path / name


def _emit(out: Optional[str], name: str, header, rows, stdout: TextIO) -> Optional[Path]:
    target = _open_out(out, name)
    if target is None:
        write_csv(stdout, header, rows)
        return None
    buf = io.StringIO()
    write_csv(buf, header, rows)
    target.write_text(buf.getvalue())
    return target


# -- curves ------------------------------------------------------------------

def curve_rows(e_values: Iterable[float]) -> list[tuple]:
    rows = []
    for e in e_values:
        c = mutual_info_curves(e)
        rows.append((c.e, c.i_ab, c.i_tom, c.i_ir, c.i_bb84))
    return rows


def cmd_curves(args, stdout: TextIO, stderr: TextIO) -> int:
    if args.e:
        grid = list(args.e)
    else:
        start = 0.0 if args.start is None else args.start
        stop = 0.5 if args.stop is None else args.stop
        step = 0.01 if args.step is None else args.step
        grid = distance_grid(start, stop, step)
    if any(not 0.0 <= e <= 0.5 for e in grid):
        raise UsageError("disturbance grid must lie within [0, 0.5]")
    target = _emit(args.out, "curves.csv", CURVE_COLUMNS, curve_rows(grid), stdout)
    if target is not None:
        print(f"wrote {target}", file=stdout)
    return EXIT_OK


# -- sweep -------------------------------------------------------------------

def _label(protocol: Protocol, eta_alice: float, many: bool) -> str:
    if protocol is Protocol.TOM and many:
        return f"tom(eta_alice={eta_alice:g})"
    return str(protocol)


def _protocols(choice: str) -> list[Protocol]:
    return [Protocol.BB84, Protocol.TOM] if choice == "both" else [Protocol(choice)]


def plot_script(csv_name: str, labels: Sequence[str], mode: RateMode, title: str) -> str:
    lines = [
        "# gnuplot script: secure key rate per pulse vs distance (log scale)",
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set logscale y",
        "set format y '10^{%L}'",
        "set xlabel 'distance (km)'",
        "set ylabel 'secure key rate per pulse'",
        f"set title '{title} ({mode} mode)'",
    ]
    plots = [
        f"'{csv_name}' using 1:(strcol(2) eq '{lab}' && $7 > 0 ? $7 : NaN) with lines title '{lab}'"
        for lab in labels
    ]
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def run_sweeps(params: ChannelParams, grid, protocols, mode, eta_values, workers=1) -> list[tuple[float, SweepResult]]:
    return [(eta, sweep(params.with_eta_alice(eta), grid, protocols, mode, workers=workers)) for eta in eta_values]


def sweep_rows(results: list[tuple[float, SweepResult]]) -> list[tuple]:
    many = len(results) > 1
    rows = []
    for n, (eta, res) in enumerate(results):
        for protocol, pts in res.points.items():
            if protocol is Protocol.BB84 and n > 0:
                continue
            label = _label(protocol, eta, many)
            rows.extend((p.distance, label, p.mu, p.gain, p.qber, p.beta, p.rate) for p in pts)
    rows.sort(key=lambda r: (r[0], r[1] != "bb84", r[1]))
    return rows


def sweep_summary(results: list[tuple[float, SweepResult]]) -> list[str]:
    many = len(results) > 1
    lines = []
    for n, (eta, res) in enumerate(results):
        for protocol, dmax in res.max_distance.items():
            if protocol is Protocol.BB84 and n > 0:
                continue
            label = _label(protocol, eta, many)
            where = f"{dmax:.2f} km" if dmax is not None else "not reached on grid"
            lines.append(f"max_distance {label}: {where}")
        if res.crossover is not None:
            lines.append(f"crossover (eta_alice={eta:g}): {res.crossover:.2f} km")
    return lines


def cmd_sweep(args, stdout: TextIO, stderr: TextIO) -> int:
    params = load_preset(args.preset)
    grid = distance_grid(
        0.0 if args.start is None else args.start,
        120.0 if args.stop is None else args.stop,
        0.5 if args.step is None else args.step,
    )
    eta_values = args.eta_alice or [params.eta_alice]
    for eta in eta_values:
        if not 0 < eta <= 1:
            raise UsageError(f"--eta-alice must lie in (0, 1], got {eta}")
    mode = RateMode(args.mode)
    results = run_sweeps(params, grid, _protocols(args.protocol), mode, eta_values, workers=args.workers)
    rows = sweep_rows(results)
    out = args.out or "."
    csv_path = _emit(out, "sweep.csv", SWEEP_COLUMNS, rows, stdout)
    labels = list(dict.fromkeys(r[1] for r in rows))
    gp_path = csv_path.with_suffix(".gp")
    gp_path.write_text(plot_script(csv_path.name, labels, mode, str(args.preset)))
    summary = sweep_summary(results)
    (csv_path.parent / "summary.txt").write_text("\n".join(summary) + "\n")
    for line in summary:
        print(line, file=stdout)
    print(f"wrote {csv_path} and {gp_path}", file=stdout)
    if not any(res.has_positive_rate for _, res in results):
        print("warning: no positive key rate anywhere on the grid", file=stderr)
    return EXIT_OK


# -- check-condition ---------------------------------------------------------

def condition_report(params: ChannelParams, distance: float, mode: RateMode = RateMode.PESSIMISTIC) -> dict:
    bb84 = optimize_mu(params, distance, Protocol.BB84, mode)
    tom = optimize_mu(params, distance, Protocol.TOM, mode)
    k = tom.mu_opt / bb84.mu_opt
    cond = check_sufficient_condition(params, distance, k)
    tom_wins = tom.rate_opt > bb84.rate_opt
    return {
        "distance_km": distance,
        "eta_alice": params.eta_alice,
        "mu_opt_bb84": bb84.mu_opt,
        "mu_opt_tom": tom.mu_opt,
        "rate_bb84": bb84.rate_opt,
        "rate_tom": tom.rate_opt,
        "k": k,
        "threshold": cond.threshold,
        "condition_holds": cond.holds,
        "tom_wins": tom_wins,
        "consistent": (not cond.holds) or tom_wins,
    }


def cmd_check_condition(args, stdout: TextIO, stderr: TextIO) -> int:
    params = load_preset(args.preset)
    if args.eta_alice:
        if len(args.eta_alice) != 1:
            raise UsageError("check-condition takes a single --eta-alice value")
        if not 0 < args.eta_alice[0] <= 1:
            raise UsageError(f"--eta-alice must lie in (0, 1], got {args.eta_alice[0]}")
        params = params.with_eta_alice(args.eta_alice[0])
    rep = condition_report(params, args.distance, RateMode(args.mode))
    for key, value in rep.items():
        print(f"{key}: {fmt(value)}", file=stdout)
    return EXIT_OK if rep["consistent"] else EXIT_ORACLE


# -- verify ------------------------------------------------------------------

def oracle_suite(params_by_name: dict[str, ChannelParams], seed: int, samples: int) -> list[OracleReport]:
    rng = np.random.Generator(np.random.Philox(seed))
    reports: list[OracleReport] = []
    fixed = [(0.0, 0.0), (math.pi / 3, math.pi / 6), (math.pi / 2, 0.0), (math.pi / 2, math.pi / 2)]
    random_pairs = rng.uniform(0.0, math.pi / 2, size=(100, 2))
    for a, b in [*fixed, *map(tuple, random_pairs)]:
        reports.extend(enumerate_two_path_fidelity(AttackAngles(a, b)))
    for x in (0.0, 0.2, 0.4, 1.0):
        reports.extend(monte_carlo_ir(x, samples=samples, seed=seed))
    for name, params in params_by_name.items():
        for distance in (0.0, 16.0, 41.0):
            for protocol in Protocol:
                for mode in RateMode:
                    reports.append(dense_grid_mu_check(params, distance, protocol, mode))
    return reports


def cmd_verify(args, stdout: TextIO, stderr: TextIO) -> int:
    names = [args.preset] if args.preset else ["gys", "kth"]
    presets = {str(n): load_preset(n) for n in names}
    reports = oracle_suite(presets, args.seed, int(args.samples))
    rows = [
        (r.check, r.analytic, r.oracle, r.deviation, r.tolerance, r.samples, r.std_error, r.passed)
        for r in reports
    ]
    target = _emit(args.out, "verify.csv", VERIFY_COLUMNS, rows, stdout)
    failed = [r for r in reports if not r.passed]
    for r in failed:
        print(f"FAIL {r.check}: analytic={fmt(r.analytic)} oracle={fmt(r.oracle)} tol={fmt(r.tolerance)}", file=stderr)
    print(f"{len(reports) - len(failed)}/{len(reports)} oracle checks passed", file=stderr if target is None else stdout)
    return EXIT_ORACLE if failed else EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twoway-qkd", description="Key rates of a two-way QKD toy model vs BB84.")
    sub = p.add_subparsers(dest="cmd", required=True)

    def grid_flags(sp, what: str):
        sp.add_argument("--from", dest="start", type=float, default=None, help=f"first {what}")
        sp.add_argument("--to", dest="stop", type=float, default=None, help=f"last {what}")
        sp.add_argument("--step", type=float, default=None, help=f"{what} step")

    def link_flags(sp):
        sp.add_argument("--preset", default="gys", help="preset file path, or bundled name gys/kth")
        sp.add_argument("--mode", choices=[m.value for m in RateMode], default="pessimistic")
        sp.add_argument("--eta-alice", type=float, nargs="+", default=None, metavar="X")

    c = sub.add_parser("curves", help="mutual-information curves vs disturbance")
    grid_flags(c, "disturbance (default 0..0.5 step 0.01)")
    c.add_argument("--e", type=float, nargs="+", default=None, help="explicit disturbance values")
    c.add_argument("--out", default=None, help="output directory (default: CSV to stdout)")
    c.set_defaults(func=cmd_curves)

    s = sub.add_parser("sweep", help="optimized key rate vs distance")
    link_flags(s)
    s.add_argument("--protocol", choices=["bb84", "tom", "both"], default="both")
    grid_flags(s, "distance in km (default 0..120 step 0.5)")
    s.add_argument("--out", default=None, help="output directory (default: current directory)")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--seed", type=int, default=0, help="accepted for a uniform interface; sweeps are deterministic")
    s.set_defaults(func=cmd_sweep)

    k = sub.add_parser("check-condition", help="optimal-intensity ratio vs the sufficient threshold")
    link_flags(k)
    k.add_argument("--distance", type=float, required=True, help="km")
    k.set_defaults(func=cmd_check_condition)

    v = sub.add_parser("verify", help="run the oracle suite")
    v.add_argument("--preset", default=None, help="restrict dense-grid checks to one preset")
    v.add_argument("--seed", type=int, default=42)
    v.add_argument("--samples", type=float, default=1_000_000)
    v.add_argument("--out", default=None, help="output directory (default: CSV to stdout)")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: Optional[Sequence[str]] = None, stdout: TextIO = None, stderr: TextIO = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args, stdout, stderr)
    except (UsageError, PresetError, DomainError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
