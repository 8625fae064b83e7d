"""Command-line entry point: single solves and the three sweep families.

Exit codes: 0 success, 2 usage error, 3 configuration error, 4 solver error,
5 when every requested result is infeasible (or outside the closed-form
approximation's domain).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..baselines import SearchBudget
from ..channel_model import Scenario, dbm_to_watt, load_scenario, watt_to_dbm
from ..ee_optimizer import solve_ee_approx, solve_ee_precise
from ..errors import ApproximationDomainError, ConfigError, InfeasibleError, SolverError
from ..se_optimizer import DEFAULT_TOL, solve_se_approx, solve_se_precise
from .sweeps import SCHEMES, Status, SweepKind, SweepSpec, column_manifest, run_sweep, sweep_csv, to_csv, write_outputs

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_SOLVER = 4
EXIT_INFEASIBLE = 5

log = logging.getLogger("pilotopt")

_SWEEP_DEFAULTS = {
    "power-sweep": (20.0, 46.0, 27),
    "rate-sweep": (1.0, 8.0, 15),
    "alpha-sweep": (0.001, 0.999, 999),
}


def _schemes(text: str) -> tuple[str, ...]:
    items = tuple(s.strip().lower() for s in text.split(",") if s.strip())
    bad = [s for s in items if s not in SCHEMES]
    if bad or not items:
        raise argparse.ArgumentTypeError(f"schemes must be a comma list from {','.join(SCHEMES)}")
    return items


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(s) for s in text.split(",") if s.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("scenario", type=Path, help="TOML scenario file")
    common.add_argument("--out", type=Path, help="write CSV here (default: stdout)")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="precise solver tolerance")
    common.add_argument("--seed", type=int, default=0, help="seed for the stochastic search")
    common.add_argument("--schemes", type=_schemes, default=SCHEMES, help="comma list of pos,aos,gas,ts")
    common.add_argument("--points", type=int, help="number of sweep points")
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--precise", dest="mode", action="store_const", const="precise")
    mode.add_argument("--approx", dest="mode", action="store_const", const="approx")
    mode.add_argument("--both", dest="mode", action="store_const", const="both")
    common.add_argument("-v", "--verbose", action="store_true")

    sweep = argparse.ArgumentParser(add_help=False)
    sweep.add_argument("--start", type=float, help="first grid value")
    sweep.add_argument("--stop", type=float, help="last grid value")
    sweep.add_argument("--ts-alphas", type=_floats, default=(0.01, 0.1, 0.5), help="uniform ratios for ts curves")
    sweep.add_argument("--population", type=int, default=50)
    sweep.add_argument("--generations", type=int, default=100)
    sweep.add_argument("--jobs", type=int, default=1, help="worker processes")

    parser = argparse.ArgumentParser(prog="pilotopt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-se", parents=[common], help="maximise SE at a fixed transmit power")
    p.add_argument("--power-dbm", type=float, required=True)

    p = sub.add_parser("solve-ee", parents=[common], help="minimise transmit power for a rate target")
    p.add_argument("--rate-mbps", type=float, required=True)

    sub.add_parser("power-sweep", parents=[common, sweep], help="rate versus transmit power (x in dBm)")
    sub.add_parser("rate-sweep", parents=[common, sweep], help="EE versus required SE (x in bit/s/Hz)")
    p = sub.add_parser("alpha-sweep", parents=[common, sweep], help="SE and EE versus a uniform pilot ratio")
    p.add_argument("--power-dbm", type=float, default=30.0, help="transmit power for the SE column")
    p.add_argument("--rate-mbps", type=float, default=1.0, help="rate target for the EE column")
    p.add_argument("--ee-fixed-power", action="store_true", help="evaluate EE at --power-dbm instead")
    return parser


def _methods(args) -> list[str]:
    mode = args.mode or "both"
    return ["precise", "approx"] if mode == "both" else [mode]


def _emit(text: str, manifest: dict, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        write_outputs(text, manifest, out)
        log.info("wrote %s", out)


def _solve_se(scenario: Scenario, args) -> int:
    p_w = float(dbm_to_watt(args.power_dbm))
    M = scenario.num_bs
    columns = ["method", "power_dbm", "power_w", "snr", "rate_bps", "se_bit_per_hz"]
    columns += [f"alpha_{m}" for m in range(1, M + 1)] + ["status"]
    records, statuses = [], []
    for method in _methods(args):
        record = dict.fromkeys(columns, float("nan"))
        record.update(method=method, power_dbm=args.power_dbm, power_w=p_w)
        try:
            sol = solve_se_precise(scenario, p_w, args.tol) if method == "precise" else solve_se_approx(scenario, p_w)
        except InfeasibleError as exc:
            log.warning("%s: %s", method, exc)
            record["status"] = Status.INFEASIBLE
        except ApproximationDomainError as exc:
            log.warning("%s: %s", method, exc)
            record["status"] = Status.APPROX_DOMAIN_ERROR
        else:
            record.update(snr=sol.optimal_snr, rate_bps=sol.capacity_bps, se_bit_per_hz=sol.spectral_efficiency)
            record.update({f"alpha_{m}": a for m, a in enumerate(sol.allocation.ratios, start=1)})
            record["status"] = Status.OK
        records.append(record)
        statuses.append(record["status"])
    _emit(to_csv(columns, records), column_manifest(columns, "solve_se"), args.out)
    return EXIT_OK if Status.OK in statuses else EXIT_INFEASIBLE


def _solve_ee(scenario: Scenario, args) -> int:
    rate = args.rate_mbps * 1e6
    M = scenario.num_bs
    columns = ["method", "rate_bps", "power_w", "power_dbm", "ee_bit_per_joule", "achieved_snr"]
    columns += [f"alpha_{m}" for m in range(1, M + 1)] + ["achievable_rate_bps", "status"]
    records, statuses = [], []
    for method in _methods(args):
        record = dict.fromkeys(columns, float("nan"))
        record.update(method=method, rate_bps=rate)
        try:
            sol = solve_ee_precise(scenario, rate, args.tol) if method == "precise" else solve_ee_approx(scenario, rate)
        except InfeasibleError as exc:
            log.warning("%s: %s", method, exc)
            record["status"] = Status.INFEASIBLE
        except ApproximationDomainError as exc:
            log.warning("%s: %s", method, exc)
            record["status"] = Status.APPROX_DOMAIN_ERROR
        else:
            record.update(
                power_w=sol.min_tx_power_w,
                power_dbm=float(watt_to_dbm(sol.min_tx_power_w)),
                ee_bit_per_joule=sol.energy_efficiency_bit_per_joule,
                achieved_snr=sol.achieved_snr,
                achievable_rate_bps=sol.achievable_rate_bps,
            )
            record.update({f"alpha_{m}": a for m, a in enumerate(sol.allocation.ratios, start=1)})
            record["status"] = Status.OK if sol.feasible else Status.INFEASIBLE
        records.append(record)
        statuses.append(record["status"])
    _emit(to_csv(columns, records), column_manifest(columns, "solve_ee"), args.out)
    return EXIT_OK if Status.OK in statuses else EXIT_INFEASIBLE


def _sweep(scenario: Scenario, args) -> int:
    start, stop, points = _SWEEP_DEFAULTS[args.command]
    schemes = tuple(args.schemes)
    if args.mode == "precise":
        schemes = tuple(s for s in schemes if s != "aos")
    elif args.mode == "approx":
        schemes = tuple(s for s in schemes if s != "pos")
    kind = {"power-sweep": SweepKind.POWER, "rate-sweep": SweepKind.RATE, "alpha-sweep": SweepKind.ALPHA}[args.command]
    extra = {}
    if kind is SweepKind.ALPHA:
        extra = dict(
            tx_power_w=float(dbm_to_watt(args.power_dbm)),
            target_rate_bps=args.rate_mbps * 1e6,
            ee_fixed_power=args.ee_fixed_power,
        )
    spec = SweepSpec(
        kind=kind,
        start=start if args.start is None else args.start,
        stop=stop if args.stop is None else args.stop,
        points=points if args.points is None else args.points,
        schemes=schemes,
        ts_alphas=args.ts_alphas,
        seed=args.seed,
        tol=args.tol,
        budget=SearchBudget(population=args.population, generations=args.generations),
        **extra,
    )
    result = run_sweep(scenario, spec, jobs=args.jobs)
    _emit(sweep_csv(result), column_manifest(result.columns, kind.value), args.out)
    statuses = set(result.statuses)
    if Status.OK in statuses:
        return EXIT_OK
    return EXIT_SOLVER if Status.SOLVER_ERROR in statuses else EXIT_INFEASIBLE


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    handler = {"solve-se": _solve_se, "solve-ee": _solve_ee}.get(args.command, _sweep)
    try:
        scenario = load_scenario(args.scenario)
        return handler(scenario, args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except SolverError as exc:
        log.error("solver error: %s", exc)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
