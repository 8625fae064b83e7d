"""Sweep runners behind the three experiment families.

* power sweep: achievable rate versus transmit power (dBm on the x axis)
* rate sweep: energy efficiency versus required spectral efficiency
* alpha sweep: SE and EE of a uniform pilot ratio versus that ratio

Every sweep point yields exactly one :class:`SweepRow`, whatever happened
while solving it; failures are recorded in ``status`` and their cells are
NaN.  Rows come back in grid order even when evaluated in parallel.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from ..baselines import SearchBudget, stochastic_search_ee, stochastic_search_se, traditional_min_power, traditional_scheme
from ..channel_model import Scenario, dbm_to_watt, watt_to_dbm
from ..ee_optimizer import solve_ee_approx, solve_ee_precise
from ..errors import ApproximationDomainError, ConfigError, InfeasibleError, SolverError
from ..link_metrics import capacity_bps, energy_efficiency, spectral_efficiency
from ..se_optimizer import DEFAULT_TOL, solve_se_approx, solve_se_precise

SCHEMES = ("pos", "aos", "gas", "ts")
NAN = math.nan


class SweepKind(str, enum.Enum):
    POWER = "power_sweep"
    RATE = "rate_sweep"
    ALPHA = "alpha_sweep"


class Status(str, enum.Enum):
    OK = "ok"
    INFEASIBLE = "infeasible"
    APPROX_DOMAIN_ERROR = "approx_domain_error"
    SOLVER_ERROR = "solver_error"


# worst first; a row reports the worst status among its schemes
_SEVERITY = (Status.SOLVER_ERROR, Status.INFEASIBLE, Status.APPROX_DOMAIN_ERROR, Status.OK)


@dataclass(frozen=True)
class SweepSpec:
    kind: SweepKind
    start: float
    stop: float
    points: int
    schemes: tuple[str, ...] = SCHEMES
    ts_alphas: tuple[float, ...] = (0.01, 0.1, 0.5)
    seed: int = 0
    tol: float = DEFAULT_TOL
    budget: SearchBudget = field(default_factory=SearchBudget)
    # alpha sweep only
    tx_power_w: float | None = None
    target_rate_bps: float | None = None
    ee_fixed_power: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", SweepKind(self.kind))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        object.__setattr__(self, "ts_alphas", tuple(float(a) for a in self.ts_alphas))
        if not self.start < self.stop:
            raise ConfigError(f"sweep start must be below stop ({self.start} >= {self.stop})")
        if self.points < 2:
            raise ConfigError("a sweep needs at least 2 points")
        if not self.schemes:
            raise ConfigError("at least one scheme is required")
        unknown = set(self.schemes) - set(SCHEMES)
        if unknown:
            raise ConfigError(f"unknown schemes: {sorted(unknown)}")
        if "ts" in self.schemes and not self.ts_alphas:
            raise ConfigError("the ts scheme needs at least one alpha")
        if any(not 0.0 <= a <= 1.0 for a in self.ts_alphas):
            raise ConfigError("ts alphas must lie in [0, 1]")
        if self.kind is SweepKind.ALPHA:
            if not (0.0 < self.start and self.stop < 1.0):
                raise ConfigError("alpha sweep grid must lie inside (0, 1)")
            if self.tx_power_w is None or self.target_rate_bps is None:
                raise ConfigError("alpha sweep needs tx_power_w and target_rate_bps")

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class SweepRow:
    x_value: float
    values: dict
    status: Status


@dataclass(frozen=True)
class SweepResult:
    kind: SweepKind
    columns: tuple[str, ...]
    rows: tuple[SweepRow, ...]

    def column(self, name: str) -> np.ndarray:
        return np.array([row.values[name] for row in self.rows], dtype=float)

    @property
    def statuses(self) -> list[Status]:
        return [row.status for row in self.rows]


def _ts_label(alpha: float) -> str:
    return f"ts_{alpha:g}"


def _worst(statuses: Iterable[Status]) -> Status:
    statuses = set(statuses)
    return next(s for s in _SEVERITY if s in statuses or s is Status.OK)


def _run_guarded(fn: Callable[[], dict], fields: Sequence[str]) -> tuple[dict, Status]:
    """Run one scheme; on a solver-side failure return NaN cells and the status."""
    try:
        return fn(), Status.OK
    except InfeasibleError:
        status = Status.INFEASIBLE
    except ApproximationDomainError:
        status = Status.APPROX_DOMAIN_ERROR
    except SolverError:
        status = Status.SOLVER_ERROR
    return {name: NAN for name in fields}, status


def _alpha_fields(prefix: str, num_bs: int) -> list[str]:
    return [f"{prefix}_alpha_{m}" for m in range(1, num_bs + 1)]


def _alpha_cells(prefix: str, ratios) -> dict:
    return {f"{prefix}_alpha_{m}": float(a) for m, a in enumerate(ratios, start=1)}


def _map(fn, items: list, jobs: int) -> list:
    if jobs <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# -- power sweep ---------------------------------------------------------------


def _power_point(task) -> SweepRow:
    scenario, spec, index, p_dbm = task
    p_w = float(dbm_to_watt(p_dbm))
    M = scenario.num_bs
    values = {"power_dbm": float(p_dbm), "power_w": p_w}
    statuses = []

    def se_cells(prefix, solve):
        fields = [f"{prefix}_snr", f"{prefix}_rate_bps"] + _alpha_fields(prefix, M)

        def run():
            sol = solve()
            return {fields[0]: sol.optimal_snr, fields[1]: sol.capacity_bps, **_alpha_cells(prefix, sol.allocation.ratios)}

        cells, status = _run_guarded(run, fields)
        values.update(cells)
        statuses.append(status)

    if "pos" in spec.schemes:
        se_cells("pos", lambda: solve_se_precise(scenario, p_w, spec.tol))
    if "aos" in spec.schemes:
        se_cells("aos", lambda: solve_se_approx(scenario, p_w))
    if "gas" in spec.schemes:
        budget = _point_budget(spec, index)
        se_cells("gas", lambda: stochastic_search_se(scenario, p_w, budget))
    if "ts" in spec.schemes:
        W = scenario.config.bandwidth_hz
        for a in spec.ts_alphas:
            values[f"{_ts_label(a)}_rate_bps"] = capacity_bps(W, traditional_scheme(scenario, p_w, a))
    return SweepRow(float(p_dbm), values, _worst(statuses))


def _point_budget(spec: SweepSpec, index: int) -> SearchBudget:
    b = spec.budget
    return SearchBudget(b.population, b.generations, spec.seed + index, b.mutation_scale, b.max_evaluations)


def run_power_sweep(scenario: Scenario, spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """Rate of each scheme for every transmit power on the dBm grid."""
    if spec.kind is not SweepKind.POWER:
        raise ConfigError(f"expected a power sweep spec, got {spec.kind.value}")
    if spec.stop > scenario.config.max_tx_power_dbm + 1e-9:
        raise ConfigError(
            f"sweep stop {spec.stop} dBm exceeds P_max {scenario.config.max_tx_power_dbm} dBm"
        )
    tasks = [(scenario, spec, i, float(x)) for i, x in enumerate(spec.grid())]
    return _assemble(SweepKind.POWER, _map(_power_point, tasks, jobs))


# -- rate sweep ----------------------------------------------------------------


def _rate_point(task) -> SweepRow:
    scenario, spec, index, se_target = task
    cfg = scenario.config
    M = scenario.num_bs
    rate = float(se_target) * cfg.bandwidth_hz
    values = {"se_target_bps_per_hz": float(se_target), "rate_bps": rate}
    statuses = []

    def ee_cells(prefix, solve):
        fields = [f"{prefix}_power_w", f"{prefix}_power_dbm", f"{prefix}_ee_bit_per_joule"] + _alpha_fields(prefix, M)

        def run():
            sol = solve()
            if not sol.feasible:
                raise InfeasibleError(f"{prefix}: rate {rate:.6g} bit/s unreachable at P_max")
            return {
                fields[0]: sol.min_tx_power_w,
                fields[1]: float(watt_to_dbm(sol.min_tx_power_w)),
                fields[2]: sol.energy_efficiency_bit_per_joule,
                **_alpha_cells(prefix, sol.allocation.ratios),
            }

        cells, status = _run_guarded(run, fields)
        values.update(cells)
        statuses.append(status)

    if "pos" in spec.schemes:
        ee_cells("pos", lambda: solve_ee_precise(scenario, rate, spec.tol))
    if "aos" in spec.schemes:
        ee_cells("aos", lambda: solve_ee_approx(scenario, rate))
    if "gas" in spec.schemes:
        budget = _point_budget(spec, index)
        ee_cells("gas", lambda: stochastic_search_ee(scenario, rate, budget))
    if "ts" in spec.schemes:
        any_ok = False
        ts_failed = Status.INFEASIBLE
        for a in spec.ts_alphas:
            label = _ts_label(a)
            try:
                p = traditional_min_power(scenario, rate, a, spec.tol)
            except SolverError:
                p, ts_failed = None, Status.SOLVER_ERROR
            if p is None:
                values[f"{label}_power_w"] = NAN
                values[f"{label}_ee_bit_per_joule"] = NAN
            else:
                any_ok = True
                values[f"{label}_power_w"] = p
                values[f"{label}_ee_bit_per_joule"] = energy_efficiency(rate, p, cfg)
        # a single unreachable uniform ratio is a data point, not a row failure
        statuses.append(Status.OK if any_ok else ts_failed)
    return SweepRow(float(se_target), values, _worst(statuses))


def run_rate_sweep(scenario: Scenario, spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """Minimal power and energy efficiency of each scheme over a grid of SE targets (bit/s/Hz)."""
    if spec.kind is not SweepKind.RATE:
        raise ConfigError(f"expected a rate sweep spec, got {spec.kind.value}")
    if not spec.start > 0:
        raise ConfigError("rate sweep targets must be positive")
    tasks = [(scenario, spec, i, float(x)) for i, x in enumerate(spec.grid())]
    return _assemble(SweepKind.RATE, _map(_rate_point, tasks, jobs))


# -- alpha sweep ---------------------------------------------------------------


def _alpha_point(task) -> SweepRow:
    scenario, spec, _, alpha = task
    cfg = scenario.config
    p_w = spec.tx_power_w
    snr = traditional_scheme(scenario, p_w, alpha)
    rate_at_p = capacity_bps(cfg.bandwidth_hz, snr)
    values = {
        "alpha": float(alpha),
        "se_bit_per_hz": spectral_efficiency(snr),
        "rate_bps": rate_at_p,
    }
    status = Status.OK
    if spec.ee_fixed_power:
        values["ee_power_w"] = p_w
        values["ee_bit_per_joule"] = energy_efficiency(rate_at_p, p_w, cfg) if rate_at_p > 0 else 0.0
    else:
        try:
            p_min = traditional_min_power(scenario, spec.target_rate_bps, alpha, spec.tol)
        except SolverError:
            p_min, status = None, Status.SOLVER_ERROR
        if p_min is None:
            status = Status.INFEASIBLE if status is Status.OK else status
            values["ee_power_w"] = NAN
            values["ee_bit_per_joule"] = NAN
        else:
            values["ee_power_w"] = p_min
            values["ee_bit_per_joule"] = energy_efficiency(spec.target_rate_bps, p_min, cfg)
    return SweepRow(float(alpha), values, status)


def run_alpha_sweep(
    scenario: Scenario,
    spec: SweepSpec,
    tx_power_w: float | None = None,
    target_rate_bps: float | None = None,
    jobs: int = 1,
) -> SweepResult:
    """SE at ``tx_power_w`` and EE at the least power meeting ``target_rate_bps``, per uniform alpha.

    With ``spec.ee_fixed_power`` the EE column is instead evaluated at
    ``tx_power_w`` with the rate that power achieves.  The grid argmax of
    each column is flagged with a 1 in ``se_argmax`` / ``ee_argmax``.
    """
    if tx_power_w is not None or target_rate_bps is not None:
        spec = replace(
            spec,
            tx_power_w=spec.tx_power_w if tx_power_w is None else tx_power_w,
            target_rate_bps=spec.target_rate_bps if target_rate_bps is None else target_rate_bps,
        )
    if spec.kind is not SweepKind.ALPHA:
        raise ConfigError(f"expected an alpha sweep spec, got {spec.kind.value}")
    if not 0 < spec.tx_power_w <= scenario.config.max_tx_power_w * (1 + 1e-12):
        raise ConfigError("alpha sweep power must lie in (0, P_max]")
    if not spec.target_rate_bps > 0:
        raise ConfigError("alpha sweep target rate must be positive")
    tasks = [(scenario, spec, i, float(x)) for i, x in enumerate(spec.grid())]
    rows = _map(_alpha_point, tasks, jobs)

    flagged = []
    for key, flag in (("se_bit_per_hz", "se_argmax"), ("ee_bit_per_joule", "ee_argmax")):
        col = np.array([r.values[key] for r in rows], dtype=float)
        best = int(np.nanargmax(col)) if np.any(np.isfinite(col)) else -1
        flagged.append((flag, best))
    out = []
    for i, row in enumerate(rows):
        values = dict(row.values)
        for flag, best in flagged:
            values[flag] = int(i == best)
        out.append(SweepRow(row.x_value, values, row.status))
    return _assemble(SweepKind.ALPHA, out)


def run_sweep(scenario: Scenario, spec: SweepSpec, jobs: int = 1) -> SweepResult:
    runner = {
        SweepKind.POWER: run_power_sweep,
        SweepKind.RATE: run_rate_sweep,
        SweepKind.ALPHA: run_alpha_sweep,
    }[spec.kind]
    return runner(scenario, spec, jobs=jobs)


def _assemble(kind: SweepKind, rows: list[SweepRow]) -> SweepResult:
    columns = tuple(rows[0].values) + ("status",)
    return SweepResult(kind, columns, tuple(rows))


# -- output --------------------------------------------------------------------


def format_cell(value) -> str:
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    return repr(value)


def to_csv(columns: Sequence[str], records: Iterable[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for record in records:
        writer.writerow([format_cell(record[c]) for c in columns])
    return buf.getvalue()


def sweep_csv(result: SweepResult) -> str:
    records = [{**row.values, "status": row.status} for row in result.rows]
    return to_csv(result.columns, records)


_UNITS = (
    ("_power_dbm", "dBm"),
    ("power_dbm", "dBm"),
    ("_power_w", "W"),
    ("power_w", "W"),
    ("rate_bps", "bit/s"),
    ("ee_bit_per_joule", "bit/J"),
    ("se_bit_per_hz", "bit/s/Hz"),
    ("se_target_bps_per_hz", "bit/s/Hz"),
    ("_snr", "linear"),
    ("_argmax", "flag"),
)


def column_manifest(columns: Sequence[str], kind: str) -> dict:
    """Plot-agnostic description of a CSV: column names, units and the x column."""
    entries = []
    for name in columns:
        if name == "status":
            unit = "enum"
        elif "alpha" in name:
            unit = "ratio"
        else:
            unit = next((u for suffix, u in _UNITS if name.endswith(suffix)), "")
        entries.append({"name": name, "unit": unit})
    return {"kind": kind, "x": columns[0], "columns": entries, "status_values": [s.value for s in Status]}


def write_outputs(csv_text: str, manifest: dict, out: Path) -> None:
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(csv_text)
    manifest_path = out.with_name(out.name + ".columns.json")
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
