"""Energy-efficiency maximisation: least transmit power meeting a rate target.

With the rate target fixed, the circuit terms of the efficiency are constant,
so the problem reduces to minimising transmit power subject to
``SNR >= 2^(R/W) - 1``.  The constraint binds at the optimum, and the same
per-BS stationarity condition as in the SE problem applies with the combined
SNR pinned to the target.  What remains is a scalar equation in ``P``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel_model import Scenario
from .errors import ApproximationDomainError, ConfigError
from .link_metrics import (
    LinkState,
    PilotAllocation,
    capacity_bps,
    combined_snr,
    combined_snr_batch,
    energy_efficiency,
    snr_for_rate,
)
from .roots import bisect
from .se_optimizer import DEFAULT_TOL, MAX_ITER, Method, _alpha_kernel, alpha_from_target_snr, solve_se_precise


@dataclass(frozen=True)
class EeSolution:
    """Result of the power-minimisation problem.

    When ``feasible`` is false the target cannot be met within the power
    limit; ``min_tx_power_w`` is then the limit itself and the remaining
    fields describe the best operating point there (``achievable_rate_bps``
    is the highest rate reachable).
    """

    method: Method
    min_tx_power_w: float
    allocation: PilotAllocation
    achieved_snr: float
    energy_efficiency_bit_per_joule: float
    target_rate_bps: float
    feasible: bool = True
    iterations: int = 0
    achievable_rate_bps: float = math.nan


def alpha_for_rate(target_rate_bps: float, bandwidth_hz: float, snr_m, L: int):
    """Stationary pilot ratio for a rate target: ``(sqrt(1 + L s 2^(R/W)) - 1) / (L s)``.

    Identical to :func:`alpha_from_target_snr` with target ``2^(R/W) - 1``.
    """
    if not target_rate_bps > 0:
        raise ConfigError(f"target rate must be positive, got {target_rate_bps!r}")
    return alpha_from_target_snr(snr_for_rate(target_rate_bps, bandwidth_hz), snr_m, L)


def rate_gap(tx_power_w, snr_per_watt, L: int, target_snr: float):
    """Combined SNR at power ``P`` with rate-stationary ratios, minus the target."""
    snrs = np.asarray(tx_power_w, dtype=float)[..., None] * np.asarray(snr_per_watt, dtype=float)
    alphas = _alpha_kernel(target_snr, snrs, L)
    return combined_snr_batch(alphas, snrs, L) - target_snr


def _check_rate(target_rate_bps: float) -> None:
    if not (target_rate_bps > 0 and math.isfinite(target_rate_bps)):
        raise ConfigError(f"target rate must be positive and finite, got {target_rate_bps!r}")


def _infeasible_at_limit(scenario: Scenario, target_rate_bps: float, method: Method, tol: float) -> EeSolution:
    p_max = scenario.config.max_tx_power_w
    best = solve_se_precise(scenario, p_max, tol)
    return EeSolution(
        method=method,
        min_tx_power_w=p_max,
        allocation=best.allocation,
        achieved_snr=best.optimal_snr,
        energy_efficiency_bit_per_joule=energy_efficiency(best.capacity_bps, p_max, scenario.config),
        target_rate_bps=target_rate_bps,
        feasible=False,
        iterations=best.iterations,
        achievable_rate_bps=best.capacity_bps,
    )


def _finish(scenario, target_rate_bps, method, power, iterations, feasible=True) -> EeSolution:
    cfg = scenario.config
    snrs = scenario.per_bs_snr(power)
    alphas = np.atleast_1d(alpha_for_rate(target_rate_bps, cfg.bandwidth_hz, snrs, cfg.coherence_symbols))
    alloc = PilotAllocation(tuple(alphas))
    achieved = combined_snr(alloc, LinkState.from_scenario(scenario, power))
    return EeSolution(
        method=method,
        min_tx_power_w=float(power),
        allocation=alloc,
        achieved_snr=achieved,
        energy_efficiency_bit_per_joule=energy_efficiency(target_rate_bps, power, cfg),
        target_rate_bps=target_rate_bps,
        feasible=feasible,
        iterations=iterations,
        achievable_rate_bps=capacity_bps(cfg.bandwidth_hz, achieved),
    )


def solve_ee_precise(scenario: Scenario, target_rate_bps: float, tol: float = DEFAULT_TOL) -> EeSolution:
    """Minimal transmit power for ``target_rate_bps`` by bisection over ``P``.

    The lower bracket end ``(T - 1) / (L sum g_m)`` can never meet the target;
    the upper end is the configured power limit.  If the limit itself falls
    short, an infeasible solution evaluated at the limit is returned.
    """
    _check_rate(target_rate_bps)
    if not tol > 0:
        raise ConfigError(f"tol must be positive, got {tol!r}")
    cfg = scenario.config
    L = cfg.coherence_symbols
    target = snr_for_rate(target_rate_bps, cfg.bandwidth_hz)
    g = scenario.snr_per_watt()
    p_lo = target / (float(np.sum(g)) * L)
    p_max = cfg.max_tx_power_w
    if p_lo >= p_max or float(rate_gap(p_max, g, L, target)) < 0:
        return _infeasible_at_limit(scenario, target_rate_bps, Method.PRECISE, tol)

    result = bisect(
        lambda p: float(rate_gap(p, g, L, target)),
        p_lo,
        p_max,
        xtol=tol,
        ftol=tol * target,
        maxiter=MAX_ITER,
        geometric=True,
    )
    return _finish(scenario, target_rate_bps, Method.PRECISE, result.root, result.iterations)


def ee_approx_coefficients(snr_per_watt, L: int, target_rate_bps: float, bandwidth_hz: float) -> tuple[float, float]:
    """``(b, c)`` of ``P sum(g) - b sqrt(P) - c = 0``."""
    g = np.asarray(snr_per_watt, dtype=float)
    M = g.size
    two_pow = 2.0 ** (target_rate_bps / bandwidth_hz)
    b = float(np.sum(2.0 * np.sqrt(g * two_pow) / math.sqrt(L)))
    c = M * (two_pow - 1.0) - 2.0 * M / L
    return b, c


def solve_ee_approx(scenario: Scenario, target_rate_bps: float) -> EeSolution:
    """Closed-form near-minimal power, valid when every ``L s_m 2^(R/W)`` is large."""
    _check_rate(target_rate_bps)
    cfg = scenario.config
    g = scenario.snr_per_watt()
    b, c = ee_approx_coefficients(g, cfg.coherence_symbols, target_rate_bps, cfg.bandwidth_hz)
    if c <= 0:
        raise ApproximationDomainError(
            f"rate target too small for the closed form (c = {c:.6g} <= 0); use the precise solver"
        )
    sg = float(np.sum(g))
    root = (b + math.sqrt(b * b + 4.0 * c * sg)) / (2.0 * sg)
    power = root * root
    return _finish(
        scenario, target_rate_bps, Method.APPROXIMATE, power, 0,
        feasible=power <= cfg.max_tx_power_w,
    )

