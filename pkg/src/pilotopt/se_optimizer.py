"""Spectral-efficiency maximisation over the pilot ratios at fixed transmit power.

Setting the gradient of the combined SNR to zero gives, for every BS,
``SNR = a_m^2 L s_m + 2 a_m - 1``; its positive root expresses each optimal
ratio through the (unknown) optimal SNR.  Substituting back yields a scalar
fixed-point equation ``S = F(S)``, solved here by bisection (precise path)
or by a quadratic in ``sqrt(S + 1)`` that holds for large ``L s_m``
(approximate path).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .channel_model import Scenario
from .errors import ApproximationDomainError, ConfigError, InfeasibleError
from .link_metrics import (
    LinkState,
    PilotAllocation,
    capacity_bps,
    combined_snr_batch,
    stationarity_residuals,
)
from .roots import bisect

DEFAULT_TOL = 1e-10
MAX_ITER = 200


class Method(str, enum.Enum):
    PRECISE = "precise"
    APPROXIMATE = "approximate"
    SEARCH = "search"


@dataclass(frozen=True)
class SeSolution:
    method: Method
    optimal_snr: float
    capacity_bps: float
    allocation: PilotAllocation
    residuals: tuple[float, ...]
    iterations: int
    tx_power_w: float

    @property
    def spectral_efficiency(self) -> float:
        return math.log2(1.0 + self.optimal_snr)


def _alpha_kernel(target_snr, snrs, L):
    # (sqrt(1 + k(t+1)) - 1) / k rewritten to avoid cancellation when k is small
    k = np.multiply(L, snrs)
    t1 = np.add(target_snr, 1.0)
    return t1 / (np.sqrt(1.0 + k * t1) + 1.0)


def alpha_from_target_snr(target_snr, snr_m, L: int):
    """Pilot ratio at which BS ``m`` is stationary for a combined SNR ``target_snr``.

    Returns ``(sqrt(1 + L s_m (target + 1)) - 1) / (L s_m)``.  Works element-wise
    when ``snr_m`` is an array.  Raises :class:`InfeasibleError` if any ratio
    reaches 1, i.e. the interior optimum does not exist for that link.
    """
    if np.any(np.asarray(target_snr) < 0):
        raise ConfigError(f"target SNR must be non-negative, got {target_snr!r}")
    alpha = _alpha_kernel(target_snr, snr_m, L)
    if np.any(alpha >= 1.0):
        raise InfeasibleError(
            f"stationary pilot ratio {np.max(alpha):.6g} >= 1: target SNR {target_snr!r} "
            "is beyond what an interior allocation can support"
        )
    return float(alpha) if np.ndim(alpha) == 0 else alpha


def fixed_point_map(S, snrs, L: int):
    """Combined SNR obtained when every BS uses the ratio that is stationary for ``S``."""
    snrs = np.asarray(snrs, dtype=float)
    alphas = _alpha_kernel(np.asarray(S, dtype=float)[..., None], snrs, L)
    return combined_snr_batch(alphas, snrs, L)


def max_combined_snr(snrs, L: int, tol: float = DEFAULT_TOL) -> tuple[float, np.ndarray, int]:
    """Solve ``S = F(S)`` on ``[0, sum(s_m)]``; returns ``(S*, alphas*, iterations)``.

    ``F(0) > 0`` because every stationary ratio at ``S = 0`` lies in (0, 1/2),
    and ``F(S) < sum(s_m)`` always, so the bracket holds a sign change.
    """
    if not tol > 0:
        raise ConfigError(f"tol must be positive, got {tol!r}")
    snrs = np.asarray(snrs, dtype=float)
    result = bisect(
        lambda s: float(fixed_point_map(s, snrs, L)) - s,
        0.0,
        float(np.sum(snrs)),
        xtol=tol,
        ftol=tol,
        maxiter=MAX_ITER,
    )
    alphas = alpha_from_target_snr(result.root, snrs, L)
    return result.root, np.atleast_1d(alphas), result.iterations


def _check_power(scenario: Scenario, tx_power_w: float) -> None:
    p_max = scenario.config.max_tx_power_w
    if not tx_power_w > 0:
        raise ConfigError(f"transmit power must be positive, got {tx_power_w!r}")
    if tx_power_w > p_max * (1.0 + 1e-12):
        raise ConfigError(f"transmit power {tx_power_w:.6g} W exceeds P_max {p_max:.6g} W")


def _solution(method, scenario, tx_power_w, snr, capacity, alphas, iterations) -> SeSolution:
    state = LinkState.from_scenario(scenario, tx_power_w)
    alloc = PilotAllocation(tuple(alphas))
    residuals = tuple(float(r) for r in stationarity_residuals(alloc, state))
    return SeSolution(Method(method), float(snr), float(capacity), alloc, residuals, iterations, tx_power_w)


def solve_se_precise(scenario: Scenario, tx_power_w: float, tol: float = DEFAULT_TOL) -> SeSolution:
    """Maximal combined SNR at ``tx_power_w`` via bisection on the fixed-point equation."""
    _check_power(scenario, tx_power_w)
    snrs = scenario.per_bs_snr(tx_power_w)
    L = scenario.config.coherence_symbols
    snr, alphas, iterations = max_combined_snr(snrs, L, tol)
    return _solution(
        Method.PRECISE, scenario, tx_power_w, snr,
        capacity_bps(scenario.config.bandwidth_hz, snr), alphas, iterations,
    )


def se_approx_coefficients(snrs, L: int) -> tuple[float, float]:
    """Linear and constant coefficients of ``M x^2 + b x - c = 0`` with ``x = sqrt(S + 1)``."""
    snrs = np.asarray(snrs, dtype=float)
    b = float(np.sum(2.0 * snrs / np.sqrt(L * snrs)))
    c = float(np.sum((L * snrs + 2.0) / L + 1.0))
    return b, c


def approx_sqrt_snr_plus_one(snrs, L: int) -> float:
    snrs = np.asarray(snrs, dtype=float)
    M = snrs.size
    b, c = se_approx_coefficients(snrs, L)
    return (-b + math.sqrt(b * b + 4.0 * M * c)) / (2.0 * M)


def solve_se_approx(scenario: Scenario, tx_power_w: float) -> SeSolution:
    """Closed-form near-optimum valid when every ``L s_m`` is large.

    The capacity is reported as ``2 W log2(x)`` with ``x = sqrt(S* + 1)``.
    """
    _check_power(scenario, tx_power_w)
    snrs = scenario.per_bs_snr(tx_power_w)
    L = scenario.config.coherence_symbols
    x = approx_sqrt_snr_plus_one(snrs, L)
    if x <= 1.0:
        raise ApproximationDomainError(
            f"closed-form SNR is non-positive (sqrt(SNR+1) = {x:.6g}); use the precise solver"
        )
    snr = x * x - 1.0
    capacity = 2.0 * scenario.config.bandwidth_hz * math.log2(x)
    alphas = np.atleast_1d(alpha_from_target_snr(snr, snrs, L))
    return _solution(Method.APPROXIMATE, scenario, tx_power_w, snr, capacity, alphas, 0)
