"""Reference schemes the optimizers are compared against.

* Traditional scheme: one uniform pilot ratio at every BS, no optimisation.
* Stochastic search: a small seeded evolutionary algorithm over the ratio
  vector.  It shares no code path with the root-finding solvers beyond the
  objective itself, which makes it a useful independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel_model import Scenario
from .ee_optimizer import EeSolution
from .errors import ConfigError
from .link_metrics import (
    LinkState,
    PilotAllocation,
    capacity_bps,
    combined_snr_batch,
    energy_efficiency,
    snr_for_rate,
    stationarity_residuals,
)
from .roots import bisect, first_feasible
from .se_optimizer import DEFAULT_TOL, MAX_ITER, Method, SeSolution

# keeps offspring strictly inside (0, 1)
_EDGE = 1e-9


@dataclass(frozen=True)
class SearchBudget:
    population: int = 50
    generations: int = 100
    seed: int = 0
    mutation_scale: float = 0.05
    max_evaluations: int = 1_000_000

    def __post_init__(self):
        if self.population < 2:
            raise ConfigError("population must be >= 2")
        if self.generations < 1:
            raise ConfigError("generations must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if not self.mutation_scale > 0:
            raise ConfigError("mutation_scale must be positive")
        if self.population * self.generations > self.max_evaluations:
            raise ConfigError(
                f"budget of {self.population * self.generations} evaluations exceeds "
                f"the cap of {self.max_evaluations}"
            )


def traditional_scheme(scenario: Scenario, tx_power_w: float, alpha_uniform: float) -> float:
    """Combined SNR when every BS uses the same pilot ratio."""
    if not 0.0 <= alpha_uniform <= 1.0:
        raise ConfigError(f"alpha must lie in [0, 1], got {alpha_uniform!r}")
    snrs = scenario.per_bs_snr(tx_power_w)
    alphas = np.full(scenario.num_bs, float(alpha_uniform))
    return float(combined_snr_batch(alphas, snrs, scenario.config.coherence_symbols))


def _lowest_useful_power(scenario: Scenario, target_snr: float) -> float:
    # combined SNR < sum_m s_m for any ratios, so below this nothing can meet the target
    return target_snr / (float(np.sum(scenario.snr_per_watt())) * scenario.config.coherence_symbols)


def traditional_min_power(
    scenario: Scenario, target_rate_bps: float, alpha_uniform: float, tol: float = DEFAULT_TOL
) -> float | None:
    """Least power at which the uniform ratio meets ``target_rate_bps``.

    Returns ``None`` if the target is out of reach at the power limit.
    """
    cfg = scenario.config
    target = snr_for_rate(target_rate_bps, cfg.bandwidth_hz)
    p_max = cfg.max_tx_power_w
    p_lo = _lowest_useful_power(scenario, target)
    if not 0.0 < alpha_uniform < 1.0 or p_lo >= p_max:
        return None
    if traditional_scheme(scenario, p_max, alpha_uniform) < target:
        return None
    result = bisect(
        lambda p: traditional_scheme(scenario, p, alpha_uniform) - target,
        p_lo,
        p_max,
        xtol=tol,
        ftol=tol * target,
        maxiter=MAX_ITER,
        geometric=True,
    )
    return result.root


def evolve(snrs, L: int, budget: SearchBudget) -> tuple[np.ndarray, float]:
    """Maximise the combined SNR over the ratio vector; returns ``(best_alphas, best_snr)``.

    Binary tournament selection, uniform crossover, Gaussian mutation clipped
    to the open unit interval and (mu + lambda) elitist survival.
    """
    snrs = np.asarray(snrs, dtype=float)
    rng = np.random.default_rng(budget.seed)
    n, M = budget.population, snrs.size
    pop = rng.uniform(_EDGE, 1.0 - _EDGE, size=(n, M))
    fit = combined_snr_batch(pop, snrs, L)

    for _ in range(budget.generations - 1):
        a, b = rng.integers(0, n, size=(2, n))
        parents = pop[np.where(fit[a] >= fit[b], a, b)]
        mates = parents[rng.permutation(n)]
        children = np.where(rng.random((n, M)) < 0.5, parents, mates)
        children = children + rng.normal(0.0, budget.mutation_scale, size=(n, M))
        np.clip(children, _EDGE, 1.0 - _EDGE, out=children)
        child_fit = combined_snr_batch(children, snrs, L)

        merged = np.concatenate([pop, children])
        merged_fit = np.concatenate([fit, child_fit])
        keep = np.argsort(-merged_fit, kind="stable")[:n]
        pop, fit = merged[keep], merged_fit[keep]

    best = int(np.argmax(fit))
    return pop[best].copy(), float(fit[best])


def stochastic_search_se(scenario: Scenario, tx_power_w: float, budget: SearchBudget = SearchBudget()) -> SeSolution:
    """Best combined SNR the evolutionary search finds at ``tx_power_w``."""
    snrs = scenario.per_bs_snr(tx_power_w)
    alphas, snr = evolve(snrs, scenario.config.coherence_symbols, budget)
    alloc = PilotAllocation(tuple(alphas))
    residuals = stationarity_residuals(alloc, LinkState.from_scenario(scenario, tx_power_w))
    return SeSolution(
        Method.SEARCH,
        snr,
        capacity_bps(scenario.config.bandwidth_hz, snr),
        alloc,
        tuple(float(r) for r in residuals),
        budget.generations,
        tx_power_w,
    )


def stochastic_search_ee(
    scenario: Scenario,
    target_rate_bps: float,
    budget: SearchBudget = SearchBudget(),
    rtol: float = 1e-6,
) -> EeSolution:
    """Least power at which the evolutionary search reaches the rate target.

    Outer geometric bisection over ``P``; every feasibility test reruns the
    search with the same seed, so the result is reproducible.
    """
    if not (target_rate_bps > 0 and math.isfinite(target_rate_bps)):
        raise ConfigError(f"target rate must be positive and finite, got {target_rate_bps!r}")
    cfg = scenario.config
    target = snr_for_rate(target_rate_bps, cfg.bandwidth_hz)
    p_max = cfg.max_tx_power_w
    p_lo = _lowest_useful_power(scenario, target)

    def search(p):
        return stochastic_search_se(scenario, p, budget)

    if p_lo >= p_max or search(p_max).optimal_snr < target:
        best = search(p_max)
        return EeSolution(
            method=Method.SEARCH,
            min_tx_power_w=p_max,
            allocation=best.allocation,
            achieved_snr=best.optimal_snr,
            energy_efficiency_bit_per_joule=energy_efficiency(best.capacity_bps, p_max, cfg),
            target_rate_bps=target_rate_bps,
            feasible=False,
            iterations=0,
            achievable_rate_bps=best.capacity_bps,
        )

    power, iterations = first_feasible(lambda p: search(p).optimal_snr >= target, p_lo, p_max, rtol)
    best = search(power)
    return EeSolution(
        method=Method.SEARCH,
        min_tx_power_w=power,
        allocation=best.allocation,
        achieved_snr=best.optimal_snr,
        energy_efficiency_bit_per_joule=energy_efficiency(target_rate_bps, power, cfg),
        target_rate_bps=target_rate_bps,
        feasible=True,
        iterations=iterations,
        achievable_rate_bps=best.capacity_bps,
    )
