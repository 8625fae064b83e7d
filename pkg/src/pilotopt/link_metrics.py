"""Estimation-error model and the combined SNR / capacity / efficiency formulas.

The combined SNR of non-coherent joint reception with imperfect channel
estimation is::

    SNR = sum_m (1 - a_m) s_m (a_m L s_m) / (1 + a_m L s_m)
          ---------------------------------------------------
              sum_m s_m / (1 + a_m L s_m)  +  M

where ``s_m`` is the per-BS SNR, ``a_m`` the pilot ratio and ``L`` the
coherence length in symbols.  Both optimizers and every baseline evaluate
exactly this expression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel_model import Scenario, SystemConfig
from .errors import ContractError


@dataclass(frozen=True)
class PilotAllocation:
    """Per-BS pilot ratios, each in ``[0, 1]``."""

    ratios: tuple[float, ...]

    def __post_init__(self):
        ratios = tuple(float(a) for a in np.atleast_1d(self.ratios))
        if not ratios:
            raise ContractError("allocation needs at least one ratio")
        if any(not (0.0 <= a <= 1.0) for a in ratios):
            raise ContractError(f"pilot ratios must lie in [0, 1], got {ratios}")
        object.__setattr__(self, "ratios", ratios)

    def __len__(self) -> int:
        return len(self.ratios)

    def as_array(self) -> np.ndarray:
        return np.array(self.ratios)

    @classmethod
    def uniform(cls, alpha: float, num_bs: int) -> "PilotAllocation":
        return cls((alpha,) * num_bs)


@dataclass(frozen=True)
class LinkState:
    """Per-BS SNRs at a given transmit power plus ``L`` and ``M``."""

    per_bs_snr: tuple[float, ...]
    coherence_symbols: int
    num_bs: int

    def __post_init__(self):
        snr = tuple(float(s) for s in np.atleast_1d(self.per_bs_snr))
        if len(snr) != self.num_bs:
            raise ContractError(f"expected {self.num_bs} SNR values, got {len(snr)}")
        if any(not s > 0 for s in snr):
            raise ContractError(f"per-BS SNR values must be positive, got {snr}")
        if self.coherence_symbols < 1:
            raise ContractError("coherence_symbols must be >= 1")
        object.__setattr__(self, "per_bs_snr", snr)

    @classmethod
    def from_scenario(cls, scenario: Scenario, tx_power_w: float) -> "LinkState":
        return cls(
            tuple(scenario.per_bs_snr(tx_power_w)),
            scenario.config.coherence_symbols,
            scenario.num_bs,
        )

    def snr_array(self) -> np.ndarray:
        return np.array(self.per_bs_snr)


def mmse_error(alpha, L: int, snr_m):
    """Normalised MMSE of the channel estimate, ``1 / (1 + a L s)``."""
    return 1.0 / (1.0 + np.multiply(alpha, L) * snr_m)


def combined_snr_batch(alphas, snrs, L: int) -> np.ndarray:
    """Vectorised combined SNR.

    ``alphas`` has shape ``(..., M)`` and ``snrs`` shape ``(M,)`` (or anything
    broadcastable against it).  Returns an array of shape ``alphas.shape[:-1]``.
    """
    alphas = np.asarray(alphas, dtype=float)
    snrs = np.asarray(snrs, dtype=float)
    num_bs = snrs.shape[-1]
    u = alphas * L * snrs
    est = 1.0 + u
    numerator = np.sum((1.0 - alphas) * snrs * u / est, axis=-1)
    denominator = np.sum(snrs / est, axis=-1) + num_bs
    return numerator / denominator


def combined_snr(alloc: PilotAllocation, state: LinkState) -> float:
    """Combined post-estimation SNR of the jointly received signal."""
    if len(alloc) != state.num_bs:
        raise ContractError(
            f"allocation has {len(alloc)} ratios but the link state has {state.num_bs} BSs"
        )
    return float(combined_snr_batch(alloc.as_array(), state.snr_array(), state.coherence_symbols))


def capacity_bps(bandwidth_hz: float, snr) -> float:
    """Shannon rate ``W log2(1 + SNR)`` in bit/s."""
    rate = bandwidth_hz * np.log2(1.0 + np.asarray(snr, dtype=float))
    return float(rate) if rate.ndim == 0 else rate


def spectral_efficiency(snr) -> float:
    """``log2(1 + SNR)`` in bit/s/Hz."""
    return capacity_bps(1.0, snr)


def snr_for_rate(rate_bps: float, bandwidth_hz: float) -> float:
    """SNR that exactly supports ``rate_bps``: ``2^(R/W) - 1``."""
    return math.expm1(math.log(2.0) * rate_bps / bandwidth_hz)


def energy_efficiency(rate_bps: float, tx_power_w: float, config: SystemConfig) -> float:
    """Bits per joule: rate over transmit plus static and rate-proportional circuit power."""
    total = tx_power_w + config.dynamic_circuit_w_per_bps * rate_bps + config.static_circuit_power_w
    return rate_bps / total


def stationarity_rhs(alphas: Sequence[float] | np.ndarray, snrs, L: int) -> np.ndarray:
    """Per-BS value ``a^2 L s + 2a - 1`` that the optimal combined SNR must equal."""
    a = np.asarray(alphas, dtype=float)
    return a * a * L * np.asarray(snrs, dtype=float) + 2.0 * a - 1.0


def stationarity_residuals(alloc: PilotAllocation, state: LinkState) -> np.ndarray:
    """``combined_snr - (a_m^2 L s_m + 2 a_m - 1)`` for every BS.

    All entries vanish at an interior stationary point of the combined SNR.
    """
    snr = combined_snr(alloc, state)
    return snr - stationarity_rhs(alloc.ratios, state.per_bs_snr, state.coherence_symbols)
