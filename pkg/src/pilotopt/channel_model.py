"""Link budget: physical scenario parameters to linear-domain SNR quantities.

Everything downstream works in watts and linear ratios; dB and dBm only
appear here, at the configuration boundary.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised only on 3.10
    import tomli as tomllib


def path_loss_db(distance_m: float) -> float:
    """Average path loss ``30 + 40 log10(d)`` in dB for a distance in metres."""
    if not distance_m > 0:
        raise ConfigError(f"distance must be positive, got {distance_m!r}")
    return 30.0 + 40.0 * math.log10(distance_m)


def dbm_to_watt(p_dbm):
    """Convert dBm to watts (works element-wise on arrays)."""
    if np.ndim(p_dbm):
        return 10.0 ** ((np.asarray(p_dbm, dtype=float) - 30.0) / 10.0)
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watt_to_dbm(p_w):
    """Convert watts to dBm; power must be strictly positive."""
    arr = np.asarray(p_w, dtype=float)
    if np.any(~(arr > 0)):
        raise ConfigError(f"power must be positive to express in dBm, got {p_w!r}")
    if np.ndim(p_w):
        return 10.0 * np.log10(arr) + 30.0
    return 10.0 * math.log10(p_w) + 30.0


@dataclass(frozen=True)
class SystemConfig:
    """Global constants shared by every cooperating base station.

    ``dynamic_circuit_w_per_bps`` is the per-bit processing power, so 2 mW/Mbps
    is ``2e-9``.
    """

    bandwidth_hz: float
    noise_psd_dbm_per_hz: float
    coherence_symbols: int
    num_bs: int
    max_tx_power_dbm: float
    static_circuit_power_w: float = 0.0
    dynamic_circuit_w_per_bps: float = 0.0

    def __post_init__(self):
        if not (self.bandwidth_hz > 0 and math.isfinite(self.bandwidth_hz)):
            raise ConfigError(f"bandwidth_hz must be positive, got {self.bandwidth_hz!r}")
        if int(self.coherence_symbols) != self.coherence_symbols or self.coherence_symbols < 1:
            raise ConfigError(f"coherence_symbols must be an integer >= 1, got {self.coherence_symbols!r}")
        if int(self.num_bs) != self.num_bs or self.num_bs < 1:
            raise ConfigError(f"num_bs must be an integer >= 1, got {self.num_bs!r}")
        if not math.isfinite(self.noise_psd_dbm_per_hz) or not math.isfinite(self.max_tx_power_dbm):
            raise ConfigError("noise_psd_dbm_per_hz and max_tx_power_dbm must be finite")
        if self.static_circuit_power_w < 0 or self.dynamic_circuit_w_per_bps < 0:
            raise ConfigError("circuit power terms must be non-negative")
        object.__setattr__(self, "coherence_symbols", int(self.coherence_symbols))
        object.__setattr__(self, "num_bs", int(self.num_bs))
        if not noise_power_w(self) > 0:
            raise ConfigError("derived noise power underflows to zero")

    @property
    def max_tx_power_w(self) -> float:
        return dbm_to_watt(self.max_tx_power_dbm)


@dataclass(frozen=True)
class BsLink:
    """One cooperating base station: channel power gain and interference power."""

    channel_gain_linear: float
    interference_power_w: float = 0.0
    distance_m: float | None = None

    def __post_init__(self):
        if not (self.channel_gain_linear > 0 and math.isfinite(self.channel_gain_linear)):
            raise ConfigError(f"channel gain must be positive, got {self.channel_gain_linear!r}")
        if not (self.interference_power_w >= 0 and math.isfinite(self.interference_power_w)):
            raise ConfigError(f"interference power must be >= 0, got {self.interference_power_w!r}")
        if self.distance_m is not None and not self.distance_m > 0:
            raise ConfigError(f"distance must be positive, got {self.distance_m!r}")

    @classmethod
    def from_distance(cls, distance_m: float, interference_power_w: float = 0.0) -> "BsLink":
        gain = 10.0 ** (-path_loss_db(distance_m) / 10.0)
        return cls(gain, interference_power_w, distance_m)


@dataclass(frozen=True)
class Scenario:
    """A validated system configuration plus its ordered list of links."""

    config: SystemConfig
    links: tuple[BsLink, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        if len(self.links) != self.config.num_bs:
            raise ConfigError(
                f"scenario has {len(self.links)} links but num_bs={self.config.num_bs}"
            )

    @property
    def num_bs(self) -> int:
        return self.config.num_bs

    @property
    def noise_w(self) -> float:
        return noise_power_w(self.config)

    def snr_per_watt(self) -> np.ndarray:
        """Per-BS ``|h_m|^2 / (I_m + N)``, i.e. SNR_m at 1 W transmit power."""
        n = self.noise_w
        return np.array([l.channel_gain_linear / (l.interference_power_w + n) for l in self.links])

    def per_bs_snr(self, tx_power_w: float) -> np.ndarray:
        return np.array([per_bs_snr(tx_power_w, l, self.noise_w) for l in self.links])


def noise_power_w(config: SystemConfig) -> float:
    """Thermal noise power ``W * N0`` in watts."""
    return config.bandwidth_hz * dbm_to_watt(config.noise_psd_dbm_per_hz)


def per_bs_snr(tx_power_w: float, link: BsLink, noise_w: float) -> float:
    """Received SNR at one BS: ``P |h|^2 / (I + N)``."""
    return tx_power_w * link.channel_gain_linear / (link.interference_power_w + noise_w)


# Reference three-BS system; interference is unspecified and defaults to zero.
TABLE_ONE = dict(
    bandwidth_hz=10e6,
    noise_psd_dbm_per_hz=-174.0,
    coherence_symbols=1000,
    max_tx_power_dbm=46.0,
    static_circuit_power_w=0.05,
    dynamic_circuit_w_per_bps=2e-9,
)
TABLE_ONE_DISTANCES_M = (200.0, 250.0, 300.0)


def scenario_from_distances(
    distances_m: Sequence[float],
    interference_power_w: float | Sequence[float] = 0.0,
    **config_overrides,
) -> Scenario:
    """Build a scenario from UE-BS distances, defaulting unset constants to the reference system."""
    distances = list(distances_m)
    if np.ndim(interference_power_w) == 0:
        interference = [float(interference_power_w)] * len(distances)
    else:
        interference = [float(i) for i in interference_power_w]
    if len(interference) != len(distances):
        raise ConfigError("one interference value per distance is required")
    params = {**TABLE_ONE, **config_overrides, "num_bs": len(distances)}
    config = SystemConfig(**params)
    links = tuple(BsLink.from_distance(d, i) for d, i in zip(distances, interference))
    return Scenario(config, links)


def table_one_scenario(**config_overrides) -> Scenario:
    """The three-BS reference scenario (200/250/300 m, I_m = 0)."""
    return scenario_from_distances(TABLE_ONE_DISTANCES_M, **config_overrides)


def scenario_from_snr_per_watt(
    snr_per_watt: Iterable[float], coherence_symbols: int, **config_overrides
) -> Scenario:
    """Scenario whose links give the requested SNR_m per watt of transmit power.

    Interference is zero and each gain is scaled by the noise power, so
    ``scenario.per_bs_snr(P) == P * snr_per_watt``.  Handy for synthetic
    cases stated directly in the SNR domain.
    """
    g = [float(x) for x in snr_per_watt]
    params = {**TABLE_ONE, **config_overrides, "num_bs": len(g), "coherence_symbols": coherence_symbols}
    config = SystemConfig(**params)
    n = noise_power_w(config)
    return Scenario(config, tuple(BsLink(gi * n) for gi in g))


_CONFIG_KEYS = {
    "bandwidth_hz",
    "noise_psd_dbm_per_hz",
    "coherence_symbols",
    "max_tx_power_dbm",
    "static_circuit_power_w",
    "dynamic_circuit_w_per_bps",
}
_BS_KEYS = {"distance_m", "channel_gain_db", "interference_dbm"}


def scenario_from_dict(data: dict) -> Scenario:
    """Validate a parsed scenario document and build the :class:`Scenario`."""
    unknown = set(data) - _CONFIG_KEYS - {"bs", "num_bs"}
    if unknown:
        raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
    missing = _CONFIG_KEYS - set(data)
    if missing:
        raise ConfigError(f"missing scenario keys: {sorted(missing)}")
    blocks = data.get("bs")
    if not isinstance(blocks, list) or not blocks:
        raise ConfigError("scenario needs at least one [[bs]] block")
    if "num_bs" in data and data["num_bs"] != len(blocks):
        raise ConfigError(f"num_bs={data['num_bs']} but {len(blocks)} [[bs]] blocks given")

    links = []
    for i, block in enumerate(blocks, start=1):
        if not isinstance(block, dict):
            raise ConfigError(f"bs block {i} is not a table")
        extra = set(block) - _BS_KEYS
        if extra:
            raise ConfigError(f"bs block {i}: unknown keys {sorted(extra)}")
        has_d, has_g = "distance_m" in block, "channel_gain_db" in block
        if has_d == has_g:
            raise ConfigError(
                f"bs block {i}: exactly one of distance_m / channel_gain_db is required"
            )
        interference = dbm_to_watt(float(block["interference_dbm"])) if "interference_dbm" in block else 0.0
        try:
            if has_d:
                links.append(BsLink.from_distance(float(block["distance_m"]), interference))
            else:
                links.append(BsLink(10.0 ** (float(block["channel_gain_db"]) / 10.0), interference))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bs block {i}: {exc}") from exc

    try:
        config = SystemConfig(
            bandwidth_hz=float(data["bandwidth_hz"]),
            noise_psd_dbm_per_hz=float(data["noise_psd_dbm_per_hz"]),
            coherence_symbols=data["coherence_symbols"],
            num_bs=len(links),
            max_tx_power_dbm=float(data["max_tx_power_dbm"]),
            static_circuit_power_w=float(data["static_circuit_power_w"]),
            dynamic_circuit_w_per_bps=float(data["dynamic_circuit_w_per_bps"]),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    return Scenario(config, tuple(links))


def load_scenario(path: str | Path) -> Scenario:
    """Read a TOML scenario file (top-level constants plus repeated ``[[bs]]`` tables)."""
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed scenario {path}: {exc}") from exc
    return scenario_from_dict(data)
