"""Noise models: AWGN with SNR bookkeeping and explicit discrete channels.

SNR convention (fixed here, used everywhere): signals carry unit average
power per real symbol, so SNR in dB maps to the noise standard deviation as
sigma = 10^(-snr_db/20).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


def snr_db_to_sigma(snr_db: float) -> float:
    """Noise standard deviation for a given SNR in dB at unit signal power."""
    return float(10.0 ** (-snr_db / 20.0))


def uncoded_bpsk_ber(snr_db: float) -> float:
    """Q(1/sigma): bit error rate of uncoded +/-1 signaling at this SNR."""
    from math import erfc, sqrt

    sigma = snr_db_to_sigma(snr_db)
    return 0.5 * erfc(1.0 / (sigma * sqrt(2.0)))


@dataclass(frozen=True)
class AwgnChannel:
    """Additive white Gaussian noise with per-symbol standard deviation sigma."""

    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @classmethod
    def from_snr_db(cls, snr_db: float) -> "AwgnChannel":
        return cls(snr_db_to_sigma(snr_db))


def awgn_transmit(symbols: np.ndarray, ch: AwgnChannel, rng: np.random.Generator) -> np.ndarray:
    """symbols + sigma * g with g i.i.d. standard normal from rng."""
    symbols = np.asarray(symbols, dtype=np.float64)
    return symbols + ch.sigma * rng.standard_normal(symbols.shape)


@dataclass(frozen=True)
class DiscreteChannel:
    """Memoryless channel given by transition[i][j] = P(Y = i | X = j).

    Rows index outputs, columns index inputs; columns must sum to 1.
    ``atol`` loosens the stochasticity check for fixtures quoted from
    published tables that do not sum exactly to 1.
    """

    transition: np.ndarray
    atol: float = field(default=1e-12)

    def __post_init__(self):
        t = np.asarray(self.transition, dtype=np.float64)
        if t.ndim != 2:
            raise ValueError("transition must be a matrix")
        if np.any(t < 0):
            raise ValueError("transition probabilities must be non-negative")
        sums = t.sum(axis=0)
        if np.any(np.abs(sums - 1.0) > self.atol):
            raise ValueError(f"columns must sum to 1 (+-{self.atol}); got {sums}")
        object.__setattr__(self, "transition", t)
        self.transition.setflags(write=False)

    @property
    def num_outputs(self) -> int:
        return self.transition.shape[0]

    @property
    def num_inputs(self) -> int:
        return self.transition.shape[1]

    @classmethod
    def from_json_dict(cls, d: dict, atol: float = 1e-12) -> "DiscreteChannel":
        return cls(np.asarray(d["transition"], dtype=np.float64), atol=atol)

    @classmethod
    def from_json_file(cls, path, atol: float = 1e-12) -> "DiscreteChannel":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh), atol=atol)

    def to_json_dict(self) -> dict:
        return {"transition": self.transition.tolist()}


def discrete_transmit(symbol_index: int, ch: DiscreteChannel, rng: np.random.Generator) -> int:
    """Sample the channel output for one input symbol (0-based index)."""
    if not 0 <= symbol_index < ch.num_inputs:
        raise ValueError(f"symbol index {symbol_index} out of range [0, {ch.num_inputs})")
    col = ch.transition[:, symbol_index]
    # Guard against columns that sum to slightly less than 1 (loose atol).
    p = col / col.sum()
    return int(rng.choice(ch.num_outputs, p=p))
