"""Loss probes along lines between Fourier-parameterized encoder triples.

An encoder triple is given by the three Fourier coefficient vectors of its
window-5 generating functions, each constrained to unit 2-norm (unit average
output power per stream, by Parseval).  The decoding loss of a triple is the
mean binary cross-entropy of six-iteration turbo decoding over an AWGN
channel at a given SNR.

Line probes evaluate the loss at mixtures lam*B + (1-lam)*A (renormalizing
each block) with common random numbers: every grid point sees the identical
inputs and noise, drawn once from the probe seed, so differences along the
line are not swamped by Monte Carlo variance.  The stream derivation is
substream(seed, 0) for the interleaver and substream(seed, 1) for the
samples (inputs first, then noise).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._rng import substream
from .boolfn import FourierSpectrum, PseudoBooleanTable, SubsetMask, wht_forward, wht_inverse
from .channel import snr_db_to_sigma
from .codec import Interleaver, TurboEncoderParams, encode_batch, turbo_decode_batch
from .metrics import CLAMP_EPS

THETA_ARITY = 5
NORM_TOL = 1e-9


@dataclass(frozen=True)
class ThetaTriple:
    """Three unit-norm coefficient vectors, one per encoder stream."""

    spectra: tuple[FourierSpectrum, FourierSpectrum, FourierSpectrum]

    def __post_init__(self):
        if len(self.spectra) != 3:
            raise ValueError("a triple has exactly three spectra")
        for s in self.spectra:
            if s.arity != THETA_ARITY:
                raise ValueError(f"spectra must have arity {THETA_ARITY}")
            if abs(np.linalg.norm(s.coeffs) - 1.0) > NORM_TOL:
                raise ValueError("each block must be normalized to unit 2-norm")

    def coeff_matrix(self) -> np.ndarray:
        return np.stack([s.coeffs for s in self.spectra])

    @classmethod
    def from_raw(cls, rows: np.ndarray) -> "ThetaTriple":
        """Normalize three raw coefficient rows into a triple."""
        rows = np.asarray(rows, dtype=np.float64)
        norms = np.linalg.norm(rows, axis=1)
        if np.any(norms < 1e-12):
            raise ValueError("cannot normalize a zero coefficient block")
        rows = rows / norms[:, None]
        return cls(tuple(FourierSpectrum(THETA_ARITY, r) for r in rows))

    def encoder(self) -> TurboEncoderParams:
        tables = tuple(wht_inverse(s) for s in self.spectra)
        return TurboEncoderParams(THETA_ARITY, tables)


def parity_triple(masks: Sequence[SubsetMask]) -> ThetaTriple:
    """The triple whose blocks are the pure parities of the given masks."""
    if len(masks) != 3:
        raise ValueError("need three masks")
    rows = np.zeros((3, 1 << THETA_ARITY))
    for b, m in enumerate(masks):
        if not 0 <= m < (1 << THETA_ARITY):
            raise ValueError(f"mask {m} out of range for arity {THETA_ARITY}")
        rows[b, m] = 1.0
    return ThetaTriple.from_raw(rows)


def _table_on_subset(values4: np.ndarray, vars_: Sequence[int]) -> PseudoBooleanTable:
    """Lift a 4-variable table onto the given (1-based) variables of 5."""
    idx5 = np.arange(1 << THETA_ARITY)
    idx4 = np.zeros_like(idx5)
    for j, v in enumerate(vars_):
        idx4 |= ((idx5 >> (v - 1)) & 1) << j
    return PseudoBooleanTable(THETA_ARITY, values4[idx4])


def bent_triple() -> ThetaTriple:
    """Three copies of the 4-variable bent function on different subsets of 5.

    Each block has sixteen coefficients of magnitude 1/4 (as far from any
    single parity as a +/-1 function can be), already unit norm.
    """
    from .boolfn import bent_table

    vals = bent_table(4).values
    subsets = ((1, 2, 3, 4), (2, 3, 4, 5), (1, 2, 4, 5))
    spectra = tuple(wht_forward(_table_on_subset(vals, sub)) for sub in subsets)
    return ThetaTriple(spectra)


def bent_triple_on(subsets: Sequence[Sequence[int]]) -> ThetaTriple:
    """Bent-function triple on caller-chosen variable subsets."""
    from .boolfn import bent_table

    vals = bent_table(4).values
    spectra = tuple(wht_forward(_table_on_subset(vals, sub)) for sub in subsets)
    return ThetaTriple(spectra)


def mix_thetas(a: ThetaTriple, b: ThetaTriple, lam: float) -> ThetaTriple | None:
    """lam*b + (1-lam)*a with per-block renormalization.

    Returns None when some block cancels to zero norm (antipodal endpoints
    at the midpoint) -- the caller flags that grid point as degenerate.
    """
    rows = lam * b.coeff_matrix() + (1.0 - lam) * a.coeff_matrix()
    if np.any(np.linalg.norm(rows, axis=1) < 1e-12):
        return None
    return ThetaTriple.from_raw(rows)


def _per_block_losses(
    theta: ThetaTriple,
    inputs: np.ndarray,
    noise: np.ndarray,
    interleaver: Interleaver,
    sigma: float,
    iterations: int = 6,
) -> np.ndarray:
    params = theta.encoder()
    x = encode_batch(params, inputs, interleaver)
    y = x + sigma * noise
    probs = turbo_decode_batch(params, interleaver, y, sigma, iterations)
    p = np.clip(probs, CLAMP_EPS, 1.0 - CLAMP_EPS)
    u = inputs.astype(np.float64)
    return np.mean(-u * np.log2(p) - (1 - u) * np.log2(1 - p), axis=1)


def _loss_given_samples(
    theta: ThetaTriple,
    inputs: np.ndarray,
    noise: np.ndarray,
    interleaver: Interleaver,
    sigma: float,
    iterations: int = 6,
) -> tuple[float, float]:
    per_block = _per_block_losses(theta, inputs, noise, interleaver, sigma, iterations)
    n = per_block.size
    return float(per_block.mean()), float(per_block.std(ddof=1) / np.sqrt(n))


def loss_of_theta(
    theta: ThetaTriple,
    k: int = 10,
    snr_db: float = 1.0,
    blocks: int = 2000,
    interleaver: Interleaver | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[float, float]:
    """Monte Carlo decoding loss of one triple; returns (mean BCE, std error).

    Inputs are drawn from ``rng`` first, then the noise, so two calls with
    identically seeded generators see identical samples.
    """
    if blocks < 1:
        raise ValueError("blocks must be >= 1")
    if rng is None:
        rng = np.random.default_rng(0)
    if interleaver is None:
        interleaver = Interleaver.identity(k)
    sigma = snr_db_to_sigma(snr_db)
    inputs = rng.integers(0, 2, size=(blocks, k))
    noise = rng.standard_normal((blocks, 3, k))
    return _loss_given_samples(theta, inputs, noise, interleaver, sigma)


@dataclass(frozen=True)
class LineProbeResult:
    lambdas: np.ndarray
    losses: np.ndarray
    std_errors: np.ndarray
    degenerate: np.ndarray
    seed: int
    interleaver: Interleaver
    per_block: np.ndarray | None = None  # (len(lambdas), blocks) when kept

    def to_csv(self) -> str:
        lines = ["lambda,loss,std_error,degenerate_flag"]
        for lam, loss, se, deg in zip(self.lambdas, self.losses, self.std_errors, self.degenerate):
            lines.append(f"{lam!r},{loss!r},{se!r},{int(deg)}")
        return "\n".join(lines) + "\n"

    def paired_margin(self, i: int, j: int) -> tuple[float, float]:
        """Mean and standard error of loss(lambda_i) - loss(lambda_j).

        Uses the common-random-number pairing: both grid points saw the same
        blocks, so the difference is estimated per block and its standard
        error pools the per-block differences (far tighter than combining
        the two marginal errors).
        """
        if self.per_block is None:
            raise ValueError("probe was run without keep_per_block")
        d = self.per_block[i] - self.per_block[j]
        return float(d.mean()), float(d.std(ddof=1) / np.sqrt(d.size))


def default_grid(points: int = 21) -> np.ndarray:
    return np.linspace(0.0, 1.0, points)


def line_probe(
    theta_a: ThetaTriple,
    theta_b: ThetaTriple,
    lambdas: Sequence[float],
    k: int = 10,
    snr_db: float = 1.0,
    blocks: int = 2000,
    seed: int = 0,
    interleaver: Interleaver | None = None,
    keep_per_block: bool = False,
) -> LineProbeResult:
    """Loss along the renormalized line between two triples, common random numbers.

    lam = 0 is theta_a, lam = 1 is theta_b; the grid must contain both
    endpoints.  All grid points share the same seed-derived interleaver,
    inputs, and noise, so the probe at lam=0 reproduces
    loss_of_theta(theta_a, ..., rng=substream(seed, 1)) bitwise.
    """
    lambdas = np.asarray(list(lambdas), dtype=np.float64)
    if not (np.any(lambdas == 0.0) and np.any(lambdas == 1.0)):
        raise ValueError("grid must contain both endpoints 0 and 1")
    if interleaver is None:
        interleaver = Interleaver.random(k, substream(seed, 0))
    sigma = snr_db_to_sigma(snr_db)
    sample_rng = substream(seed, 1)
    inputs = sample_rng.integers(0, 2, size=(blocks, k))
    noise = sample_rng.standard_normal((blocks, 3, k))
    losses = np.full(lambdas.size, np.nan)
    errors = np.full(lambdas.size, np.nan)
    degenerate = np.zeros(lambdas.size, dtype=bool)
    per_block = np.full((lambdas.size, blocks), np.nan) if keep_per_block else None
    for i, lam in enumerate(lambdas):
        mixed = mix_thetas(theta_a, theta_b, float(lam))
        if mixed is None:
            degenerate[i] = True
            continue
        pb = _per_block_losses(mixed, inputs, noise, interleaver, sigma)
        losses[i] = pb.mean()
        errors[i] = pb.std(ddof=1) / np.sqrt(blocks)
        if per_block is not None:
            per_block[i] = pb
    return LineProbeResult(lambdas, losses, errors, degenerate, seed, interleaver, per_block)
