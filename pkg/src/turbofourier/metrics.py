"""Binary cross-entropy, bit error rate, and the relations between them.

All logarithms are base 2, so the uninformative posterior 1/2 costs exactly
one bit and the binary entropy of 1/2 is 1.  Posteriors are clamped to
[CLAMP_EPS, 1 - CLAMP_EPS] before any log, and 0*lg(0) is 0.

Hard decisions follow the convention that a posterior <= 1/2 decides bit 0,
so a posterior of exactly 1/2 errs exactly on the 1-bits.

With an exact (soft-MAP) decoder the expected BCE equals the average
per-bit conditional entropy of the input given the channel output, which is
bounded two-sidedly by the bit error rate:

    2*B <= C <= H2(B)

and both sides are achievable (see tight_upper_channel / tight_lower_channel).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .channel import AwgnChannel, DiscreteChannel

CLAMP_EPS = 1e-12
_LG = np.log2


def _clamp(p: np.ndarray) -> np.ndarray:
    return np.clip(p, CLAMP_EPS, 1.0 - CLAMP_EPS)


def binary_entropy(p) -> np.ndarray | float:
    """H2(p) = -p lg p - (1-p) lg(1-p), with H2(0) = H2(1) = 0."""
    p = np.asarray(p, dtype=np.float64)
    out = np.zeros_like(p)
    inner = (p > 0) & (p < 1)
    q = p[inner]
    out[inner] = -q * _LG(q) - (1 - q) * _LG(1 - q)
    return float(out) if out.ndim == 0 else out


def bce(true_bits: np.ndarray, posteriors: np.ndarray) -> float:
    """Mean base-2 binary cross-entropy of P(bit=1) posteriors against truth."""
    u = np.asarray(true_bits, dtype=np.float64)
    p = np.asarray(posteriors, dtype=np.float64)
    if u.shape != p.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {p.shape}")
    p = _clamp(p)
    return float(np.mean(-u * _LG(p) - (1 - u) * _LG(1 - p)))


def ber(true_bits: np.ndarray, posteriors: np.ndarray) -> float:
    """Fraction of hard decisions (posterior > 1/2 decides 1) that are wrong."""
    u = np.asarray(true_bits)
    p = np.asarray(posteriors, dtype=np.float64)
    if u.shape != p.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {p.shape}")
    decided = (p > 0.5).astype(np.int64)
    return float(np.mean(decided != np.asarray(u, dtype=np.int64)))


@dataclass(frozen=True)
class LossReport:
    """Scalar and per-bit BCE/BER over a batch of decoded blocks."""

    bce: float
    ber: float
    per_bit_bce: np.ndarray
    per_bit_ber: np.ndarray
    blocks_evaluated: int
    std_error: float


def loss_report(true_bits: np.ndarray, posteriors: np.ndarray) -> LossReport:
    """Aggregate BCE/BER over blocks of shape (num_blocks, k)."""
    u = np.asarray(true_bits, dtype=np.float64)
    p = _clamp(np.asarray(posteriors, dtype=np.float64))
    if u.ndim != 2 or u.shape != p.shape:
        raise ValueError("expected matching (blocks, k) arrays")
    bce_mat = -u * _LG(p) - (1 - u) * _LG(1 - p)
    ber_mat = ((p > 0.5).astype(np.int64) != u.astype(np.int64)).astype(np.float64)
    per_block = bce_mat.mean(axis=1)
    n = u.shape[0]
    se = float(per_block.std(ddof=1) / np.sqrt(n)) if n > 1 else float("inf")
    return LossReport(
        bce=float(bce_mat.mean()),
        ber=float(ber_mat.mean()),
        per_bit_bce=bce_mat.mean(axis=0),
        per_bit_ber=ber_mat.mean(axis=0),
        blocks_evaluated=n,
        std_error=se,
    )


@dataclass(frozen=True)
class SmallEncoder:
    """Exhaustive encoder on k input bits.

    ``codebook`` has one row (or entry) per input, indexed by the
    little-endian packing of the input bits: an integer array of 0-based
    channel symbols for discrete channels, or a (2^k, n) float array of real
    output vectors for the AWGN channel.
    """

    k: int
    codebook: np.ndarray

    def __post_init__(self):
        cb = np.asarray(self.codebook)
        if cb.shape[0] != 1 << self.k:
            raise ValueError(f"codebook must have 2**{self.k} rows")
        object.__setattr__(self, "codebook", cb)


def _xlgx(v: np.ndarray) -> np.ndarray:
    out = np.zeros_like(v)
    pos = v > 0
    out[pos] = v[pos] * _LG(v[pos])
    return out


def exact_discrete_bce_ber(f: SmallEncoder, ch: DiscreteChannel) -> tuple[float, float]:
    """Closed-form soft-MAP BCE and BER of a one-bit encoder on a discrete channel.

    With a = P(Y=i|X=f(1)) and b = P(Y=i|X=f(0)) column vectors:
        B = 1/2 sum_i min(a_i, b_i)
        C = -1/2 sum_i [a lg a + b lg b - (a+b) lg(a+b)]
    """
    if f.k != 1:
        raise ValueError("exact evaluation is defined for single-bit encoders")
    cb = f.codebook.astype(np.int64)
    a = ch.transition[:, cb[1]]
    b = ch.transition[:, cb[0]]
    ber_val = 0.5 * float(np.minimum(a, b).sum())
    bce_val = -0.5 * float((_xlgx(a) + _xlgx(b) - _xlgx(a + b)).sum())
    return bce_val, ber_val


def check_two_sided_bound(bce_i: float, ber_i: float, tol: float) -> bool:
    """2*B - tol <= C <= H2(B) + tol."""
    if not 0.0 <= ber_i <= 0.5:
        raise ValueError("ber must lie in [0, 0.5]")
    return (2.0 * ber_i - tol <= bce_i) and (bce_i <= binary_entropy(ber_i) + tol)


def tight_upper_channel(t: float) -> tuple[SmallEncoder, DiscreteChannel]:
    """Identity encoder on the 2x2 channel [[t, 1-t], [1-t, t]]: C = H2(B) = H2(t)."""
    if not 0.0 <= t <= 0.5:
        raise ValueError("t must lie in [0, 1/2]")
    ch = DiscreteChannel(np.array([[t, 1.0 - t], [1.0 - t, t]]))
    return SmallEncoder(1, np.array([0, 1])), ch


def tight_lower_channel(t: float) -> tuple[SmallEncoder, DiscreteChannel]:
    """Injective encoder into a 3-output erasure-like channel: C = 2B = 2t.

    Transition matrix [[1-2t, 0], [0, 1-2t], [2t, 2t]]: output 3 is a pure
    erasure hit with probability 2t, the other outputs reveal the bit.
    """
    if not 0.0 <= t <= 0.5:
        raise ValueError("t must lie in [0, 1/2]")
    ch = DiscreteChannel(
        np.array([[1.0 - 2.0 * t, 0.0], [0.0, 1.0 - 2.0 * t], [2.0 * t, 2.0 * t]])
    )
    return SmallEncoder(1, np.array([0, 1])), ch


def counterexample_channel() -> DiscreteChannel:
    """The fixed 4x4 channel on which BER and BCE pick different encoders.

    Shipped digit-for-digit from the published table; its fourth column sums
    to 0.999, so the stochasticity check is run with a loose tolerance.
    """
    text = resources.files("turbofourier.data").joinpath("counterexample_channel.json").read_text()
    return DiscreteChannel.from_json_dict(json.loads(text), atol=2e-3)


@dataclass(frozen=True)
class CounterexampleReport:
    rows: list  # (f_pair_1based, bce, ber)
    ber_minimizers: list
    bce_minimizers: list
    disjoint: bool


def counterexample_sweep() -> CounterexampleReport:
    """Evaluate all 6 injective one-bit encoders into the counterexample channel.

    Encoders are labeled [f(0), f(1)] with 1-based symbols, f(0) < f(1).
    The BER minimizers and the BCE minimizers must be disjoint sets.
    """
    ch = counterexample_channel()
    rows = []
    for c0 in range(4):
        for c1 in range(c0 + 1, 4):
            enc = SmallEncoder(1, np.array([c0, c1]))
            bce_val, ber_val = exact_discrete_bce_ber(enc, ch)
            rows.append(((c0 + 1, c1 + 1), bce_val, ber_val))
    tol = 1e-9
    best_ber = min(r[2] for r in rows)
    best_bce = min(r[1] for r in rows)
    ber_arg = [r[0] for r in rows if r[2] <= best_ber + tol]
    bce_arg = [r[0] for r in rows if r[1] <= best_bce + tol]
    disjoint = not set(ber_arg) & set(bce_arg)
    return CounterexampleReport(rows, ber_arg, bce_arg, disjoint)


def map_posteriors_gaussian(codebook: np.ndarray, y: np.ndarray, sigma: float) -> np.ndarray:
    """Exact P(U_i = 1 | Y = y) for a known codebook under AWGN.

    codebook: (2^k, n) real codewords; y: (batch, n).  Returns (batch, k).
    """
    cb = np.asarray(codebook, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    v, n = cb.shape
    k = int(np.log2(v))
    # log-likelihoods up to a constant: -|y - c|^2 / (2 sigma^2)
    ll = (y @ cb.T - 0.5 * np.sum(cb * cb, axis=1)) / (sigma * sigma)
    ll -= ll.max(axis=1, keepdims=True)
    wts = np.exp(ll)
    wts /= wts.sum(axis=1, keepdims=True)
    bits = ((np.arange(v)[:, None] >> np.arange(k)) & 1).astype(np.float64)
    return wts @ bits


def map_posteriors_discrete(codebook: np.ndarray, y: np.ndarray, ch: DiscreteChannel) -> np.ndarray:
    """Exact P(U_i = 1 | Y = y) for a known symbol codebook on a discrete channel."""
    cb = np.asarray(codebook, dtype=np.int64)
    v = cb.shape[0]
    k = int(np.log2(v))
    lik = ch.transition[np.asarray(y, dtype=np.int64)[:, None], cb[None, :]]
    tot = lik.sum(axis=1, keepdims=True)
    tot[tot == 0.0] = 1.0
    wts = lik / tot
    bits = ((np.arange(v)[:, None] >> np.arange(k)) & 1).astype(np.float64)
    return wts @ bits


def conditional_entropy_estimate(
    encoder: SmallEncoder,
    channel: AwgnChannel | DiscreteChannel,
    num_samples: int,
    rng: np.random.Generator,
    map_decoder=None,
) -> tuple[float, float]:
    """Monte Carlo estimate of (1/k) sum_i H(U_i | Y) via MAP-decoder BCE.

    Draws inputs and channel noise, decodes with the exact posterior (built
    from the codebook unless ``map_decoder`` is supplied), and averages the
    BCE against the true bits; with an exact decoder this is an unbiased
    estimate of the average per-bit conditional entropy.  Returns
    (estimate, standard error).
    """
    k = encoder.k
    v = 1 << k
    u_idx = rng.integers(0, v, size=num_samples)
    u_bits = ((u_idx[:, None] >> np.arange(k)) & 1).astype(np.float64)
    if isinstance(channel, AwgnChannel):
        x = encoder.codebook[u_idx]
        if x.ndim == 1:
            x = x[:, None]
        y = x + channel.sigma * rng.standard_normal(x.shape)
        if map_decoder is None:
            cb = encoder.codebook if encoder.codebook.ndim == 2 else encoder.codebook[:, None]
            posteriors = map_posteriors_gaussian(cb, y, channel.sigma)
        else:
            posteriors = map_decoder(y)
    else:
        x_sym = encoder.codebook.astype(np.int64)[u_idx]
        cdf = np.cumsum(ch_col := channel.transition, axis=0)
        draws = rng.random(num_samples)
        y = (draws[:, None] > cdf[:, x_sym].T / cdf[-1, x_sym][:, None]).sum(axis=1)
        if map_decoder is None:
            posteriors = map_posteriors_discrete(encoder.codebook, y, channel)
        else:
            posteriors = map_decoder(y)
    p = _clamp(posteriors)
    per_sample = np.mean(-u_bits * _LG(p) - (1 - u_bits) * _LG(1 - p), axis=1)
    est = float(per_sample.mean())
    se = float(per_sample.std(ddof=1) / np.sqrt(num_samples))
    return est, se


def sweep_to_csv(report: CounterexampleReport) -> str:
    lines = ["f0,f1,bce,ber"]
    for (f0, f1), bce_val, ber_val in report.rows:
        lines.append(f"{f0},{f1},{bce_val!r},{ber_val!r}")
    return "\n".join(lines) + "\n"
