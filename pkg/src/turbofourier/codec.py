"""Table-parameterized non-recursive turbo encoder and its decoders.

The rate-1/3 encoder is given by three generating tables h1, h2, h3 on a
length-w window.  Streams 1 and 2 slide h1, h2 over the input bits; stream 3
slides h3 over an interleaved copy.  Positions before the start are
zero-padded (F2 zero, i.e. sign +1), so output t depends on bits
u_{t-w+1..t}.  Window packing matches boolfn: the oldest window bit is table
index bit 0, the newest is bit w-1.

Decoders:
  * bcjr_constituent -- exact forward-backward posteriors for one
    constituent (streams 1+2 jointly, or stream 3), log-domain with exact
    log-sum-exp, unterminated trellis.
  * turbo_decode -- the standard iterative exchange of extrinsic LLRs
    between the two constituents through the interleaver.
  * brute_force_map -- exact per-bit marginalization over all 2^k inputs
    (the oracle the iterative decoder is tested against).

LLRs are clipped to +-50 throughout, which bounds achievable posterior
extremity but keeps the sigma -> 0 limits finite.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._bcjr import bcjr_posterior_llrs
from .boolfn import FourierSpectrum, PseudoBooleanTable, wht_forward

LLR_CLIP = 50.0
RATE = 1.0 / 3.0
BRUTE_FORCE_MAX_K = 20


@dataclass(frozen=True)
class Interleaver:
    """Permutation pi applied to the input before the third stream: v_t = u[perm[t]]."""

    perm: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.perm, dtype=np.int64)
        if sorted(p.tolist()) != list(range(p.size)):
            raise ValueError("perm must be a permutation of range(k)")
        object.__setattr__(self, "perm", p)
        self.perm.setflags(write=False)

    @property
    def length(self) -> int:
        return int(self.perm.size)

    @property
    def inverse(self) -> np.ndarray:
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.perm.size)
        return inv

    @classmethod
    def identity(cls, k: int) -> "Interleaver":
        return cls(np.arange(k))

    @classmethod
    def random(cls, k: int, rng: np.random.Generator) -> "Interleaver":
        return cls(rng.permutation(k))

    def to_json_dict(self) -> dict:
        return {"perm": self.perm.tolist()}

    @classmethod
    def from_json_dict(cls, d: dict) -> "Interleaver":
        return cls(np.asarray(d["perm"], dtype=np.int64))


@dataclass(frozen=True)
class TurboEncoderParams:
    """Three generating tables of common window size (rate fixed at 1/3)."""

    window: int
    tables: tuple[PseudoBooleanTable, PseudoBooleanTable, PseudoBooleanTable]

    def __post_init__(self):
        if len(self.tables) != 3:
            raise ValueError("exactly three generating tables required")
        for t in self.tables:
            if t.arity != self.window:
                raise ValueError("all tables must have arity equal to the window size")

    @property
    def rate(self) -> float:
        return RATE

    def table_matrix(self) -> np.ndarray:
        """(3, 2^w) stacked table values."""
        return np.stack([t.values for t in self.tables])

    def spectra(self) -> tuple[FourierSpectrum, ...]:
        return tuple(wht_forward(t) for t in self.tables)

    @classmethod
    def from_table_matrix(cls, window: int, mat: np.ndarray) -> "TurboEncoderParams":
        return cls(window, tuple(PseudoBooleanTable(window, row) for row in mat))

    def to_json_dict(self) -> dict:
        return {"window": self.window, "tables": [t.values.tolist() for t in self.tables]}

    @classmethod
    def from_json_dict(cls, d: dict) -> "TurboEncoderParams":
        w = int(d["window"])
        return cls(w, tuple(PseudoBooleanTable(w, np.asarray(v)) for v in d["tables"]))

    def to_json_file(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=1)

    @classmethod
    def from_json_file(cls, path) -> "TurboEncoderParams":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


@dataclass(frozen=True)
class Codeword:
    """Three real output streams of equal length, stacked as (3, k)."""

    streams: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.streams, dtype=np.float64)
        if s.ndim != 2 or s.shape[0] != 3:
            raise ValueError("streams must have shape (3, k)")
        if not np.all(np.isfinite(s)):
            raise ValueError("streams contain non-finite values")
        object.__setattr__(self, "streams", s)


@dataclass(frozen=True)
class SoftPosterior:
    """Per-bit probabilities P(U_t = 1 | Y)."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if np.any(p < 0) or np.any(p > 1):
            raise ValueError("probabilities must lie in [0, 1]")
        object.__setattr__(self, "probs", p)

    def hard_bits(self) -> np.ndarray:
        return (self.probs > 0.5).astype(np.int64)


@dataclass(frozen=True)
class Trellis:
    """Unrolled automata view of one constituent: state = previous w-1 bits."""

    window: int
    next_state: np.ndarray  # (S, 2)
    outputs: np.ndarray  # (m, S, 2) for the m streams this constituent emits

    @property
    def num_states(self) -> int:
        return int(self.next_state.shape[0])


def build_trellis(tables) -> Trellis:
    """Trellis over the given tables (all must share one window size >= 2)."""
    w = tables[0].arity
    if w < 2:
        raise ValueError("trellis construction needs window >= 2")
    S = 1 << (w - 1)
    states = np.arange(S)
    next_state = np.stack([(states >> 1) | (a << (w - 2)) for a in (0, 1)], axis=1)
    outs = np.empty((len(tables), S, 2))
    for j, tab in enumerate(tables):
        if tab.arity != w:
            raise ValueError("tables must share one window size")
        for a in (0, 1):
            outs[j, :, a] = tab.values[states | (a << (w - 1))]
    return Trellis(w, next_state, outs)


def window_indices(bits: np.ndarray, w: int) -> np.ndarray:
    """Table indices of the sliding zero-padded windows of F2 rows (B, k)."""
    bits = np.asarray(bits, dtype=np.int64)
    squeeze = bits.ndim == 1
    if squeeze:
        bits = bits[None, :]
    B, k = bits.shape
    padded = np.zeros((B, k + w - 1), dtype=np.int64)
    padded[:, w - 1 :] = bits
    windows = np.lib.stride_tricks.sliding_window_view(padded, w, axis=1)
    idx = windows @ (1 << np.arange(w, dtype=np.int64))
    return idx[0] if squeeze else idx


def encode_batch(params: TurboEncoderParams, bits: np.ndarray, interleaver: Interleaver) -> np.ndarray:
    """Encode F2 inputs (B, k) to real outputs (B, 3, k)."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.ndim == 1:
        return encode_batch(params, bits[None, :], interleaver)[0]
    k = bits.shape[1]
    if k < params.window:
        raise ValueError(f"block length {k} shorter than window {params.window}")
    if interleaver.length != k:
        raise ValueError("interleaver length mismatch")
    w = params.window
    idx_u = window_indices(bits, w)
    idx_v = window_indices(bits[:, interleaver.perm], w)
    out = np.empty((bits.shape[0], 3, k))
    out[:, 0, :] = params.tables[0].values[idx_u]
    out[:, 1, :] = params.tables[1].values[idx_u]
    out[:, 2, :] = params.tables[2].values[idx_v]
    return out


def encode(params: TurboEncoderParams, input_bits: np.ndarray, interleaver: Interleaver) -> Codeword:
    """Encode one block of F2 bits to the three output streams."""
    return Codeword(encode_batch(params, np.asarray(input_bits), interleaver))


def _boundary_main_expectation(values: np.ndarray, w: int, k: int) -> float:
    """sum_{i=1}^{w-1} E[g(window_i)] + (k-w+1) E[g(full window)] for one table.

    Window i (1-based, i < w) has its oldest w-i positions pinned to F2 zero
    (index bits 0..w-i-1 clear) and i free bits.
    """
    acc = 0.0
    for i in range(1, w):
        free = np.arange(1 << i) << (w - i)
        acc += float(values[free].mean())
    acc += (k - w + 1) * float(values.mean())
    return acc


def analytic_power(params: TurboEncoderParams, k: int) -> float:
    """Exact E over uniform inputs of the average per-symbol squared output."""
    w = params.window
    total = sum(
        _boundary_main_expectation(t.values * t.values, w, k) for t in params.tables
    )
    return total / (3.0 * k)


def optimal_center(params: TurboEncoderParams, k: int) -> float:
    """The shift C minimizing the rescaling needed to reach unit power."""
    w = params.window
    total = sum(_boundary_main_expectation(t.values, w, k) for t in params.tables)
    return total / (3.0 * k)


def constrain_power(params: TurboEncoderParams, k: int) -> TurboEncoderParams:
    """Center and rescale the tables so the analytic power at length k is 1."""
    c = optimal_center(params, k)
    centered = params.table_matrix() - c
    centered_params = TurboEncoderParams.from_table_matrix(params.window, centered)
    s2 = analytic_power(centered_params, k)
    if s2 < 1e-30:
        raise ValueError("zero-variance generator: tables are constant")
    return TurboEncoderParams.from_table_matrix(params.window, centered / np.sqrt(s2))


def _log_priors(prior_llrs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lp0 = -np.logaddexp(0.0, prior_llrs)
    lp1 = -np.logaddexp(0.0, -prior_llrs)
    return lp0, lp1


def _bcjr_batch(trellis: Trellis, ys: np.ndarray, prior_llrs: np.ndarray, sigma: float) -> np.ndarray:
    """Batched posterior LLRs: ys (B, k, m), prior_llrs (B, k)."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    lp0, lp1 = _log_priors(prior_llrs)
    post = bcjr_posterior_llrs(
        np.ascontiguousarray(ys, dtype=np.float64),
        np.ascontiguousarray(trellis.outputs),
        lp0,
        lp1,
        float(sigma),
        trellis.window,
    )
    return np.clip(post, -LLR_CLIP, LLR_CLIP)


def bcjr_constituent(
    trellis: Trellis,
    received,
    prior_llrs: np.ndarray,
    sigma: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Exact per-bit posterior and extrinsic LLRs for one constituent code.

    ``received`` is one vector per observation stream of the constituent
    (a (k,) array, an (m, k) array, or a sequence of (k,) arrays).  The
    extrinsic part is posterior minus prior; there is no systematic channel
    term because the code is non-systematic.
    """
    ys = np.atleast_2d(np.asarray(received, dtype=np.float64))  # (m, k)
    prior_llrs = np.asarray(prior_llrs, dtype=np.float64)
    k = ys.shape[1]
    if prior_llrs.shape != (k,):
        raise ValueError("prior length inconsistent with received streams")
    post = _bcjr_batch(trellis, ys.T[None, :, :], prior_llrs[None, :], sigma)[0]
    ext = np.clip(post - prior_llrs, -LLR_CLIP, LLR_CLIP)
    return post, ext


def turbo_decode_batch(
    params: TurboEncoderParams,
    interleaver: Interleaver,
    ys: np.ndarray,
    sigma: float,
    iterations: int = 6,
) -> np.ndarray:
    """Iteratively decode received blocks (B, 3, k); returns P(u=1) of shape (B, k).

    Each iteration runs the streams-1+2 constituent, then the stream-3
    constituent on the interleaved axis, exchanging extrinsic LLRs.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    ys = np.asarray(ys, dtype=np.float64)
    B, _, k = ys.shape
    perm = interleaver.perm
    tr12 = build_trellis(params.tables[:2])
    tr3 = build_trellis(params.tables[2:])
    y12 = np.ascontiguousarray(np.transpose(ys[:, :2, :], (0, 2, 1)))
    y3 = np.ascontiguousarray(ys[:, 2, :, None])
    ext2_u = np.zeros((B, k))
    post2_v = np.zeros((B, k))
    for _ in range(iterations):
        prior1 = ext2_u
        post1 = _bcjr_batch(tr12, y12, prior1, sigma)
        ext1_u = np.clip(post1 - prior1, -LLR_CLIP, LLR_CLIP)
        prior2_v = ext1_u[:, perm]
        post2_v = _bcjr_batch(tr3, y3, prior2_v, sigma)
        ext2_v = np.clip(post2_v - prior2_v, -LLR_CLIP, LLR_CLIP)
        ext2_u = np.empty_like(ext2_v)
        ext2_u[:, perm] = ext2_v
    llr_u = np.empty_like(post2_v)
    llr_u[:, perm] = post2_v
    return 1.0 / (1.0 + np.exp(-llr_u))


def turbo_decode(
    params: TurboEncoderParams,
    interleaver: Interleaver,
    received: Codeword,
    sigma: float,
    iterations: int = 6,
) -> SoftPosterior:
    """Six-iteration (by default) turbo decoding of one received codeword."""
    probs = turbo_decode_batch(
        params, interleaver, received.streams[None, :, :], sigma, iterations
    )[0]
    return SoftPosterior(probs)


@lru_cache(maxsize=8)
def all_input_bits(k: int) -> np.ndarray:
    """(2^k, k) matrix of all inputs, row v = little-endian bits of v."""
    v = np.arange(1 << k, dtype=np.int64)
    return ((v[:, None] >> np.arange(k)) & 1).astype(np.int64)


def map_posterior_from_codebook(
    codewords: np.ndarray,
    bits: np.ndarray,
    y: np.ndarray,
    sigma: float,
    prior_llrs: np.ndarray | None = None,
) -> np.ndarray:
    """Exact bit posteriors by marginalizing a Gaussian likelihood over a codebook.

    codewords: (V, n) flattened real codewords; bits: (V, k); y: (n,).
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    ll = -np.sum((codewords - y) ** 2, axis=1) / (2.0 * sigma * sigma)
    if prior_llrs is not None:
        lp0, lp1 = _log_priors(np.asarray(prior_llrs, dtype=np.float64))
        ll = ll + bits @ lp1 + (1 - bits) @ lp0
    ll -= ll.max()
    q = np.exp(ll)
    q /= q.sum()
    return q @ bits.astype(np.float64)


def brute_force_map(
    params: TurboEncoderParams,
    interleaver: Interleaver,
    received: Codeword,
    sigma: float,
) -> SoftPosterior:
    """Exact MAP bit posteriors by enumerating all 2^k inputs (k <= 20)."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    k = received.streams.shape[1]
    if k > BRUTE_FORCE_MAX_K:
        raise ValueError(f"block length {k} too large for brute force (max {BRUTE_FORCE_MAX_K})")
    bits = all_input_bits(k)
    y = received.streams.reshape(-1)
    v = bits.shape[0]
    ll = np.empty(v)
    chunk = 1 << 14
    for lo in range(0, v, chunk):
        cw = encode_batch(params, bits[lo : lo + chunk], interleaver).reshape(
            min(chunk, v - lo), -1
        )
        ll[lo : lo + chunk] = -np.sum((cw - y) ** 2, axis=1) / (2.0 * sigma * sigma)
    ll -= ll.max()
    q = np.exp(ll)
    q /= q.sum()
    return SoftPosterior(q @ bits.astype(np.float64))
