"""Encoder-first training against estimated conditional entropy.

The decomposition of the decoding BCE into a decoder-only KL term and an
encoder-only conditional-entropy term motivates training the encoder alone:
at short block length the exact MAP posterior is computable by enumerating
all 2^k inputs, so the batch BCE against the true bits is an unbiased
estimate of (1/k) sum_i H(U_i | Y), and its gradient with respect to the
generating-table entries is available in closed form (the posterior is a
softmax whose logits are quadratic in the received word and linear in the
table entries).

Each step draws a fresh uniformly random interleaver, takes one SGD step on
the entropy estimate, and re-projects onto the unit-power manifold by
centering and rescaling the tables (the projection is exact, using the
boundary-aware power formula).  After training, the encoder is re-projected
for the evaluation block length and paired with the iterative BCJR decoder.

Stream derivation: step t uses substream(seed, t, 0) for the interleaver,
(seed, t, 1) for the inputs, and (seed, t, 2) for the noise; evaluation uses
(seed, 0) for its fixed interleaver and (seed, 1 + snr_index, chunk) for the
Monte Carlo batches.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._rng import substream
from .boolfn import FourierSpectrum, wht_forward, wht_inverse
from .channel import snr_db_to_sigma, uncoded_bpsk_ber
from .codec import (
    BRUTE_FORCE_MAX_K,
    Interleaver,
    TurboEncoderParams,
    all_input_bits,
    analytic_power,
    constrain_power,
    encode_batch,
    turbo_decode_batch,
    window_indices,
)
from .metrics import CLAMP_EPS

_LN2 = np.log(2.0)


@dataclass(frozen=True)
class TrainConfig:
    k_enc: int = 16
    steps: int = 500
    batch_size: int = 64
    learning_rate: float = 0.05
    snr_db: float = 1.0
    seed: int = 0
    init: str = "normal"  # "normal" | "parity"
    window: int = 5
    snapshot_every: int = 10

    def __post_init__(self):
        if self.k_enc > BRUTE_FORCE_MAX_K:
            raise ValueError(f"k_enc must stay within the brute-force guard {BRUTE_FORCE_MAX_K}")
        if self.k_enc < self.window:
            raise ValueError("k_enc must be at least the window size")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.init not in ("normal", "parity"):
            raise ValueError("init must be 'normal' or 'parity'")


@dataclass
class TrainTrace:
    steps: list[int] = field(default_factory=list)
    losses: list[float] = field(default_factory=list)
    loss_std_errors: list[float] = field(default_factory=list)
    grad_norms: list[float] = field(default_factory=list)
    power_residuals: list[float] = field(default_factory=list)
    snapshots: list[tuple[int, np.ndarray]] = field(default_factory=list)  # (step, (3, 2^w))
    aborted: bool = False

    def snapshot_spectra(self, step: int, params: TurboEncoderParams) -> None:
        self.snapshots.append((step, np.stack([wht_forward(t).coeffs for t in params.tables])))


def init_encoder(cfg: TrainConfig, rng: np.random.Generator) -> TurboEncoderParams:
    """Fresh power-constrained tables: i.i.d. standard normal entries, or a
    random parity per stream whose newest window bit is always active."""
    w = cfg.window
    if cfg.init == "normal":
        mat = rng.standard_normal((3, 1 << w))
        return constrain_power(TurboEncoderParams.from_table_matrix(w, mat), cfg.k_enc)
    tables = []
    for _ in range(3):
        mask = (1 << (w - 1)) | int(rng.integers(0, 1 << (w - 1)))
        coeffs = np.zeros(1 << w)
        coeffs[mask] = 1.0
        tables.append(wht_inverse(FourierSpectrum(w, coeffs)))
    return constrain_power(TurboEncoderParams(w, tuple(tables)), cfg.k_enc)


def _posteriors_and_grad(
    params: TurboEncoderParams,
    interleaver: Interleaver,
    inputs: np.ndarray,
    noise: np.ndarray,
    sigma: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample entropy-estimate losses and the exact batch-mean gradient.

    inputs: (B, k) F2 bits; noise: (B, 3, k) standard normal.  Returns
    (per_sample_loss (B,), grad (3, 2^w)).

    The table entries enter the loss twice: through every candidate codeword
    in the posterior softmax, and through the transmitted codeword inside
    the received y = c(u) + sigma*z.  With kappa_v = d loss / d logit_v
    (which sums to zero over v), the candidate path reduces to two
    bincounts of residual sums over each stream's window-index matrix, and
    the transmit path to one bincount of the kappa-weighted mean candidate
    codeword over the true input's window indices.
    """
    B, k = inputs.shape
    w = params.window
    theta = params.table_matrix()  # (3, 2^w)
    bits = all_input_bits(k)  # (V, k)
    V = bits.shape[0]
    perm = interleaver.perm
    idx = [window_indices(bits, w), None, window_indices(bits[:, perm], w)]
    idx[1] = idx[0]
    # codebook (V, 3, k) and received batch (B, 3, k)
    code = np.empty((V, 3, k))
    for s in range(3):
        code[:, s, :] = theta[s][idx[s]]
    u_idx = (inputs.astype(np.int64) @ (1 << np.arange(k, dtype=np.int64)))
    y = code[u_idx] + sigma * noise
    yf = y.reshape(B, -1)
    cf = code.reshape(V, -1)
    ll = (yf @ cf.T - 0.5 * np.sum(cf * cf, axis=1)) / (sigma * sigma)
    ll -= ll.max(axis=1, keepdims=True)
    q = np.exp(ll)
    q /= q.sum(axis=1, keepdims=True)
    bits_f = bits.astype(np.float64)
    p = q @ bits_f
    u = inputs.astype(np.float64)
    pc = np.clip(p, CLAMP_EPS, 1.0 - CLAMP_EPS)
    per_sample = np.mean(-u * np.log2(pc) - (1 - u) * np.log2(1 - pc), axis=1)
    # BCE derivative wrt posterior, zeroed where the clamp is active
    wmat = -(u / pc - (1 - u) / (1 - pc)) / (k * _LN2)
    wmat[(p <= CLAMP_EPS) | (p >= 1.0 - CLAMP_EPS)] = 0.0
    r = wmat @ bits_f.T - np.sum(wmat * p, axis=1, keepdims=True)
    kappa = q * r  # (B, V)
    grad = np.empty_like(theta)
    nbins = 1 << w
    kap_tot = kappa.sum(axis=0)  # (V,)
    for s in range(3):
        ys = y[:, s, :]  # (B, k)
        m = kappa.T @ ys  # (V, k)
        flat_idx = idx[s].ravel()
        num = np.bincount(flat_idx, weights=m.ravel(), minlength=nbins)
        den = np.bincount(flat_idx, weights=np.repeat(kap_tot, k), minlength=nbins)
        chat = kappa @ code[:, s, :]  # (B, k) kappa-weighted mean candidate codeword
        iu = idx[s][u_idx]  # window indices of the transmitted codeword
        tx = np.bincount(iu.ravel(), weights=chat.ravel(), minlength=nbins)
        grad[s] = (num - theta[s] * den + tx) / (sigma * sigma)
    grad /= B
    return per_sample, grad


def entropy_loss_and_gradient(
    params: TurboEncoderParams,
    interleaver: Interleaver,
    batch: tuple[np.ndarray, np.ndarray],
    sigma: float,
) -> tuple[float, np.ndarray]:
    """Batch estimate of the per-bit conditional entropy and its exact gradient.

    ``batch`` is (inputs (B, k), noise (B, 3, k)).  The loss is the mean
    base-2 BCE of the brute-force MAP posteriors against the true bits; the
    gradient is its exact derivative with respect to all 3 * 2^w table
    entries.
    """
    inputs, noise = batch
    if inputs.shape[1] > BRUTE_FORCE_MAX_K:
        raise ValueError("block length outside the brute-force guard")
    per_sample, grad = _posteriors_and_grad(params, interleaver, inputs, noise, sigma)
    if not (np.isfinite(per_sample).all() and np.isfinite(grad).all()):
        raise FloatingPointError("non-finite loss or gradient")
    return float(per_sample.mean()), grad


def train_encoder(cfg: TrainConfig) -> tuple[TurboEncoderParams, TrainTrace]:
    """Projected SGD on the conditional-entropy estimate with fresh
    interleavers; returns the final encoder and the full trace."""
    sigma = snr_db_to_sigma(cfg.snr_db)
    params = init_encoder(cfg, substream(cfg.seed, 0, 3))
    trace = TrainTrace()
    trace.snapshot_spectra(0, params)
    for step in range(1, cfg.steps + 1):
        interleaver = Interleaver.random(cfg.k_enc, substream(cfg.seed, step, 0))
        inputs = substream(cfg.seed, step, 1).integers(0, 2, size=(cfg.batch_size, cfg.k_enc))
        noise = substream(cfg.seed, step, 2).standard_normal((cfg.batch_size, 3, cfg.k_enc))
        try:
            per_sample, grad = _posteriors_and_grad(params, interleaver, inputs, noise, sigma)
        except FloatingPointError:
            trace.aborted = True
            break
        loss = float(per_sample.mean())
        if not np.isfinite(loss) or not np.isfinite(grad).all():
            trace.aborted = True
            break
        new_mat = params.table_matrix() - cfg.learning_rate * grad
        params = constrain_power(
            TurboEncoderParams.from_table_matrix(cfg.window, new_mat), cfg.k_enc
        )
        trace.steps.append(step)
        trace.losses.append(loss)
        trace.loss_std_errors.append(
            float(per_sample.std(ddof=1) / np.sqrt(per_sample.size))
        )
        trace.grad_norms.append(float(np.linalg.norm(grad)))
        trace.power_residuals.append(abs(analytic_power(params, cfg.k_enc) - 1.0))
        if step % cfg.snapshot_every == 0 or step == cfg.steps:
            trace.snapshot_spectra(step, params)
    return params, trace


def fc_evolution_export(trace: TrainTrace) -> str:
    """Long-format CSV (step, stream, subset_mask, coefficient) of all snapshots."""
    if len(trace.snapshots) < 2:
        raise ValueError("need at least two snapshots to export an evolution")
    lines = ["step,stream,subset_mask,coefficient"]
    for step, spectra in trace.snapshots:
        for s in range(spectra.shape[0]):
            for mask in range(spectra.shape[1]):
                lines.append(f"{step},{s + 1},{mask},{spectra[s, mask]!r}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class EvalRow:
    snr_db: float
    ber: float
    ber_std_error: float
    bce: float
    bce_std_error: float
    blocks: int
    uncoded_ber: float


def evaluate_trained(
    params: TurboEncoderParams,
    k_eval: int = 100,
    snr_grid=(0.0, 1.0, 2.0),
    blocks: int = 100000,
    seed: int = 0,
    iterations: int = 6,
    chunk_size: int = 2000,
) -> list[EvalRow]:
    """Re-project the encoder for k_eval and sweep SNRs with BCJR decoding.

    The power constraint depends on the block length through its boundary
    terms, so it is re-applied before evaluation.  One seed-derived
    interleaver is fixed for the whole sweep.
    """
    params = constrain_power(params, k_eval)
    interleaver = Interleaver.random(k_eval, substream(seed, 0))
    rows = []
    for j, snr_db in enumerate(snr_grid):
        sigma = snr_db_to_sigma(snr_db)
        bit_err = []
        bce_blocks = []
        done = 0
        chunk_id = 0
        while done < blocks:
            n = min(chunk_size, blocks - done)
            rng = substream(seed, 1 + j, chunk_id)
            inputs = rng.integers(0, 2, size=(n, k_eval))
            noise = rng.standard_normal((n, 3, k_eval))
            x = encode_batch(params, inputs, interleaver)
            probs = turbo_decode_batch(params, interleaver, x + sigma * noise, sigma, iterations)
            u = inputs.astype(np.float64)
            p = np.clip(probs, CLAMP_EPS, 1.0 - CLAMP_EPS)
            bce_blocks.append(np.mean(-u * np.log2(p) - (1 - u) * np.log2(1 - p), axis=1))
            bit_err.append(np.mean((probs > 0.5).astype(np.int64) != inputs, axis=1))
            done += n
            chunk_id += 1
        errs = np.concatenate(bit_err)
        bces = np.concatenate(bce_blocks)
        rows.append(
            EvalRow(
                snr_db=float(snr_db),
                ber=float(errs.mean()),
                ber_std_error=float(errs.std(ddof=1) / np.sqrt(errs.size)),
                bce=float(bces.mean()),
                bce_std_error=float(bces.std(ddof=1) / np.sqrt(bces.size)),
                blocks=blocks,
                uncoded_ber=uncoded_bpsk_ber(float(snr_db)),
            )
        )
    return rows


def eval_rows_to_csv(rows) -> str:
    lines = ["snr_db,ber,ber_std_error,bce,bce_std_error,blocks,uncoded_ber"]
    for r in rows:
        lines.append(
            f"{r.snr_db!r},{r.ber!r},{r.ber_std_error!r},{r.bce!r},"
            f"{r.bce_std_error!r},{r.blocks},{r.uncoded_ber!r}"
        )
    return "\n".join(lines) + "\n"
