"""Vector-quantization bottleneck and the entropy measurements around it."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EmptyBatch, NonFiniteInput

N_BINS = 256


@dataclass
class CodebookState:
    """``K x D`` embedding table plus the code counts of the latest batch.

    The table is trained by gradient descent only (no EMA updates, no dead-code
    restarts).
    """

    embeddings: np.ndarray
    usage_counts: np.ndarray = field(default=None)

    def __post_init__(self):
        self.embeddings = np.asarray(self.embeddings)
        if self.embeddings.ndim != 2 or self.embeddings.shape[0] < 2:
            raise ValueError(f"codebook must be (K>=2, D), got {self.embeddings.shape}")
        if not np.all(np.isfinite(self.embeddings)):
            raise NonFiniteInput("codebook contains NaN or Inf")
        if self.usage_counts is None:
            self.usage_counts = np.zeros(self.embeddings.shape[0], dtype=np.int64)

    @property
    def n_codes(self) -> int:
        return self.embeddings.shape[0]

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]

    @classmethod
    def initialize(cls, n_codes: int, dim: int, rng: np.random.Generator, dtype=np.float32) -> "CodebookState":
        """Uniform init in ``[-1/K, 1/K]``."""
        bound = 1.0 / n_codes
        return cls(rng.uniform(-bound, bound, size=(n_codes, dim)).astype(dtype))


@dataclass
class QuantizationResult:
    codes: np.ndarray
    quantized: np.ndarray
    commit_loss: float
    codebook_loss: float
    counts: np.ndarray


def nearest_codes(latents: np.ndarray, embeddings: np.ndarray) -> np.ndarray:
    """Index of the nearest embedding per row; the lowest index wins ties."""
    diff = latents[:, None, :] - embeddings[None, :, :]
    return np.argmin(np.einsum("bkd,bkd->bk", diff, diff), axis=1)


def quantize(latents: np.ndarray, state: CodebookState, beta: float = 0.25) -> QuantizationResult:
    """Replace each latent row with its nearest codebook entry.

    Both losses are means over all ``B * D`` elements.  ``commit_loss`` is
    ``beta * mean((z_e - sg(z_q))**2)`` and only reaches the encoder;
    ``codebook_loss`` is ``mean((sg(z_e) - z_q)**2)`` and only reaches the
    table.  The reconstruction gradient passes from ``z_q`` to ``z_e``
    unchanged; see :func:`quantize_backward`.
    """
    latents = np.asarray(latents)
    if latents.ndim != 2 or latents.shape[1] != state.dim:
        raise DimensionMismatch(f"latents of shape {latents.shape} do not match codebook dim {state.dim}")
    if not np.all(np.isfinite(latents)):
        raise NonFiniteInput("latents contain NaN or Inf")
    codes = nearest_codes(latents, state.embeddings)
    quantized = state.embeddings[codes]
    sq = float(np.mean((latents - quantized) ** 2))
    counts = np.bincount(codes, minlength=state.n_codes)
    state.usage_counts = counts
    return QuantizationResult(
        codes=codes,
        quantized=quantized,
        commit_loss=beta * sq,
        codebook_loss=sq,
        counts=counts,
    )


def quantize_backward(
    grad_quantized: np.ndarray,
    latents: np.ndarray,
    result: QuantizationResult,
    n_codes: int,
    beta: float = 0.25,
) -> tuple[np.ndarray, np.ndarray]:
    """Gradients ``(d/d latents, d/d embeddings)`` of ``recon + commit + codebook``.

    ``grad_quantized`` is the reconstruction gradient at ``z_q``; it is copied
    straight through to the latents.
    """
    n_el = latents.size
    resid = latents - result.quantized
    grad_latents = grad_quantized + (2.0 * beta / n_el) * resid
    grad_emb = np.zeros((n_codes, latents.shape[1]), dtype=latents.dtype)
    np.add.at(grad_emb, result.codes, (-2.0 / n_el) * resid)
    return grad_latents, grad_emb


def _shannon(q: np.ndarray) -> float:
    q = q[q > 0]
    return float(-np.sum(q * np.log(q))) + 0.0


def code_usage_entropy(counts) -> float:
    """Entropy (nats) of the empirical code distribution of a batch."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise EmptyBatch("code counts sum to zero")
    return _shannon(counts / total)


def soft_usage_entropy(latents: np.ndarray, embeddings: np.ndarray, temperature: float = 1.0):
    """Differentiable code-usage entropy.

    Usage is the batch mean of ``softmax(-|z_e - e_j|^2 / temperature)``.
    Returns ``(H, dH/d latents, dH/d embeddings)``.
    """
    z = np.asarray(latents, dtype=np.float64)
    e = np.asarray(embeddings, dtype=np.float64)
    if len(z) == 0:
        raise EmptyBatch("no latents")
    diff = z[:, None, :] - e[None, :, :]
    logits = -np.einsum("bkd,bkd->bk", diff, diff) / temperature
    logits -= logits.max(axis=1, keepdims=True)
    s = np.exp(logits)
    s /= s.sum(axis=1, keepdims=True)
    q = s.mean(axis=0)
    h = float(-np.sum(q * np.log(q)))
    dq = -(np.log(q) + 1.0)
    # d q_j / d logit_bk = s_bj (delta_jk - s_bk) / B
    g_logit = s * (dq[None, :] - np.sum(s * dq[None, :], axis=1, keepdims=True)) / len(z)
    # logit_bk = -|z_b - e_k|^2 / T
    w = g_logit * (-2.0 / temperature)
    grad_z = np.einsum("bk,bkd->bd", w, diff)
    grad_e = -np.einsum("bk,bkd->kd", w, diff)
    return h, grad_z, grad_e


def paper_latent_entropy(latents) -> float:
    """Entropy of the flattened latent values treated as a distribution.

    Values are used as-is when all positive; otherwise they are shifted by
    ``-min + 1e-8`` first so the logarithm is defined.
    """
    v = np.asarray(latents, dtype=np.float64).ravel()
    if v.size == 0:
        raise EmptyBatch("empty latent array")
    if not np.all(np.isfinite(v)):
        raise NonFiniteInput("latents contain NaN or Inf")
    if v.min() <= 0:
        v = v - v.min() + 1e-8
    return _shannon(v / v.sum())


def input_entropy(batch, max_value: float = 1.0) -> float:
    """Entropy of the 256-bin intensity histogram of a batch.

    ``max_value`` is the intensity mapped to the top bin (1.0 for normalized
    images, 255 for raw bytes).
    """
    v = np.asarray(batch, dtype=np.float64).ravel()
    if v.size == 0:
        raise EmptyBatch("empty input batch")
    bins = np.clip(np.floor(v / max_value * (N_BINS - 1) + 0.5), 0, N_BINS - 1).astype(np.int64)
    return _shannon(np.bincount(bins, minlength=N_BINS) / v.size)
