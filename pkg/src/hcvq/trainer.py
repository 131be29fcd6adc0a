"""VQ autoencoder training with the optional HC-VQ term.

The model is a fully connected autoencoder (``input -> hidden -> D`` encoder,
``D -> hidden -> input`` decoder, one ReLU per side) with a ``K x D`` codebook
at the bottleneck.  Gradients are written out by hand; the network runs in
float32 while all topology is computed in float64 on the codebook.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np

from .config import TrainConfig
from .data import Dataset, batch_indices
from .errors import DivergedTraining, NonFiniteInput
from .metrics import DiagramSignature, SignatureGradient, diagram_signature
from .persistence import PersistenceDiagram, vr_persistence
from .regularizer import EntropyWindow, RegularizerConfig, entropy_weight, regularizer_loss, schedule_ph
from .vq import (
    CodebookState,
    code_usage_entropy,
    input_entropy,
    nearest_codes,
    paper_latent_entropy,
    quantize,
    quantize_backward,
)

log = logging.getLogger(__name__)

PARAM_NAMES = ("enc_w1", "enc_b1", "enc_w2", "enc_b2", "dec_w1", "dec_b1", "dec_w2", "dec_b2", "codebook")

CSV_FIELDS = (
    "step",
    "recon_loss",
    "e_z",
    "e_z_windowed",
    "e_input",
    "reg_loss",
    "mu0",
    "beta1_soft",
    "persistent_entropy",
    "codes_used",
)


@dataclass
class TrainRecord:
    step: int
    recon_loss: float
    e_z: float
    e_z_windowed: float
    e_input: float
    reg_loss: float
    mu0: float
    beta1_soft: float
    persistent_entropy: float
    codes_used: int

    def row(self) -> list[str]:
        # repr gives the shortest round-tripping float text
        return [repr(getattr(self, f)) for f in CSV_FIELDS]


def init_params(input_dim: int, hidden: int, code_dim: int, n_codes: int, rng: np.random.Generator) -> dict:
    """He-normal weights, zero biases, uniform ``[-1/K, 1/K]`` codebook."""

    def he(fan_in, fan_out):
        return (rng.standard_normal((fan_in, fan_out)) * np.sqrt(2.0 / fan_in)).astype(np.float32)

    params = {
        "enc_w1": he(input_dim, hidden),
        "enc_b1": np.zeros(hidden, np.float32),
        "enc_w2": he(hidden, code_dim),
        "enc_b2": np.zeros(code_dim, np.float32),
        "dec_w1": he(code_dim, hidden),
        "dec_b1": np.zeros(hidden, np.float32),
        "dec_w2": he(hidden, input_dim),
        "dec_b2": np.zeros(input_dim, np.float32),
    }
    params["codebook"] = CodebookState.initialize(n_codes, code_dim, rng).embeddings
    return params


def encode(params: dict, x: np.ndarray):
    h1 = x @ params["enc_w1"] + params["enc_b1"]
    a1 = np.maximum(h1, 0)
    return a1 @ params["enc_w2"] + params["enc_b2"], (h1, a1)


def decode(params: dict, z: np.ndarray):
    h3 = z @ params["dec_w1"] + params["dec_b1"]
    a3 = np.maximum(h3, 0)
    return a3 @ params["dec_w2"] + params["dec_b2"], (h3, a3)


@dataclass
class StepOutput:
    recon_loss: float
    commit_loss: float
    codebook_loss: float
    grads: dict
    codes: np.ndarray
    counts: np.ndarray
    latents: np.ndarray


def forward_backward(params: dict, x: np.ndarray, beta: float) -> StepOutput:
    """Losses and gradients of ``recon + commit + codebook`` (no HC-VQ term)."""
    codebook = CodebookState(params["codebook"])
    z_e, (h1, a1) = encode(params, x)
    q = quantize(z_e, codebook, beta)
    x_hat, (h3, a3) = decode(params, q.quantized)
    resid = x_hat - x
    recon = float(np.mean(resid * resid))

    g = {}
    d_xhat = (2.0 / resid.size) * resid
    g["dec_w2"] = a3.T @ d_xhat
    g["dec_b2"] = d_xhat.sum(axis=0)
    d_h3 = (d_xhat @ params["dec_w2"].T) * (h3 > 0)
    g["dec_w1"] = q.quantized.T @ d_h3
    g["dec_b1"] = d_h3.sum(axis=0)
    d_zq = d_h3 @ params["dec_w1"].T
    d_ze, g["codebook"] = quantize_backward(d_zq, z_e, q, codebook.n_codes, beta)
    g["enc_w2"] = a1.T @ d_ze
    g["enc_b2"] = d_ze.sum(axis=0)
    d_h1 = (d_ze @ params["enc_w2"].T) * (h1 > 0)
    g["enc_w1"] = x.T @ d_h1
    g["enc_b1"] = d_h1.sum(axis=0)
    grads = {k: g[k].astype(params[k].dtype, copy=False) for k in PARAM_NAMES}
    return StepOutput(recon, q.commit_loss, q.codebook_loss, grads, q.codes, q.counts, z_e)


class Adam:
    """Adam with bias correction and no weight decay.

    Parameters listed in ``lazy_rows`` only update rows whose gradient is
    non-zero, leaving both the row and its moments untouched otherwise; an
    unused codebook entry therefore stays where it is.
    """

    def __init__(self, params: dict, lr: float, betas=(0.9, 0.999), eps: float = 1e-8, lazy_rows=("codebook",)):
        self.lr = lr
        self.b1, self.b2 = betas
        self.eps = eps
        self.lazy_rows = set(lazy_rows)
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        c1 = 1.0 - self.b1 ** self.t
        c2 = 1.0 - self.b2 ** self.t
        for k, g in grads.items():
            p, m, v = params[k], self.m[k], self.v[k]
            if k in self.lazy_rows:
                rows = np.flatnonzero(np.any(g != 0, axis=1))
                if len(rows) == 0:
                    continue
                gr = g[rows]
                m[rows] = self.b1 * m[rows] + (1 - self.b1) * gr
                v[rows] = self.b2 * v[rows] + (1 - self.b2) * gr * gr
                p[rows] -= (self.lr * (m[rows] / c1) / (np.sqrt(v[rows] / c2) + self.eps)).astype(p.dtype)
            else:
                m *= self.b1
                m += (1 - self.b1) * g
                v *= self.b2
                v += (1 - self.b2) * g * g
                p -= (self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)).astype(p.dtype)


@dataclass
class TopologyState:
    """Latest persistence result for the codebook point cloud."""

    diagram: PersistenceDiagram
    signature: DiagramSignature
    gradient: SignatureGradient


def codebook_topology(codebook: np.ndarray, reg: RegularizerConfig) -> TopologyState:
    cloud = np.asarray(codebook, dtype=np.float64)
    diagram = vr_persistence(cloud_distances(cloud), max_dim=1)
    sig, grad = diagram_signature(cloud, diagram, reg.gaussian_width)
    return TopologyState(diagram, sig, grad)


def cloud_distances(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def step_entropy(counts: np.ndarray, latents: np.ndarray, reg: RegularizerConfig) -> float:
    if reg.entropy_mode == "paper":
        return paper_latent_entropy(latents)
    return code_usage_entropy(counts)


@dataclass
class TrainResult:
    params: dict
    records: list = field(default_factory=list)
    topology: TopologyState | None = None
    #: (step, weight) of the HC-VQ term, weight 0 when disabled
    reg_weights: list = field(default_factory=list)
    #: (window_end_step, counts) code-usage histogram per window
    usage_histograms: list = field(default_factory=list)

    @property
    def codebook(self) -> CodebookState:
        return CodebookState(self.params["codebook"])


def train(config: TrainConfig, dataset: Dataset, callback=None) -> TrainResult:
    """Run ``config.steps`` optimization steps; one :class:`TrainRecord` per step.

    Records describe the parameters before that step's update, so record 0 is
    the seed-initialized network.  ``callback(record)`` is called as records
    are produced.
    """
    reg = config.reg
    rng = np.random.default_rng(config.seed)
    params = init_params(dataset.input_dim, config.hidden, config.code_dim, config.n_codes, rng)
    opt = Adam(params, config.lr)
    window = EntropyWindow.from_config(reg)
    batches = batch_indices(len(dataset), config.batch_size, config.seed)
    result = TrainResult(params)
    usage = np.zeros(config.n_codes, dtype=np.int64)
    topo = None

    for step in range(config.steps):
        x = dataset.items[next(batches)]
        try:
            out = forward_backward(params, x, config.beta_commit)
        except NonFiniteInput as exc:
            raise DivergedTraining(step, f"training diverged at step {step} (non-finite latents)") from exc
        if not np.isfinite(out.recon_loss):
            raise DivergedTraining(step)

        e_z = step_entropy(out.counts, out.latents, reg)
        window.push(e_z)
        e_in = input_entropy(x)
        usage += out.counts

        if topo is None or schedule_ph(step, reg):
            topo = codebook_topology(params["codebook"], reg)

        reg_loss, weight = 0.0, 0.0
        if config.hcvq_enabled and e_in > 0:
            weight = entropy_weight(window, e_in, reg)
            reg_loss, g_cb = regularizer_loss(topo.signature, topo.gradient, window, e_in, reg)
            out.grads["codebook"] = out.grads["codebook"] + g_cb.astype(np.float32)

        rec = TrainRecord(
            step=step,
            recon_loss=out.recon_loss,
            e_z=e_z,
            e_z_windowed=window.mean(),
            e_input=e_in,
            reg_loss=reg_loss,
            mu0=topo.signature.mu0,
            beta1_soft=topo.signature.beta1_soft,
            persistent_entropy=topo.signature.persistent_entropy,
            codes_used=int(np.count_nonzero(out.counts)),
        )
        result.records.append(rec)
        result.reg_weights.append((step, weight))
        if callback is not None:
            callback(rec)
        if (step + 1) % reg.window_k == 0 or step + 1 == config.steps:
            result.usage_histograms.append((step, usage.copy()))
            usage[:] = 0
        if step % 500 == 0:
            log.info("step %d recon %.5f e_z %.3f mu0 %.4f", step, rec.recon_loss, rec.e_z_windowed, rec.mu0)

        opt.step(params, out.grads)
        if not all(np.all(np.isfinite(p)) for p in params.values()):
            raise DivergedTraining(step, f"non-finite parameters after step {step}")

    result.topology = codebook_topology(params["codebook"], reg)
    return result


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


# ---------------------------------------------------------------------------
# gradient checking support


@dataclass
class FrozenQuantization:
    """Quantities held constant at a base point for finite-difference checks.

    Besides the stop-gradient targets and the selected codes this holds the
    ReLU activation patterns, so a perturbation of size ``h`` cannot step
    across a kink.
    """

    codes: np.ndarray
    z_e: np.ndarray
    z_q: np.ndarray
    enc_mask: np.ndarray
    dec_mask: np.ndarray


def freeze(params: dict, x: np.ndarray) -> FrozenQuantization:
    z_e, (h1, _) = encode(params, x)
    codes = nearest_codes(z_e, params["codebook"])
    z_q = params["codebook"][codes].copy()
    _, (h3, _) = decode(params, z_q)
    return FrozenQuantization(codes, z_e.copy(), z_q, h1 > 0, h3 > 0)


def surrogate_loss(params: dict, x: np.ndarray, beta: float, frozen: FrozenQuantization) -> float:
    """Loss whose ordinary gradient is the straight-through training gradient.

    Stop-gradients are replaced by values frozen at the base point: the decoder
    sees ``z_e + (z_q0 - z_e0)``, the commitment term compares against
    ``z_q0`` and the codebook term against ``z_e0``.  At the base point the
    value equals ``recon + commit + codebook``.
    """
    a1 = (x @ params["enc_w1"] + params["enc_b1"]) * frozen.enc_mask
    z_e = a1 @ params["enc_w2"] + params["enc_b2"]
    z_st = z_e + (frozen.z_q - frozen.z_e)
    a3 = (z_st @ params["dec_w1"] + params["dec_b1"]) * frozen.dec_mask
    x_hat = a3 @ params["dec_w2"] + params["dec_b2"]
    recon = np.mean((x_hat - x) ** 2)
    commit = beta * np.mean((z_e - frozen.z_q) ** 2)
    cb = np.mean((frozen.z_e - params["codebook"][frozen.codes]) ** 2)
    return float(recon + commit + cb)
