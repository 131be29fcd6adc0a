"""HC-VQ regularization term.

The codebook's diagram signature (soft Betti-1 count, mean H0 death) is pulled
toward a target signature by a target-normalized squared error.  The error is
weighted by ``lambda * mean_k(E_z) / E_input``, where ``mean_k`` is a running
mean of the per-step code entropy over the last ``window_k`` steps.  The weight
acts as a schedule: no gradient flows through it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteEntropy, ZeroInputEntropy
from .metrics import DiagramSignature, SignatureGradient

ENTROPY_MODES = ("usage", "paper")


@dataclass
class RegularizerConfig:
    t_beta: float = 100.0
    t_mu: float = 0.5
    lam: float = 0.1
    window_k: int = 200
    gaussian_width: float = 0.01
    entropy_mode: str = "usage"
    clamp_e: float = 10.0
    ph_every: int = 1

    def __post_init__(self):
        if self.window_k < 1:
            raise ValueError(f"window_k must be >= 1, got {self.window_k}")
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if not self.t_mu > 0:
            raise ValueError(f"t_mu must be > 0, got {self.t_mu}")
        if not self.t_beta > 0:
            raise ValueError(f"t_beta must be > 0, got {self.t_beta}")
        if not self.clamp_e > 0:
            raise ValueError(f"clamp_e must be > 0, got {self.clamp_e}")
        if not self.gaussian_width > 0:
            raise ValueError(f"gaussian_width must be > 0, got {self.gaussian_width}")
        if self.entropy_mode not in ENTROPY_MODES:
            raise ValueError(f"entropy_mode must be one of {ENTROPY_MODES}, got {self.entropy_mode!r}")
        if self.ph_every < 1:
            raise ValueError(f"ph_every must be >= 1, got {self.ph_every}")


class EntropyWindow:
    """Ring buffer of the last ``size`` clamped entropy values."""

    def __init__(self, size: int = 200, clamp: float = 10.0):
        self.buffer: deque[float] = deque(maxlen=size)
        self.clamp = clamp
        self.step_count = 0

    def push(self, e_z: float) -> "EntropyWindow":
        e_z = float(e_z)
        if not np.isfinite(e_z):
            raise NonFiniteEntropy(f"entropy value {e_z} is not finite")
        self.buffer.append(min(e_z, self.clamp))
        self.step_count += 1
        return self

    def mean(self) -> float:
        if not self.buffer:
            raise ValueError("entropy window is empty")
        return float(np.mean(self.buffer))

    def __len__(self) -> int:
        return len(self.buffer)

    @classmethod
    def from_config(cls, cfg: RegularizerConfig) -> "EntropyWindow":
        return cls(cfg.window_k, cfg.clamp_e)


def push_entropy(window: EntropyWindow, e_z: float) -> EntropyWindow:
    return window.push(e_z)


def entropy_weight(window: EntropyWindow, e_input: float, cfg: RegularizerConfig) -> float:
    if not e_input > 0:
        raise ZeroInputEntropy(f"input entropy must be > 0, got {e_input}")
    return cfg.lam * window.mean() / e_input


def regularizer_loss(
    sig: DiagramSignature,
    siggrad: SignatureGradient,
    window: EntropyWindow,
    e_input: float,
    cfg: RegularizerConfig,
) -> tuple[float, np.ndarray]:
    """Loss value and its gradient with respect to the codebook rows."""
    w = entropy_weight(window, e_input, cfg)
    rb = (sig.beta1_soft - cfg.t_beta) / cfg.t_beta
    rm = (sig.mu0 - cfg.t_mu) / cfg.t_mu
    loss = w * 0.5 * (rb * rb + rm * rm)
    grad = w * (rb / cfg.t_beta * siggrad.d_beta1 + rm / cfg.t_mu * siggrad.d_mu0)
    return float(loss), grad


def schedule_ph(step: int, cfg: RegularizerConfig) -> bool:
    """Whether persistence is recomputed at ``step`` (else the last result is reused)."""
    return step % cfg.ph_every == 0
