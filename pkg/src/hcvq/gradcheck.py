"""Finite-difference checks of every hand-written gradient.

Three suites: the topology metrics and the HC-VQ codebook gradient in float64,
and the float32 network gradient at step 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import TrainConfig
from .data import synth_images
from .metrics import signature_with_gradients
from .oracle import finite_diff, stable_cloud
from .regularizer import EntropyWindow, RegularizerConfig, regularizer_loss
from .trainer import PARAM_NAMES, forward_backward, freeze, init_params, surrogate_loss

TOPOLOGY_TOL = 1e-4
NETWORK_TOL = 1e-2
TOPOLOGY_H = 1e-5
NETWORK_H = 1e-3
CHECK_WIDTH = 0.05


#: gradients smaller than this are below finite-difference resolution
GRAD_FLOOR = 1e-6


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = GRAD_FLOOR) -> float:
    """``max|a - f| / max(max|a|, max|f|, floor)``."""
    a = np.asarray(analytic, dtype=np.float64)
    f = np.asarray(numeric, dtype=np.float64)
    scale = max(np.max(np.abs(a), initial=0.0), np.max(np.abs(f), initial=0.0), floor)
    return float(np.max(np.abs(a - f), initial=0.0) / scale)


@dataclass
class CheckResult:
    suite: str
    metric: str
    max_rel_error: float
    tol: float
    worst_case: int
    worst_index: tuple

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tol


@dataclass
class GradcheckReport:
    results: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self):
        return [r for r in self.results if not r.passed]

    def table(self) -> str:
        lines = [f"{'suite':<12}{'metric':<14}{'max_rel_error':>16}{'tol':>10}  status  worst"]
        for r in self.results:
            status = "ok" if r.passed else "FAIL"
            lines.append(
                f"{r.suite:<12}{r.metric:<14}{r.max_rel_error:>16.3e}{r.tol:>10.0e}  {status:<6}  "
                f"case {r.worst_case} index {r.worst_index}"
            )
        return "\n".join(lines)


def _worst(a, f):
    return tuple(int(i) for i in np.unravel_index(np.argmax(np.abs(np.asarray(a) - np.asarray(f))), np.shape(a)))


def check_topology(n_clouds: int = 50, seed: int = 0, corrupt: str = "", n: int = 12, d: int = 3):
    rng = np.random.default_rng(seed)
    metrics = {"mu0": "d_mu0", "beta1": "d_beta1", "entropy": "d_entropy"}
    values = {"mu0": "mu0", "beta1": "beta1_soft", "entropy": "persistent_entropy"}
    worst = {m: (0.0, 0, ()) for m in metrics}
    for case in range(n_clouds):
        cloud = stable_cloud(rng, n, d)
        _, grad = signature_with_gradients(cloud, CHECK_WIDTH)
        cache = {}

        def sig_of(c):
            key = c.points.tobytes()
            if key not in cache:
                cache[key] = signature_with_gradients(c, CHECK_WIDTH)[0]
            return cache[key]

        for m, attr in metrics.items():
            analytic = getattr(grad, attr) * (1.5 if corrupt == m else 1.0)
            numeric = finite_diff(lambda c, v=values[m]: getattr(sig_of(c), v), cloud, TOPOLOGY_H)
            err = relative_error(analytic, numeric)
            if err >= worst[m][0]:
                worst[m] = (err, case, _worst(analytic, numeric))
    return [CheckResult("topology", m, e, TOPOLOGY_TOL, c, i) for m, (e, c, i) in worst.items()]


def check_regularizer(n_codebooks: int = 50, seed: int = 1, corrupt: str = "", k: int = 16, d: int = 4,
                      reg: RegularizerConfig | None = None):
    """Codebook gradient of the HC-VQ loss with the entropy weight held fixed."""
    reg = reg or RegularizerConfig(gaussian_width=CHECK_WIDTH)
    rng = np.random.default_rng(seed)
    window = EntropyWindow.from_config(reg)
    for v in rng.uniform(1.0, 4.0, size=reg.window_k):
        window.push(v)
    e_input = 1.3
    worst = (0.0, 0, ())

    def loss_of(cloud):
        sig, grad = signature_with_gradients(cloud, reg.gaussian_width)
        return regularizer_loss(sig, grad, window, e_input, reg)

    for case in range(n_codebooks):
        cloud = stable_cloud(rng, k, d)
        _, analytic = loss_of(cloud)
        if corrupt == "regularizer":
            analytic = analytic * 1.5
        numeric = finite_diff(lambda c: loss_of(c)[0], cloud, TOPOLOGY_H)
        err = relative_error(analytic, numeric)
        if err >= worst[0]:
            worst = (err, case, _worst(analytic, numeric))
    return [CheckResult("regularizer", "codebook", worst[0], TOPOLOGY_TOL, worst[1], worst[2])]


def sample_parameters(params: dict, count: int, rng: np.random.Generator):
    """``count`` (name, index) picks spread round-robin over all parameter arrays."""
    picks = []
    for i in range(count):
        name = PARAM_NAMES[i % len(PARAM_NAMES)]
        flat = int(rng.integers(params[name].size))
        picks.append((name, np.unravel_index(flat, params[name].shape)))
    return picks


def check_network(config: TrainConfig | None = None, seed: int = 0, n_params: int = 20, corrupt: str = ""):
    """Step-0 float32 gradients of ``recon + commit + codebook`` against central differences.

    Differences are taken on the straight-through surrogate (stop-gradient
    targets, codes and ReLU patterns frozen at the base point), evaluated in
    float64 from the float32 parameters.  The HC-VQ term is covered by the
    float64 regularizer suite.
    """
    config = config or TrainConfig()
    data = synth_images(max(config.batch_size, 64), seed)
    rng = np.random.default_rng(seed)
    params = init_params(data.input_dim, config.hidden, config.code_dim, config.n_codes, rng)
    x = data.items[: config.batch_size]
    out = forward_backward(params, x, config.beta_commit)

    p64 = {k: v.astype(np.float64) for k, v in params.items()}
    x64 = x.astype(np.float64)
    frozen = freeze(p64, x64)
    picks = sample_parameters(params, n_params, np.random.default_rng(seed + 1))
    analytic, numeric = [], []
    for name, idx in picks:
        a = float(out.grads[name][idx])
        if corrupt == "network":
            a = a * 1.5 + 1e-3
        base = p64[name][idx]
        p64[name][idx] = base + NETWORK_H
        fp = surrogate_loss(p64, x64, config.beta_commit, frozen)
        p64[name][idx] = base - NETWORK_H
        fm = surrogate_loss(p64, x64, config.beta_commit, frozen)
        p64[name][idx] = base
        analytic.append(a)
        numeric.append((fp - fm) / (2 * NETWORK_H))
    errs = [relative_error([a], [f]) for a, f in zip(analytic, numeric)]
    k = int(np.argmax(errs))
    return [CheckResult("network", "step0", float(errs[k]), NETWORK_TOL, k, (picks[k][0],) + tuple(int(i) for i in picks[k][1]))]


def run_gradcheck(config: TrainConfig | None = None) -> GradcheckReport:
    config = config or TrainConfig()
    gc = config.gradcheck
    report = GradcheckReport()
    report.results += check_topology(gc.clouds, config.seed, gc.corrupt)
    report.results += check_regularizer(gc.clouds, config.seed + 1, gc.corrupt)
    report.results += check_network(config, config.seed, gc.n_params, gc.corrupt)
    return report
