"""Diagram signature (soft Betti-1 count, mean H0 death) and persistent entropy.

Every metric here is a function of edge lengths only, so gradients with respect
to point coordinates are obtained by routing ``d metric / d value`` through the
critical edge that realizes each birth or death value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyDiagram, InsufficientPoints, NonPositiveWidth
from .geometry import MIN_EDGE_LENGTH, PointCloud, accumulate_edge_gradients, as_cloud, pairwise_distances
from .persistence import PersistenceDiagram, vr_persistence

DEFAULT_WIDTH = 0.01
DEFAULT_ENTROPY_DIMS = (0, 1)


@dataclass(frozen=True)
class DiagramSignature:
    beta1_soft: float
    mu0: float
    persistent_entropy: float
    #: per-dimension persistent entropy, NaN where a dimension has no positive pair
    entropy_by_dim: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "beta1_soft": self.beta1_soft,
            "mu0": self.mu0,
            "persistent_entropy": self.persistent_entropy,
        }


@dataclass(frozen=True)
class SignatureGradient:
    d_beta1: np.ndarray
    d_mu0: np.ndarray
    d_entropy: np.ndarray


def _check_width(width: float) -> None:
    if not width > 0:
        raise NonPositiveWidth(f"gaussian width must be > 0, got {width}")


def soft_betti1(diagram: PersistenceDiagram, width: float = DEFAULT_WIDTH) -> float:
    """Smooth count of dimension-1 pairs: ``sum(1 - exp(-l^2 / (2 w^2)))``.

    A pair contributes ~1 once its persistence ``l`` is several widths wide and
    exactly 0 at zero persistence.
    """
    _check_width(width)
    ell = diagram.persistence[diagram.mask(1)]
    return float(np.sum(-np.expm1(-(ell * ell) / (2.0 * width * width))))


def mu0(diagram: PersistenceDiagram) -> float:
    """Mean finite H0 death value, i.e. the mean minimum-spanning-tree edge."""
    if diagram.n_points < 2:
        raise InsufficientPoints(f"mu0 needs at least 2 points, got {diagram.n_points}")
    return float(np.mean(diagram.deaths[diagram.mask(0)]))


def _entropy_of(ell: np.ndarray) -> float:
    p = ell / ell.sum()
    # + 0.0 turns -0.0 (single pair) into 0.0
    return float(-np.sum(p * np.log(p))) + 0.0


def lifetime_entropy(lifetimes) -> float:
    """Shannon entropy (natural log) of positive lifetimes normalized to sum 1."""
    ell = np.asarray(lifetimes, dtype=np.float64)
    ell = ell[ell > 0]
    if len(ell) == 0:
        raise EmptyDiagram("no positive lifetimes")
    return _entropy_of(ell)


def persistent_entropy(diagram: PersistenceDiagram, dims=DEFAULT_ENTROPY_DIMS) -> float:
    """Persistent entropy over finite pairs of ``dims`` with positive lifetime.

    The essential H0 class is always excluded.
    """
    sel = np.isin(diagram.dims, list(dims)) & diagram.finite
    ell = diagram.persistence[sel]
    ell = ell[ell > 0]
    if len(ell) == 0:
        raise EmptyDiagram(f"no positive-persistence finite pairs in dims {sorted(dims)}")
    return _entropy_of(ell)


def diagram_signature(
    cloud: PointCloud | np.ndarray,
    diagram: PersistenceDiagram,
    width: float = DEFAULT_WIDTH,
    entropy_dims=DEFAULT_ENTROPY_DIMS,
) -> tuple[DiagramSignature, SignatureGradient]:
    """Signature and coordinate gradients for a diagram already computed from ``cloud``.

    Gradients follow whichever pairing the diagram holds; at distance ties
    that is one element of the subdifferential.  Pairs with persistence below
    1e-12 contribute no gradient; if no pair has positive persistence the
    entropy is reported as 0.
    """
    _check_width(width)
    pts = as_cloud(cloud).points
    n = pts.shape[0]
    if n < 2:
        raise InsufficientPoints(f"signature needs at least 2 points, got {n}")
    ell = diagram.persistence
    alive = diagram.finite & (ell >= MIN_EDGE_LENGTH)

    # soft Betti-1
    m1 = diagram.mask(1)
    bump = np.exp(-(ell[m1] ** 2) / (2.0 * width * width))
    beta1 = float(np.sum(1.0 - bump))
    coef1 = np.zeros(len(diagram))
    coef1[m1] = ell[m1] / (width * width) * bump
    coef1[~alive] = 0.0

    # mean H0 death
    m0 = diagram.mask(0)
    k0 = int(m0.sum())
    mu = float(np.mean(diagram.deaths[m0]))
    d_mu = accumulate_edge_gradients(pts, diagram.death_edge[m0], np.full(k0, 1.0 / k0))

    # persistent entropy
    sel = np.isin(diagram.dims, list(entropy_dims)) & diagram.finite & (ell > 0)
    coefE = np.zeros(len(diagram))
    if sel.any():
        s_l = ell[sel].sum()
        p = ell[sel] / s_l
        ent = float(-np.sum(p * np.log(p)))
        coefE[sel] = -(np.log(p) + ent) / s_l
        coefE[~alive] = 0.0
    else:
        ent = 0.0

    by_dim = {}
    for dim in (0, 1):
        lm = ell[diagram.mask(dim)]
        lm = lm[lm > 0]
        by_dim[dim] = _entropy_of(lm) if len(lm) else float("nan")

    d_beta = _route(pts, diagram, coef1)
    d_ent = _route(pts, diagram, coefE)
    sig = DiagramSignature(beta1_soft=beta1, mu0=mu, persistent_entropy=ent, entropy_by_dim=by_dim)
    return sig, SignatureGradient(d_beta1=d_beta, d_mu0=d_mu, d_entropy=d_ent)


def _route(pts: np.ndarray, diagram: PersistenceDiagram, coef: np.ndarray) -> np.ndarray:
    """Chain rule for metrics given ``coef[m] = d metric / d persistence_m``."""
    nz = coef != 0
    if not nz.any():
        return np.zeros_like(pts)
    grad = accumulate_edge_gradients(pts, diagram.death_edge[nz], coef[nz])
    has_birth = nz & (diagram.birth_edge[:, 0] >= 0)
    if has_birth.any():
        grad -= accumulate_edge_gradients(pts, diagram.birth_edge[has_birth], coef[has_birth])
    return grad


def signature_with_gradients(
    cloud: PointCloud | np.ndarray,
    width: float = DEFAULT_WIDTH,
    entropy_dims=DEFAULT_ENTROPY_DIMS,
) -> tuple[DiagramSignature, SignatureGradient]:
    cloud = as_cloud(cloud)
    if cloud.n < 2:
        raise InsufficientPoints(f"signature needs at least 2 points, got {cloud.n}")
    diagram = vr_persistence(pairwise_distances(cloud), max_dim=1)
    return diagram_signature(cloud, diagram, width, entropy_dims)
