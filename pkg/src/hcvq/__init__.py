"""Homology-constrained vector quantization (HC-VQ).

A small VQ autoencoder whose codebook is regularized toward a target
topological signature (soft Betti-1 count and mean MST edge length) of its
Vietoris-Rips persistence diagram.
"""

from .errors import HCVQError
from .geometry import DistanceMatrix, PointCloud, pairwise_distances
from .metrics import DiagramSignature, SignatureGradient, signature_with_gradients
from .persistence import BACKEND, PersistenceDiagram, critical_edges, vr_persistence

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DiagramSignature",
    "DistanceMatrix",
    "HCVQError",
    "PersistenceDiagram",
    "PointCloud",
    "SignatureGradient",
    "critical_edges",
    "pairwise_distances",
    "signature_with_gradients",
    "vr_persistence",
]
