"""Continuous-time random-walk kernel on the similarity graph.

The walk generator is the random-walk Laplacian L = I - D^-1 A, and the
transition matrix at Markov time t is P(t) = exp(-t L). One symmetric
eigendecomposition of I - D^-1/2 A D^-1/2 is reused to evaluate P(t) at
every time of the scan.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graph import SimilarityGraph

# Below this, exp(-t * lambda) is flushed to exact zero (it is zero anyway and
# denormals are slow).
EXP_UNDERFLOW = 1e-300

# lambda_2 below this is treated as a disconnected graph: the stationary
# distribution would not be unique.
DISCONNECTION_TOL = 1e-9

__all__ = ["DisconnectedGraphError", "MarkovKernel", "build_kernel", "transition_matrix"]


class DisconnectedGraphError(ValueError):
    """The graph has more than one connected component."""


@dataclass(frozen=True)
class MarkovKernel:
    """Spectral factorization of the diffusion on a connected weighted graph.

    ``eigenvalues`` are those of the symmetric normalized Laplacian, sorted
    ascending with the first clamped to 0; ``modes`` are the corresponding
    orthonormal eigenvectors (columns).
    """

    n: int
    degrees: np.ndarray  # (N,) positive
    pi: np.ndarray  # (N,) stationary distribution, sums to 1
    eigenvalues: np.ndarray  # (N,) in [0, 2]
    modes: np.ndarray  # (N, N) orthonormal columns

    @property
    def sqrt_degrees(self) -> np.ndarray:
        return np.sqrt(self.degrees)

    @property
    def total_degree(self) -> float:
        return float(self.degrees.sum())

    def mode_weights(self, t: float) -> np.ndarray:
        """exp(-t * lambda) per mode, flushed to 0 under EXP_UNDERFLOW."""
        if t < 0:
            raise ValueError(f"Markov time must be >= 0, got {t}")
        w = np.exp(-t * self.eigenvalues)
        w[w < EXP_UNDERFLOW] = 0.0
        return w


def build_kernel(graph: SimilarityGraph) -> MarkovKernel:
    """Eigendecompose the normalized Laplacian of a connected graph."""
    a = graph.adjacency()
    degrees = np.asarray(a.sum(axis=1)).ravel()
    if np.any(degrees <= 0.0):
        isolated = np.where(degrees <= 0.0)[0]
        raise DisconnectedGraphError(f"isolated nodes: {isolated.tolist()}")
    inv_sqrt_d = 1.0 / np.sqrt(degrees)
    a_sym = a.toarray() * inv_sqrt_d[:, None] * inv_sqrt_d[None, :]
    lap_sym = np.eye(graph.n_nodes) - a_sym
    lap_sym = (lap_sym + lap_sym.T) / 2.0
    eigenvalues, modes = np.linalg.eigh(lap_sym)
    eigenvalues = np.clip(eigenvalues, 0.0, None)
    eigenvalues[0] = 0.0  # the constant mode is exactly stationary
    if graph.n_nodes > 1 and eigenvalues[1] < DISCONNECTION_TOL:
        n_comp, labels = sp.csgraph.connected_components(a, directed=False)
        if n_comp > 1:
            comps = [np.where(labels == c)[0].tolist() for c in range(n_comp)]
            raise DisconnectedGraphError(
                f"graph has {n_comp} connected components: {comps}"
            )
        raise DisconnectedGraphError(
            f"graph is effectively disconnected (lambda_2 = {eigenvalues[1]:.3e}); "
            "some bridges carry near-zero weight"
        )
    pi = degrees / degrees.sum()
    return MarkovKernel(graph.n_nodes, degrees, pi, eigenvalues, modes)


def transition_matrix(kernel: MarkovKernel, t: float) -> np.ndarray:
    """P(t) = D^-1/2 U exp(-t Lambda) U^T D^1/2; rows sum to 1.

    Entries can carry O(1e-15) negative noise from the eigenreconstruction;
    exports clamp at zero, in-memory values are returned as computed.
    """
    w = kernel.mode_weights(t)
    m = (kernel.modes * w) @ kernel.modes.T
    m = (m + m.T) / 2.0
    sqrt_d = kernel.sqrt_degrees
    return (m / sqrt_d[:, None]) * sqrt_d[None, :]
