from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
import structlog
from numpy.typing import NDArray
from scipy.linalg import null_space

from .multipoly import MultiPoly

logger = structlog.get_logger(__name__)


@dataclass(frozen=True, slots=True)
class SpineBasis:
    """Orthonormal basis (rows) of the invariant subspace L(p) of the thin space."""

    n: int
    vectors: NDArray[np.float64]
    degenerate: bool = False

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[0])

    def projector(self) -> NDArray[np.float64]:
        if self.dim == 0:
            return np.zeros((self.n, self.n))
        return self.vectors.T @ self.vectors

    def distance(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        """Euclidean distance of thin-space points to the spine."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))[:, : self.n]
        return np.asarray(np.linalg.norm(pts - pts @ self.projector(), axis=1))

    def contains(self, point: NDArray[np.float64], tol: float = 1e-9) -> bool:
        return bool(self.distance(np.asarray(point))[0] <= tol)

    def to_payload(self) -> dict[str, Any]:
        return {"n": self.n, "dim": self.dim, "degenerate": self.degenerate, "vectors": self.vectors.tolist()}


def spine(p: MultiPoly, tol: float = 1e-10) -> SpineBasis:
    """Kernel of ``xi -> xi . grad_x p(x, 0)`` computed on the coefficient matrix."""
    thin = p.restrict_thin().as_float()
    n = p.n
    if thin.is_zero():
        logger.warning("spine.degenerate", n=n)
        return SpineBasis(n=n, vectors=np.eye(n), degenerate=True)
    if not thin.is_homogeneous():
        raise ValueError("spine expects p(., 0) to be homogeneous")
    partials = [thin.derivative(i) for i in range(n)]
    monomials = sorted({key for part in partials for key in part.coeffs})
    if not monomials:
        # constants on the thin space are invariant in every direction
        return SpineBasis(n=n, vectors=np.eye(n))
    matrix = np.array([[float(part.coeffs.get(mono, 0.0)) for part in partials] for mono in monomials])
    kernel = null_space(matrix, rcond=tol)
    return SpineBasis(n=n, vectors=np.asarray(kernel.T, dtype=float))


def thin_zero_mask(p: MultiPoly, points: NDArray[np.float64], tol: float = 1e-12) -> NDArray[np.bool_]:
    """Sample mask of the nodal set {p(x, 0) = 0} on thin-space points."""
    values = p.values(np.atleast_2d(points))
    scale = max(p.max_abs_coeff(), 1.0)
    return np.asarray(np.abs(values) <= tol * scale)
