from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import structlog
from numpy.typing import NDArray
from scipy.stats import norm, qmc

from .extension import check_weight, is_a_harmonic
from .multipoly import MultiPoly

logger = structlog.get_logger(__name__)


@dataclass(slots=True)
class MembershipVerdict:
    member: bool
    kappa: int
    failures: list[str] = field(default_factory=list)
    witness: list[float] | None = None
    min_thin_value: float | None = None

    def to_payload(self) -> dict[str, Any]:
        return {
            "member": self.member,
            "kappa": self.kappa,
            "failures": list(self.failures),
            "witness": self.witness,
            "min_thin_value": self.min_thin_value,
        }


def thin_sphere_samples(n: int, samples: int, seed: int = 0) -> NDArray[np.float64]:
    """Quasi-random points on the unit sphere of the thin space, plus axes and diagonals."""
    if n == 1:
        return np.array([[1.0], [-1.0]])
    engine = qmc.Sobol(d=n, scramble=True, seed=seed)
    raw = engine.random_base2(max(int(math.ceil(math.log2(max(samples, 2)))), 1))
    gauss = norm.ppf(np.clip(raw, 1e-12, 1 - 1e-12))
    gauss /= np.linalg.norm(gauss, axis=1, keepdims=True)
    eye = np.eye(n)
    extras = [eye, -eye]
    for i in range(n):
        for j in range(i + 1, n):
            for sign in (1.0, -1.0):
                vec = np.zeros(n)
                vec[i] = 1.0
                vec[j] = sign
                extras.append(np.vstack([vec, -vec]) / math.sqrt(2.0))
    return np.vstack([gauss, *extras])


def is_in_P_kappa(
    p: MultiPoly,
    kappa: int,
    a: float,
    *,
    samples: int = 10_000,
    seed: int = 0,
    tol: float = 1e-12,
) -> MembershipVerdict:
    """Check homogeneity, evenness, a-harmonicity and thin-space nonnegativity of ``p``."""
    check_weight(a)
    failures: list[str] = []
    if kappa < 0 or kappa % 2:
        failures.append("kappa_even")
    if not p.is_homogeneous(kappa):
        failures.append("homogeneous")
    if not p.even_in_y:
        failures.append("even_in_y")
    elif not is_a_harmonic(p, a, tol):
        failures.append("a_harmonic")

    scale = max(p.max_abs_coeff(), 1.0)
    points = thin_sphere_samples(p.n, samples, seed)
    values = p.values(points)
    idx = int(np.argmin(values)) if len(values) else 0
    min_value = float(values[idx]) if len(values) else 0.0
    witness: list[float] | None = None
    if min_value < -tol * scale:
        failures.append("thin_nonnegative")
        witness = [float(v) for v in points[idx]]

    verdict = MembershipVerdict(
        member=not failures, kappa=kappa, failures=failures, witness=witness, min_thin_value=min_value
    )
    if failures:
        logger.debug("membership.rejected", kappa=kappa, failures=failures, text=p.to_text())
    return verdict
