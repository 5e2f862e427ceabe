from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np
import structlog
from numpy.typing import NDArray

logger = structlog.get_logger(__name__)

MIN_RES = 17


def _as_int(value: Any, default: int) -> int:
    if value is None:
        return default
    try:
        return int(value)
    except (TypeError, ValueError):
        return default


def _as_float(value: Any, default: float) -> float:
    if value is None:
        return default
    try:
        return float(value)
    except (TypeError, ValueError):
        return default


@dataclass(frozen=True, slots=True)
class GridSpec:
    n: int
    res: int
    a: float
    half_width: float = 1.0

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> GridSpec:
        return cls(
            n=_as_int(raw.get("n"), 1),
            res=_as_int(raw.get("res"), 65),
            a=_as_float(raw.get("a"), 0.0),
            half_width=_as_float(raw.get("half_width"), 1.0),
        )

    def to_dict(self) -> dict[str, Any]:
        return {"n": self.n, "res": self.res, "a": self.a, "half_width": self.half_width}

    def validate(self) -> None:
        if self.n not in (1, 2, 3):
            raise ValueError(f"Unsupported thin dimension n={self.n}; expected 1, 2 or 3")
        if self.res < MIN_RES:
            raise ValueError(f"res={self.res} is below the minimum {MIN_RES}")
        if self.res % 2 == 0:
            raise ValueError(f"res must be odd, got {self.res}")
        if not -1 < self.a < 1:
            raise ValueError(f"Unsupported weight exponent a={self.a}; expected a in (-1, 1)")
        if self.half_width <= 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")


@dataclass(frozen=True, slots=True)
class Grid:
    """Half-domain tensor grid on ``[-L, L]^n x [0, L]`` with exact ``|y|^a`` integrals per y-interval.

    * ``face_weights_y[k] = int_{y_k}^{y_{k+1}} y^a dy``
    * ``conductance_y[k] = 1 / int_{y_k}^{y_{k+1}} y^{-a} dy`` (exact 1-D weighted flux)
    * ``dual_weights_y[k] = int y^a`` over the dual interval ``[y_k - h/2, y_k + h/2] & [0, L]``
    """

    spec: GridSpec
    h: float
    x: NDArray[np.float64]
    y: NDArray[np.float64]
    face_weights_y: NDArray[np.float64]
    conductance_y: NDArray[np.float64]
    dual_weights_y: NDArray[np.float64]

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def a(self) -> float:
        return self.spec.a

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.spec.res,) * self.spec.n + (len(self.y),)

    @property
    def mid(self) -> int:
        return (self.spec.res - 1) // 2

    @property
    def node_coords(self) -> tuple[NDArray[np.float64], ...]:
        return (self.x,) * self.spec.n + (self.y,)

    def node_points(self) -> NDArray[np.float64]:
        """All nodes as an ``(N, n + 1)`` array in C order of :attr:`shape`."""
        mesh = np.meshgrid(*self.node_coords, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def thin_mask(self) -> NDArray[np.bool_]:
        mask = np.zeros(self.shape, dtype=bool)
        mask[..., 0] = True
        return mask

    def verythin_mask(self) -> NDArray[np.bool_]:
        mask = np.zeros(self.shape, dtype=bool)
        index: list[slice | int] = [slice(None)] * (self.n - 1) + [self.mid, 0]
        mask[tuple(index)] = True
        return mask

    def boundary_mask(self) -> NDArray[np.bool_]:
        """Dirichlet nodes: the x-faces of the cube and the top face ``y = L``."""
        mask = np.zeros(self.shape, dtype=bool)
        for axis in range(self.n):
            index: list[slice | int] = [slice(None)] * (self.n + 1)
            index[axis] = 0
            mask[tuple(index)] = True
            index[axis] = -1
            mask[tuple(index)] = True
        mask[..., -1] = True
        return mask

    def total_weight(self) -> float:
        """Approximates ``int_{cube} |y|^a dX`` (doubled over the mirror half)."""
        x_length = 2.0 * self.spec.half_width
        return float(2.0 * x_length**self.n * self.face_weights_y.sum())

    def to_descriptor(self) -> dict[str, Any]:
        return {
            "spec": self.spec.to_dict(),
            "h": self.h,
            "shape": list(self.shape),
            "first_face_weight": float(self.face_weights_y[0]),
            "first_conductance": float(self.conductance_y[0]),
            "total_weight": self.total_weight(),
            "thin_nodes": int(self.thin_mask().sum()),
            "verythin_nodes": int(self.verythin_mask().sum()),
        }


def _power_integral(lo: NDArray[np.float64], hi: NDArray[np.float64], p: float) -> NDArray[np.float64]:
    return np.asarray((hi ** (1.0 + p) - lo ** (1.0 + p)) / (1.0 + p))


def build_grid(spec: GridSpec) -> Grid:
    spec.validate()
    width = spec.half_width
    h = 2.0 * width / (spec.res - 1)
    x = np.linspace(-width, width, spec.res)
    y = np.linspace(0.0, width, (spec.res - 1) // 2 + 1)
    lo, hi = y[:-1], y[1:]
    face = _power_integral(lo, hi, spec.a)
    conductance = 1.0 / _power_integral(lo, hi, -spec.a)
    dual_lo = np.clip(y - h / 2.0, 0.0, width)
    dual_hi = np.clip(y + h / 2.0, 0.0, width)
    dual = _power_integral(dual_lo, dual_hi, spec.a)
    grid = Grid(
        spec=spec,
        h=h,
        x=x,
        y=y,
        face_weights_y=face,
        conductance_y=conductance,
        dual_weights_y=dual,
    )
    logger.debug("grid.built", n=spec.n, res=spec.res, a=spec.a, h=h)
    return grid
