"""Weighted finite-difference stencil on the half-domain grid.

The half-domain energy is

    E(u) = h^{n-2} sum m_k (Delta_x u)^2 + h^n sum c_k (Delta_y u)^2 - 2 h^n sum s u

with ``m_k`` the dual y-weights and ``c_k`` the exact y-conductances. ``R = -(2 h^n)^{-1} dE/du`` is the
nodal residual. ``y = 0`` is a reflecting boundary, so unconstrained thin nodes see zero weighted flux.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .fields import ObstacleSpec, ScalarField
from .grid import Grid


@dataclass(frozen=True, slots=True)
class Stencil:
    """Core-region views and coefficients shared by residual, energy and sweep."""

    grid: Grid
    core: tuple[slice, ...]
    dual: NDArray[np.float64]
    cond_up: NDArray[np.float64]
    cond_down: NDArray[np.float64]
    diag: NDArray[np.float64]

    @classmethod
    def build(cls, grid: Grid) -> Stencil:
        n = grid.n
        core = tuple([slice(1, -1)] * n + [slice(0, -1)])
        k_count = len(grid.y) - 1
        cond = grid.conductance_y
        cond_down = np.concatenate([[0.0], cond[: k_count - 1]])
        dual = grid.dual_weights_y[:k_count]
        diag = 2 * n * dual / grid.h**2 + cond + cond_down
        return cls(grid=grid, core=core, dual=dual, cond_up=cond, cond_down=cond_down, diag=diag)

    def residual(self, u: NDArray[np.float64], source: NDArray[np.float64] | None = None) -> NDArray[np.float64]:
        """Nodal residual on the core region (interior x nodes, y rows ``0..K-1``)."""
        n = self.grid.n
        center = u[self.core]
        lap_x = np.zeros_like(center)
        for axis in range(n):
            plus = list(self.core)
            minus = list(self.core)
            plus[axis] = slice(2, None)
            minus[axis] = slice(0, -2)
            lap_x += u[tuple(plus)] + u[tuple(minus)] - 2.0 * center
        up_index = list(self.core)
        up_index[n] = slice(1, None)
        up = self.cond_up * (u[tuple(up_index)] - center)
        down = np.zeros_like(center)
        down[..., 1:] = self.cond_down[1:] * (center[..., :-1] - center[..., 1:])
        out = self.dual * lap_x / self.grid.h**2 + up + down
        if source is not None:
            out = out + source[self.core]
        return np.asarray(out)

    def energy(self, u: NDArray[np.float64], source: NDArray[np.float64] | None = None) -> float:
        n = self.grid.n
        h = self.grid.h
        total = 0.0
        for axis in range(n):
            diff = np.diff(u, axis=axis)
            total += h ** (n - 2) * float(np.sum(self.grid.dual_weights_y * diff**2))
        dy = np.diff(u, axis=n)
        total += h**n * float(np.sum(self.grid.conductance_y * dy**2))
        if source is not None:
            total -= 2.0 * h**n * float(np.sum(source[self.core] * u[self.core]))
        return total


def discrete_energy(field: ScalarField, source: NDArray[np.float64] | None = None) -> float:
    return Stencil.build(field.grid).energy(field.values_array, source)


def apply_operator(grid: Grid, values: NDArray[np.float64]) -> NDArray[np.float64]:
    """Discrete ``L_a`` applied to nodal values, padded with zeros outside the core region."""
    stencil = Stencil.build(grid)
    out = np.zeros(grid.shape)
    out[stencil.core] = stencil.residual(values)
    return out


def constraint_mask(grid: Grid, spec: ObstacleSpec) -> NDArray[np.bool_]:
    mask = grid.thin_mask() if spec.constraint_set == "thin" else grid.verythin_mask()
    return np.asarray(mask)


