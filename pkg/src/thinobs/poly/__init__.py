from __future__ import annotations

__all__ = [
    "BallRule",
    "MembershipVerdict",
    "MultiPoly",
    "SphereRule",
    "SpineBasis",
    "ball_rule",
    "counterexample_pair",
    "ext_a",
    "half_circle_rule",
    "is_a_harmonic",
    "is_in_P_kappa",
    "la_residual",
    "multi_indices",
    "pkappa_basis",
    "probe_set",
    "quartic_singular_field",
    "sphere_inner",
    "sphere_norm_sq",
    "sphere_rule",
    "spine",
    "thin_zero_mask",
    "unit_sphere_rule",
]

from .catalog import counterexample_pair, pkappa_basis, probe_set, quartic_singular_field
from .extension import ext_a, is_a_harmonic, la_residual
from .membership import MembershipVerdict, is_in_P_kappa
from .multipoly import MultiPoly, multi_indices
from .quadrature import (
    BallRule,
    SphereRule,
    ball_rule,
    half_circle_rule,
    sphere_inner,
    sphere_norm_sq,
    sphere_rule,
    unit_sphere_rule,
)
from .spine import SpineBasis, spine, thin_zero_mask
