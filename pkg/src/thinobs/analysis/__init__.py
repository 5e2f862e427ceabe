from __future__ import annotations

__all__ = [
    "BlowupReport",
    "Classification",
    "DirectionalStats",
    "FirstBlowup",
    "FrequencyEstimate",
    "FrequencyProfile",
    "IsolationVerdict",
    "NondegeneracyVerdict",
    "NxtFlags",
    "StratumEntry",
    "StratumTable",
    "WeissVerdict",
    "classify_second_blowup",
    "default_radii",
    "directional_regularity",
    "first_blowup",
    "frequency_at_zero",
    "homogeneity_fit",
    "isolation_check",
    "linf_l2_ratio",
    "nondegeneracy_check",
    "nxt_membership",
    "profile",
    "scan",
    "second_blowup",
    "sphere_H",
    "stratum_flatness",
    "weiss_nonneg_check",
]

from .blowup import (
    BlowupReport,
    Classification,
    FirstBlowup,
    NxtFlags,
    classify_second_blowup,
    first_blowup,
    homogeneity_fit,
    nxt_membership,
    second_blowup,
)
from .diagnostics import (
    FrequencyEstimate,
    FrequencyProfile,
    WeissVerdict,
    default_radii,
    frequency_at_zero,
    profile,
    sphere_H,
    weiss_nonneg_check,
)
from .estimates import DirectionalStats, directional_regularity, linf_l2_ratio
from .singular_set import (
    IsolationVerdict,
    NondegeneracyVerdict,
    StratumEntry,
    StratumTable,
    isolation_check,
    nondegeneracy_check,
    scan,
    stratum_flatness,
)
