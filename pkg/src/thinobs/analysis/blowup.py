"""First and second blow-ups at thin-space points, their classification, and the next-order membership test.

A first blow-up is the kappa-homogeneous limit ``u(x0 + r X) / r^kappa``; the second is the homogeneous limit of
the remainder ``v = u - p*(. - x0)``, with homogeneity ``lambda* = N(0+, v)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
import structlog
from numpy.typing import NDArray
from scipy.linalg import null_space

from ..poly.catalog import pkappa_basis, probe_set
from ..poly.extension import la_residual
from ..poly.membership import MembershipVerdict, is_in_P_kappa
from ..poly.multipoly import MultiPoly, multi_indices, sum_polys
from ..poly.quadrature import sphere_inner, sphere_norm_sq, sphere_rule
from ..poly.spine import SpineBasis, spine
from ..solver.fields import AnalyticField, FieldLike, ResidualField, as_field, as_scalar_field
from ..very_thin.flux import f_a_flux
from .diagnostics import FrequencyEstimate, frequency_at_zero, profile, sphere_H

logger = structlog.get_logger(__name__)

KAPPA_SNAP = 0.1
LAMBDA_SNAP = 0.1
NOISE_FLOOR = 1e-12
BOUNDARY_BAND = 0.05
GAP_MARGIN = 0.05
FIT_TOL = 5e-2

CASES = ("polynomial", "very_thin_solution", "degenerate", "unclassified")


def _default_rho(source: FieldLike) -> float:
    grid_field = as_scalar_field(source)
    if grid_field is None:
        return 0.01
    return max(0.1, 8.0 * grid_field.grid.h)


def _chop(p: MultiPoly, rel: float = 1e-9) -> MultiPoly:
    scale = p.max_abs_coeff()
    if scale == 0.0:
        return p
    return MultiPoly(p.n, {k: c for k, c in p.terms() if abs(float(c)) > rel * scale})


def _even_monomials(n: int, degree: int) -> list[MultiPoly]:
    """All monomials ``x^alpha y^{2j}`` of total degree ``degree``."""
    out = []
    for j in range(degree // 2 + 1):
        for alpha in multi_indices(n, degree - 2 * j):
            out.append(MultiPoly.monomial(n, list(alpha) + [2 * j]))
    return out


def _sphere_fit(
    source: FieldLike,
    center: NDArray[np.float64],
    rho: float,
    degree: int,
    basis: list[MultiPoly],
    a: float,
    order: int,
) -> tuple[NDArray[np.float64], float]:
    """Weighted least squares of ``u(x0 + rho X) / rho^degree`` on the unit sphere; returns coefficients, misfit."""
    rule = sphere_rule(source.n, a, order)
    data = source.values(rule.nodes_at(center, rho)) / rho**degree
    design = np.stack([b.values(rule.points) for b in basis], axis=1)
    root = np.sqrt(rule.weights)
    coef, *_ = np.linalg.lstsq(design * root[:, None], data * root, rcond=None)
    misfit = float(np.linalg.norm((design @ coef - data) * root) / max(float(np.linalg.norm(data * root)), 1e-300))
    return coef, misfit


def _richardson_fit(
    source: FieldLike,
    center: NDArray[np.float64],
    rho: float,
    degree: int,
    basis: list[MultiPoly],
    a: float,
    order: int,
) -> tuple[MultiPoly, float]:
    # next-order terms have the opposite parity and integrate out, so the error is O(rho^2)
    coarse, _ = _sphere_fit(source, center, rho, degree, basis, a, order)
    fine, misfit = _sphere_fit(source, center, rho / 2.0, degree, basis, a, order)
    coef = (4.0 * fine - coarse) / 3.0
    poly = sum_polys(source.n, [b * float(c) for b, c in zip(basis, coef)])
    return _chop(poly), misfit


def _center(n: int, center: Sequence[float] | None) -> NDArray[np.float64]:
    out = np.zeros(n)
    if center is not None:
        given = np.asarray(center, dtype=float)[:n]
        out[: given.size] = given
    return out


def _field_inner(q: FieldLike | MultiPoly, p: MultiPoly, a: float, order: int = 24) -> float:
    if isinstance(q, MultiPoly):
        return sphere_inner(q, p, a)
    rule = sphere_rule(p.n, a, order)
    return rule.integrate(q.values(rule.points) * p.values(rule.points))


def _field_norm_sq(q: FieldLike | MultiPoly, a: float, order: int = 24) -> float:
    if isinstance(q, MultiPoly):
        return sphere_norm_sq(q, a)
    rule = sphere_rule(q.n, a, order)
    return rule.integrate(q.values(rule.points) ** 2)


@dataclass(slots=True)
class FirstBlowup:
    center: list[float]
    frequency: FrequencyEstimate
    kappa: int | None
    p_star: MultiPoly | None
    fit_residual: float | None = None
    membership: MembershipVerdict | None = None
    confident: bool = True
    notice: str | None = None

    @property
    def ok(self) -> bool:
        return self.kappa is not None and self.p_star is not None

    def to_payload(self) -> dict[str, Any]:
        return {
            "center": self.center,
            "frequency": self.frequency.to_event(),
            "kappa": self.kappa,
            "p_star": None if self.p_star is None else self.p_star.to_text(),
            "fit_residual": self.fit_residual,
            "membership": None if self.membership is None else self.membership.to_payload(),
            "confident": self.confident,
            "notice": self.notice,
        }


def first_blowup(
    source: FieldLike | MultiPoly,
    a: float,
    center: Sequence[float] | None = None,
    *,
    radii: Sequence[float] | NDArray[np.float64] | None = None,
    rho: float | None = None,
    order: int = 16,
    seed: int = 0,
) -> FirstBlowup:
    """kappa from the frequency at ``0+`` (snapped to an even integer) and ``p*`` fitted over the P_kappa basis.

    ``seed`` drives the thin-sphere samples of the membership check.
    """
    fieldlike = as_field(source)
    x0 = _center(fieldlike.n, center)
    estimate = frequency_at_zero(profile(fieldlike, a, x0, radii, order=order))
    nearest = 2 * round(estimate.value / 2.0)
    if nearest < 2 or abs(estimate.value - nearest) > KAPPA_SNAP:
        notice = f"not a singular point: N(0+)={estimate.value:.4f} is not within {KAPPA_SNAP} of an even integer"
        logger.warning("blowup.first.not_singular", center=x0.tolist(), frequency=estimate.value)
        return FirstBlowup(center=x0.tolist(), frequency=estimate, kappa=None, p_star=None, notice=notice)

    kappa = int(nearest)
    basis = pkappa_basis(fieldlike.n, kappa, float(a))
    p_star, misfit = _richardson_fit(fieldlike, x0, rho or _default_rho(fieldlike), kappa, basis, a, order)
    verdict = is_in_P_kappa(p_star, kappa, a, seed=seed, tol=1e-6)
    confident = estimate.confident and misfit <= FIT_TOL
    notice = None
    if not verdict.member:
        notice = f"fitted polynomial fails P_kappa membership: {', '.join(verdict.failures)}"
    elif not confident:
        notice = "low confidence: frequency fit or blow-up fit residual above threshold"
    result = FirstBlowup(
        center=x0.tolist(),
        frequency=estimate,
        kappa=kappa,
        p_star=p_star,
        fit_residual=misfit,
        membership=verdict,
        confident=confident,
        notice=notice,
    )
    logger.info("blowup.first", center=x0.tolist(), kappa=kappa, p_star=p_star.to_text(), fit_residual=misfit)
    return result


@dataclass(slots=True)
class Classification:
    case: str
    residuals: dict[str, float] = field(default_factory=dict)

    def to_payload(self) -> dict[str, Any]:
        return {"case": self.case, "residuals": dict(self.residuals)}


def _spine_normal(basis: SpineBasis) -> NDArray[np.float64]:
    complement = null_space(basis.vectors) if basis.dim else np.eye(basis.n)
    return np.asarray(complement[:, 0])


def _spine_samples(basis: SpineBasis, count: int = 13) -> NDArray[np.float64]:
    s = np.linspace(-0.9, 0.9, count)
    s = s[np.abs(s) >= 0.2]
    if basis.dim == 1:
        return np.asarray(s[:, None] * basis.vectors[0][None, :])
    grids = np.meshgrid(*([s] * basis.dim), indexing="ij")
    coords = np.stack([g.ravel() for g in grids], axis=1)
    coords = coords[np.linalg.norm(coords, axis=1) <= 0.9]
    return np.asarray(coords @ basis.vectors)


def classify_second_blowup(
    q: FieldLike | MultiPoly,
    spine_basis: SpineBasis,
    a: float,
    kappa: int,
    *,
    tol: float = FIT_TOL,
    eps: float = 1e-3,
) -> Classification:
    """Polynomial when ``q`` is a homogeneous a-harmonic polynomial; very thin solution when ``a < 0``, the spine
    has dimension ``n - 1`` and the complementarity system holds on it; unclassified otherwise."""
    residuals: dict[str, float] = {}
    polynomial = False
    if isinstance(q, MultiPoly):
        if not q.is_homogeneous():
            residuals["homogeneity"] = 1.0
            return Classification(case="unclassified", residuals=residuals)
        scale = max(q.max_abs_coeff(), 1e-300)
        harmonic = la_residual(q, a).max_abs_coeff() / scale if q.even_in_y else 1.0
        residuals["la_residual"] = float(harmonic)
        polynomial = harmonic <= tol

    n = spine_basis.n
    very_thin = False
    if a < 0 and spine_basis.dim == n - 1 and not spine_basis.degenerate:
        fieldlike = as_field(q)
        points = _spine_samples(spine_basis) if n > 1 else np.zeros((1, 1))
        rule = sphere_rule(n, a, 12)
        scale = max(float(np.abs(fieldlike.values(rule.points)).max()), 1e-300)
        on_spine = np.hstack([points, np.zeros((points.shape[0], 1))])
        values = fieldlike.values(on_spine)
        flux = f_a_flux(fieldlike, points, a, eps=eps, normal=_spine_normal(spine_basis))
        residuals["min_on_spine"] = float(values.min() / scale)
        residuals["max_flux"] = float(flux.max() / scale)
        residuals["complementarity"] = float(np.abs(values * flux).max() / scale**2)
        very_thin = (
            residuals["min_on_spine"] >= -tol and residuals["max_flux"] <= tol and residuals["complementarity"] <= tol
        )

    if polynomial:
        case = "polynomial"
    elif very_thin:
        case = "very_thin_solution"
    else:
        case = "unclassified"
    logger.debug("blowup.classified", case=case, kappa=kappa, residuals=residuals)
    return Classification(case=case, residuals=residuals)


@dataclass(slots=True)
class NxtFlags:
    polynomial_next: bool
    derivatives_vanish: bool | None = None
    norm_matches: bool | None = None
    norm_gap: float | None = None

    @property
    def member(self) -> bool:
        return bool(self.polynomial_next and self.derivatives_vanish and self.norm_matches)

    def to_payload(self) -> dict[str, Any]:
        return {
            "polynomial_next": self.polynomial_next,
            "derivatives_vanish": self.derivatives_vanish,
            "norm_matches": self.norm_matches,
            "norm_gap": self.norm_gap,
            "member": self.member,
        }


@dataclass(slots=True)
class BlowupReport:
    center: list[float]
    a: float
    kappa: int
    p_star: MultiPoly
    spine: SpineBasis
    case: str
    lambda_star: float | None = None
    lambda_error: float | None = None
    q: MultiPoly | None = None
    q_profile: FieldLike | None = field(default=None, repr=False)
    residuals: dict[str, float] = field(default_factory=dict)
    orthogonality: dict[str, float] = field(default_factory=dict)
    probes: list[float] = field(default_factory=list)
    h_next_at_zero: float | None = None
    q_norm_sq: float | None = None
    nxt: NxtFlags | None = None
    notice: str | None = None

    @property
    def m(self) -> int:
        return self.spine.dim

    @property
    def gap(self) -> float | None:
        return None if self.lambda_star is None else self.lambda_star - self.kappa

    @property
    def stratum(self) -> str:
        """``anomalous`` for lambda* in [kappa, kappa+1), ``generic`` above, ``boundary`` near kappa+1."""
        if self.case == "degenerate" or self.lambda_star is None:
            return "degenerate"
        snapped = self.case == "polynomial" and self.q is not None and self.q.degree() == self.kappa + 1
        if abs(self.lambda_star - (self.kappa + 1)) < BOUNDARY_BAND and not snapped:
            return "boundary"
        if snapped:
            return "generic"
        return "anomalous" if self.lambda_star < self.kappa + 1 else "generic"

    def to_payload(self) -> dict[str, Any]:
        return {
            "center": self.center,
            "a": self.a,
            "kappa": self.kappa,
            "p_star": self.p_star.to_text(),
            "m": self.m,
            "spine": self.spine.to_payload(),
            "case": self.case,
            "stratum": self.stratum,
            "lambda_star": self.lambda_star,
            "lambda_error": self.lambda_error,
            "gap": self.gap,
            "q": None if self.q is None else self.q.to_text(),
            "residuals": dict(self.residuals),
            "orthogonality": dict(self.orthogonality),
            "probes": list(self.probes),
            "h_next_at_zero": self.h_next_at_zero,
            "q_norm_sq": self.q_norm_sq,
            "nxt": None if self.nxt is None else self.nxt.to_payload(),
            "notice": self.notice,
        }


def lambda_window(source: FieldLike, kappa: int, count: int = 10) -> NDArray[np.float64]:
    """Radii for the homogeneity fit: ``[4 h kappa, 0.3]`` on grids, ``[0.01, 0.1]`` for analytic fields."""
    grid_field = as_scalar_field(source)
    if grid_field is None:
        return np.geomspace(0.01, 0.1, count)
    lo = 4.0 * grid_field.grid.h * kappa
    hi = 0.3 * grid_field.grid.spec.half_width
    if lo >= hi:
        lo = hi / 4.0
    return np.geomspace(lo, hi, count)


def homogeneity_fit(radii: NDArray[np.float64], h_values: NDArray[np.float64]) -> tuple[float, float]:
    """``lambda*`` from local log-log slopes of H extrapolated in ``r^2``; jackknife standard error."""
    log_r = np.log(radii)
    log_h = np.log(h_values)
    slopes = np.diff(log_h) / np.diff(log_r)
    mids = np.exp((log_r[1:] + log_r[:-1]) / 2.0) ** 2

    def intercept(mask: NDArray[np.bool_]) -> float:
        if mask.sum() < 2:
            return float(slopes[mask].mean() / 2.0)
        _, b = np.polyfit(mids[mask], slopes[mask], 1)
        return float(b / 2.0)

    everything = np.ones(slopes.size, dtype=bool)
    value = intercept(everything)
    if slopes.size < 3:
        return value, float("nan")
    leave_one_out = []
    for i in range(slopes.size):
        mask = everything.copy()
        mask[i] = False
        leave_one_out.append(intercept(mask))
    jack = np.asarray(leave_one_out)
    error = float(np.sqrt((jack.size - 1) / jack.size * np.sum((jack - jack.mean()) ** 2)))
    return value, error


def _extrapolate_r2(radii: NDArray[np.float64], values: NDArray[np.float64], window: int = 5) -> float:
    count = min(window, radii.size)
    _, b = np.polyfit(radii[:count] ** 2, values[:count], 1)
    return float(b)


def _rescaled(v: FieldLike, center: NDArray[np.float64], rho: float, norm: float) -> AnalyticField:
    shift = np.append(center, 0.0)
    return AnalyticField(
        n=v.n,
        value_fn=lambda pts: v.values(shift + rho * pts) / norm,
        gradient_fn=lambda pts: rho * v.gradients(shift + rho * pts) / norm,
        label=f"v(x0 + {rho:g} X)/{norm:.3g}",
    )


def second_blowup(
    source: FieldLike | MultiPoly,
    a: float,
    first: FirstBlowup,
    *,
    radii: Sequence[float] | NDArray[np.float64] | None = None,
    rho: float | None = None,
    order: int = 16,
) -> BlowupReport:
    """Homogeneity, limit profile and classification of the remainder ``u - p*(. - x0)``."""
    if not first.ok or first.kappa is None or first.p_star is None:
        raise ValueError("second blow-up needs a successful first blow-up")
    fieldlike = as_field(source)
    n = fieldlike.n
    kappa = first.kappa
    p_star = first.p_star
    x0 = np.asarray(first.center, dtype=float)
    remainder = ResidualField(base=fieldlike, poly=p_star, center=tuple(x0.tolist()))
    basis = spine(p_star)
    rho = rho or _default_rho(fieldlike)
    report = BlowupReport(center=first.center, a=float(a), kappa=kappa, p_star=p_star, spine=basis, case="degenerate")

    h_field = sphere_H(fieldlike, x0, np.array([rho]), a, order)[0]
    h_rem = sphere_H(remainder, x0, np.array([rho]), a, order)[0]
    if np.sqrt(max(h_rem, 0.0)) < NOISE_FLOOR * max(np.sqrt(h_field), 1e-300):
        report.notice = "remainder below noise floor: field coincides with p*"
        logger.info("blowup.second.degenerate", center=first.center, kappa=kappa)
        return report

    window = lambda_window(fieldlike, kappa) if radii is None else np.asarray(radii, dtype=float)
    h_values = sphere_H(remainder, x0, window, a, order)
    lam, lam_err = homogeneity_fit(window, h_values)
    report.lambda_star = lam
    report.lambda_error = lam_err
    h_next = h_values / window ** (2.0 * (kappa + 1))
    report.h_next_at_zero = _extrapolate_r2(window, h_next)

    degree = int(round(lam))
    polynomial_q: MultiPoly | None = None
    if degree >= 1 and abs(lam - degree) <= LAMBDA_SNAP:
        polynomial_q, misfit = _richardson_fit(
            remainder, x0, rho, degree, _even_monomials(n, degree), a, order
        )
        report.residuals["q_fit"] = misfit
        if misfit > FIT_TOL:
            polynomial_q = None

    norm = float(np.sqrt(h_rem))
    q_profile: FieldLike | MultiPoly = polynomial_q if polynomial_q is not None else _rescaled(remainder, x0, rho, norm)
    verdict = classify_second_blowup(q_profile, basis, a, kappa)
    report.case = verdict.case
    report.residuals.update(verdict.residuals)
    if verdict.case == "polynomial" and polynomial_q is not None:
        report.q = polynomial_q
        report.q_norm_sq = sphere_norm_sq(polynomial_q, a)
    report.q_profile = as_field(q_profile)

    q_norm = float(np.sqrt(_field_norm_sq(q_profile, a)))
    p_norm = float(np.sqrt(sphere_norm_sq(p_star, a)))
    if q_norm > 0.0 and p_norm > 0.0:
        # competitors 2p* and p*/2 of P_kappa
        report.orthogonality = {
            "q_p_star": _field_inner(q_profile, p_star, a) / (q_norm * p_norm),
            "q_2p_minus_p": _field_inner(q_profile, p_star * 2.0 - p_star, a) / q_norm,
            "q_half_p_minus_p": _field_inner(q_profile, p_star * 0.5 - p_star, a) / q_norm,
        }
        report.probes = [_field_inner(q_profile, probe, a) / q_norm for probe in probe_set(n, kappa, a)]
    if report.case == "very_thin_solution" and report.gap is not None and report.gap < GAP_MARGIN:
        report.notice = f"very thin second blow-up with gap {report.gap:.3f} below {GAP_MARGIN}"
    logger.info(
        "blowup.second",
        center=first.center,
        kappa=kappa,
        lambda_star=lam,
        lambda_error=lam_err,
        case=report.case,
        stratum=report.stratum,
    )
    return report


def nxt_membership(report: BlowupReport, *, tol: float = 1e-2) -> NxtFlags:
    """(i) polynomial second blow-up of degree kappa+1; (ii) ``D^alpha q = 0`` on the spine for
    ``|alpha| <= kappa - 2``; (iii) ``||q||^2 = H_{kappa+1}(0+)``."""
    q = report.q
    lam = report.lambda_star
    first = (
        report.case == "polynomial"
        and q is not None
        and lam is not None
        and abs(lam - (report.kappa + 1)) <= LAMBDA_SNAP
        and q.is_homogeneous(report.kappa + 1)
    )
    if not first or q is None:
        flags = NxtFlags(polynomial_next=False)
        report.nxt = flags
        return flags

    scale = max(q.max_abs_coeff(), 1e-300)
    vanish = True
    n = q.n
    for order in range(report.kappa - 1):
        for alpha in multi_indices(n, order):
            derived = q
            for index, count in enumerate(alpha):
                for _ in range(count):
                    derived = derived.derivative(index)
            if derived.is_zero():
                continue
            if report.spine.dim == 0:
                restricted_zero = abs(float(derived.values(np.zeros((1, n + 1)))[0])) <= tol * scale
            else:
                restricted_zero = derived.restrict_to_subspace(report.spine.vectors).is_zero(tol * scale)
            if not restricted_zero:
                vanish = False
                break
        if not vanish:
            break

    norm_sq = report.q_norm_sq if report.q_norm_sq is not None else sphere_norm_sq(q, report.a)
    h_next = report.h_next_at_zero if report.h_next_at_zero is not None else float("nan")
    gap = abs(norm_sq - h_next)
    flags = NxtFlags(
        polynomial_next=True,
        derivatives_vanish=vanish,
        norm_matches=bool(gap <= tol * max(1.0, abs(h_next))),
        norm_gap=float(gap),
    )
    report.nxt = flags
    logger.info("blowup.nxt", center=report.center, **flags.to_payload())
    return flags
