from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Iterable, Iterator, Mapping, Sequence

import numpy as np
from numpy.typing import NDArray

Monomial = tuple[int, ...]
Coeff = float | Fraction

_TERM_BODY = re.compile(
    r"^(?P<coef>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?(?:/\d+)?)?\*?(?P<mono>(?:(?:x\d+|y)(?:\^\d+)?)*)$"
)
_FACTOR = re.compile(r"(x(\d+)|y)(?:\^(\d+))?")


def _is_zero(value: Coeff) -> bool:
    return value == 0


def _split_terms(text: str) -> list[str]:
    terms: list[str] = []
    start = 0
    for idx, char in enumerate(text):
        if char in "+-" and idx > start and text[idx - 1] not in "eE^*/":
            terms.append(text[start:idx])
            start = idx
    terms.append(text[start:])
    return [term for term in terms if term]


def _format_coeff(value: Coeff) -> str:
    if isinstance(value, Fraction):
        return str(value)
    return repr(float(value))


@dataclass(frozen=True, slots=True)
class MultiPoly:
    """Sparse polynomial in ``(x1, ..., xn, y)``.

    Keys are exponent tuples of length ``n + 1`` with the y exponent last. Coefficients are
    floats, or :class:`fractions.Fraction` in exact mode. Zero coefficients are never stored.
    """

    n: int
    coeffs: Mapping[Monomial, Coeff] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"Unsupported thin dimension n={self.n}; expected n >= 1")
        cleaned: dict[Monomial, Coeff] = {}
        for key, value in self.coeffs.items():
            mono = tuple(int(e) for e in key)
            if len(mono) != self.n + 1 or any(e < 0 for e in mono):
                raise ValueError(f"Invalid exponent tuple {key!r} for n={self.n}")
            if not _is_zero(value):
                cleaned[mono] = value
        object.__setattr__(self, "coeffs", cleaned)

    # construction -------------------------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> MultiPoly:
        return cls(n, {})

    @classmethod
    def constant(cls, n: int, value: Coeff) -> MultiPoly:
        return cls(n, {(0,) * (n + 1): value})

    @classmethod
    def monomial(cls, n: int, exponents: Sequence[int], coeff: Coeff = 1.0) -> MultiPoly:
        exps = tuple(exponents)
        if len(exps) == n:
            exps = exps + (0,)
        return cls(n, {exps: coeff})

    @classmethod
    def variable(cls, n: int, index: int, coeff: Coeff = 1.0) -> MultiPoly:
        """``index`` in ``0..n-1`` selects ``x_{index+1}``; ``index == n`` selects ``y``."""
        exps = [0] * (n + 1)
        exps[index] = 1
        return cls(n, {tuple(exps): coeff})

    @classmethod
    def from_text(cls, text: str, n: int, *, exact: bool = False) -> MultiPoly:
        compact = "".join(text.split())
        if not compact:
            raise ValueError("empty polynomial text")
        if compact in {"0", "+0", "-0"}:
            return cls.zero(n)
        acc: dict[Monomial, Coeff] = {}
        for raw in _split_terms(compact):
            sign = -1 if raw.startswith("-") else 1
            body = raw.lstrip("+-")
            match = _TERM_BODY.match(body)
            if match is None or not body:
                raise ValueError(f"invalid polynomial term: {raw!r}")
            coef_text = match.group("coef")
            mono_text = match.group("mono")
            if coef_text is None and not mono_text:
                raise ValueError(f"invalid polynomial term: {raw!r}")
            exact_coef = Fraction(coef_text) if coef_text else Fraction(1)
            coef: Coeff = sign * exact_coef if exact else float(sign * exact_coef)
            exps = [0] * (n + 1)
            consumed = 0
            for factor in _FACTOR.finditer(mono_text):
                if factor.start() != consumed:
                    raise ValueError(f"invalid monomial: {mono_text!r}")
                consumed = factor.end()
                power = int(factor.group(3)) if factor.group(3) else 1
                if factor.group(1) == "y":
                    exps[n] += power
                else:
                    index = int(factor.group(2))
                    if not 1 <= index <= n:
                        raise ValueError(f"variable x{index} out of range for n={n}")
                    exps[index - 1] += power
            if consumed != len(mono_text):
                raise ValueError(f"invalid monomial: {mono_text!r}")
            key = tuple(exps)
            acc[key] = acc.get(key, 0) + coef
        return cls(n, acc)

    @classmethod
    def from_json(cls, payload: Mapping[str, Any]) -> MultiPoly:
        n = int(payload["n"])
        exact = bool(payload.get("exact", False))
        terms: dict[Monomial, Coeff] = {}
        for term in payload.get("terms", []):
            raw = term["coeff"]
            coef: Coeff = Fraction(str(raw)) if exact else float(Fraction(str(raw)))
            terms[tuple(int(e) for e in term["exponents"])] = coef
        return cls(n, terms)

    # inspection ---------------------------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return any(isinstance(v, Fraction) for v in self.coeffs.values())

    @property
    def even_in_y(self) -> bool:
        return all(key[-1] % 2 == 0 for key in self.coeffs)

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(float(v)) <= tol for v in self.coeffs.values())

    def degree(self) -> int:
        return max((sum(key) for key in self.coeffs), default=-1)

    def degrees(self) -> set[int]:
        return {sum(key) for key in self.coeffs}

    def is_homogeneous(self, degree: int | None = None) -> bool:
        found = self.degrees()
        if not found:
            return True
        if len(found) != 1:
            return False
        return degree is None or found == {degree}

    def max_abs_coeff(self) -> float:
        return max((abs(float(v)) for v in self.coeffs.values()), default=0.0)

    def terms(self) -> Iterator[tuple[Monomial, Coeff]]:
        yield from sorted(self.coeffs.items(), key=lambda item: (-sum(item[0]), tuple(-e for e in item[0])))

    def coefficient(self, exponents: Sequence[int]) -> Coeff:
        return self.coeffs.get(tuple(exponents), 0.0)

    def allclose(self, other: MultiPoly, tol: float = 1e-12) -> bool:
        return (self - other).is_zero(tol)

    # algebra ------------------------------------------------------------------------

    def _check(self, other: MultiPoly) -> None:
        if other.n != self.n:
            raise ValueError(f"dimension mismatch: n={self.n} vs n={other.n}")

    def __add__(self, other: MultiPoly | Coeff) -> MultiPoly:
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(self.n, other)
        self._check(other)
        acc: dict[Monomial, Coeff] = dict(self.coeffs)
        for key, value in other.coeffs.items():
            acc[key] = acc.get(key, 0) + value
        return MultiPoly(self.n, acc)

    def __radd__(self, other: Coeff) -> MultiPoly:
        return self + other

    def __neg__(self) -> MultiPoly:
        return MultiPoly(self.n, {key: -value for key, value in self.coeffs.items()})

    def __sub__(self, other: MultiPoly | Coeff) -> MultiPoly:
        return self + (-other)

    def __rsub__(self, other: Coeff) -> MultiPoly:
        return (-self) + other

    def __mul__(self, other: MultiPoly | Coeff) -> MultiPoly:
        if not isinstance(other, MultiPoly):
            return MultiPoly(self.n, {key: value * other for key, value in self.coeffs.items()})
        self._check(other)
        acc: dict[Monomial, Coeff] = {}
        for (k1, v1), (k2, v2) in product(self.coeffs.items(), other.coeffs.items()):
            key = tuple(e1 + e2 for e1, e2 in zip(k1, k2))
            acc[key] = acc.get(key, 0) + v1 * v2
        return MultiPoly(self.n, acc)

    def __rmul__(self, other: Coeff) -> MultiPoly:
        return self * other

    def __pow__(self, power: int) -> MultiPoly:
        if power < 0:
            raise ValueError("negative powers are not polynomials")
        unit: Coeff = Fraction(1) if self.is_exact else 1.0
        result = MultiPoly.constant(self.n, unit)
        for _ in range(power):
            result = result * self
        return result

    def derivative(self, index: int) -> MultiPoly:
        acc: dict[Monomial, Coeff] = {}
        for key, value in self.coeffs.items():
            if key[index] == 0:
                continue
            new = list(key)
            new[index] -= 1
            acc[tuple(new)] = value * key[index]
        return MultiPoly(self.n, acc)

    def laplacian_x(self) -> MultiPoly:
        result = MultiPoly.zero(self.n)
        for i in range(self.n):
            result = result + self.derivative(i).derivative(i)
        return result

    def laplacian(self) -> MultiPoly:
        return self.laplacian_x() + self.derivative(self.n).derivative(self.n)

    def divide_by_y(self) -> MultiPoly:
        if any(key[-1] == 0 for key in self.coeffs):
            raise ValueError("polynomial is not divisible by y")
        return MultiPoly(self.n, {key[:-1] + (key[-1] - 1,): value for key, value in self.coeffs.items()})

    def restrict_thin(self) -> MultiPoly:
        """Trace on ``{y = 0}``, kept as a polynomial with zero y exponents."""
        return MultiPoly(self.n, {key: value for key, value in self.coeffs.items() if key[-1] == 0})

    def even_part_in_y(self) -> MultiPoly:
        return MultiPoly(self.n, {key: value for key, value in self.coeffs.items() if key[-1] % 2 == 0})

    def homogeneous_part(self, degree: int) -> MultiPoly:
        return MultiPoly(self.n, {key: value for key, value in self.coeffs.items() if sum(key) == degree})

    def homogeneous_parts(self) -> dict[int, MultiPoly]:
        return {degree: self.homogeneous_part(degree) for degree in sorted(self.degrees())}

    def dilate(self, factor: Coeff) -> MultiPoly:
        """``X -> p(factor * X)``."""
        return MultiPoly(self.n, {key: value * factor ** sum(key) for key, value in self.coeffs.items()})

    def translate(self, center: Sequence[Coeff]) -> MultiPoly:
        """``X -> p(center + X)``; a thin-space ``center`` of length ``n`` gets ``y = 0``."""
        shift = list(center)
        if len(shift) == self.n:
            shift.append(0)
        if len(shift) != self.n + 1:
            raise ValueError(f"center has {len(shift)} coordinates; expected {self.n} or {self.n + 1}")
        unit: Coeff = Fraction(1) if self.is_exact else 1.0
        shifted_vars = [MultiPoly.variable(self.n, i, unit) + shift[i] for i in range(self.n + 1)]
        result = MultiPoly.zero(self.n)
        for key, value in self.coeffs.items():
            term = MultiPoly.constant(self.n, value)
            for i, power in enumerate(key):
                if power:
                    term = term * shifted_vars[i] ** power
            result = result + term
        return result

    def restrict_to_subspace(self, basis: NDArray[np.float64]) -> MultiPoly:
        """Pull back the thin trace along ``x = basis.T @ t``; returns a polynomial in ``t`` (m variables).

        ``basis`` has shape ``(m, n)``. The result lives in ``m`` thin variables with no y dependence.
        """
        vectors = np.atleast_2d(np.asarray(basis, dtype=float))
        m = vectors.shape[0]
        if m == 0:
            raise ValueError("empty basis")
        images = []
        for i in range(self.n):
            image = MultiPoly.zero(m)
            for j in range(m):
                image = image + MultiPoly.variable(m, j, float(vectors[j, i]))
            images.append(image)
        result = MultiPoly.zero(m)
        for key, value in self.restrict_thin().coeffs.items():
            term = MultiPoly.constant(m, float(value))
            for i, power in enumerate(key[:-1]):
                if power:
                    term = term * images[i] ** power
            result = result + term
        return result

    def as_float(self) -> MultiPoly:
        return MultiPoly(self.n, {key: float(value) for key, value in self.coeffs.items()})

    def as_exact(self) -> MultiPoly:
        return MultiPoly(self.n, {key: Fraction(value) for key, value in self.coeffs.items()})

    # evaluation ---------------------------------------------------------------------

    def values(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] == self.n:
            pts = np.hstack([pts, np.zeros((pts.shape[0], 1))])
        if pts.shape[1] != self.n + 1:
            raise ValueError(f"points have {pts.shape[1]} columns; expected {self.n + 1}")
        out = np.zeros(pts.shape[0])
        if not self.coeffs:
            return out
        top = max(max(key) for key in self.coeffs)
        powers = [np.vander(pts[:, i], top + 1, increasing=True) for i in range(self.n + 1)]
        for key, value in self.coeffs.items():
            term = np.full(pts.shape[0], float(value))
            for i, power in enumerate(key):
                if power:
                    term = term * powers[i][:, power]
            out += term
        return out

    def gradients(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.stack([self.derivative(i).values(pts) for i in range(self.n + 1)], axis=1)

    def __call__(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        return self.values(points)

    # text and json ------------------------------------------------------------------

    def to_text(self) -> str:
        if not self.coeffs:
            return "0"
        names = [f"x{i + 1}" for i in range(self.n)] + ["y"]
        chunks: list[str] = []
        for idx, (key, value) in enumerate(self.terms()):
            negative = float(value) < 0
            magnitude = -value if negative else value
            factors = [name if power == 1 else f"{name}^{power}" for name, power in zip(names, key) if power]
            body = _format_coeff(magnitude)
            if factors:
                body = f"{body} * {' '.join(factors)}"
            if idx == 0:
                chunks.append(f"-{body}" if negative else body)
            else:
                chunks.append(f"{'-' if negative else '+'} {body}")
        return " ".join(chunks)

    def to_json(self) -> dict[str, Any]:
        exact = self.is_exact
        return {
            "n": self.n,
            "exact": exact,
            "text": self.to_text(),
            "terms": [
                {"exponents": list(key), "coeff": str(value) if exact else float(value)} for key, value in self.terms()
            ],
        }

    def __str__(self) -> str:
        return self.to_text()


def multi_indices(n: int, degree: int) -> list[tuple[int, ...]]:
    """All exponent tuples of length ``n`` with total ``degree``, in lexicographic descending order."""
    if n == 1:
        return [(degree,)]
    out: list[tuple[int, ...]] = []
    for first in range(degree, -1, -1):
        for rest in multi_indices(n - 1, degree - first):
            out.append((first,) + rest)
    return out


def sum_polys(n: int, polys: Iterable[MultiPoly]) -> MultiPoly:
    total = MultiPoly.zero(n)
    for poly in polys:
        total = total + poly
    return total


def binomial(top: int, bottom: int) -> int:
    return math.comb(top, bottom)
