"""Exact truncated graded series in q, beta, t_1..t_n and tbar_1..tbar_n

A monomial is q^qdeg * beta^bdeg * prod t_k^a_k * prod tbar_k^b_k with
exponent vectors of fixed length ``nvars``. Coefficients are Fractions;
zero coefficients are never stored and every stored monomial has
qdeg <= D. Series values are treated as immutable.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Tuple, Union

from src.errors import InvalidArgumentError

Number = Union[int, Fraction]


@dataclass(frozen=True, order=True)
class Monomial:
    """Exponents of q, beta, t_k (a) and tbar_k (b); a[k-1] is the power of t_k"""

    qdeg: int
    bdeg: int
    a: Tuple[int, ...]
    b: Tuple[int, ...]

    @property
    def t_weight(self) -> int:
        """sum_k k*a_k"""
        return sum((k + 1) * e for k, e in enumerate(self.a))

    @property
    def tbar_weight(self) -> int:
        return sum((k + 1) * e for k, e in enumerate(self.b))

    def is_graded(self) -> bool:
        return self.t_weight == self.qdeg == self.tbar_weight

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial(
            self.qdeg + other.qdeg,
            self.bdeg + other.bdeg,
            tuple(x + y for x, y in zip(self.a, other.a)),
            tuple(x + y for x, y in zip(self.b, other.b)),
        )

    def __str__(self) -> str:
        factors = []
        if self.qdeg:
            factors.append("q" if self.qdeg == 1 else f"q^{self.qdeg}")
        if self.bdeg:
            factors.append("b" if self.bdeg == 1 else f"b^{self.bdeg}")
        for name, exps in (("t", self.a), ("tb", self.b)):
            for k, e in enumerate(exps, start=1):
                if e:
                    factors.append(f"{name}{k}" if e == 1 else f"{name}{k}^{e}")
        return "*".join(factors) if factors else "1"


def _vector(nvars: int, exponents: Optional[Dict[int, int]]) -> Tuple[int, ...]:
    vec = [0] * nvars
    for k, e in (exponents or {}).items():
        if not 1 <= k <= nvars:
            raise InvalidArgumentError(f"Variable index {k} outside 1..{nvars}")
        if e < 0:
            raise InvalidArgumentError(f"Negative exponent {e}")
        vec[k - 1] = e
    return tuple(vec)


@dataclass(frozen=True)
class GradedSeries:
    """Truncated series with exact coefficients, q-degree <= D"""

    D: int
    nvars: int
    terms: Dict[Monomial, Fraction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.D < 0:
            raise InvalidArgumentError(f"Truncation must be >= 0, got {self.D}")
        if self.nvars < 1:
            raise InvalidArgumentError(f"nvars must be >= 1, got {self.nvars}")

    # construction

    @classmethod
    def from_terms(
        cls, D: int, nvars: int, items: Iterable[Tuple[Monomial, Number]]
    ) -> "GradedSeries":
        """Accumulate terms, dropping zeros and anything above q-degree D"""
        acc: Dict[Monomial, Fraction] = defaultdict(Fraction)
        for mono, coeff in items:
            if mono.qdeg <= D and coeff:
                acc[mono] += Fraction(coeff)
        return cls(D, nvars, {m: c for m, c in acc.items() if c})

    @classmethod
    def zero(cls, D: int, nvars: Optional[int] = None) -> "GradedSeries":
        return cls(D, nvars or max(D, 1), {})

    @classmethod
    def constant(cls, D: int, value: Number, nvars: Optional[int] = None) -> "GradedSeries":
        n = nvars or max(D, 1)
        return cls.from_terms(D, n, [(cls.unit_monomial(n), value)])

    @classmethod
    def one(cls, D: int, nvars: Optional[int] = None) -> "GradedSeries":
        return cls.constant(D, 1, nvars)

    @staticmethod
    def unit_monomial(nvars: int) -> Monomial:
        return Monomial(0, 0, (0,) * nvars, (0,) * nvars)

    @classmethod
    def monomial(
        cls,
        D: int,
        coeff: Number = 1,
        qdeg: int = 0,
        bdeg: int = 0,
        t: Optional[Dict[int, int]] = None,
        tbar: Optional[Dict[int, int]] = None,
        nvars: Optional[int] = None,
    ) -> "GradedSeries":
        """Single term, e.g. monomial(2, 1, qdeg=1, t={1: 1}, tbar={1: 1}) = q*t1*tb1"""
        n = nvars or max(D, 1)
        mono = Monomial(qdeg, bdeg, _vector(n, t), _vector(n, tbar))
        return cls.from_terms(D, n, [(mono, coeff)])

    # inspection

    def coefficient(self, mono: Monomial) -> Fraction:
        return self.terms.get(mono, Fraction(0))

    def coeff(
        self,
        qdeg: int,
        bdeg: int = 0,
        t: Optional[Dict[int, int]] = None,
        tbar: Optional[Dict[int, int]] = None,
    ) -> Fraction:
        """Coefficient lookup by exponent dicts"""
        mono = Monomial(qdeg, bdeg, _vector(self.nvars, t), _vector(self.nvars, tbar))
        return self.coefficient(mono)

    def items(self) -> List[Tuple[Monomial, Fraction]]:
        """Terms in canonical order (qdeg, bdeg, a, b)"""
        return sorted(self.terms.items())

    def __iter__(self) -> Iterator[Monomial]:
        return iter(sorted(self.terms))

    def __len__(self) -> int:
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def min_qdeg(self) -> Optional[int]:
        return min((m.qdeg for m in self.terms), default=None)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GradedSeries):
            return NotImplemented
        return self.D == other.D and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.D, frozenset(self.terms.items())))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"({c})*{m}" for m, c in self.items())

    # ring operations

    def _compatible(self, other: "GradedSeries") -> int:
        if self.D != other.D:
            raise InvalidArgumentError(f"Truncation mismatch: {self.D} vs {other.D}")
        if self.nvars != other.nvars:
            raise InvalidArgumentError(f"Variable count mismatch: {self.nvars} vs {other.nvars}")
        return self.D

    def map_terms(
        self, fn: Callable[[Monomial, Fraction], Optional[Tuple[Monomial, Fraction]]]
    ) -> "GradedSeries":
        """Apply a per-term transformation; fn returns None to drop a term"""
        out = []
        for mono, coeff in self.terms.items():
            mapped = fn(mono, coeff)
            if mapped is not None:
                out.append(mapped)
        return GradedSeries.from_terms(self.D, self.nvars, out)

    def __add__(self, other: "GradedSeries") -> "GradedSeries":
        self._compatible(other)
        return GradedSeries.from_terms(
            self.D, self.nvars, list(self.terms.items()) + list(other.terms.items())
        )

    def __neg__(self) -> "GradedSeries":
        return self.scale(-1)

    def __sub__(self, other: "GradedSeries") -> "GradedSeries":
        return self + (-other)

    def scale(self, factor: Number) -> "GradedSeries":
        if not factor:
            return GradedSeries(self.D, self.nvars, {})
        f = Fraction(factor)
        return GradedSeries(self.D, self.nvars, {m: c * f for m, c in self.terms.items()})

    def __mul__(self, other: "GradedSeries") -> "GradedSeries":
        D = self._compatible(other)
        by_degree: Dict[int, List[Tuple[Monomial, Fraction]]] = defaultdict(list)
        for mono, coeff in other.terms.items():
            by_degree[mono.qdeg].append((mono, coeff))

        out = []
        for m1, c1 in self.terms.items():
            for qdeg, bucket in by_degree.items():
                if m1.qdeg + qdeg > D:
                    continue
                for m2, c2 in bucket:
                    out.append((m1 * m2, c1 * c2))
        return GradedSeries.from_terms(D, self.nvars, out)

    def exp(self) -> "GradedSeries":
        """sum s^n/n! truncated at D; requires every term to have qdeg >= 1"""
        if any(m.qdeg == 0 for m in self.terms):
            raise InvalidArgumentError("series_exp requires zero constant term in the q-grading")
        result = GradedSeries.one(self.D, self.nvars)
        power = GradedSeries.one(self.D, self.nvars)
        for n in range(1, self.D + 1):
            power = (power * self).scale(Fraction(1, n))
            if power.is_zero():
                break
            result = result + power
        return result

    # derivations

    def diff_t(self, k: int) -> "GradedSeries":
        """Formal partial derivative in t_k (zero when k exceeds the stored range)"""
        return self._diff(k, bar=False)

    def diff_tbar(self, k: int) -> "GradedSeries":
        return self._diff(k, bar=True)

    def _diff(self, k: int, bar: bool) -> "GradedSeries":
        if k < 1:
            raise InvalidArgumentError(f"Derivative index must be >= 1, got {k}")
        if k > self.nvars:
            return GradedSeries(self.D, self.nvars, {})

        def step(mono: Monomial, coeff: Fraction) -> Optional[Tuple[Monomial, Fraction]]:
            exps = mono.b if bar else mono.a
            e = exps[k - 1]
            if e == 0:
                return None
            lowered = exps[: k - 1] + (e - 1,) + exps[k:]
            new = (
                Monomial(mono.qdeg, mono.bdeg, mono.a, lowered)
                if bar
                else Monomial(mono.qdeg, mono.bdeg, lowered, mono.b)
            )
            return new, coeff * e

        return self.map_terms(step)

    def diff_beta(self) -> "GradedSeries":
        def step(mono: Monomial, coeff: Fraction) -> Optional[Tuple[Monomial, Fraction]]:
            if mono.bdeg == 0:
                return None
            return Monomial(mono.qdeg, mono.bdeg - 1, mono.a, mono.b), coeff * mono.bdeg

        return self.map_terms(step)

    def q_euler(self) -> "GradedSeries":
        """q d/dq"""
        return self.map_terms(lambda m, c: (m, c * m.qdeg) if m.qdeg else None)

    def d0(self) -> "GradedSeries":
        """t_0-derivative on a function of q = e^(beta t_0): beta * q d/dq"""
        return self.map_terms(
            lambda m, c: (Monomial(m.qdeg, m.bdeg + 1, m.a, m.b), c * m.qdeg) if m.qdeg else None
        )

    # multiplication by single variables

    def mul_t(self, k: int, power: int = 1) -> "GradedSeries":
        return self._mul_var(k, power, bar=False)

    def mul_tbar(self, k: int, power: int = 1) -> "GradedSeries":
        return self._mul_var(k, power, bar=True)

    def _mul_var(self, k: int, power: int, bar: bool) -> "GradedSeries":
        if not 1 <= k <= self.nvars:
            raise InvalidArgumentError(f"Variable index {k} outside 1..{self.nvars}")

        def step(mono: Monomial, coeff: Fraction) -> Tuple[Monomial, Fraction]:
            exps = mono.b if bar else mono.a
            raised = exps[: k - 1] + (exps[k - 1] + power,) + exps[k:]
            if bar:
                return Monomial(mono.qdeg, mono.bdeg, mono.a, raised), coeff
            return Monomial(mono.qdeg, mono.bdeg, raised, mono.b), coeff

        return self.map_terms(step)

    def mul_q(self, power: int = 1) -> "GradedSeries":
        """Multiply by q^power, dropping what leaves the truncation"""
        return self.map_terms(lambda m, c: (Monomial(m.qdeg + power, m.bdeg, m.a, m.b), c))

    def swap_bar(self) -> "GradedSeries":
        """Exchange t and tbar"""
        return self.map_terms(lambda m, c: (Monomial(m.qdeg, m.bdeg, m.b, m.a), c))

    def truncate(self, D: int) -> "GradedSeries":
        if D > self.D:
            raise InvalidArgumentError(f"Cannot raise truncation from {self.D} to {D}")
        return GradedSeries.from_terms(D, self.nvars, self.terms.items())

    # JSON codec

    def to_json(self) -> List[dict]:
        """Records {qdeg, bdeg, a, b, num, den} in canonical order"""
        return [
            {
                "qdeg": m.qdeg,
                "bdeg": m.bdeg,
                "a": list(m.a),
                "b": list(m.b),
                "num": c.numerator,
                "den": c.denominator,
            }
            for m, c in self.items()
        ]

    @classmethod
    def from_json(cls, D: int, records: List[dict], nvars: Optional[int] = None) -> "GradedSeries":
        n = nvars or max([len(r["a"]) for r in records] + [max(D, 1)])
        items = []
        for r in records:
            a = tuple(r["a"]) + (0,) * (n - len(r["a"]))
            b = tuple(r["b"]) + (0,) * (n - len(r["b"]))
            items.append((Monomial(r["qdeg"], r["bdeg"], a, b), Fraction(r["num"], r["den"])))
        return cls.from_terms(D, n, items)


# function-style aliases


def series_add(s: GradedSeries, other: GradedSeries) -> GradedSeries:
    return s + other


def series_mul(s: GradedSeries, other: GradedSeries) -> GradedSeries:
    return s * other


def series_scale(s: GradedSeries, factor: Number) -> GradedSeries:
    return s.scale(factor)


def series_exp(s: GradedSeries) -> GradedSeries:
    return s.exp()


def diff_t(s: GradedSeries, k: int) -> GradedSeries:
    return s.diff_t(k)


def diff_tbar(s: GradedSeries, k: int) -> GradedSeries:
    return s.diff_tbar(k)


def diff_beta(s: GradedSeries) -> GradedSeries:
    return s.diff_beta()


def d0(s: GradedSeries) -> GradedSeries:
    return s.d0()
