"""Exact symbolic checks of the Euler, cut-and-join and Hirota identities

All checks return a list of ``Violation`` records; an empty list means the
identity holds coefficient by coefficient up to the truncation degree.

Hirota equations at r0 = 1, with D(z) = sum_{k<=K} z^-k/k d/dt_k and
Dbar(zbar) its tbar counterpart:

    (z1 - z2) exp(D(z1)D(z2)F0) = z1 exp(-d0 D(z1)F0) - z2 exp(-d0 D(z2)F0)
    z1 zbar2 (1 - exp(-D(z1)Dbar(zbar2)F0)) = exp(d0 (d0 + D(z1) + Dbar(zbar2)) F0)

In the second equation d0^2 of the tracked cubic beta*t0^3/6 equals beta*t0,
so exp(beta*t0) = q multiplies the series part: the right-hand side is
q * exp(d0^2 S + d0 D(z1) S + d0 Dbar(zbar2) S). No other term of the
exponent depends on the cubic.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable, Dict, Iterable, List, Optional, Tuple, Union

from src.constants import BRIDGE_ORDER
from src.errors import InvalidArgumentError
from src.genfun.series import GradedSeries
from src.genfun.tau_series import TauSeries, diagonal_coefficients
from src.trochoid.solution import taylor_coefficients
from src.utils.logging import get_logger

logger = get_logger(__name__)

Exponent = Tuple[int, int]


@dataclass(frozen=True)
class Violation:
    """One coefficient where the two sides of an identity disagree"""

    identity: str
    key: str
    lhs: Fraction
    rhs: Fraction

    def to_dict(self) -> dict:
        return {
            "identity": self.identity,
            "key": self.key,
            "lhs": str(self.lhs),
            "rhs": str(self.rhs),
        }


def _compare(identity: str, lhs: GradedSeries, rhs: GradedSeries, prefix: str = "") -> List[Violation]:
    out = []
    for mono in sorted(set(lhs.terms) | set(rhs.terms)):
        a, b = lhs.coefficient(mono), rhs.coefficient(mono)
        if a != b:
            out.append(Violation(identity, f"{prefix}{mono}", a, b))
    return out


def _series_of(s: Union[GradedSeries, TauSeries]) -> GradedSeries:
    return s.series if isinstance(s, TauSeries) else s


def euler_rhs(s: GradedSeries) -> GradedSeries:
    """sum_k k t_k d/dt_k s"""
    total = GradedSeries.zero(s.D, s.nvars)
    for k in range(1, s.nvars + 1):
        total = total + s.diff_t(k).mul_t(k).scale(k)
    return total


def check_euler(s: Union[GradedSeries, TauSeries]) -> List[Violation]:
    """q d/dq s = sum_k k t_k d/dt_k s per coefficient"""
    series = _series_of(s)
    violations = _compare("euler", series.q_euler(), euler_rhs(series))
    logger.debug(f"Euler check at D={series.D}: {len(violations)} violations")
    return violations


def cutjoin_rhs(s: GradedSeries) -> GradedSeries:
    """1/2 sum_{k,l>=1} [k l t_k t_l d_{k+l} s + (k+l) t_{k+l} d_k s d_l s]"""
    n = s.nvars
    firsts = {k: s.diff_t(k) for k in range(1, n + 1)}
    total = GradedSeries.zero(s.D, n)
    # t_{k+l} with k+l > nvars cannot occur below q-degree nvars >= D
    for k in range(1, n):
        for l in range(1, n - k + 1):
            join = firsts[k + l].mul_t(k).mul_t(l).scale(k * l)
            cut = (firsts[k] * firsts[l]).mul_t(k + l).scale(k + l)
            total = total + join + cut
    return total.scale(Fraction(1, 2))


def check_cutjoin(s: Union[GradedSeries, TauSeries], full: bool = False) -> List[Violation]:
    """
    Verify the cut-and-join flow d/dbeta s = cutjoin_rhs(s)

    With full=True the complete beta-flow of F0 = cubic*beta*t0^3 + S(beta, q)
    is checked as a polynomial in t0: the t0^0 part is the cut-and-join
    equation for S, the t0^1 part is the Euler relation (from d/dbeta acting
    on q = e^(beta*t0)), the t0^3 part compares the cubic with 1/6.
    """
    series = _series_of(s)
    if series.nvars < series.D:
        raise InvalidArgumentError(f"nvars={series.nvars} is smaller than D={series.D}")

    violations = _compare("cutjoin", series.diff_beta(), cutjoin_rhs(series), prefix="t0^0 ")
    if full:
        cubic = s.cubic if isinstance(s, TauSeries) else Fraction(1, 6)
        violations += _compare(
            "cutjoin", series.q_euler(), euler_rhs(series), prefix="t0^1 "
        )
        if cubic != Fraction(1, 6):
            violations.append(Violation("cutjoin", "t0^3", cubic, Fraction(1, 6)))
    logger.debug(f"Cut-and-join check (full={full}) at D={series.D}: {len(violations)} violations")
    return violations


class ZSeries:
    """
    Formal Laurent data in two spectral variables with GradedSeries coefficients

    Cells are keyed by exponents (p1, p2); anything with p1 < -K1 or
    p2 < -K2 is dropped, so coefficients are exact for p1 >= -K1, p2 >= -K2
    as long as every factor has nonpositive exponents.
    """

    def __init__(
        self,
        D: int,
        nvars: int,
        window: Tuple[int, int],
        cells: Optional[Dict[Exponent, GradedSeries]] = None,
    ):
        self.D = D
        self.nvars = nvars
        self.window = window
        self.cells: Dict[Exponent, GradedSeries] = {
            p: s for p, s in (cells or {}).items() if not s.is_zero() and self._keeps(p)
        }

    def _keeps(self, p: Exponent) -> bool:
        return p[0] >= -self.window[0] and p[1] >= -self.window[1]

    def _like(self, cells: Dict[Exponent, GradedSeries]) -> "ZSeries":
        return ZSeries(self.D, self.nvars, self.window, cells)

    @classmethod
    def one(cls, D: int, nvars: int, window: Tuple[int, int]) -> "ZSeries":
        return cls(D, nvars, window, {(0, 0): GradedSeries.one(D, nvars)})

    def coefficient(self, p: Exponent) -> GradedSeries:
        return self.cells.get(p, GradedSeries.zero(self.D, self.nvars))

    def map(self, fn: Callable[[GradedSeries], GradedSeries]) -> "ZSeries":
        return self._like({p: fn(s) for p, s in self.cells.items()})

    def scale(self, factor) -> "ZSeries":
        return self.map(lambda s: s.scale(factor))

    def shift(self, d1: int, d2: int) -> "ZSeries":
        """Multiply by z1^d1 z2^d2"""
        return self._like({(p[0] + d1, p[1] + d2): s for p, s in self.cells.items()})

    def __add__(self, other: "ZSeries") -> "ZSeries":
        cells = dict(self.cells)
        for p, s in other.cells.items():
            cells[p] = cells[p] + s if p in cells else s
        return self._like(cells)

    def __neg__(self) -> "ZSeries":
        return self.scale(-1)

    def __sub__(self, other: "ZSeries") -> "ZSeries":
        return self + (-other)

    def __mul__(self, other: "ZSeries") -> "ZSeries":
        acc: Dict[Exponent, List[GradedSeries]] = defaultdict(list)
        for p, a in self.cells.items():
            for r, b in other.cells.items():
                e = (p[0] + r[0], p[1] + r[1])
                if self._keeps(e):
                    acc[e].append(a * b)
        cells = {}
        for e, parts in acc.items():
            total = parts[0]
            for part in parts[1:]:
                total = total + part
            cells[e] = total
        return self._like(cells)

    def exp(self) -> "ZSeries":
        """sum X^n/n!; every coefficient must have positive q-degree"""
        for s in self.cells.values():
            if s.min_qdeg() == 0:
                raise InvalidArgumentError("ZSeries.exp requires positive q-degree in every cell")
        result = ZSeries.one(self.D, self.nvars, self.window)
        power = ZSeries.one(self.D, self.nvars, self.window)
        for n in range(1, self.D + 1):
            power = (power * self).scale(Fraction(1, n))
            if not power.cells:
                break
            result = result + power
        return result


def _check_orders(series: GradedSeries, K1: int, K2: int) -> None:
    for name, K in (("K1", K1), ("K2", K2)):
        if K < 1:
            raise InvalidArgumentError(f"{name} must be >= 1, got {K}")
        if K > series.nvars:
            raise InvalidArgumentError(
                f"{name}={K} exceeds the stored t-index range 1..{series.nvars}"
            )


def _vertex(
    series: GradedSeries, K: int, window: Tuple[int, int], axis: int, bar: bool = False
) -> ZSeries:
    """D(z) S along one spectral variable"""
    cells = {}
    for k in range(1, K + 1):
        derivative = series.diff_tbar(k) if bar else series.diff_t(k)
        p = (-k, 0) if axis == 0 else (0, -k)
        cells[p] = derivative.scale(Fraction(1, k))
    return ZSeries(series.D, series.nvars, window, cells)


def _double_vertex(
    series: GradedSeries, K1: int, K2: int, window: Tuple[int, int], bar: bool
) -> ZSeries:
    """D(z1) D(z2) S, or D(z1) Dbar(zbar2) S when bar is set"""
    cells = {}
    for i in range(1, K1 + 1):
        first = series.diff_t(i)
        for j in range(1, K2 + 1):
            second = first.diff_tbar(j) if bar else first.diff_t(j)
            cells[(-i, -j)] = second.scale(Fraction(1, i * j))
    return ZSeries(series.D, series.nvars, window, cells)


def _compare_z(
    identity: str, lhs: ZSeries, rhs: ZSeries, exponents: Iterable[Exponent]
) -> List[Violation]:
    out = []
    for p in exponents:
        out += _compare(identity, lhs.coefficient(p), rhs.coefficient(p), prefix=f"z^{p} ")
    return out


def check_hirota(F0: Union[GradedSeries, TauSeries], K1: int, K2: int) -> List[Violation]:
    """
    Both dispersionless Hirota equations, coefficient by coefficient

    Compared z-powers are those fully determined by D(z) truncated at K1, K2:
    z1^a z2^b with 1-K1 <= a <= 1 and 1-K2 <= b <= 1.

    Raises:
        InvalidArgumentError: If K1 or K2 exceeds the stored t-index range
    """
    series = _series_of(F0)
    _check_orders(series, K1, K2)
    window = (K1, K2)
    exponents = [(a, b) for a in range(1 - K1, 2) for b in range(1 - K2, 2)]

    a1 = _vertex(series, K1, window, axis=0)
    a2 = _vertex(series, K2, window, axis=1)
    y = _double_vertex(series, K1, K2, window, bar=False)
    e = y.exp()
    lhs1 = e.shift(1, 0) - e.shift(0, 1)
    rhs1 = (-a1.map(GradedSeries.d0)).exp().shift(1, 0) - (-a2.map(GradedSeries.d0)).exp().shift(0, 1)
    violations = _compare_z("hirota1", lhs1, rhs1, exponents)

    a2bar = _vertex(series, K2, window, axis=1, bar=True)
    x = _double_vertex(series, K1, K2, window, bar=True)
    one = ZSeries.one(series.D, series.nvars, window)
    lhs2 = (one - (-x).exp()).shift(1, 1)
    exponent = (
        ZSeries(series.D, series.nvars, window, {(0, 0): series.d0().d0()})
        + a1.map(GradedSeries.d0)
        + a2bar.map(GradedSeries.d0)
    )
    rhs2 = exponent.exp().map(lambda s: s.mul_q(1))
    violations += _compare_z("hirota2", lhs2, rhs2, exponents)
    if isinstance(F0, TauSeries) and F0.cubic != Fraction(1, 6):
        violations.append(Violation("hirota2", "t0^3", F0.cubic, Fraction(1, 6)))

    logger.debug(f"Hirota check at D={series.D}, K=({K1},{K2}): {len(violations)} violations")
    return violations


def bridge_closed_form(d: int) -> Fraction:
    """Coefficient c_d of beta^(2d-2) q^d (t1 tbar1)^d: d^(d-3)/d!"""
    return Fraction(d) ** (d - 3) / factorial(d)


def check_bridge(F0H: Union[GradedSeries, TauSeries], order: int = BRIDGE_ORDER) -> List[Violation]:
    """
    Diagonal t1^d tbar1^d coefficients against beta^(2d-2) d^(d-3)/d!

    The Hurwitz series is compared for d <= D; the closed-form trochoid
    Taylor series (a Lambert-series computation) for d <= order.
    """
    series = _series_of(F0H)
    violations = []
    for d, (bdeg, coeff) in enumerate(taylor_coefficients(order), start=1):
        expected = bridge_closed_form(d)
        if bdeg != 2 * d - 2 or coeff != expected:
            violations.append(Violation("bridge", f"trochoid d={d} b^{bdeg}", coeff, expected))
    for d, (bdeg, coeff) in enumerate(diagonal_coefficients(series, series.D), start=1):
        expected = bridge_closed_form(d)
        if bdeg != 2 * d - 2 or coeff != expected:
            violations.append(Violation("bridge", f"hurwitz d={d} b^{bdeg}", coeff, expected))
    logger.debug(f"Bridge check to d={order}: {len(violations)} violations")
    return violations
