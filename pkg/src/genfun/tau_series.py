"""Assembly of the genus-zero Hurwitz generating function and of F0

With r0 = 1 the tau-function is

    F0 = beta*t0^3/6 + F0H(beta, q = e^(beta*t0), t, tbar)

so the series part depends on t0 only through q. The cubic term is kept
as metadata (``TauSeries.cubic``); it is the only source of explicit t0
dependence and enters the identity checks through ``d0`` bookkeeping:
d0^2 of the cubic is beta*t0, which exponentiates to the factor q.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import factorial, prod
from typing import List, Optional, Sequence, Tuple

from src.combinatorics.hurwitz import HurwitzQuery, HurwitzValue, hurwitz_table
from src.constants import DEFAULT_BUDGET, DEFAULT_HURWITZ_METHOD
from src.errors import InvalidArgumentError
from src.genfun.series import GradedSeries, Monomial, d0  # noqa: F401
from src.utils.logging import get_logger

logger = get_logger(__name__)

HurwitzTable = Sequence[Tuple[HurwitzQuery, HurwitzValue]]


@dataclass(frozen=True)
class TauSeries:
    """F0 at r0 = 1: cubic*beta*t0^3 plus a series in q = e^(beta*t0)"""

    series: GradedSeries
    cubic: Fraction = Fraction(1, 6)

    @property
    def D(self) -> int:
        return self.series.D

    @property
    def nvars(self) -> int:
        return self.series.nvars


def _exponents(parts: Sequence[int], nvars: int) -> Tuple[int, ...]:
    vec = [0] * nvars
    for p in parts:
        vec[p - 1] += 1
    return tuple(vec)


def build_F0H(D: int, table: HurwitzTable, nvars: Optional[int] = None) -> GradedSeries:
    """
    sum_{d<=D} q^d beta^l H_{d,l}(mu, mubar)/l! prod mu_i t_{mu_i} prod mubar_i tbar_{mubar_i}

    Args:
        D: Truncation degree
        table: Genus-zero Hurwitz table covering every d <= D
        nvars: Stored t-index range (defaults to D)

    Raises:
        InvalidArgumentError: If the table is not genus zero or misses a degree
    """
    n = nvars or max(D, 1)
    if n < D:
        raise InvalidArgumentError(f"nvars={n} cannot hold t_k up to k={D}")

    # H_{d,0}((d),(d)) = 1/d is nonzero for every d, so its absence means the table stops short
    present = {q.d for q, _ in table if q.l == 0 and q.mu.length == 1 and q.mubar.length == 1}
    missing = [d for d in range(1, D + 1) if d not in present]
    if missing:
        raise InvalidArgumentError(f"Hurwitz table incomplete: no entries for d in {missing}")

    items = []
    for q, value in table:
        if value.genus != 0:
            raise InvalidArgumentError(f"Table entry {q} has genus {value.genus}, expected 0")
        if q.d > D:
            continue
        weight = prod(q.mu.parts) * prod(q.mubar.parts)
        coeff = value.value * weight / factorial(q.l)
        mono = Monomial(q.d, q.l, _exponents(q.mu.parts, n), _exponents(q.mubar.parts, n))
        items.append((mono, coeff))

    series = GradedSeries.from_terms(D, n, items)
    logger.debug(f"F0H at D={D}: {len(series)} terms")
    return series


def build_F0(
    D: int,
    table: Optional[HurwitzTable] = None,
    budget: int = DEFAULT_BUDGET,
    method: str = DEFAULT_HURWITZ_METHOD,
    nvars: Optional[int] = None,
) -> TauSeries:
    """F0 with q standing for e^(beta*t0); computes the Hurwitz table when none is given"""
    if table is None:
        table = hurwitz_table(D, genus=0, budget=budget, method=method)
    return TauSeries(build_F0H(D, table, nvars=nvars))


def diagonal_coefficients(s: GradedSeries, d_max: int) -> List[Tuple[int, Fraction]]:
    """
    Coefficients of q^d t1^d tbar1^d for d = 1..d_max

    Returns:
        List of (beta exponent, coefficient); (2d-2, 0) when the term is absent
    """
    out = []
    for d in range(1, d_max + 1):
        found = [
            (m.bdeg, c)
            for m, c in s.terms.items()
            if m.qdeg == d and m.a[0] == d and m.b[0] == d
            and not any(m.a[1:]) and not any(m.b[1:])
        ]
        out.append(found[0] if found else (2 * d - 2, Fraction(0)))
    return out
