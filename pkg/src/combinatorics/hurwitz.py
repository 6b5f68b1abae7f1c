"""Double Hurwitz numbers by exhaustive counting of transposition factorizations

H_{d,l}(mu, mubar) is normalised as

    (1/d!) * #{(alpha, tau_1, ..., tau_l) : alpha in C_mu, tau_i transpositions,
               tau_l o ... o tau_1 o alpha in C_mubar,
               <alpha, tau_1, ..., tau_l> transitive}

This weight reproduces H_{k,0}((k),(k)) = 1/k and
H_{d,2d-2}(1^d, 1^d) = (2d-2)!/d! * d^(d-3). Connectedness of the covering
surface is the transitivity requirement.

Two counting methods share this definition:

* ``enumerate``: depth-first over transposition tuples with alpha fixed to one
  representative of C_mu, transitivity tested once per completed tuple, result
  rescaled by |C_mu|/d!.
* ``dynamic``: the same walk compressed to states (product permutation, orbit
  partition of {1..d}); one pass yields H_{d,l}(mu, .) for every mubar.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from math import comb, factorial
from typing import Dict, List, Optional, Tuple

from src.combinatorics.symgroup import (
    Partition,
    Permutation,
    class_size,
    cycle_type,
    is_transitive,
    partitions_of,
    representative,
    transpositions,
)
from src.constants import DEFAULT_BUDGET, DEFAULT_HURWITZ_METHOD, HURWITZ_METHODS
from src.errors import InvalidArgumentError, ResourceLimitError
from src.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class HurwitzQuery:
    """Ramification data: degree d, l simple points, profiles mu over 0 and mubar over infinity"""

    d: int
    l: int
    mu: Partition
    mubar: Partition

    def __post_init__(self) -> None:
        if self.d < 1:
            raise InvalidArgumentError(f"Degree must be positive, got {self.d}")
        if self.l < 0:
            raise InvalidArgumentError(f"l must be nonnegative, got {self.l}")
        if self.mu.d != self.d or self.mubar.d != self.d:
            raise InvalidArgumentError(
                f"Profiles {self.mu}, {self.mubar} are not partitions of {self.d}"
            )

    def swapped(self) -> "HurwitzQuery":
        return HurwitzQuery(self.d, self.l, self.mubar, self.mu)


@dataclass(frozen=True)
class HurwitzValue:
    """Exact Hurwitz number with the genus of the covering (None when non-geometric)"""

    value: Fraction
    genus: Optional[int]


def genus_of(q: HurwitzQuery) -> Optional[int]:
    """Riemann-Hurwitz: 2g - 2 = l - len(mu) - len(mubar); None unless g is a nonnegative integer"""
    twice = q.l - q.mu.length - q.mubar.length + 2
    if twice < 0 or twice % 2:
        return None
    return twice // 2


def parity_allows(q: HurwitzQuery) -> bool:
    """Sign homomorphism: the count vanishes when l + sum(mu_i-1) + sum(mubar_i-1) is odd"""
    return (q.l + (q.d - q.mu.length) + (q.d - q.mubar.length)) % 2 == 0


@lru_cache(maxsize=None)
def bell_number(n: int) -> int:
    """Number of set partitions of an n-set (Bell triangle)"""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for value in row:
            nxt.append(nxt[-1] + value)
        row = nxt
    return row[0]


def enumeration_cost(d: int, l: int) -> int:
    """Number of transposition tuples walked by the depth-first method"""
    return comb(d, 2) ** l


def dynamic_cost(d: int, l: int) -> int:
    """Upper bound on state updates of the compressed method"""
    return l * comb(d, 2) * factorial(d) * bell_number(d)


def _check_budget(required: int, budget: int) -> None:
    if required > budget:
        raise ResourceLimitError(required, budget)


def double_hurwitz(
    q: HurwitzQuery,
    budget: int = DEFAULT_BUDGET,
    method: str = DEFAULT_HURWITZ_METHOD,
) -> HurwitzValue:
    """
    Compute H_{d,l}(mu, mubar) exactly

    Args:
        q: The query
        budget: Cap on elementary steps
        method: "dynamic" (default) or "enumerate"

    Returns:
        HurwitzValue with the genus from genus_of

    Raises:
        ResourceLimitError: If the method's cost exceeds the budget
    """
    if method not in HURWITZ_METHODS:
        raise InvalidArgumentError(f"Unknown method {method!r}; expected one of {HURWITZ_METHODS}")

    genus = genus_of(q)
    if genus is None or not parity_allows(q):
        return HurwitzValue(Fraction(0), genus)

    if method == "enumerate":
        _check_budget(enumeration_cost(q.d, q.l), budget)
        value = _enumerate(q, fixed_representative=True)
    else:
        _check_budget(dynamic_cost(q.d, q.l), budget)
        value = count_by_profile(q.d, q.l, q.mu, budget=budget).get(q.mubar, Fraction(0))

    return HurwitzValue(value, genus)


def enumerate_full(q: HurwitzQuery, budget: int = DEFAULT_BUDGET) -> Fraction:
    """Count with alpha ranging over the whole class C_mu (no representative speedup)"""
    _check_budget(class_size(q.mu) * enumeration_cost(q.d, q.l), budget)
    return _enumerate(q, fixed_representative=False)


def _enumerate(q: HurwitzQuery, fixed_representative: bool) -> Fraction:
    d = q.d
    taus = transpositions(d)
    if fixed_representative:
        alphas = [representative(q.mu)]
        weight = Fraction(class_size(q.mu), factorial(d))
    else:
        alphas = [
            Permutation(images)
            for images in permutations(range(d))
            if cycle_type(Permutation(images)) == q.mu
        ]
        weight = Fraction(1, factorial(d))

    count = 0
    for alpha in alphas:
        chosen: List[Permutation] = []

        def walk(product: Tuple[int, ...], depth: int) -> int:
            if depth == q.l:
                if cycle_type(Permutation(product)) != q.mubar:
                    return 0
                return 1 if is_transitive([alpha] + chosen, d) else 0
            found = 0
            for tau in taus:
                chosen.append(tau)
                found += walk(tuple(tau.images[x] for x in product), depth + 1)
                chosen.pop()
            return found

        count += walk(alpha.images, 0)

    logger.debug(f"Enumerated d={d} l={q.l} {q.mu}->{q.mubar}: {count} tuples")
    return count * weight


def count_by_profile(
    d: int, l: int, mu: Partition, budget: int = DEFAULT_BUDGET
) -> Dict[Partition, Fraction]:
    """
    H_{d,l}(mu, mubar) for every mubar in one pass

    Returns:
        Map mubar -> nonzero Hurwitz number
    """
    if mu.d != d:
        raise InvalidArgumentError(f"{mu} is not a partition of {d}")
    _check_budget(dynamic_cost(d, l), budget)
    return dict(_count_by_profile(d, l, mu))


@lru_cache(maxsize=None)
def _count_by_profile(d: int, l: int, mu: Partition) -> Tuple[Tuple[Partition, Fraction], ...]:
    alpha = representative(mu)
    labels = [0] * d
    for cycle in alpha.cycles():
        for i in cycle:
            labels[i] = min(cycle)

    states: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], int] = {
        (alpha.images, tuple(labels)): 1
    }
    pairs = list(combinations(range(d), 2))

    for step in range(l):
        nxt: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], int] = defaultdict(int)
        for (product, comp), mult in states.items():
            for i, j in pairs:
                # tau o product: swap the values i and j
                images = list(product)
                pi, pj = images.index(i), images.index(j)
                images[pi], images[pj] = j, i
                a, b = comp[i], comp[j]
                if a != b:
                    keep, drop = min(a, b), max(a, b)
                    merged = tuple(keep if c == drop else c for c in comp)
                else:
                    merged = comp
                nxt[(tuple(images), merged)] += mult
        states = nxt
        logger.debug(f"d={d} mu={mu} step {step + 1}/{l}: {len(states)} states")

    weight = Fraction(class_size(mu), factorial(d))
    totals: Dict[Partition, int] = defaultdict(int)
    for (product, comp), mult in states.items():
        if all(c == 0 for c in comp):
            totals[cycle_type(Permutation(product))] += mult

    return tuple(sorted(((k, v * weight) for k, v in totals.items()), reverse=True))


def hurwitz_table(
    d_max: int,
    genus: int = 0,
    budget: int = DEFAULT_BUDGET,
    method: str = DEFAULT_HURWITZ_METHOD,
) -> List[Tuple[HurwitzQuery, HurwitzValue]]:
    """
    All nonzero genus-`genus` double Hurwitz numbers with d <= d_max

    Entries are ordered by d, then mu, then mubar (each in lexicographic
    descending partition order); l is forced to len(mu) + len(mubar) - 2 + 2*genus.
    """
    if d_max < 1:
        raise InvalidArgumentError(f"d_max must be >= 1, got {d_max}")
    if genus < 0:
        raise InvalidArgumentError(f"genus must be >= 0, got {genus}")

    logger.info(f"Building genus {genus} Hurwitz table up to d={d_max} ({method})")
    table = []
    for d in range(1, d_max + 1):
        for mu in partitions_of(d):
            for mubar in partitions_of(d):
                l = mu.length + mubar.length - 2 + 2 * genus
                if l < 0:
                    continue
                query = HurwitzQuery(d, l, mu, mubar)
                result = double_hurwitz(query, budget=budget, method=method)
                if result.value != 0:
                    table.append((query, result))
    logger.info(f"Hurwitz table has {len(table)} nonzero entries")
    return table


def table_to_records(table: List[Tuple[HurwitzQuery, HurwitzValue]]) -> List[dict]:
    """JSON records {d, l, mu, mubar, genus, value_num, value_den}"""
    return [
        {
            "d": q.d,
            "l": q.l,
            "mu": q.mu.to_list(),
            "mubar": q.mubar.to_list(),
            "genus": v.genus,
            "value_num": v.value.numerator,
            "value_den": v.value.denominator,
        }
        for q, v in table
    ]


def hurwitz_closed_form_simple(d: int) -> Fraction:
    """H_{d,2d-2}(1^d, 1^d) = (2d-2)!/d! * d^(d-3)"""
    return Fraction(factorial(2 * d - 2), factorial(d)) * Fraction(d) ** (d - 3)


def hurwitz_closed_form_cycle(k: int) -> Fraction:
    """H_{k,0}((k), (k)) = 1/k"""
    return Fraction(1, k)
