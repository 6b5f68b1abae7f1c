"""Integer partitions and permutations of {1..d}

Permutations are stored in one-line form with 0-based images; all textual
input and output (``str``, ``from_cycles``, ``to_json``) is 1-based.

Composition convention: ``compose(p, q)`` applies ``q`` first, then ``p``,
i.e. ``compose(p, q).images[i] == p.images[q.images[i]]``.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import factorial, prod
from typing import Iterable, List, Sequence, Tuple

from src.errors import InvalidArgumentError


@dataclass(frozen=True, order=True)
class Partition:
    """Integer partition with parts in nonincreasing order"""

    parts: Tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.parts:
            raise InvalidArgumentError("Partition must have at least one part")
        if any(p < 1 for p in self.parts):
            raise InvalidArgumentError(f"Partition parts must be positive: {self.parts}")
        if any(a < b for a, b in zip(self.parts, self.parts[1:])):
            raise InvalidArgumentError(f"Partition parts must be nonincreasing: {self.parts}")

    @classmethod
    def of(cls, parts: Iterable[int]) -> "Partition":
        """Build a partition from parts in any order"""
        return cls(tuple(sorted(parts, reverse=True)))

    @property
    def d(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    @property
    def multiplicities(self) -> dict:
        """Map part size i -> m_i"""
        return dict(Counter(self.parts))

    def __str__(self) -> str:
        return "(" + ",".join(str(p) for p in self.parts) + ")"

    def to_list(self) -> List[int]:
        return list(self.parts)

    def is_trivial(self) -> bool:
        """True for 1^d"""
        return all(p == 1 for p in self.parts)


@dataclass(frozen=True)
class Permutation:
    """Permutation of {0..d-1} in one-line form"""

    images: Tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.images) != list(range(len(self.images))):
            raise InvalidArgumentError(f"Not a bijection: {self.images}")

    @property
    def d(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, d: int) -> "Permutation":
        return cls(tuple(range(d)))

    @classmethod
    def from_one_line(cls, images: Sequence[int]) -> "Permutation":
        """Build from 1-based one-line notation, e.g. [2, 1, 3]"""
        return cls(tuple(i - 1 for i in images))

    @classmethod
    def from_cycles(cls, cycles: Iterable[Sequence[int]], d: int) -> "Permutation":
        """Build from 1-based disjoint cycles, e.g. [[1, 2, 3]] in S_4"""
        images = list(range(d))
        seen = set()
        for cycle in cycles:
            for a, b in zip(cycle, list(cycle[1:]) + [cycle[0]]):
                if not (1 <= a <= d) or a in seen:
                    raise InvalidArgumentError(f"Bad cycle {cycle} for degree {d}")
                seen.add(a)
                images[a - 1] = b - 1
        return cls(tuple(images))

    def cycles(self) -> List[Tuple[int, ...]]:
        """Disjoint cycles (0-based), fixed points included, smallest element first"""
        seen = [False] * self.d
        result = []
        for start in range(self.d):
            if seen[start]:
                continue
            cycle = []
            i = start
            while not seen[i]:
                seen[i] = True
                cycle.append(i)
                i = self.images[i]
            result.append(tuple(cycle))
        return result

    def inverse(self) -> "Permutation":
        inv = [0] * self.d
        for i, image in enumerate(self.images):
            inv[image] = i
        return Permutation(tuple(inv))

    def to_one_line(self) -> List[int]:
        return [i + 1 for i in self.images]

    def __str__(self) -> str:
        nontrivial = [c for c in self.cycles() if len(c) > 1]
        if not nontrivial:
            return "()"
        return "".join("(" + " ".join(str(i + 1) for i in c) + ")" for c in nontrivial)


def partitions_of(d: int) -> List[Partition]:
    """
    All partitions of d in lexicographic descending order

    Args:
        d: Positive integer

    Returns:
        List of partitions, e.g. 3 -> [(3), (2,1), (1,1,1)]

    Raises:
        InvalidArgumentError: If d < 1
    """
    if d < 1:
        raise InvalidArgumentError(f"partitions_of requires d >= 1, got {d}")
    return [Partition(p) for p in _partitions(d, d)]


@lru_cache(maxsize=None)
def _partitions(n: int, max_part: int) -> Tuple[Tuple[int, ...], ...]:
    if n == 0:
        return ((),)
    result = []
    for first in range(min(n, max_part), 0, -1):
        for rest in _partitions(n - first, first):
            result.append((first,) + rest)
    return tuple(result)


def cycle_type(p: Permutation) -> Partition:
    """Sorted cycle lengths of p"""
    return Partition.of(len(c) for c in p.cycles())


def compose(p: Permutation, q: Permutation) -> Permutation:
    """
    Composition "apply q first, then p"

    Raises:
        InvalidArgumentError: On degree mismatch
    """
    if p.d != q.d:
        raise InvalidArgumentError(f"Degree mismatch: {p.d} vs {q.d}")
    return Permutation(tuple(p.images[i] for i in q.images))


def transposition(d: int, i: int, j: int) -> Permutation:
    """The transposition of 0-based points i and j"""
    images = list(range(d))
    images[i], images[j] = j, i
    return Permutation(tuple(images))


def transpositions(d: int) -> List[Permutation]:
    """All d(d-1)/2 transpositions in S_d (empty for d < 2)"""
    if d < 2:
        return []
    return [transposition(d, i, j) for i, j in combinations(range(d), 2)]


def is_transitive(generators: Sequence[Permutation], d: int) -> bool:
    """True iff the orbit of point 1 under the generated group is all of {1..d}"""
    if any(g.d != d for g in generators):
        raise InvalidArgumentError("All generators must have degree d")
    seen = {0}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for g in generators:
            j = g.images[i]
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return len(seen) == d


def class_size(mu: Partition) -> int:
    """Number of permutations of S_d with cycle type mu: d! / prod(i^m_i m_i!)"""
    z = prod(i**m * factorial(m) for i, m in mu.multiplicities.items())
    return factorial(mu.d) // z


def representative(mu: Partition) -> Permutation:
    """Fixed element of the class C_mu whose cycles are consecutive blocks"""
    images = []
    start = 0
    for part in mu.parts:
        block = list(range(start, start + part))
        images.extend(block[1:] + block[:1])
        start += part
    return Permutation(tuple(images))
