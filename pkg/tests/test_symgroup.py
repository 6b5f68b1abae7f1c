"""Tests for partitions and permutations"""

import unittest
from math import comb, factorial

from hypothesis import given
from hypothesis import strategies as st

from src.combinatorics.symgroup import (
    Partition,
    Permutation,
    class_size,
    compose,
    cycle_type,
    is_transitive,
    partitions_of,
    representative,
    transposition,
    transpositions,
)
from src.errors import InvalidArgumentError

PARTITION_COUNTS = {1: 1, 2: 2, 3: 3, 4: 5, 5: 7, 6: 11, 7: 15}


def permutations_of(max_d: int = 7):
    return st.integers(min_value=1, max_value=max_d).flatmap(
        lambda d: st.permutations(list(range(d))).map(lambda p: Permutation(tuple(p)))
    )


class TestPartitions(unittest.TestCase):
    """Test cases for partition enumeration"""

    def test_small_degrees(self):
        """Test the documented lexicographic descending order"""
        self.assertEqual(partitions_of(1), [Partition((1,))])
        self.assertEqual(
            [p.parts for p in partitions_of(3)], [(3,), (2, 1), (1, 1, 1)]
        )
        self.assertEqual(len(partitions_of(4)), 5)

    def test_counts(self):
        """Test the partition numbers p(d)"""
        for d, count in PARTITION_COUNTS.items():
            parts = partitions_of(d)
            self.assertEqual(len(parts), count)
            self.assertEqual(len(set(parts)), count)
            self.assertTrue(all(p.d == d for p in parts))

    def test_invalid_degree(self):
        """Test that d < 1 is rejected"""
        with self.assertRaises(InvalidArgumentError):
            partitions_of(0)
        with self.assertRaises(InvalidArgumentError):
            partitions_of(-2)

    def test_partition_validation(self):
        """Test Partition rejects unsorted or nonpositive parts"""
        with self.assertRaises(InvalidArgumentError):
            Partition((1, 2))
        with self.assertRaises(InvalidArgumentError):
            Partition((2, 0))
        self.assertEqual(Partition.of([1, 3, 2]), Partition((3, 2, 1)))

    def test_class_sizes_sum_to_factorial(self):
        """Test that conjugacy classes partition S_d"""
        for d in range(1, 8):
            self.assertEqual(sum(class_size(mu) for mu in partitions_of(d)), factorial(d))


class TestPermutations(unittest.TestCase):
    """Test cases for permutation operations"""

    def test_cycle_type_examples(self):
        """Test cycle types of simple permutations"""
        self.assertEqual(cycle_type(Permutation.identity(4)), Partition((1, 1, 1, 1)))
        self.assertEqual(cycle_type(Permutation.from_cycles([[1, 2, 3]], 3)), Partition((3,)))
        self.assertEqual(
            cycle_type(Permutation.from_cycles([[1, 2], [3, 4]], 4)), Partition((2, 2))
        )

    def test_compose_order(self):
        """Test that compose applies the right factor first"""
        a = transposition(3, 0, 1)
        b = transposition(3, 1, 2)
        ab = compose(a, b)
        # 2 -> 3 under b, 3 fixed by a
        self.assertEqual(ab.to_one_line(), [2, 3, 1])
        self.assertEqual(compose(a, a), Permutation.identity(3))
        self.assertEqual(compose(Permutation.identity(3), b), b)

    def test_compose_degree_mismatch(self):
        """Test that composing different degrees fails"""
        with self.assertRaises(InvalidArgumentError):
            compose(Permutation.identity(2), Permutation.identity(3))

    def test_transpositions(self):
        """Test the number of transpositions"""
        self.assertEqual(transpositions(1), [])
        self.assertEqual(len(transpositions(2)), 1)
        self.assertEqual(len(transpositions(5)), comb(5, 2))
        self.assertTrue(all(cycle_type(t) == Partition((2, 1, 1)) for t in transpositions(4)))

    def test_is_transitive(self):
        """Test transitivity of generated subgroups"""
        self.assertTrue(is_transitive([transposition(3, 0, 1), transposition(3, 1, 2)], 3))
        self.assertFalse(is_transitive([transposition(3, 0, 1)], 3))
        self.assertTrue(is_transitive([Permutation.identity(1)], 1))
        self.assertFalse(is_transitive([Permutation.identity(2)], 2))

    def test_representative_has_type(self):
        """Test the class representative lies in its class"""
        for d in range(1, 7):
            for mu in partitions_of(d):
                self.assertEqual(cycle_type(representative(mu)), mu)

    def test_invalid_permutation(self):
        """Test that non-bijections are rejected"""
        with self.assertRaises(InvalidArgumentError):
            Permutation((0, 0, 1))

    @given(permutations_of())
    def test_cycle_type_is_partition_of_degree(self, p):
        """Test that cycle lengths sum to d"""
        self.assertEqual(cycle_type(p).d, p.d)

    @given(permutations_of())
    def test_inverse(self, p):
        """Test p o p^-1 is the identity"""
        self.assertEqual(compose(p, p.inverse()), Permutation.identity(p.d))
        self.assertEqual(cycle_type(p.inverse()), cycle_type(p))

    @given(permutations_of(6), st.data())
    def test_cycle_type_is_conjugation_invariant(self, p, data):
        """Test cycle_type(g p g^-1) = cycle_type(p)"""
        g = data.draw(st.permutations(list(range(p.d))).map(lambda x: Permutation(tuple(x))))
        self.assertEqual(cycle_type(compose(compose(g, p), g.inverse())), cycle_type(p))

    @given(st.integers(min_value=1, max_value=6), st.data())
    def test_transitivity_is_conjugation_invariant(self, d, data):
        """Test that relabelling the points preserves transitivity"""
        perms = st.permutations(list(range(d))).map(lambda x: Permutation(tuple(x)))
        generators = data.draw(st.lists(perms, min_size=1, max_size=3))
        g = data.draw(perms)
        conjugated = [compose(compose(g, p), g.inverse()) for p in generators]
        self.assertEqual(is_transitive(conjugated, d), is_transitive(generators, d))

    @given(permutations_of(6))
    def test_one_line_round_trip(self, p):
        """Test 1-based one-line notation"""
        self.assertEqual(Permutation.from_one_line(p.to_one_line()), p)


if __name__ == "__main__":
    unittest.main()
