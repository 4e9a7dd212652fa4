from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cantorduality.bitcube import (
    BlockIndexSet,
    CubeSet,
    Dyadic,
    WidthMismatch,
    Word,
    complement,
    density,
    difference,
    enumerate_cubesets,
    intersection,
    is_subset,
    overlap_counts,
    random_cubeset,
    union,
    walsh_hadamard,
    xor_translate,
)
from strategies import cube_with_words, cubesets, words


def S(*bits):
    return CubeSet.from_words([Word.from_string(b) for b in bits])


class TestWord:
    def test_coordinate_zero_is_least_significant(self):
        assert Word.from_string("100").value == 1
        assert Word.from_string("001").value == 4
        assert str(Word(3, 6)) == "011"

    def test_json_is_little_endian_hex(self):
        assert Word(12, 0x3A5).to_json() == {"width": 12, "bits_hex": "a503"}
        assert Word.from_json({"width": 12, "bits_hex": "a503"}) == Word(12, 0x3A5)

    def test_restrict_and_concat(self):
        w = Word.from_string("10110")
        assert str(w.restrict(BlockIndexSet(1, 3))) == "011"
        assert w.restrict(BlockIndexSet(0, 2)).concat(w.restrict(BlockIndexSet(2, 3))) == w

    def test_value_range_checked(self):
        with pytest.raises(ValueError):
            Word(3, 8)

    def test_xor_width_mismatch(self):
        with pytest.raises(WidthMismatch):
            Word(3, 1) ^ Word(4, 1)

    @given(words(max_width=40))
    def test_json_roundtrip(self, w):
        assert Word.from_json(w.to_json()) == w


class TestDyadic:
    def test_exact_values(self):
        assert Dyadic(3, 2) == Fraction(3, 4)
        assert Dyadic(6, 3).log2_denominator == 2

    def test_rejects_non_dyadic_and_out_of_range(self):
        with pytest.raises(ValueError):
            Dyadic.from_fraction(Fraction(1, 3))
        with pytest.raises(ValueError):
            Dyadic(5, 2)

    def test_json_roundtrip(self):
        d = Dyadic(7865, 13)
        assert Dyadic.from_json(d.to_json()) == d


class TestTranslate:
    def test_examples(self):
        J = S("000", "001")
        assert xor_translate(J, Word.from_string("000")) == J
        assert xor_translate(J, Word.from_string("110")) == S("110", "111")

    @given(cube_with_words(k=2))
    def test_bijection_and_involution(self, data):
        J, t, u = data
        Jt = xor_translate(J, t)
        assert len(Jt) == len(J) and density(Jt) == density(J)
        assert xor_translate(Jt, t) == J
        assert xor_translate(J, Word.zeros(J.width)) == J
        assert xor_translate(Jt, u) == xor_translate(J, t ^ u)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_membership_symmetry_exhaustive(self, n):
        for J in enumerate_cubesets(n):
            for t in range(1 << n):
                Jt = xor_translate(J, Word(n, t))
                for z in range(1 << n):
                    assert (Word(n, z) in Jt) == (Word(n, t) in xor_translate(J, Word(n, z)))

    @given(st.integers(4, 12), st.data())
    def test_membership_symmetry_sampled(self, n, data):
        J = random_cubeset(n, (Dyadic(0), Dyadic(1)), data.draw(st.integers(0, 2**64 - 1)))
        t, z = (Word(n, data.draw(st.integers(0, (1 << n) - 1))) for _ in range(2))
        assert (z in xor_translate(J, t)) == (t in xor_translate(J, z))

    def test_width_mismatch(self):
        with pytest.raises(WidthMismatch):
            xor_translate(S("00"), Word(3, 0))


class TestSetAlgebra:
    def test_density_examples(self):
        assert density(CubeSet.full(3)) == 1
        assert density(CubeSet.empty(3)) == 0
        assert density(CubeSet.from_indices(3, range(6))) == Fraction(3, 4)

    def test_examples(self):
        A = S("01", "11")
        full = CubeSet.full(2)
        assert is_subset(A, A)
        assert is_subset(complement(full), full)
        assert union(A, complement(A)) == full

    @given(st.integers(1, 6).flatmap(lambda n: st.tuples(cubesets(n), cubesets(n))))
    def test_subset_iff_union(self, AB):
        A, B = AB
        assert is_subset(A, B) == (union(A, B) == B)
        assert set(union(A, B).indices()) == set(A.indices()) | set(B.indices())
        assert set(intersection(A, B).indices()) == set(A.indices()) & set(B.indices())
        assert set(difference(A, B).indices()) == set(A.indices()) - set(B.indices())
        assert len(complement(A)) == (1 << A.width) - len(A)

    @given(cubesets(max_width=8))
    def test_json_roundtrip(self, J):
        assert CubeSet.from_json(J.to_json()) == J

    def test_mask_hex_layout(self):
        assert CubeSet.from_indices(3, [0, 1]).to_json() == {"width": 3, "mask_hex": "03"}
        assert CubeSet.from_indices(4, [8]).to_json()["mask_hex"] == "0001"

    def test_immutable(self):
        J = CubeSet.full(2)
        with pytest.raises(ValueError):
            J.membership[0] = False

    def test_width_cap(self):
        with pytest.raises(ValueError):
            CubeSet.empty(25)


class TestEnumerate:
    def test_n1_order(self):
        assert [sorted(J.indices().tolist()) for J in enumerate_cubesets(1)] == [[], [0], [1], [0, 1]]

    def test_filter(self):
        assert len(list(enumerate_cubesets(3, lambda d: d == Fraction(7, 8)))) == 8

    def test_guard(self):
        with pytest.raises(ValueError):
            list(enumerate_cubesets(5))


class TestRandom:
    def test_extreme_windows(self):
        assert random_cubeset(3, (Dyadic(1), Dyadic(1)), 5) == CubeSet.full(3)
        assert random_cubeset(3, (Dyadic(0), Dyadic(0)), 5) == CubeSet.empty(3)

    def test_deterministic(self):
        w = (Dyadic(1, 1), Dyadic(1, 1))
        a, b = random_cubeset(10, w, 7), random_cubeset(10, w, 7)
        assert a == b and density(a) == Fraction(1, 2)
        assert a != random_cubeset(10, w, 8)

    @given(st.integers(1, 8), st.integers(0, 2**64 - 1), st.integers(0, 256), st.integers(0, 256))
    def test_density_in_window(self, n, seed, a, b):
        lo, hi = sorted((Dyadic(a, 8), Dyadic(b, 8)))
        if not any(lo <= Fraction(k, 1 << n) <= hi for k in range((1 << n) + 1)):
            with pytest.raises(ValueError):
                random_cubeset(n, (lo, hi), seed)
            return
        assert lo <= density(random_cubeset(n, (lo, hi), seed)) <= hi


class TestOverlap:
    @given(st.integers(1, 7).flatmap(lambda n: st.tuples(cubesets(n, max_width=7), cubesets(n, max_width=7))))
    def test_wht_matches_naive(self, AB):
        A, B = AB
        assert np.array_equal(overlap_counts(A, B, "wht"), overlap_counts(A, B, "naive"))

    def test_naive_semantics(self):
        A, B = S("00", "10"), S("10")
        counts = overlap_counts(A, B, "naive")
        for s in range(4):
            assert counts[s] == len(intersection(A, xor_translate(B, Word(2, s))))

    def test_transform_is_involutive_up_to_scale(self):
        v = np.arange(16)
        assert np.array_equal(walsh_hadamard(walsh_hadamard(v)), 16 * v)
