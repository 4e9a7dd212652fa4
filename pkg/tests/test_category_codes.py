import pytest
from hypothesis import given
from hypothesis import strategies as st

from cantorduality.bitcube import WidthMismatch, Word
from cantorduality.category_codes import (
    BlockPartition,
    MeagerCode,
    carlson_combine,
    carlson_multi,
    carlson_refine,
    combine_translations,
    materialize_meager,
    meager_membership,
    normalize,
    translate_code,
    verify_carlson_inclusion,
    verify_translation_inclusion,
)
from cantorduality.corpus import random_code, random_word
from oracles import carlson_inclusion, meager_points


@st.composite
def codes(draw, k=2, max_length=12):
    groups = draw(st.integers(1, 3))
    n_blocks = k * groups
    widths = draw(st.lists(st.integers(1, 3), min_size=n_blocks, max_size=n_blocks)
                  .filter(lambda w: sum(w) <= max_length))
    part = BlockPartition.from_widths(widths)
    N = part.total_length
    witness = draw(st.integers(0, (1 << N) - 1))
    m0 = draw(st.integers(0, k * (groups - 1)))
    return MeagerCode(part, Word(N, witness), m0)


def word(s):
    return Word.from_string(s)


class TestPartition:
    def test_shape(self):
        p = BlockPartition.from_widths([1, 2, 1, 3])
        assert p.total_length == 7 and p.widths == (1, 2, 1, 3)
        assert p.prefix_length(2) == 3 and p.prefix_length(0) == 0
        assert p.tail(2).widths == (1, 3) and p.tail(2)[0].offset == 0
        assert BlockPartition.from_json(p.to_json()) == p

    def test_gaps_rejected(self):
        from cantorduality.bitcube import BlockIndexSet

        with pytest.raises(ValueError):
            BlockPartition((BlockIndexSet(0, 2), BlockIndexSet(3, 1)))


class TestMembership:
    def setup_method(self):
        self.code = MeagerCode(BlockPartition.from_widths([2, 1, 3]), word("101101"), 0)

    def test_examples(self):
        code = self.code
        assert not meager_membership(code, code.witness)
        assert meager_membership(code, Word(6, code.witness.value ^ 0b111111))
        # agrees on the middle block only
        assert not meager_membership(code, word("011010"))

    def test_window_ignores_early_blocks(self):
        code = MeagerCode(self.code.partition, self.code.witness, 1)
        assert meager_membership(code, word("100010"))  # agrees on block 0 only

    def test_materialize_examples(self):
        two = MeagerCode(BlockPartition.from_widths([1, 1]), Word(2, 0), 0)
        assert materialize_meager(two).indices().tolist() == [word("11").value]
        vacuous = MeagerCode(two.partition, Word(2, 0), 2)
        assert len(materialize_meager(vacuous)) == 4

    @given(codes(max_length=10))
    def test_materialize_matches_loop(self, code):
        got = set(materialize_meager(code).indices().tolist())
        assert got == meager_points(code.partition.widths, code.witness.value, code.window_start)
        for x in list(got)[:5]:
            assert meager_membership(code, Word(code.total_length, x))

    @given(codes(max_length=10), st.data())
    def test_translate_and_normalize(self, code, data):
        N = code.total_length
        t = Word(N, data.draw(st.integers(0, (1 << N) - 1)))
        moved = set(materialize_meager(translate_code(code, t)).indices().tolist())
        assert moved == {x ^ t.value for x in materialize_meager(code).indices().tolist()}
        assert normalize(code).witness == Word.zeros(N)

    def test_width_mismatch(self):
        with pytest.raises(WidthMismatch):
            meager_membership(self.code, Word(5, 0))
        with pytest.raises(WidthMismatch):
            MeagerCode(self.code.partition, Word(5, 0))

    def test_json_roundtrip(self):
        assert MeagerCode.from_json(self.code.to_json()) == self.code


class TestRefineCombine:
    def test_refine_examples(self):
        singles = MeagerCode(BlockPartition.from_widths([1, 1, 1, 1]), word("1011"), 0)
        ref = carlson_refine(singles)
        assert ref.partition.widths == (2, 2) and ref.witness == word("0000")
        mixed = MeagerCode(BlockPartition.from_widths([1, 2, 1, 3]), Word(7, 5), 0)
        assert carlson_refine(mixed).partition.widths == (3, 4)

    def test_refine_window(self):
        code = MeagerCode(BlockPartition.from_widths([1] * 6), Word(6, 0), 3)
        assert carlson_refine(code).window_start == 2
        assert carlson_refine(code, 3).window_start == 1

    def test_refine_guards(self):
        odd = MeagerCode(BlockPartition.from_widths([1, 1, 1]), Word(3, 0), 0)
        with pytest.raises(ValueError):
            carlson_refine(odd)
        with pytest.raises(ValueError):
            carlson_refine(MeagerCode(BlockPartition.from_widths([1] * 4), Word(4, 0), 3))
        with pytest.raises(ValueError):
            carlson_refine(MeagerCode(BlockPartition.from_widths([1] * 4), Word(4, 0)), 1)

    def test_combine_examples(self):
        part = BlockPartition.from_widths([1, 1, 1, 1])
        assert carlson_combine(word("0101"), word("1111"), part, word("0000")) == word("0101")
        y = word("1101")
        assert carlson_combine(y, y, part, word("0000")) == y

    def test_combine_applies_witness(self):
        part = BlockPartition.from_widths([2, 2])
        x = carlson_combine(word("1000"), word("0001"), part, word("1111"))
        assert x == word("0110")


class TestInclusion:
    @given(codes(max_length=10), st.data())
    def test_holds_against_independent_oracle(self, code, data):
        N = code.total_length
        x1, x2 = (Word(N, data.draw(st.integers(0, (1 << N) - 1))) for _ in range(2))
        x = carlson_combine(x1, x2, code.partition, code.witness)
        assert carlson_inclusion(code.partition.widths, code.witness.value, code.window_start,
                                 [x1.value, x2.value], x.value, 2)
        for method in ("oracle", "blockwise"):
            assert verify_carlson_inclusion(code, x1, x2, method).holds

    @given(codes(max_length=10), st.data())
    def test_methods_agree_on_arbitrary_x(self, code, data):
        N = code.total_length
        x1, x2, x = (Word(N, data.draw(st.integers(0, (1 << N) - 1))) for _ in range(3))
        oracle = verify_carlson_inclusion(code, x1, x2, "oracle", x=x)
        block = verify_carlson_inclusion(code, x1, x2, "blockwise", x=x)
        truth = carlson_inclusion(code.partition.widths, code.witness.value, code.window_start,
                                  [x1.value, x2.value], x.value, 2)
        assert oracle.holds == block.holds == truth
        if not truth:
            refined = carlson_refine(code)
            for v in (oracle, block):
                xi = (x1, x2)[v.side]
                # y ∈ complement F' + xi but y ∉ complement F + x
                assert not meager_membership(refined, v.y ^ xi)
                assert meager_membership(code, v.y ^ x)

    @pytest.mark.parametrize("seed", range(5))
    def test_random_n12(self, seed):
        part = BlockPartition.from_widths([2, 1, 3, 2, 1, 3])
        code = MeagerCode(part, random_word(seed, 12, 0), seed % 3)
        x1, x2 = random_word(seed, 12, 1), random_word(seed, 12, 2)
        assert verify_carlson_inclusion(code, x1, x2).holds

    def test_perturbed_even_block_fails(self):
        part = BlockPartition.from_widths([2, 2, 2, 2])
        code = MeagerCode(part, word("10011100"), 0)
        x1, x2 = word("00000000"), word("00110011")
        x = carlson_combine(x1, x2, part, code.witness)
        bad = Word(8, x.value ^ (0b01 << 4))  # flip inside block 2, partner block 3 separates x1, x2
        v = verify_carlson_inclusion(code, x1, x2, "oracle", x=bad)
        assert not v.holds
        assert not meager_membership(carlson_refine(code), v.y ^ (x1, x2)[v.side])
        assert meager_membership(code, v.y ^ bad)
        assert not verify_carlson_inclusion(code, x1, x2, "blockwise", x=bad).holds

    def test_equal_translations(self):
        code = random_code(8, 1, n_blocks=4, max_length=10)
        y = random_word(8, code.total_length, 0)
        assert verify_carlson_inclusion(code, y, y).holds

    def test_blockwise_scales(self):
        code = random_code(2, 0, n_blocks=1000, max_length=None)
        xs = [random_word(2, code.total_length, j) for j in (1, 2)]
        assert code.total_length > 1000
        assert verify_translation_inclusion(code, xs, "blockwise").holds

    def test_oracle_guard(self):
        code = random_code(2, 0, n_blocks=20, max_length=None)
        xs = [Word.zeros(code.total_length)] * 2
        with pytest.raises(ValueError):
            verify_translation_inclusion(code, xs, "oracle")


class TestMulti:
    @pytest.mark.parametrize("seed", range(4))
    def test_three_translations_n12(self, seed):
        part = BlockPartition.from_widths([1] * 12)
        code = MeagerCode(part, random_word(seed, 12, 0), 0)
        xs = [random_word(seed, 12, j) for j in (1, 2, 3)]
        refined, x = carlson_multi(code, xs)
        assert refined.partition.widths == (3,) * 4
        assert x == combine_translations(xs, part, code.witness)
        assert carlson_inclusion(part.widths, code.witness.value, 0, [w.value for w in xs], x.value, 3)
        for method in ("oracle", "blockwise"):
            assert verify_translation_inclusion(code, xs, method).holds

    def test_single_translation_rejected(self):
        code = MeagerCode(BlockPartition.from_widths([1, 1]), Word(2, 0))
        with pytest.raises(ValueError):
            carlson_multi(code, [Word(2, 0)])


def test_witness_correction_is_needed():
    # without the x_F shift the combined translate misses part of the union
    misses = 0
    for i in range(40):
        code = random_code(31, i, n_blocks=4, max_length=10)
        if code.witness.value == 0:
            continue
        xs = [random_word(31, code.total_length, i, j) for j in (1, 2)]
        plain = combine_translations(xs, code.partition, Word.zeros(code.total_length))
        misses += not verify_translation_inclusion(code, xs, "oracle", x=plain).holds
    assert misses > 0
