"""Interval-partition codes for meager sets and the two-translation combiner.

A :class:`MeagerCode` (partition {I_n}, witness x_F, window start m0)
stands for the truncated set

    F = {x in 2^N : x|I_n != x_F|I_n for every n >= m0}.

Grouping the blocks k at a time and zeroing the witness gives a code F'
such that for any x_1..x_k one combined translate x covers every
(2^N \\ F') + x_i inside (2^N \\ F) + x.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bitcube import BlockIndexSet, CubeSet, Word, WidthMismatch, is_subset, xor_translate

ORACLE_MAX = 20


@dataclass(frozen=True)
class BlockPartition:
    """Consecutive blocks covering ``[0, total_length)``."""

    blocks: tuple[BlockIndexSet, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if not self.blocks:
            raise ValueError("a partition needs at least one block")
        pos = 0
        for b in self.blocks:
            if b.offset != pos:
                raise ValueError(f"block {b} does not start at {pos}")
            pos = b.stop

    @classmethod
    def from_widths(cls, widths: Sequence[int]) -> "BlockPartition":
        blocks, pos = [], 0
        for w in widths:
            blocks.append(BlockIndexSet(pos, int(w)))
            pos += int(w)
        return cls(tuple(blocks))

    @property
    def total_length(self) -> int:
        return self.blocks[-1].stop

    @property
    def widths(self) -> tuple[int, ...]:
        return tuple(b.width for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def __getitem__(self, i) -> BlockIndexSet:
        return self.blocks[i]

    def prefix_length(self, k: int) -> int:
        """Number of coordinates in the first ``k`` blocks."""
        return self.blocks[k - 1].stop if k else 0

    def tail(self, k: int) -> "BlockPartition":
        """Blocks ``k..`` rebased so the first of them starts at 0."""
        return BlockPartition.from_widths(self.widths[k:])

    def grouped(self, k: int) -> "BlockPartition":
        if len(self) % k:
            raise ValueError(f"{len(self)} blocks cannot be grouped {k} at a time")
        w = self.widths
        return BlockPartition.from_widths([sum(w[i:i + k]) for i in range(0, len(w), k)])

    def to_json(self) -> list:
        return [b.to_json() for b in self.blocks]

    @classmethod
    def from_json(cls, obj: list) -> "BlockPartition":
        return cls(tuple(BlockIndexSet(int(b["offset"]), int(b["width"])) for b in obj))


@dataclass(frozen=True)
class MeagerCode:
    partition: BlockPartition
    witness: Word
    window_start: int = 0

    def __post_init__(self):
        if self.witness.width != self.partition.total_length:
            raise WidthMismatch("witness length differs from partition length")
        if not 0 <= self.window_start <= len(self.partition):
            raise ValueError("window start outside the partition")

    @property
    def total_length(self) -> int:
        return self.partition.total_length

    @property
    def window(self) -> range:
        return range(self.window_start, len(self.partition))

    def to_json(self) -> dict:
        return {
            "blocks": self.partition.to_json(),
            "witness_hex": self.witness.to_json()["bits_hex"],
            "window_start": self.window_start,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MeagerCode":
        partition = BlockPartition.from_json(obj["blocks"])
        witness = Word.from_json({"width": partition.total_length, "bits_hex": obj["witness_hex"]})
        return cls(partition, witness, int(obj["window_start"]))


def meager_membership(code: MeagerCode, x: Word) -> bool:
    if x.width != code.total_length:
        raise WidthMismatch("point length differs from code length")
    blocks = code.partition.blocks
    return all(x.restrict(blocks[n]) != code.witness.restrict(blocks[n]) for n in code.window)


def materialize_meager(code: MeagerCode) -> CubeSet:
    """The truncated set as an explicit subset of 2^N (N <= 20)."""
    N = code.total_length
    if N > ORACLE_MAX:
        raise ValueError(f"materialization limited to N <= {ORACLE_MAX}")
    points = np.arange(1 << N, dtype=np.int64)
    inside = np.ones(1 << N, dtype=bool)
    for n in code.window:
        b = code.partition[n]
        target = code.witness.restrict(b).value
        inside &= ((points >> b.offset) & ((1 << b.width) - 1)) != target
    return CubeSet(N, inside)


def translate_code(code: MeagerCode, t: Word) -> MeagerCode:
    """Code of F + t."""
    return MeagerCode(code.partition, code.witness ^ t, code.window_start)


def normalize(code: MeagerCode) -> MeagerCode:
    """Translate F by x_F, giving the same partition with an all-zero witness."""
    return translate_code(code, code.witness)


def _group_window(code: MeagerCode, k: int) -> int:
    if k < 2:
        raise ValueError("need at least two translations")
    if len(code.partition) % k:
        raise ValueError(f"{len(code.partition)} blocks not divisible into groups of {k}")
    window = -(-code.window_start // k)
    if window >= len(code.partition) // k:
        raise ValueError("no complete group inside the window")
    return window


def carlson_refine(code: MeagerCode, k: int = 2) -> MeagerCode:
    """The coarser code F': blocks grouped k at a time, witness zero.

    Group n is I_{kn} ∪ ... ∪ I_{kn+k-1}; it lies inside the original window
    exactly when kn >= m0, so the new window starts at ceil(m0 / k).  The
    whole partition must split into groups; odd leftovers are rejected
    rather than padded.
    """
    window = _group_window(code, k)
    partition = code.partition.grouped(k)
    return MeagerCode(partition, Word.zeros(partition.total_length), window)


def carlson_combine(x1: Word, x2: Word, partition: BlockPartition, x_F: Word) -> Word:
    """x with x|I_2n = (x1 + x_F)|I_2n and x|I_2n+1 = (x2 + x_F)|I_2n+1."""
    return combine_translations([x1, x2], partition, x_F)


def combine_translations(xs: Sequence[Word], partition: BlockPartition, x_F: Word) -> Word:
    k = len(xs)
    N = partition.total_length
    if any(x.width != N for x in xs) or x_F.width != N:
        raise WidthMismatch("all words must match the partition length")
    value = 0
    for n, b in enumerate(partition.blocks):
        block_mask = ((1 << b.width) - 1) << b.offset
        value |= (xs[n % k].value ^ x_F.value) & block_mask
    return Word(N, value)


def carlson_multi(code: MeagerCode, xs: Sequence[Word]) -> tuple[MeagerCode, Word]:
    refined = carlson_refine(code, len(xs))
    return refined, combine_translations(xs, code.partition, code.witness)


@dataclass(frozen=True)
class InclusionVerdict:
    holds: bool
    method: str
    # counterexample: y in (2^N \ F') + xs[side] but y not in (2^N \ F) + x
    side: int | None = None
    y: Word | None = None

    def to_json(self) -> dict:
        out = {"holds": self.holds, "method": self.method}
        if not self.holds:
            out.update(side=self.side, y=self.y.to_json())
        return out


def verify_translation_inclusion(
    code: MeagerCode, xs: Sequence[Word], method: str = "oracle", x: Word | None = None
) -> InclusionVerdict:
    """Check ⋃_i ((2^N \\ F') + xs[i]) ⊆ (2^N \\ F) + x.

    F' is ``carlson_refine(code, len(xs))`` and x defaults to the combined
    translate; pass ``x`` explicitly to test a perturbed one.

    ``oracle`` materializes all sets.  ``blockwise`` uses the exact block
    criterion: inclusion fails iff for some side i and some in-window group
    n, (xs[i] + x) differs from x_F on every block of group n.  The witness
    for such a failure is zero on that group and differs from the shifted
    witness on every other in-window block.
    """
    k = len(xs)
    refined = carlson_refine(code, k)
    if x is None:
        x = combine_translations(xs, code.partition, code.witness)
    N = code.total_length
    if method == "oracle":
        if N > ORACLE_MAX:
            raise ValueError(f"oracle limited to N <= {ORACLE_MAX}")
        outside_F = ~materialize_meager(code).membership
        rhs = xor_translate(CubeSet(N, outside_F), x)
        co_refined = CubeSet(N, ~materialize_meager(refined).membership)
        for i, xi in enumerate(xs):
            lhs = xor_translate(co_refined, xi)
            if not is_subset(lhs, rhs):
                y = int(np.flatnonzero(lhs.membership & ~rhs.membership)[0])
                return InclusionVerdict(False, method, i, Word(N, y))
        return InclusionVerdict(True, method)
    if method != "blockwise":
        raise ValueError(f"unknown method {method!r}")
    blocks = code.partition.blocks
    for i, xi in enumerate(xs):
        shift = xi ^ x ^ code.witness  # zero on a block <=> agreement with x_F there
        for g in refined.window:
            group = range(k * g, k * g + k)
            if all(shift.restrict(blocks[j]).value != 0 for j in group):
                return InclusionVerdict(False, method, i, _blockwise_witness(code, shift, group, xi))
    return InclusionVerdict(True, method)


def _blockwise_witness(code: MeagerCode, shift: Word, group: range, xi: Word) -> Word:
    w = 0
    for j in code.window:
        if j in group:
            continue
        b = code.partition[j]
        # w|I_j = shift|I_j ^ 1 makes (w + xi + x)|I_j differ from x_F|I_j
        w |= ((shift.restrict(b).value ^ 1) << b.offset)
    return Word(code.total_length, w) ^ xi


def verify_carlson_inclusion(
    code: MeagerCode, x1: Word, x2: Word, method: str = "oracle", x: Word | None = None
) -> InclusionVerdict:
    return verify_translation_inclusion(code, [x1, x2], method=method, x=x)
