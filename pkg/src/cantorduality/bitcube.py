"""Exact set arithmetic on finite hypercubes 2^I under coordinatewise XOR.

A vertex of the cube of width n is a word w of n bits, encoded as the
integer idx(w) = sum(w(i) * 2**i); coordinate 0 is the least significant
bit.  A :class:`CubeSet` stores its membership as a boolean vector of
length 2**n indexed by idx.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .seeding import rng_for

#: Largest cube width whose membership vector we agree to materialize.
W_MAX = 24
#: Largest width for which every subset of the cube may be enumerated.
EXHAUSTIVE_MAX = 4


class WidthMismatch(ValueError):
    pass


class Dyadic(Fraction):
    """An exact rational in [0, 1] with a power-of-two denominator.

    Arithmetic falls back to plain :class:`~fractions.Fraction`; use
    :meth:`from_fraction` to come back.
    """

    def __new__(cls, numerator: int = 0, log2_denominator: int = 0):
        if log2_denominator < 0:
            raise ValueError("log2_denominator must be >= 0")
        self = super().__new__(cls, numerator, 1 << log2_denominator)
        if not 0 <= self <= 1:
            raise ValueError(f"dyadic {self} outside [0, 1]")
        return self

    @classmethod
    def from_fraction(cls, value) -> "Dyadic":
        value = Fraction(value)
        den = value.denominator
        if den & (den - 1):
            raise ValueError(f"{value} is not dyadic")
        return cls(value.numerator, den.bit_length() - 1)

    @property
    def log2_denominator(self) -> int:
        return self.denominator.bit_length() - 1

    def __reduce__(self):
        return (Dyadic, (self.numerator, self.log2_denominator))

    def __repr__(self) -> str:
        return f"Dyadic({self.numerator}, {self.log2_denominator})"

    def to_json(self) -> dict:
        return {"numerator": self.numerator, "log2_denominator": self.log2_denominator}

    @classmethod
    def from_json(cls, obj: dict) -> "Dyadic":
        return cls(int(obj["numerator"]), int(obj["log2_denominator"]))


@dataclass(frozen=True)
class BlockIndexSet:
    """A run of consecutive coordinates ``[offset, offset + width)``."""

    offset: int
    width: int

    def __post_init__(self):
        if self.offset < 0:
            raise ValueError("offset must be non-negative")
        if self.width < 1:
            raise ValueError("block width must be >= 1")

    @property
    def stop(self) -> int:
        return self.offset + self.width

    def to_json(self) -> dict:
        return {"offset": self.offset, "width": self.width}


def _hex_le(value: int, nbits: int) -> str:
    return value.to_bytes(max(1, (nbits + 7) // 8), "little").hex()


def _from_hex_le(text: str) -> int:
    return int.from_bytes(bytes.fromhex(text), "little")


@dataclass(frozen=True, order=True)
class Word:
    """A finite 0/1 sequence, stored as an integer (bit i = coordinate i)."""

    width: int
    value: int = 0

    def __post_init__(self):
        if self.width < 0:
            raise ValueError("width must be non-negative")
        if not 0 <= self.value < (1 << self.width) or (self.width == 0 and self.value):
            raise ValueError(f"value {self.value} does not fit in {self.width} bits")

    @classmethod
    def zeros(cls, width: int) -> "Word":
        return cls(width, 0)

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "Word":
        value = 0
        for i, b in enumerate(bits):
            if b not in (0, 1):
                raise ValueError("bits must be 0 or 1")
            value |= b << i
        return cls(len(bits), value)

    @classmethod
    def from_string(cls, text: str) -> "Word":
        """Parse ``"0101"``; the first character is coordinate 0."""
        return cls.from_bits([int(c) for c in text])

    @property
    def idx(self) -> int:
        return self.value

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.value >> i) & 1 for i in range(self.width))

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)

    def __xor__(self, other: "Word") -> "Word":
        if not isinstance(other, Word):
            return NotImplemented
        if other.width != self.width:
            raise WidthMismatch(f"widths {self.width} and {other.width}")
        return Word(self.width, self.value ^ other.value)

    def restrict(self, block: BlockIndexSet) -> "Word":
        if block.stop > self.width:
            raise WidthMismatch(f"block {block} outside word of width {self.width}")
        return Word(block.width, (self.value >> block.offset) & ((1 << block.width) - 1))

    def concat(self, tail: "Word") -> "Word":
        return Word(self.width + tail.width, self.value | (tail.value << self.width))

    def to_json(self) -> dict:
        return {"width": self.width, "bits_hex": _hex_le(self.value, self.width)}

    @classmethod
    def from_json(cls, obj: dict) -> "Word":
        return cls(int(obj["width"]), _from_hex_le(obj["bits_hex"]))


#: Elements of a single block cube; same representation as whole words.
BlockWord = Word


class CubeSet:
    """An immutable subset J of the cube 2^n."""

    __slots__ = ("width", "_members", "_count")

    def __init__(self, width: int, membership):
        if width < 0 or width > W_MAX:
            raise ValueError(f"cube width {width} outside [0, {W_MAX}]")
        members = np.array(membership, dtype=bool).reshape(-1)
        if members.shape[0] != 1 << width:
            raise ValueError(f"membership length {members.shape[0]} != 2**{width}")
        members.setflags(write=False)
        self.width = width
        self._members = members
        self._count = int(np.count_nonzero(members))

    # constructors

    @classmethod
    def _wrap(cls, width: int, members: np.ndarray) -> "CubeSet":
        # trusted fast path: members is a fresh bool array of the right size
        self = object.__new__(cls)
        members.setflags(write=False)
        self.width = width
        self._members = members
        self._count = int(np.count_nonzero(members))
        return self

    @classmethod
    def empty(cls, width: int) -> "CubeSet":
        return cls(width, np.zeros(1 << width, dtype=bool))

    @classmethod
    def full(cls, width: int) -> "CubeSet":
        return cls(width, np.ones(1 << width, dtype=bool))

    @classmethod
    def from_indices(cls, width: int, indices: Iterable[int]) -> "CubeSet":
        members = np.zeros(1 << width, dtype=bool)
        idx = np.fromiter(indices, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= members.size):
            raise ValueError("vertex index outside the cube")
        members[idx] = True
        return cls(width, members)

    @classmethod
    def from_words(cls, words: Iterable[Word]) -> "CubeSet":
        words = list(words)
        if not words:
            raise ValueError("cannot infer width from no words")
        width = words[0].width
        if any(w.width != width for w in words):
            raise WidthMismatch("words of different widths")
        return cls.from_indices(width, (w.value for w in words))

    @classmethod
    def from_mask(cls, width: int, mask: int) -> "CubeSet":
        size = 1 << width
        if mask < 0 or mask >> size:
            raise ValueError("mask has bits outside the cube")
        raw = np.frombuffer(mask.to_bytes(max(1, (size + 7) // 8), "little"), dtype=np.uint8)
        return cls(width, np.unpackbits(raw, bitorder="little")[:size].astype(bool))

    # views

    @property
    def membership(self) -> np.ndarray:
        return self._members

    @property
    def size(self) -> int:
        return 1 << self.width

    @property
    def mask(self) -> int:
        packed = np.packbits(self._members, bitorder="little")
        return int.from_bytes(packed.tobytes(), "little")

    def __len__(self) -> int:
        return self._count

    def __contains__(self, word) -> bool:
        if isinstance(word, Word):
            if word.width != self.width:
                raise WidthMismatch(f"word width {word.width} vs cube width {self.width}")
            word = word.value
        return bool(self._members[word])

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self._members)

    def __iter__(self) -> Iterator[Word]:
        for i in self.indices():
            yield Word(self.width, int(i))

    def __eq__(self, other) -> bool:
        if not isinstance(other, CubeSet):
            return NotImplemented
        return self.width == other.width and np.array_equal(self._members, other._members)

    def __hash__(self) -> int:
        return hash((self.width, np.packbits(self._members).tobytes()))

    def __repr__(self) -> str:
        if self.width <= 4:
            inner = ",".join(str(w) for w in self)
            return f"CubeSet({self.width}, {{{inner}}})"
        return f"CubeSet(width={self.width}, count={self._count})"

    def to_json(self) -> dict:
        packed = np.packbits(self._members, bitorder="little")
        return {"width": self.width, "mask_hex": packed.tobytes().hex()}

    @classmethod
    def from_json(cls, obj: dict) -> "CubeSet":
        width = int(obj["width"])
        raw = np.frombuffer(bytes.fromhex(obj["mask_hex"]), dtype=np.uint8)
        bits = np.unpackbits(raw, bitorder="little")
        size = 1 << width
        if bits.size < size or bits[size:].any():
            raise ValueError("mask_hex does not match the declared width")
        return cls(width, bits[:size].astype(bool))


def _check_widths(a, b) -> None:
    if a.width != b.width:
        raise WidthMismatch(f"widths {a.width} and {b.width}")


def xor_translate(J: CubeSet, t: Word) -> CubeSet:
    """Return J + t = {v ^ t : v in J}."""
    _check_widths(J, t)
    if t.value == 0:
        return J
    idx = np.arange(J.size, dtype=np.int64) ^ t.value
    # v in J + t  <=>  v ^ t in J
    return CubeSet._wrap(J.width, J.membership[idx])


def density(J: CubeSet) -> Dyadic:
    return Dyadic(len(J), J.width)


def union(A: CubeSet, B: CubeSet) -> CubeSet:
    _check_widths(A, B)
    return CubeSet._wrap(A.width, A.membership | B.membership)


def intersection(A: CubeSet, B: CubeSet) -> CubeSet:
    _check_widths(A, B)
    return CubeSet._wrap(A.width, A.membership & B.membership)


def difference(A: CubeSet, B: CubeSet) -> CubeSet:
    _check_widths(A, B)
    return CubeSet._wrap(A.width, A.membership & ~B.membership)


def complement(A: CubeSet) -> CubeSet:
    return CubeSet._wrap(A.width, ~A.membership)


def is_subset(A: CubeSet, B: CubeSet) -> bool:
    _check_widths(A, B)
    return not np.any(A.membership & ~B.membership)


def enumerate_cubesets(
    n: int, filter: Callable[[Dyadic], bool] | None = None
) -> Iterator[CubeSet]:
    """Yield every subset of 2^n in increasing membership-mask order.

    ``filter`` receives the density of each candidate.
    """
    if n > EXHAUSTIVE_MAX:
        raise ValueError(f"exhaustive enumeration limited to n <= {EXHAUSTIVE_MAX}")
    size = 1 << n
    weights = 1 << np.arange(size, dtype=np.int64)
    for mask in range(1 << size):
        if filter is not None and not filter(Dyadic(mask.bit_count(), n)):
            continue
        yield CubeSet._wrap(n, (mask & weights) != 0)


def random_cubeset(n: int, density_window: tuple, seed: int) -> CubeSet:
    """Draw a uniformly random subset of 2^n whose density lies in the window.

    Uniform over all admissible sets: the cardinality k is drawn with weight
    binom(2^n, k), then a uniform k-subset is taken.
    """
    lo, hi = (Fraction(v) for v in density_window)
    size = 1 << n
    kmin = math.ceil(lo * size)
    kmax = math.floor(hi * size)
    kmin, kmax = max(kmin, 0), min(kmax, size)
    if kmin > kmax:
        raise ValueError(f"no density with denominator 2**{n} in [{lo}, {hi}]")
    rng = rng_for(seed, n)
    ks = np.arange(kmin, kmax + 1)
    # log-weights are used only to pick k; the returned set is exact
    logw = np.array([math.lgamma(size + 1) - math.lgamma(k + 1) - math.lgamma(size - k + 1) for k in ks])
    p = np.exp(logw - logw.max())
    k = int(rng.choice(ks, p=p / p.sum()))
    members = np.zeros(size, dtype=bool)
    members[rng.choice(size, size=k, replace=False)] = True
    return CubeSet(n, members)


def walsh_hadamard(values) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis (int64)."""
    a = np.array(values, dtype=np.int64)
    size = a.shape[-1]
    if size & (size - 1):
        raise ValueError("length must be a power of two")
    lead = a.shape[:-1]
    h = 1
    while h < size:
        a = a.reshape(lead + (-1, 2, h))
        a = np.stack((a[..., 0, :] + a[..., 1, :], a[..., 0, :] - a[..., 1, :]), axis=-2)
        h *= 2
    return a.reshape(lead + (size,))


def overlap_counts(A: CubeSet, B: CubeSet, method: str = "wht") -> np.ndarray:
    """Return c with c[s] = |A ∩ (B + s)| for every translate s.

    ``method="naive"`` is the reference loop; ``"wht"`` computes the XOR
    correlation through the Walsh-Hadamard transform.
    """
    _check_widths(A, B)
    if method == "naive":
        idx = np.arange(A.size, dtype=np.int64)
        a, b = A.membership, B.membership
        return np.array([np.count_nonzero(a & b[idx ^ s]) for s in range(A.size)], dtype=np.int64)
    if method != "wht":
        raise ValueError(f"unknown method {method!r}")
    spectrum = walsh_hadamard(A.membership) * walsh_hadamard(B.membership)
    return walsh_hadamard(spectrum) >> A.width
