"""Closed subsets of truncated Cantor space as per-block automata.

A :class:`ClosedSetAutomaton` reads a word one block at a time.  Level b
holds the states reached after blocks 0..b-1; ``edges[b][q]`` lists
``(target, symbols)`` pairs where ``symbols`` is the :class:`CubeSet` of
block values leading from q to target.  Symbol sets leaving one state are
disjoint, so the automaton is deterministic.  The initial state is state 0
of level 0 and every state of the last level accepts.  Automata are always
kept pruned: every state is reachable and can reach the last level, which
makes the language of any state nonempty.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

import numpy as np

from .bitcube import CubeSet, Word, WidthMismatch, density, intersection, union, xor_translate
from .category_codes import BlockPartition

ORACLE_MAX = 20

Edges = tuple[tuple[tuple[tuple[int, CubeSet], ...], ...], ...]


class EmptyContinuation(ValueError):
    """A prefix has no continuation inside the set."""


class DensityStepError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class ClosedSetAutomaton:
    partition: BlockPartition
    level_sizes: tuple[int, ...]
    edges: Edges

    @property
    def n_blocks(self) -> int:
        return len(self.partition)

    @property
    def total_length(self) -> int:
        return self.partition.total_length

    @property
    def is_empty(self) -> bool:
        return self.level_sizes[0] == 0

    def __repr__(self) -> str:
        return f"ClosedSetAutomaton(widths={self.partition.widths}, states={self.level_sizes})"

    def to_json(self) -> dict:
        return {
            "blocks": self.partition.to_json(),
            "levels": list(self.level_sizes),
            "transitions": [
                [
                    {"from": q, "to": p, "mask_hex": S.to_json()["mask_hex"]}
                    for q, outs in enumerate(level)
                    for p, S in outs
                ]
                for level in self.edges
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ClosedSetAutomaton":
        """Inverse of :meth:`to_json`.

        A transition may instead carry a single symbol as ``bits_hex``.
        """
        partition = BlockPartition.from_json(obj["blocks"])
        raw = []
        for b, level in enumerate(obj["transitions"]):
            w = partition[b].width
            table: dict = {}
            for t in level:
                if "mask_hex" in t:
                    S = CubeSet.from_json({"width": w, "mask_hex": t["mask_hex"]})
                else:
                    S = CubeSet.from_indices(w, [Word.from_json({"width": w, "bits_hex": t["bits_hex"]}).value])
                _add_edge(table, t["from"], t["to"], S)
            raw.append(table)
        return _build(partition, raw, 0)


def _add_edge(table: dict, q, p, S: CubeSet) -> None:
    outs = table.setdefault(q, {})
    for other, T in outs.items():
        if other != p and np.any(T.membership & S.membership):
            raise ValueError(f"nondeterministic transitions from state {q!r}")
    outs[p] = union(outs[p], S) if p in outs else S


def _build(partition: BlockPartition, raw: Sequence[dict], initial: Hashable) -> ClosedSetAutomaton:
    """Prune and renumber.  ``raw[b]`` maps state -> {target: CubeSet}."""
    L = len(partition)
    # co-reachability, backwards from the last level (every state there accepts)
    alive: list[set | None] = [None] * (L + 1)
    for b in range(L - 1, -1, -1):
        alive[b] = {
            q for q, outs in raw[b].items()
            if any(len(S) and (alive[b + 1] is None or p in alive[b + 1]) for p, S in outs.items())
        }
    if L == 0 or initial not in alive[0]:
        return _empty(partition)
    ids: list[dict] = [{initial: 0}]
    edges = []
    for b in range(L):
        nxt: dict = {}
        level = []
        for q in ids[b]:  # dict order = numbering order
            outs = [
                (p, S) for p, S in raw[b][q].items()
                if len(S) and (alive[b + 1] is None or p in alive[b + 1])
            ]
            outs.sort(key=lambda e: int(e[1].indices()[0]))
            renamed = []
            for p, S in outs:
                if p not in nxt:
                    nxt[p] = len(nxt)
                renamed.append((nxt[p], S))
            level.append(tuple(sorted(renamed, key=lambda e: e[0])))
        edges.append(tuple(level))
        ids.append(nxt)
    return ClosedSetAutomaton(partition, tuple(len(i) for i in ids), tuple(edges))


def _empty(partition: BlockPartition) -> ClosedSetAutomaton:
    return ClosedSetAutomaton(partition, (0,) * (len(partition) + 1), tuple(() for _ in partition.blocks))


def _raw(A: ClosedSetAutomaton, start: int = 0) -> list[dict]:
    return [{q: dict(outs) for q, outs in enumerate(A.edges[b])} for b in range(start, A.n_blocks)]


# constructors


@dataclass(frozen=True)
class ChainCode:
    """C = {x : x|I_n ∈ J_n for every block n}."""

    partition: BlockPartition
    constraints: tuple[CubeSet, ...]

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if len(self.constraints) != len(self.partition):
            raise ValueError("one constraint per block required")
        for b, J in zip(self.partition.blocks, self.constraints):
            if J.width != b.width:
                raise WidthMismatch(f"constraint width {J.width} for block of width {b.width}")

    @property
    def measure(self) -> Fraction:
        out = Fraction(1)
        for J in self.constraints:
            out *= density(J)
        return out

    def automaton(self) -> ClosedSetAutomaton:
        return _build(self.partition, [{0: {0: J}} for J in self.constraints], 0)

    def to_json(self) -> dict:
        return {"blocks": self.partition.to_json(), "constraints": [J.to_json() for J in self.constraints]}

    @classmethod
    def from_json(cls, obj: dict) -> "ChainCode":
        return cls(BlockPartition.from_json(obj["blocks"]), tuple(CubeSet.from_json(J) for J in obj["constraints"]))


def full_automaton(partition: BlockPartition) -> ClosedSetAutomaton:
    return ChainCode(partition, [CubeSet.full(w) for w in partition.widths]).automaton()


def from_transitions(
    partition: BlockPartition, transitions: Sequence[Iterable[tuple]], initial: Hashable = 0
) -> ClosedSetAutomaton:
    """Build from per-block ``(state, symbol, state)`` triples; symbols are ints or Words."""
    if len(transitions) != len(partition):
        raise ValueError("one transition list per block required")
    raw = []
    for b, triples in enumerate(transitions):
        w = partition[b].width
        grouped: dict = {}
        for q, sym, p in triples:
            grouped.setdefault((q, p), []).append(sym.value if isinstance(sym, Word) else int(sym))
        table: dict = {}
        for (q, p), syms in grouped.items():
            _add_edge(table, q, p, CubeSet.from_indices(w, syms))
        raw.append(table)
    return _build(partition, raw, initial)


# queries


def count_words(A: ClosedSetAutomaton, level: int = 0) -> list[int]:
    """Number of accepted continuations from every state of ``level``."""
    counts = [1] * A.level_sizes[-1]
    for b in range(A.n_blocks - 1, level - 1, -1):
        counts = [sum(len(S) * counts[p] for p, S in outs) for outs in A.edges[b]]
    return counts


def count_prefixes(A: ClosedSetAutomaton, k: int) -> int:
    """Number of prefixes through level ``k`` with nonempty continuation."""
    if A.is_empty:
        return 0
    counts = [1]
    for b in range(k):
        nxt = [0] * A.level_sizes[b + 1]
        for q, outs in enumerate(A.edges[b]):
            for p, S in outs:
                nxt[p] += counts[q] * len(S)
        counts = nxt
    return sum(counts)


def measure(A: ClosedSetAutomaton) -> Fraction:
    """Exact product measure of the language."""
    if A.is_empty:
        return Fraction(0)
    return Fraction(count_words(A)[0], 1 << A.total_length)


def run(A: ClosedSetAutomaton, word: Word, start_level: int = 0, state: int = 0) -> int | None:
    """State reached after reading ``word`` from (start_level, state), or None."""
    if A.is_empty:
        return None
    b, pos = start_level, 0
    while pos < word.width:
        if b >= A.n_blocks:
            raise WidthMismatch("word longer than the remaining blocks")
        w = A.partition[b].width
        if pos + w > word.width:
            raise WidthMismatch("word does not end on a block boundary")
        sym = (word.value >> pos) & ((1 << w) - 1)
        for p, S in A.edges[b][state]:
            if S.membership[sym]:
                state = p
                break
        else:
            return None
        b, pos = b + 1, pos + w
    return state


def membership(A: ClosedSetAutomaton, x: Word) -> bool:
    if x.width != A.total_length:
        raise WidthMismatch("point length differs from automaton length")
    return run(A, x) is not None


def _level_of_prefix(A: ClosedSetAutomaton, width: int) -> int:
    for k in range(A.n_blocks + 1):
        if A.partition.prefix_length(k) == width:
            return k
    raise WidthMismatch(f"prefix of length {width} does not end on a block boundary")


def tail_automaton(A: ClosedSetAutomaton, level: int, state: int) -> ClosedSetAutomaton:
    """Language accepted from ``state`` at ``level``, over the rebased tail blocks."""
    tail = A.partition.tail(level) if level < A.n_blocks else None
    if tail is None:
        raise ValueError("no blocks after the last level")
    return _build(tail, _raw(A, level), state)


def slice(A: ClosedSetAutomaton, s: Word) -> ClosedSetAutomaton:
    """C_s: tails of members extending the prefix ``s``."""
    k = _level_of_prefix(A, s.width)
    q = run(A, s)
    if q is None:
        raise EmptyContinuation(f"prefix {s} has no continuation")
    if k == 0:
        return A
    return tail_automaton(A, k, q)


def restrict_upto(A: ClosedSetAutomaton, k: int) -> list[Word]:
    """All prefixes through level ``k`` with nonempty continuation, in idx order."""
    if not 0 <= k <= A.n_blocks:
        raise ValueError("level outside the automaton")
    if A.is_empty:
        return []
    frontier = [(0, 0)]  # (prefix value, state)
    for b in range(k):
        off = A.partition[b].offset
        frontier = [
            (value | (int(sym) << off), p)
            for value, q in frontier
            for p, S in A.edges[b][q]
            for sym in S.indices()
        ]
    width = A.partition.prefix_length(k)
    return sorted(Word(width, v) for v, _ in frontier)


def project_block(A: ClosedSetAutomaton, m: int) -> CubeSet:
    """{x|I_m : x in A}; pruning makes every edge at block m realizable."""
    if not 0 <= m < A.n_blocks:
        raise ValueError("block index outside the automaton")
    out = CubeSet.empty(A.partition[m].width)
    for outs in A.edges[m]:
        for _, S in outs:
            out = union(out, S)
    return out


def intersect(A1: ClosedSetAutomaton, A2: ClosedSetAutomaton) -> ClosedSetAutomaton:
    if A1.partition != A2.partition:
        raise ValueError("automata over different partitions")
    if A1.is_empty or A2.is_empty:
        return _empty(A1.partition)
    raw = []
    frontier = {(0, 0)}
    for b in range(A1.n_blocks):
        table: dict = {}
        nxt = set()
        for q1, q2 in frontier:
            outs = {}
            for p1, S1 in A1.edges[b][q1]:
                for p2, S2 in A2.edges[b][q2]:
                    S = intersection(S1, S2)
                    if len(S):
                        outs[(p1, p2)] = S
                        nxt.add((p1, p2))
            table[(q1, q2)] = outs
        raw.append(table)
        frontier = nxt
    return _build(A1.partition, raw, (0, 0))


def translate_closed(A: ClosedSetAutomaton, t: Word) -> ClosedSetAutomaton:
    """{y + t : y in A}: every block symbol u becomes u + t|I_n."""
    if t.width != A.total_length:
        raise WidthMismatch("translation length differs from automaton length")
    edges = tuple(
        tuple(tuple((p, xor_translate(S, t.restrict(A.partition[b]))) for p, S in outs) for outs in level)
        for b, level in enumerate(A.edges)
    )
    return ClosedSetAutomaton(A.partition, A.level_sizes, edges)


def oracle_enumerate(A: ClosedSetAutomaton) -> CubeSet:
    """Explicit language as a subset of 2^N, by running all points (N <= 20)."""
    N = A.total_length
    if N > ORACLE_MAX:
        raise ValueError(f"enumeration limited to N <= {ORACLE_MAX}")
    points = np.arange(1 << N, dtype=np.int64)
    state = np.zeros(1 << N, dtype=np.int64)
    if A.is_empty:
        return CubeSet.empty(N)
    for b, blk in enumerate(A.partition.blocks):
        table = np.full((A.level_sizes[b] + 1, 1 << blk.width), -1, dtype=np.int64)
        for q, outs in enumerate(A.edges[b]):
            for p, S in outs:
                table[q, S.membership] = p
        sym = (points >> blk.offset) & ((1 << blk.width) - 1)
        state = table[state, sym]  # dead (-1) indexes the all -1 last row
    return CubeSet(N, state >= 0)


# density step


@dataclass(frozen=True)
class DensityStep:
    """Extensions r^s from level ``consumed`` to a common ``level``.

    The tail after s⌢r^s depends only on the state s reaches, so extensions
    are keyed by state: ``extensions[q]`` is r^s for every prefix s ending
    in q, and ``targets[q]`` is the state s⌢r^s ends in.  ``intersection``
    is ⋂_s C_{s⌢r^s} over the blocks after ``level`` (rebased).
    """

    consumed: int
    level: int
    extensions: dict
    targets: dict
    intersection: ClosedSetAutomaton
    synchronized: bool

    def extension_for(self, A: ClosedSetAutomaton, s: Word) -> Word:
        q = run(A, s)
        if q is None:
            raise EmptyContinuation(f"prefix {s} has no continuation")
        return self.extensions[q]

    def extensions_by_prefix(self, A: ClosedSetAutomaton, limit: int = 10**5) -> dict:
        prefixes = restrict_upto(A, self.consumed)
        if len(prefixes) > limit:
            raise ValueError(f"{len(prefixes)} prefixes exceed the limit {limit}")
        return {s: self.extensions[run(A, s)] for s in prefixes}

    def intersection_measure(self) -> Fraction:
        return measure(self.intersection)

    def to_json(self) -> dict:
        return {
            "consumed": self.consumed,
            "level": self.level,
            "synchronized": self.synchronized,
            "extensions": [
                {"state": q, "target": self.targets[q], "r": self.extensions[q].to_json()}
                for q in sorted(self.extensions)
            ],
        }


def _reach(A: ClosedSetAutomaton, b: int, states: set) -> set:
    return {p for q in states for p, _ in A.edges[b][q]}


def least_path(
    A: ClosedSetAutomaton, start_level: int, state: int, end_level: int, goals=None
) -> Word:
    """Lexicographically least block sequence from ``state`` to a goal state.

    Blocks are compared in order, each by its idx.  ``goals`` defaults to
    every state of ``end_level``.
    """
    can = [set() for _ in range(end_level + 1)]
    can[end_level] = set(range(A.level_sizes[end_level])) if goals is None else set(goals)
    for b in range(end_level - 1, start_level - 1, -1):
        can[b] = {s for s, outs in enumerate(A.edges[b]) if any(p in can[b + 1] for p, _ in outs)}
    if state not in can[start_level]:
        raise EmptyContinuation(f"no path from state {state} at level {start_level}")
    value, pos = 0, 0
    for b in range(start_level, end_level):
        sym, state = min((int(S.indices()[0]), p) for p, S in A.edges[b][state] if p in can[b + 1])
        value |= sym << pos
        pos += A.partition[b].width
    return Word(pos, value)


def least_word_through(A: ClosedSetAutomaton, m: int, symbol: int) -> Word:
    """Least prefix through block ``m`` whose block-m value is ``symbol``."""
    ends = {q for q, outs in enumerate(A.edges[m]) if any(S.membership[symbol] for _, S in outs)}
    if not ends:
        raise EmptyContinuation(f"symbol {symbol} never occurs at block {m}")
    head = least_path(A, 0, 0, m, ends)
    return head.concat(Word(A.partition[m].width, symbol))


def density_step(A: ClosedSetAutomaton, consumed: int, max_level: int | None = None) -> DensityStep:
    """Pick extensions r^s for all prefixes s through ``consumed`` and one
    common level ℓ > consumed so that ⋂_s C_{s⌢r^s} has positive measure.

    Levels ``consumed + 1 .. max_level`` are tried in increasing order
    (``max_level`` defaults to the last level that leaves a tail block).
    At each level a state reachable from every state of ``consumed`` is
    preferred (largest tail measure, then smallest id); otherwise states
    are assigned greedily, keeping the running intersection's measure as
    large as possible.
    """
    if A.is_empty:
        raise ValueError("density step needs a set of positive measure")
    if max_level is None:
        max_level = A.n_blocks - 1
    if not 0 <= consumed < max_level <= A.n_blocks - 1:
        raise ValueError(f"no room for a step from level {consumed} to at most {max_level}")
    sources = list(range(A.level_sizes[consumed]))
    reach = {q: {q} for q in sources}
    for level in range(consumed + 1, max_level + 1):
        reach = {q: _reach(A, level - 1, r) for q, r in reach.items()}
        common = set.intersection(*reach.values())
        if common:
            tails = {p: tail_automaton(A, level, p) for p in sorted(common)}
            p = max(tails, key=lambda s: measure(tails[s]))
            return _finish(A, consumed, level, {q: p for q in sources}, tails[p], True)
        current, targets = None, {}
        for q in sources:
            best = None
            for p in sorted(reach[q]):
                cand = tail_automaton(A, level, p)
                cand = cand if current is None else intersect(current, cand)
                m = measure(cand)
                if m > 0 and (best is None or m > best[0]):
                    best = (m, p, cand)
            if best is None:
                break
            targets[q], current = best[1], best[2]
        else:
            return _finish(A, consumed, level, targets, current, False)
    raise DensityStepError(f"no extension family from level {consumed} up to level {max_level}")


def _finish(A, consumed, level, targets, inter, synchronized) -> DensityStep:
    extensions = {q: least_path(A, consumed, q, level, {p}) for q, p in targets.items()}
    return DensityStep(consumed, level, extensions, targets, inter, synchronized)
