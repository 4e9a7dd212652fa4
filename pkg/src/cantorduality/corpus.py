"""Seeded instance generators shared by the pipelines, tests and demos.

Each generator takes ``(seed, index)`` and draws from its own stream, so
instance ``index`` is the same no matter how a batch is split up.
"""

from __future__ import annotations


from .adversary import TargetSchedule, build_target
from .bitcube import Word, xor_translate
from .category_codes import BlockPartition, MeagerCode
from .closed_sets import ChainCode, ClosedSetAutomaton, from_transitions
from .seeding import random_word_value, rng_for

# stream tags keep generators from sharing draws
_CODE, _AUTOMATON, _SHIFT, _POINT = 11, 12, 13, 14


def random_word(seed: int, width: int, *path: int) -> Word:
    return Word(width, random_word_value(rng_for(seed, _POINT, *path), width))


def random_widths(rng, n_blocks: int, total: int, max_width: int | None = None) -> list[int]:
    """``n_blocks`` positive widths summing to ``total``."""
    widths = [1] * n_blocks
    for _ in range(total - n_blocks):
        open_ = [i for i, w in enumerate(widths) if max_width is None or w < max_width]
        widths[open_[int(rng.integers(len(open_)))]] += 1
    return widths


def random_code(seed: int, index: int, n_blocks: int = 8, max_length: int = 16, group: int = 2,
                max_width: int | None = None) -> MeagerCode:
    """A code with ``n_blocks`` blocks, N <= max_length and at least one
    complete group of ``group`` blocks inside the window."""
    if n_blocks % group:
        raise ValueError("block count must be a multiple of the group size")
    rng = rng_for(seed, _CODE, index)
    if max_length is None:
        widths = [int(w) for w in rng.integers(1, (max_width or 4) + 1, size=n_blocks)]
    else:
        total = int(rng.integers(n_blocks, max_length + 1))
        widths = random_widths(rng, n_blocks, total, max_width)
    partition = BlockPartition.from_widths(widths)
    N = partition.total_length
    # short windows let x1, x2 agree on every in-window block too often
    window = int(rng.integers(0, min(max(n_blocks // 4, 1), n_blocks - group) + 1))
    return MeagerCode(partition, Word(N, random_word_value(rng, N)), window)


def random_automaton(seed: int, index: int, max_length: int = 12, partition: BlockPartition | None = None,
                     max_states: int = 3, edge_prob: float = 0.7) -> ClosedSetAutomaton:
    """A random nonempty deterministic block automaton with N <= max_length."""
    rng = rng_for(seed, _AUTOMATON, index)
    for _ in range(1000):
        if partition is None:
            n_blocks = int(rng.integers(1, 5))
            total = int(rng.integers(n_blocks, min(max_length, 4 * n_blocks) + 1))
            part = BlockPartition.from_widths(random_widths(rng, n_blocks, total, 4))
        else:
            part = partition
        sizes = [1] + [int(rng.integers(1, max_states + 1)) for _ in part.blocks]
        transitions = []
        for b, blk in enumerate(part.blocks):
            triples = []
            for q in range(sizes[b]):
                for sym in range(1 << blk.width):
                    if rng.random() < edge_prob:
                        triples.append((q, sym, int(rng.integers(sizes[b + 1]))))
            transitions.append(triples)
        A = from_transitions(part, transitions)
        if not A.is_empty:
            return A
    raise RuntimeError("could not draw a nonempty automaton")


def shifted_chain(target: TargetSchedule, seed: int) -> ChainCode:
    """C' with J'_n = J_n + c_n for random c_n: same densities as the target,
    and a single translate of J_n swallows J'_n (so a collapsed pair fails)."""
    constraints = []
    for n, J in target.items():
        c = Word(J.width, random_word_value(rng_for(seed, _SHIFT, n), J.width))
        constraints.append(xor_translate(J, c))
    return ChainCode(target.partition, constraints)


def miniature_instance(seed: int = 0) -> tuple[TargetSchedule, ClosedSetAutomaton]:
    """Three blocks n = 2, 3, 4 of widths 3, 5, 4 (N = 12) and a two-branch C'.

    Widths this small cannot hold a dyadic in the density window, so the
    target keeps only the lower bound 1 - 1/n^2.
    """
    target = build_target(2, 4, widths={2: 3, 3: 5, 4: 4}, enforce_window=False)
    rng = rng_for(seed, _AUTOMATON, 10**6)
    heavy = rng.choice(32, size=28, replace=False)
    light = rng.choice(32, size=24, replace=False)
    last = rng.choice(16, size=13, replace=False)
    transitions = [
        [(0, s, "a") for s in range(4)] + [(0, s, "b") for s in range(4, 7)],
        [("a", int(s), "m") for s in heavy] + [("b", int(s), "m") for s in light],
        [("m", int(s), "end") for s in last],
    ]
    return target, from_transitions(target.partition, transitions)
