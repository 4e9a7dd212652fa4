"""Two translates of a positive-measure closed set that no single translate
of the target chain set can cover.

The target is the chain set C = {x : x|I_n ∈ J_n} with each J_n of density
just above 1 - 1/n².  Given a positive-measure closed set C', the staged
construction picks blocks n_1 < n_2 < ... and translations t1, t2 on them
(zero elsewhere) so that for every x some z ∈ (C'+x1) ∪ (C'+x2) has
(z + x)|I_{n_k} ∉ J_{n_k} on at least half of the stages.

Block indices ``n`` are absolute (``n_start`` is the first block of the
partition); levels and positions count blocks from 0.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from . import closed_sets as cs
from .bitcube import W_MAX, CubeSet, Dyadic, Word, WidthMismatch, density, difference, is_subset, xor_translate
from .category_codes import BlockPartition
from .closed_sets import ChainCode, ClosedSetAutomaton, DensityStep
from .lemma_engine import LemmaInstance, WitnessPair, check_pair, find_pair
from .seeding import rng_for

log = logging.getLogger(__name__)

EXHAUSTIVE_CHECK_WIDTH = 12
SAMPLED_CHECKS = 10**4


class ConstructionError(RuntimeError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class SelectionError(RuntimeError):
    def __init__(self, message, densities=()):
        super().__init__(message)
        self.densities = list(densities)


# target


def default_width(n: int) -> int:
    """max(ceil(5 log2 n) + 1, 5): enough for a dyadic in the density window."""
    return max((n**5 - 1).bit_length() + 1, 5)


def exponential_width(n: int) -> int:
    """Least width exceeding 2^n."""
    return (1 << n) + 1


def window_count(n: int, width: int) -> int:
    """Least k with k / 2^width >= 1 - 1/n^2."""
    return -(-((n * n - 1) << width) // (n * n))


def in_window(n: int, k: int, width: int) -> bool:
    # 1 - 1/n^2 <= k/2^w <= 1 - 1/n^2 + 1/n^5
    return ((n * n - 1) << width) <= k * n * n and k * n**5 <= (n**5 - n**3 + 1) << width


@dataclass(frozen=True)
class TargetSchedule:
    n_start: int
    partition: BlockPartition
    constraints: tuple[CubeSet, ...]
    windowed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        ChainCode(self.partition, self.constraints)  # shape validation
        if self.windowed:
            for n, J in self.items():
                if not in_window(n, len(J), J.width):
                    raise ValueError(f"density of J_{n} outside [1 - 1/n^2, 1 - 1/n^2 + 1/n^5]")

    @property
    def widths(self) -> tuple[int, ...]:
        return self.partition.widths

    @property
    def densities(self) -> tuple[Dyadic, ...]:
        return tuple(density(J) for J in self.constraints)

    @property
    def n_end(self) -> int:
        return self.n_start + len(self.partition) - 1

    def items(self):
        return ((self.n_start + p, J) for p, J in enumerate(self.constraints))

    def position(self, n: int) -> int:
        return n - self.n_start

    def block(self, n: int):
        return self.partition[self.position(n)]

    def J(self, n: int) -> CubeSet:
        return self.constraints[self.position(n)]

    def chain(self) -> ChainCode:
        return ChainCode(self.partition, self.constraints)

    @property
    def measure(self) -> Fraction:
        return self.chain().measure

    def to_json(self) -> dict:
        return {
            "n_start": self.n_start,
            "windowed": self.windowed,
            "blocks": self.partition.to_json(),
            "constraints": [J.to_json() for J in self.constraints],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TargetSchedule":
        return cls(
            int(obj["n_start"]),
            BlockPartition.from_json(obj["blocks"]),
            tuple(CubeSet.from_json(J) for J in obj["constraints"]),
            bool(obj.get("windowed", True)),
        )


def lowest_set(width: int, k: int) -> CubeSet:
    """The lexicographically least k-element subset: indices 0..k-1."""
    members = np.zeros(1 << width, dtype=bool)
    members[:k] = True
    return CubeSet(width, members)


def build_target(
    n_start: int = 2,
    n_end: int = 6,
    widths: dict | None = None,
    exponential_widths: bool = False,
    enforce_window: bool = True,
) -> TargetSchedule:
    """J_n = lowest-index set whose density is the least dyadic >= 1 - 1/n^2.

    ``widths`` overrides individual block widths; ``exponential_widths`` uses
    2^n + 1, feasible only while that stays within the cube limit.
    """
    if n_start < 2:
        raise ValueError("blocks start at n >= 2; n = 1 allows density 0")
    if n_end < n_start:
        raise ValueError("empty block range")
    ws, constraints = [], []
    for n in range(n_start, n_end + 1):
        w = exponential_width(n) if exponential_widths else default_width(n)
        if widths and n in widths:
            w = int(widths[n])
        if w > W_MAX:
            raise ValueError(f"width {w} for block {n} exceeds {W_MAX}")
        k = window_count(n, w)
        if enforce_window and not in_window(n, k, w):
            raise ValueError(f"no dyadic with denominator 2^{w} in the density window of block {n}")
        ws.append(w)
        constraints.append(lowest_set(w, k))
    return TargetSchedule(n_start, BlockPartition.from_widths(ws), tuple(constraints), enforce_window)


# block selection


@dataclass(frozen=True)
class BlockCertificate:
    n: int
    Jprime: CubeSet
    density: Dyadic
    delta: Dyadic
    epsilon: Dyadic

    @property
    def threshold(self) -> Fraction:
        return 1 - Fraction(1, 2 * self.n)

    @property
    def dense(self) -> bool:
        return self.density > self.threshold

    @property
    def gap(self) -> bool:
        return self.delta**2 < self.epsilon


def select_block(intersection: ClosedSetAutomaton, level: int, target: TargetSchedule) -> BlockCertificate:
    """First block after ``level`` whose projection has density > 1 - 1/(2n).

    ``intersection`` covers the blocks from position ``level`` on.
    """
    if intersection.is_empty:
        raise ValueError("intersection must have positive measure")
    seen = []
    for m in range(intersection.n_blocks):
        n = target.n_start + level + m
        Jp = cs.project_block(intersection, m)
        d = density(Jp)
        seen.append((n, d))
        if d > 1 - Fraction(1, 2 * n):
            eps = Dyadic.from_fraction(1 - density(target.J(n)))
            return BlockCertificate(n, Jp, d, Dyadic.from_fraction(1 - d), eps)
    raise SelectionError(f"no block after level {level} with density > 1 - 1/(2n)", seen)


# construction


@dataclass(frozen=True)
class Stage:
    n: int
    step: DensityStep
    Jprime: CubeSet
    pair: WitnessPair
    delta: Dyadic
    epsilon: Dyadic

    def to_json(self) -> dict:
        out = self.step.to_json()
        out.update(
            n=self.n,
            intersection=self.step.intersection.to_json(),
            Jprime=self.Jprime.to_json(),
            witness=self.pair.to_json(),
            delta=self.delta.to_json(),
            epsilon=self.epsilon.to_json(),
        )
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Stage":
        ext = {e["state"]: Word.from_json(e["r"]) for e in obj["extensions"]}
        targets = {e["state"]: e["target"] for e in obj["extensions"]}
        step = DensityStep(
            obj["consumed"], obj["level"], ext, targets,
            ClosedSetAutomaton.from_json(obj["intersection"]), obj["synchronized"],
        )
        return cls(
            obj["n"], step, CubeSet.from_json(obj["Jprime"]), WitnessPair.from_json(obj["witness"]),
            Dyadic.from_json(obj["delta"]), Dyadic.from_json(obj["epsilon"]),
        )


@dataclass(frozen=True)
class AdversaryTrace:
    n_start: int
    partition: BlockPartition
    stages: tuple[Stage, ...]
    x1: Word
    x2: Word

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))

    def t(self, side: int, k: int) -> Word:
        pair = self.stages[k].pair
        return pair.t1 if side == 1 else pair.t2

    def x(self, side: int) -> Word:
        return self.x1 if side == 1 else self.x2

    def block(self, k: int):
        return self.partition[self.stages[k].n - self.n_start]

    def to_json(self) -> dict:
        return {
            "n_start": self.n_start,
            "blocks": self.partition.to_json(),
            "stages": [s.to_json() for s in self.stages],
            "x1": self.x1.to_json(),
            "x2": self.x2.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "AdversaryTrace":
        return cls(
            int(obj["n_start"]), BlockPartition.from_json(obj["blocks"]),
            tuple(Stage.from_json(s) for s in obj["stages"]),
            Word.from_json(obj["x1"]), Word.from_json(obj["x2"]),
        )


def _place(word: Word, block, value: int) -> Word:
    return Word(word.width, word.value | (value << block.offset))


def construct_pair(Cprime: ClosedSetAutomaton, target: TargetSchedule, stages: int) -> AdversaryTrace:
    """Run ``stages`` rounds of density step, block selection and lemma witness."""
    if Cprime.partition != target.partition:
        raise ValueError("C' and the target use different partitions")
    if cs.measure(Cprime) <= 0:
        raise ValueError("C' must have positive measure")
    N = target.partition.total_length
    x1 = x2 = Word.zeros(N)
    done: list[Stage] = []
    consumed = 0

    def partial():
        return AdversaryTrace(target.n_start, target.partition, done, x1, x2)

    for k in range(stages):
        try:
            step = cs.density_step(Cprime, consumed)
            cert = select_block(step.intersection, step.level, target)
            inst = LemmaInstance(cert.Jprime, target.J(cert.n), strict=False)
            pair = find_pair(inst)
        except Exception as exc:
            raise ConstructionError(f"stage {k + 1}: {exc}", partial()) from exc
        block = target.block(cert.n)
        x1 = _place(x1, block, pair.t1.value)
        x2 = _place(x2, block, pair.t2.value)
        done.append(Stage(cert.n, step, cert.Jprime, pair, cert.delta, cert.epsilon))
        consumed = target.position(cert.n) + 1
        log.info("stage %d: level %d, block n=%d, delta=%s, epsilon=%s, t2=%s",
                 k + 1, step.level, cert.n, cert.delta, cert.epsilon, pair.t2)
    return partial()


def drop_t2(trace: AdversaryTrace) -> AdversaryTrace:
    """Negative control: zero out every t2, leaving x2 = 0."""
    stages = tuple(replace(s, pair=WitnessPair(s.pair.t1, Word.zeros(s.pair.t2.width), 0)) for s in trace.stages)
    return replace(trace, stages=stages, x2=Word.zeros(trace.x2.width))


# escape


def choose_exit(Jprime: CubeSet, t: Word, J: CubeSet, s: Word) -> tuple[Word, bool]:
    """Least member of (J'+t) \\ (J+s) if any, else least member of J'+t."""
    if not len(Jprime):
        raise ValueError("J' is empty")
    moved = xor_translate(Jprime, t)
    outside = difference(moved, xor_translate(J, s))
    pool, exited = (outside, True) if len(outside) else (moved, False)
    return Word(J.width, int(pool.indices()[0])), exited


def stage_exits(trace: AdversaryTrace, target: TargetSchedule, x: Word) -> list[tuple[bool, bool]]:
    """For each stage, whether J'+t1 and J'+t2 escape J + x|I_n."""
    out = []
    for k, stage in enumerate(trace.stages):
        Js = xor_translate(target.J(stage.n), x.restrict(trace.block(k)))
        out.append(tuple(not is_subset(xor_translate(stage.Jprime, trace.t(i, k)), Js) for i in (1, 2)))
    return out


def pick_side(trace: AdversaryTrace, target: TargetSchedule, x: Word) -> tuple[int, tuple[int, ...]]:
    """Side escaping on at least half of the stages (ties go to side 1) and its stages."""
    if x.width != trace.partition.total_length:
        raise WidthMismatch("x has the wrong length")
    exits = stage_exits(trace, target, x)
    c1 = sum(e[0] for e in exits)
    c2 = sum(e[1] for e in exits)
    side = 1 if c1 >= c2 else 2
    return side, tuple(k for k, e in enumerate(exits) if e[side - 1])


@dataclass(frozen=True)
class EscapeRecord:
    x: Word
    side: int
    U: tuple[int, ...]
    z: Word
    escapes: tuple[int, ...]

    @property
    def escape_count(self) -> int:
        return len(self.escapes)

    def to_json(self) -> dict:
        return {
            "x": self.x.to_json(), "side": self.side, "U": list(self.U),
            "z": self.z.to_json(), "escapes": list(self.escapes),
        }


def build_diagonal(
    trace: AdversaryTrace, Cprime: ClosedSetAutomaton, target: TargetSchedule, x: Word, side: int, U=None
) -> EscapeRecord:
    """The point z ∈ C' + x_side that escapes J_{n_k} + x|I_{n_k} on stages in U.

    Works in C' coordinates (z - x_side) and alternates the density-step
    filler with the exit block: the filler r^s reaches the step's level, a
    least path through the intersection then reaches the block n_k, whose
    value is the exit choice shifted back by t_side.  Every partial word
    keeps a nonempty continuation in C'.
    """
    if U is None:
        _, U = pick_side(trace, target, x)
    value, pos, state, level = 0, 0, 0, 0
    for k, stage in enumerate(trace.stages):
        step = stage.step
        assert level == step.consumed, "stage does not continue where the last one ended"
        r = step.extensions[state]
        value |= r.value << pos
        pos += r.width
        state, level = step.targets[state], step.level
        t = trace.t(side, k)
        u, _ = choose_exit(stage.Jprime, t, target.J(stage.n), x.restrict(trace.block(k)))
        m = target.position(stage.n) - level
        w = cs.least_word_through(step.intersection, m, (u ^ t).value)
        state = cs.run(Cprime, w, level, state)
        assert state is not None, "continuation inside C' became empty"
        value |= w.value << pos
        pos += w.width
        level += m + 1
    if level < Cprime.n_blocks:
        tail = cs.least_path(Cprime, level, state, Cprime.n_blocks)
        value |= tail.value << pos
    z = Word(Cprime.total_length, value) ^ trace.x(side)
    escapes = tuple(
        k for k in range(len(trace.stages))
        if (z ^ x).restrict(trace.block(k)) not in target.J(trace.stages[k].n)
    )
    return EscapeRecord(x, side, tuple(U), z, escapes)


@dataclass(frozen=True)
class Verdict:
    holds: bool
    record: EscapeRecord
    in_translate: bool
    required: int

    def to_json(self) -> dict:
        out = self.record.to_json()
        out.update(holds=self.holds, in_translate=self.in_translate, required=self.required)
        return out


def required_escapes(stages: int) -> int:
    """At least half the stages, and at least one escape to decide anything."""
    return max(1, -(-stages // 2))


def verify_noninclusion(
    trace: AdversaryTrace, Cprime: ClosedSetAutomaton, target: TargetSchedule, x: Word
) -> Verdict:
    """Check (C'+x1) ∪ (C'+x2) ⊄ C + x through the diagonal point z."""
    side, U = pick_side(trace, target, x)
    rec = build_diagonal(trace, Cprime, target, x, side, U)
    inside = cs.membership(cs.translate_closed(Cprime, trace.x(side)), rec.z)
    need = required_escapes(len(trace.stages))
    holds = inside and set(U) <= set(rec.escapes) and len(rec.escapes) >= need
    return Verdict(holds, rec, inside, need)


def adversarial_x(trace: AdversaryTrace, target: TargetSchedule) -> Word | None:
    """A point defeating both translates on every stage whose pair is not a witness."""
    value, found = 0, False
    for k, stage in enumerate(trace.stages):
        inst = LemmaInstance(stage.Jprime, target.J(stage.n), strict=False)
        res = check_pair(inst, stage.pair.t1, stage.pair.t2)
        if not res.valid:
            found = True
            value |= res.s.value << trace.block(k).offset
    return Word(trace.partition.total_length, value) if found else None


# certificates


def certify_stage(trace: AdversaryTrace, Cprime: ClosedSetAutomaton, target: TargetSchedule, k: int,
                  seed: int = 0, prefix_limit: int = 10**4) -> dict:
    """Machine-checked facts about stage ``k``; every value is exact."""
    stage = trace.stages[k]
    step = stage.step
    inst = LemmaInstance(stage.Jprime, target.J(stage.n), strict=False)
    cert = {
        "n": stage.n,
        "level": step.level,
        "delta": str(stage.delta),
        "epsilon": str(stage.epsilon),
        "delta_sq_lt_epsilon": stage.delta**2 < stage.epsilon,
        "delta_matches": stage.delta == 1 - density(stage.Jprime),
        "epsilon_matches": stage.epsilon == 1 - density(target.J(stage.n)),
        "dense_block": density(stage.Jprime) > 1 - Fraction(1, 2 * stage.n),
        "intersection_measure": str(step.intersection_measure()),
        "intersection_positive": step.intersection_measure() > 0,
        "projection_matches": cs.project_block(step.intersection, target.position(stage.n) - step.level) == stage.Jprime,
    }
    width = inst.width
    if width <= EXHAUSTIVE_CHECK_WIDTH:
        res = check_pair(inst, stage.pair.t1, stage.pair.t2, method="naive")
        cert["pair_check"] = "exhaustive-naive"
        cert["pair_valid"] = res.valid
    else:
        res = check_pair(inst, stage.pair.t1, stage.pair.t2, method="wht")
        U = xor_translate(stage.Jprime, stage.pair.t1)
        U = CubeSet(width, U.membership | xor_translate(stage.Jprime, stage.pair.t2).membership)
        rng = rng_for(seed, 7, k)
        sampled = all(
            not is_subset(U, xor_translate(inst.J, Word(width, int(s))))
            for s in rng.integers(0, 1 << width, size=SAMPLED_CHECKS)
        )
        cert["pair_check"] = f"exhaustive-wht+{SAMPLED_CHECKS}-sampled-naive"
        cert["pair_valid"] = res.valid and sampled
    # every filler keeps the prefix inside C'
    ext_ok = all(
        cs.run(Cprime, step.extensions[q], step.consumed, q) == step.targets[q] for q in step.extensions
    )
    if cs.count_prefixes(Cprime, step.consumed) <= prefix_limit:
        ext_ok = ext_ok and all(
            cs.run(Cprime, s.concat(step.extension_for(Cprime, s))) is not None
            for s in cs.restrict_upto(Cprime, step.consumed)
        )
        cert["extension_check"] = "all-prefixes"
    else:
        cert["extension_check"] = "per-state"
    cert["extensions_valid"] = ext_ok
    cert["ok"] = all(v for key, v in cert.items() if isinstance(v, bool))
    return cert


def zero_off_stages(trace: AdversaryTrace) -> bool:
    """x_i vanishes on every block that is not a stage block."""
    mask = 0
    for k in range(len(trace.stages)):
        b = trace.block(k)
        mask |= ((1 << b.width) - 1) << b.offset
    return not (trace.x1.value & ~mask) and not (trace.x2.value & ~mask)


# exhaustive miniature oracle


def stage_window_set(trace: AdversaryTrace, target: TargetSchedule) -> CubeSet:
    """{y : y|I_{n_k} ∈ J_{n_k} for every stage k}, materialized."""
    N = trace.partition.total_length
    points = np.arange(1 << N, dtype=np.int64)
    inside = np.ones(1 << N, dtype=bool)
    for k, stage in enumerate(trace.stages):
        b = trace.block(k)
        inside &= target.J(stage.n).membership[(points >> b.offset) & ((1 << b.width) - 1)]
    return CubeSet(N, inside)


def exhaustive_noninclusion(trace: AdversaryTrace, Cprime: ClosedSetAutomaton, target: TargetSchedule) -> list[Word]:
    """Every x for which (C'+x1) ∪ (C'+x2) ⊆ G + x, where G keeps the stage
    blocks inside J; empty when the construction works for all 2^N points."""
    N = trace.partition.total_length
    C = cs.oracle_enumerate(Cprime)
    U = CubeSet(N, xor_translate(C, trace.x1).membership | xor_translate(C, trace.x2).membership)
    G = stage_window_set(trace, target)
    return [Word(N, x) for x in range(1 << N) if is_subset(U, xor_translate(G, Word(N, x)))]
