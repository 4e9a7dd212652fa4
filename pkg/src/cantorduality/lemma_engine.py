"""Translation-covering lemma on a finite cube.

Given J' ⊆ J ⊆ 2^I with |J'| = (1 - delta) 2^|I| and |J| = (1 - epsilon) 2^|I|,
and delta**2 < epsilon, there are t1, t2 with

    (J' + t1) ∪ (J' + t2) ⊄ J + s   for every s.

This module counts the complement slices behind the averaging argument,
checks candidate pairs, searches for witnesses and sweeps whole families
of instances.
"""

from __future__ import annotations

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .bitcube import (
    CubeSet,
    Dyadic,
    Word,
    WidthMismatch,
    density,
    is_subset,
    overlap_counts,
    union,
    walsh_hadamard,
    xor_translate,
)
from .seeding import rng_for

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**6
# widths up to this use one matrix product for all differences at once
_MATRIX_MAX_WIDTH = 7


class PreconditionError(ValueError):
    pass


class BudgetExhausted(RuntimeError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class LemmaInstance:
    """A pair J' and J of subsets of the same cube.

    With ``strict=True`` (the default) J' ⊆ J is enforced.  The averaging
    argument never uses containment, so callers that only have the two
    cardinalities (the adversary construction) pass ``strict=False``.
    """

    Jprime: CubeSet
    J: CubeSet
    strict: bool = True

    def __post_init__(self):
        if self.Jprime.width != self.J.width:
            raise WidthMismatch("J' and J live in different cubes")
        if self.strict and not is_subset(self.Jprime, self.J):
            raise ValueError("J' is not a subset of J")

    @property
    def width(self) -> int:
        return self.J.width

    @property
    def delta(self) -> Dyadic:
        return Dyadic.from_fraction(1 - density(self.Jprime))

    @property
    def epsilon(self) -> Dyadic:
        return Dyadic.from_fraction(1 - density(self.J))

    @property
    def sufficient(self) -> bool:
        """delta**2 < epsilon, the condition the averaging argument needs."""
        return self.delta**2 < self.epsilon

    @property
    def hypothesis_form(self) -> str | None:
        """``"strict"`` for delta² < eps < delta, ``"relaxed"`` for delta² < eps only."""
        if not self.sufficient:
            return None
        return "strict" if self.epsilon < self.delta else "relaxed"

    def to_json(self) -> dict:
        return {"Jprime": self.Jprime.to_json(), "J": self.J.to_json(), "strict": self.strict}

    @classmethod
    def from_json(cls, obj: dict) -> "LemmaInstance":
        return cls(CubeSet.from_json(obj["Jprime"]), CubeSet.from_json(obj["J"]), bool(obj.get("strict", True)))


@dataclass(frozen=True)
class WitnessPair:
    t1: Word
    t2: Word
    min_slack: int

    @property
    def valid(self) -> bool:
        return self.min_slack >= 1

    def to_json(self) -> dict:
        return {"t1": self.t1.to_json(), "t2": self.t2.to_json(), "min_slack": self.min_slack}

    @classmethod
    def from_json(cls, obj: dict) -> "WitnessPair":
        return cls(Word.from_json(obj["t1"]), Word.from_json(obj["t2"]), int(obj["min_slack"]))


@dataclass(frozen=True)
class PairFailure:
    """(J'+t1) ∪ (J'+t2) ⊆ J + s for the recorded s."""

    t1: Word
    t2: Word
    s: Word

    valid = False

    def to_json(self) -> dict:
        return {"t1": self.t1.to_json(), "t2": self.t2.to_json(), "s": self.s.to_json()}


def complement_slice_count(Jprime: CubeSet, z: Word) -> int:
    """Number of pairs (t1, t2) with z outside (J'+t1) ∪ (J'+t2)."""
    if Jprime.width != z.width:
        raise WidthMismatch("z and J' have different widths")
    ts = np.arange(Jprime.size, dtype=np.int64)
    # z ∈ J' + t  <=>  z ^ t ∈ J'
    missed = int(np.count_nonzero(~Jprime.membership[ts ^ z.value]))
    # the condition on (t1, t2) is a product of two identical conditions
    return missed * missed


def _autocorrelation(Jprime: CubeSet) -> np.ndarray:
    """a[d] = |J' ∩ (J' + d)|."""
    return overlap_counts(Jprime, Jprime)


def fubini_mean_slice(Jprime: CubeSet) -> Dyadic:
    """Average density of (J'+t1) ∪ (J'+t2) over all pairs (t1, t2)."""
    n = Jprime.width
    k = len(Jprime)
    # |(J'+t1) ∪ (J'+t2)| = 2k - a[t1 ^ t2]; each difference occurs 2^n times
    total = int((2 * k - _autocorrelation(Jprime)).sum())
    return Dyadic(total, 2 * n)


def _union_pair(inst: LemmaInstance, t1: Word, t2: Word) -> CubeSet:
    return union(xor_translate(inst.Jprime, t1), xor_translate(inst.Jprime, t2))


def check_pair(inst: LemmaInstance, t1: Word, t2: Word, method: str = "wht"):
    """Check (J'+t1) ∪ (J'+t2) ⊄ J + s for all s.

    Returns a :class:`WitnessPair` carrying the minimum over s of
    |U \\ (J+s)|, or a :class:`PairFailure` naming the least offending s.
    ``method="naive"`` translates J explicitly for every s.
    """
    if t1.width != inst.width or t2.width != inst.width:
        raise WidthMismatch("translation width differs from instance width")
    U = _union_pair(inst, t1, t2)
    if method == "naive":
        slack = []
        for s in range(inst.J.size):
            Js = xor_translate(inst.J, Word(inst.width, s))
            if is_subset(U, Js):
                return PairFailure(t1, t2, Word(inst.width, s))
            slack.append(len(U) - int(np.count_nonzero(U.membership & Js.membership)))
        return WitnessPair(t1, t2, min(slack))
    slack = len(U) - overlap_counts(U, inst.J, method=method)
    worst = int(np.argmin(slack))
    if slack[worst] == 0:
        return PairFailure(t1, t2, Word(inst.width, worst))
    return WitnessPair(t1, t2, int(slack[worst]))


def _difference_slacks(inst: LemmaInstance, ds: np.ndarray) -> np.ndarray:
    """min over s of |(J' ∪ (J'+d)) \\ (J+s)| for each d in ``ds``."""
    n = inst.width
    idx = np.arange(1 << n, dtype=np.int64)
    jp = inst.Jprime.membership
    if n <= _MATRIX_MAX_WIDTH:
        W = jp[None, :] | jp[idx[None, :] ^ ds[:, None]]
        shifted = inst.J.membership[idx[:, None] ^ idx[None, :]]  # [v, s] = J(v ^ s)
        overlaps = W.astype(np.int64) @ shifted.astype(np.int64)
        return W.sum(axis=1) - overlaps.max(axis=1)
    out = np.empty(ds.shape[0], dtype=np.int64)
    hJ = walsh_hadamard(inst.J.membership)
    for i, d in enumerate(ds):
        W = jp | jp[idx ^ int(d)]
        over = walsh_hadamard(walsh_hadamard(W) * hJ) >> n
        out[i] = int(W.sum()) - int(over.max())
    return out


def find_pair(inst: LemmaInstance, mode: str = "exhaustive", seed: int = 0, budget: int = DEFAULT_BUDGET) -> WitnessPair:
    """Find t1, t2 with (J'+t1) ∪ (J'+t2) ⊄ J+s for every s.

    Exhaustive mode returns the pair with lexicographically smallest
    (idx(t1), idx(t2)).  Validity of (t1, t2) depends only on d = t1 ^ t2
    (translate everything by t1), so that pair is (0, d) for the least
    valid difference d and only 2^n candidates need checking.

    Randomized mode draws uniform pairs from the ``(seed,)`` stream until
    one passes or ``budget`` pairs have been tried.
    """
    if not inst.sufficient:
        raise PreconditionError(
            f"need delta^2 < epsilon, got delta={inst.delta}, epsilon={inst.epsilon}"
        )
    n = inst.width
    if mode == "exhaustive":
        chunk = 1 << min(n, 6)
        for start in range(0, 1 << n, chunk):
            ds = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
            slacks = _difference_slacks(inst, ds)
            hits = np.flatnonzero(slacks >= 1)
            if hits.size:
                i = int(hits[0])
                return WitnessPair(Word(n, 0), Word(n, int(ds[i])), int(slacks[i]))
        # unreachable when delta^2 < epsilon
        raise AssertionError("no witness pair although delta^2 < epsilon")
    if mode != "randomized":
        raise ValueError(f"unknown mode {mode!r}")
    rng = rng_for(seed, n)
    best = None
    for _ in range(budget):
        t1, t2 = (Word(n, int(v)) for v in rng.integers(0, 1 << n, size=2))
        result = check_pair(inst, t1, t2)
        if result.valid:
            return result
        size = len(_union_pair(inst, t1, t2))
        if best is None or size > best[0]:
            best = (size, t1, t2)
    raise BudgetExhausted(f"no witness in {budget} random pairs", best=best)


# sweeps


def _submasks(mask: int) -> Iterator[int]:
    sub = 0
    while True:
        yield sub
        if sub == mask:
            return
        sub = (sub - mask) & mask


def exhaustive_instances(n: int) -> Iterator[LemmaInstance]:
    """All containment pairs J' ⊆ J ⊆ 2^n, ordered by (mask(J), mask(J'))."""
    if n > 3:
        raise ValueError("exhaustive lemma sweep limited to n <= 3")
    size = 1 << n
    for jmask in range(1 << size):
        J = CubeSet.from_mask(n, jmask)
        for jpmask in sorted(_submasks(jmask)):
            yield LemmaInstance(CubeSet.from_mask(n, jpmask), J)


def sampled_instance(n: int, seed: int, index: int) -> LemmaInstance:
    """A random instance satisfying delta^2 < epsilon.

    |J| is uniform on [1, 2^n - 1]; |J'| is uniform among the cardinalities
    at most |J| that keep delta^2 < epsilon; both sets are uniform given
    their sizes.
    """
    rng = rng_for(seed, n, index)
    size = 1 << n
    k = int(rng.integers(1, size))
    # (size - j)^2 < (size - k) * size
    feasible = [j for j in range(k + 1) if (size - j) ** 2 < (size - k) * size]
    j = int(rng.choice(feasible))
    J_idx = rng.choice(size, size=k, replace=False)
    Jp_idx = rng.choice(J_idx, size=j, replace=False)
    return LemmaInstance(CubeSet.from_indices(n, Jp_idx), CubeSet.from_indices(n, J_idx))


@dataclass
class SweepReport:
    n: int
    mode: str
    instances: int = 0
    skipped: int = 0
    failures: list = field(default_factory=list)
    witness_histogram: Counter = field(default_factory=Counter)
    hypothesis_forms: Counter = field(default_factory=Counter)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "mode": self.mode,
            "instances": self.instances,
            "skipped": self.skipped,
            "failures": self.failures,
            "witness_histogram": {str(k): v for k, v in sorted(self.witness_histogram.items())},
            "hypothesis_forms": dict(sorted(self.hypothesis_forms.items())),
        }


def _run_instance(inst: LemmaInstance):
    """Returns (form, slack) on success, (None, None) when skipped, or a failure dict."""
    form = inst.hypothesis_form
    if form is None:
        return None, None
    try:
        pair = find_pair(inst)
    except Exception as exc:  # recorded, never swallowed silently
        return {"instance": inst.to_json(), "error": repr(exc)}, None
    verdict = check_pair(inst, pair.t1, pair.t2, method="naive")
    if not verdict.valid or verdict.min_slack != pair.min_slack:
        return {"instance": inst.to_json(), "pair": pair.to_json(), "check": verdict.to_json()}, None
    return form, pair.min_slack


def verify_lemma_family(
    n: int, mode: str = "exhaustive", count: int = 0, seed: int = 0, workers: int = 1
) -> SweepReport:
    """Run find_pair on every qualifying instance and re-check each witness.

    ``mode="exhaustive"`` covers every J' ⊆ J ⊆ 2^n (n <= 3); instances with
    delta^2 >= epsilon are counted as skipped.  ``mode="sampled"`` draws
    ``count`` instances from :func:`sampled_instance`.
    """
    if mode == "exhaustive":
        instances = list(exhaustive_instances(n))
    elif mode == "sampled":
        instances = (sampled_instance(n, seed, i) for i in range(count))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    report = SweepReport(n=n, mode=mode)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_run_instance, instances)
            _merge(report, results)
    else:
        _merge(report, map(_run_instance, instances))
    log.info("lemma sweep n=%d %s: %d instances, %d skipped, %d failures",
             n, mode, report.instances, report.skipped, len(report.failures))
    return report


def _merge(report: SweepReport, results) -> None:
    # results arrive in instance order regardless of worker count
    for form, slack in results:
        report.instances += 1
        if isinstance(form, dict):
            report.failures.append(form)
        elif form is None:
            report.skipped += 1
        else:
            report.hypothesis_forms[form] += 1
            report.witness_histogram[slack] += 1
