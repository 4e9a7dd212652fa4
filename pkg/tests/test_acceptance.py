"""Acceptance criteria A1-A9.

Each test prints one ``A<k> PASS|FAIL`` line and the collected lines are
repeated in the pytest terminal summary.  Run directly with
``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

import functools
import json
import time
from fractions import Fraction

from cantorduality import adversary as adv
from cantorduality import closed_sets as cs
from cantorduality import reports
from cantorduality.bitcube import Dyadic, Word, density, enumerate_cubesets, random_cubeset
from cantorduality.corpus import miniature_instance, random_automaton, random_word
from cantorduality.lemma_engine import (
    check_pair,
    complement_slice_count,
    exhaustive_instances,
    find_pair,
    fubini_mean_slice,
    sampled_instance,
)
from cantorduality.seeding import rng_for
from oracles import complement_pairs, pair_is_witness

RESULTS: dict[str, str] = {}


def record(criterion: str, ok: bool, seconds: float, limit: float | None, detail: str = "") -> None:
    in_time = limit is None or seconds < limit
    verdict = "PASS" if ok and in_time else "FAIL"
    budget = f" (limit {limit:g}s)" if limit is not None else ""
    line = f"{criterion} {verdict}  {seconds:.2f}s{budget}  {detail}".rstrip()
    RESULTS[criterion] = line
    print(line)
    assert ok, line
    assert in_time, line


# shared runs, reused by A9


@functools.cache
def a3_reports(workers: int = 1) -> tuple[str, str]:
    small = reports.run_lemma_verify(3, exhaustive=True, seed=1, workers=workers)
    big = reports.run_lemma_verify(4, exhaustive=False, samples=10**5, seed=1, workers=workers)
    return reports.dumps(small), reports.dumps(big)


@functools.cache
def a5_report(workers: int = 1) -> str:
    return reports.dumps(reports.run_carlson_verify(
        blocks=8, trials=100, seed=1, max_length=16, large_blocks=1000, large_trials=100, workers=workers))


@functools.cache
def a7_report(workers: int = 1) -> str:
    return reports.dumps(reports.run_adversary(stages=2, x_samples=200, seed=1, workers=workers))


def identity_corpus():
    """All 256 J' with all 8 z at n = 3, then 1000 random (J', z) at n = 10."""
    for Jp in enumerate_cubesets(3):
        for z in range(8):
            yield Jp, Word(3, z)
    for i in range(1000):
        rng = rng_for(2024, i)
        Jp = random_cubeset(10, (Dyadic(0), Dyadic(1)), int(rng.integers(2**63)))
        yield Jp, Word(10, int(rng.integers(1 << 10)))


def test_a1_counting_identity():
    start = time.perf_counter()
    ok, checked = True, 0
    for Jp, z in identity_corpus():
        miss = (1 << Jp.width) - len(Jp)
        got = complement_slice_count(Jp, z)
        ok &= got == miss * miss
        if Jp.width == 3:
            ok &= got == complement_pairs(Jp, z.value)
        checked += 1
    record("A1", ok, time.perf_counter() - start, 5, f"{checked} (J', z) pairs exact")


def test_a2_fubini_identity():
    start = time.perf_counter()
    ok, checked = True, 0
    for Jp, _ in identity_corpus():
        delta = 1 - density(Jp)
        ok &= fubini_mean_slice(Jp) == 1 - delta**2
        checked += 1
    record("A2", ok, time.perf_counter() - start, 5, f"{checked} sets exact")


def test_a3_lemma_completeness():
    start = time.perf_counter()
    small, big = (json.loads(t) for t in a3_reports(1))
    ok = small["status"] == big["status"] == "verified"
    ok &= small["sweep"]["instances"] == 3**8 and not small["sweep"]["failures"]
    ok &= big["sweep"]["instances"] == 10**5 and not big["sweep"]["failures"]
    found = small["sweep"]["instances"] - small["sweep"]["skipped"]
    record("A3", ok, time.perf_counter() - start, 120,
           f"n=3: {found} in-hypothesis instances all solved; n=4: 10^5 sampled, 0 failures")


def test_a4_witness_soundness():
    start = time.perf_counter()
    ok, checked = True, 0
    for inst in exhaustive_instances(3):
        if not inst.sufficient:
            continue
        pair = find_pair(inst)
        ok &= check_pair(inst, pair.t1, pair.t2, method="naive").valid
        ok &= pair_is_witness(inst.Jprime, inst.J, pair.t1.value, pair.t2.value)
        checked += 1
    for i in range(300):
        inst = sampled_instance(4, 1, i)
        pair = find_pair(inst)
        ok &= pair_is_witness(inst.Jprime, inst.J, pair.t1.value, pair.t2.value)
        checked += 1
    record("A4", ok, time.perf_counter() - start, None, f"{checked} witnesses checked against all s")


def test_a5_carlson():
    start = time.perf_counter()
    rep = json.loads(a5_report(1))
    checks = {c["name"]: c for c in rep["checks"]}
    ok = rep["status"] == "verified"
    caught = checks["negative control caught >= 95%"]["caught"]
    record("A5", ok, time.perf_counter() - start, 60,
           f"100 codes N<=16 oracle+blockwise, 100 codes of 1000 blocks, control caught {caught}/100")


def test_a6_closed_set_oracle():
    start = time.perf_counter()
    names = ("measure", "slice", "project_block", "intersect", "translate_closed")
    ok, lengths = True, []
    for i in range(50):
        A = random_automaton(1, i, max_length=12)
        lengths.append(A.total_length)
        res = reports.closed_set_oracle_checks(A, 1, i)
        ok &= all(res[n] for n in names)
    ok &= max(lengths) <= 12
    record("A6", ok, time.perf_counter() - start, 60, f"50 automata, N in [{min(lengths)}, {max(lengths)}]")


def test_a7_adversary():
    start = time.perf_counter()
    rep = json.loads(a7_report(1))
    ok = rep["status"] == "verified"
    ok &= len(rep["context"]["trace"]["stages"]) == 2
    ok &= all(c["delta_sq_lt_epsilon"] and c["ok"] for c in rep["certificates"])
    # every point: |U| >= 1 and the diagonal point escapes on each stage of U
    target = adv.TargetSchedule.from_json(rep["context"]["target"])
    trace = adv.AdversaryTrace.from_json(rep["context"]["trace"])
    C = cs.ClosedSetAutomaton.from_json(rep["context"]["cprime"])
    N = target.partition.total_length
    points = [Word.zeros(N)] + [random_word(1, N, 4, i) for i in range(200)]
    for x in points:
        v = adv.verify_noninclusion(trace, C, target, x)
        ok &= v.holds and len(v.record.U) >= 1 and set(v.record.U) <= set(v.record.escapes)
    densities = [str(Fraction(d)) for d in (density(target.J(n)) for n in range(2, 7))]
    record("A7", ok, time.perf_counter() - start, 120,
           f"2 stages at n={[s['n'] for s in rep['context']['trace']['stages']]}, "
           f"{len(points)} points hold; target densities {densities}")


def test_a8_miniature():
    start = time.perf_counter()
    target, C = miniature_instance(0)
    trace = adv.construct_pair(C, target, 1)
    N = target.partition.total_length
    bad = adv.exhaustive_noninclusion(trace, C, target)
    ok = N <= 12 and len(target.partition) == 3 and not bad
    record("A8", ok, time.perf_counter() - start, 60, f"N={N}, all {1 << N} x checked, {len(bad)} failures")


def test_a9_determinism():
    start = time.perf_counter()
    same = {
        "A3": a3_reports(1) == a3_reports(8),
        "A5": a5_report(1) == a5_report(8),
        "A7": a7_report(1) == a7_report(8),
    }
    record("A9", all(same.values()), time.perf_counter() - start, None,
           ", ".join(f"{k} {'identical' if v else 'DIFFERENT'}" for k, v in same.items()) + " (1 vs 8 workers)")


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted((k, v) for k, v in globals().items() if k.startswith("test_a")):
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
