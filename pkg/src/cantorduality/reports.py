"""Pipelines behind the command line, and their JSON reports.

Each ``run_*`` function returns a plain dict.  Reports are deterministic:
the same configuration gives byte-identical output from :func:`dumps`
whatever the worker count, because every random choice is keyed by
``(seed, index)`` and results are merged in index order.  Worker count and
wall-clock timing are therefore left out unless timing is requested.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import __version__
from . import adversary as adv
from . import closed_sets as cs
from .bitcube import CubeSet, Word, overlap_counts, xor_translate
from .category_codes import (
    MeagerCode,
    carlson_refine,
    combine_translations,
    meager_membership,
    verify_translation_inclusion,
)
from .corpus import miniature_instance, random_automaton, random_code, random_word, shifted_chain
from .lemma_engine import (
    LemmaInstance,
    check_pair,
    complement_slice_count,
    find_pair,
    fubini_mean_slice,
    verify_lemma_family,
)
from .seeding import rng_for

VERIFIED, COUNTEREXAMPLE, ERROR = "verified", "counterexample", "error"
EXIT_CODES = {VERIFIED: 0, COUNTEREXAMPLE: 1, ERROR: 2}


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def parallel_map(fn, items, workers: int = 1) -> list:
    """``list(map(fn, items))``, optionally on a thread pool; order preserved."""
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _report(command: str, config: dict, checks: list, **extra) -> dict:
    counterexamples = extra.pop("counterexamples", [])
    status = VERIFIED if all(c["ok"] for c in checks) and not counterexamples else COUNTEREXAMPLE
    out = {
        "tool": "cantorduality",
        "version": __version__,
        "command": command,
        "config": config,
        "status": status,
        "checks": checks,
        "counterexamples": counterexamples,
    }
    out.update(extra)
    return out


def _timed(report: dict, start: float, timing: bool) -> dict:
    if timing:
        report["timing"] = {"seconds": round(time.perf_counter() - start, 3)}
    return report


# lemma


def run_lemma_verify(n: int, exhaustive: bool = True, samples: int = 0, seed: int = 0,
                     workers: int = 1, timing: bool = False) -> dict:
    start = time.perf_counter()
    mode = "exhaustive" if exhaustive else "sampled"
    sweep = verify_lemma_family(n, mode, count=samples, seed=seed, workers=workers)
    body = sweep.to_json()
    config = {"n": n, "mode": mode, "samples": samples, "seed": seed}
    checks = [{"name": "no failures", "ok": sweep.ok, "instances": sweep.instances, "skipped": sweep.skipped}]
    report = _report("lemma verify", config, checks, sweep=body,
                     counterexamples=[dict(kind="lemma", **f) for f in sweep.failures])
    return _timed(report, start, timing)


def run_lemma_search(instance: LemmaInstance, mode: str = "exhaustive", seed: int = 0,
                     budget: int = 10**6, timing: bool = False) -> dict:
    start = time.perf_counter()
    config = {"instance": instance.to_json(), "mode": mode, "seed": seed, "budget": budget}
    pair = find_pair(instance, mode=mode, seed=seed, budget=budget)
    verdict = check_pair(instance, pair.t1, pair.t2, method="naive")
    checks = [{"name": "witness passes naive check over all s", "ok": verdict.valid}]
    certs = {"delta": str(instance.delta), "epsilon": str(instance.epsilon),
             "hypothesis_form": instance.hypothesis_form}
    return _timed(_report("lemma search", config, checks, witness=pair.to_json(), certificates=certs), start, timing)


# carlson


def _perturb(code: MeagerCode, xs, x: Word, rng) -> Word:
    """Flip x on one in-window block whose group partner separates x1 from
    x2; only such a flip breaks the inclusion.  Falls back to any in-window
    block when x1 and x2 agree on the whole window."""
    refined = carlson_refine(code, len(xs))
    blocks = code.partition.blocks
    candidates = [2 * g + j for g in refined.window for j in (0, 1)]
    useful = [j for j in candidates if xs[0].restrict(blocks[j ^ 1]) != xs[1].restrict(blocks[j ^ 1])]
    pool = useful or candidates
    b = blocks[pool[int(rng.integers(len(pool)))]]
    flip = int(rng.integers(1, 1 << b.width))
    return Word(x.width, x.value ^ (flip << b.offset))


def _carlson_trial(args) -> dict:
    seed, i, n_blocks, max_length, sabotage = args
    code = random_code(seed, i, n_blocks, max_length)
    N = code.total_length
    xs = [random_word(seed, N, 1, i, j) for j in (1, 2)]
    x = combine_translations(xs, code.partition, code.witness)
    rng = rng_for(seed, 2, i)
    bad = _perturb(code, xs, x, rng)
    if sabotage:
        x = bad
    verdicts = [verify_translation_inclusion(code, xs, m, x=x) for m in ("oracle", "blockwise")]
    controls = [verify_translation_inclusion(code, xs, m, x=bad) for m in ("oracle", "blockwise")]
    out = {
        "index": i,
        "holds": verdicts[0].holds,
        "agree": verdicts[0].holds == verdicts[1].holds,
        "control_caught": not controls[0].holds,
        "control_agree": controls[0].holds == controls[1].holds,
    }
    if not verdicts[0].holds:
        out["counterexample"] = {
            "kind": "carlson", "code": code.to_json(), "xs": [w.to_json() for w in xs],
            "x": x.to_json(), "side": verdicts[0].side, "y": verdicts[0].y.to_json(),
        }
    return out


def _carlson_large(args) -> bool:
    seed, i, n_blocks = args
    code = random_code(seed + 1, i, n_blocks, max_length=None)
    xs = [random_word(seed + 1, code.total_length, 3, i, j) for j in (1, 2)]
    return verify_translation_inclusion(code, xs, "blockwise").holds


def run_carlson_verify(blocks: int = 8, trials: int = 100, seed: int = 0, max_length: int = 16,
                       large_blocks: int = 1000, large_trials: int = 100, sabotage: bool = False,
                       workers: int = 1, timing: bool = False) -> dict:
    start = time.perf_counter()
    config = {"blocks": blocks, "trials": trials, "seed": seed, "max_length": max_length,
              "large_blocks": large_blocks, "large_trials": large_trials, "sabotage": sabotage}
    results = parallel_map(_carlson_trial, [(seed, i, blocks, max_length, sabotage) for i in range(trials)], workers)
    large = parallel_map(_carlson_large, [(seed, i, large_blocks) for i in range(large_trials)], workers)
    caught = sum(r["control_caught"] for r in results)
    checks = [
        {"name": "oracle inclusion", "ok": all(r["holds"] for r in results), "trials": trials},
        {"name": "oracle and blockwise agree", "ok": all(r["agree"] and r["control_agree"] for r in results)},
        {"name": "blockwise inclusion on large codes", "ok": all(large), "trials": large_trials,
         "blocks": large_blocks},
        {"name": "negative control caught >= 95%", "ok": caught * 100 >= 95 * trials, "caught": caught},
    ]
    cex = [r["counterexample"] for r in results if "counterexample" in r]
    return _timed(_report("carlson verify", config, checks, counterexamples=cex), start, timing)


# adversary


def _adversary_setup(n_start, n_end, seed, cprime=None):
    target = adv.build_target(n_start, n_end)
    C = cprime if cprime is not None else shifted_chain(target, seed).automaton()
    return target, C


def _check_x(args) -> dict:
    trace, C, target, x = args
    v = adv.verify_noninclusion(trace, C, target, x)
    return v.to_json()


def run_adversary(stages: int = 2, x_samples: int = 200, seed: int = 0, n_start: int = 2, n_end: int = 6,
                  sabotage: str | None = None, cprime: cs.ClosedSetAutomaton | None = None,
                  workers: int = 1, timing: bool = False) -> dict:
    start = time.perf_counter()
    target, C = _adversary_setup(n_start, n_end, seed, cprime)
    config = {"stages": stages, "x_samples": x_samples, "seed": seed, "n_start": n_start, "n_end": n_end,
              "sabotage": sabotage, "cprime": "file" if cprime is not None else "shifted-target"}
    trace = adv.construct_pair(C, target, stages)
    if sabotage == "drop-t2":
        trace = adv.drop_t2(trace)
    elif sabotage is not None:
        raise ValueError(f"unknown sabotage {sabotage!r}")
    certs = [adv.certify_stage(trace, C, target, k, seed=seed) for k in range(len(trace.stages))]
    N = target.partition.total_length
    points = [Word.zeros(N)] + [random_word(seed, N, 4, i) for i in range(x_samples)]
    hostile = adv.adversarial_x(trace, target)
    if hostile is not None:
        points.append(hostile)
    verdicts = parallel_map(_check_x, [(trace, C, target, x) for x in points], workers)
    failed = [v for v in verdicts if not v["holds"]]
    checks = [
        {"name": "stage certificates", "ok": all(c["ok"] for c in certs)},
        {"name": "x_i zero off stage blocks", "ok": adv.zero_off_stages(trace)},
        {"name": "non-inclusion for every sampled x", "ok": not failed, "points": len(points),
         "min_escapes": min((len(v["escapes"]) for v in verdicts), default=0)},
    ]
    context = {"target": target.to_json(), "cprime": C.to_json(), "trace": trace.to_json()}
    cex = [{"kind": "adversary", "x": v["x"], "verdict": v} for v in failed]
    summary = {
        "points": len(points),
        "holds": len(points) - len(failed),
        "side_counts": {str(s): sum(v["side"] == s for v in verdicts) for s in (1, 2)},
        "U_sizes": _histogram(len(v["U"]) for v in verdicts),
    }
    report = _report("adversary run", config, checks, certificates=certs, summary=summary,
                     context=context, counterexamples=cex)
    return _timed(report, start, timing)


def _histogram(values) -> dict:
    out: dict = {}
    for v in values:
        out[str(v)] = out.get(str(v), 0) + 1
    return dict(sorted(out.items()))


# oracle battery


def closed_set_oracle_checks(A: cs.ClosedSetAutomaton, seed: int, index: int) -> dict:
    """Compare every closed-set operation on ``A`` with explicit enumeration."""
    rng = rng_for(seed, 5, index)
    N = A.total_length
    lang = cs.oracle_enumerate(A)
    points = np.arange(1 << N, dtype=np.int64)
    res = {"measure": cs.measure(A) == Fraction(len(lang), 1 << N)}
    # membership, pointwise
    res["membership"] = all(cs.membership(A, Word(N, int(v))) == bool(lang.membership[v]) for v in range(1 << N))
    # projections
    res["project_block"] = all(
        cs.project_block(A, m) == CubeSet.from_indices(
            b.width, np.unique((points[lang.membership] >> b.offset) & ((1 << b.width) - 1)))
        for m, b in enumerate(A.partition.blocks)
    )
    # prefixes and slices at every inner level
    ok_prefix, ok_slice = True, True
    for k in range(A.n_blocks + 1):
        width = A.partition.prefix_length(k)
        prefixes = np.unique(points[lang.membership] & ((1 << width) - 1))
        got = cs.restrict_upto(A, k)
        ok_prefix &= [w.value for w in got] == [int(v) for v in prefixes]
        if 0 < k < A.n_blocks and len(prefixes):
            s = Word(width, int(prefixes[int(rng.integers(len(prefixes)))]))
            tail = points[lang.membership & ((points & ((1 << width) - 1)) == s.value)] >> width
            sliced = cs.slice(A, s)
            ok_slice &= cs.oracle_enumerate(sliced) == CubeSet.from_indices(N - width, tail)
            # slice measures reassemble the measure at level k
            total = sum(cs.measure(cs.slice(A, Word(width, int(p)))) for p in prefixes)
            ok_slice &= total / (1 << width) == cs.measure(A)
    res["restrict_upto"] = bool(ok_prefix)
    res["slice"] = bool(ok_slice)
    # intersection with an independent automaton on the same partition
    B = random_automaton(seed, 10**5 + index, partition=A.partition)
    inter = cs.intersect(A, B)
    res["intersect"] = cs.oracle_enumerate(inter) == CubeSet(N, lang.membership & cs.oracle_enumerate(B).membership)
    res["intersect_measure_bound"] = cs.measure(inter) <= min(cs.measure(A), cs.measure(B))
    # translation
    t = Word(N, int(rng.integers(1 << N)))
    res["translate_closed"] = cs.oracle_enumerate(cs.translate_closed(A, t)) == xor_translate(lang, t)
    return res


def run_oracle(seed: int = 0, corpus: int = 50, oracle_limit: int = 16, workers: int = 1,
               timing: bool = False) -> dict:
    start = time.perf_counter()
    config = {"seed": seed, "corpus": corpus, "oracle_limit": oracle_limit}
    checks = []

    # closed sets
    automata = [random_automaton(seed, i, max_length=min(12, oracle_limit)) for i in range(corpus)]
    rows = parallel_map(lambda ia: closed_set_oracle_checks(ia[1], seed, ia[0]), list(enumerate(automata)), workers)
    for name in rows[0]:
        checks.append({"name": f"closed sets: {name}", "ok": all(r[name] for r in rows), "automata": corpus})

    # XOR-correlation fast path against the naive loop
    def fast_path(i):
        rng = rng_for(seed, 6, i)
        n = int(rng.integers(1, 13))
        A = CubeSet(n, rng.random(1 << n) < rng.random())
        B = CubeSet(n, rng.random(1 << n) < rng.random())
        return bool(np.array_equal(overlap_counts(A, B, "wht"), overlap_counts(A, B, "naive")))

    checks.append({"name": "overlap counts: wht == naive", "ok": all(parallel_map(fast_path, range(200), workers))})

    # counting identities of the lemma at n = 3
    ident = True
    for mask in range(256):
        Jp = CubeSet.from_mask(3, mask)
        miss = 8 - len(Jp)
        ident &= all(complement_slice_count(Jp, Word(3, z)) == miss * miss for z in range(8))
        ident &= fubini_mean_slice(Jp) == 1 - Fraction(miss, 8) ** 2
    checks.append({"name": "lemma counting identities, n=3", "ok": bool(ident)})

    # whole adversary pipeline on a materializable instance
    target, C = miniature_instance(seed)
    trace = adv.construct_pair(C, target, 1)
    bad = adv.exhaustive_noninclusion(trace, C, target)
    checks.append({"name": "miniature adversary, all x", "ok": not bad, "N": target.partition.total_length})
    cex = [{"kind": "miniature", "x": x.to_json()} for x in bad]
    return _timed(_report("oracle run", config, checks, counterexamples=cex), start, timing)


# re-verification


def reverify(report: dict) -> list[bool]:
    """Re-check every counterexample of a report from its embedded data.

    Returns one flag per counterexample: True when the failure reproduces.
    """
    out = []
    for c in report.get("counterexamples", []):
        kind = c.get("kind")
        if kind == "carlson":
            code = MeagerCode.from_json(c["code"])
            xs = [Word.from_json(w) for w in c["xs"]]
            x, y = Word.from_json(c["x"]), Word.from_json(c["y"])
            refined = carlson_refine(code, len(xs))
            w = y ^ xs[c["side"]]
            # y - x_side outside F' but y + x inside F
            out.append(not meager_membership(refined, w) and meager_membership(code, y ^ x))
        elif kind == "adversary":
            ctx = report["context"]
            target = adv.TargetSchedule.from_json(ctx["target"])
            C = cs.ClosedSetAutomaton.from_json(ctx["cprime"])
            trace = adv.AdversaryTrace.from_json(ctx["trace"])
            out.append(not adv.verify_noninclusion(trace, C, target, Word.from_json(c["x"])).holds)
        elif kind == "lemma":
            inst = LemmaInstance.from_json(c["instance"])
            n = inst.width
            pairs = ((Word(n, a), Word(n, b)) for a in range(1 << n) for b in range(1 << n))
            out.append(inst.sufficient and not any(check_pair(inst, a, b, "naive").valid for a, b in pairs))
        elif kind == "miniature":
            target, C = miniature_instance(report["config"]["seed"])
            trace = adv.construct_pair(C, target, 1)
            x = Word.from_json(c["x"])
            out.append(x in adv.exhaustive_noninclusion(trace, C, target))
        else:
            out.append(False)
    return out
