"""Every x at once, on an instance small enough to write down.

Three blocks of widths 3, 5, 4 give 4096 points.  C' branches on the first
block into a heavy and a light continuation.  After one stage we list the
union of the two translates of C' and check, for each of the 4096 x, that
it is not inside the translate of the target.
"""

from cantorduality import adversary as adv
from cantorduality import closed_sets as cs
from cantorduality.corpus import miniature_instance

target, Cprime = miniature_instance()
print(f"widths {target.partition.widths}, |C'| = {len(cs.oracle_enumerate(Cprime))} of {1 << 12}")
trace = adv.construct_pair(Cprime, target, 1)
stage = trace.stages[0]
print(f"stage block n={stage.n}, delta={stage.delta}, epsilon={stage.epsilon}")
bad = adv.exhaustive_noninclusion(trace, Cprime, target)
print(f"points x with (C'+x1) ∪ (C'+x2) inside the target translate: {len(bad)}")
