"""Two translates of a positive-measure closed set escaping every translate
of a dense chain set.

The target C keeps block n inside J_n of density just above 1 - 1/n^2.  The
closed set C' is another chain set of the same densities, shifted block by
block.  Two stages pick blocks, solve the finite escape problem on each, and
place the resulting t1, t2 into x1, x2.  For any x, a diagonal point of
C' + x1 or C' + x2 then lands outside C + x on a stage block.
"""

from cantorduality import adversary as adv
from cantorduality import closed_sets as cs
from cantorduality.bitcube import density
from cantorduality.corpus import random_word, shifted_chain

target = adv.build_target(2, 6)
print("block widths", target.widths)
for n in range(2, 7):
    print(f"  J_{n}: density {density(target.J(n))}")

Cprime = shifted_chain(target, seed=1).automaton()
print(f"\nmeasure of C' = {cs.measure(Cprime)}")

trace = adv.construct_pair(Cprime, target, stages=2)
for k, stage in enumerate(trace.stages):
    print(f"stage {k + 1}: block n={stage.n}, density step to level {stage.step.level}, "
          f"delta={stage.delta}, epsilon={stage.epsilon}, t1={stage.pair.t1}, t2={stage.pair.t2}")

N = target.partition.total_length
print(f"\nchecking 10 random x of length {N}")
for i in range(10):
    x = random_word(1, N, i)
    v = adv.verify_noninclusion(trace, Cprime, target, x)
    rec = v.record
    print(f"  x #{i}: side {rec.side}, escapes on stages {list(rec.escapes)}, holds {v.holds}")

broken = adv.drop_t2(trace)
x = adv.adversarial_x(broken, target)
print(f"\nwith t2 zeroed, a chosen x defeats the construction: holds = "
      f"{adv.verify_noninclusion(broken, Cprime, target, x).holds}")
