"""Two translates of a dense set that no translate of a slightly denser set covers.

We take J' of density 3/4 inside J of density 7/8 in the 3-cube, count how
often a point misses both translates, and then search for a pair (t1, t2)
whose union escapes every translate J + s.
"""

from cantorduality.bitcube import CubeSet, Word, density, xor_translate
from cantorduality.lemma_engine import LemmaInstance, check_pair, complement_slice_count, find_pair, fubini_mean_slice

Jprime = CubeSet.from_indices(3, range(6))
J = CubeSet.from_indices(3, range(7))
inst = LemmaInstance(Jprime, J)
print(f"density J' = {density(Jprime)}, density J = {density(J)}")
print(f"delta = {inst.delta}, epsilon = {inst.epsilon}, delta^2 < epsilon: {inst.sufficient}")

z = Word.from_string("101")
print(f"\npairs (t1, t2) with z = {z} outside both translates: {complement_slice_count(Jprime, z)}")
print(f"average size of the union of two translates, as a fraction of the cube: {fubini_mean_slice(Jprime)}")
print("so some union is larger than |J|, and no single translate of J can hold it.")

pair = find_pair(inst)
print(f"\nleast witness: t1 = {pair.t1}, t2 = {pair.t2}, worst-case leftover points = {pair.min_slack}")
for s in range(8):
    s = Word(3, s)
    U = set(xor_translate(Jprime, pair.t1).indices()) | set(xor_translate(Jprime, pair.t2).indices())
    outside = sorted(U - set(xor_translate(J, s).indices()))
    print(f"  s = {s}: union points outside J+s -> {[str(Word(3, int(v))) for v in outside]}")

bad = check_pair(inst, Word(3, 0), Word(3, 0))
print(f"\nthe collapsed pair t1 = t2 = 000 fails at s = {bad.s}")
