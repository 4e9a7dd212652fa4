"""Folding two translations of a meager code into one.

A code (blocks, witness x_F) describes the set F of points that differ
from x_F on every block.  Pairing the blocks and zeroing the witness
gives a coarser code F'.  Taking the even blocks from x1 and the odd ones
from x2 (both shifted by x_F) yields one x whose complement-of-F
translate swallows the complement-of-F' translates by x1 and by x2.
"""

from cantorduality.bitcube import Word
from cantorduality.category_codes import (
    BlockPartition,
    MeagerCode,
    carlson_combine,
    carlson_refine,
    materialize_meager,
    verify_carlson_inclusion,
)

part = BlockPartition.from_widths([2, 1, 3, 2])
code = MeagerCode(part, Word.from_string("10" "1" "011" "01"))
x1, x2 = Word.from_string("11000110"), Word.from_string("00101011")
print(f"blocks {part.widths}, witness {code.witness}, |F| = {len(materialize_meager(code))} of {1 << 8}")

refined = carlson_refine(code)
print(f"paired blocks {refined.partition.widths}, |F'| = {len(materialize_meager(refined))}")

x = carlson_combine(x1, x2, part, code.witness)
print(f"\nx1 = {x1}\nx2 = {x2}\nx  = {x}")
for method in ("oracle", "blockwise"):
    print(f"inclusion by {method}: {verify_carlson_inclusion(code, x1, x2, method).holds}")

flip = part[2]
bad = Word(8, x.value ^ (1 << flip.offset))
v = verify_carlson_inclusion(code, x1, x2, "oracle", x=bad)
print(f"\nflipping one bit of block 2 gives {bad}; inclusion holds: {v.holds}")
print(f"a point in the translate by x{v.side + 1} but outside the combined one: y = {v.y}")
