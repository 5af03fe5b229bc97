"""H^1 of PSL_2(O_d) with coefficients in E_{n,n}, via Fox calculus.

Run:  python demos/h1_tables.py [max_n]

For each weight n we print the norms of the elementary divisors and the
free rank.  A 1-cocycle is determined by its values on the generators, the
relators cut out Z^1, and B^1 is the image of m -> (m.g - m)_g.
"""
import sys
import time

from bianchi.h1 import coboundary_matrix, h1, module_actions, relator_matrix
from bianchi.polymod import ModuleSpec
from bianchi.presentations import format_word, load_presentation
from bianchi.ring import split_type

top = int(sys.argv[1]) if len(sys.argv) > 1 else 5

P = load_presentation("PSL2_O2")
print("PSL_2(O_2) generators:", ", ".join(f"{n} = {M}" for n, M in zip(P.names, P.matrices)))
print("relators:", "; ".join(format_word(r, P.names) for r in P.relators))

# the cocycle condition is linear: x @ F = 0 for the stacked Fox derivatives
acts = module_actions(P, ModuleSpec(1, 1))
F, C = relator_matrix(acts), coboundary_matrix(acts)
print(f"E_(1,1): relator matrix {F.shape}, coboundary matrix {C.shape}, C @ F == 0: {(C @ F).is_zero()}")
print()

for gid in ("PSL2_O1", "PSL2_O2", "PSL2_O3"):
    d = load_presentation(gid).d
    print(gid)
    print("  n  rank  divisor norms")
    for n in range(top + 1):
        t = time.time()
        res = h1(gid, ModuleSpec(n, n))
        # primes above n in the torsion should only be the ramified ones
        odd = [p for p in res.torsion_primes() if p > n and split_type(p, d)[0] != "ramified"]
        note = f"  unexpected large torsion {odd}" if odd else ""
        print(f"  {n}  {res.rank:4d}  {res.divisor_norms}  ({time.time() - t:.2f}s){note}")
    print()
