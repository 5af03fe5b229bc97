"""Abelianizations of Gamma_0(p) and the smallest torsion primes beyond (N(p)+1)/2.

Run:  python demos/grunewald_schwermer.py

Each level is a prime of residue degree one.  The coset table gives the
permutation action of the generators on P^1(O/p); Reidemeister-Schreier turns
it into an integer relation matrix whose Smith form is Gamma_0(p)^ab.
"""
import time

from bianchi.congruence import abelianization, coset_table, degree_one_primes, gs_check, relation_matrix

SMALLEST = {1: 401, 2: 193, 3: 937, 7: 137, 11: 103}

print(" d  norm  level         index  relations        rank  torsion primes               > (N+1)/2")
for d, norm in SMALLEST.items():
    lv = degree_one_primes(d, norm, norm, conjugates=False)[0]
    t = time.time()
    tab = coset_table(f"PSL2_O{d}", lv)
    rel = relation_matrix(tab)
    rep = abelianization(f"PSL2_O{d}", lv, table=tab)
    shape = f"{len(rel.rows)}x{rel.ncols}"
    print(f"{d:2d} {norm:5d}  {str(lv):12s} {tab.index:6d}  {shape:15s} {rep.rank:4d}  "
          f"{str(rep.torsion_primes):28s} {gs_check(rep)}  ({time.time() - t:.1f}s)")

# the same question along a range: how often does a level violate the bound?
print()
d, top = 1, 600
hits = []
for lv in degree_one_primes(d, 2, top, conjugates=False):
    rep = abelianization("PSL2_O1", lv)
    if gs_check(rep):
        hits.append((lv.norm, gs_check(rep)))
print(f"d = {d}, N(p) <= {top}: levels with a torsion prime above (N+1)/2: {hits}")
