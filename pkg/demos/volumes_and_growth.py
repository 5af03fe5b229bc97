"""Covolumes, torsion growth and the count of cuspidal ranks.

Run:  python demos/volumes_and_growth.py [x]

V_d = |D|^(3/2) zeta_K(2) / (4 pi^2).  For a prime level of residue degree
one, Gamma_0(p) has covolume (N(p)+1) V_d, and log |H_1(Gamma_0(p), Z)_tors|
divided by that volume should drift towards 1/(6 pi).  The last part sums
cuspidal ranks up to x and compares with x^(5/6) / log x.
"""
import sys

import mpmath

from bianchi.asymptotics import bv_constant, bv_ratio, lx_rx_table, nr_histogram, volume_constant
from bianchi.congruence import abelianization, degree_one_primes, sweep_ranks

x = int(sys.argv[1]) if len(sys.argv) > 1 else 1000

for d in (1, 2, 3, 7, 11):
    V = volume_constant(d)
    print(f"V_{d:<2d} = {V.digits(30)}")
print(f"1/(6 pi) = {mpmath.nstr(bv_constant(), 20)}")
print()

print("T/V for a few levels over Z[i] (torsion order grows exponentially with the volume):")
V1 = volume_constant(1)
for lv in degree_one_primes(1, 1000, 1100, conjugates=False):
    rep = abelianization("PSL2_O1", lv, factor_budget=2)
    st = bv_ratio(rep, V1)
    print(f"  N = {lv.norm:5d}  log|tors| = {st.T:8.2f}  V = {st.V:8.2f}  T/V = {st.ratio:.5f}")
print()

for d in (1, 3):
    ranks = sweep_ranks(d, 2, x, conjugates=False)
    h = nr_histogram(d, ranks, x + 1)
    print(f"d = {d}: cuspidal ranks of the {h.total} levels with N <= {x}: {h.to_rows()}")
    for xx, L, ratio in lx_rx_table(d, ranks, [x // 4, x // 2, x]):
        print(f"  x = {xx:5d}  L = {L:3d}  R/L = {'-' if ratio is None else f'{ratio:.4f}'}")
