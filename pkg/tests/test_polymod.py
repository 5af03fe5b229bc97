import random

import pytest

from bianchi.congruence import LevelIdeal, coset_table, degree_one_primes
from bianchi.exactla import ExactMatrix
from bianchi.polymod import (CoeffRing, ModuleSpec, act_Ek, act_Ekl, act_Ekl_mod, coinduce, coinduce_element,
                             gram_is_invariant, pairing_gram, reduce_matrix)
from bianchi.presentations import load_presentation
from bianchi.ring import Mat2, QuadInt, quad_ring, residue_field

RINGS = [1, 2, 3, 7, 11]


def random_sl2(d, rng, steps=4):
    """Random product of elementary matrices (det 1)."""
    M = Mat2.identity(d)
    for _ in range(steps):
        x = (rng.randint(-3, 3), rng.randint(-3, 3))
        E = Mat2(1, x, 0, 1, d) if rng.random() < 0.5 else Mat2(1, 0, x, 1, d)
        M = M * E
    return M


def expand_oracle(M, k):
    """Image of X^(k-i) Y^i by repeated polynomial multiplication on coefficient dicts."""
    R = M.ring
    a, b, c, e = M.entries
    rows = []
    for i in range(k + 1):
        poly = {0: R.one}           # exponent of Y -> coefficient
        for factor in [(a, b)] * (k - i) + [(c, e)] * i:
            new = {}
            for j, v in poly.items():
                new[j] = R.add(new.get(j, R.zero), R.mul(v, factor[0]))
                new[j + 1] = R.add(new.get(j + 1, R.zero), R.mul(v, factor[1]))
            poly = new
        rows.append([poly.get(j, R.zero) for j in range(k + 1)])
    return ExactMatrix.from_rows(R, rows)


def test_act_Ek_examples():
    T = Mat2(1, 1, 0, 1, 1)
    A = act_Ek(T, 2)
    # x^2 -> (X + Y)^2, xy -> (X + Y) Y, y^2 -> Y^2
    assert [[x[0] for x in row] for row in A.to_rows()] == [[1, 2, 1], [0, 1, 1], [0, 0, 1]]
    # the lower unipotent gives x^2 -> X^2, xy -> X^2 + XY, y^2 -> (X + Y)^2
    L = Mat2(1, 0, 1, 1, 1)
    assert [[x[0] for x in row] for row in act_Ek(L, 2).to_rows()] == [[1, 0, 0], [1, 1, 0], [1, 2, 1]]
    for d in RINGS:
        assert act_Ek(Mat2.identity(d), 4).is_identity()
        assert act_Ek(random_sl2(d, random.Random(d)), 0).is_identity()


def test_act_Ekl_diagonal_example():
    M = Mat2((0, 1), 0, 0, (0, -1), 1)
    A = act_Ekl(M, ModuleSpec(1, 1)).matrix
    # basis X(x)Xb, X(x)Yb, Y(x)Xb, Y(x)Yb scales by i*conj(i), i*conj(-i), -i*conj(i), -i*conj(-i)
    rows = A.to_rows()
    assert [rows[j][j] for j in range(4)] == [(1, 0), (-1, 0), (-1, 0), (1, 0)]
    assert all(rows[i][j] == (0, 0) for i in range(4) for j in range(4) if i != j)


@pytest.mark.parametrize("d", RINGS)
def test_act_Ek_matches_polynomial_expansion(d):
    rng = random.Random(50 + d)
    for k in range(0, 5):
        M = random_sl2(d, rng)
        assert act_Ek(M, k) == expand_oracle(M, k)


@pytest.mark.parametrize("d", RINGS)
def test_action_is_multiplicative(d):
    rng = random.Random(d)
    for _ in range(100):
        k, l = rng.randint(0, 4), rng.randint(0, 4)
        spec = ModuleSpec(k, l)
        M, N = random_sl2(d, rng, 2), random_sl2(d, rng, 2)
        A = act_Ekl(M * N, spec).matrix
        assert A == act_Ekl(M, spec).matrix @ act_Ekl(N, spec).matrix
        assert A.shape == (spec.dim, spec.dim)


def test_second_factor_sees_conjugate():
    d = 2
    M = Mat2(1, (0, 1), 0, 1, d)
    got = act_Ekl(M, ModuleSpec(1, 1)).matrix
    assert got == act_Ek(M, 1).kron(act_Ek(M.conj(), 1))
    # a rational matrix gives equal factors
    R = Mat2(2, 1, 1, 1, d)
    assert act_Ekl(R, ModuleSpec(2, 0)).matrix == act_Ek(R, 2)
    assert act_Ek(R.conj(), 2) == act_Ek(R, 2)


@pytest.mark.parametrize("d", RINGS)
def test_minus_identity_acts_trivially_iff_even(d):
    minus = Mat2(-1, 0, 0, -1, d)
    for k in range(4):
        for l in range(4):
            A = act_Ekl(minus, ModuleSpec(k, l)).matrix
            assert A.is_identity() == ((k + l) % 2 == 0)


@pytest.mark.parametrize("d,p", [(1, 5), (1, 2), (1, 3), (2, 3), (3, 7), (7, 11), (11, 3), (11, 11)])
def test_mod_reduction_matches_integral_action(d, p):
    F = residue_field(p, d)
    rng = random.Random(p * 100 + d)
    for _ in range(20):
        M = random_sl2(d, rng)
        k, l = rng.randint(0, 3), rng.randint(0, 3)
        A = act_Ekl(M, ModuleSpec(k, l)).matrix
        assert act_Ekl_mod(M, k, l, F).matrix == reduce_matrix(A, F)


def test_mod_identity():
    F = residue_field(5, 1)
    I = act_Ekl_mod(Mat2.identity(1), 2, 1, F).matrix
    assert I.rows == [[1 if i == j else 0 for j in range(6)] for i in range(6)]


def test_pairing_gram_examples():
    assert pairing_gram(ModuleSpec(0, 0)).tolist() == [[1]]
    G = pairing_gram(ModuleSpec(1, 0))
    assert G.tolist() == [[0, 1], [-1, 0]]
    with pytest.raises(ValueError):
        pairing_gram(ModuleSpec(1, 2))
    with pytest.raises(ValueError):
        pairing_gram(ModuleSpec(3, 3))      # 2 and 3 not inverted


@pytest.mark.parametrize("d", RINGS)
def test_pairing_is_equivariant(d):
    rng = random.Random(60 + d)
    for k, l in [(1, 1), (2, 1), (3, 3), (4, 2)]:
        spec = ModuleSpec(k, l, CoeffRing.localized([2, 3]))
        G = pairing_gram(spec)
        for _ in range(20):
            M = random_sl2(d, rng)
            assert gram_is_invariant(act_Ekl(M, spec).matrix, G)


def test_pairing_gram_is_invertible():
    for k in range(7):
        for l in range(k + 1):
            G = pairing_gram(ModuleSpec(k, l, CoeffRing.localized([2, 3, 5])))
            # each row has exactly one nonzero entry, a unit of Z[1/k!]
            nz = [[x for x in row if x != 0] for row in G]
            assert all(len(r) == 1 for r in nz)
            for (x,) in nz:
                assert abs(x.numerator) == 1
                assert all(p <= k for p in (2, 3, 5) if x.denominator % p == 0)


def test_coinduction_trivial_module_is_permutation():
    P = load_presentation("PSL2_O1")
    tab = coset_table(P, LevelIdeal.from_primes([QuadInt(2, 1, 1)]))
    act = lambda M: act_Ekl(M, ModuleSpec(0, 0)).matrix
    for g in range(P.ngens):
        C = coinduce(act, tab, g)
        perm = tab.perm[g]
        for c in range(tab.index):
            row = [int(x) for x in C.re[c]]
            assert row == [1 if e == perm[c] else 0 for e in range(tab.index)]


def test_coinduction_index_one_is_base_action():
    P = load_presentation("PSL2_O2")
    tab = coset_table(P, LevelIdeal.unit(2))
    spec = ModuleSpec(2, 2)
    act = lambda M: act_Ekl(M, spec).matrix
    for g in range(P.ngens):
        assert coinduce(act, tab, g) == act(P.matrices[g])


def test_coinduction_return_elements_in_subgroup():
    P = load_presentation("PSL2_O1")
    tab = coset_table(P, LevelIdeal.from_primes([QuadInt(1, 1, 1)]))
    assert tab.index == 3
    for c in range(3):
        for g in range(P.ngens):
            assert tab.in_subgroup(tab.return_element(c, g))


@pytest.mark.parametrize("d", [1, 3])
def test_coinduction_is_multiplicative(d):
    P = load_presentation(f"PSL2_O{d}")
    lv = degree_one_primes(d, 7, 13)[0]
    tab = coset_table(P, lv)
    spec = ModuleSpec(1, 1)
    act = lambda M: act_Ekl(M, spec).matrix
    rng = random.Random(d)
    for _ in range(5):
        M, N = random_sl2(d, rng, 2), random_sl2(d, rng, 2)
        assert coinduce_element(act, tab, M * N) == coinduce_element(act, tab, M) @ coinduce_element(act, tab, N)
    # relators evaluate to the identity after coinduction
    for r in P.relators:
        out = ExactMatrix.identity(quad_ring(d), tab.index * spec.dim)
        for g, e in r:
            base = coinduce(act, tab, g)
            if e < 0:
                base = coinduce_element(act, tab, P.matrices[g].inverse())
            for _ in range(abs(e)):
                out = out @ base
        assert out.is_identity()
