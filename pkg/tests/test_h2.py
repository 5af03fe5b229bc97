import pytest

from bianchi.exactla import ExactMatrix, kernel_basis, rank, rank_modular, snf
from bianchi.h1 import h1
from bianchi.h2 import assemble, h1_rank_from_complex, h2, invariant_basis
from bianchi.polymod import ModuleSpec, act_Ekl
from bianchi.presentations import UnsupportedGroup, closure, load_cellcomplex
from bianchi.ring import Mat2, quad_ring

COMPLEXES = ["PSL2_O2"] + [f"PGL2_O{d}" for d in (1, 2, 3, 7, 11)]

# torsion primes and rank of H^2(G, E_{n,n}), small rows
TABLE = {
    ("PSL2_O2", 1): ([], 1),
    ("PSL2_O2", 2): ([2], 1),
    ("PSL2_O2", 3): ([2, 3], 2),
    ("PSL2_O2", 5): ([2, 3, 5], 3),
    ("PGL2_O1", 2): ([2], 1),
    ("PGL2_O1", 5): ([2], 2),
    ("PGL2_O2", 5): ([2, 5], 3),
    ("PGL2_O3", 5): ([2, 3, 5], 1),
    ("PGL2_O7", 3): ([2, 3, 7], 1),
    ("PGL2_O7", 5): ([2, 5, 7], 2),
    ("PGL2_O11", 4): ([2, 3, 11], 1),
    ("PGL2_O11", 5): ([2, 11], 3),
}


@pytest.mark.parametrize("gid", COMPLEXES)
def test_composite_is_zero(gid):
    for n in range(4):
        data = assemble(load_cellcomplex(gid), ModuleSpec(n, n))
        assert data.composite_is_zero()


@pytest.mark.parametrize("gid", COMPLEXES)
def test_invariant_bases_are_saturated_and_fixed(gid):
    C = load_cellcomplex(gid)
    spec = ModuleSpec(2, 2)
    data = assemble(C, spec)
    R = quad_ring(C.d)
    for cells, bases in ((C.vertex_reps, data.vertex_bases), (C.edge_reps, data.edge_bases)):
        for cell in cells:
            B = bases[cell.name]
            for M in C.stabilizer_matrices(cell):
                assert B @ act_Ekl(M, spec).matrix == B
            if B.nrows:
                assert all(R.is_unit(x) for x in snf(B).divisors)


def test_invariant_basis_examples():
    R = quad_ring(2)
    I = ExactMatrix.identity(R, 4)
    assert invariant_basis([], 4, R) == I
    minus = act_Ekl(Mat2(-1, 0, 0, -1, 2), ModuleSpec(1, 1)).matrix
    assert invariant_basis([minus]).nrows == 4
    # C2 generated by a = (0 -1; 1 0) on E_{1,1}
    a = act_Ekl(Mat2(0, -1, 1, 0, 2), ModuleSpec(1, 1)).matrix
    B = invariant_basis([a])
    assert B.nrows == 4 - rank(a - I)
    # averaging oracle: (I + a) has the same rank as the fixed space after inverting 2
    assert B.nrows == rank_modular(a + I)


@pytest.mark.parametrize("key", sorted(TABLE))
def test_h2_table_rows(key):
    gid, n = key
    res = h2(gid, ModuleSpec(n, n))
    assert (res.torsion_primes, res.rank) == TABLE[key]


def test_h2_flags():
    res = h2("PGL2_O1", ModuleSpec(2, 2))
    assert res.unreliable_primes == [2]
    assert res.unreliable_divisors == list(range(len(res.divisor_norms)))
    res = h2("PGL2_O11", ModuleSpec(4, 4))
    assert res.large_primes == [11]
    # 11 is ramified in O_11, so it is large but not highlighted
    assert res.highlighted_primes == []
    js = res.to_json()
    assert js["rank"] == 1 and js["torsion_primes"] == [2, 3, 11]


def test_h2_rejects_missing_data_and_odd_weight():
    with pytest.raises(UnsupportedGroup):
        h2("PSL2_O1", ModuleSpec(1, 1))
    with pytest.raises(ValueError):
        h2("PSL2_O2", ModuleSpec(1, 2))


@pytest.mark.parametrize("gid", COMPLEXES)
def test_h1_rank_from_complex_matches_fox(gid):
    for n in range(4):
        spec = ModuleSpec(n, n)
        assert h1_rank_from_complex(gid, spec) == h1(gid, spec).rank


@pytest.mark.parametrize("gid", COMPLEXES)
def test_rank_over_fraction_field(gid):
    for n in range(1, 4):
        data = assemble(load_cellcomplex(gid), ModuleSpec(n, n))
        assert h2(gid, ModuleSpec(n, n)).rank == data.d1.ncols - rank_modular(data.d1, trials=5)


@pytest.mark.parametrize("d", [7, 11])
def test_glued_vertex_invariants_land_in_edge_invariants(d):
    C = load_cellcomplex(f"PGL2_O{d}")
    spec = ModuleSpec(2, 2)
    data = assemble(C, spec)
    (ident,) = C.edge_identifications
    (v,) = set(C.edge(ident.source).ends) & set(C.edge(ident.target).ends)
    Bv = data.vertex_bases[C.vertex_transport(v)[0]]
    # vectors fixed by the vertex group are fixed by the edge stabilizer
    for M in C.stabilizer_matrices(C.edge(ident.source)):
        assert Bv @ act_Ekl(M, spec).matrix == Bv
    assert C.evaluate(ident.element).projective_key() in closure(C.stabilizer_matrices(C.vertex(v)))
