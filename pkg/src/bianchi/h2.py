"""H^2 from a fundamental cell of the Bianchi group action.

With 6 inverted the equivariant spectral sequence collapses to the complex

    (+)_v M^{G_v}  --d0-->  (+)_e M^{G_e}  --d1-->  M

over orbit representatives of vertices and edges, and H^2 = M / im d1.  The
computation here stays over O_d and only flags divisors supported at 2 and 3.

Cochain values move along the group action by  f(h.cell) = f(cell) . h^-1,
so an edge glued as  e' = +-h.e  contributes  +-m . h^-1  wherever e' occurs
in the boundary of the 2-cell.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .exactla import (AbelianDecomposition, ExactMatrix, cokernel_decomposition, hstack, kernel_basis,
                      rank_modular, vstack)
from .factoring import prime_factors
from .polymod import ModuleSpec, act_Ekl
from .presentations import CellComplexDatum, load_cellcomplex
from .ring import Mat2, split_type


def invariant_basis(actions: list[ExactMatrix], dim: int | None = None, ring=None) -> ExactMatrix:
    """Saturated basis (rows) of the vectors fixed by every matrix in `actions`."""
    if not actions:
        return ExactMatrix.identity(ring, dim)
    I = ExactMatrix.identity(actions[0].ring, actions[0].nrows)
    return kernel_basis(hstack([A - I for A in actions]))


@dataclass
class EquivariantChainData:
    datum: CellComplexDatum
    spec: ModuleSpec
    vertex_bases: dict
    edge_bases: dict
    d0: ExactMatrix         # rows: vertex invariant basis vectors; columns: edge reps x dim (ambient)
    d1: ExactMatrix         # rows: edge invariant basis vectors; columns: M
    edge_maps: dict         # edge rep -> dim x dim matrix C_e with d1 = (+)_e B_e C_e

    def composite_is_zero(self) -> bool:
        C = vstack([self.edge_maps[e.name] for e in self.datum.edge_reps])
        return (self.d0 @ C).is_zero()


def _act(spec):
    cache = {}

    def act(M: Mat2):
        if M.entries not in cache:
            cache[M.entries] = act_Ekl(M, spec).matrix
        return cache[M.entries]

    return act


def assemble(datum: CellComplexDatum, spec: ModuleSpec) -> EquivariantChainData:
    spec.check_for(datum.kind)
    act = _act(spec)
    I = act(Mat2.identity(datum.d))
    dim = I.nrows
    vbases = {v.name: invariant_basis([act(M) for M in datum.stabilizer_matrices(v)], dim, I.ring)
              for v in datum.vertex_reps}
    ebases = {e.name: invariant_basis([act(M) for M in datum.stabilizer_matrices(e)], dim, I.ring)
              for e in datum.edge_reps}
    zero = I - I

    # d1: sum over boundary occurrences, transported to the representative edge
    edge_maps = {e.name: zero for e in datum.edge_reps}
    for name, sign in datum.boundary:
        rep, h, orient = datum.edge_transport(name)
        T = act(h.inverse())
        edge_maps[rep] = edge_maps[rep] + (T if sign * orient > 0 else -T)
    d1 = vstack([ebases[e.name] @ edge_maps[e.name] for e in datum.edge_reps])

    # d0: vertex values evaluated at edge endpoints
    reps = [e.name for e in datum.edge_reps]
    blocks = {}
    for v in datum.vertex_reps:
        blocks[v.name] = [zero for _ in reps]
    for j, e in enumerate(datum.edge_reps):
        for end, s in ((e.ends[1], 1), (e.ends[0], -1)):
            rep, h = datum.vertex_transport(end)
            T = act(h.inverse())
            blocks[rep][j] = blocks[rep][j] + (T if s > 0 else -T)
    d0 = vstack([vbases[v.name] @ hstack(blocks[v.name]) for v in datum.vertex_reps])
    data = EquivariantChainData(datum, spec, vbases, ebases, d0, d1, edge_maps)
    if not data.composite_is_zero():
        raise ValueError(f"{datum.gid}: d1 o d0 != 0 for the shipped orientation data")
    return data


@dataclass
class H2Result:
    decomposition: AbelianDecomposition
    torsion_primes: list[int]
    unreliable_primes: list[int]        # 2 and 3: stabilizer cohomology was not inverted
    large_primes: list[int]             # p > max(k, l)
    unreliable_divisors: list[int] = field(default_factory=list)   # indices of divisors with norm 2^a 3^b
    unfactored: list[int] = field(default_factory=list)
    highlighted_primes: list[int] = field(default_factory=list)    # large and unramified in O_d

    @property
    def rank(self):
        return self.decomposition.rank

    @property
    def divisor_norms(self):
        return self.decomposition.divisor_norms

    def to_json(self):
        out = self.decomposition.to_json()
        out.update(torsion_primes=self.torsion_primes, unreliable_primes=self.unreliable_primes,
                   large_primes=self.large_primes, highlighted_primes=self.highlighted_primes,
                   unfactored=[{"digits": len(str(c)), "value": str(c)} for c in self.unfactored])
        return out


def _is_23_smooth(n: int) -> bool:
    for p in (2, 3):
        while n % p == 0:
            n //= p
    return n == 1


def h2(group, spec: ModuleSpec, factor_budget: float | None = None) -> H2Result:
    """H^2(G, E_{k,l}(O_d)) for PSL_2(O_2), the PGL_2 groups, or a supplied CellComplexDatum."""
    datum = load_cellcomplex(group) if isinstance(group, str) else group
    data = assemble(datum, spec)
    dec = cokernel_decomposition(data.d1)
    primes: set[int] = set()
    unfactored = []
    for n in dec.divisor_norms:
        f = prime_factors(n, budget=factor_budget)
        primes.update(f.primes)
        unfactored.extend(f.unfactored)
    primes_l = sorted(primes)
    bound = max(spec.k, spec.l)
    large = [p for p in primes_l if p > bound]
    return H2Result(
        dec,
        primes_l,
        [p for p in primes_l if p in (2, 3)],
        large,
        [i for i, n in enumerate(dec.divisor_norms) if _is_23_smooth(n)],
        unfactored,
        [p for p in large if split_type(p, datum.d)[0] != "ramified"],
    )


def h1_rank_from_complex(group, spec: ModuleSpec) -> int:
    """rank of ker d1 / im d0, a rank-level cross-check against Fox calculus."""
    datum = load_cellcomplex(group) if isinstance(group, str) else group
    data = assemble(datum, spec)
    edge_total = sum(b.nrows for b in data.edge_bases.values())
    return edge_total - rank_modular(data.d1) - rank_modular(data.d0)
