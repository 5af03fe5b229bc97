"""H^1 of finitely presented groups by Fox calculus.

Cochains are row vectors.  For generators g_1..g_G and a module of rank
dim, a 1-cocycle is the concatenated row vector x = (f(g_1), ..., f(g_G)),
and every relator r gives the linear condition  x @ J_r = 0  where J_r
stacks the right Fox derivatives dr/dg evaluated in the module.  The
relator matrix is the horizontal concatenation of the J_r, so Z^1 is its
left kernel.

Since Z^1 is saturated in O^(G*dim), the torsion of Z^1/B^1 equals the
torsion of O^(G*dim)/B^1: the elementary divisors of the coboundary matrix.
`h1` uses that shortcut by default; ``method="kernel"`` runs the literal
kernel-then-quotient computation.
"""
from __future__ import annotations

from typing import Callable

from .exactla import (AbelianDecomposition, ExactMatrix, hstack, kernel_basis, quotient_decomposition,
                      rank_mod_p, rank_modular, reduce_mod_prime, snf, split_primes, vstack)
from .polymod import FieldMatrix, ModuleSpec, act_Ekl, act_Ekl_mod
from .presentations import GroupPresentation, Word, letters, load_presentation
from .ring import ZZ, Mat2, ResidueField


class ActionSystem:
    """Matrices for generators and inverses of a presentation acting on a module."""

    def __init__(self, P: GroupPresentation, act: Callable[[Mat2], object], dim: int, identity):
        self.P = P
        self._act = act
        self.dim = dim
        self.identity = identity
        self._cache: dict = {}

    def letter(self, g: int, s: int):
        key = (g, s)
        if key not in self._cache:
            M = self.P.matrices[g] if s > 0 else self.P.matrices[g].inverse()
            self._cache[key] = self._act(M)
        return self._cache[key]

    def word(self, w: Word):
        out = self.identity
        for g, s in letters(w):
            out = out @ self.letter(g, s)
        return out


def module_actions(P: GroupPresentation, spec: ModuleSpec, ring=None) -> ActionSystem:
    """Actions of the generators on E_{k,l}; ``ring=ZZ`` for the trivial module over Z."""
    spec.check_for(P.kind)
    if ring is ZZ:
        if spec.dim != 1:
            raise ValueError("integer coefficients are only supported for the trivial module")
        one = ExactMatrix.identity(ZZ, 1)
        return ActionSystem(P, lambda M: one, 1, one)
    if spec.coeff.kind == "residue":
        F = spec.coeff.field
        ident = act_Ekl_mod(Mat2.identity(P.d), spec.k, spec.l, F).matrix
        return ActionSystem(P, lambda M: act_Ekl_mod(M, spec.k, spec.l, F).matrix, spec.dim, ident)
    ident = act_Ekl(Mat2.identity(P.d), spec).matrix
    for u in P.matrices[0].ring.units:
        # central units must act trivially (PGL groups contain every scalar matrix)
        if not act_Ekl(Mat2(u, 0, 0, u, P.d), spec).matrix.is_identity():
            raise ValueError(f"scalar {u} acts nontrivially on E_{spec.k},{spec.l}")
    return ActionSystem(P, lambda M: act_Ekl(M, spec).matrix, spec.dim, ident)


def _add(x, y):
    return y if x is None else x + y


def _sub(x, y):
    return -y if x is None else x - y


def fox_blocks(w: Word, acts: ActionSystem) -> list:
    """Right Fox derivatives dw/dg_i evaluated in the module, one dim x dim block per generator.

    With the suffix S_k = act(x_{k+1} ... x_L), a letter g contributes +S_k
    and a letter g^-1 contributes -act(g^-1) S_k = -S_{k-1}.
    """
    lets = list(letters(w))
    L = len(lets)
    suffix = [None] * (L + 1)
    suffix[L] = acts.identity
    for k in range(L - 1, -1, -1):
        g, s = lets[k]
        suffix[k] = acts.letter(g, s) @ suffix[k + 1]
    blocks = [None] * acts.P.ngens
    for k, (g, s) in enumerate(lets):
        if s > 0:
            blocks[g] = _add(blocks[g], suffix[k + 1])
        else:
            blocks[g] = _sub(blocks[g], suffix[k])
    zero = acts.identity - acts.identity
    return [zero if b is None else b for b in blocks]


def left_fox_blocks(w: Word, acts: ActionSystem) -> list:
    """Left Fox derivatives (homology convention): a letter g at position k
    contributes act(prefix), a letter g^-1 contributes -act(prefix g^-1)."""
    lets = list(letters(w))
    prefix = [acts.identity]
    for g, s in lets:
        prefix.append(prefix[-1] @ acts.letter(g, s))
    blocks = [None] * acts.P.ngens
    for k, (g, s) in enumerate(lets):
        if s > 0:
            blocks[g] = _add(blocks[g], prefix[k])
        else:
            blocks[g] = _sub(blocks[g], prefix[k + 1])
    zero = acts.identity - acts.identity
    return [zero if b is None else b for b in blocks]


def relator_matrix(acts: ActionSystem) -> ExactMatrix:
    """(G*dim) x (R*dim) matrix whose left kernel is the cocycle space Z^1."""
    cols = [vstack(fox_blocks(r, acts)) for r in acts.P.relators]
    return hstack(cols)


def coboundary_matrix(acts: ActionSystem) -> ExactMatrix:
    """dim x (G*dim) matrix; row m is (m act(g_i) - m)_i, so its row span is B^1."""
    I = acts.identity
    return hstack([acts.letter(g, 1) - I for g in range(acts.P.ngens)])


def _rank(A: ExactMatrix) -> int:
    return rank_modular(A, trials=3)


def h1_from_actions(acts: ActionSystem, method: str = "divisors") -> AbelianDecomposition:
    F = relator_matrix(acts)
    C = coboundary_matrix(acts)
    if method == "kernel":
        Z = kernel_basis(F)
        return quotient_decomposition(Z, C)
    if method != "divisors":
        raise ValueError(f"unknown method {method!r}")
    res = snf(C)
    n = F.nrows
    rank = n - _rank(F) - res.rank
    return AbelianDecomposition(C.ring, res.nontrivial(C.ring), rank)


def _presentation(group):
    return load_presentation(group) if isinstance(group, str) else group


def h1(group, spec: ModuleSpec, method: str = "divisors", ring=None) -> AbelianDecomposition:
    """H^1(G, E_{k,l}) for a shipped group id or a GroupPresentation."""
    P = _presentation(group)
    return h1_from_actions(module_actions(P, spec, ring), method)


def coinduced_actions(P: GroupPresentation, cosets, spec: ModuleSpec, ring=None) -> ActionSystem:
    """Actions on the module induced from the congruence subgroup of a coset table."""
    from .polymod import coinduce_element

    base = module_actions(P, spec, ring)
    n = cosets.index
    ident = ExactMatrix.identity(base.identity.ring, n * base.dim)

    def act(M):
        return coinduce_element(base._act, cosets, M)

    return ActionSystem(P, act, n * base.dim, ident)


def h1_subgroup(group, cosets, spec: ModuleSpec, method: str = "divisors", ring=None) -> AbelianDecomposition:
    """H^1 of the congruence subgroup of `cosets` via Shapiro's lemma."""
    P = _presentation(group)
    return h1_from_actions(coinduced_actions(P, cosets, spec, ring), method)


# ---------------------------------------------------------------------------
# Homology H_1 (used to compare torsion with abelianizations)
# ---------------------------------------------------------------------------


def homology_h1_from_actions(acts: ActionSystem) -> AbelianDecomposition:
    """H_1(G, M) from the Fox resolution; torsion from the SNF of the boundary d2."""
    d2 = vstack([hstack(left_fox_blocks(r, acts)) for r in acts.P.relators])
    I = acts.identity
    d1 = vstack([acts.letter(g, 1) - I for g in range(acts.P.ngens)])
    res = snf(d2)
    rank = d2.ncols - _rank(d1) - res.rank
    return AbelianDecomposition(d2.ring, res.nontrivial(d2.ring), rank)


def homology_h1(group, spec: ModuleSpec | None = None, cosets=None, ring=ZZ) -> AbelianDecomposition:
    """H_1 of G (or of the subgroup of a coset table, by Shapiro) with trivial or E_{k,l} coefficients."""
    P = _presentation(group)
    spec = spec or ModuleSpec(0, 0)
    acts = module_actions(P, spec, ring) if cosets is None else coinduced_actions(P, cosets, spec, ring)
    return homology_h1_from_actions(acts)


# ---------------------------------------------------------------------------
# Residue-field coefficients
# ---------------------------------------------------------------------------


def _field_rank(F: ResidueField, M: FieldMatrix) -> int:
    if F.degree == 1:
        return rank_mod_p(M.rows, M.ncols, F.p)
    # F_{p^2}: plain Gaussian elimination
    rows = [list(r) for r in M.rows]
    rank = 0
    ncols = M.ncols
    for c in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if not F.is_zero(rows[i][c])), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = F.inv(rows[rank][c])
        rows[rank] = [F.mul(inv, x) for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and not F.is_zero(rows[i][c]):
                f = rows[i][c]
                rows[i] = [F.sub(x, F.mul(f, y)) for x, y in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def _field_hstack(mats):
    F = mats[0].field
    return FieldMatrix(F, [sum((m.rows[i] for m in mats), []) for i in range(mats[0].nrows)])


def _field_vstack(mats):
    return FieldMatrix(mats[0].field, [r for m in mats for r in m.rows])


def _field_diff(A: FieldMatrix, B: FieldMatrix) -> FieldMatrix:
    F = A.field
    return FieldMatrix(F, [[F.sub(x, y) for x, y in zip(r, s)] for r, s in zip(A.rows, B.rows)])


def h1_dim_mod(group, k: int, l: int, F: ResidueField) -> int:
    """dim over the residue field of H^1(G, E_{k,l}(kappa))."""
    P = _presentation(group)
    spec = ModuleSpec(k, l)
    spec.check_for(P.kind)
    acts = {}

    def act(g, s):
        if (g, s) not in acts:
            M = P.matrices[g] if s > 0 else P.matrices[g].inverse()
            acts[(g, s)] = act_Ekl_mod(M, k, l, F).matrix
        return acts[(g, s)]

    I = act_Ekl_mod(Mat2.identity(P.d), k, l, F).matrix
    zero = _field_diff(I, I)
    cols = []
    for r in P.relators:
        lets = list(letters(r))
        suffix = [None] * (len(lets) + 1)
        suffix[-1] = I
        for i in range(len(lets) - 1, -1, -1):
            suffix[i] = act(*lets[i]) @ suffix[i + 1]
        blocks = [zero] * P.ngens
        for i, (g, s) in enumerate(lets):
            if s > 0:
                blocks[g] = FieldMatrix(F, [[F.add(x, y) for x, y in zip(a, b)]
                                           for a, b in zip(blocks[g].rows, suffix[i + 1].rows)])
            else:
                blocks[g] = _field_diff(blocks[g], suffix[i])
        cols.append(_field_vstack(blocks))
    Fox = _field_hstack(cols)
    C = _field_hstack([_field_diff(act(g, 1), I) for g in range(P.ngens)])
    return Fox.nrows - _field_rank(F, Fox) - _field_rank(F, C)
