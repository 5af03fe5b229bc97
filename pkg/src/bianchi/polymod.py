"""Matrices for the action of 2x2 matrices on polynomial modules.

E_k is the space of homogeneous degree-k polynomials in X, Y with the right
action  P(X, Y) . (a b; c d) = P(aX + bY, cX + dY).  Row i of the matrix is
the image of the basis monomial X^(k-i) Y^i, so products compose as
act(MN) = act(M) @ act(N) on row vectors.

E_{k,l} = E_k (x) conj(E_l): the second factor sees the complex conjugate
matrix.  The basis is X^(k-i)Y^i (x) Xb^(l-j)Yb^j in lexicographic (i, j)
order.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Callable

import numpy as np

from .exactla import ExactMatrix
from .ring import Mat2, ResidueField, quad_ring


@dataclass(frozen=True)
class CoeffRing:
    """Coefficients: 'integral' (O_d), 'residue' (a residue field) or 'localized' (O_d[1/S])."""

    kind: str = "integral"
    field: ResidueField | None = None
    inverted: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ("integral", "residue", "localized"):
            raise ValueError(f"unknown coefficient kind {self.kind!r}")
        if (self.kind == "residue") != (self.field is not None):
            raise ValueError("a residue field is required exactly for kind='residue'")

    @classmethod
    def residue(cls, F: ResidueField):
        return cls("residue", F)

    @classmethod
    def localized(cls, primes):
        return cls("localized", None, tuple(sorted(set(primes))))


INTEGRAL = CoeffRing()


@dataclass(frozen=True)
class ModuleSpec:
    k: int
    l: int
    coeff: CoeffRing = INTEGRAL

    def __post_init__(self):
        if self.k < 0 or self.l < 0:
            raise ValueError("weights must be nonnegative")

    @classmethod
    def symmetric(cls, n, coeff=INTEGRAL):
        """E_{n,n}."""
        return cls(n, n, coeff)

    @property
    def dim(self):
        return (self.k + 1) * (self.l + 1)

    def check_for(self, kind: str):
        """Reject weights on which -I acts nontrivially (PSL and PGL alike)."""
        if (self.k + self.l) % 2:
            raise ValueError(f"k + l must be even for {kind} groups (got k={self.k}, l={self.l})")


@dataclass
class ModuleAction:
    spec: ModuleSpec
    matrix: object            # ExactMatrix, or FieldMatrix for residue coefficients

    @property
    def dim(self):
        return self.matrix.nrows


# ---------------------------------------------------------------------------
# Expansion of (aX + bY)^m (cX + dY)^(k-m)
# ---------------------------------------------------------------------------


def _powers(ops, x, y, k):
    """Coefficient lists of (xX + yY)^m for m = 0..k (index j -> X^(m-j) Y^j)."""
    out = [[ops.one]]
    for m in range(1, k + 1):
        prev = out[-1]
        cur = [ops.zero] * (m + 1)
        for j, c in enumerate(prev):
            cur[j] = ops.add(cur[j], ops.mul(c, x))
            cur[j + 1] = ops.add(cur[j + 1], ops.mul(c, y))
        out.append(cur)
    return out


def _expand(ops, a, b, c, d, k):
    P = _powers(ops, a, b, k)
    Q = _powers(ops, c, d, k)
    rows = []
    for i in range(k + 1):
        p, q = P[k - i], Q[i]
        row = [ops.zero] * (k + 1)
        for s, x in enumerate(p):
            if ops.is_zero(x):
                continue
            for t, y in enumerate(q):
                row[s + t] = ops.add(row[s + t], ops.mul(x, y))
        rows.append(row)
    return rows


def act_Ek(M: Mat2, k: int, coeff: CoeffRing = INTEGRAL) -> ExactMatrix:
    """(k+1)x(k+1) matrix of M on E_k over O_d."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    R = M.ring
    rows = _expand(R, *M.entries, k)
    return ExactMatrix.from_rows(R, rows)


def act_Ekl(M: Mat2, spec: ModuleSpec) -> ModuleAction:
    if spec.coeff.kind == "residue":
        return act_Ekl_mod(M, spec.k, spec.l, spec.coeff.field)
    A = act_Ek(M, spec.k)
    if spec.l == 0:
        return ModuleAction(spec, A)
    return ModuleAction(spec, A.kron(act_Ek(M.conj(), spec.l)))


def action_factory(spec: ModuleSpec) -> Callable[[Mat2], object]:
    """Memoised Mat2 -> action matrix map for one module."""
    cache: dict = {}

    def act(M: Mat2):
        key = M.entries
        got = cache.get(key)
        if got is None:
            got = cache[key] = act_Ekl(M, spec).matrix
        return got

    return act


# ---------------------------------------------------------------------------
# Residue-field coefficients
# ---------------------------------------------------------------------------


class FieldMatrix:
    """Dense matrix over a residue field (ints mod p, or pairs for F_{p^2})."""

    def __init__(self, field: ResidueField, rows):
        self.field = field
        self.rows = [list(r) for r in rows]

    @property
    def nrows(self):
        return len(self.rows)

    @property
    def ncols(self):
        return len(self.rows[0]) if self.rows else 0

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def __matmul__(self, other):
        F = self.field
        n = other.ncols
        out = []
        for r in self.rows:
            row = [F.zero] * n
            for k, x in enumerate(r):
                if F.is_zero(x):
                    continue
                ok = other.rows[k]
                for j in range(n):
                    if not F.is_zero(ok[j]):
                        row[j] = F.add(row[j], F.mul(x, ok[j]))
            out.append(row)
        return FieldMatrix(F, out)

    def kron(self, other):
        F = self.field
        out = []
        for r in self.rows:
            for s in other.rows:
                out.append([F.mul(x, y) for x in r for y in s])
        return FieldMatrix(F, out)

    def __eq__(self, other):
        return isinstance(other, FieldMatrix) and self.rows == other.rows


class _FieldOps:
    def __init__(self, F):
        self.F = F
        self.zero, self.one = F.zero, F.one
        self.add, self.mul, self.is_zero = F.add, F.mul, F.is_zero


def act_Ekl_mod(M: Mat2, k: int, l: int, F: ResidueField) -> ModuleAction:
    """Action on E_{k,l}(kappa) built factor by factor over the residue field.

    Split primes: the first factor is M mod pi and the second is M mod conj(pi)
    (then conjugated back, which over F_p is the identity map).  Inert: the
    second factor applies Frobenius to M mod p.  Ramified: both mod pi.
    """
    ops = _FieldOps(F)
    first = [F.reduce_pair(x) for x in M.entries]
    if F.kind == "split":
        # conj(M) mod pi = conj(M mod conj(pi)); reducing conj(x) at pi is x at conj(pi)
        G = F.conjugate
        second = [G.reduce_pair(x) for x in M.entries]
    elif F.kind == "inert":
        second = [F.frobenius(F.reduce_pair(x)) for x in M.entries]
    else:
        second = [F.reduce_pair(M.ring.conj(x)) for x in M.entries]
    A = FieldMatrix(F, _expand(ops, *first, k))
    B = FieldMatrix(F, _expand(ops, *second, l))
    return ModuleAction(ModuleSpec(k, l, CoeffRing.residue(F)), A.kron(B))


def reduce_matrix(A: ExactMatrix, F: ResidueField) -> FieldMatrix:
    """Entrywise reduction of an integral matrix into the residue field."""
    return FieldMatrix(F, [[F.reduce_pair(x) if not isinstance(x, int) else F.reduce_pair((x, 0))
                            for x in row] for row in A.to_rows()])


# ---------------------------------------------------------------------------
# Coinduction
# ---------------------------------------------------------------------------


def coinduce_element(act: Callable[[Mat2], ExactMatrix], cosets, M: Mat2) -> ExactMatrix:
    """Action of the group element M on the module induced from the subgroup.

    The module is a direct sum of copies of the base module indexed by the
    right cosets.  Block (c, c.M) is act(t_c M t_{c.M}^-1), and that return
    element lies in the subgroup.
    """
    n = cosets.index
    sample = act(Mat2.identity(M.d))
    dim = sample.nrows
    out = ExactMatrix.zeros(sample.ring, n * dim, n * dim)
    for c in range(n):
        e = cosets.act_point(c, M)
        r = cosets.transversal[c] * M * cosets.transversal_inverse[e]
        if not cosets.in_subgroup(r):
            raise ValueError(f"inconsistent coset table at coset {c}")
        block = act(r)
        out.re[c * dim:(c + 1) * dim, e * dim:(e + 1) * dim] = block.re
        if out.om is not None:
            out.om[c * dim:(c + 1) * dim, e * dim:(e + 1) * dim] = block.om
    return out


def coinduce(act: Callable[[Mat2], ExactMatrix], cosets, g: int) -> ExactMatrix:
    """Induced action of the g-th presentation generator."""
    return coinduce_element(act, cosets, cosets.presentation.matrices[g])


# ---------------------------------------------------------------------------
# Invariant pairing
# ---------------------------------------------------------------------------


def _gram_k(k):
    G = np.zeros((k + 1, k + 1), dtype=object)
    G[:, :] = Fraction(0)
    for i in range(k + 1):
        G[i, k - i] = Fraction((-1) ** i, comb(k, i))
    return G


def pairing_gram(spec: ModuleSpec) -> np.ndarray:
    """Gram matrix (Fractions) of the SL_2-invariant pairing on E_{k,l}.

    On E_k the pairing is <X^(k-i)Y^i, X^(k-j)Y^j> = (-1)^i / C(k, i) when
    i + j = k and 0 otherwise, so that A G A^T = G whenever det A = 1.  The
    pairing on E_{k,l} is the tensor product of the two.  The coefficients
    must invert k!, e.g. ModuleSpec(k, l, CoeffRing.localized([2, 3])).
    """
    if spec.k < spec.l:
        raise ValueError("pairing requires k >= l")
    needed = [p for p in range(2, spec.k + 1) if all(p % q for q in range(2, p))]
    inverted = set(spec.coeff.inverted) if spec.coeff.kind == "localized" else set()
    if spec.coeff.kind == "residue":
        inverted = set(needed) - {spec.coeff.field.p}
    missing = [p for p in needed if p not in inverted]
    if missing:
        raise ValueError(f"k! is not invertible in the coefficients (primes {missing})")
    return np.kron(_gram_k(spec.k), _gram_k(spec.l))


def gram_is_invariant(A: ExactMatrix, G: np.ndarray) -> bool:
    """A G A^T == G for an integral action matrix (checked in Q(w) coordinates)."""
    if A.om is not None and np.any(A.om != 0):
        R = A.ring
        # (re + om w) G (re + om w)^T with w^2 = p + q w
        re, om = A.re, A.om
        t0 = re.dot(G).dot(re.T)
        t1 = re.dot(G).dot(om.T) + om.dot(G).dot(re.T)
        t2 = om.dot(G).dot(om.T)
        return bool(np.all(t0 + t2 * R.p == G) and np.all(t1 + t2 * R.q == 0))
    return bool(np.all(A.re.dot(G).dot(A.re.T) == G))
