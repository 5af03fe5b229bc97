"""Gamma_0(a) inside PSL_2(O_d): coset tables and abelianizations.

Right cosets Gamma_0(a) x correspond to points of P^1(O/a) through the
bottom row of x, with the right action (x : y) . (a b; c d) = (xa + yc : xb + yd).
The base point (0 : 1) is the trivial coset.

Levels are square-free products of degree-one primes, so O/a is a product
of prime fields and P^1(O/a) is the product of the P^1(F_p).
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field

from .exactla import AbelianDecomposition, SparseRelations
from .factoring import prime_factors
from .presentations import GroupPresentation, group_id, letters, load_presentation
from .ring import ZZ, Mat2, QuadInt, ResidueField, _is_prime, quad_ring, split_type


class UnsupportedLevel(ValueError):
    pass


@dataclass(frozen=True)
class LevelIdeal:
    """A principal ideal (generator) that is a product of distinct degree-one primes."""

    d: int
    generator: QuadInt
    factors: tuple          # prime elements, canonical

    @classmethod
    def unit(cls, d):
        return cls(d, QuadInt(1, 0, d), ())

    @classmethod
    def from_primes(cls, primes):
        primes = [p.canonical() for p in primes]
        if not primes:
            raise ValueError("use LevelIdeal.unit for the trivial level")
        d = primes[0].d
        if len({p.pair for p in primes}) != len(primes):
            raise UnsupportedLevel("level is not square-free")
        g = QuadInt(1, 0, d)
        for p in primes:
            if not _is_prime(p.norm()):
                raise UnsupportedLevel(f"{p} is not a prime of residue degree one")
            g = g * p
        return cls(d, g.canonical(), tuple(sorted(primes, key=lambda x: (x.norm(), x.pair))))

    @classmethod
    def from_generator(cls, x: QuadInt):
        """Factor a generator into degree-one primes, rejecting other shapes."""
        R = x.ring
        n = x.norm()
        if n == 0:
            raise UnsupportedLevel("zero ideal")
        if n == 1:
            return cls.unit(x.d)
        primes = []
        for p in prime_factors(n).primes:
            kind, pi = split_type(p, x.d)
            if kind == "inert":
                raise UnsupportedLevel(f"inert prime {p} divides the level")
            cands = [pi] if kind == "ramified" else [pi, pi.conj().canonical()]
            for c in cands:
                if R.divides(c.pair, x.pair):
                    if R.divides(R.mul(c.pair, c.pair), x.pair):
                        raise UnsupportedLevel("level is not square-free")
                    primes.append(c)
        lvl = cls.from_primes(primes)
        if lvl.generator != x.canonical():
            raise UnsupportedLevel(f"{x} is not a product of distinct degree-one primes")
        return lvl

    @property
    def norm(self):
        return self.generator.norm()

    @property
    def is_prime(self):
        return len(self.factors) == 1

    @property
    def index(self):
        out = 1
        for p in self.factors:
            out *= p.norm() + 1
        return out

    def conj(self) -> "LevelIdeal":
        return LevelIdeal.from_primes([p.conj() for p in self.factors]) if self.factors else self

    def key(self):
        """Identifier used by the result store."""
        a, b = self.generator.pair
        return f"{self.d}:{a}:{b}"

    def to_json(self):
        return {"d": self.d, "norm": self.norm, "generator": self.generator.to_json(),
                "factors": [p.to_json() for p in self.factors]}

    def __str__(self):
        g = str(self.generator)
        return g if g.startswith("(") else f"({g})"


def degree_one_primes(d: int, norm_min: int, norm_max: int, conjugates: bool = True) -> list[LevelIdeal]:
    """Prime ideals of residue degree one with norm in [norm_min, norm_max].

    Split primes give two ideals (both listed unless conjugates=False);
    ramified primes give one.
    """
    out = []
    for p in range(max(2, norm_min), norm_max + 1):
        if not _is_prime(p):
            continue
        kind, pi = split_type(p, d)
        if kind == "inert":
            continue
        out.append(LevelIdeal.from_primes([pi]))
        if kind == "split" and conjugates:
            out.append(LevelIdeal.from_primes([pi.conj()]))
    return out


class CosetTable:
    """Coset table of Gamma_0(level) in a PSL_2 presentation."""

    def __init__(self, P: GroupPresentation, level: LevelIdeal, seed: int | None = None):
        if P.kind != "PSL":
            raise UnsupportedLevel("congruence subgroups are only built inside PSL_2")
        if P.d != level.d:
            raise ValueError("ring mismatch between presentation and level")
        self.presentation = P
        self.level = level
        self.fields = [ResidueField(p) for p in level.factors]
        self.moduli = [F.p for F in self.fields]
        self.index = level.index
        self.perm = [self._perm_of(M) for M in P.matrices]
        self.perm_inv = []
        for pm in self.perm:
            inv = [0] * self.index
            for c, e in enumerate(pm):
                inv[e] = c
            self.perm_inv.append(inv)
        self._build_tree(seed)
        self._check_relators()

    # -- points ---------------------------------------------------------------
    def _encode(self, local):
        idx = 0
        for (p, v) in zip(self.moduli, local):
            idx = idx * (p + 1) + v
        return idx

    def _decode(self, idx):
        out = []
        for p in reversed(self.moduli):
            out.append(idx % (p + 1))
            idx //= p + 1
        return out[::-1]

    @staticmethod
    def _norm_point(x, y, p):
        # (x : y) -> index: y != 0 gives x/y in [0, p), y == 0 gives p
        if y % p:
            return x * pow(y, -1, p) % p
        if x % p == 0:
            raise ArithmeticError("not a point of P^1")
        return p

    def point(self, idx):
        """Per-prime representatives (x, y) of the point with this index."""
        return [(v, 1) if v < p else (1, 0) for v, p in zip(self._decode(idx), self.moduli)]

    def act_point(self, idx: int, M: Mat2) -> int:
        local = self._decode(idx)
        out = []
        for v, F, p in zip(local, self.fields, self.moduli):
            x, y = (v, 1) if v < p else (1, 0)
            a, b, c, e = (F.reduce_pair(z) for z in M.entries)
            out.append(self._norm_point(x * a + y * c, x * b + y * e, p))
        return self._encode(out)

    def _perm_of(self, M: Mat2):
        return [self.act_point(i, M) for i in range(self.index)]

    def in_subgroup(self, M: Mat2) -> bool:
        c = M.entries[2]
        return all(F.reduce_pair(c) == 0 for F in self.fields)

    def generator_matrix(self, g):
        return self.presentation.matrices[g]

    # -- transversal ------------------------------------------------------------
    def _build_tree(self, seed):
        P = self.presentation
        n = self.index
        order = [(g, s) for g in range(P.ngens) for s in (1, -1)]
        if seed is not None:
            random.Random(seed).shuffle(order)
        parent = [None] * n
        seen = [False] * n
        seen[0] = True
        self.transversal = [None] * n
        self.transversal[0] = Mat2.identity(P.d)
        q = deque([0])
        while q:
            c = q.popleft()
            for g, s in order:
                e = self.perm[g][c] if s > 0 else self.perm_inv[g][c]
                if not seen[e]:
                    seen[e] = True
                    parent[e] = (c, g, s)
                    M = P.matrices[g] if s > 0 else P.matrices[g].inverse()
                    self.transversal[e] = self.transversal[c] * M
                    q.append(e)
        if not all(seen):
            raise ValueError("generators do not act transitively on the cosets")
        self.parent = parent
        self.transversal_inverse = [t.inverse() for t in self.transversal]

    def tree_columns(self) -> set:
        """Schreier generators (c, g) that are trivial because they label a tree edge."""
        out = set()
        for e, par in enumerate(self.parent):
            if par is None:
                continue
            c, g, s = par
            out.add((c, g) if s > 0 else (e, g))
        return out

    def return_element(self, c: int, g: int) -> Mat2:
        e = self.perm[g][c]
        return self.transversal[c] * self.presentation.matrices[g] * self.transversal_inverse[e]

    def _check_relators(self):
        for r in self.presentation.relators:
            for c in range(self.index):
                cur = c
                for g, s in letters(r):
                    cur = self.perm[g][cur] if s > 0 else self.perm_inv[g][cur]
                if cur != c:
                    raise ValueError("relator acts nontrivially on cosets: inconsistent coset table")

    def relators_act_trivially(self) -> bool:
        try:
            self._check_relators()
        except ValueError:
            return False
        return True


def coset_table(group, level: LevelIdeal, seed: int | None = None) -> CosetTable:
    P = load_presentation(group) if isinstance(group, str) else group
    return CosetTable(P, level, seed)


# ---------------------------------------------------------------------------
# Abelianization by Reidemeister-Schreier
# ---------------------------------------------------------------------------


def relation_matrix(table: CosetTable) -> SparseRelations:
    """One abelianized relator per (relator, coset) in the non-tree Schreier generators."""
    P = table.presentation
    tree = table.tree_columns()
    col = {}
    for c in range(table.index):
        for g in range(P.ngens):
            if (c, g) not in tree:
                col[(c, g)] = len(col)
    rel = SparseRelations(len(col))
    perm, perm_inv = table.perm, table.perm_inv
    lets = [list(letters(r)) for r in P.relators]
    for word in lets:
        for c in range(table.index):
            row: dict[int, int] = {}
            cur = c
            for g, s in word:
                if s > 0:
                    k = col.get((cur, g))
                    cur = perm[g][cur]
                else:
                    cur = perm_inv[g][cur]
                    k = col.get((cur, g))
                if k is not None:
                    row[k] = row.get(k, 0) + s
            rel.add_row(row)
    return rel


@dataclass
class AbelianizationReport:
    level: LevelIdeal
    decomposition: AbelianDecomposition
    torsion_primes: list[int]
    unfactored: list[int] = field(default_factory=list)

    @property
    def rank(self):
        return self.decomposition.rank

    @property
    def divisors(self):
        return self.decomposition.divisors

    @property
    def torsion_order(self):
        return self.decomposition.torsion_order

    @property
    def cuspidal_rank(self):
        return cuspidal_rank(self)

    @property
    def gs_violations(self):
        return gs_check(self) if self.level.is_prime else []

    def to_json(self):
        out = {
            "level": self.level.to_json(),
            "rank": self.rank,
            "divisors": [str(x) for x in self.divisors],
            "torsion_primes": self.torsion_primes,
            "unfactored": [{"digits": len(str(c)), "value": str(c)} for c in self.unfactored],
        }
        if self.level.is_prime:
            out["cuspidal_rank"] = self.cuspidal_rank
            out["gs_violations"] = self.gs_violations
        return out


def abelianization(group, level: LevelIdeal, factor_budget: float | None = None,
                   table: CosetTable | None = None) -> AbelianizationReport:
    if isinstance(group, str) or isinstance(group, GroupPresentation):
        P = load_presentation(group) if isinstance(group, str) else group
    else:
        P = load_presentation(f"PSL2_O{level.d}")
    table = table or CosetTable(P, level)
    dec = relation_matrix(table).cokernel()
    primes: set[int] = set()
    unfactored = []
    for x in dec.divisors:
        f = prime_factors(x, budget=factor_budget)
        primes.update(f.primes)
        unfactored.extend(f.unfactored)
    return AbelianizationReport(level, dec, sorted(primes), unfactored)


def abelian_rank(group, level: LevelIdeal) -> int:
    """Rank of Gamma_0(level)^ab only (modular ranks after unit elimination)."""
    P = load_presentation(group) if isinstance(group, str) else group
    rel = relation_matrix(CosetTable(P, level))
    return rel.ncols - rel.rank()


def cuspidal_rank_from(d: int, rank: int) -> int:
    r = rank if d in (1, 3) else rank - 2
    if r < 0:
        raise ValueError(f"negative cuspidal rank ({r}) from abelianization rank {rank}, d = {d}")
    return r


def cuspidal_rank(report: AbelianizationReport) -> int:
    """Cuspidal rank for a prime level of residue degree one."""
    if not report.level.is_prime:
        raise UnsupportedLevel("cuspidal rank correction is only defined for prime levels")
    return cuspidal_rank_from(report.level.d, report.rank)


def gs_check(report: AbelianizationReport) -> list[int]:
    """Torsion primes p with p > (N(p) + 1) / 2."""
    if not report.level.is_prime:
        raise UnsupportedLevel("gs_check needs a prime level")
    N = report.level.norm
    return [p for p in report.torsion_primes if 2 * p > N + 1]


def lmr_level(q: QuadInt) -> LevelIdeal:
    if q.d != 1:
        raise UnsupportedLevel("the (1+i) q levels live over Z[i]")
    n = q.norm()
    if not _is_prime(n) or n % 12 != 1:
        raise UnsupportedLevel(f"need a prime q with N(q) = 1 mod 12, got norm {n}")
    return LevelIdeal.from_primes([QuadInt(1, 1, 1), q])


def lmr_predicate(q: QuadInt) -> bool:
    """True iff Gamma_0((1+i) q)^ab has rank 0."""
    return abelian_rank("PSL2_O1", lmr_level(q)) == 0


def lmr_candidates(count: int) -> list[QuadInt]:
    """The `count` smallest primes q of Z[i] with N(q) = 1 mod 12 (conjugates separately)."""
    out = []
    p = 13
    while len(out) < count:
        if _is_prime(p) and p % 12 == 1:
            kind, pi = split_type(p, 1)
            out.extend([pi, pi.conj().canonical()])
        p += 1
    return out[:count]


def sweep_ranks(d: int, norm_min: int, norm_max: int, conjugates: bool = True,
                conjugate_symmetry: bool = True, progress=None) -> dict[str, int]:
    """Abelianization ranks of Gamma_0(p) for every degree-one prime with norm in range.

    Entrywise conjugation maps Gamma_0(p) onto Gamma_0(conj p), so with
    `conjugate_symmetry` each conjugate pair is computed once.
    """
    P = load_presentation(group_id(d, "PSL"))
    out: dict[str, int] = {}
    for lv in degree_one_primes(d, norm_min, norm_max, conjugates):
        if conjugate_symmetry and lv.conj().key() in out:
            out[lv.key()] = out[lv.conj().key()]
            continue
        out[lv.key()] = abelian_rank(P, lv)
        if progress:
            progress(lv, out[lv.key()])
    return out
