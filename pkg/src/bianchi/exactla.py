"""Exact linear algebra over Z and over the Euclidean rings O_d.

Matrices act on row vectors throughout: the kernel of ``A`` means
``{x : x @ A == 0}`` and a lattice is the row span of a matrix.

Dense elimination runs on lists of ring elements (ints for Z, ``(a, b)``
pairs for O_d).  Large sparse integer relation matrices are first shrunk by
unit-pivot elimination and the remaining core is handed to FLINT.
"""
from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import flint
import numpy as np

from .ring import ZZ, IntegerRing, QuadInt, QuadRing, _is_prime, omega_roots_mod, quad_ring


def ring_of(d):
    return ZZ if d is None else quad_ring(d)


class ExactMatrix:
    """Dense matrix over Z (``ring = ZZ``) or O_d.

    Over O_d the entries are stored as two numpy object arrays ``re`` and
    ``om`` meaning ``re + om*w``; over Z ``om`` is None.  Products and
    Kronecker products are vectorised on these components.
    """

    __slots__ = ("ring", "re", "om")

    def __init__(self, ring, re, om=None):
        self.ring = ring
        self.re = np.asarray(re, dtype=object)
        if self.re.ndim != 2:
            self.re = self.re.reshape((self.re.shape[0] if self.re.ndim else 0, -1))
        if isinstance(ring, IntegerRing):
            self.om = None
        else:
            self.om = np.zeros(self.re.shape, dtype=object) if om is None else np.asarray(om, dtype=object)
            if self.om.shape != self.re.shape:
                raise ValueError("component shapes differ")

    # -- constructors -------------------------------------------------------
    @classmethod
    def zeros(cls, ring, m, n):
        z = np.zeros((m, n), dtype=object)
        return cls(ring, z, None if isinstance(ring, IntegerRing) else np.zeros((m, n), dtype=object))

    @classmethod
    def identity(cls, ring, n):
        m = cls.zeros(ring, n, n)
        for i in range(n):
            m.re[i, i] = 1
        return m

    @classmethod
    def from_rows(cls, ring, rows, ncols=None):
        rows = list(rows)
        m = len(rows)
        n = len(rows[0]) if rows else (ncols or 0)
        out = cls.zeros(ring, m, n)
        for i, row in enumerate(rows):
            for j, x in enumerate(row):
                if isinstance(x, QuadInt):
                    x = x.pair
                if out.om is None:
                    out.re[i, j] = x
                elif isinstance(x, int):
                    out.re[i, j] = x
                else:
                    out.re[i, j], out.om[i, j] = x
        return out

    @property
    def shape(self):
        return self.re.shape

    @property
    def nrows(self):
        return self.re.shape[0]

    @property
    def ncols(self):
        return self.re.shape[1]

    @property
    def is_integral(self):
        """True when every entry is a rational integer."""
        return self.om is None or not np.any(self.om != 0)

    def entry(self, i, j):
        if self.om is None:
            return self.re[i, j]
        return (self.re[i, j], self.om[i, j])

    def to_rows(self):
        if self.om is None:
            return [list(map(int, r)) for r in self.re]
        return [list(zip(map(int, a), map(int, b))) for a, b in zip(self.re, self.om)]

    def to_integer_rows(self):
        if not self.is_integral:
            raise ValueError("matrix has non-rational entries")
        return [list(map(int, r)) for r in self.re]

    def copy(self):
        return ExactMatrix(self.ring, self.re.copy(), None if self.om is None else self.om.copy())

    # -- arithmetic -----------------------------------------------------------
    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.om is None:
            return ExactMatrix(self.ring, self.re.dot(other.re))
        R = self.ring
        a, b = self.re, self.om
        c, e = other.re, other.om
        be = b.dot(e)
        return ExactMatrix(R, a.dot(c) + be * R.p, a.dot(e) + b.dot(c) + be * R.q)

    def __add__(self, other):
        return ExactMatrix(self.ring, self.re + other.re, None if self.om is None else self.om + other.om)

    def __sub__(self, other):
        return ExactMatrix(self.ring, self.re - other.re, None if self.om is None else self.om - other.om)

    def __neg__(self):
        return ExactMatrix(self.ring, -self.re, None if self.om is None else -self.om)

    def scale(self, x):
        """Multiply every entry by the ring element x."""
        if self.om is None:
            return ExactMatrix(self.ring, self.re * x)
        R = self.ring
        xa, xb = (x, 0) if isinstance(x, int) else x
        # (a + b w)(xa + xb w) = a xa + b xb p + (a xb + b xa + b xb q) w
        return ExactMatrix(R, self.re * xa + self.om * (xb * R.p), self.re * xb + self.om * xa + self.om * (xb * R.q))

    def conj(self):
        if self.om is None:
            return self.copy()
        if self.ring.q:
            return ExactMatrix(self.ring, self.re + self.om, -self.om)
        return ExactMatrix(self.ring, self.re.copy(), -self.om)

    def kron(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.om is None:
            return ExactMatrix(self.ring, np.kron(self.re, other.re))
        R = self.ring
        a, b = self.re, self.om
        c, e = other.re, other.om
        be = np.kron(b, e)
        return ExactMatrix(R, np.kron(a, c) + be * R.p, np.kron(a, e) + np.kron(b, c) + be * R.q)

    @property
    def T(self):
        return ExactMatrix(self.ring, self.re.T.copy(), None if self.om is None else self.om.T.copy())

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix) or self.shape != other.shape:
            return False
        if not np.array_equal(self.re, other.re):
            return False
        if self.om is None or other.om is None:
            return (self.om is None or not np.any(self.om != 0)) and (other.om is None or not np.any(other.om != 0))
        return np.array_equal(self.om, other.om)

    def is_zero(self):
        return not np.any(self.re != 0) and (self.om is None or not np.any(self.om != 0))

    def is_identity(self):
        n, m = self.shape
        return n == m and self == ExactMatrix.identity(self.ring, n)

    def __getitem__(self, idx):
        re = self.re[idx]
        om = None if self.om is None else self.om[idx]
        if re.ndim == 1:
            re = re.reshape(1, -1)
            om = None if om is None else om.reshape(1, -1)
        return ExactMatrix(self.ring, re, om)

    def with_ring(self, ring):
        """Reinterpret an integral matrix over another ring."""
        if not self.is_integral:
            raise ValueError("only integral matrices can change ring")
        return ExactMatrix(ring, self.re.copy(), None if isinstance(ring, IntegerRing) else np.zeros(self.shape, dtype=object))

    def __repr__(self):
        return f"ExactMatrix({self.ring}, {self.nrows}x{self.ncols})"

    def to_json(self):
        rows = self.to_rows()
        if self.om is None:
            return [[str(x) for x in r] for r in rows]
        return [[{"a": str(x[0]), "b": str(x[1]), "d": self.ring.d} for x in r] for r in rows]


def hstack(mats: Sequence[ExactMatrix]) -> ExactMatrix:
    ring = mats[0].ring
    re = np.hstack([m.re for m in mats])
    om = None if mats[0].om is None else np.hstack([m.om for m in mats])
    return ExactMatrix(ring, re, om)


def vstack(mats: Sequence[ExactMatrix]) -> ExactMatrix:
    ring = mats[0].ring
    re = np.vstack([m.re for m in mats])
    om = None if mats[0].om is None else np.vstack([m.om for m in mats])
    return ExactMatrix(ring, re, om)


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------


@dataclass
class AbelianDecomposition:
    """O/(a_1) + ... + O/(a_m) + O^rank with a_i | a_{i+1}, no a_i a unit."""

    ring: object
    divisors: list
    rank: int

    @property
    def divisor_norms(self) -> list[int]:
        return [self.ring.norm(a) for a in self.divisors]

    @property
    def torsion_order(self) -> int:
        """Product of the divisor norms, i.e. the size of the torsion subgroup."""
        out = 1
        for n in self.divisor_norms:
            out *= n
        return out

    def torsion_primes(self, factor_budget: float | None = None) -> list[int]:
        from .factoring import prime_factors

        primes: set[int] = set()
        for n in self.divisor_norms:
            primes.update(prime_factors(n, budget=factor_budget).primes)
        return sorted(primes)

    def count_divisible_by(self, pi) -> int:
        """Number of elementary divisors lying in the ideal (pi)."""
        return sum(1 for a in self.divisors if self.ring.divides(pi, a))

    def to_json(self):
        if isinstance(self.ring, IntegerRing):
            divs = [str(a) for a in self.divisors]
        else:
            divs = [QuadInt.from_pair(a, self.ring.d).to_json() for a in self.divisors]
        return {"divisor_norms": self.divisor_norms, "rank": self.rank, "divisors": divs}

    def __eq__(self, other):
        if not isinstance(other, AbelianDecomposition):
            return NotImplemented
        return self.rank == other.rank and self.divisor_norms == other.divisor_norms


@dataclass
class SNFResult:
    divisors: list          # all nonzero diagonal entries, canonical, divisibility chain
    rank: int
    U: ExactMatrix | None = None
    V: ExactMatrix | None = None

    def nontrivial(self, ring):
        return [a for a in self.divisors if not ring.is_unit(a)]


# ---------------------------------------------------------------------------
# Dense elimination
# ---------------------------------------------------------------------------


def _min_norm_entry(R, A, r0, c0, rows=None, cols=None):
    best = None
    rows = range(r0, len(A)) if rows is None else rows
    for i in rows:
        row = A[i]
        for j in (range(c0, len(row)) if cols is None else cols):
            x = row[j]
            if not R.is_zero(x):
                n = R.norm(x)
                if best is None or n < best[0]:
                    best = (n, i, j)
                    if n == 1:
                        return best
    return best


def _diagonalize(R, A, ncols, U=None, V=None):
    """Bring A to a diagonal form by unimodular row and column operations.

    Operates in place.  U (rows) and V (columns) are updated when given so
    that U_in @ A_in @ V_in equals the final A.  Returns the diagonal.
    """
    m = len(A)
    n = ncols
    diag = []
    t = 0
    mul, sub, divmod_, is_zero, norm = R.mul, R.sub, R.divmod, R.is_zero, R.norm
    while t < m and t < n:
        best = _min_norm_entry(R, A, t, t)
        if best is None:
            break
        _, i, j = best
        if i != t:
            A[t], A[i] = A[i], A[t]
            if U is not None:
                U[t], U[i] = U[i], U[t]
        if j != t:
            for row in A:
                row[t], row[j] = row[j], row[t]
            if V is not None:
                for row in V:
                    row[t], row[j] = row[j], row[t]
        while True:
            p = A[t][t]
            dirty = False
            rowt = A[t]
            for i in range(t + 1, m):
                x = A[i][t]
                if is_zero(x):
                    continue
                q, r = divmod_(x, p)
                if not is_zero(q):
                    rowi = A[i]
                    for k in range(t, n):
                        y = rowt[k]
                        if not is_zero(y):
                            rowi[k] = sub(rowi[k], mul(q, y))
                    if U is not None:
                        ui, ut = U[i], U[t]
                        for k in range(len(ut)):
                            y = ut[k]
                            if not is_zero(y):
                                ui[k] = sub(ui[k], mul(q, y))
                if not is_zero(r):
                    dirty = True
            for j in range(t + 1, n):
                x = rowt[j]
                if is_zero(x):
                    continue
                q, r = divmod_(x, p)
                if not is_zero(q):
                    for row in A:
                        y = row[t]
                        if not is_zero(y):
                            row[j] = sub(row[j], mul(q, y))
                    if V is not None:
                        for row in V:
                            y = row[t]
                            if not is_zero(y):
                                row[j] = sub(row[j], mul(q, y))
                if not is_zero(r):
                    dirty = True
            if not dirty:
                break
            # move the smallest entry of row/column t into the pivot
            best = None
            pn = norm(p)
            for i in range(t + 1, m):
                x = A[i][t]
                if not is_zero(x) and (best is None or norm(x) < best[0]):
                    best = (norm(x), i, None)
            for j in range(t + 1, n):
                x = rowt[j]
                if not is_zero(x) and (best is None or norm(x) < best[0]):
                    best = (norm(x), None, j)
            if best is None or best[0] >= pn:
                continue
            _, i, j = best
            if i is not None:
                A[t], A[i] = A[i], A[t]
                if U is not None:
                    U[t], U[i] = U[i], U[t]
            else:
                for row in A:
                    row[t], row[j] = row[j], row[t]
                if V is not None:
                    for row in V:
                        row[t], row[j] = row[j], row[t]
        diag.append(A[t][t])
        t += 1
    return diag


def _smith_chain(R, diag):
    """Turn a list of nonzero diagonal entries into a divisibility chain."""
    d = [R.canonical(x) for x in diag]
    r = len(d)
    for i in range(r):
        for j in range(i + 1, r):
            a, b = d[i], d[j]
            if R.divides(a, b):
                continue
            g = R.gcd(a, b)
            lcm = R.exact_div(R.mul(a, b), g)
            d[i], d[j] = g, R.canonical(lcm)
    return d


def _flint_snf_diag(rows, ncols):
    if not rows or ncols == 0:
        return []
    M = flint.fmpz_mat(len(rows), ncols, [x for r in rows for x in r])
    S = M.snf()
    out = []
    for i in range(min(S.nrows(), S.ncols())):
        v = int(S[i, i])
        if v:
            out.append(abs(v))
    return out


def _zz_snf_diag(A: ExactMatrix) -> list[int]:
    """Integer SNF diagonal: unit pivots removed sparsely, the core handed to FLINT."""
    rel = SparseRelations(A.ncols)
    for row in A.re:
        rel.add_row({j: int(v) for j, v in enumerate(row) if v})
    core, live = rel.eliminate_units()
    ones = A.ncols - len(live)
    used = sorted({c for r in core for c in r})
    pos = {c: k for k, c in enumerate(used)}
    dense = [[0] * len(used) for _ in core]
    for i, r in enumerate(core):
        for c, v in r.items():
            dense[i][pos[c]] = v
    return _smith_chain(ZZ, [1] * ones + _flint_snf_diag(dense, len(used)))


def snf(A: ExactMatrix, transforms: bool = False) -> SNFResult:
    """Smith normal form.

    Returns the nonzero diagonal entries as a divisibility chain of
    canonical associates.  With ``transforms=True`` also returns unimodular
    U, V with ``U @ A @ V`` diagonal (not necessarily in chain order).
    """
    R = A.ring
    m, n = A.shape
    if not transforms and isinstance(R, IntegerRing) and m * n > 400:
        diag = _zz_snf_diag(A)
        return SNFResult(diag, len(diag))
    rows = A.to_rows()
    U = ExactMatrix.identity(R, m).to_rows() if transforms else None
    V = ExactMatrix.identity(R, n).to_rows() if transforms else None
    diag = _diagonalize(R, rows, n, U, V)
    chain = _smith_chain(R, diag)
    res = SNFResult(chain, len(chain))
    if transforms:
        res.U = ExactMatrix.from_rows(R, U, m)
        res.V = ExactMatrix.from_rows(R, V, n)
    return res


def elementary_divisors(A: ExactMatrix) -> list:
    """The non-unit elementary divisors of the row lattice quotient."""
    res = snf(A)
    return res.nontrivial(A.ring)


def _echelon(R, A, ncols, U=None):
    """Row echelon form by unimodular row operations (in place).

    Returns the list of pivot columns; rows beyond ``len(pivots)`` are zero.
    """
    m = len(A)
    pivots = []
    r = 0
    sub, mul, divmod_, is_zero, norm = R.sub, R.mul, R.divmod, R.is_zero, R.norm
    for c in range(ncols):
        if r >= m:
            break
        while True:
            best = None
            for i in range(r, m):
                x = A[i][c]
                if not is_zero(x):
                    nx = norm(x)
                    if best is None or nx < best[0]:
                        best = (nx, i)
            if best is None:
                break
            i = best[1]
            if i != r:
                A[r], A[i] = A[i], A[r]
                if U is not None:
                    U[r], U[i] = U[i], U[r]
            p = A[r][c]
            done = True
            rowr = A[r]
            for i in range(r + 1, m):
                x = A[i][c]
                if is_zero(x):
                    continue
                q, rem = divmod_(x, p)
                rowi = A[i]
                for k in range(c, ncols):
                    y = rowr[k]
                    if not is_zero(y):
                        rowi[k] = sub(rowi[k], mul(q, y))
                if U is not None:
                    ui, ur = U[i], U[r]
                    for k in range(len(ur)):
                        y = ur[k]
                        if not is_zero(y):
                            ui[k] = sub(ui[k], mul(q, y))
                if not is_zero(rem):
                    done = False
            if done:
                break
        if best is None:
            # only possible on the first pass: column c is zero below row r
            continue
        pivots.append(c)
        r += 1
    return pivots


def kernel_basis(A: ExactMatrix) -> ExactMatrix:
    """Saturated basis (as rows) of the left kernel {x : x @ A = 0}."""
    R = A.ring
    m, n = A.shape
    rows = A.to_rows()
    U = ExactMatrix.identity(R, m).to_rows()
    piv = _echelon(R, rows, n, U)
    kern = U[len(piv):]
    return ExactMatrix.from_rows(R, kern, m) if kern else ExactMatrix.zeros(R, 0, m)


def rank(A: ExactMatrix) -> int:
    """Exact rank over the fraction field."""
    R = A.ring
    rows = A.to_rows()
    return len(_echelon(R, rows, A.ncols))


def quotient_decomposition(Z: ExactMatrix, B: ExactMatrix) -> AbelianDecomposition:
    """Decompose span(Z) / span(B) for row lattices with span(B) inside span(Z)."""
    R = Z.ring
    k = Z.nrows
    if B.nrows == 0 or B.is_zero():
        return AbelianDecomposition(R, [], rank(Z) if k else 0)
    if k == 0:
        raise ValueError("relations are not contained in the span of the basis")
    H = Z.to_rows()
    piv = _echelon(R, H, Z.ncols)
    H = H[: len(piv)]
    # solve Y @ H = B row by row using the echelon pivots
    Y = []
    for brow in B.to_rows():
        rem = list(brow)
        coeffs = []
        for r, c in enumerate(piv):
            x = rem[c]
            if R.is_zero(x):
                coeffs.append(R.zero)
                continue
            q, rr = R.divmod(x, H[r][c])
            if not R.is_zero(rr):
                raise ValueError("relation row is not an integral combination of the basis")
            coeffs.append(q)
            hr = H[r]
            for j in range(c, len(rem)):
                if not R.is_zero(hr[j]):
                    rem[j] = R.sub(rem[j], R.mul(q, hr[j]))
        if any(not R.is_zero(x) for x in rem):
            raise ValueError("relation row is not contained in the span of the basis")
        Y.append(coeffs)
    Ym = ExactMatrix.from_rows(R, Y, len(piv))
    res = snf(Ym)
    return AbelianDecomposition(R, res.nontrivial(R), len(piv) - res.rank)


def cokernel_decomposition(A: ExactMatrix) -> AbelianDecomposition:
    """Decompose R^ncols / rowspan(A)."""
    R = A.ring
    res = snf(A)
    return AbelianDecomposition(R, res.nontrivial(R), A.ncols - res.rank)


def determinantal_divisors(A: ExactMatrix, t: int):
    """gcd of all t x t minors (brute force; a test oracle for small matrices)."""
    from itertools import combinations

    R = A.ring
    rows = A.to_rows()
    m, n = A.shape
    g = R.zero
    for ri in combinations(range(m), t):
        for ci in combinations(range(n), t):
            sub = [[rows[i][j] for j in ci] for i in ri]
            det = _det_small(R, sub)
            if not R.is_zero(det):
                g = det if R.is_zero(g) else R.gcd(g, det)
    return R.canonical(g) if not R.is_zero(g) else g


def _det_small(R, M):
    n = len(M)
    if n == 1:
        return M[0][0]
    if n == 2:
        return R.sub(R.mul(M[0][0], M[1][1]), R.mul(M[0][1], M[1][0]))
    total = R.zero
    for j in range(n):
        x = M[0][j]
        if R.is_zero(x):
            continue
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = R.mul(x, _det_small(R, minor))
        total = R.add(total, term) if j % 2 == 0 else R.sub(total, term)
    return total


# ---------------------------------------------------------------------------
# Modular ranks
# ---------------------------------------------------------------------------


def _random_prime(rng, lo=2**29, hi=2**31):
    while True:
        p = rng.randrange(lo, hi) | 1
        if _is_prime(p):
            return p


def split_primes(d, count, seed=0):
    """Large rational primes splitting in O_d (any prime for Z), with a root of w."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        p = _random_prime(rng)
        if d is None:
            out.append((p, None))
            continue
        roots = omega_roots_mod(d, p)
        if roots and (quad_ring(d).disc % p):
            out.append((p, roots[0]))
    return out


def reduce_mod_prime(A: ExactMatrix, p: int, root: int | None) -> list[list[int]]:
    """Entrywise image under O_d -> F_p, w -> root."""
    if A.om is None:
        red = A.re % p
    else:
        red = (A.re + A.om * root) % p
    return [list(map(int, r)) for r in red]


def rank_mod_p(rows: list[list[int]], ncols: int, p: int) -> int:
    if not rows or ncols == 0:
        return 0
    M = flint.nmod_mat(len(rows), ncols, [x for r in rows for x in r], p)
    return M.rank()


def rank_modular(A: ExactMatrix, trials: int = 3, seed: int = 0) -> int:
    """Rank over the fraction field via reductions at large split primes.

    Each reduction can only lose rank.  When the trials disagree the exact
    rank is computed instead.
    """
    d = None if isinstance(A.ring, IntegerRing) else A.ring.d
    ranks = []
    for p, root in split_primes(d, trials, seed):
        ranks.append(rank_mod_p(reduce_mod_prime(A, p, root), A.ncols, p))
    if len(set(ranks)) == 1:
        return ranks[0]
    return rank(A)


# ---------------------------------------------------------------------------
# Sparse integer relation matrices
# ---------------------------------------------------------------------------


class SparseRelations:
    """Integer relations sum(coeff * x_col) = 0 stored as dict rows.

    `eliminate_units` removes unit pivots (Markowitz order), which preserves
    the cokernel Z^ncols / rowspan up to isomorphism.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.rows: list[dict[int, int]] = []

    def add_row(self, row: dict[int, int]):
        row = {c: v for c, v in row.items() if v}
        if row:
            self.rows.append(row)

    def eliminate_units(self):
        """Unit-pivot elimination; returns (core rows, live columns).

        Rows are taken shortest first; within a row the unit entry whose
        column is sparsest becomes the pivot (a cheap Markowitz variant).
        """
        rows = {i: dict(r) for i, r in enumerate(self.rows)}
        cols: dict[int, set[int]] = {}
        for i, r in rows.items():
            for c in r:
                cols.setdefault(c, set()).add(i)
        live_cols = set(range(self.ncols))
        heap = [(len(r), i) for i, r in rows.items() if any(v == 1 or v == -1 for v in r.values())]
        heapq.heapify(heap)
        while heap:
            ln, i = heapq.heappop(heap)
            r = rows.get(i)
            if r is None or len(r) != ln:
                continue
            best = None
            for k, v in r.items():
                if v == 1 or v == -1:
                    cnt = len(cols[k])
                    if best is None or cnt < best[0]:
                        best = (cnt, k)
            if best is None:
                continue
            c = best[1]
            # pivot on (i, c): x_c = -v * sum_{k != c} r[k] x_k
            v = r[c]
            del rows[i]
            for k in r:
                cols[k].discard(i)
            live_cols.discard(c)
            for j in list(cols[c]):
                rj = rows[j]
                f = rj[c] * v  # rj -= f * r  removes column c
                for k, rv in r.items():
                    nv = rj.get(k, 0) - f * rv
                    if nv:
                        if k not in rj:
                            cols[k].add(j)
                        rj[k] = nv
                    elif k in rj:
                        del rj[k]
                        cols[k].discard(j)
                if not rj:
                    del rows[j]
                else:
                    heapq.heappush(heap, (len(rj), j))
            del cols[c]
        return list(rows.values()), sorted(live_cols)

    def cokernel(self) -> AbelianDecomposition:
        """Z^ncols / rowspan as an AbelianDecomposition over Z."""
        core, live = self.eliminate_units()
        index = {c: k for k, c in enumerate(live)}
        used = sorted({c for r in core for c in r})
        dense = [[0] * len(used) for _ in core]
        pos = {c: k for k, c in enumerate(used)}
        for i, r in enumerate(core):
            for c, v in r.items():
                dense[i][pos[c]] = v
        divs = _flint_snf_diag(dense, len(used)) if dense else []
        free = len(live) - len(divs)
        return AbelianDecomposition(ZZ, [x for x in divs if x != 1], free)

    def rank_mod(self, p: int) -> int:
        """Rank of the relation matrix modulo p (sparse elimination)."""
        rows = [dict((c, v % p) for c, v in r.items() if v % p) for r in self.rows]
        rows = [r for r in rows if r]
        pivots: dict[int, dict[int, int]] = {}
        rank_ = 0
        rows.sort(key=len)
        for r in rows:
            r = dict(r)
            while r:
                c = min(r)
                prow = pivots.get(c)
                if prow is None:
                    inv = pow(r[c], -1, p)
                    for k in r:
                        r[k] = r[k] * inv % p
                    pivots[c] = r
                    rank_ += 1
                    break
                f = r[c]
                for k, v in prow.items():
                    nv = (r.get(k, 0) - f * v) % p
                    if nv:
                        r[k] = nv
                    else:
                        r.pop(k, None)
        return rank_

    def rank(self, trials: int = 2, seed: int = 1) -> int:
        """Rank over Q by elimination of unit pivots then modular ranks of the core."""
        core, live = self.eliminate_units()
        eliminated = self.ncols - len(live)
        if not core:
            return eliminated
        used = sorted({c for r in core for c in r})
        pos = {c: k for k, c in enumerate(used)}
        ranks = []
        for p, _ in split_primes(None, trials, seed):
            dense = [[0] * len(used) for _ in core]
            for i, r in enumerate(core):
                for c, v in r.items():
                    dense[i][pos[c]] = v % p
            ranks.append(rank_mod_p(dense, len(used), p))
        if len(set(ranks)) != 1:
            M = flint.fmpz_mat(len(core), len(used), [0] * (len(core) * len(used)))
            for i, r in enumerate(core):
                for c, v in r.items():
                    M[i, pos[c]] = v
            return eliminated + M.rank()
        return eliminated + ranks[0]

    def to_matrix(self) -> ExactMatrix:
        out = ExactMatrix.zeros(ZZ, len(self.rows), self.ncols)
        for i, r in enumerate(self.rows):
            for c, v in r.items():
                out.re[i, c] = v
        return out
