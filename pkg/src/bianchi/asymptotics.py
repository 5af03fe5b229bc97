"""Volumes, torsion growth and the rank-counting statistics.

The covolume of PSL_2(O_d) is |D|^(3/2) zeta_K(2) / (4 pi^2) with
zeta_K(2) = zeta(2) L(2, chi_D).  L(2, chi_D) is a finite combination of
Hurwitz zeta values, evaluated with mpmath.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import mpmath

from .congruence import AbelianizationReport, LevelIdeal, cuspidal_rank_from, degree_one_primes

DISCRIMINANTS = {1: -4, 2: -8, 3: -3, 7: -7, 11: -11}


def kronecker(D: int, n: int) -> int:
    """Kronecker symbol (D / n) for n >= 1."""
    if n == 1:
        return 1
    out = 1
    while n % 2 == 0:
        n //= 2
        if D % 2 == 0:
            return 0
        if D % 8 in (3, 5):
            out = -out
    if n == 1:
        return out
    # Jacobi symbol (D / n), n odd
    a = D % n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                out = -out
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            out = -out
        a %= n
    return out if n == 1 else 0


def dirichlet_L2(D: int, dps: int = 40):
    """L(2, chi_D) = |D|^-2 sum_a chi_D(a) zeta(2, a/|D|)."""
    m = abs(D)
    with mpmath.workdps(dps):
        s = mpmath.mpf(0)
        for a in range(1, m):
            c = kronecker(D, a)
            if c:
                s += c * mpmath.zeta(2, mpmath.mpf(a) / m)
        return +(s / m ** 2)


@dataclass
class VolumeConstant:
    d: int
    value: object          # mpmath.mpf
    dps: int
    error_bound: object    # mpmath.mpf

    def __float__(self):
        return float(self.value)

    def digits(self, n: int = 30) -> str:
        return mpmath.nstr(self.value, n)


def zeta_K2(d: int, dps: int = 40):
    """zeta_K(2) for K = Q(sqrt(-d))."""
    D = DISCRIMINANTS[d]
    with mpmath.workdps(dps):
        return +(mpmath.zeta(2) * dirichlet_L2(D, dps))


def volume_constant(d: int, dps: int = 40) -> VolumeConstant:
    """Covolume V_d of PSL_2(O_d) in hyperbolic 3-space."""
    if d not in DISCRIMINANTS:
        raise ValueError(f"d = {d} is not one of the Euclidean cases")
    D = abs(DISCRIMINANTS[d])
    with mpmath.workdps(dps + 10):
        v = mpmath.mpf(D) ** mpmath.mpf(1.5) * zeta_K2(d, dps + 10) / (4 * mpmath.pi ** 2)
    with mpmath.workdps(dps):
        # evaluation runs 10 guard digits above the reported precision
        return VolumeConstant(d, +v, dps, mpmath.mpf(10) ** (-dps + 2))


def bv_constant(dps: int = 30):
    """1/(6 pi), the predicted limit of log-torsion over volume."""
    with mpmath.workdps(dps):
        return 1 / (6 * mpmath.pi)


# ---------------------------------------------------------------------------
# Torsion growth
# ---------------------------------------------------------------------------


def log_int(n: int) -> float:
    """Natural log of a positive integer of any size (math.log scales big ints exactly)."""
    if n <= 0:
        raise ValueError("log of a non-positive integer")
    return math.log(n)


@dataclass
class TorsionStat:
    d: int
    norm: int
    T: float
    V: float

    @property
    def ratio(self):
        return self.T / self.V

    def to_json(self):
        return {"d": self.d, "norm": self.norm, "T": self.T, "V": self.V, "ratio": self.ratio}


def torsion_stat(d: int, norm: int, divisors: Iterable[int], V: VolumeConstant | None = None) -> TorsionStat:
    V = V or volume_constant(d)
    T = sum(log_int(x) for x in divisors)
    return TorsionStat(d, norm, T, (norm + 1) * float(V))


def bv_ratio(report: AbelianizationReport, V: VolumeConstant | None = None) -> TorsionStat:
    """T/V for a prime level of residue degree one."""
    lv = report.level
    if not lv.is_prime:
        raise ValueError("bv_ratio needs a prime level")
    return torsion_stat(lv.d, lv.norm, report.divisors, V)


# ---------------------------------------------------------------------------
# Rank statistics over sweeps
# ---------------------------------------------------------------------------


class IncompleteSweep(ValueError):
    def __init__(self, missing):
        self.missing = missing
        super().__init__(f"{len(missing)} qualifying levels missing, first: {missing[:3]}")


def _qualifying(d: int, x: int, strict: bool) -> list[LevelIdeal]:
    # one ideal per conjugate pair: conjugate levels give isomorphic groups
    top = x - 1 if strict else x
    return degree_one_primes(d, 2, top, conjugates=False) if top >= 2 else []


def _cusp_ranks(d: int, ranks: Mapping[str, int], levels: list[LevelIdeal]) -> list[int]:
    missing = [lv.key() for lv in levels if lv.key() not in ranks]
    if missing:
        raise IncompleteSweep(missing)
    return [cuspidal_rank_from(d, ranks[lv.key()]) for lv in levels]


@dataclass
class Histogram:
    d: int
    x: int
    counts: dict[int, int]

    @property
    def total(self):
        return sum(self.counts.values())

    def percentages(self) -> dict[int, float]:
        t = self.total
        return {r: 100.0 * c / t for r, c in self.counts.items()} if t else {}

    def to_rows(self):
        pct = self.percentages()
        return [(r, self.counts[r], round(pct[r], 1)) for r in sorted(self.counts)]


def nr_histogram(d: int, ranks: Mapping[str, int], x: int) -> Histogram:
    """N_r(x): residue-degree-one primes of norm < x counted by cuspidal rank.

    `ranks` maps level keys to abelianization ranks.  Primes are counted up
    to complex conjugation.  Raises IncompleteSweep naming the missing levels.
    """
    levels = _qualifying(d, x, strict=True)
    counts: dict[int, int] = {}
    for r in _cusp_ranks(d, ranks, levels):
        counts[r] = counts.get(r, 0) + 1
    return Histogram(d, x, counts)


def r_of_x(x: float) -> float:
    return x ** (5 / 6) / math.log(x)


def lx_rx_table(d: int, ranks: Mapping[str, int], checkpoints: Iterable[int]) -> list[tuple[int, int, float | None]]:
    """Rows (x, L_d(x), R(x)/L_d(x)); the ratio is None while L_d(x) = 0."""
    out = []
    for x in sorted(checkpoints):
        L = sum(_cusp_ranks(d, ranks, _qualifying(d, x, strict=False)))
        out.append((x, L, r_of_x(x) / L if L else None))
    return out


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()
