"""Integer factorization with a wall-clock budget.

Small cofactors are factored in process.  Cofactors above ~40 digits go to a
worker process that is killed when the budget runs out; whatever is left is
reported as an unfactored composite.
"""
from __future__ import annotations

import multiprocessing as mp
from dataclasses import dataclass, field

import flint

from .ring import _is_prime

_IN_PROCESS_DIGITS = 40
DEFAULT_BUDGET = 30.0


@dataclass
class Factorization:
    n: int
    primes: list[int] = field(default_factory=list)
    unfactored: list[int] = field(default_factory=list)   # composite cofactors

    @property
    def complete(self):
        return not self.unfactored

    def to_json(self):
        return {
            "primes": self.primes,
            "unfactored": [{"digits": len(str(c)), "value": str(c)} for c in self.unfactored],
        }


def _flint_factor(n: int) -> list[int]:
    return [int(p) for p, _ in flint.fmpz(n).factor()]


def _worker(n, q):
    q.put(_flint_factor(n))


def _factor_with_timeout(n: int, budget: float) -> list[int] | None:
    ctx = mp.get_context("fork")
    q = ctx.Queue()
    proc = ctx.Process(target=_worker, args=(n, q), daemon=True)
    proc.start()
    proc.join(budget)
    if proc.is_alive():
        proc.terminate()
        proc.join()
        return None
    return q.get() if not q.empty() else None


def prime_factors(n: int, budget: float | None = None) -> Factorization:
    """Distinct prime factors of |n|, giving up on large cofactors after `budget` seconds."""
    n = abs(int(n))
    out = Factorization(n)
    if n < 2:
        return out
    primes: set[int] = set()
    m = n
    p = 2
    while p < 10000 and p * p <= m:
        if m % p == 0:
            primes.add(p)
            while m % p == 0:
                m //= p
        p += 1 if p == 2 else 2
    if m > 1:
        if _is_prime(m):
            primes.add(m)
        elif len(str(m)) <= _IN_PROCESS_DIGITS:
            primes.update(_flint_factor(m))
        else:
            found = _factor_with_timeout(m, DEFAULT_BUDGET if budget is None else budget)
            if found is None:
                out.unfactored.append(m)
            else:
                primes.update(found)
    out.primes = sorted(primes)
    return out
