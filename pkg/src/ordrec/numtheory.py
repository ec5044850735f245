"""Exact integer arithmetic for order-finding post-processing.

Everything here runs on Python's arbitrary-precision integers; no floats
are involved at any point, so results are exact for any instance size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import NamedTuple


class Convergent(NamedTuple):
    """One continued-fraction convergent h/k of y/Q, always in lowest terms."""

    numerator: int
    denominator: int


def mod_pow(base: int, exp: int, modulus: int) -> int:
    """base**exp mod modulus, exact for arbitrary integer sizes."""
    if modulus < 2:
        raise ValueError(f"modulus must be >= 2, got {modulus}")
    if exp < 0:
        raise ValueError(f"exponent must be non-negative, got {exp}")
    return pow(base, exp, modulus)


def multiplicative_order(a: int, N: int) -> int:
    """Smallest r >= 1 with a**r == 1 (mod N).

    Requires gcd(a, N) == 1; by Lagrange the order exists and divides
    the size of the unit group, so the scan below always terminates
    within N - 1 steps.
    """
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    if math.gcd(a, N) != 1:
        raise ValueError(f"gcd({a}, {N}) != 1: multiplicative order undefined")
    x = a % N
    r = 1
    while x != 1:
        x = x * a % N
        r += 1
    return r


def convergents(y: int, Q: int) -> list[Convergent]:
    """All continued-fraction convergents of y/Q, from 0/1 up to y/Q itself.

    Uses the standard p_k = a_k p_{k-1} + p_{k-2} recurrence on the
    Euclidean quotients of y/Q.  Since 0 <= y < Q the first quotient is 0,
    so the sequence always starts at 0/1; the final entry is y/Q in lowest
    terms.  y == 0 yields the single convergent 0/1.
    """
    if Q < 1:
        raise ValueError(f"Q must be positive, got {Q}")
    if not 0 <= y < Q:
        raise ValueError(f"y must lie in [0, {Q}), got {y}")
    out: list[Convergent] = []
    p_prev, p_cur = 0, 1  # h_{-2}, h_{-1}
    q_prev, q_cur = 1, 0  # k_{-2}, k_{-1}
    num, den = y, Q
    while True:
        a, rem = divmod(num, den)
        p_cur, p_prev = a * p_cur + p_prev, p_cur
        q_cur, q_prev = a * q_cur + q_prev, q_cur
        out.append(Convergent(p_cur, q_cur))
        if rem == 0:
            return out
        num, den = den, rem


def denominator_candidate(y: int, Q: int, N: int) -> int:
    """Candidate order r0(y): denominator of the deepest convergent of y/Q
    with denominator <= N.

    Always defined because the initial convergent 0/1 qualifies; y == 0
    therefore maps to 1.
    """
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    best = 1
    for conv in convergents(y, Q):
        if conv.denominator <= N:
            best = conv.denominator
        else:
            break
    return best


@dataclass(frozen=True)
class Instance:
    """An order-finding problem: modulus N, base a, precision-register size t.

    The base is stored reduced mod N.  Q = 2**t and the true order r are
    derived; r is computed lazily and cached.
    """

    N: int
    a: int
    t: int

    def __post_init__(self) -> None:
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")
        if self.t < 1:
            raise ValueError(f"t must be >= 1, got {self.t}")
        if math.gcd(self.a, self.N) != 1:
            raise ValueError(f"gcd(a={self.a}, N={self.N}) != 1: base is not a unit")
        object.__setattr__(self, "a", self.a % self.N)

    @property
    def Q(self) -> int:
        return 1 << self.t

    @cached_property
    def r(self) -> int:
        return multiplicative_order(self.a, self.N)


@lru_cache(maxsize=None)
def candidate_table(Q: int, N: int) -> tuple[int, ...]:
    """r0(y) for every outcome y in [0, Q), precomputed once per (Q, N)."""
    return tuple(denominator_candidate(y, Q, N) for y in range(Q))
