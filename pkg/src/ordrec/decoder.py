"""Continued-fraction + modular-verification decoding of a spectrum.

Maps every positive-probability outcome to its candidate denominator,
keeps only candidates that pass the modular check a**r0 == 1 (mod N),
aggregates probability mass per surviving denominator, and declares the
largest-mass denominator the decoded order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .numtheory import Instance, candidate_table, convergents, mod_pow
from .spectrum import Spectrum

# Masses closer than this are treated as tied before the smallest-denominator
# rule applies; shot-sampled masses are exact multiples of 1/shots, so exact
# ties do occur in practice.
MASS_TIE_TOL = 1e-12

CANDIDATE_MODES = ("highest", "smallest_verified")


@dataclass(frozen=True)
class MassMap:
    """Verified candidate-denominator masses m(r0) and their total M_ver."""

    entries: dict[int, float]

    @property
    def total_verified(self) -> float:
        return sum(self.entries.values())


@dataclass(frozen=True)
class DecodeResult:
    r_calc: int | None
    M_ver: float
    M1: float
    M2: float
    mass_map: MassMap

    def to_dict(self) -> dict:
        return {
            "r_calc": self.r_calc,
            "M_ver": self.M_ver,
            "M1": self.M1,
            "M2": self.M2,
            "masses": {str(r0): m for r0, m in sorted(self.mass_map.entries.items())},
        }

    @staticmethod
    def from_dict(obj: dict) -> "DecodeResult":
        return DecodeResult(
            r_calc=obj["r_calc"],
            M_ver=float(obj["M_ver"]),
            M1=float(obj["M1"]),
            M2=float(obj["M2"]),
            mass_map=MassMap({int(k): float(v) for k, v in obj["masses"].items()}),
        )


@lru_cache(maxsize=None)
def _verified_candidates(Q: int, N: int, a: int, mode: str) -> tuple[int, ...]:
    """Per-outcome verified denominator, 0 where no candidate verifies.

    mode "highest": the single candidate r0(y) (deepest convergent with
    denominator <= N), kept iff it verifies.  mode "smallest_verified":
    the smallest convergent denominator <= N that verifies, if any.
    """
    if mode == "highest":
        verified = {r0: mod_pow(a, r0, N) == 1 for r0 in set(candidate_table(Q, N))}
        return tuple(r0 if verified[r0] else 0 for r0 in candidate_table(Q, N))
    if mode == "smallest_verified":
        out = []
        for y in range(Q):
            hit = 0
            for conv in convergents(y, Q):
                if conv.denominator > N:
                    break
                if mod_pow(a, conv.denominator, N) == 1:
                    hit = conv.denominator
                    break
            out.append(hit)
        return tuple(out)
    raise ValueError(f"unknown candidate mode {mode!r}; choose from {CANDIDATE_MODES}")


def verified_masses(spec: Spectrum, instance: Instance, mode: str = "highest") -> MassMap:
    """Aggregate p(y) over outcomes per verified candidate denominator.

    Outcomes with p(y) = 0 contribute nothing and are skipped; masses are
    accumulated in increasing-y order.
    """
    if spec.Q != instance.Q:
        raise ValueError(f"spectrum length {spec.Q} != instance Q {instance.Q}")
    table = _verified_candidates(spec.Q, instance.N, instance.a, mode)
    entries: dict[int, float] = {}
    support = np.flatnonzero(spec.probs)
    masses = spec.probs[support].tolist()
    for y, p in zip(support.tolist(), masses):
        r0 = table[y]
        if r0:
            entries[r0] = entries.get(r0, 0.0) + p
    return MassMap(entries)


def decode(spec: Spectrum, instance: Instance, mode: str = "highest") -> DecodeResult:
    """Pick the verified denominator with the largest aggregated mass.

    Ties within MASS_TIE_TOL go to the smallest denominator.  An empty mass
    map (M_ver = 0) leaves r_calc absent.
    """
    mass_map = verified_masses(spec, instance, mode)
    entries = mass_map.entries
    if not entries:
        return DecodeResult(None, 0.0, 0.0, 0.0, mass_map)
    values = sorted(entries.values(), reverse=True)
    m1 = values[0]
    m2 = values[1] if len(values) > 1 else 0.0
    r_calc = min(r0 for r0, m in entries.items() if m >= m1 - MASS_TIE_TOL)
    return DecodeResult(r_calc, mass_map.total_verified, m1, m2, mass_map)


def is_recoverable(result: DecodeResult, r_true: int) -> bool:
    """True iff a decoded order exists and equals the true order."""
    return result.r_calc is not None and result.r_calc == r_true
