"""Precision-register distribution synthesis.

Builds the ideal order-finding comb in closed form, broadens it with
cyclic kernels, mixes in competing comb families and a uniform floor,
and draws finite-shot empirical histograms deterministically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .numtheory import Instance, multiplicative_order

_NORM_TOL = 1e-9

KERNEL_FAMILIES = ("gaussian", "box")


@dataclass(frozen=True, eq=False)
class Spectrum:
    """A probability distribution over the Q = 2**t register outcomes."""

    t: int
    probs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.probs, dtype=np.float64).copy()
        if arr.shape != (1 << self.t,):
            raise ValueError(f"expected {1 << self.t} entries for t={self.t}, got {arr.shape}")
        if (arr < 0).any():
            raise ValueError("spectrum entries must be non-negative")
        if abs(arr.sum() - 1.0) > _NORM_TOL:
            raise ValueError(f"spectrum entries sum to {arr.sum()!r}, not 1")
        arr.flags.writeable = False
        object.__setattr__(self, "probs", arr)

    @property
    def Q(self) -> int:
        return 1 << self.t


@dataclass(frozen=True, eq=False)
class Kernel:
    """Cyclic broadening kernel: Q non-negative weights summing to 1."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.weights, dtype=np.float64).copy()
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("kernel weights must be a non-empty 1-D vector")
        if (arr < 0).any():
            raise ValueError("kernel weights must be non-negative")
        if abs(arr.sum() - 1.0) > _NORM_TOL:
            raise ValueError(f"kernel weights sum to {arr.sum()!r}, not 1")
        arr.flags.writeable = False
        object.__setattr__(self, "weights", arr)


class Sector(NamedTuple):
    """A competing comb family: shift index h, mixture weight nu, kernel width."""

    h: int
    nu: float
    sigma: float


@dataclass(frozen=True)
class NoiseConfig:
    """Parameters of the two-stage noise model plus the uniform-floor extension.

    epsilon is the total weight leaked from the intended comb into the
    competing sector families; lambda_uniform is an explicit depolarizing
    admixture beyond the two-stage model (default 0).  shots=None means an
    exact (infinite-shot) distribution.
    """

    epsilon: float = 0.0
    sectors: tuple[Sector, ...] = ()
    sigma0: float = 0.0
    lambda_uniform: float = 0.0
    shots: int | None = None
    seed: int = 0
    kernel: str = "gaussian"

    def __post_init__(self) -> None:
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if not 0.0 <= self.lambda_uniform <= 1.0:
            raise ValueError(f"lambda_uniform must lie in [0, 1], got {self.lambda_uniform}")
        if self.sigma0 < 0:
            raise ValueError(f"sigma0 must be non-negative, got {self.sigma0}")
        if self.kernel not in KERNEL_FAMILIES:
            raise ValueError(f"unknown kernel family {self.kernel!r}; choose from {KERNEL_FAMILIES}")
        if self.shots is not None and self.shots < 1:
            raise ValueError(f"shots must be positive, got {self.shots}")
        object.__setattr__(self, "sectors", tuple(Sector(*s) for s in self.sectors))
        if self.epsilon > 0:
            if not self.sectors:
                raise ValueError("epsilon > 0 requires at least one sector")
            total = math.fsum(s.nu for s in self.sectors)
            if abs(total - 1.0) > _NORM_TOL:
                raise ValueError(f"sector weights sum to {total!r}, must sum to 1")


@lru_cache(maxsize=None)
def _ideal_probs(N: int, a: int, t: int) -> np.ndarray:
    """Closed-form phase-estimation output for ord_N(a), as a read-only array.

    p(y) = (1/r) sum_s |(1/Q) sum_j exp(2*pi*i*j*(s/r - y/Q))|^2.  The inner
    geometric sum is the Dirichlet kernel sin^2(pi*Q*theta) / (Q*sin(pi*theta))^2
    with theta = s/r - y/Q = (sQ - yr)/(rQ).  Integer theta (exact resonance)
    contributes 1; integer Q*theta with non-integer theta contributes exactly 0.
    Both cases are detected with integer arithmetic so combs with r | Q come
    out exact.
    """
    Q = 1 << t
    r = multiplicative_order(a, N)
    y = np.arange(Q, dtype=np.int64)
    den = r * Q
    p = np.zeros(Q)
    for s in range(r):
        num = s * Q - y * r
        resonant = num % den == 0
        null = (num % r == 0) & ~resonant
        rest = ~resonant & ~null
        contrib = np.zeros(Q)
        contrib[resonant] = 1.0
        theta = num[rest] / den
        contrib[rest] = (np.sin(np.pi * Q * theta) / (Q * np.sin(np.pi * theta))) ** 2
        p += contrib
    p /= r
    p.flags.writeable = False
    return p


def ideal_spectrum(instance: Instance) -> Spectrum:
    """Noiseless order-finding comb for the given instance."""
    return Spectrum(instance.t, _ideal_probs(instance.N, instance.a, instance.t))


def sector_spectrum(N: int, h: int, t: int) -> Spectrum:
    """Comb family of the shift-h sector: the ideal spectrum of base 2**h mod N.

    2**h == 1 (mod N) is allowed and gives the degenerate point mass at y=0.
    """
    base = pow(2, h, N)
    return ideal_spectrum(Instance(N, base, t))


def gaussian_kernel(Q: int, sigma: float) -> Kernel:
    """Wrapped discrete Gaussian of width sigma on Z_Q (images |m| <= 3)."""
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    if sigma == 0:
        w = np.zeros(Q)
        w[0] = 1.0
        return Kernel(w)
    ell = np.arange(Q, dtype=np.float64)
    w = np.zeros(Q)
    for m in range(-3, 4):
        w += np.exp(-((ell + m * Q) ** 2) / (2.0 * sigma * sigma))
    return Kernel(w / w.sum())


def box_kernel(Q: int, sigma: float) -> Kernel:
    """Uniform kernel over cyclic offsets within round(sigma) of 0."""
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    half = min(int(round(sigma)), Q // 2)
    w = np.zeros(Q)
    for off in range(-half, half + 1):
        w[off % Q] += 1.0
    return Kernel(w / w.sum())


def make_kernel(Q: int, sigma: float, family: str = "gaussian") -> Kernel:
    if family == "gaussian":
        return gaussian_kernel(Q, sigma)
    if family == "box":
        return box_kernel(Q, sigma)
    raise ValueError(f"unknown kernel family {family!r}; choose from {KERNEL_FAMILIES}")


@lru_cache(maxsize=None)
def _gather_index(Q: int) -> np.ndarray:
    # idx[y, l] = (y - l) mod Q, shared by every convolution at this size
    y = np.arange(Q)
    idx = (y[:, None] - y[None, :]) % Q
    idx.flags.writeable = False
    return idx


def broaden(spec: Spectrum, kernel: Kernel) -> Spectrum:
    """Circular convolution (p * K)(y) = sum_l p(y - l mod Q) K(l)."""
    Q = spec.Q
    if kernel.weights.shape != (Q,):
        raise ValueError(f"kernel length {kernel.weights.shape[0]} != spectrum length {Q}")
    out = spec.probs[_gather_index(Q)] @ kernel.weights
    return Spectrum(spec.t, out)


@lru_cache(maxsize=None)
def _broadened_comb(N: int, base: int, t: int, sigma: float, family: str) -> np.ndarray:
    """Cached (ideal comb of `base` mod N) * kernel, as a read-only array."""
    probs = _ideal_probs(N, base, t)
    if sigma == 0:
        return probs
    spec = broaden(Spectrum(t, probs), make_kernel(1 << t, sigma, family))
    out = spec.probs.copy()
    out.flags.writeable = False
    return out


def intended_shift(a: int, N: int) -> int:
    """Smallest s >= 0 with 2**s == a (mod N); the intended sector index."""
    if math.gcd(2, N) != 1:
        raise ValueError(f"N must be odd for the powers-of-two family, got {N}")
    a %= N
    x, s = 1, 0
    n = multiplicative_order(2, N)
    while s < n:
        if x == a:
            return s
        x = 2 * x % N
        s += 1
    raise ValueError(f"a={a} is not a power of 2 modulo {N}")


# Default width multiplier for competing-sector kernels relative to the
# intended comb's width.  Competing families are populated by error events,
# so their executions carry at least as much late-stage deformation as the
# intended path; the factor keeps leaked mass visibly more diffuse.
SECTOR_WIDTH_FACTOR = 2.0


def default_sectors(N: int, a: int, sigma0: float) -> tuple[Sector, ...]:
    """Competing sector set for the powers-of-two family.

    All shifts h in {0, ..., n-1} except the intended one, where
    n = ord_N(2); weights uniform, kernel widths SECTOR_WIDTH_FACTOR
    times the intended width sigma0.
    """
    s = intended_shift(a, N)
    n = multiplicative_order(2, N)
    others = [h for h in range(n) if h != s]
    if not others:
        return ()
    nu = 1.0 / len(others)
    return tuple(Sector(h, nu, SECTOR_WIDTH_FACTOR * sigma0) for h in others)


def noisy_mixture(instance: Instance, cfg: NoiseConfig) -> Spectrum:
    """Two-stage noise model plus uniform floor.

    p = (1-lambda) * [ (1-eps) (p_s * K_sigma0) + eps * sum_h nu_h (p_h * K_sigma_h) ]
        + lambda * u
    where p_s is the instance's ideal comb and p_h the competing sector combs.
    """
    Q = instance.Q
    for sec in cfg.sectors:
        if pow(2, sec.h, instance.N) == instance.a:
            raise ValueError(f"sector h={sec.h} coincides with the intended comb of a={instance.a}")
    lam = cfg.lambda_uniform
    p = np.zeros(Q)
    if lam < 1.0:
        comb = np.zeros(Q)
        if cfg.epsilon < 1.0:
            comb += (1.0 - cfg.epsilon) * _broadened_comb(
                instance.N, instance.a, instance.t, cfg.sigma0, cfg.kernel
            )
        if cfg.epsilon > 0.0:
            for sec in cfg.sectors:
                base = pow(2, sec.h, instance.N)
                comb += cfg.epsilon * sec.nu * _broadened_comb(
                    instance.N, base, instance.t, sec.sigma, cfg.kernel
                )
        p += (1.0 - lam) * comb
    if lam > 0.0:
        p += lam / Q
    return Spectrum(instance.t, p)


def sample_counts(spec: Spectrum, shots: int, seed: int) -> np.ndarray:
    """Multinomial outcome counts; bitwise reproducible for a fixed seed.

    The generator is numpy's PCG64 seeded directly with `seed`; a single
    multinomial draw produces all counts.
    """
    if shots < 1:
        raise ValueError(f"shots must be positive, got {shots}")
    rng = np.random.Generator(np.random.PCG64(seed))
    pvals = spec.probs / spec.probs.sum()
    return rng.multinomial(shots, pvals)


def sample_shots(spec: Spectrum, shots: int, seed: int) -> Spectrum:
    """Empirical distribution counts/shots from a seeded multinomial draw."""
    counts = sample_counts(spec, shots, seed)
    return Spectrum(spec.t, counts / shots)


# --- serialization -----------------------------------------------------------

def spectrum_to_dict(spec: Spectrum) -> dict:
    return {"t": spec.t, "probs": [float(x) for x in spec.probs]}


def counts_to_dict(t: int, shots: int, counts: Sequence[int]) -> dict:
    return {"t": t, "shots": int(shots), "counts": [int(c) for c in counts]}


def spectrum_from_dict(obj: dict) -> Spectrum:
    """Accepts both the probability form {t, probs} and the counts form
    {t, shots, counts}."""
    if "t" not in obj:
        raise ValueError("spectrum object missing field 't'")
    t = int(obj["t"])
    if "probs" in obj:
        return Spectrum(t, np.asarray(obj["probs"], dtype=np.float64))
    if "counts" in obj:
        counts = np.asarray(obj["counts"], dtype=np.float64)
        total = counts.sum()
        if total <= 0:
            raise ValueError("counts must not sum to zero")
        return Spectrum(t, counts / total)
    raise ValueError("spectrum object needs either 'probs' or 'counts'")
