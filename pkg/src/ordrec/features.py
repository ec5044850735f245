"""The four recoverability features of a precision-register distribution.

Two distribution-level descriptors (autocorrelation peak strength and
normalized entropy) and two decoder-aware fractions (dominant verified
mass fraction and verified margin fraction).  None of them use the true
order; they are computable on any measured histogram.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decoder import DecodeResult, decode
from .numtheory import Instance
from .spectrum import Spectrum

# Canonical feature order used by every table, report and model in the package.
FEATURE_NAMES = ("a_peak", "h_norm", "m1_frac", "margin_frac")


@dataclass(frozen=True)
class FeatureVector:
    a_peak: float
    h_norm: float
    m1_frac: float
    margin_frac: float

    def as_array(self) -> np.ndarray:
        return np.array([self.a_peak, self.h_norm, self.m1_frac, self.margin_frac])

    def to_dict(self) -> dict:
        return {
            "a_peak": self.a_peak,
            "h_norm": self.h_norm,
            "m1_frac": self.m1_frac,
            "margin_frac": self.margin_frac,
        }

    @staticmethod
    def from_dict(obj: dict) -> "FeatureVector":
        return FeatureVector(*(float(obj[name]) for name in FEATURE_NAMES))


def autocorr_peak(spec: Spectrum) -> float:
    """Largest off-zero circular autocorrelation of the uniform residual.

    q(y) = p(y) - 1/Q, A(l) = sum_y q(y) q(y+l mod Q); returns
    max_{l != 0} A(l)/A(0).  A uniform input has A(0) = 0 and returns 0
    by convention.  Computed via the FFT power spectrum (exact circular
    wraparound, indices mod Q).
    """
    Q = spec.Q
    q = spec.probs - 1.0 / Q
    acorr = np.fft.irfft(np.abs(np.fft.rfft(q)) ** 2, n=Q)
    a0 = acorr[0]
    if a0 < 1e-15:
        return 0.0
    return float(acorr[1:].max() / a0)


def normalized_entropy(spec: Spectrum) -> float:
    """Shannon entropy of p over log Q, in [0, 1]; 0*log(0) counts as 0."""
    p = spec.probs[spec.probs > 0]
    h = -float(np.dot(p, np.log(p)))
    return h / math.log(spec.Q)


def verified_fractions(result: DecodeResult) -> tuple[float, float]:
    """(M1/M_ver, (M1-M2)/M_ver); both 0 when no mass verified."""
    if not result.mass_map.entries or result.M_ver == 0.0:
        return 0.0, 0.0
    return result.M1 / result.M_ver, (result.M1 - result.M2) / result.M_ver


def feature_vector(spec: Spectrum, instance: Instance) -> FeatureVector:
    """All four features; runs the decoder internally, never the true order."""
    result = decode(spec, instance)
    m1_frac, margin_frac = verified_fractions(result)
    return FeatureVector(
        a_peak=autocorr_peak(spec),
        h_norm=normalized_entropy(spec),
        m1_frac=m1_frac,
        margin_frac=margin_frac,
    )
