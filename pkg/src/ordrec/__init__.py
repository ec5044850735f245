"""ordrec: recoverability analysis for noisy quantum order finding.

Synthesizes ideal and noise-distorted precision-register distributions,
decodes them with continued-fraction + modular-verification post-processing,
extracts recoverability features, and runs an interpretable classification
stack (AUROC, decision trees, random forests, permutation importance).
"""

from .decoder import DecodeResult, MassMap, decode, is_recoverable, verified_masses
from .features import (
    FEATURE_NAMES,
    FeatureVector,
    autocorr_peak,
    feature_vector,
    normalized_entropy,
    verified_fractions,
)
from .numtheory import (
    Convergent,
    Instance,
    convergents,
    denominator_candidate,
    mod_pow,
    multiplicative_order,
)
from .spectrum import (
    Kernel,
    NoiseConfig,
    Sector,
    Spectrum,
    box_kernel,
    broaden,
    default_sectors,
    gaussian_kernel,
    ideal_spectrum,
    noisy_mixture,
    sample_counts,
    sample_shots,
    sector_spectrum,
)

__version__ = "0.1.0"

__all__ = [
    "Convergent",
    "DecodeResult",
    "FEATURE_NAMES",
    "FeatureVector",
    "Instance",
    "Kernel",
    "MassMap",
    "NoiseConfig",
    "Sector",
    "Spectrum",
    "autocorr_peak",
    "box_kernel",
    "broaden",
    "convergents",
    "decode",
    "default_sectors",
    "denominator_candidate",
    "feature_vector",
    "gaussian_kernel",
    "ideal_spectrum",
    "is_recoverable",
    "mod_pow",
    "multiplicative_order",
    "noisy_mixture",
    "normalized_entropy",
    "sample_counts",
    "sample_shots",
    "sector_spectrum",
    "verified_fractions",
    "verified_masses",
]
