"""Benchmark run collections: sweep generation, import, persistence, summary.

Datasets are line-delimited JSON: a schema header line followed by one
record per line.  Sampled runs store exact integer counts; infinite-shot
runs store probabilities.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .decoder import DecodeResult, decode, is_recoverable
from .features import FeatureVector, autocorr_peak, normalized_entropy, verified_fractions
from .numtheory import Instance
from .spectrum import (
    NoiseConfig,
    Sector,
    Spectrum,
    default_sectors,
    noisy_mixture,
    sample_counts,
)

SCHEMA_NAME = "ordrec-dataset"
SCHEMA_VERSION = 1


class DatasetError(Exception):
    """File-level problem in a dataset or histogram file."""


@dataclass(frozen=True)
class RunRecord:
    """One labeled run: instance, spectrum, decode result, features, label."""

    N: int
    a: int
    t: int
    r_true: int
    recoverable: bool
    decode: DecodeResult
    features: FeatureVector
    noise: NoiseConfig | None = None
    shots: int | None = None
    seed: int | None = None
    counts: tuple[int, ...] | None = None
    probs: tuple[float, ...] | None = None
    metadata: dict[str, str] = field(default_factory=dict)

    def instance(self) -> Instance:
        return Instance(self.N, self.a, self.t)

    def spectrum(self) -> Spectrum:
        if self.counts is not None:
            arr = np.asarray(self.counts, dtype=np.float64)
            return Spectrum(self.t, arr / arr.sum())
        if self.probs is not None:
            return Spectrum(self.t, np.asarray(self.probs, dtype=np.float64))
        raise ValueError("record stores neither counts nor probabilities")

    def to_dict(self) -> dict:
        noise = None
        if self.noise is not None:
            noise = {
                "epsilon": self.noise.epsilon,
                "sectors": [[s.h, s.nu, s.sigma] for s in self.noise.sectors],
                "sigma0": self.noise.sigma0,
                "lambda_uniform": self.noise.lambda_uniform,
                "kernel": self.noise.kernel,
            }
        return {
            "N": self.N,
            "a": self.a,
            "t": self.t,
            "r_true": self.r_true,
            "recoverable": self.recoverable,
            "decode": self.decode.to_dict(),
            "features": self.features.to_dict(),
            "noise": noise,
            "shots": self.shots,
            "seed": self.seed,
            "counts": list(self.counts) if self.counts is not None else None,
            "probs": list(self.probs) if self.probs is not None else None,
            "metadata": self.metadata,
        }

    @staticmethod
    def from_dict(obj: dict) -> "RunRecord":
        noise = None
        if obj.get("noise") is not None:
            nd = obj["noise"]
            noise = NoiseConfig(
                epsilon=float(nd["epsilon"]),
                sectors=tuple(Sector(int(h), float(nu), float(sg)) for h, nu, sg in nd["sectors"]),
                sigma0=float(nd["sigma0"]),
                lambda_uniform=float(nd["lambda_uniform"]),
                shots=obj.get("shots"),
                kernel=nd.get("kernel", "gaussian"),
            )
        return RunRecord(
            N=int(obj["N"]),
            a=int(obj["a"]),
            t=int(obj["t"]),
            r_true=int(obj["r_true"]),
            recoverable=bool(obj["recoverable"]),
            decode=DecodeResult.from_dict(obj["decode"]),
            features=FeatureVector.from_dict(obj["features"]),
            noise=noise,
            shots=obj.get("shots"),
            seed=obj.get("seed"),
            counts=tuple(obj["counts"]) if obj.get("counts") is not None else None,
            probs=tuple(obj["probs"]) if obj.get("probs") is not None else None,
            metadata=dict(obj.get("metadata") or {}),
        )


@dataclass(frozen=True)
class SweepConfig:
    """Cartesian sweep over instances and noise parameters.

    Bases are given as shift exponents s (the base is 2**s mod N).  Cells
    whose base reduces to 1 carry no order-finding content and are skipped
    unless include_degenerate is set.
    """

    moduli: tuple[int, ...] = (3, 7, 15, 31, 63, 127)
    shifts: tuple[int, ...] = (1, 2, 3, 4)
    precisions: tuple[int, ...] = (8, 10)
    epsilons: tuple[float, ...] = (0.0, 0.2, 0.5, 0.8)
    sigmas: tuple[float, ...] = (0.0, 2.0, 6.0)
    lambdas: tuple[float, ...] = (0.0, 0.3, 0.7)
    sector_policy: str = "uniform"
    shots: int | None = 4000
    replicates: int = 5
    master_seed: int = 0
    kernel: str = "gaussian"
    include_degenerate: bool = False

    def __post_init__(self) -> None:
        for name in ("moduli", "shifts", "precisions", "epsilons", "sigmas", "lambdas"):
            if not getattr(self, name):
                raise ValueError(f"sweep grid '{name}' must be non-empty")
        if self.replicates < 1:
            raise ValueError(f"replicates must be positive, got {self.replicates}")
        if self.sector_policy not in ("uniform", "none"):
            raise ValueError(f"unknown sector policy {self.sector_policy!r}")


def _record_seed(master_seed: int, cell_index: int, replicate: int) -> int:
    ss = np.random.SeedSequence([master_seed, cell_index, replicate])
    return int(ss.generate_state(1, np.uint64)[0])


def _make_record(
    inst: Instance,
    spec: Spectrum,
    *,
    noise: NoiseConfig | None,
    shots: int | None,
    seed: int | None,
    counts: np.ndarray | None,
    metadata: dict[str, str] | None = None,
) -> RunRecord:
    result = decode(spec, inst)
    m1_frac, margin_frac = verified_fractions(result)
    features = FeatureVector(
        a_peak=autocorr_peak(spec),
        h_norm=normalized_entropy(spec),
        m1_frac=m1_frac,
        margin_frac=margin_frac,
    )
    return RunRecord(
        N=inst.N,
        a=inst.a,
        t=inst.t,
        r_true=inst.r,
        recoverable=is_recoverable(result, inst.r),
        decode=result,
        features=features,
        noise=noise,
        shots=shots,
        seed=seed,
        counts=tuple(int(c) for c in counts) if counts is not None else None,
        probs=tuple(float(p) for p in spec.probs) if counts is None else None,
        metadata=metadata or {},
    )


def generate_sweep(cfg: SweepConfig) -> list[RunRecord]:
    """One labeled RunRecord per grid cell per replicate.

    The cell index runs over the full Cartesian product (including skipped
    degenerate cells), so per-record seeds are stable across policy flags.
    """
    records: list[RunRecord] = []
    grid = itertools.product(
        cfg.moduli, cfg.shifts, cfg.precisions, cfg.epsilons, cfg.sigmas, cfg.lambdas
    )
    for cell_index, (N, s, t, eps, sigma, lam) in enumerate(grid):
        a = pow(2, s, N)
        if a == 1 and not cfg.include_degenerate:
            continue
        inst = Instance(N, a, t)
        sectors: tuple[Sector, ...] = ()
        if eps > 0 and cfg.sector_policy == "uniform":
            sectors = default_sectors(N, a, sigma)
        noise = NoiseConfig(
            epsilon=eps,
            sectors=sectors,
            sigma0=sigma,
            lambda_uniform=lam,
            shots=cfg.shots,
            kernel=cfg.kernel,
        )
        mixture = noisy_mixture(inst, noise)
        for rep in range(cfg.replicates):
            seed = _record_seed(cfg.master_seed, cell_index, rep)
            if cfg.shots is not None:
                counts = sample_counts(mixture, cfg.shots, seed)
                spec = Spectrum(t, counts / cfg.shots)
            else:
                counts = None
                spec = mixture
            records.append(
                _make_record(
                    inst, spec, noise=noise, shots=cfg.shots, seed=seed, counts=counts
                )
            )
    if not records:
        raise ValueError("sweep grid is empty after skipping degenerate cells")
    return records


def import_histograms(
    path: str, instance: Instance, metadata: dict[str, str] | None = None
) -> list[RunRecord]:
    """Read a 'y,count' histogram file into one labeled RunRecord.

    Lines starting with '#' are comments; a single non-numeric first row is
    accepted as a header.  Bad rows raise DatasetError with the line number.
    """
    Q = instance.Q
    counts = np.zeros(Q, dtype=np.int64)
    seen_data = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = [f.strip() for f in line.split(",")]
            if len(fields) != 2:
                raise DatasetError(f"{path}: expected 2 columns 'y,count' at line {lineno}")
            try:
                y, c = int(fields[0]), int(fields[1])
            except ValueError:
                if not seen_data:
                    continue  # header row
                raise DatasetError(f"{path}: non-integer row at line {lineno}") from None
            seen_data = True
            if not 0 <= y < Q:
                raise DatasetError(f"{path}: outcome {y} >= Q={Q} at line {lineno}")
            if c < 0:
                raise DatasetError(f"{path}: negative count at line {lineno}")
            counts[y] += c
    total = int(counts.sum())
    if total == 0:
        raise DatasetError(f"{path}: no positive counts in file")
    spec = Spectrum(instance.t, counts / total)
    meta = dict(metadata or {})
    meta.setdefault("source", os.path.basename(path))
    record = _make_record(
        inst=instance, spec=spec, noise=None, shots=total, seed=None, counts=counts, metadata=meta
    )
    return [record]


def save_dataset(records: Sequence[RunRecord], path: str) -> None:
    """Write line-delimited JSON with a leading schema header.

    An empty record list writes an empty file; floats rely on Python's
    shortest round-trip repr, so load(save(x)) == x field for field.
    """
    with open(path, "w", encoding="utf-8") as fh:
        if not records:
            return
        fh.write(json.dumps({"schema": SCHEMA_NAME, "version": SCHEMA_VERSION}) + "\n")
        for rec in records:
            fh.write(json.dumps(rec.to_dict()) + "\n")


def load_dataset(path: str) -> list[RunRecord]:
    records: list[RunRecord] = []
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
        if not first.strip():
            return []
        header = _parse_line(first, path, 1)
        if header.get("schema") != SCHEMA_NAME or header.get("version") != SCHEMA_VERSION:
            raise DatasetError(
                f"{path}: expected schema {SCHEMA_NAME} v{SCHEMA_VERSION}, "
                f"found {header.get('schema')!r} v{header.get('version')!r}"
            )
        for lineno, raw in enumerate(fh, start=2):
            if not raw.strip():
                continue
            records.append(RunRecord.from_dict(_parse_line(raw, path, lineno)))
    return records


def _parse_line(raw: str, path: str, lineno: int) -> dict:
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path}: corrupt JSON at line {lineno} ({exc.msg})") from None


def summarize(records: Sequence[RunRecord]) -> dict:
    """Counts and percentages overall and broken down by N, a, t and
    metadata keys."""
    if not records:
        raise ValueError("cannot summarize an empty dataset")
    total = len(records)
    rec = sum(1 for r in records if r.recoverable)

    def counted(key) -> dict:
        counts: dict = {}
        for r in records:
            counts[key(r)] = counts.get(key(r), 0) + 1
        return dict(sorted(counts.items()))

    by_meta: dict[str, dict] = {}
    meta_keys = sorted({k for r in records for k in r.metadata})
    for k in meta_keys:
        counts: dict[str, int] = {}
        for r in records:
            if k in r.metadata:
                v = r.metadata[k]
                counts[v] = counts.get(v, 0) + 1
        by_meta[k] = dict(sorted(counts.items()))
    return {
        "total": total,
        "recoverable": rec,
        "non_recoverable": total - rec,
        "recoverable_pct": 100.0 * rec / total,
        "non_recoverable_pct": 100.0 * (total - rec) / total,
        "by_N": counted(lambda r: r.N),
        "by_a": counted(lambda r: r.a),
        "by_t": counted(lambda r: r.t),
        "by_metadata": by_meta,
    }


def format_summary(summary: dict) -> str:
    """Human-readable two-column summary table."""

    def breakdown(counts: dict) -> str:
        return ", ".join(f"{k} ({v})" for k, v in counts.items())

    lines = [
        ("Total runs", str(summary["total"])),
        ("Recoverable runs", f"{summary['recoverable']} ({summary['recoverable_pct']:.1f}%)"),
        (
            "Non-recoverable runs",
            f"{summary['non_recoverable']} ({summary['non_recoverable_pct']:.1f}%)",
        ),
        ("Instances N", breakdown(summary["by_N"])),
        ("Bases a", breakdown(summary["by_a"])),
        ("Precision size t", breakdown(summary["by_t"])),
    ]
    for key, counts in summary["by_metadata"].items():
        lines.append((key, breakdown(counts)))
    width = max(len(name) for name, _ in lines)
    return "\n".join(f"{name:<{width}}  {value}" for name, value in lines) + "\n"


# --- sweep config files ---------------------------------------------------------

_LIST_FIELDS = {
    "moduli": int,
    "shifts": int,
    "precisions": int,
    "epsilons": float,
    "sigmas": float,
    "lambdas": float,
}
_SCALAR_FIELDS = {
    "sector_policy": str,
    "kernel": str,
    "replicates": int,
    "master_seed": int,
}


def parse_sweep_config(text: str) -> SweepConfig:
    """Parse the key = value sweep format ('#' comments, comma-separated lists)."""
    kwargs: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"sweep config line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if key in _LIST_FIELDS:
            conv = _LIST_FIELDS[key]
            try:
                kwargs[key] = tuple(conv(v.strip()) for v in value.split(",") if v.strip())
            except ValueError:
                raise ValueError(f"sweep config line {lineno}: bad {key} list {value!r}") from None
        elif key in _SCALAR_FIELDS:
            try:
                kwargs[key] = _SCALAR_FIELDS[key](value)
            except ValueError:
                raise ValueError(f"sweep config line {lineno}: bad {key} value {value!r}") from None
        elif key == "shots":
            kwargs[key] = None if value.lower() in ("none", "inf", "exact") else int(value)
        elif key == "include_degenerate":
            kwargs[key] = value.lower() in ("1", "true", "yes")
        else:
            raise ValueError(f"sweep config line {lineno}: unknown key {key!r}")
    return SweepConfig(**kwargs)


def load_sweep_config(path: str) -> SweepConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_sweep_config(fh.read())
