"""Command-line interface.

Subcommands: simulate, decode, features, dataset (generate/import/summarize),
analyze.  Exit codes: 0 success, 2 usage or validation error, 3 analysis
domain error, 4 I/O or file-format error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import dataset as ds
from . import report as rp
from .decoder import decode
from .features import feature_vector, normalized_entropy
from .numtheory import Instance
from .spectrum import (
    KERNEL_FAMILIES,
    NoiseConfig,
    Sector,
    Spectrum,
    counts_to_dict,
    default_sectors,
    noisy_mixture,
    sample_counts,
    spectrum_from_dict,
    spectrum_to_dict,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ANALYSIS = 3
EXIT_IO = 4


class AnalysisError(Exception):
    """Dataset cannot support the requested analysis (exit 3)."""


def _resolve_out(path: str) -> str:
    """Relative output paths land in $ORDREC_OUTDIR when it is set."""
    base = os.environ.get("ORDREC_OUTDIR")
    if base and not os.path.isabs(path):
        os.makedirs(base, exist_ok=True)
        return os.path.join(base, path)
    return path


def _instance_from_args(args) -> Instance:
    try:
        return Instance(args.N, args.a, args.t)
    except ValueError as exc:
        raise ValueError(f"invalid --N/--a/--t: {exc}") from None


def _parse_sectors(text: str) -> tuple[Sector, ...]:
    sectors = []
    for part in text.split(","):
        fields = part.split(":")
        if len(fields) != 3:
            raise ValueError(f"invalid --sectors entry {part!r}; expected h:nu:sigma")
        try:
            sectors.append(Sector(int(fields[0]), float(fields[1]), float(fields[2])))
        except ValueError:
            raise ValueError(f"invalid --sectors entry {part!r}; expected h:nu:sigma") from None
    return tuple(sectors)


def _load_spectrum(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ds.DatasetError(f"{path}: invalid spectrum JSON ({exc.msg})") from None
    return spectrum_from_dict(obj)


# --- subcommands -----------------------------------------------------------------

def cmd_simulate(args) -> int:
    inst = _instance_from_args(args)
    if args.sectors:
        sectors = _parse_sectors(args.sectors)
    elif args.epsilon > 0:
        sectors = default_sectors(inst.N, inst.a, args.sigma0)
    else:
        sectors = ()
    cfg = NoiseConfig(
        epsilon=args.epsilon,
        sectors=sectors,
        sigma0=args.sigma0,
        lambda_uniform=args.lambda_uniform,
        shots=args.shots,
        seed=args.seed,
        kernel=args.kernel,
    )
    mixture = noisy_mixture(inst, cfg)
    if args.shots is not None:
        counts = sample_counts(mixture, args.shots, args.seed)
        spec = Spectrum(inst.t, counts / args.shots)
        payload = counts_to_dict(inst.t, args.shots, counts)
    else:
        spec = mixture
        payload = spectrum_to_dict(mixture)
    out = _resolve_out(args.out)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(payload) + "\n")
    print(f"Q={inst.Q} H_norm={normalized_entropy(spec):.6g}")
    return EXIT_OK


def cmd_decode(args) -> int:
    inst = _instance_from_args(args)
    spec = _load_spectrum(args.spectrum)
    result = decode(spec, inst)
    print(json.dumps(result.to_dict(), indent=2))
    if result.r_calc is None:
        print("recoverable: false (M_ver=0)")
    else:
        ok = "true" if result.r_calc == inst.r else "false"
        print(f"recoverable: {ok} (r_calc={result.r_calc}, r_true={inst.r})")
    return EXIT_OK


def cmd_features(args) -> int:
    inst = _instance_from_args(args)
    spec = _load_spectrum(args.spectrum)
    print(json.dumps(feature_vector(spec, inst).to_dict(), indent=2))
    return EXIT_OK


def cmd_dataset_generate(args) -> int:
    cfg = ds.load_sweep_config(args.config) if args.config else ds.SweepConfig()
    records = ds.generate_sweep(cfg)
    out = _resolve_out(args.out)
    ds.save_dataset(records, out)
    print(f"wrote {len(records)} records to {out}")
    return EXIT_OK


def cmd_dataset_import(args) -> int:
    inst = _instance_from_args(args)
    metadata = {}
    for item in args.meta or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"invalid --meta entry {item!r}; expected key=value")
        metadata[key] = value
    records = ds.import_histograms(args.infile, inst, metadata)
    out = _resolve_out(args.out)
    ds.save_dataset(records, out)
    print(f"imported {len(records)} record(s) to {out}")
    return EXIT_OK


def cmd_dataset_summarize(args) -> int:
    records = ds.load_dataset(args.infile)
    if not records:
        raise AnalysisError("dataset is empty")
    sys.stdout.write(ds.format_summary(ds.summarize(records)))
    return EXIT_OK


def cmd_analyze(args) -> int:
    records = ds.load_dataset(args.infile)
    if not records:
        raise AnalysisError("dataset is empty")
    n_pos = sum(1 for r in records if r.recoverable)
    if n_pos in (0, len(records)):
        raise AnalysisError("AUROC undefined for single-class data")
    sections = [s for s in rp.ALL_SECTIONS if getattr(args, s)]
    if not sections:
        sections = list(rp.ALL_SECTIONS)
    report = rp.build_report(
        records,
        sections=sections,
        k=args.k,
        seed=args.seed,
        n_trees=args.trees,
        tree_depth=args.tree_depth if args.tree_depth > 0 else None,
        repeats=args.repeats,
    )
    sys.stdout.write(rp.format_report(report))
    if args.out:
        rp.write_report(report, _resolve_out(args.out))
    if args.plots:
        plots_dir = _resolve_out(args.plots)
        rp.write_plot_data(records, report, plots_dir)
        from . import plots  # deferred: pulls in matplotlib

        plots.render_all(records, report, plots_dir)
        print(f"plot data and figures written to {plots_dir}")
    return EXIT_OK


# --- parser ----------------------------------------------------------------------

def _add_instance_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--N", type=int, required=True, help="modulus N >= 2")
    p.add_argument("--a", type=int, required=True, help="base a, coprime to N")
    p.add_argument("--t", type=int, required=True, help="precision register size in qubits")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ordrec",
        description="Synthesize, decode and classify noisy order-finding distributions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthesize a spectrum and write it to a file")
    _add_instance_flags(p)
    p.add_argument("--epsilon", type=float, default=0.0, help="leakage weight into competing sectors")
    p.add_argument("--sigma0", type=float, default=0.0, help="intended-comb kernel width")
    p.add_argument("--sectors", type=str, default="",
                   help="competing sectors h:nu:sigma,... (default: uniform policy when epsilon > 0)")
    p.add_argument("--lambda", dest="lambda_uniform", type=float, default=0.0,
                   help="uniform admixture weight")
    p.add_argument("--shots", type=int, default=None,
                   help="finite shot count (omit for the exact distribution)")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument("--kernel", choices=KERNEL_FAMILIES, default="gaussian")
    p.add_argument("--out", type=str, required=True, help="output spectrum JSON path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("decode", help="decode a spectrum file and print the verdict")
    p.add_argument("spectrum", type=str, help="spectrum JSON file")
    _add_instance_flags(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("features", help="print the feature vector of a spectrum file")
    p.add_argument("spectrum", type=str, help="spectrum JSON file")
    _add_instance_flags(p)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("dataset", help="generate, import or summarize datasets")
    dsub = p.add_subparsers(dest="dataset_command", required=True)

    g = dsub.add_parser("generate", help="run a synthetic sweep")
    g.add_argument("--config", type=str, default=None,
                   help="sweep config file (defaults to the benchmark grid)")
    g.add_argument("--out", type=str, required=True, help="output dataset path (JSONL)")
    g.set_defaults(func=cmd_dataset_generate)

    g = dsub.add_parser("import", help="import a y,count histogram file")
    g.add_argument("--in", dest="infile", type=str, required=True, help="histogram CSV path")
    _add_instance_flags(g)
    g.add_argument("--meta", action="append", default=[], help="metadata key=value (repeatable)")
    g.add_argument("--out", type=str, required=True, help="output dataset path (JSONL)")
    g.set_defaults(func=cmd_dataset_import)

    g = dsub.add_parser("summarize", help="print dataset composition")
    g.add_argument("--in", dest="infile", type=str, required=True, help="dataset path")
    g.set_defaults(func=cmd_dataset_summarize)

    p = sub.add_parser("analyze", help="run the analysis stack on a dataset")
    p.add_argument("--in", dest="infile", type=str, required=True, help="dataset path")
    p.add_argument("--auroc", action="store_true", help="single-feature AUROC table")
    p.add_argument("--tree", action="store_true", help="interpretable decision tree")
    p.add_argument("--forest", action="store_true", help="cross-validated forest AUROC")
    p.add_argument("--perm", action="store_true", help="permutation importance")
    p.add_argument("--k", type=int, default=5, help="cross-validation folds")
    p.add_argument("--seed", type=int, default=0, help="analysis seed")
    p.add_argument("--trees", type=int, default=200, help="forest size")
    p.add_argument("--tree-depth", type=int, default=4,
                   help="report tree depth (0 = unlimited)")
    p.add_argument("--repeats", type=int, default=10, help="permutation repeats per feature")
    p.add_argument("--out", type=str, default=None, help="report JSON path")
    p.add_argument("--plots", type=str, default=None, help="directory for plot CSVs and figures")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AnalysisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except ds.DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
