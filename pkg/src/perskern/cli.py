"""Command-line pipeline: orbits -> diagrams -> Gram matrices -> experiments.

Subcommands: generate-orbits, compute-diagrams, gram, cross-validate,
run-experiment, oracle-check. Exit code 0 on success, 1 on input errors,
2 on computation errors. Relative output paths resolve under
$PERSKERN_OUTPUT_ROOT when set. Every command that uses randomness takes
--seed; configuration files mirror the flags and flags win on conflict.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .experiment import (
    DEFAULT_R_VALUES,
    GramSource,
    generate_orbit_dataset,
    oracle_equivalence_check,
    prepare_variant_diagrams,
    reduce_to_top_k,
    report_table,
    run_experiment,
    runs_csv,
    zeta_grid,
)
from .geometry import pairwise_distances
from .kernels import PssKernel, PwgKernel, SwKernel, gram_matrix
from .persistence import (
    DEFAULT_SIMPLEX_CAP,
    FiltrationSizeError,
    PersistencePair,
    diagrams_from_pairs,
    rips_pairs,
)
from .scaling import ScalingSpec, scaled_kernel
from .svm import cross_validate


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _parse_ints(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _parse_threshold(text):
    if text is None or text == "enclosing":
        return None
    if text == "inf":
        return float("inf")
    return float(text)


def _merged(args, config_keys: dict):
    """Flag value if given, else config-file value, else the default."""
    config = {}
    if getattr(args, "config", None):
        config = io.read_json(args.config)
    out = {}
    for key, default in config_keys.items():
        flag_value = getattr(args, key, None)
        out[key] = flag_value if flag_value is not None else config.get(key, default)
    return out


def _scaling_spec(scaling: str, aux: str, rho) -> ScalingSpec | None:
    if scaling == "none":
        return None
    if scaling == "augment":
        return ScalingSpec("augment", aux)
    if scaling == "compress":
        if rho is None:
            raise UsageError("--scaling compress requires --rho")
        return ScalingSpec("compress", aux, rho=int(rho))
    raise UsageError(f"unknown scaling {scaling!r}")


def _kernel(kind: str, opts: dict):
    if kind == "pss":
        return PssKernel(sigma=opts["sigma"])
    if kind == "sw":
        return SwKernel(sigma=opts["sigma"], n_slices=opts["n_slices"])
    if kind == "pwg":
        return PwgKernel(rho_g=opts["rho_g"], c=opts["c"], tau=opts["tau"],
                         delta=opts["delta"])
    raise UsageError(f"unknown kernel {kind!r}")


def cmd_generate_orbits(args) -> int:
    cfg = _merged(args, {
        "r_values": list(DEFAULT_R_VALUES), "orbits_per_label": 20,
        "points_per_orbit": 300, "seed": 0, "dim": 1, "threshold": None,
        "top_k": None, "simplex_cap": DEFAULT_SIMPLEX_CAP, "jobs": 1,
    })
    r_values = cfg["r_values"]
    if isinstance(r_values, str):
        r_values = _parse_floats(r_values)
    threshold = _parse_threshold(cfg["threshold"]) if isinstance(cfg["threshold"], str) \
        else cfg["threshold"]
    samples, labels, meta = generate_orbit_dataset(
        r_values=r_values, orbits_per_label=int(cfg["orbits_per_label"]),
        points_per_orbit=int(cfg["points_per_orbit"]), seed=int(cfg["seed"]),
        homology_dim=int(cfg["dim"]), threshold=threshold,
        simplex_cap=int(cfg["simplex_cap"]), jobs=int(cfg["jobs"]),
    )
    if cfg["top_k"] is not None:
        k = int(cfg["top_k"])
        reduced = []
        for pairs in samples:
            if pairs is None:
                reduced.append(None)
                continue
            diagram = reduce_to_top_k(diagrams_from_pairs(pairs, int(cfg["dim"])), k)
            reduced.append(
                [PersistencePair(int(cfg["dim"]), float(b), float(d)) for b, d in diagram.points]
            )
        samples = reduced
    out = io.resolve_output(args.out)
    extra = [{**m, "dim": int(cfg["dim"]), "seed": int(cfg["seed"])} for m in meta]
    io.write_diagram_set(out, samples, labels, extra=extra)
    n_failed = sum(1 for s in samples if s is None)
    print(f"wrote {len(samples) - n_failed} diagrams to {out}"
          + (f" ({n_failed} samples flagged)" if n_failed else ""))
    return 0


def cmd_compute_diagrams(args) -> int:
    cfg = _merged(args, {
        "max_dim": 1, "threshold": None, "dims": None,
        "simplex_cap": DEFAULT_SIMPLEX_CAP, "labels": None,
    })
    clouds_dir = Path(args.clouds)
    if not clouds_dir.is_dir():
        raise UsageError(f"{clouds_dir} is not a directory")
    max_dim = int(cfg["max_dim"])
    dims = _parse_ints(cfg["dims"]) if isinstance(cfg["dims"], str) else (
        cfg["dims"] if cfg["dims"] is not None else list(range(max_dim + 1)))
    if max(dims) > max_dim:
        raise UsageError("requested homology dimension exceeds --max-dim")
    threshold = _parse_threshold(cfg["threshold"]) if isinstance(cfg["threshold"], str) \
        else cfg["threshold"]
    label_map = io.read_json(cfg["labels"]) if cfg["labels"] else {}
    files = sorted(p for p in clouds_dir.iterdir() if p.suffix == ".csv")
    if not files:
        print(f"warning: no point-cloud CSVs found in {clouds_dir}", file=sys.stderr)
    samples, labels, extra = [], [], []
    for path in files:
        label = label_map.get(path.name, path.stem)
        try:
            cloud = io.load_point_cloud(path)
            dm = pairwise_distances(cloud)
            pairs = rips_pairs(dm, max_dim=max_dim, threshold=threshold,
                               simplex_cap=int(cfg["simplex_cap"]))
        except (ValueError, FiltrationSizeError) as exc:
            print(f"warning: {path.name}: {exc}", file=sys.stderr)
            samples.append(None)
            labels.append(label)
            extra.append({"source": path.name, "dim": None, "error": str(exc)})
            continue
        for r in dims:
            samples.append([p for p in pairs if p.dim == r])
            labels.append(label)
            extra.append({"source": path.name, "dim": r})
    out = io.resolve_output(args.out)
    io.write_diagram_set(out, samples, labels, extra=extra)
    print(f"wrote diagrams for {len(files)} clouds to {out}")
    return 0


def _load_diagram_dir(directory, dim: int, essential="drop"):
    samples, labels, entries = io.read_diagram_set(directory)
    diagrams = [diagrams_from_pairs(pairs, dim, essential=essential) for pairs in samples]
    return diagrams, labels, samples


def cmd_gram(args) -> int:
    cfg = _merged(args, {
        "kernel": "pss", "dim": 1, "sigma": 1.0, "rho_g": 1.0, "c": 1.0,
        "tau": 1.0, "delta": 10, "n_slices": 10,
        "scaling": "none", "rho": None, "aux": "persistence",
    })
    diagrams, _, samples = _load_diagram_dir(args.diagrams, int(cfg["dim"]))
    if not diagrams:
        raise UsageError(f"no diagrams found in {args.diagrams}")
    base = _kernel(cfg["kernel"], {**cfg, "n_slices": int(cfg["n_slices"]),
                                   "delta": int(cfg["delta"])})
    spec = _scaling_spec(cfg["scaling"], cfg["aux"], cfg["rho"])
    kernel = scaled_kernel(base, spec)
    gram = gram_matrix(kernel, diagrams)
    out = io.resolve_output(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    provenance = {
        **gram.provenance,
        "dim": int(cfg["dim"]),
        "scaling": "none" if spec is None else spec.describe(),
        "diagram_set": str(args.diagrams),
        "diagram_set_hash": io.diagram_set_hash(samples),
    }
    io.save_gram(out, gram.values, provenance)
    print(f"wrote {gram.values.shape[0]}x{gram.values.shape[1]} Gram matrix to {out}")
    return 0


def cmd_cross_validate(args) -> int:
    cfg = _merged(args, {
        "kernel": "pss", "dim": 1, "n_slices": 10, "scaling": "none",
        "rho": None, "aux": "persistence", "top_k": None,
        "folds": 5, "seed": 0, "average": "macro",
    })
    diagrams, labels, _ = _load_diagram_dir(args.diagrams, int(cfg["dim"]))
    if not diagrams:
        raise UsageError(f"no diagrams found in {args.diagrams}")
    top_k = int(cfg["top_k"]) if cfg["top_k"] is not None else (
        int(cfg["rho"]) if cfg["rho"] is not None else None)
    variant = prepare_variant_diagrams(diagrams, cfg["scaling"], top_k, cfg["aux"])
    source = GramSource(cfg["kernel"], variant, n_slices=int(cfg["n_slices"]))
    all_idx = np.arange(len(labels))
    report = cross_validate(source.gram, source.grid(all_idx), zeta_grid(),
                            labels, n_folds=int(cfg["folds"]), seed=int(cfg["seed"]),
                            average=cfg["average"])
    payload = {
        "kernel": cfg["kernel"], "scaling": cfg["scaling"], "aux": cfg["aux"],
        "dim": int(cfg["dim"]), **report.to_dict(include_timing=True),
        "selected": report.selected.to_dict(),
    }
    if args.out:
        out = io.resolve_output(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        io.write_json(out, payload)
        print(f"wrote CV report to {out}")
    else:
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        print()
    return 0


def cmd_run_experiment(args) -> int:
    cfg = _merged(args, {
        "diagrams": None, "r_values": list(DEFAULT_R_VALUES), "orbits_per_label": 20,
        "points_per_orbit": 300, "dim": 1, "threshold": None,
        "simplex_cap": DEFAULT_SIMPLEX_CAP, "jobs": 1,
        "kernels": ["pss", "sw"], "scalings": ["none", "augment", "compress"],
        "aux": "persistence", "top_k": 10, "repetitions": 3, "folds": 5,
        "seed": 0, "train_fraction": 0.7, "n_slices": 10, "average": "macro",
    })
    out = io.resolve_output(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg["diagrams"]:
        samples, labels, _ = io.read_diagram_set(cfg["diagrams"])
    else:
        r_values = cfg["r_values"]
        if isinstance(r_values, str):
            r_values = _parse_floats(r_values)
        threshold = _parse_threshold(cfg["threshold"]) if isinstance(cfg["threshold"], str) \
            else cfg["threshold"]
        samples, labels, meta = generate_orbit_dataset(
            r_values=r_values, orbits_per_label=int(cfg["orbits_per_label"]),
            points_per_orbit=int(cfg["points_per_orbit"]), seed=int(cfg["seed"]),
            homology_dim=int(cfg["dim"]), threshold=threshold,
            simplex_cap=int(cfg["simplex_cap"]), jobs=int(cfg["jobs"]),
        )
        extra = [{**m, "dim": int(cfg["dim"]), "seed": int(cfg["seed"])} for m in meta]
        io.write_diagram_set(out / "diagrams", samples, labels, extra=extra)
    kernels = cfg["kernels"]
    if isinstance(kernels, str):
        kernels = [k.strip() for k in kernels.split(",") if k.strip()]
    scalings = cfg["scalings"]
    if isinstance(scalings, str):
        scalings = [s.strip() for s in scalings.split(",") if s.strip()]
    report, timings = run_experiment(
        samples, labels, homology_dim=int(cfg["dim"]), kernels=kernels,
        scalings=scalings, aux=cfg["aux"],
        top_k=int(cfg["top_k"]) if cfg["top_k"] is not None else None,
        repetitions=int(cfg["repetitions"]), n_folds=int(cfg["folds"]),
        seed=int(cfg["seed"]), train_fraction=float(cfg["train_fraction"]),
        n_slices=int(cfg["n_slices"]), average=cfg["average"],
    )
    io.write_json(out / "report.json", report)
    io.write_json(out / "timings.json", timings)
    (out / "runs.csv").write_text(runs_csv(report), encoding="utf-8")
    table = report_table(report, timings)
    (out / "report.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    print(f"artifacts written to {out}")
    return 0


def cmd_oracle_check(args) -> int:
    cfg = _merged(args, {
        "clouds": 50, "min_points": 5, "max_points": 8, "dims": [0, 1], "seed": 0,
    })
    dims = _parse_ints(cfg["dims"]) if isinstance(cfg["dims"], str) else cfg["dims"]
    failures = oracle_equivalence_check(
        n_clouds=int(cfg["clouds"]),
        point_range=(int(cfg["min_points"]), int(cfg["max_points"])),
        dims=tuple(dims), seed=int(cfg["seed"]),
    )
    if failures:
        for f in failures[:20]:
            print(f"mismatch: {f}", file=sys.stderr)
        print(f"oracle check FAILED with {len(failures)} mismatches", file=sys.stderr)
        raise ArithmeticError("persistence pairs disagree with the rank oracle")
    print(f"oracle check passed on {cfg['clouds']} clouds (dims {dims})")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="perskern", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-orbits", help="orbit diagrams for each r label")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--r-values", dest="r_values")
    p.add_argument("--orbits-per-label", dest="orbits_per_label", type=int)
    p.add_argument("--points-per-orbit", dest="points_per_orbit", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--threshold")
    p.add_argument("--top-k", dest="top_k", type=int)
    p.add_argument("--simplex-cap", dest="simplex_cap", type=int)
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_generate_orbits)

    p = sub.add_parser("compute-diagrams", help="diagrams for a directory of clouds")
    p.add_argument("--clouds", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--max-dim", dest="max_dim", type=int)
    p.add_argument("--threshold")
    p.add_argument("--dims")
    p.add_argument("--labels")
    p.add_argument("--simplex-cap", dest="simplex_cap", type=int)
    p.set_defaults(func=cmd_compute_diagrams)

    p = sub.add_parser("gram", help="kernel Gram matrix over a diagram set")
    p.add_argument("--diagrams", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--kernel", choices=("pss", "pwg", "sw"))
    p.add_argument("--dim", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--rho-g", dest="rho_g", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--delta", type=int)
    p.add_argument("--n-slices", dest="n_slices", type=int)
    p.add_argument("--scaling", choices=("none", "augment", "compress"))
    p.add_argument("--rho", type=int)
    p.add_argument("--aux", choices=("mass", "persistence"))
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("cross-validate", help="k-fold grid search on a diagram set")
    p.add_argument("--diagrams", required=True)
    p.add_argument("--out")
    p.add_argument("--config")
    p.add_argument("--kernel", choices=("pss", "pwg", "sw"))
    p.add_argument("--dim", type=int)
    p.add_argument("--n-slices", dest="n_slices", type=int)
    p.add_argument("--scaling", choices=("none", "augment", "compress"))
    p.add_argument("--rho", type=int)
    p.add_argument("--aux", choices=("mass", "persistence"))
    p.add_argument("--top-k", dest="top_k", type=int)
    p.add_argument("--folds", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--average", choices=("macro", "weighted"))
    p.set_defaults(func=cmd_cross_validate)

    p = sub.add_parser("run-experiment", help="full split/CV/test experiment")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--diagrams")
    p.add_argument("--r-values", dest="r_values")
    p.add_argument("--orbits-per-label", dest="orbits_per_label", type=int)
    p.add_argument("--points-per-orbit", dest="points_per_orbit", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--threshold")
    p.add_argument("--simplex-cap", dest="simplex_cap", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--kernels")
    p.add_argument("--scalings")
    p.add_argument("--aux", choices=("mass", "persistence"))
    p.add_argument("--top-k", dest="top_k", type=int)
    p.add_argument("--repetitions", type=int)
    p.add_argument("--folds", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--train-fraction", dest="train_fraction", type=float)
    p.add_argument("--n-slices", dest="n_slices", type=int)
    p.add_argument("--average", choices=("macro", "weighted"))
    p.set_defaults(func=cmd_run_experiment)

    p = sub.add_parser("oracle-check", help="pairs vs brute-force rank oracle")
    p.add_argument("--config")
    p.add_argument("--clouds", type=int)
    p.add_argument("--min-points", dest="min_points", type=int)
    p.add_argument("--max-points", dest="max_points", type=int)
    p.add_argument("--dims")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (UsageError, FileNotFoundError, NotADirectoryError, KeyError,
            json.JSONDecodeError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except (FiltrationSizeError, ArithmeticError, RuntimeError) as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
