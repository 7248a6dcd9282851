"""Orbit-recognition experiment: dataset generation, grids, CV, reporting.

The pipeline generates linked-twisted-map orbits per class label, computes
one homology diagram per orbit, reduces each diagram to its most persistent
pairs (or compresses the remainder into a centre), and scores kernel-SVM
classifiers with stratified splits and k-fold hyperparameter selection.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .diagram import PersistenceDiagram
from .geometry import OrbitParams, linked_twisted_orbit, pairwise_distances
from .kernels import (
    SW_SIGMA_MULTIPLIERS,
    PssKernel,
    median_heuristic,
    pwg_bandwidth,
    pwg_embedding_inner,
    sw_distance_matrix,
)
from .persistence import (
    DEFAULT_SIMPLEX_CAP,
    FiltrationSizeError,
    diagrams_from_pairs,
    rips_pairs,
)
from .scaling import ScalingSpec, apply_scaling, top_persistent
from .svm import cross_validate, scores, stratified_split, train_ovr

DEFAULT_R_VALUES = (2.5, 3.5, 4.0, 4.1, 4.3)
SCALING_CHOICES = ("none", "augment", "compress")


def pss_sigma_grid() -> list[float]:
    return sorted([10.0**j for j in range(-3, 4)] + [5 * 10.0**j for j in range(-3, 3)])


def zeta_grid() -> list[float]:
    return [10.0**j for j in range(-3, 4)]


def pwg_c_tau_grid() -> list[float]:
    return [10.0**j for j in range(-2, 3)]


def _orbit_task(args):
    label, x0, y0, r, n_points, homology_dim, threshold, simplex_cap = args
    cloud = linked_twisted_orbit(OrbitParams(x0, y0, r, n_points))
    dm = pairwise_distances(cloud)
    try:
        pairs = rips_pairs(dm, max_dim=homology_dim, threshold=threshold,
                           simplex_cap=simplex_cap)
    except FiltrationSizeError as exc:
        return label, None, str(exc)
    return label, pairs, None


def generate_orbit_dataset(r_values=DEFAULT_R_VALUES, orbits_per_label: int = 20,
                           points_per_orbit: int = 300, seed: int = 0,
                           homology_dim: int = 1, threshold=None,
                           simplex_cap: int = DEFAULT_SIMPLEX_CAP, jobs: int = 1):
    """Seeded orbit diagrams: (pair lists, labels, per-sample metadata).

    Starting points are drawn uniformly from the unit square, label by label,
    from one generator, so the same seed reproduces the dataset bit for bit.
    A sample whose filtration overflows the cap is kept in the metadata with
    an error note and a None pair list.
    """
    rng = np.random.default_rng(seed)
    tasks = []
    meta = []
    for r in r_values:
        starts = rng.uniform(0.0, 1.0, size=(orbits_per_label, 2))
        for x0, y0 in starts:
            tasks.append((str(r), float(x0), float(y0), float(r), points_per_orbit,
                          homology_dim, threshold, simplex_cap))
            meta.append({"r": float(r), "x0": float(x0), "y0": float(y0),
                         "n_points": points_per_orbit})
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_orbit_task, tasks, chunksize=4))
    else:
        results = [_orbit_task(t) for t in tasks]
    samples, labels = [], []
    for (label, pairs, error), entry in zip(results, meta):
        labels.append(label)
        samples.append(pairs)
        if error is not None:
            entry["error"] = error
    return samples, labels, meta


def reduce_to_top_k(diagram: PersistenceDiagram, k: int) -> PersistenceDiagram:
    """Keep the k most persistent pairs (same tie-breaks as compression)."""
    kept, _ = top_persistent(diagram, k)
    if kept is diagram.points:
        return diagram
    return PersistenceDiagram(kept, dim=diagram.dim)


def prepare_variant_diagrams(full_diagrams, scaling: str, top_k: int | None,
                             aux: str = "persistence") -> list[PersistenceDiagram]:
    """Diagrams a kernel sees under one scaling variant.

    none: top-k reduction only. augment: one centre added to the reduced
    diagram. compress: the full diagram compressed to its top-k pairs plus
    the centre of everything discarded.
    """
    if scaling not in SCALING_CHOICES:
        raise ValueError(f"unknown scaling {scaling!r}; expected one of {SCALING_CHOICES}")
    if scaling == "compress":
        if top_k is None:
            raise ValueError("compress needs a top-k rank")
        spec = ScalingSpec("compress", aux, rho=top_k)
        return [apply_scaling(d, spec) for d in full_diagrams]
    reduced = [reduce_to_top_k(d, top_k) if top_k is not None else d for d in full_diagrams]
    if scaling == "none":
        return reduced
    spec = ScalingSpec("augment", aux)
    return [apply_scaling(d, spec) for d in reduced]


class GramSource:
    """Full-dataset Gram matrices for one kernel family, cached per config.

    Calibrated grid parameters (SW bandwidth median, PWG point-cloud
    bandwidth) are computed from the training indices only; Gram values are
    plain pairwise kernel evaluations, so caching them across repetitions
    cannot leak labels.
    """

    def __init__(self, kind: str, diagrams, n_slices: int = 10):
        if kind not in ("pss", "pwg", "sw"):
            raise ValueError(f"unknown kernel kind {kind!r}")
        self.kind = kind
        self.diagrams = list(diagrams)
        self.n_slices = n_slices
        self._grams: dict = {}
        self._sw_dists = None
        self._pwg_inners: dict = {}

    def _sw_distances(self) -> np.ndarray:
        if self._sw_dists is None:
            self._sw_dists = sw_distance_matrix(self.diagrams, self.n_slices)
        return self._sw_dists

    def grid(self, train_idx) -> list[dict]:
        if self.kind == "pss":
            return [{"sigma": s} for s in pss_sigma_grid()]
        if self.kind == "sw":
            block = self._sw_distances()[np.ix_(train_idx, train_idx)]
            med = median_heuristic(block[np.triu_indices(len(train_idx), k=1)])
            return [{"sigma": m * med} for m in SW_SIGMA_MULTIPLIERS]
        train_diagrams = [self.diagrams[i] for i in train_idx]
        rho_g = pwg_bandwidth(train_diagrams)
        return [
            {"rho_g": rho_g, "c": c, "tau": tau, "delta": 10}
            for c in pwg_c_tau_grid()
            for tau in pwg_c_tau_grid()
        ]

    def _pwg_inner_matrices(self, rho_g: float, c: float, delta: int):
        key = (rho_g, c, delta)
        if key not in self._pwg_inners:
            n = len(self.diagrams)
            cross = np.empty((n, n), dtype=np.float64)
            for i in range(n):
                for j in range(i, n):
                    cross[i, j] = cross[j, i] = pwg_embedding_inner(
                        self.diagrams[i], self.diagrams[j], rho_g, c, delta
                    )
            self._pwg_inners[key] = cross
        return self._pwg_inners[key]

    def gram(self, params: dict) -> np.ndarray:
        key = tuple(sorted(params.items()))
        if key in self._grams:
            return self._grams[key]
        if self.kind == "pss":
            values = PssKernel(**params).gram(self.diagrams)
        elif self.kind == "sw":
            values = np.exp(-self._sw_distances() / (2.0 * params["sigma"] ** 2))
        else:
            cross = self._pwg_inner_matrices(params["rho_g"], params["c"], params["delta"])
            self_inner = np.diag(cross)
            sq = np.maximum(self_inner[:, None] + self_inner[None, :] - 2.0 * cross, 0.0)
            values = np.exp(-sq / (2.0 * params["tau"] ** 2))
        if not np.isfinite(values).all():
            raise ArithmeticError(f"{self.kind} Gram matrix has non-finite entries")
        self._grams[key] = values
        return values


def _scaling_row_name(scaling: str, aux: str, top_k: int | None):
    if scaling == "none":
        return {"scaling": "none", "aux": ""}
    if scaling == "augment":
        return {"scaling": "augment", "aux": aux}
    return {"scaling": f"compress(rho={top_k})", "aux": aux}


def run_experiment(samples_pairs, labels, homology_dim: int = 1,
                   kernels=("pss", "sw"), scalings=SCALING_CHOICES,
                   aux: str = "persistence", top_k: int | None = 10,
                   repetitions: int = 3, n_folds: int = 5, seed: int = 0,
                   train_fraction: float = 0.7, n_slices: int = 10,
                   average: str = "macro", essential="drop"):
    """Repeated split / CV / test evaluation; returns (report, timings).

    The report is fully deterministic for a fixed seed; wall-clock validation
    times live in the separate timings structure.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    keep = [i for i, p in enumerate(samples_pairs) if p is not None]
    labels = np.asarray([str(labels[i]) for i in keep])
    full_diagrams = [
        diagrams_from_pairs(samples_pairs[i], homology_dim, essential=essential) for i in keep
    ]
    zetas = zeta_grid()
    report_rows = []
    timing_rows = []
    for kind in kernels:
        for scaling in scalings:
            diagrams = prepare_variant_diagrams(full_diagrams, scaling, top_k, aux)
            source = GramSource(kind, diagrams, n_slices=n_slices)
            per_run = []
            run_seconds = []
            for rep in range(repetitions):
                rep_seed = seed * 1009 + rep
                rng = np.random.default_rng([seed, rep])
                train_idx, test_idx = stratified_split(labels, 1.0 - train_fraction, rng)
                grid = source.grid(train_idx)
                producer = lambda params: source.gram(params)[np.ix_(train_idx, train_idx)]
                cv = cross_validate(producer, grid, zetas, labels[train_idx],
                                    n_folds=n_folds, seed=rep_seed, average=average)
                chosen = cv.selected
                K_full = source.gram(chosen.kernel_params)
                model = train_ovr(K_full[np.ix_(train_idx, train_idx)],
                                  labels[train_idx], chosen.zeta)
                pred = model.predict(K_full[np.ix_(test_idx, train_idx)])
                acc, f1 = scores(labels[test_idx], pred, average=average)
                per_run.append({
                    "rep": rep,
                    "accuracy": acc,
                    "f1": f1,
                    "selected_kernel_params": chosen.kernel_params,
                    "selected_zeta": chosen.zeta,
                    "cv_mean_accuracy": chosen.mean_accuracy,
                })
                run_seconds.append(cv.validation_seconds)
            row = {"kernel": kind, **_scaling_row_name(scaling, aux, top_k)}
            row["accuracy"] = float(np.mean([r["accuracy"] for r in per_run]))
            row["f1"] = float(np.mean([r["f1"] for r in per_run]))
            row["per_run"] = per_run
            report_rows.append(row)
            timing_rows.append({
                "kernel": kind, **_scaling_row_name(scaling, aux, top_k),
                "validation_seconds": float(np.sum(run_seconds)),
                "per_run_seconds": [float(s) for s in run_seconds],
            })
    report = {
        "config": {
            "homology_dim": homology_dim,
            "kernels": list(kernels),
            "scalings": list(scalings),
            "aux": aux,
            "top_k": top_k,
            "repetitions": repetitions,
            "n_folds": n_folds,
            "seed": seed,
            "train_fraction": train_fraction,
            "n_slices": n_slices,
            "average": average,
            "n_samples": len(full_diagrams),
        },
        "rows": report_rows,
    }
    timings = {"rows": timing_rows}
    return report, timings


def report_table(report: dict, timings: dict | None = None) -> str:
    """Human-readable results table (kernel, scaling, aux, accuracy, f1, time)."""
    header = f"{'kernel':8s} {'scaling':18s} {'aux':12s} {'accuracy':>9s} {'f1':>9s}"
    times = {}
    if timings is not None:
        header += f" {'validation time (s)':>20s}"
        times = {
            (t["kernel"], t["scaling"], t["aux"]): t["validation_seconds"]
            for t in timings["rows"]
        }
    lines = [header, "-" * len(header)]
    for row in report["rows"]:
        line = (
            f"{row['kernel']:8s} {row['scaling']:18s} {row['aux']:12s} "
            f"{row['accuracy']:9.3f} {row['f1']:9.3f}"
        )
        key = (row["kernel"], row["scaling"], row["aux"])
        if key in times:
            line += f" {times[key]:20.1f}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def runs_csv(report: dict) -> str:
    """Plot-ready per-run scores, one row per (kernel, scaling, repetition)."""
    lines = ["kernel,scaling,aux,rep,accuracy,f1"]
    for row in report["rows"]:
        for run in row["per_run"]:
            lines.append(
                f"{row['kernel']},{row['scaling']},{row['aux']},"
                f"{run['rep']},{run['accuracy']!r},{run['f1']!r}"
            )
    return "\n".join(lines) + "\n"


def oracle_equivalence_check(n_clouds: int = 50, point_range=(5, 8), dims=(0, 1),
                             seed: int = 0, offset: float = 1e-6):
    """Compare pair-derived Betti counts with the brute-force rank oracle.

    Returns a list of mismatch records (empty when the reduction pipeline and
    the oracle agree at every critical radius, shifted by +/- offset).
    """
    from .oracle import betti_number_oracle
    from .persistence import betti_from_pairs, build_rips_filtration, compute_persistence

    rng = np.random.default_rng(seed)
    failures = []
    max_dim = max(dims)
    for t in range(n_clouds):
        n = int(rng.integers(point_range[0], point_range[1] + 1))
        cloud = rng.uniform(0.0, 1.0, size=(n, 2))
        dm = pairwise_distances(cloud)
        pairs = compute_persistence(build_rips_filtration(dm, max_dim, threshold=math.inf))
        crit = np.unique(dm[np.triu_indices(n, k=1)])
        radii = np.concatenate([crit - offset, crit, crit + offset, [0.0]])
        for eps in radii:
            for r in dims:
                got = betti_from_pairs(pairs, r, eps)
                expected = betti_number_oracle(dm, eps, r)
                if got != expected:
                    failures.append(
                        {"cloud": t, "eps": float(eps), "dim": r,
                         "pairs": got, "oracle": expected}
                    )
    return failures
