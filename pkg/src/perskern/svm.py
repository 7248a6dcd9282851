"""Soft-margin SVM on precomputed Gram matrices.

The dual is solved by sequential minimal optimization with a deterministic
second-choice heuristic (no randomness: identical inputs give identical
models). One-vs-rest handles multiclass, and a stratified k-fold driver does
hyperparameter selection over (kernel parameters x box bound) grids.
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

# internal SMO stopping tolerance; tighter than the 1e-3 KKT contract so the
# contract still holds after the final bias recomputation recentres h
DEFAULT_TOL = 5e-4
DEFAULT_MAX_PASSES = 10
KKT_CONTRACT_TOL = 1e-3


@dataclass
class TrainedBinarySvm:
    """Dual solution of one binary soft-margin problem."""

    alpha: np.ndarray
    y: np.ndarray
    bias: float
    box: float

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.alpha > 0)

    def decision_values(self, k_rows: np.ndarray) -> np.ndarray:
        """h(x) = sum_i alpha_i y_i k(x_i, x) + b for each row of kernel values."""
        k_rows = np.atleast_2d(np.asarray(k_rows, dtype=np.float64))
        if k_rows.shape[1] != len(self.alpha):
            raise ValueError(
                f"kernel row length {k_rows.shape[1]} does not match training size {len(self.alpha)}"
            )
        return k_rows @ (self.alpha * self.y) + self.bias

    def decision_value(self, k_row) -> float:
        return float(self.decision_values(k_row)[0])

    def predict(self, k_rows) -> np.ndarray:
        """sign(h); h == 0 classifies as +1."""
        return np.where(self.decision_values(k_rows) >= 0.0, 1.0, -1.0)


def _pair_step(K, y, alpha, f, b, i1, i2, box, eps=1e-12):
    """Optimize the dual over the pair (i1, i2); returns (changed, new_bias)."""
    if i1 == i2:
        return False, b
    a1, a2 = alpha[i1], alpha[i2]
    y1, y2 = y[i1], y[i2]
    e1 = f[i1] + b - y1
    e2 = f[i2] + b - y2
    s = y1 * y2
    if s < 0:
        low = max(0.0, a2 - a1)
        high = min(box, box + a2 - a1)
    else:
        low = max(0.0, a1 + a2 - box)
        high = min(box, a1 + a2)
    if low >= high:
        return False, b
    k11, k22, k12 = K[i1, i1], K[i2, i2], K[i1, i2]
    eta = k11 + k22 - 2.0 * k12
    if eta > 0.0:
        a2_new = a2 + y2 * (e1 - e2) / eta
        a2_new = min(max(a2_new, low), high)
    else:
        # flat direction (semidefinite Gram): compare dual objective at the ends
        gamma = a1 + s * a2
        v1 = f[i1] - a1 * y1 * k11 - a2 * y2 * k12
        v2 = f[i2] - a1 * y1 * k12 - a2 * y2 * k22

        def objective(t):
            a1t = gamma - s * t
            return (
                0.5 * k11 * a1t * a1t
                + 0.5 * k22 * t * t
                + s * k12 * a1t * t
                + y1 * a1t * v1
                + y2 * t * v2
                - a1t
                - t
            )

        obj_low, obj_high = objective(low), objective(high)
        if obj_low < obj_high - eps:
            a2_new = low
        elif obj_high < obj_low - eps:
            a2_new = high
        else:
            return False, b
    if abs(a2_new - a2) < eps * (a2_new + a2 + eps):
        return False, b
    a1_new = a1 + s * (a2 - a2_new)
    a1_new = min(max(a1_new, 0.0), box)

    d1 = y1 * (a1_new - a1)
    d2 = y2 * (a2_new - a2)
    b1 = b - e1 - d1 * k11 - d2 * k12
    b2 = b - e2 - d1 * k12 - d2 * k22
    if 0.0 < a1_new < box:
        b_new = b1
    elif 0.0 < a2_new < box:
        b_new = b2
    else:
        b_new = 0.5 * (b1 + b2)
    alpha[i1], alpha[i2] = a1_new, a2_new
    f += d1 * K[:, i1] + d2 * K[:, i2]
    return True, b_new


def _examine(K, y, alpha, f, b, i2, box, tol):
    e2 = f[i2] + b - y[i2]
    r2 = e2 * y[i2]
    if not ((r2 < -tol and alpha[i2] < box) or (r2 > tol and alpha[i2] > 0.0)):
        return False, b
    free = np.flatnonzero((alpha > 0.0) & (alpha < box))
    if len(free) > 1:
        errors = f[free] + b - y[free]
        i1 = int(free[np.argmax(np.abs(errors - e2))])
        changed, b = _pair_step(K, y, alpha, f, b, i1, i2, box)
        if changed:
            return True, b
    for i1 in free:
        changed, b = _pair_step(K, y, alpha, f, b, int(i1), i2, box)
        if changed:
            return True, b
    for i1 in range(len(y)):
        changed, b = _pair_step(K, y, alpha, f, b, i1, i2, box)
        if changed:
            return True, b
    return False, b


def _final_bias(K, y, alpha, box, tol):
    f = K @ (alpha * y)
    free = np.flatnonzero((alpha > tol * box) & (alpha < (1.0 - tol) * box))
    if len(free):
        return float(np.mean(y[free] - f[free]))
    # midpoint of the interval the bound constraints leave for the bias
    lo, hi = -np.inf, np.inf
    at_zero = alpha <= tol * box
    at_box = ~at_zero & (alpha >= (1.0 - tol) * box)
    pos, neg = y > 0, y < 0
    lows = np.concatenate([(1.0 - f)[at_zero & pos], (-1.0 - f)[at_box & neg]])
    highs = np.concatenate([(1.0 - f)[at_box & pos], (-1.0 - f)[at_zero & neg]])
    if len(lows):
        lo = lows.max()
    if len(highs):
        hi = highs.min()
    if not np.isfinite(lo):
        return float(hi) if np.isfinite(hi) else 0.0
    if not np.isfinite(hi):
        return float(lo)
    return float(0.5 * (lo + hi))


def train_binary(K, y, box: float, tol: float = DEFAULT_TOL,
                 max_passes: int = DEFAULT_MAX_PASSES,
                 max_iter: int | None = None,
                 check_psd: bool = False) -> TrainedBinarySvm:
    """Solve the soft-margin dual over a precomputed Gram matrix by SMO.

    The bias is recomputed after convergence as the mean of y_j - (K alpha y)_j
    over free support vectors, falling back to the midpoint of the interval
    the bound constraints allow.
    """
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    if K.shape != (n, n):
        raise ValueError(f"Gram shape {K.shape} does not match {n} labels")
    if box <= 0:
        raise ValueError("box bound must be positive")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise ValueError("training labels must contain both classes")
    if not np.all(np.abs(y) == 1.0):
        raise ValueError("binary labels must be +/-1")
    if check_psd:
        min_eig = float(np.linalg.eigvalsh(K)[0])
        if min_eig < -1e-8 * max(1.0, float(np.trace(K))):
            warnings.warn(
                f"Gram matrix is not positive semidefinite (min eigenvalue {min_eig:.3e}); "
                "training proceeds on the matrix as given"
            )
    if max_iter is None:
        max_iter = 1_000_000 * n

    alpha = np.zeros(n, dtype=np.float64)
    f = np.zeros(n, dtype=np.float64)
    b = 0.0
    examine_all = True
    idle_passes = 0
    iterations = 0
    while idle_passes < max_passes and iterations < max_iter:
        n_changed = 0
        if examine_all:
            targets = range(n)
        else:
            targets = np.flatnonzero((alpha > 0.0) & (alpha < box))
        for i2 in targets:
            changed, b = _examine(K, y, alpha, f, b, int(i2), box, tol)
            n_changed += changed
            iterations += 1
            if iterations >= max_iter:
                break
        if examine_all:
            if n_changed == 0:
                break  # every sample satisfies KKT within tol
            examine_all = False
        elif n_changed == 0:
            examine_all = True
        idle_passes = idle_passes + 1 if n_changed == 0 else 0

    bias = _final_bias(K, y, alpha, box, tol=1e-9)
    return TrainedBinarySvm(alpha=alpha, y=y, bias=bias, box=box)


def kkt_report(model: TrainedBinarySvm, K) -> dict:
    """Feasibility and KKT residuals of a trained model (for tests/diagnostics)."""
    K = np.asarray(K, dtype=np.float64)
    h = K @ (model.alpha * model.y) + model.bias
    free = (model.alpha > 1e-9 * model.box) & (model.alpha < (1.0 - 1e-9) * model.box)
    return {
        "dual_balance": float(abs(np.sum(model.alpha * model.y))),
        "box_violation": float(
            max(np.max(-model.alpha, initial=0.0), np.max(model.alpha - model.box, initial=0.0))
        ),
        "free_sv_residual": float(np.max(np.abs(model.y[free] * h[free] - 1.0), initial=0.0)),
    }


@dataclass
class OneVsRestSvm:
    """One binary model per class; prediction is the argmax decision value."""

    classes: np.ndarray
    models: list

    def decision_matrix(self, k_rows) -> np.ndarray:
        return np.stack([m.decision_values(k_rows) for m in self.models], axis=1)

    def predict(self, k_rows) -> np.ndarray:
        # argmax resolves ties towards the earlier class in ``classes`` order
        return self.classes[np.argmax(self.decision_matrix(k_rows), axis=1)]


def train_ovr(K, labels, box: float, **kwargs) -> OneVsRestSvm:
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if len(classes) < 2:
        raise ValueError("one-vs-rest needs at least two classes")
    models = []
    for cls in classes:
        y = np.where(labels == cls, 1.0, -1.0)
        models.append(train_binary(K, y, box, **kwargs))
    return OneVsRestSvm(classes=classes, models=models)


def predict_ovr(model: OneVsRestSvm, k_rows) -> np.ndarray:
    return model.predict(k_rows)


def scores(y_true, y_pred, average: str = "macro", positive=None) -> tuple[float, float]:
    """(accuracy, f1). Binary problems use the plain positive-class f1.

    With more than two classes the f1 is the unweighted (macro) mean of the
    per-class one-vs-rest f1 values unless ``average="weighted"``; a class
    with no true and no predicted positives contributes f1 = 0.
    """
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.size == 0 or y_true.shape != y_pred.shape:
        raise ValueError("score inputs must be equal-length and non-empty")
    accuracy = float(np.mean(y_true == y_pred))
    classes = np.unique(np.concatenate([y_true, y_pred]))

    def class_f1(cls):
        tp = np.sum((y_true == cls) & (y_pred == cls))
        fp = np.sum((y_true != cls) & (y_pred == cls))
        fn = np.sum((y_true == cls) & (y_pred != cls))
        denom = 2 * tp + fp + fn
        return 2.0 * tp / denom if denom > 0 else 0.0

    if len(classes) <= 2:
        if positive is None:
            positive = classes[-1]
        return accuracy, float(class_f1(positive))
    per_class = np.array([class_f1(c) for c in classes], dtype=np.float64)
    if average == "macro":
        return accuracy, float(per_class.mean())
    if average == "weighted":
        weights = np.array([np.sum(y_true == c) for c in classes], dtype=np.float64)
        if weights.sum() == 0:
            return accuracy, 0.0
        return accuracy, float(per_class @ weights / weights.sum())
    raise ValueError(f"unknown average {average!r}")


def stratified_folds(labels, n_folds: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Shuffled per-class round-robin assignment into n_folds test folds."""
    labels = np.asarray(labels)
    if n_folds < 2:
        raise ValueError("n_folds must be >= 2")
    folds: list[list[int]] = [[] for _ in range(n_folds)]
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        if len(idx) < n_folds:
            raise ValueError(
                f"class {cls!r} has {len(idx)} samples, fewer than {n_folds} folds; "
                "stratification would lose the class from some fold"
            )
        idx = rng.permutation(idx)
        for pos, sample in enumerate(idx):
            folds[pos % n_folds].append(int(sample))
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


def stratified_split(labels, test_fraction: float, rng: np.random.Generator):
    """Seeded stratified train/test split; returns (train_idx, test_idx)."""
    labels = np.asarray(labels)
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    train, test = [], []
    for cls in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == cls))
        n_test = int(round(test_fraction * len(idx)))
        n_test = min(max(n_test, 1), len(idx) - 1)
        test.extend(idx[:n_test])
        train.extend(idx[n_test:])
    return np.array(sorted(train), dtype=np.int64), np.array(sorted(test), dtype=np.int64)


@dataclass
class CvEntry:
    kernel_params: dict
    zeta: float
    fold_accuracies: list
    fold_f1s: list

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.fold_accuracies))

    @property
    def mean_f1(self) -> float:
        return float(np.mean(self.fold_f1s))

    def to_dict(self) -> dict:
        return {
            "kernel_params": self.kernel_params,
            "zeta": self.zeta,
            "fold_accuracies": list(self.fold_accuracies),
            "fold_f1s": list(self.fold_f1s),
            "mean_accuracy": self.mean_accuracy,
            "mean_f1": self.mean_f1,
        }


@dataclass
class CvReport:
    entries: list
    selected_index: int
    n_folds: int
    seed: int
    validation_seconds: float = field(default=0.0)

    @property
    def selected(self) -> CvEntry:
        return self.entries[self.selected_index]

    def to_dict(self, include_timing: bool = True) -> dict:
        out = {
            "entries": [e.to_dict() for e in self.entries],
            "selected_index": self.selected_index,
            "n_folds": self.n_folds,
            "seed": self.seed,
        }
        if include_timing:
            out["validation_seconds"] = self.validation_seconds
        return out


def cross_validate(gram_producer, kernel_grid, zetas, labels, n_folds: int = 5,
                   seed: int = 0, average: str = "macro") -> CvReport:
    """Stratified k-fold grid search over (kernel parameters x box bound).

    ``gram_producer(params)`` must return the full Gram matrix for one kernel
    configuration; folds only ever index the train x train and test x train
    blocks of it, so test rows cannot leak into training. Selection maximizes
    mean fold accuracy; ties prefer the smaller box bound, then the earlier
    kernel configuration.
    """
    labels = np.asarray(labels)
    folds = stratified_folds(labels, n_folds, np.random.default_rng(seed))
    all_idx = np.arange(len(labels))
    started = time.perf_counter()
    entries: list[CvEntry] = []
    best = -1
    for params in kernel_grid:
        K = np.asarray(gram_producer(params), dtype=np.float64)
        if K.shape != (len(labels), len(labels)):
            raise ValueError("gram_producer returned a matrix of the wrong shape")
        for zeta in zetas:
            accs, f1s = [], []
            for fold in folds:
                train_idx = np.setdiff1d(all_idx, fold, assume_unique=True)
                model = train_ovr(K[np.ix_(train_idx, train_idx)], labels[train_idx], zeta)
                pred = model.predict(K[np.ix_(fold, train_idx)])
                acc, f1 = scores(labels[fold], pred, average=average)
                accs.append(acc)
                f1s.append(f1)
            entries.append(CvEntry(dict(params), float(zeta), accs, f1s))
            i = len(entries) - 1
            if best < 0 or _better(entries[i], entries[best]):
                best = i
    return CvReport(
        entries=entries,
        selected_index=best,
        n_folds=n_folds,
        seed=seed,
        validation_seconds=time.perf_counter() - started,
    )


def _better(candidate: CvEntry, incumbent: CvEntry) -> bool:
    if candidate.mean_accuracy != incumbent.mean_accuracy:
        return candidate.mean_accuracy > incumbent.mean_accuracy
    return candidate.zeta < incumbent.zeta
