"""
Fisher discriminant analysis with the nearest-neighbor rule, and a
Gaussian-kernel SVM baseline trained by SMO.

Sample matrices are q x n: one column per document, as in TermDocMatrix.
"""
# topspace/classify.py
import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from sklearn.metrics.pairwise import rbf_kernel

from .corpus import Label
from .errors import DegenerateClassError
from .utils import TokenNormalizer

logger = logging.getLogger(__name__)

POSITIVE = Label.IDIOM
NEGATIVE = Label.LITERAL


@dataclass(frozen=True)
class ScatterSet:
    s_w: np.ndarray
    s_b: np.ndarray
    s_m: np.ndarray
    classes: Tuple
    class_means: Dict[object, np.ndarray]
    mixture_mean: np.ndarray
    priors: Dict[object, float]
    class_sizes: Dict[object, int]


@dataclass(frozen=True)
class FdaModel:
    w: np.ndarray
    train_projections: np.ndarray
    train_labels: Tuple
    k_neighbors: int
    scatter: ScatterSet

    def project(self, X) -> np.ndarray:
        """Проекции столбцов X (или одного вектора) на w."""
        X = np.asarray(X, dtype=float)
        return self.w @ X


@dataclass(frozen=True)
class SvmModel:
    support_vectors: np.ndarray   # n_sv x q
    dual_coef: np.ndarray         # alpha_i в [0, C]
    sv_signs: np.ndarray          # y_i = +1 (идиома) / -1
    bias: float
    gamma: float
    C: float
    converged: bool
    iterations: int
    constant_label: Optional[Label] = None

    def decision_function(self, x) -> float:
        if self.constant_label is not None:
            return 1.0 if self.constant_label is POSITIVE else -1.0
        if self.support_vectors.shape[0] == 0:
            return float(self.bias)
        x = np.asarray(x, dtype=float).reshape(1, -1)
        k = rbf_kernel(self.support_vectors, x, gamma=self.gamma)[:, 0]
        return float(np.sum(self.dual_coef * self.sv_signs * k) + self.bias)


def _as_samples(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"Expected a q x n matrix, got shape {X.shape}")
    return X


def scatter_matrices(X, labels: Sequence, classes: Optional[Sequence] = None) -> ScatterSet:
    """
    Нормированные матрицы рассеяния, для которых S_m = S_w + S_b точно:
    S_w = Σ p_j (1/l_j) Σ (x - m_j)(x - m_j)^t,  S_b = Σ p_j (m_j - m_0)(m_j - m_0)^t,
    S_m = (1/n) Σ (x - m_0)(x - m_0)^t,  p_j = l_j / n.
    """
    X = _as_samples(X)
    labels = list(labels)
    q, n = X.shape
    if n != len(labels):
        raise ValueError(f"{n} samples but {len(labels)} labels")
    if n < 2:
        raise DegenerateClassError("At least two samples are required")

    if classes is None:
        classes = tuple(sorted(set(labels), key=lambda c: getattr(c, 'value', c)))
    labels_arr = np.array([getattr(c, 'value', c) for c in labels], dtype=object)

    m0 = X.mean(axis=1)
    s_w = np.zeros((q, q))
    s_b = np.zeros((q, q))
    means, priors, sizes = {}, {}, {}
    for c in classes:
        mask = labels_arr == getattr(c, 'value', c)
        size = int(mask.sum())
        if size == 0:
            raise DegenerateClassError(f"Class {getattr(c, 'value', c)} has no samples")
        Xc = X[:, mask]
        mean = Xc.mean(axis=1)
        p = size / n
        centered = Xc - mean[:, np.newaxis]
        s_w += p * (centered @ centered.T) / size
        diff = mean - m0
        s_b += p * np.outer(diff, diff)
        means[c], priors[c], sizes[c] = mean, p, size

    centered_all = X - m0[:, np.newaxis]
    s_m = centered_all @ centered_all.T / n
    return ScatterSet(s_w, s_b, s_m, tuple(classes), means, m0, priors, sizes)


def fisher_criterion(w, scatter: ScatterSet) -> float:
    """J(w) = (w^t S_b w) / (w^t S_w w)."""
    w = np.asarray(w, dtype=float)
    numerator = float(w @ scatter.s_b @ w)
    denominator = float(w @ scatter.s_w @ w)
    if denominator <= 0:
        return np.inf if numerator > 0 else 0.0
    return numerator / denominator


def fit_fda(X, labels: Sequence, positive=POSITIVE, negative=NEGATIVE,
            k_neighbors: Optional[int] = None) -> FdaModel:
    """
    Двухклассовый FDA: (S_w + eps I) w = m_1 - m_2, eps = 1e-6 * trace(S_w) / q.
    k_neighbors=None: k = ceil(n/5).
    """
    X = _as_samples(X)
    q, n = X.shape
    if q == 0:
        raise DegenerateClassError("Feature space is empty (q = 0)")

    scatter = scatter_matrices(X, labels, classes=(positive, negative))
    direction = scatter.class_means[positive] - scatter.class_means[negative]

    trace = float(np.trace(scatter.s_w))
    ridge = 1e-6 * trace / q if trace > 0 else 1e-6
    w = np.linalg.solve(scatter.s_w + ridge * np.eye(q), direction)

    norm = np.linalg.norm(w)
    if norm == 0:
        logger.warning("⚠️ Средние классов совпадают, направление FDA выбрано по первой оси")
        w = np.zeros(q)
        w[0] = 1.0
    else:
        w = w / norm
    if w @ direction < 0:
        w = -w
    w.setflags(write=False)

    projections = w @ X
    projections.setflags(write=False)
    return FdaModel(
        w=w,
        train_projections=projections,
        train_labels=tuple(labels),
        k_neighbors=min(k_neighbors, n) if k_neighbors else TokenNormalizer.knn_neighbors(n),
        scatter=scatter,
    )


def knn_classify(model: FdaModel, query_projection: float, positive=POSITIVE):
    """
    Голосование k ближайших обучающих проекций; при равных расстояниях
    раньше идёт меньший индекс, ничья в голосовании -> positive (Idiom).
    """
    distances = np.abs(model.train_projections - float(query_projection))
    order = np.lexsort((np.arange(distances.shape[0]), distances))[:model.k_neighbors]
    votes = Counter(model.train_labels[i] for i in order)
    best = max(votes.values())
    winners = [label for label, count in votes.items() if count == best]
    if positive in winners:
        return positive
    return sorted(winners, key=lambda c: getattr(c, 'value', c))[0]


def fit_svm(X, labels: Sequence, C: float = 1.0, gamma: Optional[float] = None,
            tol: float = 1e-3, max_iter: Optional[int] = None, positive=POSITIVE,
            on_step: Optional[Callable[[np.ndarray], None]] = None) -> SvmModel:
    """
    SMO для двойственной задачи с гауссовым ядром exp(-gamma ||x - x'||^2).
    Пара выбирается как максимально нарушающая условия ККТ; остановка при
    невязке < tol или после 10 n^2 итераций (converged=False).
    """
    X = _as_samples(X)
    q, n = X.shape
    labels = list(labels)
    if n != len(labels):
        raise ValueError(f"{n} samples but {len(labels)} labels")
    if n == 0:
        raise DegenerateClassError("No training samples")
    gamma = float(gamma) if gamma is not None else 1.0 / max(q, 1)
    if max_iter is None:
        max_iter = 10 * n * n

    present = set(labels)
    if len(present) == 1:
        only = next(iter(present))
        logger.warning(f"⚠️ В обучении SVM только один класс ({getattr(only, 'value', only)})")
        return SvmModel(np.zeros((0, q)), np.zeros(0), np.zeros(0), 0.0, gamma, C,
                        True, 0, constant_label=only)

    y = np.array([1.0 if label == positive else -1.0 for label in labels])
    K = rbf_kernel(X.T, gamma=gamma)
    alpha = np.zeros(n)
    grad = -np.ones(n)

    converged = False
    iteration = 0
    while iteration < max_iter:
        score = -y * grad
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
        if not up.any() or not low.any():
            converged = True
            break
        i = int(np.argmax(np.where(up, score, -np.inf)))
        j = int(np.argmin(np.where(low, score, np.inf)))
        gap = score[i] - score[j]
        if gap < tol:
            converged = True
            break

        curvature = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if curvature <= 0:
            curvature = 1e-12
        step = min(
            gap / curvature,
            C - alpha[i] if y[i] > 0 else alpha[i],
            alpha[j] if y[j] > 0 else C - alpha[j],
        )
        alpha[i] = min(max(alpha[i] + y[i] * step, 0.0), C)
        alpha[j] = min(max(alpha[j] - y[j] * step, 0.0), C)
        grad += y * step * (K[:, i] - K[:, j])
        iteration += 1
        if on_step is not None:
            on_step(alpha.copy())

    if not converged:
        logger.warning(f"⚠️ SMO не сошёлся за {max_iter} итераций")

    score = -y * grad
    free = (alpha > 1e-12) & (alpha < C - 1e-12)
    if free.any():
        bias = float(score[free].mean())
    else:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
        upper = score[up].max() if up.any() else None
        lower = score[low].min() if low.any() else None
        bounds = [b for b in (upper, lower) if b is not None]
        bias = float(np.mean(bounds)) if bounds else 0.0

    support = alpha > 0
    return SvmModel(
        support_vectors=X.T[support].copy(),
        dual_coef=alpha[support].copy(),
        sv_signs=y[support].copy(),
        bias=bias,
        gamma=gamma,
        C=C,
        converged=converged,
        iterations=iteration,
    )


def svm_classify(model: SvmModel, x, positive=POSITIVE, negative=NEGATIVE):
    """Знак решающей функции; ровно 0 -> Idiom."""
    if model.constant_label is not None:
        return model.constant_label
    return positive if model.decision_function(x) >= 0 else negative


def dump_fda_model(model: FdaModel, path) -> None:
    with Path(path).open('w', encoding='utf-8', newline='\n') as f:
        f.write(f"k_neighbors {model.k_neighbors}\n")
        f.write('w ' + ' '.join(f"{v:.9f}" for v in model.w) + '\n')
        for value, label in zip(model.train_projections, model.train_labels):
            f.write(f"{getattr(label, 'value', label)} {value:.9f}\n")
