"""Unsupervised anomaly scorers behind one orientation contract.

All three detectors (multivariate normal density, isolation forest, PCA
reconstruction error) return scores where HIGHER means MORE anomalous. The
MVN detector scores in negative log-density, since the raw density underflows
at realistic dimensionalities; this preserves all rankings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ContractViolation, EvaluationError, FitError
from .seeding import rng_from

EULER_GAMMA = 0.5772156649015329
COV_REG_SCALE = 1e-6


def _as_matrix(h) -> np.ndarray:
    x = np.asarray(h, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2:
        raise ContractViolation(f"expected (n, d) representations, got shape {x.shape}")
    return x


# ---------------------------------------------------------------------------
# Multivariate normal density
# ---------------------------------------------------------------------------


@dataclass
class MvnModel:
    mu: np.ndarray
    sigma: np.ndarray
    chol: np.ndarray = field(repr=False)
    log_det: float = 0.0

    @property
    def dim(self) -> int:
        return self.mu.shape[0]


def fit_mvn(h) -> MvnModel:
    """Mean and (population) covariance of the training representations.

    The covariance gets a scale-aware ridge, lambda = 1e-6 * trace(Sigma)/d,
    guaranteeing a Cholesky factor exists.
    """
    x = _as_matrix(h)
    n, d = x.shape
    if n < 2:
        raise FitError(f"MVN fit needs at least 2 samples, got {n}")
    mu = x.mean(axis=0)
    centered = x - mu
    sigma = centered.T @ centered / n
    trace = float(np.trace(sigma))
    if trace <= 0.0:
        raise FitError("MVN fit: training data has zero variance")
    sigma = sigma + (COV_REG_SCALE * trace / d) * np.eye(d)
    chol = np.linalg.cholesky(sigma)
    log_det = 2.0 * float(np.log(np.diag(chol)).sum())
    return MvnModel(mu=mu, sigma=sigma, chol=chol, log_det=log_det)


def log_density_mvn(m: MvnModel, h) -> np.ndarray:
    """Gaussian log-density of each row of h, via the Cholesky factor."""
    x = _as_matrix(h)
    if x.shape[1] != m.dim:
        raise ContractViolation(f"representation dim {x.shape[1]} != model dim {m.dim}")
    z = solve_triangular(m.chol, (x - m.mu).T, lower=True)
    maha = np.sum(z * z, axis=0)
    return -0.5 * (m.dim * math.log(2.0 * math.pi) + m.log_det + maha)


def score_mvn(m: MvnModel, h) -> np.ndarray:
    """Negative log-density: higher = more anomalous."""
    return -log_density_mvn(m, h)


# ---------------------------------------------------------------------------
# Isolation forest
# ---------------------------------------------------------------------------


@dataclass
class IsolationTree:
    """One tree in flat-array form; node 0 is the root.

    Internal nodes carry (feature, threshold, left, right); leaves have
    feature == -1 and carry the number of training points they hold.
    """

    feature: np.ndarray  # (n_nodes,) int64, -1 for leaves
    threshold: np.ndarray  # (n_nodes,) float64
    left: np.ndarray  # (n_nodes,) int64
    right: np.ndarray  # (n_nodes,) int64
    size: np.ndarray  # (n_nodes,) int64, leaf sizes (0 for internal nodes)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)


@dataclass
class IForestModel:
    trees: list[IsolationTree]
    subsample_size: int
    c_n: float
    seed: int
    dim: int


def average_path_length(n: int) -> float:
    """c(n): expected unsuccessful-search path length in a BST with n points,
    2*H(n-1) - 2(n-1)/n using the harmonic approximation H(i) = ln(i) + gamma."""
    if n <= 1:
        return 0.0
    return 2.0 * (math.log(n - 1) + EULER_GAMMA) - 2.0 * (n - 1) / n


class _TreeBuilder:
    def __init__(self, x: np.ndarray, rng: np.random.Generator, depth_cap: int):
        self.x = x
        self.rng = rng
        self.depth_cap = depth_cap
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.size: list[int] = []

    def _add_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.size.append(0)
        return len(self.feature) - 1

    def build(self, idx: np.ndarray, depth: int) -> int:
        node = self._add_node()
        pts = self.x[idx]
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        splittable = np.flatnonzero(hi > lo)
        if depth >= self.depth_cap or len(idx) <= 1 or splittable.size == 0:
            self.size[node] = len(idx)
            return node
        feat = int(splittable[self.rng.integers(splittable.size)])
        split = float(self.rng.uniform(lo[feat], hi[feat]))
        go_left = pts[:, feat] < split
        # A uniform draw can coincide with the minimum; force a real split.
        if not go_left.any():
            go_left = pts[:, feat] <= lo[feat]
        self.feature[node] = feat
        self.threshold[node] = split
        self.left[node] = self.build(idx[go_left], depth + 1)
        self.right[node] = self.build(idx[~go_left], depth + 1)
        return node

    def finish(self) -> IsolationTree:
        return IsolationTree(
            feature=np.array(self.feature, dtype=np.int64),
            threshold=np.array(self.threshold, dtype=np.float64),
            left=np.array(self.left, dtype=np.int64),
            right=np.array(self.right, dtype=np.int64),
            size=np.array(self.size, dtype=np.int64),
        )


def fit_iforest(h, n_trees: int = 100, subsample: int | None = None, seed: int = 0) -> IForestModel:
    """Grow an ensemble of isolation trees on seeded subsamples.

    Each tree takes a without-replacement subsample (default min(256, n)),
    splits on a uniformly drawn feature with positive range at a uniform
    value within the node's range, and stops at singletons, duplicate
    points, or depth ceil(log2(subsample)).
    """
    x = _as_matrix(h)
    n = x.shape[0]
    if n < 2:
        raise FitError(f"isolation forest fit needs at least 2 samples, got {n}")
    if n_trees < 1:
        raise FitError(f"n_trees must be >= 1, got {n_trees}")
    if subsample is None:
        subsample = min(256, n)
    subsample = min(subsample, n)
    if subsample < 2:
        raise FitError(f"subsample must be >= 2, got {subsample}")
    depth_cap = math.ceil(math.log2(subsample))
    trees = []
    for i in range(n_trees):
        rng = rng_from(seed, "iforest", i)
        idx = rng.choice(n, size=subsample, replace=False)
        builder = _TreeBuilder(x, rng, depth_cap)
        builder.build(idx, 0)
        trees.append(builder.finish())
    return IForestModel(
        trees=trees,
        subsample_size=subsample,
        c_n=average_path_length(subsample),
        seed=seed,
        dim=x.shape[1],
    )


def tree_path_length(tree: IsolationTree, point: np.ndarray) -> float:
    """Depth at which `point` lands in a leaf, extended by c(leaf size)."""
    node = 0
    depth = 0
    while tree.feature[node] >= 0:
        if point[tree.feature[node]] < tree.threshold[node]:
            node = int(tree.left[node])
        else:
            node = int(tree.right[node])
        depth += 1
    return depth + average_path_length(int(tree.size[node]))


def expected_path_length(m: IForestModel, h) -> np.ndarray:
    x = _as_matrix(h)
    if x.shape[1] != m.dim:
        raise ContractViolation(f"representation dim {x.shape[1]} != model dim {m.dim}")
    out = np.empty(x.shape[0])
    for i, point in enumerate(x):
        out[i] = sum(tree_path_length(t, point) for t in m.trees) / len(m.trees)
    return out


def score_iforest(m: IForestModel, h) -> np.ndarray:
    """s = 2^(-E[path length] / c(N)); in (0, 1), higher = more anomalous."""
    return np.exp2(-expected_path_length(m, h) / m.c_n)


# ---------------------------------------------------------------------------
# PCA reconstruction error
# ---------------------------------------------------------------------------


@dataclass
class PcaModel:
    mean: np.ndarray
    basis: np.ndarray  # (d, k) orthonormal columns
    eigenvalues: np.ndarray  # all d eigenvalues, descending
    variance_threshold: float

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def k(self) -> int:
        return self.basis.shape[1]


def fit_pca(h, variance_threshold: float = 0.99) -> PcaModel:
    """Keep the smallest number of principal directions whose cumulative
    explained variance reaches the threshold.

    Eigenvector signs follow a deterministic convention: the entry of
    largest magnitude is made positive.
    """
    if not 0 < variance_threshold <= 1.0:
        raise FitError(f"variance_threshold must be in (0, 1], got {variance_threshold}")
    x = _as_matrix(h)
    n, d = x.shape
    if n < 2:
        raise FitError(f"PCA fit needs at least 2 samples, got {n}")
    mean = x.mean(axis=0)
    centered = x - mean
    sigma = centered.T @ centered / n
    eigvals, eigvecs = np.linalg.eigh(sigma)
    eigvals = eigvals[::-1]
    eigvecs = eigvecs[:, ::-1]
    eigvals = np.clip(eigvals, 0.0, None)
    total = float(eigvals.sum())
    if total <= 0.0:
        raise FitError("PCA fit: training data has zero variance")
    cum = np.cumsum(eigvals) / total
    k = int(np.searchsorted(cum, variance_threshold - 1e-12) + 1)
    k = min(k, d)
    basis = eigvecs[:, :k].copy()
    for j in range(k):
        pivot = np.argmax(np.abs(basis[:, j]))
        if basis[pivot, j] < 0:
            basis[:, j] = -basis[:, j]
    return PcaModel(
        mean=mean, basis=basis, eigenvalues=eigvals, variance_threshold=variance_threshold
    )


def score_pca(m: PcaModel, h) -> np.ndarray:
    """Squared norm of the residual after projecting onto the retained
    subspace; higher = more anomalous."""
    x = _as_matrix(h)
    if x.shape[1] != m.dim:
        raise ContractViolation(f"representation dim {x.shape[1]} != model dim {m.dim}")
    centered = x - m.mean
    coeffs = centered @ m.basis
    residual = centered - coeffs @ m.basis.T
    return np.sum(residual * residual, axis=1)


# ---------------------------------------------------------------------------
# Unified front end
# ---------------------------------------------------------------------------

DETECTOR_KINDS = ("mvn", "iforest", "pca")


@dataclass(frozen=True)
class DetectorSettings:
    kind: str
    n_trees: int = 100
    subsample: int | None = None
    variance_threshold: float = 0.99

    def __post_init__(self):
        if self.kind not in DETECTOR_KINDS:
            raise ContractViolation(f"unknown detector kind {self.kind!r}")


@dataclass
class Detector:
    """A fitted scorer with the unified higher-is-more-anomalous contract."""

    settings: DetectorSettings
    model: object
    fit_seed: int

    def score(self, h) -> np.ndarray:
        if self.settings.kind == "mvn":
            return score_mvn(self.model, h)
        if self.settings.kind == "iforest":
            return score_iforest(self.model, h)
        return score_pca(self.model, h)


def fit_detector(settings: DetectorSettings, h, seed: int = 0) -> Detector:
    if settings.kind == "mvn":
        model = fit_mvn(h)
    elif settings.kind == "iforest":
        model = fit_iforest(h, n_trees=settings.n_trees, subsample=settings.subsample, seed=seed)
    else:
        model = fit_pca(h, variance_threshold=settings.variance_threshold)
    return Detector(settings=settings, model=model, fit_seed=seed)


# ---------------------------------------------------------------------------
# AUC
# ---------------------------------------------------------------------------


def _tied_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the group average."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def auc(scores_normal, scores_anomalous) -> float:
    """P(anomalous score > normal score) + 0.5 * P(tie), rank-based.

    Equivalent to the Mann-Whitney U statistic with the anomalous class as
    positive under the higher-is-anomalous orientation.
    """
    neg = np.asarray(scores_normal, dtype=np.float64).ravel()
    pos = np.asarray(scores_anomalous, dtype=np.float64).ravel()
    if neg.size == 0 or pos.size == 0:
        raise EvaluationError("AUC needs at least one normal and one anomalous score")
    ranks = _tied_ranks(np.concatenate([neg, pos]))
    rank_sum_pos = ranks[neg.size :].sum()
    u = rank_sum_pos - pos.size * (pos.size + 1) / 2.0
    return float(u / (pos.size * neg.size))
