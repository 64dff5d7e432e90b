"""Dense numerical kernels used by the classifiers.

Everything here is written against small dimensions (d <= a few dozen):
unbiased covariance estimation, a cyclic Jacobi eigensolver for symmetric
matrices, Cholesky factorisation/solves for SPD systems, principal-component
analysis and feature standardisation.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadComponentCount,
    DimensionMismatch,
    FewerThanTwoSamples,
    NoConvergence,
    NotPositiveDefinite,
    NotSymmetric,
)

RIDGE_FACTOR = 1e-8
JACOBI_MAX_SWEEPS = 100
JACOBI_TOL = 1e-12


class CovMode(str, enum.Enum):
    """Covariance estimation mode: full matrix or diagonal only."""

    FULL = "full"
    DIAGONAL = "diagonal"


@dataclass(frozen=True)
class CovarianceEstimate:
    """Sample mean and unbiased (n-1) covariance of a set of row vectors."""

    mean: np.ndarray
    matrix: np.ndarray  # d x d; off-diagonal zero in DIAGONAL mode
    mode: CovMode
    count: int


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class PrincipalComponentBasis:
    """PCA basis: center, component columns and explained-variance profile."""

    center: np.ndarray
    components: np.ndarray        # d x d, column i = i-th component
    eigenvalues: np.ndarray       # descending, clipped at zero
    variance_explained: np.ndarray  # cumulative fractions, last ~ 1


@dataclass(frozen=True)
class Standardizer:
    """Per-feature affine map to zero mean and unit spread."""

    means: np.ndarray
    scales: np.ndarray

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x - self.means) / self.scales

    def invert(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return z * self.scales + self.means


def _as_matrix(vectors: np.ndarray) -> np.ndarray:
    x = np.asarray(vectors, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d sample array, got ndim={x.ndim}")
    return x


def sample_mean_covariance(vectors: np.ndarray, mode: CovMode = CovMode.FULL) -> CovarianceEstimate:
    """Unbiased sample mean/covariance of row vectors.

    Raises FewerThanTwoSamples when n < 2 (the n-1 denominator needs two rows).
    """
    x = _as_matrix(vectors)
    n, d = x.shape
    if n < 2:
        raise FewerThanTwoSamples(f"covariance needs >= 2 samples, got {n}")
    mode = CovMode(mode)
    mean = x.mean(axis=0)
    centered = x - mean
    if mode is CovMode.FULL:
        matrix = centered.T @ centered / (n - 1)
        matrix = 0.5 * (matrix + matrix.T)
    else:
        matrix = np.diag((centered * centered).sum(axis=0) / (n - 1))
    return CovarianceEstimate(mean=mean, matrix=matrix, mode=mode, count=n)


def ridge_value(matrix: np.ndarray) -> float:
    """Diagonal ridge proportional to the mean eigenvalue: 1e-8 * trace/d."""
    m = np.asarray(matrix, dtype=float)
    d = m.shape[0]
    return RIDGE_FACTOR * float(np.trace(m)) / d


def add_ridge(matrix: np.ndarray) -> np.ndarray:
    """Return matrix + ridge_value(matrix) * I."""
    m = np.array(matrix, dtype=float, copy=True)
    m[np.diag_indices_from(m)] += ridge_value(m)
    return m


def _check_symmetric(matrix: np.ndarray) -> np.ndarray:
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    scale = float(np.abs(a).max()) if a.size else 0.0
    if not np.all(np.abs(a - a.T) <= 1e-10 * (1.0 + scale)):
        raise NotSymmetric("matrix is not symmetric")
    return a


def eigen_symmetric(matrix: np.ndarray,
                    max_sweeps: int = JACOBI_MAX_SWEEPS,
                    tol: float = JACOBI_TOL) -> EigenDecomposition:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps the strict upper triangle in row-major order, rotating each
    off-diagonal entry to zero, until the off-diagonal Frobenius norm falls
    below tol relative to the matrix norm. Deterministic; raises
    NoConvergence after max_sweeps sweeps.
    """
    a = _check_symmetric(matrix).copy()
    d = a.shape[0]
    v = np.eye(d)
    if d == 1:
        return EigenDecomposition(eigenvalues=a.diagonal().copy(), eigenvectors=v)
    norm = float(np.sqrt((a * a).sum()))
    threshold = tol * max(norm, 1.0)

    def off_norm(m: np.ndarray) -> float:
        off = m - np.diag(m.diagonal())
        return float(np.sqrt((off * off).sum()))

    converged = off_norm(a) <= threshold
    sweeps = 0
    while not converged:
        if sweeps >= max_sweeps:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J applied as column then row rotation
                col_p = c * a[:, p] - s * a[:, q]
                col_q = s * a[:, p] + c * a[:, q]
                a[:, p] = col_p
                a[:, q] = col_q
                row_p = c * a[p, :] - s * a[q, :]
                row_q = s * a[p, :] + c * a[q, :]
                a[p, :] = row_p
                a[q, :] = row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                vcol_p = c * v[:, p] - s * v[:, q]
                vcol_q = s * v[:, p] + c * v[:, q]
                v[:, p] = vcol_p
                v[:, q] = vcol_q
        sweeps += 1
        converged = off_norm(a) <= threshold

    values = a.diagonal().copy()
    order = np.argsort(values, kind="stable")
    return EigenDecomposition(eigenvalues=values[order], eigenvectors=v[:, order])


def cholesky_spd(matrix: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of an SPD matrix; NotPositiveDefinite on pivot <= 0."""
    a = _check_symmetric(matrix)
    d = a.shape[0]
    lower = np.zeros((d, d))
    for j in range(d):
        pivot = a[j, j] - lower[j, :j] @ lower[j, :j]
        if pivot <= 0.0:
            raise NotPositiveDefinite(f"non-positive pivot at column {j}")
        lower[j, j] = np.sqrt(pivot)
        if j + 1 < d:
            lower[j + 1:, j] = (a[j + 1:, j] - lower[j + 1:, :j] @ lower[j, :j]) / lower[j, j]
    return lower


def solve_lower_triangular(lower: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Forward substitution; rhs may be a vector or a matrix of columns."""
    d = lower.shape[0]
    b = np.asarray(rhs, dtype=float)
    single = b.ndim == 1
    x = np.array(b if not single else b[:, None], dtype=float, copy=True)
    for i in range(d):
        if i:
            x[i] -= lower[i, :i] @ x[:i]
        x[i] /= lower[i, i]
    return x[:, 0] if single else x


def solve_upper_triangular(upper: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Back substitution; rhs may be a vector or a matrix of columns."""
    d = upper.shape[0]
    b = np.asarray(rhs, dtype=float)
    single = b.ndim == 1
    x = np.array(b if not single else b[:, None], dtype=float, copy=True)
    for i in range(d - 1, -1, -1):
        if i + 1 < d:
            x[i] -= upper[i, i + 1:] @ x[i + 1:]
        x[i] /= upper[i, i]
    return x[:, 0] if single else x


def solve_spd(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve A x = b for SPD A via Cholesky. Callers ridge A beforehand."""
    a = np.asarray(matrix, dtype=float)
    b = np.asarray(rhs, dtype=float)
    if b.shape[0] != a.shape[0]:
        raise DimensionMismatch(f"rhs length {b.shape[0]} != matrix order {a.shape[0]}")
    lower = cholesky_spd(a)
    return solve_upper_triangular(lower.T, solve_lower_triangular(lower, b))


def log_det_spd(matrix: np.ndarray) -> float:
    """log-determinant of an SPD matrix via its Cholesky factor."""
    lower = cholesky_spd(matrix)
    return 2.0 * float(np.log(lower.diagonal()).sum())


def pca_fit(vectors: np.ndarray) -> PrincipalComponentBasis:
    """Principal components of row vectors, ordered by descending variance.

    Sign convention: the largest-magnitude entry of each component is
    positive. variance_explained holds cumulative eigenvalue fractions.
    """
    x = _as_matrix(vectors)
    est = sample_mean_covariance(x, CovMode.FULL)
    eig = eigen_symmetric(est.matrix)
    order = np.argsort(-eig.eigenvalues, kind="stable")
    values = np.clip(eig.eigenvalues[order], 0.0, None)
    components = eig.eigenvectors[:, order].copy()
    for i in range(components.shape[1]):
        anchor = int(np.argmax(np.abs(components[:, i])))
        if components[anchor, i] < 0.0:
            components[:, i] = -components[:, i]
    total = float(values.sum())
    if total > 0.0:
        explained = np.cumsum(values) / total
    else:
        explained = np.ones_like(values)
    return PrincipalComponentBasis(center=est.mean, components=components,
                                   eigenvalues=values, variance_explained=explained)


def pca_transform(basis: PrincipalComponentBasis, x: np.ndarray, m: int) -> np.ndarray:
    """Coordinates of x (a vector or rows) on the first m components."""
    d = basis.components.shape[0]
    if not 1 <= int(m) <= d:
        raise BadComponentCount(f"component count {m} outside 1..{d}")
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1] != d:
        raise DimensionMismatch(f"vector length {arr.shape[-1]} != basis dimension {d}")
    return (arr - basis.center) @ basis.components[:, :int(m)]


SCALE_FLOOR = 1e-12


def standardizer_fit(vectors: np.ndarray) -> Standardizer:
    """Fit per-feature means and (n-1) standard deviations, clamped below."""
    x = _as_matrix(vectors)
    if x.shape[0] < 2:
        raise FewerThanTwoSamples(f"standardizer needs >= 2 samples, got {x.shape[0]}")
    means = x.mean(axis=0)
    centered = x - means
    scales = np.sqrt((centered * centered).sum(axis=0) / (x.shape[0] - 1))
    return Standardizer(means=means, scales=np.maximum(scales, SCALE_FLOOR))
