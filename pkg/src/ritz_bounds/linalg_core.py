"""Dense real symmetric linear algebra built on Jacobi rotations.

Both decompositions use a cyclic round-robin ordering: each round applies a
set of disjoint plane rotations at once, which keeps the Python overhead per
sweep proportional to the matrix size instead of its square.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptySpanError,
    NoConvergenceError,
    NotSymmetricError,
)

logger = logging.getLogger("ritz-bounds.linalg")

EPS = float(np.finfo(float).eps)
JACOBI_TOL = 1e-14
MAX_SWEEPS = 60


@dataclass(frozen=True)
class SpectralDecomp:
    """Eigenvalues in ascending order with matching orthonormal eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        """Return Q diag(lambda) Q^T."""
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.T


@dataclass(frozen=True)
class SvdDecomp:
    """Thin singular value decomposition A = U diag(s) Vt, s descending."""

    u: np.ndarray
    s: np.ndarray
    vt: np.ndarray

    def reconstruct(self) -> np.ndarray:
        """Return U diag(s) Vt."""
        return (self.u * self.s) @ self.vt


class OrthonormalColumns(NamedTuple):
    """Result of orthonormalize: the basis and how many inputs were dropped."""

    basis: np.ndarray
    dropped: int


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """
    Validate and copy an array-like into a finite 2-D float matrix.

    Args:
        a: Array-like input
        name: Label used in error messages

    Returns:
        A fresh float64 array with at least one row and one column
    """
    arr = np.array(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionMismatchError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def default_rank_tol(shape: tuple[int, ...]) -> float:
    """Relative rank threshold max(rows, cols) * machine epsilon."""
    return max(shape) * EPS


@lru_cache(maxsize=64)
def _round_robin(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Rounds of disjoint index pairs covering every pair (p, q), p < q, once."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = sorted((min(p, q), max(p, q)) for p, q in pairs if p < n and q < n)
        if pairs:
            rounds.append(
                (np.array([p for p, _ in pairs]), np.array([q for _, q in pairs]))
            )
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def _rotation(tau: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Smaller-angle Jacobi rotation t = tan(theta), c, s for cot(2 theta) = tau."""
    sign = np.where(tau >= 0.0, 1.0, -1.0)
    t = sign / (np.abs(tau) + np.hypot(1.0, tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    return t, c, t * c


def _off_norm(a: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.square(a - np.diag(np.diag(a))))))


def symmetric_eig(
    a,
    sym_tol: float = 1e-12,
    max_sweeps: int = MAX_SWEEPS,
) -> SpectralDecomp:
    """
    Eigendecomposition of a real symmetric matrix by cyclic Jacobi.

    Rotations below a threshold are skipped during the first sweeps; later
    off-diagonal entries negligible against their diagonal pair are set to
    zero. Iteration stops when the off-diagonal Frobenius norm is at most
    1e-14 times the Frobenius norm of the input.

    Args:
        a: Square matrix, symmetric within sym_tol
        sym_tol: Relative symmetry tolerance against the Frobenius norm
        max_sweeps: Sweep limit

    Returns:
        SpectralDecomp with ascending eigenvalues
    """
    work = as_matrix(a)
    n, m = work.shape
    if n != m:
        raise DimensionMismatchError(f"symmetric_eig needs a square matrix, got {work.shape}")

    scale = float(np.linalg.norm(work))
    asymmetry = float(np.max(np.abs(work - work.T)))
    if asymmetry > sym_tol * scale:
        raise NotSymmetricError(
            f"Matrix asymmetry {asymmetry:.3e} exceeds {sym_tol:.1e} * ||A|| = {sym_tol * scale:.3e}"
        )
    work = np.triu(work) + np.triu(work, 1).T
    vecs = np.eye(n)
    if n == 1 or scale == 0.0:
        return SpectralDecomp(np.diag(work).copy(), vecs)

    target = JACOBI_TOL * scale
    rounds = _round_robin(n)
    for sweep in range(max_sweeps + 1):
        off = _off_norm(work)
        if off <= target:
            break
        if sweep == max_sweeps:
            raise NoConvergenceError(
                f"Jacobi eigensolver did not converge in {max_sweeps} sweeps (off = {off:.3e})"
            )
        threshold = 0.2 * off / (n * n) if sweep < 3 else 0.0
        rotated = False
        for p, q in rounds:
            apq = work[p, q]
            app = work[p, p]
            aqq = work[q, q]
            active = np.abs(apq) > threshold
            if sweep >= 3:
                tiny = np.abs(apq) <= EPS * np.sqrt(np.abs(app * aqq))
                work[p[tiny], q[tiny]] = 0.0
                work[q[tiny], p[tiny]] = 0.0
                active &= ~tiny
            active &= apq != 0.0
            if not active.any():
                continue
            rotated = True
            p, q = p[active], q[active]
            apq, app, aqq = apq[active], app[active], aqq[active]

            t, c, s = _rotation((aqq - app) / (2.0 * apq))
            wp = work[:, p].copy()
            wq = work[:, q].copy()
            work[:, p] = c * wp - s * wq
            work[:, q] = s * wp + c * wq
            wp = work[p, :].copy()
            wq = work[q, :].copy()
            work[p, :] = c[:, None] * wp - s[:, None] * wq
            work[q, :] = s[:, None] * wp + c[:, None] * wq
            work[p, p] = app - t * apq
            work[q, q] = aqq + t * apq
            work[p, q] = 0.0
            work[q, p] = 0.0
            vp = vecs[:, p].copy()
            vq = vecs[:, q].copy()
            vecs[:, p] = c * vp - s * vq
            vecs[:, q] = s * vp + c * vq
        if not rotated and sweep >= 3:
            break

    logger.debug(f"Jacobi eigensolver: n={n}, sweeps={sweep}")
    eigenvalues = np.diag(work).copy()
    order = np.argsort(eigenvalues, kind="stable")
    return SpectralDecomp(eigenvalues[order], vecs[:, order])


def _complete_basis(q: np.ndarray, filled: np.ndarray) -> np.ndarray:
    """Fill the unfilled columns of q with unit vectors orthogonal to the rest."""
    q = q.copy()
    filled = filled.copy()
    m = q.shape[0]
    for j in np.flatnonzero(~filled):
        basis = q[:, filled]
        residual = np.eye(m) - basis @ basis.T
        vec = residual[:, int(np.argmax(np.sum(residual * residual, axis=0)))]
        vec = vec - basis @ (basis.T @ vec)
        q[:, j] = vec / np.linalg.norm(vec)
        filled[j] = True
    return q


def svd(a, max_sweeps: int = MAX_SWEEPS) -> SvdDecomp:
    """
    Thin SVD by one-sided (Hestenes) Jacobi on the columns.

    Wide inputs are transposed first, so the right factor is always square
    and orthogonal for the orientation that is actually iterated.

    Args:
        a: Any finite matrix
        max_sweeps: Sweep limit

    Returns:
        SvdDecomp with min(rows, cols) singular values, descending
    """
    a = as_matrix(a)
    transpose = a.shape[0] < a.shape[1]
    work = (a.T if transpose else a).copy()
    m, n = work.shape
    v = np.eye(n)
    tol = 8.0 * max(m, 4) * EPS
    # columns at or below tol * ||A||_F are rounding dust: never rotated, reported as zero
    dust = tol * float(np.linalg.norm(work))
    floor = dust * dust
    rounds = _round_robin(n)

    for sweep in range(max_sweeps + 1):
        rotated = False
        for p, q in rounds:
            up = work[:, p]
            uq = work[:, q]
            alpha = np.sum(up * up, axis=0)
            beta = np.sum(uq * uq, axis=0)
            gamma = np.sum(up * uq, axis=0)
            active = (np.abs(gamma) > tol * np.sqrt(alpha * beta)) & (alpha > floor) & (beta > floor)
            if not active.any():
                continue
            rotated = True
            p, q = p[active], q[active]
            alpha, beta, gamma = alpha[active], beta[active], gamma[active]

            _, c, s = _rotation((beta - alpha) / (2.0 * gamma))
            wp = work[:, p].copy()
            wq = work[:, q].copy()
            work[:, p] = c * wp - s * wq
            work[:, q] = s * wp + c * wq
            vp = v[:, p].copy()
            vq = v[:, q].copy()
            v[:, p] = c * vp - s * vq
            v[:, q] = s * vp + c * vq
        if not rotated:
            break
        if sweep == max_sweeps:
            raise NoConvergenceError(f"Jacobi SVD did not converge in {max_sweeps} sweeps")

    sigma = np.sqrt(np.sum(work * work, axis=0))
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    work = work[:, order]
    v = v[:, order]

    nonzero = sigma > dust
    sigma[~nonzero] = 0.0
    u = np.zeros_like(work)
    u[:, nonzero] = work[:, nonzero] / sigma[nonzero]
    if not nonzero.all():
        u = _complete_basis(u, nonzero)

    if transpose:
        return SvdDecomp(u=v, s=sigma, vt=u.T)
    return SvdDecomp(u=u, s=sigma, vt=v.T)


def pinv(a, rank_tol: Optional[float] = None) -> np.ndarray:
    """
    Moore-Penrose pseudoinverse through the SVD.

    Singular values at or below rank_tol * sigma_max are treated as exact
    zeros.
    """
    a = as_matrix(a)
    if rank_tol is None:
        rank_tol = default_rank_tol(a.shape)
    if rank_tol <= 0:
        raise ValueError(f"rank_tol must be positive, got {rank_tol}")
    dec = svd(a)
    keep = dec.s > rank_tol * dec.s[0]
    s_inv = np.zeros_like(dec.s)
    s_inv[keep] = 1.0 / dec.s[keep]
    return (dec.vt.T * s_inv) @ dec.u.T


def orthonormalize(columns, rank_tol: Optional[float] = None) -> OrthonormalColumns:
    """
    Orthonormalize columns by classical Gram-Schmidt applied twice per column (CGS2).

    Columns whose residual falls to rank_tol times the largest input column
    norm are dropped. Surviving columns keep their order and orientation.

    Args:
        columns: Matrix whose columns span the subspace
        rank_tol: Relative drop threshold (default max(rows, cols) * eps)

    Returns:
        OrthonormalColumns(basis, dropped)
    """
    a = as_matrix(columns, "basis")
    if rank_tol is None:
        rank_tol = default_rank_tol(a.shape)
    scale = float(np.max(np.linalg.norm(a, axis=0)))
    if scale == 0.0:
        raise EmptySpanError("All basis columns are zero")

    kept: list[np.ndarray] = []
    dropped = 0
    for j in range(a.shape[1]):
        vec = a[:, j].copy()
        if kept:
            basis = np.column_stack(kept)
            for _ in range(2):
                vec -= basis @ (basis.T @ vec)
        norm = float(np.linalg.norm(vec))
        if norm <= rank_tol * scale:
            dropped += 1
            continue
        kept.append(vec / norm)

    if not kept:
        raise EmptySpanError("No basis column survived orthonormalization")
    if dropped:
        logger.info(f"Dropped {dropped} linearly dependent basis column(s)")
    return OrthonormalColumns(np.column_stack(kept), dropped)


def spectral_norm(a) -> float:
    """Largest singular value."""
    return float(svd(a).s[0])


def null_space(a, rank_tol: Optional[float] = None, atol: float = 0.0) -> np.ndarray:
    """
    Orthonormal basis of ker(A) as columns (possibly zero columns).

    Singular values at or below max(rank_tol * sigma_max, atol) count as zero.

    Short matrices are padded with zero rows so that the iterated right
    factor is the full square orthogonal matrix.
    """
    a = as_matrix(a)
    m, n = a.shape
    if rank_tol is None:
        rank_tol = default_rank_tol(a.shape)
    if m < n:
        a = np.vstack([a, np.zeros((n - m, n))])
    dec = svd(a)
    null = dec.s <= max(rank_tol * dec.s[0], atol)
    return dec.vt[null].T.copy()


def psd_power(
    decomp: SpectralDecomp,
    power: float,
    rank_tol: Optional[float] = None,
) -> np.ndarray:
    """
    Matrix power of a PSD matrix from its eigendecomposition.

    Eigenvalues at or below rank_tol * lambda_max, negative dust included,
    are treated as exact zeros; for negative powers this gives the
    pseudoinverse power.
    """
    lam = np.clip(decomp.eigenvalues, 0.0, None)
    top = float(lam.max()) if lam.size else 0.0
    if rank_tol is None:
        rank_tol = default_rank_tol(decomp.eigenvectors.shape)
    keep = lam > rank_tol * top
    values = np.zeros_like(lam)
    values[keep] = lam[keep] ** power
    q = decomp.eigenvectors
    return (q * values) @ q.T


def projector(basis: np.ndarray) -> np.ndarray:
    """Orthogonal projector X X^T onto the span of orthonormal columns."""
    return basis @ basis.T


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Average a matrix with its transpose."""
    return 0.5 * (a + a.T)
