"""Symmetric forms, their operators, and the block split against a test subspace.

A nonnegative form h(u, v) is given either by an explicit matrix H, by a
factor R with h(u, v) = (Ru, Rv), or analytically by the string model.
For a test subspace with orthonormal basis X and projector P, the form
splits as h = h' + dh with h'(u, v) = h(Pu, Pv) + h(P'u, P'v), P' = I - P.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Optional, Union

import numpy as np

from .errors import DimensionMismatchError, NotPositiveSemidefiniteError
from .linalg_core import (
    SpectralDecomp,
    as_matrix,
    orthonormalize,
    projector,
    spectral_norm,
    symmetric_eig,
    symmetrize,
)
from .string_model import ModeSubspace, StringSpec, string_ritz

logger = logging.getLogger("ritz-bounds.forms")

PSD_SLACK = 1e-12
ORTHONORMAL_TOL = 1e-12


class OperatorKind(str, Enum):
    """How the form is represented."""

    EXPLICIT = "explicit"
    FACTOR = "factor"
    STRING = "string"


@dataclass(frozen=True, eq=False)
class OperatorRep:
    """
    A nonnegative symmetric form and its operator.

    Use the ``explicit``, ``factor`` and ``string_operator`` constructors
    rather than building instances directly.
    """

    kind: OperatorKind
    matrix: Optional[np.ndarray] = None
    string: Optional[StringSpec] = None
    essential_bottom: float = math.inf

    @classmethod
    def explicit(cls, h, sym_tol: float = 1e-12) -> "OperatorRep":
        """
        Wrap a symmetric PSD matrix H.

        Eigenvalues down to -1e-12 ||H|| count as roundoff and are clamped
        wherever roots or inverses are formed; anything more negative is
        rejected.
        """
        h = as_matrix(h, "H")
        decomp = symmetric_eig(h, sym_tol)
        top = float(np.max(np.abs(decomp.eigenvalues)))
        lowest = float(decomp.eigenvalues[0])
        if lowest < -PSD_SLACK * top:
            raise NotPositiveSemidefiniteError(
                f"H has eigenvalue {lowest:.3e} below -{PSD_SLACK:.0e} * ||H|| = {-PSD_SLACK * top:.3e}"
            )
        if lowest < 0:
            logger.info(f"Clamping negative eigenvalue dust {lowest:.3e} of H to zero")
        op = cls(kind=OperatorKind.EXPLICIT, matrix=symmetrize(h))
        op.__dict__["spectrum"] = decomp
        return op

    @classmethod
    def factor(cls, r) -> "OperatorRep":
        """Wrap a factor R, so that H = R^T R."""
        return cls(kind=OperatorKind.FACTOR, matrix=as_matrix(r, "R"))

    @classmethod
    def string_operator(cls, eta: float) -> "OperatorRep":
        """The inhomogeneous string with contrast eta."""
        return cls(kind=OperatorKind.STRING, string=StringSpec(eta))

    @property
    def is_matrix(self) -> bool:
        return self.kind is not OperatorKind.STRING

    @property
    def dimension(self) -> Optional[int]:
        """Ambient dimension, or None for the analytic string operator."""
        if not self.is_matrix:
            return None
        return self.matrix.shape[1]

    def _require_matrix(self) -> None:
        if not self.is_matrix:
            raise DimensionMismatchError("operation needs a matrix-kind operator, got the string model")

    @cached_property
    def dense(self) -> np.ndarray:
        """H as a dense matrix (R^T R for the factor kind)."""
        self._require_matrix()
        if self.kind is OperatorKind.FACTOR:
            return symmetrize(self.matrix.T @ self.matrix)
        return self.matrix

    @cached_property
    def spectrum(self) -> SpectralDecomp:
        """Reference eigendecomposition of H."""
        return symmetric_eig(self.dense)

    @property
    def norm(self) -> float:
        """Spectral norm of H."""
        return float(np.max(np.abs(self.spectrum.eigenvalues)))

    def apply(self, x: np.ndarray) -> np.ndarray:
        """H x, through the factor when one is available."""
        self._require_matrix()
        if self.kind is OperatorKind.FACTOR:
            return self.matrix.T @ (self.matrix @ x)
        return self.matrix @ x

    def is_positive_definite(self, kernel_tol: float = 1e-10) -> bool:
        lam = self.spectrum.eigenvalues
        return bool(lam[0] > kernel_tol * max(float(lam[-1]), 0.0))


@dataclass(frozen=True, eq=False)
class Subspace:
    """Test subspace given by an orthonormal basis X."""

    basis: np.ndarray
    dropped: int = 0

    def __post_init__(self):
        x = as_matrix(self.basis, "basis")
        if x.shape[1] > x.shape[0]:
            raise DimensionMismatchError(
                f"basis has {x.shape[1]} columns in dimension {x.shape[0]}"
            )
        gram_error = float(np.max(np.abs(x.T @ x - np.eye(x.shape[1]))))
        if gram_error > ORTHONORMAL_TOL:
            raise ValueError(f"basis is not orthonormal (max |X^T X - I| = {gram_error:.3e})")
        object.__setattr__(self, "basis", x)

    @classmethod
    def from_columns(cls, columns, rank_tol: Optional[float] = None) -> "Subspace":
        """Orthonormalize arbitrary spanning columns."""
        result = orthonormalize(columns, rank_tol)
        return cls(basis=result.basis, dropped=result.dropped)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dimension(self) -> int:
        return self.basis.shape[1]

    @cached_property
    def projector(self) -> np.ndarray:
        """P = X X^T."""
        return projector(self.basis)

    @cached_property
    def complement(self) -> np.ndarray:
        """P' = I - P."""
        return np.eye(self.ambient_dim) - self.projector


AnySubspace = Union[Subspace, ModeSubspace]


@dataclass(frozen=True, eq=False)
class RitzData:
    """Rayleigh quotient Xi, Ritz values (ascending) and Ritz vectors."""

    xi: np.ndarray
    ritz_values: np.ndarray
    ritz_vectors: np.ndarray
    coefficients: np.ndarray

    @property
    def dimension(self) -> int:
        return self.xi.shape[0]


@dataclass(frozen=True, eq=False)
class BlockSplit:
    """H = H' + dH with H' block diagonal with respect to P."""

    hprime: np.ndarray
    delta: np.ndarray


def _check_dims(op: OperatorRep, sub: Subspace) -> None:
    if not isinstance(sub, Subspace):
        raise DimensionMismatchError("matrix-kind operators need a Subspace basis")
    if sub.ambient_dim != op.dimension:
        raise DimensionMismatchError(
            f"basis has {sub.ambient_dim} rows but the operator has dimension {op.dimension}"
        )


def rayleigh_quotient(
    op: OperatorRep,
    sub: AnySubspace,
    sym_tol: float = 1e-12,
    quad_tol: float = 1e-10,
) -> RitzData:
    """
    Rayleigh quotient Xi = (H^{1/2} X)^T (H^{1/2} X) and its eigenpairs.

    Matrix kinds use X^T H X, or (RX)^T (RX) for a factor. For the string
    model the entries are h(u_m, u_n) over the mode test functions and the
    Ritz vectors are coefficient vectors in that mode basis.

    Args:
        op: Operator
        sub: Subspace for matrix kinds, ModeSubspace for the string model
        sym_tol: Symmetry tolerance passed to the eigensolver
        quad_tol: Quadrature tolerance for the string model

    Returns:
        RitzData
    """
    if op.kind is OperatorKind.STRING:
        if not isinstance(sub, ModeSubspace):
            raise DimensionMismatchError("the string operator needs a ModeSubspace")
        xi = symmetrize(string_ritz(op.string, sub, quad_tol))
        basis = np.eye(sub.dimension)
    else:
        _check_dims(op, sub)
        basis = sub.basis
        if op.kind is OperatorKind.FACTOR:
            rx = op.matrix @ basis
            xi = symmetrize(rx.T @ rx)
        else:
            xi = symmetrize(basis.T @ op.matrix @ basis)

    decomp = symmetric_eig(xi, sym_tol)
    values = decomp.eigenvalues.copy()
    scale = float(np.max(np.abs(values)))
    dust = (values < 0) & (values >= -PSD_SLACK * scale)
    values[dust] = 0.0
    return RitzData(
        xi=xi,
        ritz_values=values,
        ritz_vectors=basis @ decomp.eigenvectors,
        coefficients=decomp.eigenvectors,
    )


def block_split(op: OperatorRep, sub: Subspace) -> BlockSplit:
    """
    Split H into H' = PHP + P'HP' and dH = H - H'.

    H' has ran(X) as an invariant subspace, H' X = X Xi.
    """
    op._require_matrix()
    _check_dims(op, sub)
    h = op.dense
    p, q = sub.projector, sub.complement
    hprime = symmetrize(p @ h @ p + q @ h @ q)
    return BlockSplit(hprime=hprime, delta=h - hprime)


def residual_norm(op: OperatorRep, sub: Subspace) -> float:
    """Classical residual ||H X - X Xi|| with Xi = X^T H X."""
    _check_dims(op, sub)
    hx = op.apply(sub.basis)
    xi = sub.basis.T @ hx
    return spectral_norm(hx - sub.basis @ xi)


def _as_dense(a: Union[OperatorRep, np.ndarray]) -> np.ndarray:
    if isinstance(a, OperatorRep):
        return a.dense
    return as_matrix(a)


def operator_order_leq(
    a: Union[OperatorRep, np.ndarray],
    h: Union[OperatorRep, np.ndarray],
    slack: float = 1e-12,
) -> bool:
    """
    Whether A <= H in the sense of forms, i.e. H - A is PSD.

    Eigenvalues of H - A down to -slack * ||H|| are accepted.
    """
    a_mat, h_mat = _as_dense(a), _as_dense(h)
    if a_mat.shape != h_mat.shape:
        raise DimensionMismatchError(f"shapes differ: {a_mat.shape} vs {h_mat.shape}")
    h_norm = float(np.max(np.abs(symmetric_eig(symmetrize(h_mat)).eigenvalues)))
    lowest = float(symmetric_eig(symmetrize(h_mat - a_mat)).eigenvalues[0])
    return lowest >= -slack * h_norm


def h_eta_factor(eta: float) -> np.ndarray:
    """
    Factor R of the two-by-two demonstration family.

    R^T R = L diag(1/100, eta^2) L^T with L = [[1, 0], [-1, 1]], which is
    [[0.01, -0.01], [-0.01, 0.01 + eta^2]].
    """
    return np.array([[0.1, -0.1], [0.0, eta]])


def h_eta_printed(eta: float) -> np.ndarray:
    """The displayed matrix of the family, bottom-right entry 1 + eta^2."""
    return np.array([[0.01, -0.01], [-0.01, 1.0 + eta * eta]])


def h_eta_eigenvalues(eta: float) -> tuple[float, float]:
    """
    Closed-form eigenvalues of R^T R for h_eta_factor.

    lambda_2 = (1 + 50 eta^2 + sqrt(1 + 2500 eta^4)) / 100, and
    lambda_1 = det / lambda_2 = eta^2 / (100 lambda_2), which avoids the
    cancellation in the difference form.
    """
    e2 = eta * eta
    lam2 = (1.0 + 50.0 * e2 + math.sqrt(1.0 + 2500.0 * e2 * e2)) / 100.0
    return e2 / (100.0 * lam2), lam2
