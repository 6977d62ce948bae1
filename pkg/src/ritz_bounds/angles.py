"""Canonical angles and the relative residual sin(Theta).

The relative residual of a test subspace is measured by the angles between
ran(V) and ran(W)^perp, where

    V = H^{1/2} P H'^{+1/2},    W = H^{1/2} P' H'^{+1/2}

are the partial isometries built from the block split H = H' + dH. The
acute part of the angle spectrum gives sin(Theta_p), which drives every
bound in the ``bounds`` module.
"""

import logging
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from .errors import EmptySpanError, NotApplicableError, SingularOperatorError
from .forms import OperatorKind, OperatorRep, Subspace, block_split
from .linalg_core import (
    null_space,
    orthonormalize,
    psd_power,
    spectral_norm,
    svd,
    symmetric_eig,
    symmetrize,
)

logger = logging.getLogger("ritz-bounds.angles")

# cosines within this distance of 0 or 1 are treated as orthogonal or equal
ACUTE_CUTOFF = 1e-8
NOT_APPLICABLE_TOL = 1e-12
# partial isometries have singular values 0 or 1
ISOMETRY_RANK_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class AngleReport:
    """Angles between two subspaces and the derived residual measures."""

    canonical_angles: np.ndarray
    sin_theta: float
    sin_theta_p: float
    route1: Optional[float] = None
    route2: Optional[float] = None

    @property
    def applicable(self) -> bool:
        """Whether sin(Theta_p) < 1, the precondition of every bound."""
        return self.sin_theta_p < 1.0 - NOT_APPLICABLE_TOL

    @property
    def eta_theta_p(self) -> Optional[float]:
        """sin / (1 - sin), or None when not applicable."""
        if not self.applicable:
            return None
        return self.sin_theta_p / (1.0 - self.sin_theta_p)

    @property
    def cross_check_gap(self) -> Optional[float]:
        """|route1 - route2| when both routes were evaluated."""
        if self.route1 is None or self.route2 is None:
            return None
        return abs(self.route1 - self.route2)

    def as_dict(self) -> dict[str, Any]:
        return {
            "canonical_angles": [float(a) for a in self.canonical_angles],
            "sin_theta": self.sin_theta,
            "sin_theta_p": self.sin_theta_p,
            "eta_theta_p": self.eta_theta_p,
            "route1": self.route1,
            "route2": self.route2,
            "cross_check_gap": self.cross_check_gap,
        }

    def __str__(self) -> str:
        return f"AngleReport(sin_theta={self.sin_theta:.6g}, sin_theta_p={self.sin_theta_p:.6g})"


@dataclass(frozen=True, eq=False)
class IsometryPair:
    """V, W and the scaled perturbation dH_s = H'^{+1/2} dH H'^{+1/2}."""

    v: np.ndarray
    w: np.ndarray
    delta_hs: np.ndarray


def _empty_basis(n: int) -> np.ndarray:
    return np.zeros((n, 0))


def subspace_gap(u: np.ndarray, v: np.ndarray) -> float:
    """
    Sine of the largest canonical angle between two orthonormal bases.

    Computed from projector residuals, which keeps small angles accurate.
    Returns 1 when the dimensions differ.
    """
    if u.shape[1] != v.shape[1]:
        return 1.0
    if u.shape[1] == 0:
        return 0.0
    forward = spectral_norm(u - v @ (v.T @ u))
    backward = spectral_norm(v - u @ (u.T @ v))
    return min(1.0, max(forward, backward))


def canonical_angles(u: np.ndarray, v: np.ndarray) -> AngleReport:
    """
    Canonical angles between ran(U) and ran(V).

    Args:
        u: Orthonormal basis, n x k (k may be zero)
        v: Orthonormal basis, n x l (l may be zero)

    Returns:
        AngleReport with ascending angles, sin(Theta) (1 when k != l) and
        sin(Theta_p), the largest sine over the acute angles
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape[0] != v.shape[0]:
        raise ValueError(f"bases live in different spaces: {u.shape[0]} vs {v.shape[0]}")
    if u.shape[1] == 0 or v.shape[1] == 0:
        angles = np.zeros(0)
    else:
        cosines = np.clip(svd(v.T @ u).s, 0.0, 1.0)
        angles = np.sort(np.arccos(cosines))

    sin_theta = subspace_gap(u, v)
    cosines = np.cos(angles)
    acute = (cosines > ACUTE_CUTOFF) & (cosines < 1.0 - ACUTE_CUTOFF)
    sin_theta_p = float(np.max(np.sin(angles[acute]))) if acute.any() else 0.0
    if u.shape[1] == v.shape[1]:
        sin_theta_p = min(sin_theta_p, sin_theta)
    return AngleReport(canonical_angles=angles, sin_theta=sin_theta, sin_theta_p=sin_theta_p)


def _root_factor(op: OperatorRep) -> np.ndarray:
    """A matrix T with T^T T = H: R for the factor kind, H^{1/2} otherwise."""
    if op.kind is OperatorKind.FACTOR:
        return op.matrix
    return psd_power(op.spectrum, 0.5)


def build_isometries(
    op: OperatorRep, sub: Subspace, rank_tol: Optional[float] = None
) -> IsometryPair:
    """
    Build V = T P H'^{+1/2} and W = T P' H'^{+1/2} with T^T T = H.

    Both are partial isometries with V W^T = 0; ||V^T W|| equals
    ||dH_s|| and sin(Theta_p) of the pair.
    """
    split = block_split(op, sub)
    hp_pinv_half = psd_power(symmetric_eig(split.hprime), -0.5, rank_tol)
    root = _root_factor(op)
    v = root @ sub.projector @ hp_pinv_half
    w = root @ sub.complement @ hp_pinv_half
    delta_hs = symmetrize(hp_pinv_half @ split.delta @ hp_pinv_half)
    return IsometryPair(v=v, w=w, delta_hs=delta_hs)


def _kernel_split(op: OperatorRep, kernel_tol: float) -> tuple[np.ndarray, np.ndarray]:
    lam = op.spectrum.eigenvalues
    q = op.spectrum.eigenvectors
    kernel = lam <= kernel_tol * max(float(lam[-1]), 0.0)
    return q[:, kernel], q[:, ~kernel]


def inverse_image(op: OperatorRep, sub: Subspace, kernel_tol: float = 1e-10) -> np.ndarray:
    """
    Orthonormal basis of the inverse image of ran(X) under H^{1/2}.

    This is H^{+1/2}(ran(X) intersected with ran(H^{1/2})) plus ker(H).
    May have zero columns.
    """
    kernel, _ = _kernel_split(op, kernel_tol)
    x = sub.basis
    n = sub.ambient_dim
    if kernel.shape[1]:
        inside = x @ null_space(kernel.T @ x, atol=ACUTE_CUTOFF)
    else:
        inside = x

    parts = []
    if inside.shape[1]:
        parts.append(psd_power(op.spectrum, -0.5, kernel_tol) @ inside)
    if kernel.shape[1]:
        parts.append(kernel)
    if not parts:
        return _empty_basis(n)
    return orthonormalize(np.column_stack(parts), ISOMETRY_RANK_TOL).basis


def _range_basis(a: np.ndarray) -> np.ndarray:
    try:
        return orthonormalize(a, ISOMETRY_RANK_TOL).basis
    except EmptySpanError:
        return _empty_basis(a.shape[0])


def _pencil_route(op: OperatorRep, sub: Subspace, kernel_tol: float) -> float:
    """
    sin^2(Theta) as the largest eigenvalue of A^{-1/2} (A - B) A^{-1/2}.

    A = X^T H^{-1} X and B = X^T H'^{-1} X; only defined for SPD H.
    """
    if not op.is_positive_definite(kernel_tol):
        raise SingularOperatorError("the pencil route needs a positive definite H")
    x = sub.basis
    h_inv = psd_power(op.spectrum, -1.0, kernel_tol)
    hp_inv = psd_power(symmetric_eig(block_split(op, sub).hprime), -1.0, kernel_tol)
    a = symmetrize(x.T @ h_inv @ x)
    b = symmetrize(x.T @ hp_inv @ x)
    a_inv_half = psd_power(symmetric_eig(a), -0.5, kernel_tol)
    pencil = symmetrize(a_inv_half @ (a - b) @ a_inv_half)
    top = float(symmetric_eig(pencil).eigenvalues[-1])
    return float(np.sqrt(np.clip(top, 0.0, 1.0)))


def sin_theta_residual(
    op: OperatorRep,
    sub: Subspace,
    rank_tol: Optional[float] = None,
    kernel_tol: float = 1e-10,
) -> AngleReport:
    """
    Relative residual of a test subspace.

    sin(Theta_p) is ||V^T W||, clamped to [0, 1]. For positive definite H
    the pencil form is evaluated as well and reported as route1. The full
    angle spectrum is taken between ran(V) and the inverse image of ran(X).

    Args:
        op: Matrix-kind operator
        sub: Test subspace
        rank_tol: Threshold for the pseudoinverse root of H'
        kernel_tol: Relative threshold identifying ker(H)

    Returns:
        AngleReport
    """
    pair = build_isometries(op, sub, rank_tol)
    raw = spectral_norm(pair.v.T @ pair.w)
    if raw > 1.0:
        logger.debug(f"Clamping ||V^T W|| = {raw!r} to 1")
    route2 = min(raw, 1.0)

    route1 = None
    if op.is_positive_definite(kernel_tol):
        route1 = _pencil_route(op, sub, kernel_tol)

    v_range = _range_basis(pair.v)
    preimage = inverse_image(op, sub, kernel_tol)
    angles = canonical_angles(v_range, preimage)
    sin_theta = route2 if v_range.shape[1] == preimage.shape[1] else 1.0
    report = AngleReport(
        canonical_angles=angles.canonical_angles,
        sin_theta=sin_theta,
        sin_theta_p=route2,
        route1=route1,
        route2=route2,
    )
    logger.debug(f"{report} route1={route1}")
    return report


def drmac_ratio(op: OperatorRep, sub: Subspace, kernel_tol: float = 1e-10) -> float:
    """||H^{-1/2} dH H^{-1/2}||, equal to sin/(1 - sin) for SPD H."""
    if not op.is_positive_definite(kernel_tol):
        raise SingularOperatorError("the scaled perturbation needs a positive definite H")
    h_inv_half = psd_power(op.spectrum, -0.5, kernel_tol)
    split = block_split(op, sub)
    return spectral_norm(h_inv_half @ split.delta @ h_inv_half)


def kernel_gap(op: OperatorRep, sub: Subspace, kernel_tol: float = 1e-10) -> float:
    """
    Gap between ker(H) and ker(H').

    Returns 1 when the kernels have different dimensions.
    """
    h_kernel, _ = _kernel_split(op, kernel_tol)
    hp = symmetric_eig(block_split(op, sub).hprime)
    lam = hp.eigenvalues
    hp_kernel = hp.eigenvectors[:, lam <= kernel_tol * max(float(lam[-1]), 0.0)]
    return subspace_gap(h_kernel, hp_kernel)


def deflate_kernel(
    op: OperatorRep,
    sub: Subspace,
    rank_tol: Optional[float] = None,
    kernel_tol: float = 1e-10,
) -> tuple[OperatorRep, Subspace]:
    """
    Restrict H and the test subspace to ran(H).

    Valid once sin(Theta_p) < 1, which forces ker(H) = ker(H'). The test
    subspace keeps its part in ran(H'), expressed in a basis of ran(H).
    """
    report = sin_theta_residual(op, sub, rank_tol, kernel_tol)
    if not report.applicable:
        raise NotApplicableError(f"sin(Theta_p) = {report.sin_theta_p:.6g} is not below 1")
    _, range_basis = _kernel_split(op, kernel_tol)
    x = sub.basis
    xi = symmetric_eig(symmetrize(x.T @ op.apply(x)))
    mu = xi.eigenvalues
    active = xi.eigenvectors[:, mu > kernel_tol * max(float(mu[-1]), 0.0)]
    if active.shape[1] == 0:
        raise EmptySpanError("test subspace lies in the kernel")

    reduced_h = symmetrize(range_basis.T @ op.dense @ range_basis)
    reduced_x = orthonormalize(range_basis.T @ (x @ active), ISOMETRY_RANK_TOL).basis
    return OperatorRep.explicit(reduced_h), Subspace(basis=reduced_x)
