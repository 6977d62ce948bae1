"""Eigenvalue and eigenvector bounds driven by sin(Theta_p).

Given Ritz values mu_1 <= ... <= mu_n of a test subspace and its relative
residual s = sin(Theta_p) < 1, there are eigenvalues lambda_{i_j} of H with

    |lambda_{i_j} - mu_j| <= mu_j * s,
    |lambda_{i_j} - mu_j| <= lambda_{i_j} * s / (1 - s).

This module evaluates those intervals, finds the matching, localizes it
with the relative gap conditions, and bounds the Ritz vector errors.
"""

import bisect
import logging
import math
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np

from .angles import NOT_APPLICABLE_TOL, build_isometries
from .errors import (
    DegenerateGapError,
    GammaNotAboveMuError,
    InsufficientEigenvaluesError,
    NotApplicableError,
)
from .forms import OperatorRep, Subspace, block_split
from .linalg_core import psd_power, symmetric_eig

logger = logging.getLogger("ritz-bounds.bounds")

DEGENERATE_GAP_TOL = 1e-14
LOCALIZATION_MODES = ("lower", "inner")


def _check_applicable(sin_theta_p: float) -> None:
    if not 0.0 <= sin_theta_p <= 1.0:
        raise ValueError(f"sin(Theta_p) must lie in [0, 1], got {sin_theta_p}")
    if sin_theta_p >= 1.0 - NOT_APPLICABLE_TOL:
        raise NotApplicableError(f"sin(Theta_p) = {sin_theta_p:.6g}; bounds need a value below 1")


def _ascending(values: Sequence[float], name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if np.any(np.diff(arr) < 0):
        raise ValueError(f"{name} must be sorted ascending")
    return arr


@dataclass(frozen=True)
class RelativeInterval:
    """Enclosure [mu (1 - s), mu (1 + s)] of a matched eigenvalue."""

    mu: float
    sin_theta_p: float
    lo: float
    hi: float

    @property
    def lambda_relative(self) -> float:
        """Bound s / (1 - s) on |lambda - mu| / lambda."""
        return self.sin_theta_p / (1.0 - self.sin_theta_p)

    def contains(self, lam: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= lam <= self.hi + slack

    def __str__(self) -> str:
        return f"[{self.lo:.12g}, {self.hi:.12g}]"


def relative_interval(mu: float, sin_theta_p: float) -> RelativeInterval:
    """
    Relative enclosure of the eigenvalue matched to a Ritz value.

    Args:
        mu: Ritz value (nonnegative)
        sin_theta_p: Relative residual, must be below 1

    Returns:
        RelativeInterval
    """
    if mu < 0:
        raise ValueError(f"Ritz value must be nonnegative, got {mu}")
    _check_applicable(sin_theta_p)
    return RelativeInterval(
        mu=mu,
        sin_theta_p=sin_theta_p,
        lo=mu * (1.0 - sin_theta_p),
        hi=mu * (1.0 + sin_theta_p),
    )


@dataclass(frozen=True)
class AbsoluteInterval:
    """Classical enclosure [mu - r, mu + r] from the residual norm."""

    mu: float
    residual: float

    @property
    def lo(self) -> float:
        return self.mu - self.residual

    @property
    def hi(self) -> float:
        return self.mu + self.residual


def absolute_interval(mu: float, residual: float) -> AbsoluteInterval:
    """Residual-norm enclosure, kept for comparison with the relative one."""
    if residual < 0:
        raise ValueError(f"residual norm must be nonnegative, got {residual}")
    return AbsoluteInterval(mu=mu, residual=residual)


def relative_error(lam: float, mu: float, zero_tol: float) -> float:
    """|lambda - mu| / mu, with 0/0 = 0 and x/0 = inf below zero_tol."""
    if mu <= zero_tol:
        return 0.0 if abs(lam) <= zero_tol else math.inf
    return abs(lam - mu) / mu


@dataclass(frozen=True)
class MatchReport:
    """Order-preserving matching of Ritz values to eigenvalues."""

    permutation: tuple[int, ...]
    per_pair: tuple[float, ...]
    max_rel_error: float
    sin_theta_p: Optional[float] = None

    @property
    def bound_satisfied(self) -> tuple[bool, ...]:
        if self.sin_theta_p is None:
            return tuple(True for _ in self.per_pair)
        return tuple(err <= self.sin_theta_p + 1e-12 for err in self.per_pair)

    def as_rows(self, ritz: Sequence[float], eigs: Sequence[float]) -> list[dict[str, Any]]:
        rows = []
        for j, (i, err, ok) in enumerate(zip(self.permutation, self.per_pair, self.bound_satisfied)):
            rows.append(
                {
                    "ritz_index": j,
                    "mu": float(ritz[j]),
                    "eig_index": i,
                    "lambda": float(eigs[i]),
                    "rel_error": err,
                    "within_bound": ok,
                }
            )
        return rows


def _greedy_match(cost: np.ndarray, threshold: float) -> Optional[list[int]]:
    """Earliest order-preserving assignment with every cost <= threshold."""
    n, total = cost.shape
    chosen = []
    start = 0
    for j in range(n):
        room = total - (n - j - 1)
        hits = np.nonzero(cost[j, start:room] <= threshold)[0]
        if hits.size == 0:
            return None
        start += int(hits[0])
        chosen.append(start)
        start += 1
    return chosen


def match_ritz(
    ritz: Sequence[float],
    eigs: Sequence[float],
    sin_theta_p: Optional[float] = None,
    zero_tol: Optional[float] = None,
) -> MatchReport:
    """
    Bottleneck matching of Ritz values to eigenvalues.

    Among strictly increasing index maps j -> i_j the one minimizing the
    largest |lambda_{i_j} - mu_j| / mu_j is returned. Both inputs are
    sorted, so an optimal map can always be taken order preserving.

    Args:
        ritz: Ritz values, ascending
        eigs: Eigenvalues, ascending, at least as many as Ritz values
        sin_theta_p: Optional residual used to flag pairs within the bound
        zero_tol: Values at or below this count as zero (default 1e-12 scale)

    Returns:
        MatchReport
    """
    mus = _ascending(ritz, "ritz values")
    lams = _ascending(eigs, "eigenvalues")
    if mus.size > lams.size:
        raise InsufficientEigenvaluesError(
            f"{mus.size} Ritz values but only {lams.size} eigenvalues"
        )
    if mus.size == 0:
        return MatchReport((), (), 0.0, sin_theta_p)
    if zero_tol is None:
        scale = max(float(np.max(np.abs(lams))), float(np.max(np.abs(mus))), np.finfo(float).tiny)
        zero_tol = 1e-12 * scale

    cost = np.array([[relative_error(lam, mu, zero_tol) for lam in lams] for mu in mus])
    thresholds = sorted(set(cost.ravel().tolist()))
    pick = bisect.bisect_left(
        thresholds, True, key=lambda t: _greedy_match(cost, t) is not None
    )
    best = thresholds[pick]
    permutation = _greedy_match(cost, best)
    per_pair = tuple(float(cost[j, i]) for j, i in enumerate(permutation))
    logger.debug(f"Matched {mus.size} Ritz values, max relative error {best:.6g}")
    return MatchReport(tuple(permutation), per_pair, float(best), sin_theta_p)


@dataclass(frozen=True)
class LocalizationReport:
    """Which eigenvalues the Ritz values are certified to approximate."""

    mode: str
    offset: int
    gamma: float
    eta_theta_p: Optional[float]
    applies: bool
    matched: tuple[int, ...]
    per_pair_ok: tuple[bool, ...]

    @property
    def theorem(self) -> str:
        if not self.applies:
            return "none"
        return f"{self.mode}-block"

    def as_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode,
            "offset": self.offset,
            "gamma": self.gamma,
            "eta_theta_p": self.eta_theta_p,
            "applies": self.applies,
            "theorem": self.theorem,
            "matched": list(self.matched),
            "per_pair_ok": list(self.per_pair_ok),
        }


def _relative_gap(a: float, b: float) -> float:
    total = a + b
    if total <= 0:
        return 0.0
    return (b - a) / total


def localize(
    ritz: Sequence[float],
    eigs: Sequence[float],
    sin_theta_p: float,
    mode: str = "lower",
    offset: int = 0,
) -> LocalizationReport:
    """
    Check the gap condition that pins the matching to a block of eigenvalues.

    In ``lower`` mode the Ritz values approximate lambda_1..lambda_n when
    s/(1-s) < gamma_r = min (lambda_p - mu_k)/(lambda_p + mu_k) over the
    eigenvalues above the block. In ``inner`` mode the block starts at the
    0-based ``offset`` and gamma_c also takes the eigenvalues below it.

    Args:
        ritz: Ritz values, ascending
        eigs: Eigenvalues, ascending
        sin_theta_p: Relative residual
        mode: "lower" or "inner"
        offset: First eigenvalue index of the block (inner mode)

    Returns:
        LocalizationReport
    """
    if mode not in LOCALIZATION_MODES:
        raise ValueError(f"mode must be one of {LOCALIZATION_MODES}, got {mode!r}")
    mus = _ascending(ritz, "ritz values")
    lams = _ascending(eigs, "eigenvalues")
    if mode == "lower":
        offset = 0
    if offset < 0 or offset + mus.size > lams.size:
        raise InsufficientEigenvaluesError(
            f"block of {mus.size} at offset {offset} exceeds {lams.size} eigenvalues"
        )

    below = lams[:offset]
    block = lams[offset : offset + mus.size]
    above = lams[offset + mus.size :]

    gamma = 1.0
    for mu in mus:
        for lam in above:
            gamma = min(gamma, _relative_gap(mu, lam))
        for lam in below:
            gamma = min(gamma, _relative_gap(lam, mu))
    gamma = float(np.clip(gamma, -1.0, 1.0))

    eta = None
    if sin_theta_p < 1.0 - NOT_APPLICABLE_TOL:
        eta = sin_theta_p / (1.0 - sin_theta_p)
    applies = eta is not None and gamma >= 0 and eta < gamma

    scale = max(float(np.max(np.abs(lams))), np.finfo(float).tiny)
    per_pair_ok = tuple(
        bool(abs(lam - mu) <= mu * sin_theta_p + 1e-12 * scale) for lam, mu in zip(block, mus)
    )
    return LocalizationReport(
        mode=mode,
        offset=offset,
        gamma=gamma,
        eta_theta_p=eta,
        applies=applies,
        matched=tuple(range(offset, offset + mus.size)),
        per_pair_ok=per_pair_ok,
    )


@dataclass(frozen=True)
class TempleKatoResult:
    """Lower bound mu - eps^2 / (gamma - mu) for lambda_1."""

    bound: float
    mu: float
    residual_sq: float
    gamma: float

    @property
    def vacuous(self) -> bool:
        return self.bound <= 0

    def __str__(self) -> str:
        return f"TempleKato(bound={self.bound:.12g}, mu={self.mu:.12g}, eps^2={self.residual_sq:.3e})"


def temple_kato(op: OperatorRep, u, gamma: float) -> TempleKatoResult:
    """
    Temple-Kato lower bound for the smallest eigenvalue.

    Args:
        op: Matrix-kind operator
        u: Unit vector
        gamma: Lower estimate of lambda_2, must exceed the Rayleigh quotient

    Returns:
        TempleKatoResult
    """
    u = np.asarray(u, dtype=float).ravel()
    norm = float(np.linalg.norm(u))
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"u must be a unit vector, ||u|| = {norm!r}")
    hu = op.apply(u)
    mu = float(u @ hu)
    if gamma <= mu:
        raise GammaNotAboveMuError(f"gamma = {gamma!r} must exceed mu = {mu!r}")
    residual = hu - mu * u
    residual_sq = float(residual @ residual)
    return TempleKatoResult(
        bound=mu - residual_sq / (gamma - mu), mu=mu, residual_sq=residual_sq, gamma=gamma
    )


@dataclass(frozen=True, eq=False)
class EigvecBoundReport:
    """Per-Ritz-vector error bounds and, when known, the actual errors."""

    bounds: tuple[Optional[float], ...]
    actual: tuple[Optional[float], ...]
    sin_theta_p: float

    @property
    def holds(self) -> bool:
        return all(
            b is None or a is None or a <= b + 1e-10 for b, a in zip(self.bounds, self.actual)
        )

    def as_rows(self) -> list[dict[str, Any]]:
        return [
            {"ritz_index": j, "bound": b, "actual": a}
            for j, (b, a) in enumerate(zip(self.bounds, self.actual))
        ]


def _gap_factor(mu: float, others: np.ndarray) -> float:
    """max over lambda of sqrt(mu lambda) / |lambda - mu|."""
    best = 0.0
    for lam in others:
        gap = abs(lam - mu)
        if gap <= DEGENERATE_GAP_TOL * max(abs(lam), abs(mu)):
            raise DegenerateGapError(f"eigenvalue {lam!r} coincides with Ritz value {mu!r}")
        best = max(best, math.sqrt(max(mu * lam, 0.0)) / gap)
    return best


def eigenvector_bounds(
    ritz: Sequence[float],
    eigs: Sequence[float],
    permutation: Sequence[int],
    sin_theta_p: float,
    ritz_vectors: Optional[np.ndarray] = None,
    eigenvectors: Optional[np.ndarray] = None,
    zero_tol: Optional[float] = None,
) -> EigvecBoundReport:
    """
    Bound ||v_{i_j} - u_j|| for each Ritz vector u_j.

    The bound is sqrt(2) s / sqrt(1 - s) times the largest
    sqrt(mu_j lambda_p) / |lambda_p - mu_j| over the other eigenvalues.
    A degenerate gap yields None for that vector. Actual errors use the
    eigenvector sign that makes <v, u> nonnegative.
    """
    _check_applicable(sin_theta_p)
    mus = np.asarray(ritz, dtype=float).ravel()
    lams = np.asarray(eigs, dtype=float).ravel()
    if zero_tol is None:
        zero_tol = 1e-12 * max(float(np.max(np.abs(lams))), np.finfo(float).tiny)
    factor = math.sqrt(2.0) * sin_theta_p / math.sqrt(1.0 - sin_theta_p)

    bounds: list[Optional[float]] = []
    actual: list[Optional[float]] = []
    for j, mu in enumerate(mus):
        i = permutation[j]
        if factor == 0.0 or mu <= zero_tol:
            bounds.append(0.0)
        else:
            try:
                bounds.append(factor * _gap_factor(mu, np.delete(lams, i)))
            except DegenerateGapError as e:
                logger.warning(f"No eigenvector bound for Ritz value {j}: {e}")
                bounds.append(None)

        if ritz_vectors is None or eigenvectors is None:
            actual.append(None)
            continue
        u = ritz_vectors[:, j]
        v = eigenvectors[:, i]
        sign = -1.0 if float(v @ u) < 0 else 1.0
        actual.append(float(np.linalg.norm(sign * v - u)))

    return EigvecBoundReport(tuple(bounds), tuple(actual), sin_theta_p)


def s_operator(
    op: OperatorRep, sub: Subspace, rank_tol: Optional[float] = None
) -> np.ndarray:
    """
    S = H^{1/2} H'^{+1/2} - H^{+1/2} H'^{1/2}.

    For an eigenvector v of H and an eigenvector u of H' with eigenvalues
    lambda and mu > 0, (v, S u) = (lambda - mu) / sqrt(lambda mu) (v, u).
    """
    split = block_split(op, sub)
    hp = symmetric_eig(split.hprime)
    h_half = psd_power(op.spectrum, 0.5)
    h_pinv_half = psd_power(op.spectrum, -0.5, rank_tol)
    return h_half @ psd_power(hp, -0.5, rank_tol) - h_pinv_half @ psd_power(hp, 0.5)


def s_operator_bound(sin_theta_p: float) -> float:
    """Norm bound s / sqrt(1 - s) for the S operator."""
    _check_applicable(sin_theta_p)
    return sin_theta_p / math.sqrt(1.0 - sin_theta_p)


def scaled_perturbation_norm(op: OperatorRep, sub: Subspace, rank_tol: Optional[float] = None) -> float:
    """||dH_s||, equal to sin(Theta_p)."""
    pair = build_isometries(op, sub, rank_tol)
    return float(np.max(np.abs(symmetric_eig(pair.delta_hs).eigenvalues)))
