"""Seeded property suites over random matrix instances.

Each property draws its own instance from a generator seeded with
(seed, instance, property), so results do not depend on which properties
run or in what order. A property returns True (pass), False (fail) or None
(instance not eligible, counted as skipped).
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .angles import (
    build_isometries,
    deflate_kernel,
    drmac_ratio,
    inverse_image,
    kernel_gap,
    sin_theta_residual,
    subspace_gap,
)
from .bounds import (
    eigenvector_bounds,
    localize,
    match_ritz,
    relative_error,
    s_operator,
    s_operator_bound,
    temple_kato,
)
from .config import ToleranceConfig
from .errors import NotApplicableError
from .forms import (
    OperatorRep,
    Subspace,
    block_split,
    operator_order_leq,
    rayleigh_quotient,
    residual_norm,
)
from .linalg_core import (
    null_space,
    orthonormalize,
    pinv,
    psd_power,
    spectral_norm,
    svd,
    symmetric_eig,
    symmetrize,
)

logger = logging.getLogger("ritz-bounds.selfcheck")

MAX_DIM = 12
MAX_SUBSPACE = 5
MAX_MATCH = 7

Property = Callable[[np.random.Generator, ToleranceConfig], Optional[bool]]
_PROPERTIES: dict[str, Property] = {}


def _property(name: str) -> Callable[[Property], Property]:
    def register(fn: Property) -> Property:
        _PROPERTIES[name] = fn
        return fn

    return register


def property_names() -> list[str]:
    return list(_PROPERTIES)


@dataclass
class PropertyTally:
    """Pass, fail and skip counts of one property."""

    name: str
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    first_failure: Optional[str] = None

    def __str__(self) -> str:
        line = f"{self.name:<26} passed={self.passed} failed={self.failed} skipped={self.skipped}"
        if self.first_failure:
            line += f"  first failure: {self.first_failure}"
        return line


@dataclass
class SelfCheckSummary:
    """Outcome of a selfcheck run."""

    seed: int
    instances: int
    tallies: dict[str, PropertyTally] = field(default_factory=dict)

    @property
    def failures(self) -> int:
        return sum(t.failed for t in self.tallies.values())

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def as_rows(self) -> list[dict]:
        return [
            {"property": t.name, "passed": t.passed, "failed": t.failed, "skipped": t.skipped}
            for t in self.tallies.values()
        ]

    def __str__(self) -> str:
        lines = [f"selfcheck seed={self.seed} instances={self.instances}"]
        lines.extend(str(t) for t in self.tallies.values())
        lines.append("PASS" if self.ok else f"FAIL ({self.failures} failures)")
        return "\n".join(lines)


# Instance generators


def random_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    return orthonormalize(rng.standard_normal((n, n))).basis


def random_spd(rng: np.random.Generator, n: int, lo: float = 0.2, hi: float = 5.0) -> np.ndarray:
    q = random_orthogonal(rng, n)
    lam = rng.uniform(lo, hi, size=n)
    return symmetrize((q * lam) @ q.T)


def random_psd_with_kernel(
    rng: np.random.Generator, n: int, kernel_dim: int
) -> tuple[np.ndarray, np.ndarray]:
    """PSD matrix with an exact kernel of the given dimension, and a kernel basis."""
    q = random_orthogonal(rng, n)
    lam = rng.uniform(0.2, 5.0, size=n)
    lam[:kernel_dim] = 0.0
    return symmetrize((q * lam) @ q.T), q[:, :kernel_dim]


def random_subspace(rng: np.random.Generator, n: int, k: int) -> Subspace:
    return Subspace.from_columns(rng.standard_normal((n, k)))


def _sizes(rng: np.random.Generator, min_n: int = 2) -> tuple[int, int]:
    n = int(rng.integers(min_n, MAX_DIM + 1))
    k = int(rng.integers(1, min(MAX_SUBSPACE, n - 1) + 1))
    return n, k


def _spd_instance(rng: np.random.Generator) -> tuple[OperatorRep, Subspace]:
    n, k = _sizes(rng)
    return OperatorRep.explicit(random_spd(rng, n)), random_subspace(rng, n, k)


# Properties


@_property("eig_reconstruction")
def _eig_reconstruction(rng, tol):
    n = int(rng.integers(1, 17))
    a = symmetrize(rng.standard_normal((n, n)))
    dec = symmetric_eig(a, tol.sym_tol)
    scale = max(float(np.linalg.norm(a)), 1.0)
    recon = np.linalg.norm(a - dec.reconstruct()) <= 1e-12 * scale
    ortho = np.linalg.norm(dec.eigenvectors.T @ dec.eigenvectors - np.eye(n)) <= 1e-12
    ordered = bool(np.all(np.diff(dec.eigenvalues) >= 0))
    return bool(recon and ortho and ordered)


@_property("svd_matches_eig")
def _svd_matches_eig(rng, tol):
    n = int(rng.integers(1, MAX_DIM + 1))
    b = rng.standard_normal((n, n))
    a = symmetrize(b @ b.T)
    sv = svd(a).s
    ev = np.clip(symmetric_eig(a).eigenvalues[::-1], 0.0, None)
    return bool(np.max(np.abs(sv - ev)) <= 1e-12 * max(float(sv[0]), 1.0))


@_property("moore_penrose")
def _moore_penrose(rng, tol):
    n = int(rng.integers(2, MAX_DIM + 1))
    r = int(rng.integers(1, n))
    q = random_orthogonal(rng, n)
    lam = np.zeros(n)
    lam[:r] = rng.uniform(1.0, 10.0, size=r)
    a = symmetrize((q * lam) @ q.T)
    a_pinv = pinv(a, rank_tol=1e-10)
    a_norm = np.linalg.norm(a)
    p_norm = np.linalg.norm(a_pinv)
    ap, pa = a @ a_pinv, a_pinv @ a
    checks = (
        np.linalg.norm(a @ a_pinv @ a - a) <= 1e-11 * a_norm,
        np.linalg.norm(a_pinv @ a @ a_pinv - a_pinv) <= 1e-11 * p_norm,
        np.linalg.norm(ap - ap.T) <= 1e-11,
        np.linalg.norm(pa - pa.T) <= 1e-11,
    )
    return bool(all(checks))


@_property("block_split_invariance")
def _block_split_invariance(rng, tol):
    op, sub = _spd_instance(rng)
    split = block_split(op, sub)
    x = sub.basis
    xi = x.T @ op.dense @ x
    scale = op.norm
    invariant = spectral_norm(split.hprime @ x - x @ xi) <= 1e-11 * scale
    commutes = spectral_norm(sub.projector @ split.hprime - split.hprime @ sub.projector) <= 1e-11 * scale

    complement = null_space(x.T, atol=1e-8)
    parts = [symmetric_eig(symmetrize(xi)).eigenvalues]
    if complement.shape[1]:
        parts.append(symmetric_eig(symmetrize(complement.T @ op.dense @ complement)).eigenvalues)
    expected = np.sort(np.concatenate(parts))
    actual = symmetric_eig(split.hprime).eigenvalues
    spectrum = np.max(np.abs(expected - actual)) <= 1e-10 * scale
    return bool(invariant and commutes and spectrum)


@_property("sandwich")
def _sandwich(rng, tol):
    op, sub = _spd_instance(rng)
    s = sin_theta_residual(op, sub, tol.rank_tol, tol.kernel_tol).sin_theta
    hprime = block_split(op, sub).hprime
    slack = 1e-10 * op.norm
    for _ in range(20):
        u = rng.standard_normal(sub.ambient_dim)
        u /= np.linalg.norm(u)
        h_uu = float(u @ op.dense @ u)
        hp_uu = float(u @ hprime @ u)
        if (1.0 - s) * hp_uu > h_uu + slack or h_uu > (1.0 + s) * hp_uu + slack:
            return False
    return True


@_property("isometry_identities")
def _isometry_identities(rng, tol):
    op, sub = _spd_instance(rng)
    pair = build_isometries(op, sub, tol.rank_tol)
    v, w = pair.v, pair.w
    vtv = v.T @ v
    cross = spectral_norm(v.T @ w)
    idempotent = spectral_norm(vtv @ vtv - vtv) <= 1e-11
    orthogonal = spectral_norm(v @ w.T) <= 1e-11
    delta_norm = abs(spectral_norm(pair.delta_hs) - cross) <= 1e-10
    projectors = abs(spectral_norm((v @ v.T) @ (w @ w.T)) - cross) <= 1e-10
    return bool(idempotent and orthogonal and delta_norm and projectors)


@_property("dual_route")
def _dual_route(rng, tol):
    op, sub = _spd_instance(rng)
    report = sin_theta_residual(op, sub, tol.rank_tol, tol.kernel_tol)
    return bool(report.cross_check_gap <= 1e-9)


@_property("drmac_ratio")
def _drmac_ratio(rng, tol):
    op, sub = _spd_instance(rng)
    report = sin_theta_residual(op, sub, tol.rank_tol, tol.kernel_tol)
    if not report.applicable:
        return None
    ratio = drmac_ratio(op, sub, tol.kernel_tol)
    return bool(abs(ratio - report.eta_theta_p) <= 1e-9 * max(1.0, ratio))


@_property("s_operator")
def _s_operator(rng, tol):
    op, sub = _spd_instance(rng)
    s = sin_theta_residual(op, sub, tol.rank_tol, tol.kernel_tol).sin_theta_p
    if s >= 1.0 - 1e-12:
        return None
    s_mat = s_operator(op, sub, tol.rank_tol)
    within = spectral_norm(s_mat) <= s_operator_bound(s) + 1e-9

    ritz = rayleigh_quotient(op, sub)
    lam, vecs = op.spectrum.eigenvalues, op.spectrum.eigenvectors
    elements = True
    for p in range(lam.size):
        for j, mu in enumerate(ritz.ritz_values):
            u = ritz.ritz_vectors[:, j]
            lhs = float(vecs[:, p] @ s_mat @ u)
            rhs = (lam[p] - mu) / math.sqrt(lam[p] * mu) * float(vecs[:, p] @ u)
            elements = elements and abs(lhs - rhs) <= 1e-9
    return bool(within and elements)


@_property("matcher_bruteforce")
def _matcher_bruteforce(rng, tol):
    total = int(rng.integers(2, MAX_MATCH + 1))
    count = int(rng.integers(1, total + 1))
    eigs = np.sort(rng.uniform(0.0, 10.0, size=total))
    ritz = np.sort(rng.uniform(0.1, 10.0, size=count))
    report = match_ritz(ritz, eigs)
    zero_tol = 1e-12 * max(float(eigs.max()), float(ritz.max()))
    best = math.inf
    for combo in itertools.permutations(range(total), count):
        worst = max(relative_error(eigs[i], mu, zero_tol) for i, mu in zip(combo, ritz))
        best = min(best, worst)
    return bool(abs(report.max_rel_error - best) <= 1e-15 * max(1.0, best))


@_property("monotonicity")
def _monotonicity(rng, tol):
    n = int(rng.integers(2, MAX_DIM + 1))
    b = rng.standard_normal((n, n))
    a = symmetrize(b @ b.T)
    c = rng.standard_normal((n, int(rng.integers(1, n + 1))))
    h = symmetrize(a + c @ c.T)
    if not operator_order_leq(a, h, slack=1e-10):
        return False
    scale = float(symmetric_eig(h).eigenvalues[-1])
    lower = symmetric_eig(a).eigenvalues <= symmetric_eig(h).eigenvalues + 1e-10 * scale

    op = OperatorRep.explicit(random_spd(rng, n))
    sub = random_subspace(rng, n, int(rng.integers(1, min(MAX_SUBSPACE, n - 1) + 1)))
    s = sin_theta_residual(op, sub, tol.rank_tol, tol.kernel_tol).sin_theta
    hprime = block_split(op, sub).hprime
    scaled = (1.0 - s) * hprime
    sandwich = operator_order_leq(scaled, op.dense, slack=1e-10)

    ritz = rayleigh_quotient(op, sub).ritz_values
    lam = op.spectrum.eigenvalues
    interlace = lam[: ritz.size] <= ritz + 1e-10 * op.norm
    return bool(lower.all() and sandwich and interlace.all())


def _near_invariant_instance(rng: np.random.Generator) -> tuple[OperatorRep, Subspace, np.ndarray]:
    n = int(rng.integers(3, MAX_DIM + 1))
    k = int(rng.integers(1, min(MAX_SUBSPACE, n - 1) + 1))
    q = random_orthogonal(rng, n)
    lam = 1.0 + np.arange(n) + rng.uniform(0.0, 0.5, size=n)
    h = symmetrize((q * lam) @ q.T)
    x = q[:, :k] + 1e-4 * rng.standard_normal((n, k))
    return OperatorRep.explicit(h), Subspace.from_columns(x), q


@_property("eigvec_bound")
def _eigvec_bound(rng, tol):
    op, sub, _ = _near_invariant_instance(rng)
    report = sin_theta_residual(op, sub, tol.rank_tol, tol.kernel_tol)
    if not report.applicable:
        return None
    ritz = rayleigh_quotient(op, sub)
    lam = op.spectrum.eigenvalues
    match = match_ritz(ritz.ritz_values, lam, report.sin_theta_p)
    vectors = eigenvector_bounds(
        ritz.ritz_values,
        lam,
        match.permutation,
        report.sin_theta_p,
        ritz.ritz_vectors,
        op.spectrum.eigenvectors,
    )
    local = localize(ritz.ritz_values, lam, report.sin_theta_p, mode="lower")
    return bool(vectors.holds and local.applies and all(local.per_pair_ok))


@_property("matching_validity")
def _matching_validity(rng, tol):
    op, sub = _spd_instance(rng)
    report = sin_theta_residual(op, sub, tol.rank_tol, tol.kernel_tol)
    if not report.applicable:
        return None
    ritz = rayleigh_quotient(op, sub).ritz_values
    lam = op.spectrum.eigenvalues
    match = match_ritz(ritz, lam, report.sin_theta_p)
    relative = match.max_rel_error <= report.sin_theta_p + 1e-10
    lam_side = all(
        abs(lam[i] - mu) <= lam[i] * report.eta_theta_p + 1e-10
        for i, mu in zip(match.permutation, ritz)
    )
    return bool(relative and lam_side)


@_property("temple_kato_validity")
def _temple_kato_validity(rng, tol):
    n = int(rng.integers(2, MAX_DIM + 1))
    op = OperatorRep.explicit(random_spd(rng, n))
    lam = op.spectrum.eigenvalues
    u = rng.standard_normal(n)
    u /= np.linalg.norm(u)
    mu = float(u @ op.dense @ u)
    if mu >= lam[1] * (1.0 - 1e-9):
        return None
    return bool(temple_kato(op, u, float(lam[1])).bound <= lam[0] + 1e-12)


def _kernel_instance(rng: np.random.Generator) -> tuple[OperatorRep, Subspace]:
    n = int(rng.integers(4, MAX_DIM + 1))
    kernel_dim = int(rng.integers(1, 3))
    h, kernel = random_psd_with_kernel(rng, n, kernel_dim)
    k = int(rng.integers(1, min(MAX_SUBSPACE, n - kernel_dim - 1) + 1))
    x = rng.standard_normal((n, k))
    x -= kernel @ (kernel.T @ x)
    return OperatorRep.explicit(h), Subspace.from_columns(x)


@_property("kernel_certificate")
def _kernel_certificate(rng, tol):
    op, sub = _kernel_instance(rng)
    report = sin_theta_residual(op, sub, tol.kernel_tol, tol.kernel_tol)
    if not report.applicable:
        return None
    gap_ok = kernel_gap(op, sub, tol.kernel_tol) <= 1e-9
    try:
        reduced_op, reduced_sub = deflate_kernel(op, sub, tol.kernel_tol, tol.kernel_tol)
    except NotApplicableError:
        return False
    reduced = sin_theta_residual(reduced_op, reduced_sub, tol.kernel_tol, tol.kernel_tol)
    deflated_ok = abs(reduced.route1 - report.sin_theta_p) <= 1e-8
    return bool(gap_ok and deflated_ok)


@_property("inverse_image")
def _inverse_image(rng, tol):
    op, sub = _kernel_instance(rng)
    pair = build_isometries(op, sub, tol.kernel_tol)
    preimage = inverse_image(op, sub, tol.kernel_tol)
    w_perp = null_space(pair.w.T, atol=1e-8)
    direct = orthonormalize(
        np.column_stack([psd_power(op.spectrum, -0.5, tol.kernel_tol) @ sub.basis, _kernel(op, tol)]),
        1e-8,
    ).basis
    return bool(subspace_gap(preimage, w_perp) <= 1e-10 and subspace_gap(preimage, direct) <= 1e-10)


def _kernel(op: OperatorRep, tol: ToleranceConfig) -> np.ndarray:
    lam = op.spectrum.eigenvalues
    return op.spectrum.eigenvectors[:, lam <= tol.kernel_tol * lam[-1]]


@_property("invariant_subspace")
def _invariant_subspace(rng, tol):
    n, k = _sizes(rng)
    op = OperatorRep.explicit(random_spd(rng, n))
    idx = np.sort(rng.choice(n, size=k, replace=False))
    sub = Subspace(basis=op.spectrum.eigenvectors[:, idx])
    report = sin_theta_residual(op, sub, tol.rank_tol, tol.kernel_tol)
    return bool(report.route2 <= 1e-10 and residual_norm(op, sub) <= 1e-10 * op.norm)


def run_selfcheck(
    seed: int = 42,
    count: int = 200,
    tolerances: Optional[ToleranceConfig] = None,
    names: Optional[list[str]] = None,
) -> SelfCheckSummary:
    """
    Run the property suites on seeded random instances.

    Args:
        seed: Base seed
        count: Number of instances per property
        tolerances: Tolerance settings (defaults when None)
        names: Subset of property names (all when None)

    Returns:
        SelfCheckSummary
    """
    if count < 1:
        raise ValueError(f"instance count must be at least 1, got {count}")
    tolerances = tolerances or ToleranceConfig()
    selected = names or property_names()
    unknown = set(selected) - set(_PROPERTIES)
    if unknown:
        raise ValueError(f"unknown properties: {sorted(unknown)}")

    summary = SelfCheckSummary(seed=seed, instances=count)
    for index, name in enumerate(property_names()):
        if name not in selected:
            continue
        tally = PropertyTally(name)
        check = _PROPERTIES[name]
        for instance in range(count):
            rng = np.random.default_rng([seed, instance, index])
            try:
                outcome = check(rng, tolerances)
            except NotApplicableError:
                outcome = None
            except Exception as e:
                logger.error(f"Property {name} raised on instance {instance}: {e}")
                outcome = False
                tally.first_failure = tally.first_failure or f"instance {instance}: {e}"
            if outcome is None:
                tally.skipped += 1
            elif outcome:
                tally.passed += 1
            else:
                tally.failed += 1
                tally.first_failure = tally.first_failure or f"instance {instance}"
        logger.debug(str(tally))
        summary.tallies[name] = tally
    return summary
