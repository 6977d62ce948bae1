"""Inhomogeneous vibrating string on [0, 2].

The operator is -(p u')' with Dirichlet ends, p = 1 on [0, 1] and
p = 1 + eta^2 on (1, 2]. Mode test functions u_n = sqrt(2) sin(n pi x)
live on the soft half and vanish on the stiff half; as eta grows the
operator approaches the Dirichlet Laplacian on [0, 1], whose eigenpairs
are (n^2 pi^2, u_n).
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal, solve_banded
from scipy.optimize import bisect

from .errors import BracketFailureError, MeshTooCoarseError
from .linalg_core import psd_power, symmetric_eig, symmetrize
from .quadrature import integrate

logger = logging.getLogger("ritz-bounds.string")

EPS = float(np.finfo(float).eps)
MIN_MESH = 100
SECULAR_FORMS = ("corrected", "printed")
# limit of 2 pi sqrt(lambda_2) / (lambda_2 - pi^2) as eta -> infinity
UNIFORM_EIGVEC_CONSTANT = 4.0 / 3.0


@dataclass(frozen=True)
class StringSpec:
    """Stiffness contrast of the two string halves."""

    eta: float

    def __post_init__(self):
        if not math.isfinite(self.eta) or self.eta < 0:
            raise ValueError(f"eta must be finite and nonnegative, got {self.eta}")

    @property
    def contrast(self) -> float:
        """Stiffness 1 + eta^2 of the right half."""
        return 1.0 + self.eta * self.eta

    @property
    def kappa(self) -> float:
        """Ratio of left and right wave numbers, sqrt(1 + eta^2)."""
        return math.sqrt(self.contrast)

    def stiffness(self, x: np.ndarray) -> np.ndarray:
        """Coefficient p(x)."""
        return np.where(np.asarray(x) <= 1.0, 1.0, self.contrast)


@dataclass(frozen=True)
class ModeFunction:
    """Test function u_n = sqrt(2) sin(n pi x) on [0, 1], zero on (1, 2]."""

    mode: int

    def __post_init__(self):
        if self.mode < 1:
            raise ValueError(f"mode must be >= 1, got {self.mode}")

    @property
    def frequency(self) -> float:
        return self.mode * math.pi

    @property
    def ritz_value(self) -> float:
        """h(u_n, u_n) = n^2 pi^2 for every eta."""
        return self.frequency**2

    def value(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.where(x <= 1.0, math.sqrt(2.0) * np.sin(self.frequency * x), 0.0)

    def derivative(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.where(
            x <= 1.0, math.sqrt(2.0) * self.frequency * np.cos(self.frequency * x), 0.0
        )

    def breakpoints(self) -> np.ndarray:
        """Half-period grid on [0, 1]."""
        return np.linspace(0.0, 1.0, self.mode + 1)


@dataclass(frozen=True)
class ModeSubspace:
    """Span of the mode test functions, the string analogue of a basis X."""

    modes: tuple[int, ...]

    def __post_init__(self):
        if not self.modes or len(set(self.modes)) != len(self.modes):
            raise ValueError(f"modes must be distinct and non-empty, got {self.modes}")

    @property
    def functions(self) -> list[ModeFunction]:
        return [ModeFunction(n) for n in self.modes]

    @property
    def dimension(self) -> int:
        return len(self.modes)


@dataclass(frozen=True)
class StringEig:
    """
    One eigenpair of the string.

    The eigenfunction is A sin(k_left x) on [0, 1] and B sin(k_right (2 - x))
    on [1, 2], divided by ``norm`` so that it has unit L2 norm.
    """

    index: int
    lam: float
    eta: float
    k_left: float
    k_right: float
    amp_left: float
    amp_right: float
    norm: float
    secular_residual: float
    flux_residual: float
    value_residual: float
    form: str = "corrected"

    def value(self, x: np.ndarray) -> np.ndarray:
        """Normalized eigenfunction."""
        x = np.asarray(x, dtype=float)
        left = self.amp_left * np.sin(self.k_left * x)
        right = self.amp_right * np.sin(self.k_right * (2.0 - x))
        return np.where(x <= 1.0, left, right) / self.norm


def _cot(x: float) -> float:
    return math.cos(x) / math.sin(x)


def _secular(s: float, kappa: float, form: str) -> float:
    """Secular function in the left wave number s = sqrt(lambda)."""
    if form == "corrected":
        return _cot(s) + kappa * _cot(s / kappa)
    return kappa * _cot(s) + _cot(s / kappa)


def _scaled_secular(s: float, kappa: float, form: str) -> float:
    """Secular function times sin(s) sin(s/kappa), relative to its term sizes."""
    t = s / kappa
    if form == "corrected":
        a, b = math.sin(t) * math.cos(s), kappa * math.sin(s) * math.cos(t)
    else:
        a, b = kappa * math.sin(t) * math.cos(s), math.sin(s) * math.cos(t)
    return abs(a + b) / max(abs(a) + abs(b), np.finfo(float).tiny)


def _root_slot(kappa: float, k: int) -> tuple[str, float, float]:
    """
    Locate the k-th root among the poles of both cotangents.

    Between consecutive distinct poles the secular function decreases from
    +inf to -inf, so each gap holds exactly one root; a pole shared by both
    cotangents is itself a root.
    """
    count = k + 2
    poles = sorted(
        [j * math.pi for j in range(1, count + 1)]
        + [j * math.pi * kappa for j in range(1, count + 1)]
    )
    merged: list[list] = []
    for p in poles:
        if merged and abs(p - merged[-1][0]) <= 1e-12 * p:
            merged[-1][1] = True
        else:
            merged.append([p, False])

    slots = []
    lo = 0.0
    for p, shared in merged:
        slots.append(("gap", lo, p))
        if shared:
            slots.append(("pole", p, p))
        lo = p
    if len(slots) < k:
        raise BracketFailureError(f"pole scan found only {len(slots)} brackets for root {k}")
    return slots[k - 1]


def _eig_from_root(spec: StringSpec, k: int, s: float, form: str) -> StringEig:
    kappa = spec.kappa
    t = s / kappa
    amp_left, amp_right = math.sin(t), math.sin(s)
    if max(abs(amp_left), abs(amp_right)) < 1e-8:
        # both halves vanish at x = 1; amplitudes from flux continuity alone
        amp_left, amp_right = -kappa * math.cos(t), math.cos(s)

    norm_sq = amp_left**2 * (0.5 - math.sin(2 * s) / (4 * s)) + amp_right**2 * (
        0.5 - math.sin(2 * t) / (4 * t)
    )
    norm = math.sqrt(norm_sq)

    flux_left = amp_left * s * math.cos(s)
    flux_right = -kappa * s * amp_right * math.cos(t)
    flux_residual = abs(flux_left - flux_right) / max(
        abs(flux_left), abs(flux_right), np.finfo(float).tiny
    )
    value_residual = abs(amp_left * math.sin(s) - amp_right * math.sin(t)) / norm

    return StringEig(
        index=k,
        lam=s * s,
        eta=spec.eta,
        k_left=s,
        k_right=t,
        amp_left=amp_left,
        amp_right=amp_right,
        norm=norm,
        secular_residual=_scaled_secular(s, kappa, form),
        flux_residual=flux_residual,
        value_residual=value_residual,
        form=form,
    )


def secular_solve(
    spec: StringSpec,
    k: int,
    tol: float = 1e-14,
    form: str = "corrected",
) -> StringEig:
    """
    The k-th eigenvalue of the string from its secular equation.

    The corrected equation cot(s) + kappa cot(s / kappa) = 0, s = sqrt(lambda),
    follows from continuity of u and of the flux p u' at x = 1. The
    ``printed`` form swaps the kappa factor and is kept for comparison only.

    Args:
        spec: String parameters
        k: Root index, starting at 1
        tol: Relative bisection tolerance on s
        form: "corrected" or "printed"

    Returns:
        StringEig with eigenvalue, eigenfunction data and residuals
    """
    if k < 1:
        raise ValueError(f"root index must be >= 1, got {k}")
    if form not in SECULAR_FORMS:
        raise ValueError(f"unknown secular form {form!r}")

    kappa = spec.kappa
    kind, lo, hi = _root_slot(kappa, k)
    if kind == "pole":
        logger.debug(f"Root {k} at shared pole s={lo:.12g} (eta={spec.eta})")
        return _eig_from_root(spec, k, lo, form)

    delta = 64.0 * EPS * hi
    a, b = lo + delta, hi - delta
    fa, fb = _secular(a, kappa, form), _secular(b, kappa, form)
    if not (fa > 0.0 > fb):
        raise BracketFailureError(
            f"no sign change for root {k} on s in [{a:.15g}, {b:.15g}] "
            f"(f = {fa:.3e}, {fb:.3e}, eta = {spec.eta})"
        )
    try:
        s = bisect(
            _secular,
            a,
            b,
            args=(kappa, form),
            xtol=np.finfo(float).tiny,
            rtol=max(tol, 4 * EPS),
            maxiter=400,
        )
    except RuntimeError as e:
        raise BracketFailureError(f"bisection failed for root {k}: {e}") from e

    logger.debug(f"Root {k}: s in ({lo:.6g}, {hi:.6g}) -> lambda={s * s:.12g} ({form})")
    return _eig_from_root(spec, k, float(s), form)


def secular_spectrum(
    spec: StringSpec, count: int, tol: float = 1e-14, form: str = "corrected"
) -> list[StringEig]:
    """The lowest ``count`` eigenpairs."""
    return [secular_solve(spec, k, tol, form) for k in range(1, count + 1)]


def string_sweep(etas: Sequence[float], k: int, tol: float = 1e-14) -> list[float]:
    """lambda_k along a sweep of eta values."""
    return [secular_solve(StringSpec(eta), k, tol).lam for eta in etas]


def string_ritz(spec: StringSpec, sub: ModeSubspace, quad_tol: float = 1e-10) -> np.ndarray:
    """
    Rayleigh quotient matrix h(u_m, u_n) over the mode test functions.

    The test functions vanish on the stiff half, so only [0, 1] contributes.
    """
    funcs = sub.functions
    top = max(sub.modes)
    pts = np.linspace(0.0, 1.0, top + 1)
    xi = np.empty((len(funcs), len(funcs)))
    for i, fi in enumerate(funcs):
        for j, fj in enumerate(funcs[i:], start=i):
            val = integrate(
                lambda x, fi=fi, fj=fj: spec.stiffness(x) * fi.derivative(x) * fj.derivative(x),
                pts,
                quad_tol,
            )
            xi[i, j] = xi[j, i] = val
    return xi


def _green_constants(spec: StringSpec, n: int) -> tuple[float, float]:
    """Flux constant C and a = sqrt(2) / (n pi) of the Green's solution."""
    a = math.sqrt(2.0) / (n * math.pi)
    jump = 1.0 - (-1.0) ** n
    c = a * (spec.contrast + jump) / (spec.contrast + 1.0)
    return c, a


def green_solution(spec: StringSpec, n: int) -> Callable[[np.ndarray], np.ndarray]:
    """
    Closed-form w with -(p w')' = u_n, w(0) = w(2) = 0.

    The flux q = p w' equals C - a (1 - cos(n pi x)) on [0, 1] and stays
    constant on [1, 2]; C is fixed by w(2) = 0.
    """
    c, a = _green_constants(spec, n)
    freq = n * math.pi
    w1 = c - a
    q1 = c - a * (1.0 - (-1.0) ** n)

    def w(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        left = (c - a) * x + a * np.sin(freq * x) / freq
        right = w1 + q1 * (x - 1.0) / spec.contrast
        return np.where(x <= 1.0, left, right)

    return w


def green_quadratic_form(spec: StringSpec, n: int, quad_tol: float = 1e-10) -> float:
    """
    (u_n, H^{-1} u_n) by quadrature of u_n times the closed-form Green's solution.

    Equals (1 + 2 / (2 + eta^2)) / (n pi)^2.
    """
    u = ModeFunction(n)
    w = green_solution(spec, n)
    return integrate(lambda x: u.value(x) * w(x), u.breakpoints(), quad_tol)


def green_quadratic_form_exact(spec: StringSpec, n: int) -> float:
    """Closed form of green_quadratic_form."""
    return (1.0 + 2.0 / (2.0 + spec.eta**2)) / (n * math.pi) ** 2


def green_difference(spec: StringSpec, n: int, quad_tol: float = 1e-10) -> float:
    """
    (u_n, H^{-1} u_n - H_inf^+ u_n) by quadrature.

    H_inf^+ u_n = u_n / (n pi)^2 on [0, 1]; the difference equals
    2 / ((2 + eta^2) (n pi)^2).
    """
    u = ModeFunction(n)
    w = green_solution(spec, n)
    scale = u.ritz_value
    return integrate(lambda x: u.value(x) * (w(x) - u.value(x) / scale), u.breakpoints(), quad_tol)


@dataclass(frozen=True)
class StringResidual:
    """Energy-scaled residual measure of one mode test function."""

    eta: float
    mode: int
    green_form: float
    sin_sq: float
    sin_sq_closed: float

    @property
    def sin_theta(self) -> float:
        return math.sqrt(self.sin_sq)

    @property
    def agreement(self) -> float:
        return abs(self.sin_sq - self.sin_sq_closed)


def sin_theta_string(spec: StringSpec, n: int, quad_tol: float = 1e-10) -> StringResidual:
    """
    Residual measure of u_n: sin^2 = (G - 1 / (n pi)^2) / G = 2 / (4 + eta^2).

    G is the Green's quadratic form; its excess over 1 / (n pi)^2 is taken
    from green_difference directly so that no cancellation occurs.
    """
    g = green_quadratic_form(spec, n, quad_tol)
    excess = green_difference(spec, n, quad_tol)
    sin_sq = min(max(excess / g, 0.0), 1.0)
    return StringResidual(
        eta=spec.eta,
        mode=n,
        green_form=g,
        sin_sq=sin_sq,
        sin_sq_closed=2.0 / (4.0 + spec.eta**2),
    )


def green_difference_matrix(spec: StringSpec, sub: ModeSubspace, quad_tol: float = 1e-10) -> np.ndarray:
    """
    D_mn = (u_m, H^{-1} u_n) - (u_m, H_inf^+ u_n) over the mode test functions.

    The diagonal comes from green_difference; off the diagonal H_inf^+ adds
    nothing since the modes are orthogonal, so D_mn = (u_m, w_n), which equals
    2 (-1)^(m+n) / ((2 + eta^2) m n pi^2).
    """
    modes = sub.modes
    pts = np.linspace(0.0, 1.0, max(modes) + 1)
    d = np.empty((len(modes), len(modes)))
    for i, m in enumerate(modes):
        d[i, i] = green_difference(spec, m, quad_tol)
        um = ModeFunction(m)
        for j in range(i + 1, len(modes)):
            w = green_solution(spec, modes[j])
            d[i, j] = d[j, i] = integrate(lambda x, um=um, w=w: um.value(x) * w(x), pts, quad_tol)
    return d


@dataclass(frozen=True)
class SubspaceResidual:
    """Energy-scaled residual measure of a span of mode test functions."""

    eta: float
    modes: tuple[int, ...]
    sin_sq: float
    sin_sq_closed: float

    @property
    def sin_theta(self) -> float:
        return math.sqrt(self.sin_sq)

    @property
    def agreement(self) -> float:
        return abs(self.sin_sq - self.sin_sq_closed)


def subspace_sin_sq_closed(eta: float, dimension: int) -> float:
    """2 N / (2 + eta^2 + 2 N) for a span of N mode test functions."""
    return 2.0 * dimension / (2.0 + eta * eta + 2.0 * dimension)


def sin_theta_subspace(spec: StringSpec, sub: ModeSubspace, quad_tol: float = 1e-10) -> SubspaceResidual:
    """
    Residual measure of the whole mode span.

    With G_mn = (u_m, H^{-1} u_n) and B = diag(1 / (n pi)^2) the inverse Ritz
    matrix, sin^2 is the largest eigenvalue of G^{-1/2} (G - B) G^{-1/2}.
    G - B has rank one, so the value only depends on how many modes are
    spanned; for one mode it is 2 / (4 + eta^2).
    """
    d = green_difference_matrix(spec, sub, quad_tol)
    g = symmetrize(np.diag([1.0 / f.ritz_value for f in sub.functions]) + d)
    root = psd_power(symmetric_eig(g), -0.5)
    top = float(symmetric_eig(symmetrize(root @ d @ root)).eigenvalues[-1])
    result = SubspaceResidual(
        eta=spec.eta,
        modes=sub.modes,
        sin_sq=min(max(top, 0.0), 1.0),
        sin_sq_closed=subspace_sin_sq_closed(spec.eta, sub.dimension),
    )
    logger.debug(f"Mode span {sub.modes}: sin^2 = {result.sin_sq:.12g}")
    return result


@dataclass(frozen=True)
class StringEigvecError:
    """Measured and certified error of the first eigenvector."""

    eta: float
    actual: float
    bound: float
    lambda1: float
    lambda2: float
    sin_theta_p: float
    uniform_constant: float = UNIFORM_EIGVEC_CONSTANT

    @property
    def holds(self) -> bool:
        return self.actual <= self.bound + 1e-10

    def __str__(self) -> str:
        status = "holds" if self.holds else "VIOLATED"
        return f"eta={self.eta}: ||v1 - u1|| = {self.actual:.6e} <= {self.bound:.6e} ({status})"


def eigvec_bound_closed_form(eta: float, lambda2: float) -> float:
    """pi sqrt(lambda_2) / (lambda_2 - pi^2) * 2 / sqrt(4 + eta^2 - sqrt(8 + 2 eta^2))."""
    pi2 = math.pi**2
    e2 = eta * eta
    return (
        math.pi * math.sqrt(lambda2) / (lambda2 - pi2)
        * 2.0 / math.sqrt(4.0 + e2 - math.sqrt(8.0 + 2.0 * e2))
    )


def string_eigvec_error(
    spec: StringSpec, quad_tol: float = 1e-10, secular_tol: float = 1e-14
) -> StringEigvecError:
    """
    Compare ||v_1 - u_1|| with its certified bound.

    v_1 is normalized and its sign chosen so that (v_1, u_1) >= 0.
    """
    if spec.eta < 2:
        raise ValueError(f"eigenvector comparison needs eta >= 2, got {spec.eta}")
    v1 = secular_solve(spec, 1, secular_tol)
    lam2 = secular_solve(spec, 2, secular_tol).lam
    u1 = ModeFunction(1)

    overlap = integrate(lambda x: v1.value(x) * u1.value(x), [0.0, 0.5, 1.0], quad_tol)
    sign = 1.0 if overlap >= 0 else -1.0
    left = integrate(lambda x: (sign * v1.value(x) - u1.value(x)) ** 2, [0.0, 0.5, 1.0], quad_tol)
    right = integrate(lambda x: v1.value(x) ** 2, [1.0, 2.0], quad_tol)

    result = StringEigvecError(
        eta=spec.eta,
        actual=math.sqrt(left + right),
        bound=eigvec_bound_closed_form(spec.eta, lam2),
        lambda1=v1.lam,
        lambda2=lam2,
        sin_theta_p=math.sqrt(2.0 / (4.0 + spec.eta**2)),
    )
    if not result.holds:
        logger.warning(f"Eigenvector bound violated: {result}")
    return result


def _cell_stiffness(spec: StringSpec, edges: np.ndarray) -> np.ndarray:
    """Harmonic mean of p over each cell."""
    width = np.diff(edges)
    soft = np.clip((1.0 - edges[:-1]) / width, 0.0, 1.0)
    return 1.0 / (soft + (1.0 - soft) / spec.contrast)


def _fd_system(spec: StringSpec, cells: int) -> tuple[np.ndarray, np.ndarray, float]:
    h = 2.0 / cells
    coef = _cell_stiffness(spec, np.linspace(0.0, 2.0, cells + 1))
    diag = (coef[:-1] + coef[1:]) / h**2
    off = -coef[1:-1] / h**2
    return diag, off, h


def _check_mesh(mesh_size: int) -> None:
    if mesh_size < MIN_MESH:
        raise MeshTooCoarseError(f"mesh size must be >= {MIN_MESH}, got {mesh_size}")


def _fd_eigenvalues(spec: StringSpec, cells: int, count: int) -> np.ndarray:
    diag, off, _ = _fd_system(spec, cells)
    return eigh_tridiagonal(
        diag,
        off,
        eigvals_only=True,
        select="i",
        select_range=(0, count - 1),
        tol=np.finfo(float).tiny,
    )


def fd_oracle(spec: StringSpec, mesh_size: int = 4000, count: int = 4) -> np.ndarray:
    """
    Lowest eigenvalues from a second-order finite-difference discretization.

    Cells carry the harmonic mean of p, so a cell cut by x = 1 is handled
    exactly. The symmetric tridiagonal eigenvalues come from Sturm-sequence
    bisection; two meshes (mesh_size and 2 * mesh_size cells) are combined
    by Richardson extrapolation.
    """
    _check_mesh(mesh_size)
    if count < 1 or count > mesh_size - 1:
        raise ValueError(f"count must be in [1, {mesh_size - 1}], got {count}")
    coarse = _fd_eigenvalues(spec, mesh_size, count)
    fine = _fd_eigenvalues(spec, 2 * mesh_size, count)
    return (4.0 * fine - coarse) / 3.0


def _fd_green(spec: StringSpec, n: int, cells: int) -> float:
    diag, off, h = _fd_system(spec, cells)
    x = np.linspace(0.0, 2.0, cells + 1)[1:-1]
    f = ModeFunction(n).value(x)
    banded = np.zeros((3, diag.size))
    banded[0, 1:] = off
    banded[1, :] = diag
    banded[2, :-1] = off
    w = solve_banded((1, 1), banded, f)
    return float(h * np.dot(f, w))


def fd_green_form(spec: StringSpec, n: int, mesh_size: int = 4000) -> float:
    """Finite-difference value of (u_n, H^{-1} u_n) with Richardson extrapolation."""
    _check_mesh(mesh_size)
    coarse = _fd_green(spec, n, mesh_size)
    fine = _fd_green(spec, n, 2 * mesh_size)
    return (4.0 * fine - coarse) / 3.0
