"""Command-line interface producing certified reports."""

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .angles import sin_theta_residual
from .bounds import (
    absolute_interval,
    eigenvector_bounds,
    localize,
    match_ritz,
    relative_interval,
    temple_kato,
)
from .config import OUTPUT_FORMATS, RunConfig, load_config
from .errors import (
    BracketFailureError,
    DimensionMismatchError,
    EmptySpanError,
    GammaNotAboveMuError,
    NotApplicableError,
    NotPositiveSemidefiniteError,
    NotSymmetricError,
    ParseError,
    RitzBoundsError,
)
from .forms import (
    OperatorRep,
    Subspace,
    block_split,
    h_eta_eigenvalues,
    h_eta_factor,
    h_eta_printed,
    rayleigh_quotient,
    residual_norm,
)
from .linalg_core import pinv
from .matrix_io import MatrixFile, read_matrix
from .reference_values import (
    FACTOR_NOTE,
    RITZ_VALUE,
    TEMPLE_KATO_NOTE,
    match_flag,
    published_sin_theta_bound,
    published_temple_kato,
)
from .reports import ReportDocument
from .selfcheck import run_selfcheck
from .string_model import (
    UNIFORM_EIGVEC_CONSTANT,
    ModeSubspace,
    StringSpec,
    fd_oracle,
    green_quadratic_form_exact,
    secular_spectrum,
    sin_theta_string,
    sin_theta_subspace,
    string_eigvec_error,
)

logger = logging.getLogger("ritz-bounds.cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_APPLICABLE = 2
EXIT_NUMERICAL = 3

INPUT_ERRORS = (
    ParseError,
    DimensionMismatchError,
    NotSymmetricError,
    NotPositiveSemidefiniteError,
    EmptySpanError,
)

SECULAR_NOTE = (
    "Eigenvalues solve cot(s) + kappa cot(s / kappa) = 0 with s = sqrt(lambda) and "
    "kappa = sqrt(1 + eta^2), from continuity of u and of the flux at x = 1; the "
    "commonly printed form with the kappa factor swapped is listed as lambda_printed."
)
SIN_SQ_NOTE = (
    "The quantity 2 / (4 + eta^2) is sin^2(Theta), not sin(Theta); the bound check "
    "uses its square root."
)
UNIFORM_NOTE = (
    f"The large-eta limit {UNIFORM_EIGVEC_CONSTANT:.6g} of the eigenvector bound "
    "prefactor is reported without independent verification."
)


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors with exit code 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _metadata(config: RunConfig, **extra) -> dict:
    return {**config.as_metadata(), **extra}


def parse_eta_list(text: str) -> list[float]:
    """Parse a comma-separated list of positive eta values."""
    try:
        etas = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"eta list must be comma-separated numbers, got {text!r}")
    if not etas:
        raise ValueError("eta list is empty")
    for eta in etas:
        if not eta > 0 or not math.isfinite(eta):
            raise ValueError(f"eta values must be positive and finite, got {eta}")
    return etas


def build_table1(etas: Sequence[float], config: RunConfig) -> ReportDocument:
    """
    Lower estimates of lambda_1 for the two-by-two family from e_1.

    Args:
        etas: Positive eta values
        config: Run configuration

    Returns:
        ReportDocument with one row per eta
    """
    tol = config.tolerances
    report = ReportDocument(command="table1", metadata=_metadata(config))
    e1 = Subspace(basis=np.array([[1.0], [0.0]]))
    rows = []
    for eta in etas:
        if not eta > 0:
            raise ValueError(f"eta must be positive, got {eta}")
        op = OperatorRep.factor(h_eta_factor(eta))
        mu = float(rayleigh_quotient(op, e1, tol.sym_tol).ritz_values[0])
        angles = sin_theta_residual(op, e1, tol.rank_tol, tol.kernel_tol)
        sin_theta = angles.route1 if angles.route1 is not None else angles.sin_theta_p
        lower = relative_interval(mu, sin_theta).lo
        lam1, lam2 = h_eta_eigenvalues(eta)
        tk = temple_kato(op, e1.basis[:, 0], lam2)

        hprime = block_split(op, e1).hprime
        printed_inv = 1.0 / h_eta_printed(eta)[1, 1]
        sin_published = published_sin_theta_bound(eta)
        tk_published = published_temple_kato(eta)
        rows.append(
            {
                "eta": eta,
                "mu_e": mu,
                "sin_theta": sin_theta,
                "sin_theta_bound": lower,
                "sin_theta_published": sin_published,
                "sin_theta_flag": match_flag(lower, sin_published),
                "temple_kato": tk.bound,
                "temple_kato_published": tk_published,
                "temple_kato_flag": match_flag(tk.bound, tk_published),
                "lambda_1": lam1,
                "hprime_inv_22_factored": float(pinv(hprime)[1, 1]),
                "hprime_inv_22_printed": printed_inv,
            }
        )
        if abs(mu - RITZ_VALUE) > 1e-15:
            logger.warning(f"Ritz value {mu!r} differs from {RITZ_VALUE} at eta={eta}")

    report.add_section("lower_estimates", rows)
    if any(row["temple_kato_flag"] == "mismatch" for row in rows):
        logger.info("Published Temple-Kato cells do not match the computed column")
        report.add_note(TEMPLE_KATO_NOTE)
    report.add_note(FACTOR_NOTE)
    return report


def _operator_from_file(matrix: MatrixFile, config: RunConfig) -> OperatorRep:
    if matrix.is_factor:
        return OperatorRep.factor(matrix.matrix)
    return OperatorRep.explicit(matrix.matrix, config.tolerances.sym_tol)


def build_bounds_report(
    matrix: MatrixFile,
    basis: MatrixFile,
    config: RunConfig,
    gamma: Optional[float] = None,
    inner_offset: Optional[int] = None,
) -> ReportDocument:
    """
    Full certification pipeline for a matrix and a test basis.

    Args:
        matrix: Operator file (H, or a factor R)
        basis: Test basis file, one column per vector
        config: Run configuration
        gamma: Temple-Kato parameter (default lambda_2)
        inner_offset: 0-based first eigenvalue of an inner block

    Returns:
        ReportDocument; status "not_applicable" when sin(Theta_p) = 1 and
        "failed" when a matched pair or Ritz vector exceeds its bound
    """
    tol = config.tolerances
    op = _operator_from_file(matrix, config)
    if basis.matrix.shape[0] != op.dimension:
        raise DimensionMismatchError(
            f"{basis.path}: basis has {basis.matrix.shape[0]} rows, "
            f"operator in {matrix.path} has dimension {op.dimension}"
        )
    sub = Subspace.from_columns(basis.matrix, tol.rank_tol)
    report = ReportDocument(
        command="bounds",
        metadata=_metadata(config, matrix=matrix.path, basis=basis.path, factor=matrix.is_factor),
    )
    if sub.dropped:
        report.add_note(f"{sub.dropped} linearly dependent basis column(s) dropped")

    ritz = rayleigh_quotient(op, sub, tol.sym_tol)
    mus = ritz.ritz_values
    report.add_section("ritz", [{"index": j, "mu": float(mu)} for j, mu in enumerate(mus)])

    angles = sin_theta_residual(op, sub, tol.rank_tol, tol.kernel_tol)
    report.add_section("angles", angles.as_dict())

    residual = residual_norm(op, sub)
    lams = np.clip(op.spectrum.eigenvalues, 0.0, None)

    if not angles.applicable:
        logger.info(f"sin(Theta_p) = {angles.sin_theta_p:.6g}; bounds not applicable")
        report.status = "not_applicable"
        absolute = [absolute_interval(float(mu), residual) for mu in mus]
        report.add_section(
            "intervals",
            [{"mu": a.mu, "abs_lo": a.lo, "abs_hi": a.hi} for a in absolute],
        )
        report.add_note("sin(Theta_p) = 1: relative bounds are not applicable")
        return report

    s = angles.sin_theta_p
    intervals = []
    for mu in mus:
        rel = relative_interval(float(mu), s)
        absolute = absolute_interval(float(mu), residual)
        intervals.append(
            {"mu": float(mu), "lo": rel.lo, "hi": rel.hi, "abs_lo": absolute.lo, "abs_hi": absolute.hi}
        )
    report.add_section("intervals", intervals)

    match = match_ritz(mus, lams, s)
    report.add_section("matching", match.as_rows(mus, lams))

    if inner_offset is None:
        local = localize(mus, lams, s, mode="lower")
    else:
        local = localize(mus, lams, s, mode="inner", offset=inner_offset)
    report.add_section("localization", local.as_dict())

    vectors = eigenvector_bounds(
        mus, lams, match.permutation, s, ritz.ritz_vectors, op.spectrum.eigenvectors
    )
    report.add_section("eigenvectors", vectors.as_rows())

    report.add_section("temple_kato", _temple_kato_section(op, ritz, lams, gamma, report))
    if not (all(match.bound_satisfied) and vectors.holds):
        logger.error(f"A certified bound was violated for {basis.path}")
        report.status = "failed"
    return report


def _temple_kato_section(op, ritz, lams, gamma, report: ReportDocument) -> dict:
    if gamma is None:
        if lams.size < 2:
            report.add_note("Temple-Kato needs lambda_2; skipped for a one-dimensional operator")
            return {"gamma": None, "bound": None}
        gamma = float(lams[1])
    u = ritz.ritz_vectors[:, 0]
    u = u / np.linalg.norm(u)
    try:
        tk = temple_kato(op, u, gamma)
    except GammaNotAboveMuError as e:
        report.add_note(f"Temple-Kato skipped: {e}")
        return {"gamma": gamma, "bound": None}
    return {
        "gamma": gamma,
        "mu": tk.mu,
        "residual_sq": tk.residual_sq,
        "bound": tk.bound,
        "vacuous": tk.vacuous,
        "lambda_1": float(lams[0]),
    }


def build_string_report(eta: float, modes: int, config: RunConfig) -> ReportDocument:
    """
    Eigenvalues, residual measures and bounds for the inhomogeneous string.

    Args:
        eta: Contrast parameter, positive
        modes: Number of mode test functions
        config: Run configuration

    Returns:
        ReportDocument; status "failed" if a certified bound is violated
    """
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if modes < 1:
        raise ValueError(f"modes must be at least 1, got {modes}")
    tol = config.tolerances
    spec = StringSpec(eta)
    count = modes + 1
    report = ReportDocument(command="string", metadata=_metadata(config, eta=eta, modes=modes))

    eigs = secular_spectrum(spec, count, tol.secular_tol)
    try:
        printed = [e.lam for e in secular_spectrum(spec, count, tol.secular_tol, form="printed")]
    except BracketFailureError as e:
        logger.warning(f"Printed secular form not solvable: {e}")
        printed = [None] * count
    fd = fd_oracle(spec, config.mesh_size, count)

    report.add_section(
        "eigenvalues",
        [
            {
                "k": e.index,
                "lambda": e.lam,
                "lambda_fd": float(f),
                "fd_rel_diff": abs(e.lam - f) / e.lam,
                "lambda_printed": p,
                "k2pi2": (e.index * math.pi) ** 2,
                "flux_residual": e.flux_residual,
            }
            for e, f, p in zip(eigs, fd, printed)
        ],
    )

    residual_rows = []
    for n in range(1, modes + 1):
        res = sin_theta_string(spec, n, tol.quad_tol)
        residual_rows.append(
            {
                "mode": n,
                "green_form": res.green_form,
                "green_form_exact": green_quadratic_form_exact(spec, n),
                "sin_sq": res.sin_sq,
                "sin_sq_closed": res.sin_sq_closed,
            }
        )
    report.add_section("residuals", residual_rows)

    op = OperatorRep.string_operator(eta)
    sub = ModeSubspace(tuple(range(1, modes + 1)))
    ritz = rayleigh_quotient(op, sub, tol.sym_tol, tol.quad_tol)
    span = sin_theta_subspace(spec, sub, tol.quad_tol)
    report.add_section(
        "subspace",
        {
            "modes": list(span.modes),
            "sin_sq": span.sin_sq,
            "sin_sq_closed": span.sin_sq_closed,
            "sin_theta": span.sin_theta,
        },
    )
    s = span.sin_theta
    lams = [e.lam for e in eigs]
    match = match_ritz(ritz.ritz_values, lams, s)
    report.add_section("matching", match.as_rows(ritz.ritz_values, lams))
    certified = all(match.bound_satisfied)

    if eta >= 2:
        error = string_eigvec_error(spec, tol.quad_tol, tol.secular_tol)
        generic = eigenvector_bounds([math.pi**2], lams, (0,), error.sin_theta_p).bounds[0]
        report.add_section(
            "eigenvector",
            {
                "actual": error.actual,
                "bound": error.bound,
                "generic_bound": generic,
                "holds": error.holds,
                "uniform_constant": error.uniform_constant,
            },
        )
        certified = certified and error.holds
        report.add_note(UNIFORM_NOTE)
    else:
        report.add_note("Eigenvector comparison needs eta >= 2; skipped")

    report.add_note(SECULAR_NOTE)
    report.add_note(SIN_SQ_NOTE)
    if not certified:
        logger.error(f"A certified bound was violated for eta={eta}")
        report.status = "failed"
    return report


def build_selfcheck_report(seed: int, count: int, config: RunConfig) -> ReportDocument:
    """Run the property suites and wrap the tallies in a report."""
    summary = run_selfcheck(seed, count, config.tolerances)
    report = ReportDocument(
        command="selfcheck",
        metadata=_metadata(config, seed=seed, instances=count),
        status="ok" if summary.ok else "failed",
    )
    report.add_section("properties", summary.as_rows())
    for tally in summary.tallies.values():
        if tally.first_failure:
            report.add_note(f"{tally.name}: {tally.first_failure}")
    return report


def _exit_code(report: ReportDocument) -> int:
    return {
        "ok": EXIT_OK,
        "not_applicable": EXIT_NOT_APPLICABLE,
        "failed": EXIT_NUMERICAL,
    }[report.status]


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=OUTPUT_FORMATS, dest="output_format",
                        help="Report format (default: text)")
    common.add_argument("--config", help="YAML configuration file")
    common.add_argument("--output", help="Write the report to this file instead of stdout")
    common.add_argument("--rank-tol", type=float, help="Relative rank tolerance")
    common.add_argument("--sym-tol", type=float, help="Symmetry tolerance")
    common.add_argument("--quad-tol", type=float, help="Quadrature tolerance")
    common.add_argument("--secular-tol", type=float, help="Secular root tolerance")
    common.add_argument("--kernel-tol", type=float, help="Relative kernel threshold")
    common.add_argument("--verbose", "-v", action="store_true", help="Debug logging")

    parser = _Parser(
        prog="ritz-bounds",
        description="Certified relative error bounds for Rayleigh-Ritz approximations",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    table = commands.add_parser("table1", parents=[common],
                                help="Lower estimates for the two-by-two family")
    table.add_argument("--eta-list", default="1,2,3,4,5", help="Comma-separated eta values")

    bounds = commands.add_parser("bounds", parents=[common],
                                 help="Certify a test basis against a matrix")
    bounds.add_argument("--matrix", required=True, help="Matrix file (H or a '# factor' R)")
    bounds.add_argument("--basis", required=True, help="Basis file, one column per vector")
    bounds.add_argument("--gamma", type=float, help="Temple-Kato parameter (default lambda_2)")
    bounds.add_argument("--inner-offset", type=int,
                        help="0-based index of the first eigenvalue of an inner block")

    string = commands.add_parser("string", parents=[common],
                                 help="Inhomogeneous string model")
    string.add_argument("--eta", type=float, required=True, help="Contrast parameter")
    string.add_argument("--modes", type=int, default=1, help="Number of mode test functions")
    string.add_argument("--mesh", type=int, dest="mesh_size", help="FD oracle cells")

    check = commands.add_parser("selfcheck", parents=[common], help="Run the property suites")
    check.add_argument("--seed", type=int, help="Base seed (default RITZ_SEED or 42)")
    check.add_argument("--count", type=int, default=200, help="Instances per property")
    return parser


def _run(args: argparse.Namespace, config: RunConfig) -> ReportDocument:
    if args.command == "table1":
        return build_table1(parse_eta_list(args.eta_list), config)
    if args.command == "bounds":
        return build_bounds_report(
            read_matrix(args.matrix), read_matrix(args.basis), config, args.gamma, args.inner_offset
        )
    if args.command == "string":
        return build_string_report(args.eta, args.modes, config)
    return build_selfcheck_report(config.seed, args.count, config)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )

    try:
        config = load_config(
            args.config,
            output_format=args.output_format,
            rank_tol=args.rank_tol,
            sym_tol=args.sym_tol,
            quad_tol=args.quad_tol,
            secular_tol=args.secular_tol,
            kernel_tol=args.kernel_tol,
            seed=getattr(args, "seed", None),
            mesh_size=getattr(args, "mesh_size", None),
        )
        report = _run(args, config)
    except NotApplicableError as e:
        logger.error(f"Not applicable: {e}")
        return EXIT_NOT_APPLICABLE
    except INPUT_ERRORS as e:
        logger.error(str(e))
        return EXIT_USAGE
    except RitzBoundsError as e:
        logger.error(f"Numerical failure: {e}")
        return EXIT_NUMERICAL
    except ValueError as e:
        logger.error(str(e))
        return EXIT_USAGE

    text = report.render(config.output_format)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        logger.info(f"Wrote {args.command} report to {args.output}")
    else:
        sys.stdout.write(text)
    return _exit_code(report)


if __name__ == "__main__":
    sys.exit(main())
