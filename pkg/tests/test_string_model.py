"""Tests for string_model module."""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from ritz_bounds.bounds import eigenvector_bounds, match_ritz
from ritz_bounds.errors import MeshTooCoarseError
from ritz_bounds.quadrature import integrate
from ritz_bounds.string_model import (
    ModeFunction,
    ModeSubspace,
    StringSpec,
    eigvec_bound_closed_form,
    fd_green_form,
    fd_oracle,
    green_difference,
    green_difference_matrix,
    green_quadratic_form,
    green_quadratic_form_exact,
    green_solution,
    secular_solve,
    secular_spectrum,
    sin_theta_string,
    sin_theta_subspace,
    string_eigvec_error,
    string_ritz,
    string_sweep,
    subspace_sin_sq_closed,
)

PI2 = math.pi**2


class TestStringSpec:
    """Tests for string parameters and test functions."""

    def test_rejects_negative_eta(self):
        """Test that eta must be nonnegative."""
        with pytest.raises(ValueError):
            StringSpec(-1.0)

    def test_stiffness(self):
        """Test p = 1 on the soft half and 1 + eta^2 on the stiff half."""
        spec = StringSpec(2.0)
        np.testing.assert_array_equal(spec.stiffness([0.5, 1.0, 1.5]), [1.0, 1.0, 5.0])
        assert spec.kappa == pytest.approx(math.sqrt(5.0))

    def test_mode_function_support(self):
        """Test that u_n vanishes on the stiff half."""
        u = ModeFunction(2)
        assert u.value(np.array([1.5]))[0] == 0.0
        assert u.ritz_value == pytest.approx(4.0 * PI2)
        with pytest.raises(ValueError):
            ModeFunction(0)

    def test_mode_subspace_distinct(self):
        """Test that repeated modes are rejected."""
        with pytest.raises(ValueError):
            ModeSubspace((1, 1))


class TestSecularSolve:
    """Tests for the secular equation."""

    def test_moderate_contrast(self):
        """Test lambda_1 at eta = 2."""
        eig = secular_solve(StringSpec(2.0), 1)
        assert eig.lam == pytest.approx(5.93, abs=0.01)
        assert eig.flux_residual < 1e-9
        assert eig.value_residual < 1e-9

    def test_large_contrast_limit(self):
        """Test that lambda_1 approaches pi^2 from below."""
        lam = secular_solve(StringSpec(1000.0), 1).lam
        assert lam < PI2
        assert lam == pytest.approx(PI2, abs=1e-4)

    @pytest.mark.parametrize("eta", [2.0, 5.0, 10.0, 100.0])
    def test_continuity_residuals(self, eta):
        """Test value and flux continuity at x = 1 for the first roots."""
        for eig in secular_spectrum(StringSpec(eta), 4):
            assert eig.flux_residual < 1e-9
            assert eig.value_residual < 1e-9

    def test_spectrum_ascending(self):
        """Test that roots come out in increasing order."""
        lams = [e.lam for e in secular_spectrum(StringSpec(3.0), 5)]
        assert all(a < b for a, b in zip(lams, lams[1:]))

    def test_sweep_monotone(self):
        """Test that a stiffer string has a larger lambda_1."""
        lams = string_sweep([1.0, 2.0, 5.0, 20.0], 1)
        assert all(a < b for a, b in zip(lams, lams[1:]))
        assert lams[-1] < PI2

    def test_eigenfunction_normalized(self):
        """Test that the eigenfunction has unit L2 norm."""
        eig = secular_solve(StringSpec(2.0), 2)
        norm_sq = integrate(lambda x: eig.value(x) ** 2, [0.0, 1.0, 2.0], 1e-12)
        assert norm_sq == pytest.approx(1.0, rel=1e-10)

    def test_rejects_bad_arguments(self):
        """Test root index and form validation."""
        with pytest.raises(ValueError):
            secular_solve(StringSpec(2.0), 0)
        with pytest.raises(ValueError):
            secular_solve(StringSpec(2.0), 1, form="other")


class TestFiniteDifferences:
    """Tests for the finite-difference oracle."""

    @pytest.mark.parametrize("eta", [2.0, 5.0, 10.0])
    def test_agrees_with_secular(self, eta):
        """Test FD eigenvalues on 4000 cells against the secular roots."""
        spec = StringSpec(eta)
        fd = fd_oracle(spec, mesh_size=4000, count=3)
        exact = [e.lam for e in secular_spectrum(spec, 3)]
        np.testing.assert_allclose(fd, exact, rtol=1e-4)

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_below_dirichlet_limit_and_increasing(self, k):
        """Test lambda_k < k^2 pi^2 and that lambda_k grows with eta."""
        lams = string_sweep([2.0, 5.0, 10.0], k)
        assert all(a < b for a, b in zip(lams, lams[1:]))
        assert lams[-1] < k * k * PI2

    def test_mesh_too_coarse(self):
        """Test that a tiny mesh is refused."""
        with pytest.raises(MeshTooCoarseError):
            fd_oracle(StringSpec(2.0), mesh_size=50)

    @pytest.mark.parametrize("eta", [1.0, 10.0, 100.0])
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_green_form(self, n, eta):
        """Test the FD Green's form against the closed form."""
        spec = StringSpec(eta)
        assert fd_green_form(spec, n, mesh_size=4000) == pytest.approx(
            green_quadratic_form_exact(spec, n), rel=1e-8
        )


class TestGreenForm:
    """Tests for the residual measure of the mode test functions."""

    def test_boundary_values(self):
        """Test w(0) = w(2) = 0."""
        w = green_solution(StringSpec(2.0), 1)
        np.testing.assert_allclose(w(np.array([0.0, 2.0])), [0.0, 0.0], atol=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_quadratic_form(self, n):
        """Test G = (1 + 2/(2 + eta^2)) / (n pi)^2."""
        spec = StringSpec(2.0)
        assert green_quadratic_form(spec, n) == pytest.approx(
            green_quadratic_form_exact(spec, n), rel=1e-10
        )

    @pytest.mark.parametrize("eta", [1.0, 2.0, 5.0, 10.0])
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_difference(self, n, eta):
        """Test the excess over 1/(n pi)^2."""
        expected = 2.0 / ((2.0 + eta**2) * (n * math.pi) ** 2)
        assert green_difference(StringSpec(eta), n) == pytest.approx(expected, rel=1e-8)

    @pytest.mark.parametrize("eta", [1.0, 2.0, 5.0, 10.0])
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_sin_sq(self, n, eta):
        """Test sin^2 = 2/(4 + eta^2) for every mode."""
        res = sin_theta_string(StringSpec(eta), n)
        assert res.sin_sq == pytest.approx(2.0 / (4.0 + eta**2), rel=1e-8)
        assert res.agreement < 1e-10

    def test_sin_sq_large_contrast(self):
        """Test the single-mode measure at eta = 100."""
        res = sin_theta_string(StringSpec(100.0), 1)
        assert res.sin_sq == pytest.approx(2.0 / 10004.0, rel=1e-8)

    def test_ritz_matrix(self):
        """Test that the mode functions give diag(n^2 pi^2)."""
        xi = string_ritz(StringSpec(2.0), ModeSubspace((1, 2)))
        np.testing.assert_allclose(np.diag(xi), [PI2, 4.0 * PI2], rtol=1e-10)
        assert abs(xi[0, 1]) < 1e-8


class TestEigenvectorError:
    """Tests for the first-eigenvector error and its bound."""

    @pytest.mark.parametrize("eta", [2.0, 5.0, 10.0, 50.0, 100.0])
    def test_bound_holds(self, eta):
        """Test ||v1 - u1|| against the certified bound."""
        result = string_eigvec_error(StringSpec(eta))
        assert result.holds
        assert result.actual > 0

    def test_decay(self):
        """Test that bound and error shrink like 1/eta."""
        a = string_eigvec_error(StringSpec(10.0))
        b = string_eigvec_error(StringSpec(100.0))
        assert 0.05 <= b.bound / a.bound <= 0.2
        assert b.actual / a.actual <= 0.2

    @pytest.mark.parametrize("eta", [5.0, 10.0, 50.0])
    def test_generic_bound_matches_closed_form(self, eta):
        """Test the generic Ritz vector bound against the closed form."""
        lams = [e.lam for e in secular_spectrum(StringSpec(eta), 4)]
        s = math.sqrt(2.0 / (4.0 + eta**2))
        generic = eigenvector_bounds([PI2], lams, (0,), s).bounds[0]
        assert generic == pytest.approx(eigvec_bound_closed_form(eta, lams[1]), rel=1e-12)

    def test_requires_contrast(self):
        """Test that small eta is refused."""
        with pytest.raises(ValueError):
            string_eigvec_error(StringSpec(1.0))


class TestSubspaceResidual:
    """Tests for the residual measure of a span of several modes."""

    @pytest.mark.parametrize("eta", [1.0, 5.0])
    def test_cross_terms(self, eta):
        """Test D_mn = 2 (-1)^(m+n) / ((2 + eta^2) m n pi^2)."""
        d = green_difference_matrix(StringSpec(eta), ModeSubspace((1, 2, 3)))
        n = np.arange(1, 4)
        z = (-1.0) ** n / (n * math.pi)
        np.testing.assert_allclose(d, 2.0 / (2.0 + eta**2) * np.outer(z, z), rtol=1e-9)

    @pytest.mark.parametrize(
        "eta, expected", [(1.0, 2.0 / 3.0), (2.0, 0.5), (5.0, 2.0 / 11.0)]
    )
    def test_three_modes(self, eta, expected):
        """Test sin^2 of span{u_1, u_2, u_3} = 6 / (8 + eta^2)."""
        res = sin_theta_subspace(StringSpec(eta), ModeSubspace((1, 2, 3)))
        assert res.sin_sq == pytest.approx(expected, rel=1e-8)
        assert res.agreement < 1e-10

    @pytest.mark.parametrize("eta", [1.0, 2.0, 10.0, 100.0])
    @pytest.mark.parametrize("modes", [(1,), (1, 2), (2, 3), (1, 3), (1, 2, 3, 4)])
    def test_closed_form(self, modes, eta):
        """Test sin^2 = 2 N / (2 + eta^2 + 2 N) for N spanned modes."""
        res = sin_theta_subspace(StringSpec(eta), ModeSubspace(modes))
        expected = subspace_sin_sq_closed(eta, len(modes))
        assert res.sin_sq == pytest.approx(expected, rel=1e-8)

    @pytest.mark.parametrize("eta", [1.0, 2.0, 5.0])
    def test_span_exceeds_single_mode(self, eta):
        """Test that the span is certified with a larger residual than any mode."""
        spec = StringSpec(eta)
        span = sin_theta_subspace(spec, ModeSubspace((1, 2, 3)))
        single = max(sin_theta_string(spec, n).sin_sq for n in (1, 2, 3))
        assert span.sin_sq > single
        assert sin_theta_subspace(spec, ModeSubspace((2,))).sin_sq == pytest.approx(single, rel=1e-8)

    @pytest.mark.parametrize("eta", [1.0, 2.0, 5.0, 10.0])
    def test_span_match_within_bound(self, eta):
        """Test the relative eigenvalue bound for the Ritz values of the span."""
        spec = StringSpec(eta)
        res = sin_theta_subspace(spec, ModeSubspace((1, 2, 3)))
        lams = [e.lam for e in secular_spectrum(spec, 5)]
        report = match_ritz([PI2, 4.0 * PI2, 9.0 * PI2], lams, res.sin_theta)
        assert all(report.bound_satisfied)


class TestRelativeBounds:
    """Tests for the relative eigenvalue bound along the eta family."""

    @pytest.mark.parametrize("eta", [2.0, 5.0, 10.0, 50.0])
    def test_first_eigenvalue(self, eta):
        """Test |lambda_1 - pi^2| / pi^2 <= sqrt(2 / (4 + eta^2))."""
        lam = secular_solve(StringSpec(eta), 1).lam
        assert abs(lam - PI2) / PI2 <= math.sqrt(2.0 / (4.0 + eta**2))

    @pytest.mark.parametrize("eta", [2.0, 5.0, 10.0, 50.0])
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_matched_mode(self, n, eta):
        """Test that n^2 pi^2 matches an eigenvalue within sin(Theta_p)."""
        spec = StringSpec(eta)
        s = sin_theta_string(spec, n).sin_theta
        lams = [e.lam for e in secular_spectrum(spec, n + 2)]
        report = match_ritz([n * n * PI2], lams, s)
        assert report.max_rel_error <= s
        assert all(report.bound_satisfied)
