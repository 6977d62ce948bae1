"""Tests for angles module."""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from ritz_bounds.angles import (
    build_isometries,
    canonical_angles,
    deflate_kernel,
    drmac_ratio,
    inverse_image,
    kernel_gap,
    sin_theta_residual,
    subspace_gap,
)
from ritz_bounds.errors import NotApplicableError, SingularOperatorError
from ritz_bounds.forms import OperatorRep, Subspace, h_eta_factor
from ritz_bounds.linalg_core import orthonormalize, symmetrize


@pytest.fixture
def e1():
    """First unit vector in two dimensions."""
    return Subspace(basis=np.array([[1.0], [0.0]]))


@pytest.fixture
def spd_pair():
    """A random SPD operator and a three-dimensional test subspace."""
    rng = np.random.default_rng(11)
    q = orthonormalize(rng.standard_normal((8, 8))).basis
    h = symmetrize((q * rng.uniform(0.3, 3.0, size=8)) @ q.T)
    return OperatorRep.explicit(h), Subspace.from_columns(rng.standard_normal((8, 3)))


@pytest.fixture
def kernel_pair():
    """H = diag(0, 1, 2, 3) with a test vector orthogonal to its kernel."""
    h = np.diag([0.0, 1.0, 2.0, 3.0])
    x = np.array([[0.0], [1.0], [1.0], [0.0]]) / math.sqrt(2.0)
    return OperatorRep.explicit(h), Subspace(basis=x)


class TestCanonicalAngles:
    """Tests for angles between subspaces."""

    def test_identical(self):
        """Test that a subspace has zero angle with itself."""
        u = np.eye(3)[:, :2]
        report = canonical_angles(u, u)
        np.testing.assert_allclose(report.canonical_angles, [0.0, 0.0], atol=1e-7)
        assert report.sin_theta == 0.0
        assert report.sin_theta_p == 0.0

    def test_orthogonal_lines(self):
        """Test that a right angle is not acute."""
        report = canonical_angles(np.eye(2)[:, [0]], np.eye(2)[:, [1]])
        assert report.canonical_angles[0] == pytest.approx(math.pi / 2)
        assert report.sin_theta == pytest.approx(1.0)
        assert report.sin_theta_p == 0.0

    def test_forty_five_degrees(self):
        """Test sin(Theta_p) for lines at 45 degrees."""
        u = np.array([[1.0], [0.0]])
        v = np.array([[1.0], [1.0]]) / math.sqrt(2.0)
        report = canonical_angles(u, v)
        assert report.sin_theta_p == pytest.approx(math.sqrt(0.5), rel=1e-14)
        assert report.sin_theta == pytest.approx(math.sqrt(0.5), rel=1e-14)

    def test_dimensions_differ(self):
        """Test that sin(Theta) is 1 for unequal dimensions."""
        report = canonical_angles(np.eye(3)[:, :1], np.eye(3)[:, :2])
        assert report.sin_theta == 1.0
        assert report.sin_theta_p == 0.0

    def test_small_angle_accuracy(self):
        """Test that tiny angles are resolved by the projector residual."""
        u = np.array([[1.0], [0.0]])
        v = np.array([[1.0], [1e-12]])
        v /= np.linalg.norm(v)
        assert subspace_gap(u, v) == pytest.approx(1e-12, rel=1e-6)


class TestSinThetaResidual:
    """Tests for the relative residual."""

    @pytest.mark.parametrize("eta", [1.0, 2.0, 3.0, 4.0, 5.0])
    def test_family(self, e1, eta):
        """Test sin(Theta) = 1/sqrt(100 eta^2 + 1) on the factored family."""
        report = sin_theta_residual(OperatorRep.factor(h_eta_factor(eta)), e1)
        expected = 1.0 / math.sqrt(100.0 * eta**2 + 1.0)
        assert report.route1 == pytest.approx(expected, rel=1e-9)
        assert report.route2 == pytest.approx(expected, rel=1e-9)
        assert report.cross_check_gap <= 1e-9
        assert report.applicable

    def test_degenerate_example(self, e1):
        """Test that the all-ones matrix against e_1 gives sin(Theta_p) = 1."""
        report = sin_theta_residual(OperatorRep.explicit(np.ones((2, 2))), e1)
        assert report.sin_theta_p == pytest.approx(1.0, abs=1e-12)
        assert not report.applicable
        assert report.eta_theta_p is None
        assert report.route1 is None

    def test_invariant_subspace(self):
        """Test that an eigenvector has zero residual."""
        op = OperatorRep.explicit(np.diag([1.0, 2.0, 4.0]))
        report = sin_theta_residual(op, Subspace(basis=np.eye(3)[:, [1]]))
        assert report.sin_theta_p <= 1e-12

    def test_ordering_invariant(self, spd_pair):
        """Test 0 <= sin(Theta_p) <= sin(Theta) <= 1 and the dual routes."""
        op, sub = spd_pair
        report = sin_theta_residual(op, sub)
        assert 0.0 <= report.sin_theta_p <= report.sin_theta <= 1.0
        assert report.cross_check_gap <= 1e-9


class TestIsometries:
    """Tests for V and W."""

    def test_identities(self, spd_pair):
        """Test V W^T = 0 and ||dH_s|| = ||V^T W||."""
        op, sub = spd_pair
        pair = build_isometries(op, sub)
        assert np.linalg.norm(pair.v @ pair.w.T) <= 1e-12
        cross = np.linalg.norm(pair.v.T @ pair.w, 2)
        assert np.linalg.norm(pair.delta_hs, 2) == pytest.approx(cross, abs=1e-10)

    def test_factor_and_explicit_agree(self, e1):
        """Test that the factor and the dense form give the same residual."""
        factor = OperatorRep.factor(h_eta_factor(2.0))
        explicit = OperatorRep.explicit(factor.dense)
        a = sin_theta_residual(factor, e1).sin_theta_p
        b = sin_theta_residual(explicit, e1).sin_theta_p
        assert a == pytest.approx(b, rel=1e-9)

    def test_inverse_image_spd(self):
        """Test that the inverse image of x is spanned by H^{-1/2} x."""
        op = OperatorRep.explicit(np.diag([1.0, 4.0]))
        sub = Subspace(basis=np.array([[1.0], [1.0]]) / math.sqrt(2.0))
        basis = inverse_image(op, sub)
        expected = np.array([[1.0], [0.5]]) / math.hypot(1.0, 0.5)
        assert subspace_gap(basis, expected) <= 1e-12

    def test_drmac_ratio(self, e1):
        """Test ||H^{-1/2} dH H^{-1/2}|| = s / (1 - s) at eta = 1."""
        op = OperatorRep.factor(h_eta_factor(1.0))
        s = 1.0 / math.sqrt(101.0)
        assert drmac_ratio(op, e1) == pytest.approx(s / (1.0 - s), rel=1e-9)
        assert drmac_ratio(op, e1) == pytest.approx(0.110499, abs=1e-6)

    def test_drmac_needs_definite(self, e1):
        """Test that a singular H is rejected."""
        with pytest.raises(SingularOperatorError):
            drmac_ratio(OperatorRep.explicit(np.ones((2, 2))), e1)


class TestKernel:
    """Tests for the kernel certificate and deflation."""

    def test_kernel_gap(self, kernel_pair):
        """Test ker(H') = ker(H) when X is orthogonal to the kernel."""
        op, sub = kernel_pair
        assert kernel_gap(op, sub) <= 1e-12

    def test_deflation_preserves_residual(self, kernel_pair):
        """Test that the deflated problem has the same sin(Theta)."""
        op, sub = kernel_pair
        original = sin_theta_residual(op, sub, rank_tol=1e-10)
        reduced_op, reduced_sub = deflate_kernel(op, sub, rank_tol=1e-10)
        assert reduced_op.dimension == 3
        reduced = sin_theta_residual(reduced_op, reduced_sub)
        assert reduced.route1 == pytest.approx(original.sin_theta_p, abs=1e-10)

    def test_deflation_not_applicable(self, e1):
        """Test that deflation refuses sin(Theta_p) = 1."""
        with pytest.raises(NotApplicableError):
            deflate_kernel(OperatorRep.explicit(np.ones((2, 2))), e1)

    def test_inverse_image_with_kernel(self, kernel_pair):
        """Test that the inverse image contains the kernel."""
        op, sub = kernel_pair
        basis = inverse_image(op, sub)
        assert basis.shape[1] == 2
        kernel = np.eye(4)[:, [0]]
        assert np.linalg.norm(kernel - basis @ (basis.T @ kernel)) <= 1e-12
