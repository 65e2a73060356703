import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abusetrends import BSplineBasis, basis_eval


def naive_bspline(knots, degree, j, u, top):
    """Cox-de Boor recursion, written plainly as an independent oracle."""
    if degree == 0:
        # intervals are half-open except at the top of the domain, where
        # evaluation takes the left limit
        if u == top:
            return 1.0 if knots[j] < u <= knots[j + 1] else 0.0
        return 1.0 if knots[j] <= u < knots[j + 1] else 0.0
    left = 0.0
    if knots[j + degree] > knots[j]:
        left = (u - knots[j]) / (knots[j + degree] - knots[j]) * naive_bspline(
            knots, degree - 1, j, u, top
        )
    right = 0.0
    if knots[j + degree + 1] > knots[j + 1]:
        right = (knots[j + degree + 1] - u) / (
            knots[j + degree + 1] - knots[j + 1]
        ) * naive_bspline(knots, degree - 1, j + 1, u, top)
    return left + right


class TestClampedBasis:
    @given(u=st.floats(0, 1, allow_nan=False))
    @settings(max_examples=100, deadline=None)
    def test_partition_of_unity(self, u):
        basis = BSplineBasis.clamped(8, 3)
        values = basis_eval(basis, u)
        assert values.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(values >= 0.0)

    def test_left_endpoint_interpolates(self):
        basis = BSplineBasis.clamped(8, 3)
        np.testing.assert_allclose(basis_eval(basis, 0.0), np.eye(8)[0])

    def test_right_endpoint_interpolates(self):
        basis = BSplineBasis.clamped(8, 3)
        np.testing.assert_allclose(basis_eval(basis, 1.0), np.eye(8)[-1])

    def test_matches_de_boor_recursion(self):
        basis = BSplineBasis.clamped(8, 3)
        for u in (0.5, 0.123, 0.999, 1.0, 0.0, 0.2):
            expected = [
                naive_bspline(basis.knots, 3, j, u, 1.0) for j in range(8)
            ]
            np.testing.assert_allclose(basis_eval(basis, u), expected, atol=1e-12)

    @given(
        n_basis=st.integers(4, 12),
        degree=st.integers(1, 3),
        u=st.floats(0, 1, allow_nan=False),
    )
    @settings(max_examples=60, deadline=None)
    def test_de_boor_oracle_property(self, n_basis, degree, u):
        if n_basis < degree + 1:
            n_basis = degree + 1
        basis = BSplineBasis.clamped(n_basis, degree)
        expected = [
            naive_bspline(basis.knots, degree, j, u, 1.0) for j in range(n_basis)
        ]
        np.testing.assert_allclose(basis_eval(basis, u), expected, atol=1e-10)

    def test_domain_error(self):
        basis = BSplineBasis.clamped(8, 3)
        with pytest.raises(ValueError):
            basis_eval(basis, -0.01)
        with pytest.raises(ValueError):
            basis_eval(basis, 1.01)

    def test_too_few_basis_functions_rejected(self):
        with pytest.raises(ValueError):
            BSplineBasis.clamped(3, 3)


class TestUniformBasis:
    @given(u=st.floats(0, 1, allow_nan=False))
    @settings(max_examples=60, deadline=None)
    def test_partition_of_unity(self, u):
        basis = BSplineBasis.uniform(6, 3)
        values = basis_eval(basis, u)
        assert values.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(values >= 0.0)

    def test_matches_de_boor_recursion(self):
        basis = BSplineBasis.uniform(5, 3)
        for u in (0.0, 0.31, 0.76, 1.0):
            expected = [
                naive_bspline(basis.knots, 3, j, u, 1.0) for j in range(basis.n_basis)
            ]
            np.testing.assert_allclose(basis_eval(basis, u), expected, atol=1e-12)

    def test_design_matrix_shape(self):
        basis = BSplineBasis.uniform(6, 3)
        u = np.linspace(0, 1, 40)
        assert basis.design_matrix(u).shape == (40, basis.n_basis)
