"""Basis construction, Gram quadrature, and inner products.

The Gram matrix and inner products are checked entrywise against
scipy.integrate.quad, and the spline design columns against a direct
Cox-de Boor recursion written here.
"""

import numpy as np
import pytest
from scipy.integrate import quad

from orthofpca import (
    KIND_BSPLINE,
    KIND_ORTHONORMAL,
    BasisSpec,
    ConfigurationError,
    DimensionError,
    DomainError,
    GramMatrix,
    NumericalError,
    build_basis,
    design_matrix,
    evaluate_basis,
    function_norm_sq,
    inner_product,
)


def _cox_de_boor(knots, i, p, t):
    """Textbook B-spline recursion, with the last span closed on the right."""
    if p == 0:
        if knots[i] <= t < knots[i + 1]:
            return 1.0
        if t == knots[-1] and knots[i] < knots[i + 1] == t:
            return 1.0
        return 0.0
    total = 0.0
    if knots[i + p] > knots[i]:
        total += (t - knots[i]) / (knots[i + p] - knots[i]) * _cox_de_boor(knots, i, p - 1, t)
    if knots[i + p + 1] > knots[i + 1]:
        total += (
            (knots[i + p + 1] - t)
            / (knots[i + p + 1] - knots[i + 1])
            * _cox_de_boor(knots, i + 1, p - 1, t)
        )
    return total


# -- construction -------------------------------------------------------------


def test_spline_knot_layout(spline12):
    knots = spline12.knots
    assert knots[0] == 0.0 and knots[-1] == 1.0
    # L-1 cubic splines need L-5 internal knots.
    internal = knots[(knots > 0.0) & (knots < 1.0)]
    np.testing.assert_allclose(internal, np.linspace(0, 1, 9)[1:-1])
    assert (knots[:4] == 0.0).all() and (knots[-4:] == 1.0).all()


def test_spline_gram_shape_symmetry_psd(spline12):
    omega = spline12.gram.omega
    assert omega.shape == (12, 12)
    np.testing.assert_array_equal(omega, omega.T)
    assert np.linalg.eigvalsh(omega).min() > -1e-12


def test_orthonormal_gram_is_identity():
    system = build_basis(BasisSpec(KIND_ORTHONORMAL, 3, (0.0, 1.0)))
    np.testing.assert_array_equal(system.gram.omega, np.eye(3))


def test_orthonormal_family_is_orthonormal(ortho6):
    # Gauss-Legendre with 50 nodes integrates products of degree-5
    # polynomials exactly.
    nodes, weights = np.polynomial.legendre.leggauss(50)
    t = 0.5 * (nodes + 1.0)
    phi = design_matrix(ortho6, t)
    gram = (phi * (0.5 * weights)[:, None]).T @ phi
    np.testing.assert_allclose(gram, np.eye(6), atol=1e-12)


def test_gram_matches_independent_quadrature(spline12):
    breaks = np.unique(spline12.knots).tolist()
    omega = spline12.gram.omega
    for j in range(12):
        for k in range(j, 12):
            oracle, _ = quad(
                lambda t: evaluate_basis(spline12, t)[j] * evaluate_basis(spline12, t)[k],
                0.0,
                1.0,
                points=breaks,
                limit=200,
                epsabs=1e-12,
                epsrel=1e-12,
            )
            assert abs(omega[j, k] - oracle) < 1e-8


def test_build_is_deterministic():
    spec = BasisSpec(KIND_BSPLINE, 8, (0.0, 2.0))
    a = build_basis(spec)
    b = build_basis(spec)
    np.testing.assert_array_equal(a.gram.omega, b.gram.omega)
    np.testing.assert_array_equal(a.knots, b.knots)


def test_quadrature_point_floor():
    with pytest.raises(ConfigurationError):
        build_basis(BasisSpec(KIND_BSPLINE, 12, (0.0, 1.0)), quadrature_points=10)


# -- evaluation ----------------------------------------------------------------


def test_constant_orthonormal_basis_at_point():
    system = build_basis(BasisSpec(KIND_ORTHONORMAL, 1, (0.0, 1.0)))
    np.testing.assert_allclose(evaluate_basis(system, 0.3), [1.0])


def test_intercept_column(spline12):
    phi = design_matrix(spline12, np.array([0.0, 0.5, 1.0]))
    np.testing.assert_array_equal(phi[:, 0], np.ones(3))


def test_spline_columns_match_cox_de_boor(spline12):
    knots = spline12.knots
    grid = np.linspace(0.0, 1.0, 41)
    phi = design_matrix(spline12, grid)
    for col in range(1, 12):
        oracle = [_cox_de_boor(knots, col - 1, 3, t) for t in grid]
        np.testing.assert_allclose(phi[:, col], oracle, atol=1e-12)


def test_partition_of_unity(spline12):
    grid = np.linspace(0.0, 1.0, 301)
    phi = design_matrix(spline12, grid)
    np.testing.assert_allclose(phi[:, 1:].sum(axis=1), np.ones(grid.size), atol=1e-12)


def test_evaluation_outside_domain_rejected(spline12):
    with pytest.raises(DomainError):
        design_matrix(spline12, np.array([0.5, 1.2]))
    with pytest.raises(DomainError):
        evaluate_basis(spline12, -0.01)


# -- inner products ------------------------------------------------------------


def test_inner_product_identity_gram():
    gram = GramMatrix(np.eye(2))
    assert inner_product([1.0, 0.0], [0.0, 1.0], gram) == 0.0
    assert inner_product([0.5, 1.0], [0.5, 1.0], gram) == 1.25


def test_inner_product_matches_quadrature(spline12, rng):
    beta_j = rng.standard_normal(12)
    beta_k = rng.standard_normal(12)

    def product(t):
        phi = evaluate_basis(spline12, t)
        return (beta_j @ phi) * (beta_k @ phi)

    oracle, _ = quad(
        product,
        0.0,
        1.0,
        points=np.unique(spline12.knots).tolist(),
        limit=200,
        epsabs=1e-12,
        epsrel=1e-12,
    )
    assert abs(inner_product(beta_j, beta_k, spline12.gram) - oracle) < 1e-8


def test_norm_sq_trivials_and_quadrature(spline12, rng):
    gram = GramMatrix(np.eye(2))
    assert function_norm_sq([0.0, 0.0], gram) == 0.0
    assert function_norm_sq([3.0, 4.0], gram) == 25.0

    beta = rng.standard_normal(12)
    oracle, _ = quad(
        lambda t: (beta @ evaluate_basis(spline12, t)) ** 2,
        0.0,
        1.0,
        points=np.unique(spline12.knots).tolist(),
        limit=200,
        epsabs=1e-12,
        epsrel=1e-12,
    )
    assert abs(function_norm_sq(beta, spline12.gram) - oracle) < 1e-8


def test_norm_sq_clamps_tiny_negative():
    gram = GramMatrix(np.diag([1.0, -5e-11]))
    assert function_norm_sq([0.0, 1.0], gram) == 0.0
    with pytest.raises(NumericalError):
        function_norm_sq([0.0, 1e3], gram)


def test_inner_product_dimension_mismatch(spline12):
    with pytest.raises(DimensionError):
        inner_product(np.ones(11), np.ones(12), spline12.gram)


# -- validation ----------------------------------------------------------------


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        BasisSpec("fourier", 12, (0.0, 1.0))
    with pytest.raises(ConfigurationError):
        BasisSpec(KIND_BSPLINE, 4, (0.0, 1.0))
    with pytest.raises(ConfigurationError):
        BasisSpec(KIND_BSPLINE, 12, (1.0, 1.0))


def test_gram_validation():
    with pytest.raises(ConfigurationError):
        GramMatrix(np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(ConfigurationError):
        GramMatrix(np.array([[1.0, 0.0], [0.0, -1.0]]))
