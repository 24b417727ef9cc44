"""Basis function systems and Gram-matrix inner products.

Two families are provided: cubic B-splines with a prepended intercept
(the working basis for model fitting) and an orthonormal shifted-Legendre
family used by tests, whose Gram matrix is the identity by construction.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss, legvander
from scipy.interpolate import BSpline

from .errors import ConfigurationError, DimensionError, DomainError, NumericalError

KIND_BSPLINE = "cubic-bspline-intercept"
KIND_ORTHONORMAL = "orthonormal-test"

SPLINE_DEGREE = 3


def _readonly(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class BasisSpec:
    """Choice of basis family, dimension L, and domain [a, b]."""

    kind: str
    L: int
    domain: tuple

    def __post_init__(self):
        if self.kind not in (KIND_BSPLINE, KIND_ORTHONORMAL):
            raise ConfigurationError(f"unknown basis kind {self.kind!r}")
        a, b = self.domain
        if not (np.isfinite(a) and np.isfinite(b) and a < b):
            raise ConfigurationError(f"degenerate domain [{a}, {b}]")
        if self.L < 1:
            raise ConfigurationError(f"basis dimension L={self.L} must be >= 1")
        if self.kind == KIND_BSPLINE and self.L < 5:
            raise ConfigurationError(
                f"cubic B-spline basis with intercept needs L >= 5, got L={self.L}"
            )


@dataclass(frozen=True)
class GramMatrix:
    """L x L matrix of pairwise basis-function integrals."""

    omega: np.ndarray

    def __post_init__(self):
        omega = _readonly(self.omega)
        if omega.ndim != 2 or omega.shape[0] != omega.shape[1]:
            raise ConfigurationError(f"gram matrix must be square, got {omega.shape}")
        scale = np.abs(omega).max() or 1.0
        if np.abs(omega - omega.T).max() > 1e-12 * scale:
            raise ConfigurationError("gram matrix is not symmetric")
        if np.linalg.eigvalsh(omega).min() < -1e-10 * scale:
            raise ConfigurationError("gram matrix is not positive semi-definite")
        object.__setattr__(self, "omega", omega)

    @property
    def size(self):
        return self.omega.shape[0]


@dataclass(frozen=True)
class BasisSystem:
    """A constructed basis: spec, knot sequence, and Gram matrix."""

    spec: BasisSpec
    knots: np.ndarray
    gram: GramMatrix

    def __post_init__(self):
        object.__setattr__(self, "knots", _readonly(self.knots))


def _bspline_knots(spec):
    # L-1 cubic splines need L-5 equally spaced internal knots; boundary
    # knots are repeated degree+1 times for a clamped basis.
    a, b = spec.domain
    breaks = np.linspace(a, b, spec.L - 3)
    return np.concatenate([[a] * SPLINE_DEGREE, breaks, [b] * SPLINE_DEGREE])


def _eval_design(spec, knots, times):
    if times.size == 0:
        return np.zeros((0, spec.L))
    if spec.kind == KIND_ORTHONORMAL:
        a, b = spec.domain
        u = 2.0 * (times - a) / (b - a) - 1.0
        scale = np.sqrt((2.0 * np.arange(spec.L) + 1.0) / (b - a))
        return legvander(u, spec.L - 1) * scale
    splines = BSpline.design_matrix(times, knots, SPLINE_DEGREE).toarray()
    return np.column_stack([np.ones(times.size), splines])


def design_matrix(system, times):
    """Evaluate all L basis functions at an array of points, rows = points."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    a, b = system.spec.domain
    if times.size and (times.min() < a or times.max() > b):
        raise DomainError(f"evaluation points outside basis domain [{a}, {b}]")
    return _eval_design(system.spec, system.knots, times)


def build_basis(spec, quadrature_points=None):
    """Construct a BasisSystem with its Gram matrix.

    The Gram matrix of the spline family is computed by composite
    Gauss-Legendre quadrature over the knot spans (at least 4 nodes per
    span, so products of cubics are integrated exactly) and symmetrized.
    The orthonormal test family gets an exact identity.
    """
    if quadrature_points is None:
        quadrature_points = 10 * spec.L
    if quadrature_points < 2 * spec.L:
        raise ConfigurationError(
            f"quadrature_points={quadrature_points} below minimum {2 * spec.L}"
        )
    a, b = spec.domain
    if spec.kind == KIND_ORTHONORMAL:
        return BasisSystem(spec, np.array([a, b]), GramMatrix(np.eye(spec.L)))

    knots = _bspline_knots(spec)
    breaks = np.unique(knots)
    spans = np.column_stack([breaks[:-1], breaks[1:]])
    per_span = max(4, -(-quadrature_points // len(spans)))
    nodes, weights = leggauss(per_span)
    mids = 0.5 * (spans[:, 0] + spans[:, 1])
    half = 0.5 * (spans[:, 1] - spans[:, 0])
    points = (mids[:, None] + half[:, None] * nodes).ravel()
    w = (half[:, None] * weights).ravel()
    phi = _eval_design(spec, knots, points)
    m = (phi * w[:, None]).T @ phi
    return BasisSystem(spec, knots, GramMatrix(0.5 * (m + m.T)))


def evaluate_basis(system, t):
    """Vector of the L basis functions at a single point of the domain."""
    return design_matrix(system, float(t))[0]


def inner_product(beta_j, beta_k, gram):
    """Function-space inner product <f_j, f_k> = beta_j' Omega beta_k."""
    beta_j = np.asarray(beta_j, dtype=float)
    beta_k = np.asarray(beta_k, dtype=float)
    L = gram.size
    if beta_j.shape != (L,) or beta_k.shape != (L,):
        raise DimensionError(
            f"coefficient lengths {beta_j.shape}/{beta_k.shape} do not match L={L}"
        )
    return float(beta_j @ gram.omega @ beta_k)


def function_norm_sq(beta, gram):
    """Squared function norm beta' Omega beta, clamped at tiny negatives."""
    value = inner_product(beta, beta, gram)
    if value < 0.0:
        if value < -1e-10:
            raise NumericalError(f"squared norm {value} below -1e-10")
        return 0.0
    return value
