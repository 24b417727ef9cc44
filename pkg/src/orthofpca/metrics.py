"""Orthogonality diagnostics computed from posterior-mean coefficients."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DimensionError
from .prior import CoefficientSet

DEFAULT_EPSILON = 0.1


def _coef_array(coef_means):
    betas = coef_means.betas if isinstance(coef_means, CoefficientSet) else coef_means
    return np.atleast_2d(np.asarray(betas, dtype=float))


@dataclass(frozen=True)
class MetricReport:
    """NC, OG, the K x K inner-product matrix, and per-component norms."""

    nc: int
    og: float
    ip_matrix: np.ndarray
    norms: np.ndarray


def inner_product_matrix(coef_means, gram):
    """Matrix of pairwise function inner products beta_j' Omega beta_k."""
    betas = _coef_array(coef_means)
    if betas.shape[1] != gram.size:
        raise DimensionError(
            f"coefficients have L={betas.shape[1]}, gram has L={gram.size}"
        )
    m = betas @ gram.omega @ betas.T
    return 0.5 * (m + m.T)


def effective_components(coef_means, gram, epsilon=DEFAULT_EPSILON):
    """Count of components whose squared norm strictly exceeds epsilon."""
    if epsilon <= 0:
        raise ConfigurationError(f"epsilon={epsilon} must be positive")
    norms = np.diag(inner_product_matrix(coef_means, gram))
    return int((norms > epsilon).sum())


def orthogonality_measure(coef_means, gram):
    """Sum of absolute off-diagonal inner products over unordered pairs."""
    m = inner_product_matrix(coef_means, gram)
    return float(np.abs(m[np.triu_indices_from(m, k=1)]).sum())


def compute_metrics(coef_means, gram, epsilon=DEFAULT_EPSILON):
    """Bundle NC, OG, the inner-product matrix, and norms into one report."""
    m = inner_product_matrix(coef_means, gram)
    norms = np.diag(m).copy()
    if epsilon <= 0:
        raise ConfigurationError(f"epsilon={epsilon} must be positive")
    return MetricReport(
        nc=int((norms > epsilon).sum()),
        og=float(np.abs(m[np.triu_indices_from(m, k=1)]).sum()),
        ip_matrix=m,
        norms=norms,
    )
