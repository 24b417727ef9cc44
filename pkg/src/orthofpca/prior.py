"""Adaptive orthogonal prior over sequences of coefficient vectors.

Each beta_{j+1} is conditionally Gaussian given beta_1..beta_j: the j
inner products beta_k' Omega beta_{j+1} get independent N(0, tau^2)
priors (soft orthogonality) and H_{j+1} beta_{j+1} gets a diffuse
N(0, gamma I) prior on the remaining L-j directions. Stacking those
linear maps into A_{j+1} makes the conditional an explicit multivariate
normal with covariance A^{-1} blockdiag(tau^2 I_j, gamma I_{L-j}) A^{-T}.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import multivariate_normal

from .basis import GramMatrix
from .errors import (
    ConfigurationError,
    DegenerateConstraintError,
    DimensionError,
    NumericalError,
)

CONDITION_LIMIT = 1e12

TAU_MODES = ("fixed", "global", "local")


@dataclass(frozen=True)
class ConstraintMatrix:
    """(L-j) x L matrix H_{j+1} with orthonormal rows."""

    h: np.ndarray

    def __post_init__(self):
        h = np.array(self.h, dtype=float)
        if h.ndim != 2 or not 1 <= h.shape[0] <= h.shape[1]:
            raise ConfigurationError(f"constraint matrix shape {h.shape} invalid")
        if np.abs(h @ h.T - np.eye(h.shape[0])).max() > 1e-10:
            raise ConfigurationError("constraint matrix rows are not orthonormal")
        h.flags.writeable = False
        object.__setattr__(self, "h", h)


@dataclass(frozen=True)
class CoefficientSet:
    """K coefficient vectors of length L, one per principal function."""

    betas: np.ndarray

    def __post_init__(self):
        betas = np.array(self.betas, dtype=float)
        if betas.ndim != 2:
            raise DimensionError(f"expected K x L coefficients, got {betas.shape}")
        if not np.isfinite(betas).all():
            raise ConfigurationError("coefficient set contains non-finite entries")
        betas.flags.writeable = False
        object.__setattr__(self, "betas", betas)

    @property
    def K(self):
        return self.betas.shape[0]

    @property
    def L(self):
        return self.betas.shape[1]


@dataclass(frozen=True)
class AopConfig:
    """Hyperparameters of the sequential prior.

    tau_mode selects how the constraint variances are handled: fixed
    values (tau_values, length K-1), one shared tau^2 with an IG(a0, b0)
    hyperprior, or one tau_k^2 per level. b0 defaults to 2/K^2 so the
    prior mean of tau^2 is 1/K^2.
    """

    K: int
    L: int
    gamma: float = 1.0
    tau_mode: str = "global"
    tau_values: tuple = None
    a0: float = 3.0
    b0: float = None

    def __post_init__(self):
        if not 1 <= self.K <= self.L:
            raise ConfigurationError(
                f"need 1 <= K <= L for invertible constraint stacks, got K={self.K}, L={self.L}"
            )
        if self.gamma <= 0:
            raise ConfigurationError(f"gamma={self.gamma} must be positive")
        if self.tau_mode not in TAU_MODES:
            raise ConfigurationError(f"unknown tau_mode {self.tau_mode!r}")
        if self.b0 is None:
            object.__setattr__(self, "b0", 2.0 / self.K**2)
        if self.a0 <= 0 or self.b0 <= 0:
            raise ConfigurationError("inverse-gamma hyperparameters must be positive")
        if self.tau_mode == "fixed":
            values = np.asarray(self.tau_values, dtype=float)
            if values.shape != (self.K - 1,) or (values <= 0).any():
                raise ConfigurationError(
                    f"fixed mode needs {self.K - 1} positive tau^2 values"
                )
            object.__setattr__(self, "tau_values", tuple(values))


def build_h_matrix(L, j):
    """Constraint complement for level j+1: the last L-j rows of I_L."""
    if not 1 <= j < L:
        raise ConfigurationError(f"level index j={j} must satisfy 1 <= j < L={L}")
    return ConstraintMatrix(np.eye(L)[j:])


def _constraint_stack(betas_prefix, omega, h):
    return np.vstack([betas_prefix @ omega, h.h])


def conditional_prior_params(betas_prefix, gram, tau_sq, h, gamma):
    """Mean and covariance of beta_{j+1} | beta_1..beta_j (zero-mean mode)."""
    betas_prefix = np.atleast_2d(np.asarray(betas_prefix, dtype=float))
    j, L = betas_prefix.shape
    if L != gram.size or h.h.shape != (L - j, L):
        raise DimensionError(
            f"prefix {betas_prefix.shape}, gram L={gram.size}, H {h.h.shape} inconsistent"
        )
    if tau_sq <= 0 or gamma <= 0:
        raise ConfigurationError("tau_sq and gamma must be positive")
    a = _constraint_stack(betas_prefix, gram.omega, h)
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise DegenerateConstraintError(
            f"constraint stack at level {j + 1} is near-singular (cond={cond:.3e}); "
            "some beta_k' Omega lies in the span of the other rows",
            level=j + 1,
        )
    a_inv = np.linalg.solve(a, np.eye(L))
    d = np.concatenate([np.full(j, tau_sq), np.full(L - j, gamma)])
    cov = (a_inv * d) @ a_inv.T
    return np.zeros(L), 0.5 * (cov + cov.T)


def _sample_mvn(mean, cov, rng):
    # Jitter once on factorization failure; PSD-but-rank-deficient
    # covariances from extreme tau^2 ratios land here.
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        jitter = 1e-10 * np.trace(cov) / cov.shape[0]
        try:
            chol = np.linalg.cholesky(cov + jitter * np.eye(cov.shape[0]))
        except np.linalg.LinAlgError as exc:
            raise NumericalError(
                "covariance factorization failed even after jitter"
            ) from exc
    return mean + chol @ rng.standard_normal(cov.shape[0])


def sample_sequential_prior(config, gram, tau_values, seed):
    """Forward-sample beta_1..beta_K from the sequential prior."""
    tau_values = np.asarray(tau_values, dtype=float)
    if tau_values.shape != (config.K - 1,) or (tau_values <= 0).any():
        raise ConfigurationError(f"need {config.K - 1} positive tau^2 values")
    if gram.size != config.L:
        raise DimensionError(f"gram L={gram.size} does not match config L={config.L}")
    rng = np.random.default_rng(seed)
    betas = np.empty((config.K, config.L))
    betas[0] = np.sqrt(config.gamma) * rng.standard_normal(config.L)
    for j in range(1, config.K):
        h = build_h_matrix(config.L, j)
        mean, cov = conditional_prior_params(
            betas[:j], gram, tau_values[j - 1], h, config.gamma
        )
        betas[j] = _sample_mvn(mean, cov, rng)
    return CoefficientSet(betas)


def log_joint_prior_density(betas, tau_values, gram, config):
    """Log density of the full coefficient set under the sequential prior.

    Each level contributes its constraint kernels, the N(0, gamma I)
    kernel of H_j beta_j, and the log|det A_j| volume factor from the
    change of variables, so the result is a proper density over
    coefficient space.
    """
    betas = betas.betas if isinstance(betas, CoefficientSet) else np.asarray(betas)
    K, L = betas.shape
    tau_values = np.asarray(tau_values, dtype=float)
    if tau_values.shape != (K - 1,):
        raise DimensionError(f"need {K - 1} tau^2 values, got {tau_values.shape}")
    if (tau_values <= 0).any():
        raise ConfigurationError("tau^2 values must be positive")
    gamma = config.gamma
    total = -0.5 * (L * np.log(2.0 * np.pi * gamma) + betas[0] @ betas[0] / gamma)
    for j in range(1, K):
        tau_sq = tau_values[j - 1]
        h = build_h_matrix(L, j)
        a = _constraint_stack(betas[:j], gram.omega, h)
        sign, logdet = np.linalg.slogdet(a)
        if sign == 0:
            raise DegenerateConstraintError(
                f"constraint stack at level {j + 1} is singular", level=j + 1
            )
        s = betas[:j] @ gram.omega @ betas[j]
        hb = h.h @ betas[j]
        total += logdet
        total += -0.5 * (j * np.log(2.0 * np.pi * tau_sq) + s @ s / tau_sq)
        total += -0.5 * ((L - j) * np.log(2.0 * np.pi * gamma) + hb @ hb / gamma)
    return float(total)


def conditional_trace_variance(betas_prefix, tau_sq, gamma, h, gram=None):
    """Closed-form tr Var(beta_{j+1} | beta_1..beta_j) for an orthonormal basis.

    With P = I - H'H projecting onto the complement of the H rows and
    B the L x j prefix matrix, the trace is
    tau^2 tr{(B'PB)^{-1}} + gamma (L-j) + gamma tr{(B'PB)^{-1} (HB)'(HB)}.
    """
    if gram is not None and np.abs(gram.omega - np.eye(gram.size)).max() > 1e-12:
        raise ConfigurationError(
            "closed-form trace requires an orthonormal basis (identity gram)"
        )
    b = np.atleast_2d(np.asarray(betas_prefix, dtype=float)).T
    L, j = b.shape
    if h.h.shape != (L - j, L):
        raise DimensionError(f"H shape {h.h.shape} does not match prefix ({j}, {L})")
    p = np.eye(L) - h.h.T @ h.h
    inner = b.T @ p @ b
    cond = np.linalg.cond(inner)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise DegenerateConstraintError(
            f"projected prefix gram at level {j + 1} is near-singular", level=j + 1
        )
    inner_inv = np.linalg.inv(inner)
    hb = h.h @ b
    return float(
        tau_sq * np.trace(inner_inv)
        + gamma * (L - j)
        + gamma * np.trace(inner_inv @ hb.T @ hb)
    )


def figure1_density_grid(beta1, tau_sq, b02, x, y):
    """Conditional density of beta_2 on a 2-D lattice, for plot emission.

    Returns an array indexed [i, j] = density at (x[i], y[j]), for the
    L = K = 2 configuration with identity gram and H_2 = (0, 1).
    """
    beta1 = np.asarray(beta1, dtype=float)
    if beta1.shape != (2,):
        raise ConfigurationError(f"density grid needs a 2-vector beta1, got {beta1.shape}")
    gram = GramMatrix(np.eye(2))
    mean, cov = conditional_prior_params(
        beta1[None, :], gram, tau_sq, build_h_matrix(2, 1), b02
    )
    xx, yy = np.meshgrid(np.asarray(x, float), np.asarray(y, float), indexing="ij")
    points = np.dstack([xx, yy])
    # pdf squeezes singleton grids to scalars; keep the lattice shape.
    values = multivariate_normal(mean=mean, cov=cov).pdf(points)
    return np.asarray(values, dtype=float).reshape(xx.shape)
