"""Gibbs sampler for Bayesian FPCA with orthogonality-inducing priors.

Model: X_i(t_ij) = sum_k Z_ik f_k(t_ij) + eps_ij with f_k = beta_k' Phi,
Z_ik ~ N(0, lambda_k), eps ~ N(0, sigma^2). Four prior families on the
beta_k are supported: NO (independent diffuse normals), NO-S (horseshoe
shrinkage), AOP-G / AOP-L (sequential orthogonality constraints with a
global or per-level tau^2 hyperprior), plus AOP-fixed for fixed tau^2.

All full conditionals are conjugate, so one sweep is a fixed sequence of
normal and inverse-gamma draws: beta_1..beta_K, Z, lambda, tau^2 (AOP),
horseshoe scales (NO-S), sigma^2.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import gammaln

from .basis import design_matrix, function_norm_sq
from .errors import (
    ConfigurationError,
    DataError,
    DimensionError,
    NumericalError,
)

PRIOR_FAMILIES = ("NO", "NO-S", "AOP-G", "AOP-L", "AOP-fixed")
AOP_FAMILIES = ("AOP-G", "AOP-L", "AOP-fixed")

INIT_BETA_VAR = 0.1


@dataclass(frozen=True)
class FunctionalDataset:
    """n curves observed at per-curve time grids."""

    ids: tuple
    times: tuple
    values: tuple

    def __post_init__(self):
        if not len(self.ids) == len(self.times) == len(self.values):
            raise DataError("ids, times, and values must have one entry per curve")
        times, values = [], []
        for cid, t, v in zip(self.ids, self.times, self.values):
            t = np.asarray(t, dtype=float)
            v = np.asarray(v, dtype=float)
            if t.ndim != 1 or t.shape != v.shape or t.size < 1:
                raise DataError(
                    f"curve {cid!r}: times and values must be equal-length, nonempty"
                )
            if not (np.isfinite(t).all() and np.isfinite(v).all()):
                raise DataError(f"curve {cid!r} contains non-finite entries")
            times.append(t)
            values.append(v)
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))
        object.__setattr__(self, "times", tuple(times))
        object.__setattr__(self, "values", tuple(values))

    @property
    def n(self):
        return len(self.ids)


@dataclass(frozen=True)
class GibbsConfig:
    """Chain lengths, prior family, and hyperparameters.

    n_iter counts post-burn-in sweeps; every thin-th of them is stored.
    b0 left as None resolves to 2/K^2 once K is known, giving the tau^2
    hyperprior a mean of 1/K^2.
    """

    n_iter: int = 3000
    n_burnin: int = 2000
    thin: int = 1
    seed: int = 1
    prior_family: str = "AOP-G"
    a_lambda: float = 1.0
    b_lambda: float = 1.0
    a_sigma: float = 1.0
    b_sigma: float = 1.0
    a0: float = 3.0
    b0: float = None
    gamma: float = 1.0
    fixed_tau: tuple = None
    report_grid_size: int = 101

    def __post_init__(self):
        if self.prior_family not in PRIOR_FAMILIES:
            raise ConfigurationError(f"unknown prior family {self.prior_family!r}")
        if self.n_iter < 1 or self.n_burnin < 0 or self.thin < 1:
            raise ConfigurationError("need n_iter >= 1, n_burnin >= 0, thin >= 1")
        if self.thin > self.n_iter:
            raise ConfigurationError("thin exceeds n_iter; no draws would be stored")
        for name in ("a_lambda", "b_lambda", "a_sigma", "b_sigma", "a0", "gamma"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.b0 is not None and self.b0 <= 0:
            raise ConfigurationError("b0 must be positive")
        if self.report_grid_size < 2:
            raise ConfigurationError("report_grid_size must be at least 2")

    def resolved_b0(self, K):
        return 2.0 / K**2 if self.b0 is None else self.b0


@dataclass
class GibbsState:
    """Mutable latent state of one chain.

    tau_sqs is a length-1 array for AOP-G, length K-1 for AOP-L and
    AOP-fixed, and None for NO / NO-S. The horseshoe fields are None
    except under NO-S, where aux_nu and aux_xi are the inverse-gamma
    auxiliaries of the half-Cauchy scales.
    """

    betas: np.ndarray
    scores: np.ndarray
    lambdas: np.ndarray
    tau_sqs: np.ndarray
    sigma_sq: float
    shrink_locals: np.ndarray = None
    shrink_global: float = None
    aux_nu: np.ndarray = None
    aux_xi: float = None

    def copy(self):
        return GibbsState(
            betas=np.array(self.betas, dtype=float),
            scores=np.array(self.scores, dtype=float),
            lambdas=np.array(self.lambdas, dtype=float),
            tau_sqs=None if self.tau_sqs is None else np.array(self.tau_sqs, dtype=float),
            sigma_sq=float(self.sigma_sq),
            shrink_locals=None
            if self.shrink_locals is None
            else np.array(self.shrink_locals, dtype=float),
            shrink_global=self.shrink_global,
            aux_nu=None if self.aux_nu is None else np.array(self.aux_nu, dtype=float),
            aux_xi=self.aux_xi,
        )


@dataclass(frozen=True)
class PosteriorDraws:
    """Thinned post-burn-in draws plus post-processed summaries.

    Components are relabeled by decreasing posterior-mean function norm
    and sign-aligned so each mean curve is nonnegative at the domain
    midpoint; permutation and signs record the applied relabeling.
    log_densities holds the unnormalized log posterior kernel per stored
    draw (likelihood times all prior kernels), for mixing diagnostics.
    """

    betas: np.ndarray
    lambdas: np.ndarray
    tau_sqs: np.ndarray
    sigma_sqs: np.ndarray
    log_densities: np.ndarray
    beta_mean: np.ndarray
    scores_mean: np.ndarray
    norms: np.ndarray
    permutation: np.ndarray
    signs: np.ndarray
    grid: np.ndarray
    f_mean: np.ndarray
    f_lower: np.ndarray
    f_upper: np.ndarray
    prior_family: str

    @property
    def n_draws(self):
        return self.betas.shape[0]

    @property
    def K(self):
        return self.betas.shape[1]

    @property
    def L(self):
        return self.betas.shape[2]


class _Workspace:
    """Packed observation arrays shared by every sweep of a chain."""

    __slots__ = ("y", "b", "g", "rep", "starts", "omega", "n", "m_total", "counts")

    def __init__(self, data, basis):
        self.n = data.n
        self.counts = np.array([t.size for t in data.times], dtype=np.int64)
        self.m_total = int(self.counts.sum())
        self.starts = np.concatenate([[0], np.cumsum(self.counts)[:-1]]).astype(np.int64)
        self.rep = np.repeat(np.arange(self.n), self.counts)
        self.y = np.concatenate(data.values) if self.n else np.empty(0)
        all_times = np.concatenate(data.times) if self.n else np.empty(0)
        self.b = design_matrix(basis, all_times)
        self.omega = basis.gram.omega
        L = self.b.shape[1]
        self.g = np.empty((self.n, L, L))
        for i, (s, c) in enumerate(zip(self.starts, self.counts)):
            bi = self.b[s : s + c]
            self.g[i] = bi.T @ bi


def _inv_gamma(rng, shape, scale):
    # IG(a, b) via b / Gamma(a, 1); shape and scale may be arrays. size
    # must be passed explicitly: a scalar shape with a vector scale would
    # otherwise share one gamma variate across the whole vector.
    scale = np.asarray(scale, dtype=float)
    return scale / rng.gamma(shape, 1.0, size=scale.shape)


def _tau_for_pair_level(state, level, K):
    # level is the 1-based index of the later component in a pair.
    if state.tau_sqs.shape == (1,):
        return state.tau_sqs[0]
    return state.tau_sqs[level - 2]


def _beta_prior_precision(state, k, config, omega):
    """Prior precision matrix for component k (0-based) under the family."""
    K, L = state.betas.shape
    family = config.prior_family
    if family == "NO":
        return np.eye(L) / config.gamma
    if family == "NO-S":
        return np.diag(1.0 / (state.shrink_global * state.shrink_locals[k]))
    c = state.betas @ omega
    w = np.zeros(K)
    if k > 0:
        w[:k] = 1.0 / _tau_for_pair_level(state, k + 1, K)
    for j in range(k + 1, K):
        w[j] = 1.0 / _tau_for_pair_level(state, j + 1, K)
    prec = (c * w[:, None]).T @ c
    prec[np.arange(k, L), np.arange(k, L)] += 1.0 / config.gamma
    return prec


def _beta_vu(ws, state, k, config, residual_k):
    """Full-conditional precision V_k and linear term U_k.

    residual_k is the concatenated residual with component k's own
    contribution added back (i.e. the data minus all other components).
    """
    zk = state.scores[:, k]
    v = _beta_prior_precision(state, k, config, ws.omega)
    if ws.n:
        v = v + np.tensordot(zk * zk, ws.g, axes=1) / state.sigma_sq
        u = ws.b.T @ (zk[ws.rep] * residual_k) / state.sigma_sq
    else:
        u = np.zeros(v.shape[0])
    return v, u


def _draw_from_precision(v, u, rng, context):
    L = v.shape[0]
    # np.linalg.cholesky propagates NaNs instead of failing on them.
    if not (np.isfinite(v).all() and np.isfinite(u).all()):
        raise NumericalError(f"{context}: non-finite precision or linear term")
    try:
        chol = np.linalg.cholesky(v)
    except np.linalg.LinAlgError:
        jitter = 1e-10 * np.trace(v) / L
        try:
            chol = np.linalg.cholesky(v + jitter * np.eye(L))
        except np.linalg.LinAlgError as exc:
            raise NumericalError(
                f"{context}: precision factorization failed after jitter retry"
            ) from exc
    half = solve_triangular(chol, u, lower=True)
    mean = solve_triangular(chol.T, half, lower=False)
    return mean + solve_triangular(chol.T, rng.standard_normal(L), lower=False)


def _residual(ws, scores, f):
    return ws.y - np.einsum("ij,ij->i", f, scores[ws.rep])


def _draw_scores_k(ws, sigma_sq, lambda_k, fk, residual_k, rng):
    ff = np.add.reduceat(fk * fk, ws.starts)
    var = 1.0 / (ff / sigma_sq + 1.0 / lambda_k)
    mean = var * np.add.reduceat(fk * residual_k, ws.starts) / sigma_sq
    return mean + np.sqrt(var) * rng.standard_normal(ws.n)


def _pair_sums(betas, omega):
    # s[k-2] = sum_{j<k} (beta_j' Omega beta_k)^2 for levels k = 2..K.
    m = betas @ omega @ betas.T
    K = betas.shape[0]
    return np.array([(m[:k, k] ** 2).sum() for k in range(1, K)])


def _draw_tau(state, omega, mode, config, rng):
    K = state.betas.shape[0]
    b0 = config.resolved_b0(K)
    s = _pair_sums(state.betas, omega)
    if mode == "global":
        shape = config.a0 + K * (K - 1) / 4.0
        return np.atleast_1d(_inv_gamma(rng, shape, b0 + 0.5 * s.sum()))
    shapes = config.a0 + 0.5 * np.arange(1, K)
    return _inv_gamma(rng, shapes, b0 + 0.5 * s)


def _draw_horseshoe(state, k, rng):
    K, L = state.betas.shape
    b2 = state.betas[k] ** 2
    loc_scale = 1.0 / state.aux_nu[k] + b2 / (2.0 * state.shrink_global)
    locals_k = _inv_gamma(rng, 1.0, loc_scale)
    if not np.isfinite(locals_k).all() or locals_k.min() <= 0.0:
        raise NumericalError("horseshoe local scales left (0, inf)")
    nu_k = _inv_gamma(rng, 1.0, 1.0 + 1.0 / locals_k)
    ratios = state.betas**2 / np.vstack(
        [state.shrink_locals[:k], locals_k[None, :], state.shrink_locals[k + 1 :]]
    )
    glob = float(
        _inv_gamma(rng, (K * L + 1) / 2.0, 1.0 / state.aux_xi + ratios.sum() / 2.0)
    )
    if not 0.0 < glob < np.inf:
        raise NumericalError("horseshoe global scale left (0, inf)")
    xi = float(_inv_gamma(rng, 1.0, 1.0 + 1.0 / glob))
    return locals_k, nu_k, glob, xi


def initial_state(data, basis, K, config, rng):
    """Diffuse default start: beta ~ N(0, 0.1 I), Z = 0, unit variances."""
    L = basis.spec.L
    betas = np.sqrt(INIT_BETA_VAR) * rng.standard_normal((K, L))
    family = config.prior_family
    b0 = config.resolved_b0(K)
    prior_mean_tau = b0 / (config.a0 - 1.0) if config.a0 > 1 else 1.0
    if family == "AOP-G":
        tau = np.array([prior_mean_tau])
    elif family == "AOP-L":
        tau = np.full(K - 1, prior_mean_tau)
    elif family == "AOP-fixed":
        tau = np.asarray(config.fixed_tau, dtype=float)
        if tau.shape != (K - 1,) or (tau <= 0).any():
            raise ConfigurationError(f"AOP-fixed needs {K - 1} positive tau^2 values")
    else:
        tau = None
    state = GibbsState(
        betas=betas,
        scores=np.zeros((data.n, K)),
        lambdas=np.ones(K),
        tau_sqs=tau,
        sigma_sq=1.0,
    )
    if family == "NO-S":
        state.shrink_locals = np.ones((K, L))
        state.shrink_global = 1.0
        state.aux_nu = np.ones((K, L))
        state.aux_xi = 1.0
    return state


def update_beta(state, data, basis, k, config, rng):
    """Draw component k (0-based) of beta from its full conditional."""
    v, u = beta_full_conditional(state, data, basis, k, config)
    return _draw_from_precision(v, u, rng, f"beta component {k}")


def beta_full_conditional(state, data, basis, k, config):
    """(V_k, U_k) of the normal full conditional N(V^-1 U, V^-1)."""
    ws = _Workspace(data, basis)
    if ws.n:
        f = ws.b @ state.betas.T
        e = _residual(ws, state.scores, f)
        residual_k = e + state.scores[:, k][ws.rep] * f[:, k]
    else:
        residual_k = np.empty(0)
    return _beta_vu(ws, state, k, config, residual_k)


def score_full_conditional(state, data, basis, k):
    """Per-curve posterior means and variances of the scores Z_.k."""
    ws = _Workspace(data, basis)
    f = ws.b @ state.betas.T
    e = _residual(ws, state.scores, f)
    fk = f[:, k]
    residual_k = e + state.scores[:, k][ws.rep] * fk
    ff = np.add.reduceat(fk * fk, ws.starts)
    var = 1.0 / (ff / state.sigma_sq + 1.0 / state.lambdas[k])
    mean = var * np.add.reduceat(fk * residual_k, ws.starts) / state.sigma_sq
    return mean, var


def update_scores(state, data, basis, rng):
    """Draw the full n x K score matrix, components in sequence."""
    ws = _Workspace(data, basis)
    scores = state.scores.copy()
    f = ws.b @ state.betas.T
    e = _residual(ws, scores, f)
    for k in range(state.betas.shape[0]):
        zk = scores[:, k]
        residual_k = e + zk[ws.rep] * f[:, k]
        new_zk = _draw_scores_k(
            ws, state.sigma_sq, state.lambdas[k], f[:, k], residual_k, rng
        )
        scores[:, k] = new_zk
        e = residual_k - new_zk[ws.rep] * f[:, k]
    return scores


def update_lambda(state, config, rng):
    """IG(a + n/2, b + sum Z^2 / 2) draws, one per component."""
    n = state.scores.shape[0]
    scale = config.b_lambda + 0.5 * (state.scores**2).sum(axis=0)
    return _inv_gamma(rng, config.a_lambda + n / 2.0, scale)


def update_tau(state, gram, mode, config, rng):
    """IG draws of the constraint variances (one shared or per level)."""
    if mode not in ("global", "local"):
        raise ConfigurationError(f"unknown tau update mode {mode!r}")
    return _draw_tau(state, gram.omega, mode, config, rng)


def update_sigma(state, data, basis, config, rng):
    """IG(a + sum m_i / 2, b + RSS / 2) draw of the noise variance."""
    ws = _Workspace(data, basis)
    f = ws.b @ state.betas.T
    e = _residual(ws, state.scores, f)
    return float(
        _inv_gamma(rng, config.a_sigma + ws.m_total / 2.0, config.b_sigma + 0.5 * e @ e)
    )


def update_horseshoe(state, k, rng):
    """Refresh component k's local scales, their auxiliaries, and the global.

    Returns (shrink_locals_k, aux_nu_k, shrink_global, aux_xi); the global
    draw conditions on component k's freshly drawn local scales.
    """
    if state.shrink_locals is None:
        raise ConfigurationError("horseshoe update requires NO-S state fields")
    return _draw_horseshoe(state, k, rng)


def _log_ig_pdf(x, a, b):
    return a * np.log(b) - gammaln(a) - (a + 1.0) * np.log(x) - b / x


def _log_state_density(ws, state, config, rss):
    """Unnormalized log posterior kernel of the current state."""
    K, L = state.betas.shape
    n = ws.n
    total = -0.5 * (
        ws.m_total * np.log(2.0 * np.pi * state.sigma_sq) + rss / state.sigma_sq
    )
    z2 = (state.scores**2).sum(axis=0)
    total += -0.5 * (n * np.log(2.0 * np.pi * state.lambdas) + z2 / state.lambdas).sum()
    total += _log_ig_pdf(state.lambdas, config.a_lambda, config.b_lambda).sum()
    total += _log_ig_pdf(state.sigma_sq, config.a_sigma, config.b_sigma)
    family = config.prior_family
    gamma = config.gamma
    if family == "NO":
        total += -0.5 * (
            K * L * np.log(2.0 * np.pi * gamma) + (state.betas**2).sum() / gamma
        )
    elif family == "NO-S":
        var = state.shrink_global * state.shrink_locals
        total += -0.5 * (np.log(2.0 * np.pi * var) + state.betas**2 / var).sum()
        total += _log_ig_pdf(state.shrink_locals, 1.0, 1.0 / state.aux_nu).sum()
        total += _log_ig_pdf(state.aux_nu, 1.0, 1.0).sum()
        total += _log_ig_pdf(state.shrink_global, 1.0, 1.0 / state.aux_xi)
        total += _log_ig_pdf(state.aux_xi, 1.0, 1.0)
    else:
        # Sequential-prior kernel without the log|det A_j| volume terms:
        # they do not involve the block being updated in any full
        # conditional, so this is the kernel the sweep targets.
        s = _pair_sums(state.betas, ws.omega)
        for k in range(K):
            tail = state.betas[k, k:]
            total += -0.5 * ((L - k) * np.log(2.0 * np.pi * gamma) + tail @ tail / gamma)
        for level in range(2, K + 1):
            tau = _tau_for_pair_level(state, level, K)
            total += -0.5 * (
                (level - 1) * np.log(2.0 * np.pi * tau) + s[level - 2] / tau
            )
        if family != "AOP-fixed":
            b0 = config.resolved_b0(K)
            total += _log_ig_pdf(state.tau_sqs, config.a0, b0).sum()
    return float(total)


def _check_finite(state, sweep):
    checks = {
        "betas": state.betas,
        "scores": state.scores,
        "lambdas": state.lambdas,
        "sigma_sq": state.sigma_sq,
    }
    if state.tau_sqs is not None:
        checks["tau_sqs"] = state.tau_sqs
    if state.shrink_locals is not None:
        checks["shrink_locals"] = state.shrink_locals
        checks["shrink_global"] = state.shrink_global
    bad = [name for name, arr in checks.items() if not np.isfinite(arr).all()]
    if bad:
        summary = ", ".join(
            f"{name}=<min {np.nanmin(checks[name]):.3e}, max {np.nanmax(checks[name]):.3e}>"
            for name in bad
        )
        raise NumericalError(f"non-finite state at sweep {sweep}: {summary}")


def _sweep(ws, state, config, rng, sweep_index):
    K = state.betas.shape[0]
    betas, scores = state.betas, state.scores
    f = ws.b @ betas.T
    e = _residual(ws, scores, f)
    for k in range(K):
        zk = scores[:, k]
        residual_k = e + zk[ws.rep] * f[:, k]
        v, u = _beta_vu(ws, state, k, config, residual_k)
        try:
            betas[k] = _draw_from_precision(v, u, rng, f"beta component {k}")
        except NumericalError as exc:
            raise NumericalError(f"sweep {sweep_index}: {exc}") from exc
        f[:, k] = ws.b @ betas[k]
        e = residual_k - zk[ws.rep] * f[:, k]
    for k in range(K):
        zk = scores[:, k]
        residual_k = e + zk[ws.rep] * f[:, k]
        new_zk = _draw_scores_k(
            ws, state.sigma_sq, state.lambdas[k], f[:, k], residual_k, rng
        )
        scores[:, k] = new_zk
        e = residual_k - new_zk[ws.rep] * f[:, k]
    state.lambdas = update_lambda(state, config, rng)
    if config.prior_family == "AOP-G":
        state.tau_sqs = _draw_tau(state, ws.omega, "global", config, rng)
    elif config.prior_family == "AOP-L":
        state.tau_sqs = _draw_tau(state, ws.omega, "local", config, rng)
    if config.prior_family == "NO-S":
        for k in range(K):
            locals_k, nu_k, glob, xi = _draw_horseshoe(state, k, rng)
            state.shrink_locals[k] = locals_k
            state.aux_nu[k] = nu_k
            state.shrink_global = glob
            state.aux_xi = xi
    rss = float(e @ e)
    state.sigma_sq = float(
        _inv_gamma(rng, config.a_sigma + ws.m_total / 2.0, config.b_sigma + 0.5 * rss)
    )
    return rss


def _component_sign(beta, phi_mid):
    mid_value = float(beta @ phi_mid)
    if mid_value > 0:
        return 1.0
    if mid_value < 0:
        return -1.0
    nonzero = np.nonzero(beta)[0]
    if nonzero.size and beta[nonzero[0]] < 0:
        return -1.0
    return 1.0


def _validate_init_state(state, data, K, L, config):
    if state.betas.shape != (K, L) or state.scores.shape != (data.n, K):
        raise DimensionError("init_state shapes do not match data/basis/K")
    family = config.prior_family
    if family in AOP_FAMILIES and state.tau_sqs is None:
        raise ConfigurationError(f"{family} init_state needs tau_sqs")
    if family == "NO-S" and (state.shrink_locals is None or state.aux_nu is None):
        raise ConfigurationError("NO-S init_state needs horseshoe scale fields")


def run_gibbs(data, basis, K, config, init_state=None):
    """Run one chain and return thinned draws plus posterior summaries."""
    if data.n < 1:
        raise DataError("cannot fit an empty dataset")
    L = basis.spec.L
    if not 1 <= K <= L:
        raise ConfigurationError(f"need 1 <= K <= L, got K={K}, L={L}")
    if config.prior_family == "AOP-fixed" and config.fixed_tau is None:
        raise ConfigurationError("AOP-fixed requires fixed_tau values")
    ws = _Workspace(data, basis)
    rng = np.random.default_rng(config.seed)
    if init_state is None:
        state = initial_state(data, basis, K, config, rng)
    else:
        state = init_state.copy()
        _validate_init_state(state, data, K, L, config)

    n_store = config.n_iter // config.thin
    tau_dim = 0 if state.tau_sqs is None else state.tau_sqs.shape[0]
    beta_draws = np.empty((n_store, K, L))
    lambda_draws = np.empty((n_store, K))
    tau_draws = np.empty((n_store, tau_dim))
    sigma_draws = np.empty(n_store)
    log_dens = np.empty(n_store)
    scores_sum = np.zeros((data.n, K))

    stored = 0
    total_sweeps = config.n_burnin + config.n_iter
    for sweep in range(1, total_sweeps + 1):
        rss = _sweep(ws, state, config, rng, sweep)
        _check_finite(state, sweep)
        past_burnin = sweep - config.n_burnin
        if past_burnin >= 1 and past_burnin % config.thin == 0:
            beta_draws[stored] = state.betas
            lambda_draws[stored] = state.lambdas
            if tau_dim:
                tau_draws[stored] = state.tau_sqs
            sigma_draws[stored] = state.sigma_sq
            log_dens[stored] = _log_state_density(ws, state, config, rss)
            scores_sum += state.scores
            stored += 1

    beta_mean_raw = beta_draws.mean(axis=0)
    norms_raw = np.array([function_norm_sq(b, basis.gram) for b in beta_mean_raw])
    perm = np.argsort(-norms_raw, kind="stable")

    a, b = basis.spec.domain
    grid = np.linspace(a, b, config.report_grid_size)
    phi_grid = design_matrix(basis, grid)
    phi_mid = design_matrix(basis, 0.5 * (a + b))[0]
    signs = np.array([_component_sign(beta_mean_raw[p], phi_mid) for p in perm])

    beta_draws = beta_draws[:, perm, :] * signs[None, :, None]
    lambda_draws = lambda_draws[:, perm]
    beta_mean = beta_mean_raw[perm] * signs[:, None]
    scores_mean = (scores_sum / stored)[:, perm] * signs[None, :]
    norms = norms_raw[perm]

    f_draws = np.einsum("dkl,gl->dkg", beta_draws, phi_grid)
    f_mean = beta_mean @ phi_grid.T
    f_lower = np.percentile(f_draws, 2.5, axis=0)
    f_upper = np.percentile(f_draws, 97.5, axis=0)

    return PosteriorDraws(
        betas=beta_draws,
        lambdas=lambda_draws,
        tau_sqs=tau_draws,
        sigma_sqs=sigma_draws,
        log_densities=log_dens,
        beta_mean=beta_mean,
        scores_mean=scores_mean,
        norms=norms,
        permutation=perm,
        signs=signs,
        grid=grid,
        f_mean=f_mean,
        f_lower=f_lower,
        f_upper=f_upper,
        prior_family=config.prior_family,
    )
