"""Synthetic scenarios and the Monte Carlo study harness.

Both scenario triples are orthonormal on [0, 1], so three is the
ground-truth number of effective components; scores for the three
components have decreasing variances (1, 0.49, 0.25) and unit Gaussian
noise is added at T equally spaced observation points.
"""

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .basis import KIND_BSPLINE, BasisSpec, build_basis
from .errors import ConfigurationError, DomainError, OrthoFpcaError
from .metrics import compute_metrics
from .sampler import FunctionalDataset, run_gibbs

SCENARIOS = ("legendre", "haar")
STUDY_METHODS = ("NO", "NO-S", "AOP-G", "AOP-L")

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class ScenarioSpec:
    """One simulation cell: scenario family, curve count, grid, noise."""

    scenario: str
    n: int
    T: int = 30
    sigma: float = 1.0
    score_sds: tuple = (1.0, 0.7, 0.5)

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigurationError(f"unknown scenario {self.scenario!r}")
        if self.n < 1 or self.T < 2:
            raise ConfigurationError(f"need n >= 1 and T >= 2, got n={self.n}, T={self.T}")
        # sigma = 0 is allowed so tests can generate noiseless curves.
        if self.sigma < 0 or len(self.score_sds) != 3 or any(s < 0 for s in self.score_sds):
            raise ConfigurationError("sigma and the three score SDs must be nonnegative")


def _triple(scenario, t):
    t = np.asarray(t, dtype=float)
    if scenario == "legendre":
        return np.stack(
            [
                np.sqrt(3.0) * (2.0 * t - 1.0),
                np.sqrt(5.0) * (6.0 * t**2 - 6.0 * t + 1.0),
                np.sqrt(7.0) * (20.0 * t**3 - 30.0 * t**2 + 12.0 * t - 1.0),
            ]
        )
    # Haar pieces are half-open as printed, with t = 1 in the closed
    # right-end pieces of f1 and f3.
    return np.stack(
        [
            np.where(t < 0.5, 1.0, -1.0),
            SQRT2
            * (
                np.where(t < 0.25, 1.0, 0.0)
                - np.where((t >= 0.25) & (t < 0.5), 1.0, 0.0)
            ),
            SQRT2
            * (
                np.where((t >= 0.5) & (t < 0.75), 1.0, 0.0)
                - np.where(t >= 0.75, 1.0, 0.0)
            ),
        ]
    )


def true_functions(scenario, t):
    """The three generating functions (f1(t), f2(t), f3(t)) at one point."""
    if scenario not in SCENARIOS:
        raise ConfigurationError(f"unknown scenario {scenario!r}")
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t={t} outside the generator domain [0, 1]")
    values = _triple(scenario, np.array([t]))[:, 0]
    return tuple(float(v) for v in values)


def generate_dataset(spec, seed, scores=None):
    """Draw n curves on the equally spaced grid j/(T-1), j = 0..T-1.

    scores, if given, overrides the latent score draws (n x 3); the
    noiseless single-component check uses this hook.
    """
    grid = np.linspace(0.0, 1.0, spec.T)
    f = _triple(spec.scenario, grid)
    rng = np.random.default_rng(seed)
    if scores is None:
        xi = rng.standard_normal((spec.n, 3)) * np.asarray(spec.score_sds)
    else:
        xi = np.asarray(scores, dtype=float)
        if xi.shape != (spec.n, 3):
            raise ConfigurationError(f"score override must be ({spec.n}, 3)")
    noise = rng.standard_normal((spec.n, spec.T))
    y = xi @ f + spec.sigma * noise
    ids = tuple(str(i + 1) for i in range(spec.n))
    return FunctionalDataset(ids, tuple(grid for _ in range(spec.n)), tuple(y))


@dataclass(frozen=True)
class CellResult:
    """Aggregated NC / OG statistics for one (scenario, n, method) cell."""

    scenario: str
    n: int
    method: str
    nc_mean: float
    nc_sd: float
    og_mean: float
    og_sd: float
    failures: int
    aborted: bool


@dataclass(frozen=True)
class StudyReport:
    """All cell results of one Monte Carlo study."""

    cells: tuple
    replications: int
    master_seed: int

    @property
    def any_aborted(self):
        return any(c.aborted for c in self.cells)


def _derive_seed(master, scenario, n, method, r, salt):
    key = f"{master}|{scenario}|{n}|{method}|{r}|{salt}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "little")


def _run_replication(task):
    scenario, n, method, r, master, mcmc, K, L, epsilon = task
    try:
        data_seed = _derive_seed(master, scenario, n, method, r, "data")
        chain_seed = _derive_seed(master, scenario, n, method, r, "chain")
        data = generate_dataset(ScenarioSpec(scenario, n), data_seed)
        basis = build_basis(BasisSpec(KIND_BSPLINE, L, (0.0, 1.0)))
        config = replace(mcmc, prior_family=method, seed=chain_seed)
        draws = run_gibbs(data, basis, K, config)
        report = compute_metrics(draws.beta_mean, basis.gram, epsilon)
        return float(report.nc), report.og, None
    except OrthoFpcaError as exc:
        return np.nan, np.nan, f"{type(exc).__name__}: {exc}"


def run_study(
    scenarios,
    ns,
    methods,
    R,
    mcmc,
    parallelism=1,
    K=10,
    L=12,
    epsilon=0.1,
    progress=None,
):
    """Run the full generate / fit / metrics grid and aggregate per cell.

    Replication seeds are derived by hashing (master seed, scenario, n,
    method, replication index), so results do not depend on parallelism
    or scheduling order. Failed replications are excluded with a warning;
    a cell with more than 10% failures is marked aborted.
    """
    if R < 1:
        raise ConfigurationError(f"need at least one replication, got R={R}")
    if parallelism < 1:
        raise ConfigurationError(f"parallelism must be >= 1, got {parallelism}")
    for method in methods:
        if method not in STUDY_METHODS:
            raise ConfigurationError(f"unknown study method {method!r}")
    cells = [(s, int(n), m) for s in scenarios for n in ns for m in methods]
    master = mcmc.seed
    tasks = [
        (scenario, n, method, r, master, mcmc, K, L, epsilon)
        for scenario, n, method in cells
        for r in range(R)
    ]
    if parallelism == 1:
        results = []
        for task in tasks:
            results.append(_run_replication(task))
            if progress is not None:
                scenario, n, method, r = task[:4]
                progress(f"{scenario} n={n} {method}: replication {r + 1}/{R} done")
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = []
            for task, outcome in zip(tasks, pool.map(_run_replication, tasks)):
                results.append(outcome)
                if progress is not None:
                    scenario, n, method, r = task[:4]
                    progress(f"{scenario} n={n} {method}: replication {r + 1}/{R} done")

    out = []
    for index, (scenario, n, method) in enumerate(cells):
        chunk = results[index * R : (index + 1) * R]
        nc = np.array([c[0] for c in chunk])
        og = np.array([c[1] for c in chunk])
        failures = int(np.isnan(nc).sum())
        if progress is not None:
            for outcome in chunk:
                if outcome[2] is not None:
                    progress(f"warning: {scenario} n={n} {method} replication failed: {outcome[2]}")
        aborted = failures > 0.1 * R
        ok_nc, ok_og = nc[~np.isnan(nc)], og[~np.isnan(og)]
        if aborted or ok_nc.size == 0:
            stats = (np.nan, np.nan, np.nan, np.nan)
            aborted = True
        else:
            sd = (
                (float(ok_nc.std(ddof=1)), float(ok_og.std(ddof=1)))
                if ok_nc.size > 1
                else (0.0, 0.0)
            )
            stats = (float(ok_nc.mean()), sd[0], float(ok_og.mean()), sd[1])
        out.append(
            CellResult(scenario, n, method, stats[0], stats[1], stats[2], stats[3], failures, aborted)
        )
    return StudyReport(cells=tuple(out), replications=R, master_seed=master)
