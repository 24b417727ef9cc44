"""Command-line interface: simulate, fit, replicate, scale, prior-plot.

Every command is deterministic given its flags and seed. Options may
also come from a `key = value` config file (--config); explicit flags
win over file values, which win over built-in defaults. Exit codes:
0 success, 1 usage/configuration error, 2 data error, 3 numerical
failure.
"""

import argparse
import json
import struct
import sys
from pathlib import Path

import numpy as np

from .basis import KIND_BSPLINE, BasisSpec, build_basis
from .errors import (
    ConfigurationError,
    DataError,
    NumericalError,
    OrthoFpcaError,
)
from .metrics import compute_metrics
from .prior import figure1_density_grid
from .sampler import FunctionalDataset, GibbsConfig, run_gibbs
from .simulation import SCENARIOS, ScenarioSpec, generate_dataset, run_study

PRIOR_NAMES = {"no": "NO", "no-s": "NO-S", "aop-g": "AOP-G", "aop-l": "AOP-L"}

FIGURE1_BETA1 = (0.5, 1.0)
FIGURE1_CONFIGS = ((0.01, 1.0), (1.0, 1.0), (0.01, 2.0))
FIGURE1_POINTS = 201
FIGURE1_HALF_WIDTH = 3.0

DRAWS_MAGIC = b"OFPC"
DRAWS_VERSION = 1


def _parse_int(key):
    def convert(raw):
        try:
            return int(raw)
        except ValueError:
            raise ConfigurationError(f"option {key}: expected integer, got {raw!r}") from None

    return convert


def _parse_float(key):
    def convert(raw):
        try:
            return float(raw)
        except ValueError:
            raise ConfigurationError(f"option {key}: expected number, got {raw!r}") from None

    return convert


def _parse_choice(key, choices):
    def convert(raw):
        if raw not in choices:
            raise ConfigurationError(
                f"option {key}: expected one of {', '.join(choices)}, got {raw!r}"
            )
        return raw

    return convert


def _parse_list(key, item):
    def convert(raw):
        return tuple(item(part.strip()) for part in raw.split(","))

    return convert


def _prior_name(raw):
    key = raw.lower()
    if key not in PRIOR_NAMES:
        raise ConfigurationError(
            f"option prior: expected one of {', '.join(PRIOR_NAMES)}, got {raw!r}"
        )
    return PRIOR_NAMES[key]


_MCMC_SCHEMA = {
    "prior": _prior_name,
    "K": _parse_int("K"),
    "L": _parse_int("L"),
    "iters": _parse_int("iters"),
    "burnin": _parse_int("burnin"),
    "thin": _parse_int("thin"),
    "epsilon": _parse_float("epsilon"),
    "gamma": _parse_float("gamma"),
    "a0": _parse_float("a0"),
    "b0": _parse_float("b0"),
    "seed": _parse_int("seed"),
    "out": str,
}

_MCMC_DEFAULTS = {
    "prior": "AOP-G",
    "K": 10,
    "L": 12,
    "iters": 3000,
    "burnin": 2000,
    "thin": 1,
    "epsilon": 0.1,
    "gamma": 1.0,
    "a0": 3.0,
    "b0": None,
    "seed": 1,
}

_SCHEMAS = {
    "simulate": {
        "scenario": _parse_choice("scenario", SCENARIOS),
        "n": _parse_int("n"),
        "seed": _parse_int("seed"),
        "out": str,
    },
    "fit": dict(_MCMC_SCHEMA),
    "replicate": {
        **_MCMC_SCHEMA,
        "scenario": _parse_list("scenario", _parse_choice("scenario", SCENARIOS)),
        "n": _parse_list("n", _parse_int("n")),
        "prior": _parse_list("prior", _prior_name),
        "reps": _parse_int("reps"),
        "parallel": _parse_int("parallel"),
    },
    "scale": {"out": str},
    "prior-plot": {"out": str},
}

_DEFAULTS = {
    "simulate": {"scenario": "legendre", "n": 100, "seed": 1, "out": "dataset.csv"},
    "fit": {**_MCMC_DEFAULTS, "out": "fit-out"},
    "replicate": {
        **_MCMC_DEFAULTS,
        "scenario": ("legendre",),
        "n": (100,),
        "prior": ("AOP-G",),
        "reps": 20,
        "parallel": 1,
        "out": "study.csv",
    },
    "scale": {"out": "scaled.csv"},
    "prior-plot": {"out": "prior_density.csv"},
}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage problems; the contract reserves 2
    # for data errors, so route usage failures through the config branch.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigurationError(message)


def _build_parser():
    parser = _Parser(prog="orthofpca", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, with_input=False):
        p = sub.add_parser(name, help=help_text)
        if with_input:
            p.add_argument("input", help="input CSV with columns id,t,y")
        for key in _SCHEMAS[name]:
            p.add_argument(f"--{key}", default=None)
        p.add_argument("--config", default=None, help="key = value option file")
        return p

    add("simulate", "generate a synthetic dataset CSV")
    add("fit", "fit one chain to a dataset and write posterior summaries", with_input=True)
    add("replicate", "run a Monte Carlo study over scenario/n/prior cells")
    add("scale", "divide each curve by its root mean square", with_input=True)
    add("prior-plot", "emit conditional prior density surfaces as CSV")
    return parser


def _read_config_file(path, schema):
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    raw = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in schema:
            raise ConfigurationError(f"{path}:{lineno}: unknown option {key!r}")
        raw[key] = value.strip()
    return raw


def _effective_options(ns, command):
    schema = _SCHEMAS[command]
    effective = dict(_DEFAULTS[command])
    raw = {}
    if ns.config is not None:
        raw.update(_read_config_file(ns.config, schema))
    for key in schema:
        flag_value = getattr(ns, key.replace("-", "_"), None)
        if flag_value is not None:
            raw[key] = flag_value
    for key, value in raw.items():
        effective[key] = schema[key](value)
    return effective


def _format_value(value):
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(_format_value(v) for v in value)
    return str(value)


def _write_config_echo(path, effective):
    # None means "left unset"; omitting the key keeps the echo usable as
    # a --config file.
    lines = [
        f"{key} = {_format_value(value)}"
        for key, value in sorted(effective.items())
        if value is not None
    ]
    path.write_text("\n".join(lines) + "\n")


def _write_rows(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _write_dataset_csv(path, data):
    rows = []
    for cid, times, values in zip(data.ids, data.times, data.values):
        rows.extend((cid, repr(float(t)), repr(float(y))) for t, y in zip(times, values))
    _write_rows(path, ("id", "t", "y"), rows)


def _read_dataset_csv(path):
    path = Path(path)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    lines = path.read_text().splitlines()
    if not lines or [c.strip() for c in lines[0].split(",")] != ["id", "t", "y"]:
        raise DataError(f"{path}: expected header 'id,t,y'")
    curves = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise DataError(f"{path}:{lineno}: expected 3 comma-separated fields")
        cid = parts[0].strip()
        try:
            t, y = float(parts[1]), float(parts[2])
        except ValueError:
            raise DataError(f"{path}:{lineno}: non-numeric t or y") from None
        curves.setdefault(cid, ([], []))
        curves[cid][0].append(t)
        curves[cid][1].append(y)
    if not curves:
        raise DataError(f"{path}: no data rows")
    ids = tuple(curves)
    times = tuple(np.array(curves[cid][0]) for cid in ids)
    values = tuple(np.array(curves[cid][1]) for cid in ids)
    return FunctionalDataset(ids, times, values)


def cmd_simulate(ns):
    eff = _effective_options(ns, "simulate")
    data = generate_dataset(ScenarioSpec(eff["scenario"], eff["n"]), eff["seed"])
    out = Path(eff["out"])
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True)
    _write_dataset_csv(out, data)
    sidecar = out.with_suffix(".json")
    spec_echo = {
        "scenario": eff["scenario"],
        "n": eff["n"],
        "T": 30,
        "sigma": 1.0,
        "score_sds": [1.0, 0.7, 0.5],
        "seed": eff["seed"],
    }
    sidecar.write_text(json.dumps(spec_echo, indent=2, sort_keys=True) + "\n")
    print(f"wrote {sum(t.size for t in data.times)} rows to {out}")
    return 0


def _write_draws_bin(path, draws):
    n = draws.scores_mean.shape[0]
    n_tau = draws.tau_sqs.shape[1]
    header = struct.pack("<4sI", DRAWS_MAGIC, DRAWS_VERSION) + np.array(
        [draws.K, draws.L, n, draws.n_draws, n_tau], dtype="<i8"
    ).tobytes()
    blocks = np.concatenate(
        [
            draws.betas.reshape(draws.n_draws, -1),
            draws.lambdas,
            draws.tau_sqs,
            draws.sigma_sqs[:, None],
        ],
        axis=1,
    ).astype("<f8")
    path.write_bytes(header + blocks.tobytes())


def _write_fit_outputs(outdir, eff, data, basis, draws, report):
    outdir.mkdir(parents=True, exist_ok=True)
    a, b = basis.spec.domain
    summary = {
        "prior": draws.prior_family,
        "K": draws.K,
        "L": draws.L,
        "n": data.n,
        "domain": [a, b],
        "epsilon": eff["epsilon"],
        "iters": eff["iters"],
        "burnin": eff["burnin"],
        "thin": eff["thin"],
        "seed": eff["seed"],
        "nc": report.nc,
        "og": report.og,
        "sigma_sq_mean": float(draws.sigma_sqs.mean()),
        "norms": [float(v) for v in report.norms],
        "lambda_mean": [float(v) for v in draws.lambdas.mean(axis=0)],
    }
    (outdir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")

    header = ["t"]
    for k in range(draws.K):
        header.extend([f"f{k + 1}_mean", f"f{k + 1}_lo", f"f{k + 1}_hi"])
    rows = []
    for g, t in enumerate(draws.grid):
        row = [repr(float(t))]
        for k in range(draws.K):
            row.extend(
                repr(float(v))
                for v in (draws.f_mean[k, g], draws.f_lower[k, g], draws.f_upper[k, g])
            )
        rows.append(row)
    _write_rows(outdir / "functions.csv", header, rows)

    _write_rows(
        outdir / "ip_matrix.csv",
        [f"k{j + 1}" for j in range(draws.K)],
        [[repr(float(v)) for v in row] for row in report.ip_matrix],
    )
    _write_draws_bin(outdir / "draws.bin", draws)
    _write_config_echo(outdir / "config.txt", eff)


def cmd_fit(ns):
    eff = _effective_options(ns, "fit")
    data = _read_dataset_csv(ns.input)
    tmin = min(t.min() for t in data.times)
    tmax = max(t.max() for t in data.times)
    if tmin == tmax:
        raise DataError("input curves span a single time point; cannot build a basis")
    basis = build_basis(BasisSpec(KIND_BSPLINE, eff["L"], (tmin, tmax)))
    config = GibbsConfig(
        n_iter=eff["iters"],
        n_burnin=eff["burnin"],
        thin=eff["thin"],
        seed=eff["seed"],
        prior_family=eff["prior"],
        a0=eff["a0"],
        b0=eff["b0"],
        gamma=eff["gamma"],
    )
    draws = run_gibbs(data, basis, eff["K"], config)
    report = compute_metrics(draws.beta_mean, basis.gram, eff["epsilon"])
    _write_fit_outputs(Path(eff["out"]), eff, data, basis, draws, report)
    print(f"NC = {report.nc}")
    print(f"OG = {report.og:.6f}")
    print(f"sigma_sq posterior mean = {draws.sigma_sqs.mean():.6f}")
    return 0


def cmd_replicate(ns):
    eff = _effective_options(ns, "replicate")
    mcmc = GibbsConfig(
        n_iter=eff["iters"],
        n_burnin=eff["burnin"],
        thin=eff["thin"],
        seed=eff["seed"],
        prior_family="AOP-G",
        a0=eff["a0"],
        b0=eff["b0"],
        gamma=eff["gamma"],
    )
    report = run_study(
        eff["scenario"],
        eff["n"],
        eff["prior"],
        eff["reps"],
        mcmc,
        parallelism=eff["parallel"],
        K=eff["K"],
        L=eff["L"],
        epsilon=eff["epsilon"],
        progress=lambda message: print(message, file=sys.stderr),
    )
    out = Path(eff["out"])
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True)
    header = ("scenario", "n", "method", "nc_mean", "nc_sd", "og_mean", "og_sd", "failures")
    rows = [
        (
            c.scenario,
            str(c.n),
            c.method,
            repr(c.nc_mean),
            repr(c.nc_sd),
            repr(c.og_mean),
            repr(c.og_sd),
            str(c.failures),
        )
        for c in report.cells
    ]
    _write_rows(out, header, rows)
    _write_config_echo(out.parent / (out.stem + "_config.txt"), eff)

    widths = [10, 6, 8, 10, 10, 10, 10, 9]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for c in report.cells:
        cells = (
            c.scenario,
            str(c.n),
            c.method,
            f"{c.nc_mean:.3f}",
            f"{c.nc_sd:.3f}",
            f"{c.og_mean:.3f}",
            f"{c.og_sd:.3f}",
            str(c.failures),
        )
        print("  ".join(v.ljust(w) for v, w in zip(cells, widths)))
    if report.any_aborted:
        aborted = [
            f"{c.scenario}/n={c.n}/{c.method}" for c in report.cells if c.aborted
        ]
        raise NumericalError(f"aborted cells (>10% replications failed): {', '.join(aborted)}")
    return 0


def cmd_scale(ns):
    eff = _effective_options(ns, "scale")
    data = _read_dataset_csv(ns.input)
    rms = [float(np.sqrt(np.mean(v**2))) for v in data.values]
    zero_ids = [cid for cid, r in zip(data.ids, rms) if r == 0.0]
    if zero_ids:
        raise DataError(f"all-zero curves cannot be scaled: {', '.join(zero_ids)}")
    out = Path(eff["out"])
    rows = []
    for cid, times, values, r in zip(data.ids, data.times, data.values, rms):
        rows.extend((cid, repr(float(t)), repr(float(y / r))) for t, y in zip(times, values))
    _write_rows(out, ("id", "t", "y"), rows)
    print(f"wrote {sum(t.size for t in data.times)} scaled rows to {out}")
    return 0


def cmd_prior_plot(ns):
    eff = _effective_options(ns, "prior-plot")
    axis = np.linspace(-FIGURE1_HALF_WIDTH, FIGURE1_HALF_WIDTH, FIGURE1_POINTS)
    rows = []
    for tau_sq, b02 in FIGURE1_CONFIGS:
        density = figure1_density_grid(FIGURE1_BETA1, tau_sq, b02, axis, axis)
        label = f"tau2={_format_value(tau_sq)};B02={_format_value(b02)}"
        for i, x in enumerate(axis):
            for j, y in enumerate(axis):
                rows.append((repr(float(x)), repr(float(y)), repr(float(density[i, j])), label))
    _write_rows(Path(eff["out"]), ("x", "y", "density", "config_label"), rows)
    print(f"wrote {len(FIGURE1_CONFIGS)} density surfaces to {eff['out']}")
    return 0


_COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "replicate": cmd_replicate,
    "scale": cmd_scale,
    "prior-plot": cmd_prior_plot,
}


def main(argv=None):
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
        return _COMMANDS[ns.command](ns)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OrthoFpcaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
