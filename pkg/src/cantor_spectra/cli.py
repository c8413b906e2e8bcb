"""Command-line front end.

Builds potentials, solves spectra with either engine, and emits figure
data (segment tables, eigenvalue CSV, density CSV, staircase CSV,
cluster CSV, sweep summaries) plus standalone matplotlib companion
scripts.  Output is deterministic: identical configs give byte-identical
bytes.  Exit codes: 0 success, 1 solver/runtime failure, 2 bad config.
"""

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .analysis import detect_clusters, mu_sweep, participation_ratio, staircase
from .fd import (
    assemble_hamiltonian,
    default_grid,
    eigenvalues_in_range,
    eigenvector,
    eigenvectors,
    sturm_count,
)
from .model import ConvergenceError, Grid, ModelParams
from .potential import (
    CantorSpec,
    ParseError,
    build_cantor_potential,
    parse_potential,
    serialize_potential,
)
from .tm import StaleEigenvalueError, node_count, tm_eigenfunction, tm_eigenvalues

__all__ = ["ConfigError", "RunConfig", "parse_args", "run", "emit_plot_script", "main"]


class ConfigError(ValueError):
    """Invalid configuration (bad flag value, bad config file, bad key)."""


def _float_list(text):
    try:
        items = tuple(float(part) for part in str(text).split(",") if part.strip() != "")
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}") from None
    if not items:
        raise ConfigError(f"expected a nonempty list of numbers, got {text!r}")
    return items


# every key a config file may set, with its converter; flag values
# override these, and they override the defaults below
_KEYS = {
    "order": int,
    "well_value": float,
    "barrier_value": float,
    "removal_fraction": str,
    "potential_file": str,
    "mu": float,
    "mu_list": _float_list,
    "lo": float,
    "hi": float,
    "tol": float,
    "engine": str,
    "format": str,
    "output": str,
    "grid_n": int,
    "samples": int,
    "resolution": int,
    "threshold": float,
    "lowest": int,
    "energies": _float_list,
    "data": str,
}

_DEFAULTS = {
    "order": 4,
    "well_value": -1.0,
    "barrier_value": 1.0,
    "removal_fraction": "1/3",
    "mu": 300.0,
    "lo": -1.0,
    "hi": 0.0,
    "tol": 1e-10,
    "engine": "fd",
    "format": "csv",
    "resolution": 1000,
}


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    order: int = 4
    well_value: float = -1.0
    barrier_value: float = 1.0
    removal_fraction: str = "1/3"
    potential_file: str = None
    mu: float = 300.0
    mu_list: tuple = None
    lo: float = -1.0
    hi: float = 0.0
    tol: float = 1e-10
    engine: str = "fd"
    format: str = "csv"
    output: str = None
    grid_n: int = None
    samples: int = None
    resolution: int = 1000
    threshold: float = None
    lowest: int = None
    energies: tuple = None
    data: str = None


def _read_config_file(path):
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    out = {}
    for lineno, line in enumerate(lines, start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = body.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _KEYS[key](value)
        except (ValueError, TypeError):
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return out


def _add_potential_flags(sub):
    sub.add_argument("--order", type=int, help="construction order N (default 4)")
    sub.add_argument("--well-value", dest="well_value", type=float)
    sub.add_argument("--barrier-value", dest="barrier_value", type=float)
    sub.add_argument("--removal-fraction", dest="removal_fraction", help="e.g. 1/3 or 0.25")
    sub.add_argument(
        "--potential-file",
        dest="potential_file",
        help="load the potential from a segment-table file instead of building one",
    )


def _add_common_flags(sub):
    sub.add_argument("--config", help="flat key=value config file; flags win")
    sub.add_argument("--output", "-o", help="write here instead of stdout")
    sub.add_argument("--format", choices=["csv", "jsonl"], help="table format (default csv)")
    _add_potential_flags(sub)


def parse_args(argv):
    parser = argparse.ArgumentParser(
        prog="cantor-spectra",
        description="Bound states of a particle in a box with a Cantor-like potential.",
    )
    subs = parser.add_subparsers(dest="subcommand", required=True)

    sub = subs.add_parser("potential", help="emit the potential segment table")
    _add_common_flags(sub)

    sub = subs.add_parser("spectrum", help="eigenvalues in a window (index, eps, PR)")
    _add_common_flags(sub)
    sub.add_argument("--mu", type=float)
    sub.add_argument("--lo", type=float)
    sub.add_argument("--hi", type=float)
    sub.add_argument("--tol", type=float)
    sub.add_argument("--engine", choices=["fd", "tm"])
    sub.add_argument("--grid-n", dest="grid_n", type=int, help="override the grid-resolution rule")
    sub.add_argument("--samples", type=int, help="tm engine: eigenfunction sample count")

    sub = subs.add_parser("states", help="probability densities at requested energies")
    _add_common_flags(sub)
    sub.add_argument("--mu", type=float)
    sub.add_argument("--tol", type=float)
    sub.add_argument("--engine", choices=["fd", "tm"])
    sub.add_argument("--grid-n", dest="grid_n", type=int)
    sub.add_argument("--samples", type=int)
    sub.add_argument("--energies", type=_float_list, help="comma-separated eigenvalues")

    sub = subs.add_parser("staircase", help="integrated density of states on an energy grid")
    _add_common_flags(sub)
    sub.add_argument("--mu", type=float)
    sub.add_argument("--lo", type=float)
    sub.add_argument("--hi", type=float)
    sub.add_argument("--resolution", type=int)
    sub.add_argument("--engine", choices=["fd", "tm"])
    sub.add_argument("--grid-n", dest="grid_n", type=int)

    sub = subs.add_parser("clusters", help="gap-threshold clustering of a window")
    _add_common_flags(sub)
    sub.add_argument("--mu", type=float)
    sub.add_argument("--lo", type=float)
    sub.add_argument("--hi", type=float)
    sub.add_argument("--tol", type=float)
    sub.add_argument("--engine", choices=["fd", "tm"])
    sub.add_argument("--grid-n", dest="grid_n", type=int)
    sub.add_argument("--threshold", type=float, help="gap threshold (default: geometric mean rule)")
    sub.add_argument("--lowest", type=int, help="cluster only the k lowest eigenvalues")

    sub = subs.add_parser("sweep", help="one spectrum summary row per mu")
    _add_common_flags(sub)
    sub.add_argument("--mu", type=float)
    sub.add_argument("--mu-list", dest="mu_list", type=_float_list)
    sub.add_argument("--lo", type=float)
    sub.add_argument("--hi", type=float)
    sub.add_argument("--tol", type=float)

    sub = subs.add_parser("plot-script", help="emit a matplotlib script for an existing CSV")
    _add_common_flags(sub)
    sub.add_argument("--data", help="CSV (or segment table) produced by another subcommand")

    ns = parser.parse_args(argv)
    merged = dict(_DEFAULTS)
    if getattr(ns, "config", None):
        merged.update(_read_config_file(ns.config))
    for key in _KEYS:
        value = getattr(ns, key, None)
        if value is not None:
            merged[key] = value
    cfg = RunConfig(subcommand=ns.subcommand, **{k: merged[k] for k in merged})
    _validate(cfg)
    return cfg


def _validate(cfg):
    if not isinstance(cfg.order, int) or cfg.order < 0:
        raise ConfigError(f"order must be a nonnegative integer, got {cfg.order!r}")
    if not cfg.mu > 0 or not math.isfinite(cfg.mu):
        raise ConfigError(f"mu must be positive and finite, got {cfg.mu!r}")
    if cfg.mu_list is not None and any(m <= 0 or not math.isfinite(m) for m in cfg.mu_list):
        raise ConfigError(f"every mu in mu_list must be positive, got {cfg.mu_list!r}")
    if not cfg.lo < cfg.hi:
        raise ConfigError(f"window must satisfy lo < hi, got ({cfg.lo!r}, {cfg.hi!r})")
    if not cfg.tol > 0:
        raise ConfigError(f"tol must be positive, got {cfg.tol!r}")
    if cfg.engine not in ("fd", "tm"):
        raise ConfigError(f"engine must be fd or tm, got {cfg.engine!r}")
    if cfg.format not in ("csv", "jsonl"):
        raise ConfigError(f"format must be csv or jsonl, got {cfg.format!r}")
    if cfg.resolution < 1:
        raise ConfigError(f"resolution must be >= 1, got {cfg.resolution!r}")
    if cfg.grid_n is not None and cfg.grid_n < 1:
        raise ConfigError(f"grid_n must be >= 1, got {cfg.grid_n!r}")
    if cfg.samples is not None and cfg.samples < 1:
        raise ConfigError(f"samples must be >= 1, got {cfg.samples!r}")
    if cfg.threshold is not None and (cfg.threshold < 0 or not math.isfinite(cfg.threshold)):
        raise ConfigError(f"threshold must be finite and >= 0, got {cfg.threshold!r}")
    if cfg.lowest is not None and cfg.lowest < 1:
        raise ConfigError(f"lowest must be >= 1, got {cfg.lowest!r}")
    if cfg.subcommand == "states" and not cfg.energies:
        raise ConfigError("states requires --energies")
    if cfg.subcommand == "plot-script" and not cfg.data:
        raise ConfigError("plot-script requires --data")


def _fmt(x):
    return format(float(x), ".17g")


def _build(cfg):
    if cfg.potential_file is not None:
        try:
            with open(cfg.potential_file) as fh:
                return parse_potential(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read potential file: {exc}") from None
    spec = CantorSpec(
        order=cfg.order,
        well_value=cfg.well_value,
        barrier_value=cfg.barrier_value,
        removal_fraction=cfg.removal_fraction,
    )
    return build_cantor_potential(spec)


def _table(cfg, header, rows):
    """Render rows as csv or json-lines; one writer, '\\n' newlines only."""
    if cfg.format == "jsonl":
        def clean(v):
            # strict JSON has no NaN literal
            if isinstance(v, float) and not math.isfinite(v):
                return None
            return v

        lines = [
            json.dumps({k: clean(v) for k, v in zip(header, row)}, separators=(",", ":"))
            for row in rows
        ]
    else:
        lines = [",".join(header)]
        lines.extend(
            ",".join(str(v) if isinstance(v, (int, np.integer)) else _fmt(v) for v in row)
            for row in rows
        )
    return "".join(line + "\n" for line in lines)


def _write(cfg, text):
    if cfg.output is None:
        sys.stdout.write(text)
    else:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)


def _solve_window(cfg, pot, params):
    if cfg.engine == "tm":
        return tm_eigenvalues(pot, params, cfg.lo, cfg.hi, cfg.tol), None
    grid = Grid(cfg.grid_n) if cfg.grid_n else default_grid(pot, params)
    ham = assemble_hamiltonian(pot, params, grid)
    return eigenvalues_in_range(ham, cfg.lo, cfg.hi, cfg.tol), ham


def _run_potential(cfg):
    _write(cfg, serialize_potential(_build(cfg)))
    return 0


def _run_spectrum(cfg):
    pot = _build(cfg)
    params = ModelParams(mu=cfg.mu)
    spect, ham = _solve_window(cfg, pot, params)
    vals = spect.eigenvalues
    if cfg.engine == "tm":
        samples = cfg.samples or default_grid(pot, params).n
        prs = []
        for e in vals:
            # deep clustered states can leave the shooting mismatch pinned
            # above the staleness gate at every float; report PR as nan
            try:
                prs.append(participation_ratio(tm_eigenfunction(pot, params, e, samples)))
            except StaleEigenvalueError:
                prs.append(float("nan"))
    else:
        prs = [participation_ratio(v) for v in eigenvectors(ham, vals, cfg.tol)]
    rows = [(i, float(e), pr) for i, (e, pr) in enumerate(zip(vals, prs))]
    _write(cfg, _table(cfg, ("index", "eps", "pr"), rows))
    return 0


def _run_states(cfg):
    pot = _build(cfg)
    params = ModelParams(mu=cfg.mu)
    if cfg.engine == "tm":
        samples = cfg.samples or default_grid(pot, params).n
        psis = [tm_eigenfunction(pot, params, e, samples) for e in cfg.energies]
    else:
        grid = Grid(cfg.grid_n) if cfg.grid_n else default_grid(pot, params)
        ham = assemble_hamiltonian(pot, params, grid)
        psis = [eigenvector(ham, e, cfg.tol) for e in cfg.energies]
    header = ("x",) + tuple(f"psi2_{_fmt(e)}" for e in cfg.energies)
    dens = [psi.values**2 for psi in psis]
    rows = [
        (float(x),) + tuple(float(d[i]) for d in dens) for i, x in enumerate(psis[0].x)
    ]
    _write(cfg, _table(cfg, header, rows))
    return 0


def _run_staircase(cfg):
    pot = _build(cfg)
    params = ModelParams(mu=cfg.mu)
    if cfg.engine == "tm":

        def counter(e):
            return node_count(pot, params, e)

    else:
        grid = Grid(cfg.grid_n) if cfg.grid_n else default_grid(pot, params)
        ham = assemble_hamiltonian(pot, params, grid)

        def counter(e):
            return sturm_count(ham, e)

    data = staircase(counter, cfg.lo, cfg.hi, cfg.resolution)
    rows = list(zip((float(e) for e in data.energies), (int(c) for c in data.counts)))
    _write(cfg, _table(cfg, ("eps", "count"), rows))
    return 0


def _run_clusters(cfg):
    pot = _build(cfg)
    params = ModelParams(mu=cfg.mu)
    spect, _ = _solve_window(cfg, pot, params)
    vals = spect.eigenvalues
    if cfg.lowest is not None:
        vals = vals[: cfg.lowest]
    if cfg.threshold is not None:
        threshold = cfg.threshold
    elif vals.size >= 2:
        gaps = np.diff(vals)
        threshold = math.sqrt(float(gaps.max()) * float(gaps.min()))
    else:
        threshold = 0.0
    report = detect_clusters(vals, threshold)
    rows = [
        (cid, float(vals[i]))
        for cid, (a, b) in enumerate(report.ranges)
        for i in range(a, b)
    ]
    _write(cfg, _table(cfg, ("cluster", "eps"), rows))
    return 0


def _run_sweep(cfg):
    pot = _build(cfg)
    mus = cfg.mu_list if cfg.mu_list is not None else (cfg.mu,)
    records = mu_sweep(pot, mus, (cfg.lo, cfg.hi), cfg.tol)
    rows = [
        (
            float(r.mu),
            int(r.count_below_zero),
            float(r.e_min),
            float(r.e_max),
            float(np.mean(r.prs)) if r.prs.size else math.nan,
        )
        for r in records
    ]
    _write(cfg, _table(cfg, ("mu", "count_below_zero", "e_min", "e_max", "mean_pr"), rows))
    return 0


_PLOT_HEADER = """\
#!/usr/bin/env python3
# plotting companion generated by cantor-spectra; needs matplotlib
import csv

import matplotlib.pyplot as plt
"""


def _script_staircase(path):
    return f"""{_PLOT_HEADER}
eps, count = [], []
with open({path!r}) as fh:
    for row in csv.DictReader(fh):
        eps.append(float(row["eps"]))
        count.append(int(row["count"]))
fig, ax = plt.subplots()
ax.step(eps, count, where="post")
ax.set_xlabel("eps")
ax.set_ylabel("N(eps)")
ax.set_title("integrated density of states")
fig.savefig("staircase.png", dpi=150)
"""


def _script_states(path, pot):
    bps = "[" + ", ".join(_fmt(b) for b in pot.breakpoints) + "]"
    vals = "[" + ", ".join(_fmt(v) for v in pot.values) + "]"
    return f"""{_PLOT_HEADER}
with open({path!r}) as fh:
    reader = csv.reader(fh)
    header = next(reader)
    cols = [[] for _ in header]
    for row in reader:
        for col, cell in zip(cols, row):
            col.append(float(cell))
fig, ax = plt.subplots()
for name, col in zip(header[1:], cols[1:]):
    ax.plot(cols[0], col, label=name)
ax.set_xlabel("x")
ax.set_ylabel("|psi|^2")
ax.legend(fontsize="small")
breakpoints = {bps}
values = {vals}
outline = ax.twinx()
outline.step(breakpoints, values + values[-1:], where="post", color="gray", alpha=0.4)
outline.set_ylabel("v(x)")
fig.savefig("states.png", dpi=150)
"""


def _script_potential(path):
    return f"""{_PLOT_HEADER}
xs, vs = [], []
with open({path!r}) as fh:
    for line in fh:
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        a, b, v = (float(part) for part in line.split())
        xs.append(a)
        vs.append(v)
if xs:
    xs.append(b)
fig, ax = plt.subplots()
ax.fill_between(xs, vs + vs[-1:], min(vs, default=0), step="post", alpha=0.6)
ax.set_xlabel("x")
ax.set_ylabel("v(x)")
ax.set_title("piecewise-constant potential")
fig.savefig("potential.png", dpi=150)
"""


def _script_spectrum(path):
    return f"""{_PLOT_HEADER}
idx, eps = [], []
with open({path!r}) as fh:
    for row in csv.DictReader(fh):
        idx.append(int(row["index"]))
        eps.append(float(row["eps"]))
fig, ax = plt.subplots()
ax.plot(idx, eps, marker="o", linestyle="")
ax.set_xlabel("index")
ax.set_ylabel("eps")
ax.set_title("spectrum")
fig.savefig("spectrum.png", dpi=150)
"""


def _script_clusters(path):
    return f"""{_PLOT_HEADER}
cid, eps = [], []
with open({path!r}) as fh:
    for row in csv.DictReader(fh):
        cid.append(int(row["cluster"]))
        eps.append(float(row["eps"]))
fig, ax = plt.subplots()
ax.scatter(eps, cid, c=cid, cmap="tab20", s=12)
ax.set_xlabel("eps")
ax.set_ylabel("cluster id")
ax.set_title("eigenvalue clusters")
fig.savefig("clusters.png", dpi=150)
"""


def _script_sweep(path):
    return f"""{_PLOT_HEADER}
mu, count, pr = [], [], []
with open({path!r}) as fh:
    for row in csv.DictReader(fh):
        mu.append(float(row["mu"]))
        count.append(int(row["count_below_zero"]))
        pr.append(float(row["mean_pr"]))
fig, ax = plt.subplots()
ax.plot(mu, count, marker="o", label="count below 0")
ax.set_xlabel("mu")
ax.set_ylabel("count")
twin = ax.twinx()
twin.plot(mu, pr, marker="s", color="tab:red", label="mean PR")
twin.set_ylabel("mean PR")
fig.savefig("sweep.png", dpi=150)
"""


def emit_plot_script(cfg, data_path):
    """Script text plotting an existing data file; the plot kind is read
    off the file's header row."""
    try:
        with open(data_path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise FileNotFoundError(f"cannot read data file {data_path}: {exc}") from None
    header = lines[0] if lines else ""
    headered = True
    if header == "eps,count":
        script = _script_staircase(data_path)
    elif header.startswith("x,psi2_"):
        script = _script_states(data_path, _build(cfg))
    elif header == "index,eps,pr":
        script = _script_spectrum(data_path)
    elif header == "cluster,eps":
        script = _script_clusters(data_path)
    elif header.startswith("mu,count_below_zero"):
        script = _script_sweep(data_path)
    else:
        script = _script_potential(data_path)
        headered = False
    if len(lines) < (2 if headered else 1):
        script = script.replace(
            _PLOT_HEADER,
            _PLOT_HEADER + "\n# warning: the data file is empty; the plot will be blank\n",
            1,
        )
    return script


_RUNNERS = {
    "potential": _run_potential,
    "spectrum": _run_spectrum,
    "states": _run_states,
    "staircase": _run_staircase,
    "clusters": _run_clusters,
    "sweep": _run_sweep,
}


def run(cfg):
    """Dispatch a validated config; returns the process exit code."""
    if cfg.subcommand == "plot-script":
        try:
            text = emit_plot_script(cfg, cfg.data)
        except FileNotFoundError as exc:
            print(f"cantor-spectra: {exc}", file=sys.stderr)
            return 1
        _write(cfg, text)
        return 0
    return _RUNNERS[cfg.subcommand](cfg)


def main(argv=None):
    try:
        cfg = parse_args(argv)
    except ConfigError as exc:
        print(f"cantor-spectra: {exc}", file=sys.stderr)
        return 2
    try:
        return run(cfg)
    except ConvergenceError as exc:
        print(f"cantor-spectra: solver did not converge: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ParseError, ValueError) as exc:
        print(f"cantor-spectra: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cantor-spectra: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
