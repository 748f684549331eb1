"""Command-line pipelines producing CSV tables with JSON sidecars.

Every CSV ``name.csv`` is accompanied by ``name.csv.json`` holding the full
run configuration, tool version and wall time. ``kickeff replay SIDECAR``
re-runs the recorded configuration.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from kickeff.classical import CanonicalState, compare_orbits, hcl_energy, phase_portrait, standard_ic_grid
from kickeff.effective import classical_limit_check, kicked_top_effective, reconstruct_floquet
from kickeff.errors import NumericalError
from kickeff.floquet import TopParams, build_floquet
from kickeff.spectral import (
    cbh_singularity_probe,
    classify_gap_minima,
    dos_fourier,
    dos_gaussian,
    exact_spectrum,
    find_dos_peaks,
    folded_effective_spectrum,
    gap_scan,
    match_spectra,
)

COMMANDS = (
    "spectrum-sweep",
    "dos",
    "reconstruct",
    "gap-scan",
    "singularity-probe",
    "phase-portrait",
    "classical-limit",
)

DEFAULT_ALPHA = {
    "dos": [0.2],
    "reconstruct": [1.0],
    "phase-portrait": [0.2, 1.0, 6.0],
    "classical-limit": [0.2],
}


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


@dataclasses.dataclass
class RunConfig:
    command: str
    j: float = 40.0
    alpha: list[float] | None = None
    beta: list[float] = dataclasses.field(default_factory=lambda: [0.1])
    alpha_start: float = 0.0
    alpha_stop: float = 10.0
    alpha_count: int = 201
    sigma_frac: float = 0.1
    n_terms: int | None = None
    estimator: str = "gaussian"
    dt: float = 1e-3
    n_kicks: int = 2000
    ic_grid: str = "10x2"
    grid_size: int | None = None
    prominence: float = 1.5
    crossing_tol: float = 1e-8
    avoided_tol: float = 1e-6
    m: float = 3
    l: int = 1
    window: float = 0.5
    n_points: int = 101
    theta: float = 1.0
    psi: float = 0.5
    j_list: list[float] = dataclasses.field(default_factory=lambda: [10, 20, 40, 80])
    out: str = "."
    jobs: int | None = None

    def validate(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        positive = {
            "sigma_frac": self.sigma_frac,
            "dt": self.dt,
            "n_kicks": self.n_kicks,
            "prominence": self.prominence,
            "crossing_tol": self.crossing_tol,
            "avoided_tol": self.avoided_tol,
            "window": self.window,
            "n_points": self.n_points,
            "l": self.l,
        }
        for name in ("n_terms", "grid_size", "jobs"):
            if getattr(self, name) is not None:
                positive[name] = getattr(self, name)
        for name, value in positive.items():
            if not value > 0:
                raise ValueError(f"--{name.replace('_', '-')} must be positive, got {value}")
        if self.alpha_count < 2:
            raise ValueError(f"--alpha-count must be at least 2, got {self.alpha_count}")
        if self.prominence <= 1:
            raise ValueError("--prominence must exceed 1")
        if self.estimator not in ("gaussian", "fourier"):
            raise ValueError("--estimator must be gaussian or fourier")
        parse_ic_grid(self.ic_grid)
        TopParams(0.0, 0.0, self.j)
        return self

    def alphas(self) -> list[float]:
        if self.alpha is not None:
            return list(self.alpha)
        return DEFAULT_ALPHA.get(self.command, [0.2])

    def alpha_sweep(self) -> np.ndarray:
        return np.linspace(self.alpha_start, self.alpha_stop, self.alpha_count)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names}).validate()


def parse_ic_grid(text: str) -> tuple[int, int]:
    try:
        nz, npsi = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise ValueError(f"--ic-grid must look like NZxNPSI, got {text!r}") from None
    if nz < 1 or npsi < 1:
        raise ValueError("--ic-grid counts must be positive")
    return nz, npsi


@contextmanager
def _mapper(jobs):
    n = jobs if jobs is not None else (os.cpu_count() or 1)
    if n <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=n) as pool:
        # executor.map yields in submission order regardless of completion order
        yield lambda fn, items: pool.map(fn, items, chunksize=4)


class Writer:
    def __init__(self, cfg: RunConfig, started: float):
        self.cfg = cfg
        self.started = started
        self.out = Path(cfg.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.written: list[Path] = []

    def table(self, name: str, header, rows):
        path = self.out / name
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(v) for v in row])
        sidecar = {
            "tool": "kickeff",
            "version": _version(),
            "file": name,
            "config": self.cfg.to_dict(),
            "wall_time_s": time.perf_counter() - self.started,
        }
        with open(path.with_name(name + ".json"), "w") as fh:
            json.dump(sidecar, fh, indent=2, sort_keys=True)
            fh.write("\n")
        self.written.append(path)


def _version() -> str:
    from kickeff import __version__

    return __version__


def _sweep_row(p: TopParams):
    return [p.alpha, *exact_spectrum(p).angles, *folded_effective_spectrum(p).angles]


def run_spectrum_sweep(cfg, w, mapper):
    beta = cfg.beta[0]
    params = [TopParams(a, beta, cfg.j) for a in cfg.alpha_sweep()]
    dim = params[0].dim
    header = ["alpha"] + [f"exact_{k}" for k in range(dim)] + [f"effective_{k}" for k in range(dim)]
    w.table("spectrum_sweep.csv", header, list(mapper(_sweep_row, params)))


def run_dos(cfg, w, mapper):
    p = TopParams(cfg.alphas()[0], cfg.beta[0], cfg.j)
    curves = {}
    for label, spec in (("exact", exact_spectrum(p)), ("effective", folded_effective_spectrum(p))):
        g = dos_gaussian(spec, cfg.sigma_frac, cfg.grid_size)
        if cfg.estimator == "fourier":
            n_terms = cfg.n_terms if cfg.n_terms is not None else 10 * p.dim
            g = dos_fourier(spec, n_terms, g.sigma, len(g.grid))
        curves[label] = g
    grid = curves["exact"].grid
    w.table(
        "dos.csv",
        ["angle", "rho_exact", "rho_effective"],
        zip(grid, curves["exact"].values, curves["effective"].values),
    )
    rows = []
    for label, c in curves.items():
        for rank, (loc, height) in enumerate(find_dos_peaks(c, cfg.prominence)):
            rows.append([label, rank, loc, height])
    w.table("dos_peaks.csv", ["source", "rank", "angle", "height"], rows)


def _reconstruct_row(p: TopParams):
    model = kicked_top_effective(p)
    d = np.linalg.norm(build_floquet(p) - reconstruct_floquet(model), 2)
    _, mx, mn = match_spectra(exact_spectrum(p), folded_effective_spectrum(p))
    return [p.alpha, p.beta, p.j, d, mx, mn]


def run_reconstruct(cfg, w, mapper):
    params = [TopParams(a, b, cfg.j) for a in cfg.alphas() for b in cfg.beta]
    w.table(
        "reconstruct.csv",
        ["alpha", "beta", "j", "operator_norm_distance", "max_spectral_distance", "mean_spectral_distance"],
        list(mapper(_reconstruct_row, params)),
    )


def run_gap_scan(cfg, w, mapper):
    p = TopParams(0.0, cfg.beta[0], cfg.j)
    alphas = cfg.alpha_sweep() if cfg.alpha is None else np.asarray(cfg.alpha)
    table = gap_scan(p, alphas, mapper)
    w.table("gap_scan.csv", ["alpha", "gap_exact", "gap_effective"], table)
    events = classify_gap_minima(p, table, cfg.crossing_tol, cfg.avoided_tol)
    keys = ["alpha", "gap_effective", "gap_exact", "effective_kind", "exact_kind"]
    w.table("gap_events.csv", keys, [[e[k] for k in keys] for e in events])


def run_singularity_probe(cfg, w, mapper):
    res = cbh_singularity_probe(cfg.j, cfg.m, cfg.l, cfg.window, cfg.n_points, cfg.beta[0])
    dim = res["eigenvalues"].shape[1]
    header = ["window", "alpha"] + [f"eps_{k}" for k in range(dim)] + [f"deps_{k}" for k in range(dim)]
    rows = []
    for label, prefix in (("probe", ""), ("reference", "reference_")):
        for a, e, d in zip(res[prefix + "alpha"], res[prefix + "eigenvalues"], res[prefix + "derivatives"]):
            rows.append([label, a, *e, *d])
    w.table("singularity_probe.csv", header, rows)
    w.table(
        "singularity_summary.csv",
        ["alpha_star", "max_abs_derivative", "reference_max_abs_derivative"],
        [[res["alpha_star"], res["max_abs_derivative"], res["reference_max_abs_derivative"]]],
    )


def run_phase_portrait(cfg, w, mapper):
    beta = cfg.beta[0]
    ics = standard_ic_grid(*parse_ic_grid(cfg.ic_grid))
    summary = []
    for alpha in cfg.alphas():
        maps, flows = phase_portrait(alpha, beta, ics, cfg.n_kicks, cfg.dt, mapper)
        tag = f"alpha{alpha:g}"
        for kind, orbits in (("map", maps), ("flow", flows)):
            rows = (
                [i, k + 1, orbits[i, k, 0], orbits[i, k, 1]]
                for i in range(len(ics))
                for k in range(cfg.n_kicks)
            )
            w.table(f"phase_portrait_{tag}_{kind}.csv", ["ic", "kick", "psi", "z"], rows)
        for i, s in enumerate(ics):
            h, vm, vf = compare_orbits(maps[i], flows[i], alpha, beta)
            summary.append([alpha, i, s.z, s.psi, h, vm, vf])
    w.table(
        "phase_portrait_summary.csv",
        ["alpha", "ic", "z0", "psi0", "hausdorff", "hcl_var_map", "hcl_var_flow"],
        summary,
    )


def run_classical_limit(cfg, w, mapper):
    p = TopParams(cfg.alphas()[0], cfg.beta[0], cfg.j)
    values = classical_limit_check(p, cfg.theta, cfg.psi, cfg.j_list)
    h = float(hcl_energy(CanonicalState(float(np.cos(cfg.theta)), cfg.psi), p.alpha, p.beta))
    w.table(
        "classical_limit.csv",
        ["j", "expectation_per_j", "hcl", "deviation"],
        [[j, v, h, abs(v - h)] for j, v in zip(cfg.j_list, values)],
    )


PIPELINES = {
    "spectrum-sweep": run_spectrum_sweep,
    "dos": run_dos,
    "reconstruct": run_reconstruct,
    "gap-scan": run_gap_scan,
    "singularity-probe": run_singularity_probe,
    "phase-portrait": run_phase_portrait,
    "classical-limit": run_classical_limit,
}


def run(cfg: RunConfig) -> list[Path]:
    """Execute one pipeline and return the CSV paths written."""
    cfg.validate()
    w = Writer(cfg, time.perf_counter())
    with _mapper(cfg.jobs) as mapper:
        PIPELINES[cfg.command](cfg, w, mapper)
    return w.written


def _add_common(sp: argparse.ArgumentParser):
    g = sp.add_argument_group("model")
    g.add_argument("--j", type=float, default=40.0, help="spin quantum number (default 40)")
    g.add_argument("--alpha", type=float, nargs="+", help="torsion strength(s)")
    g.add_argument("--beta", type=float, nargs="+", default=[0.1], help="kick angle(s) (default 0.1)")
    g.add_argument("--alpha-start", type=float, default=0.0)
    g.add_argument("--alpha-stop", type=float, default=10.0)
    g.add_argument("--alpha-count", type=int, default=201)
    n = sp.add_argument_group("numerics")
    n.add_argument("--sigma-frac", type=float, default=0.1, help="DOS width as a fraction of mean spacing")
    n.add_argument("--n-terms", type=int, help="Fourier DOS terms (default 10*(2j+1))")
    n.add_argument("--estimator", choices=("gaussian", "fourier"), default="gaussian")
    n.add_argument("--dt", type=float, default=1e-3, help="RK4 step (default 1e-3)")
    n.add_argument("--n-kicks", type=int, default=2000)
    n.add_argument("--ic-grid", default="10x2", help="initial conditions as NZxNPSI (default 10x2)")
    n.add_argument("--grid-size", type=int, help="DOS grid points (default: 4 per sigma, at least 1024)")
    n.add_argument("--prominence", type=float, default=1.5, help="peak threshold in units of 1/(2 pi)")
    n.add_argument("--crossing-tol", type=float, default=1e-8)
    n.add_argument("--avoided-tol", type=float, default=1e-6)
    n.add_argument("--m", type=float, default=3, help="Jz eigenvalue in the CBH divergence condition")
    n.add_argument("--l", type=int, default=1, help="integer in the CBH divergence condition")
    n.add_argument("--window", type=float, default=0.5)
    n.add_argument("--n-points", type=int, default=101)
    n.add_argument("--theta", type=float, default=1.0)
    n.add_argument("--psi", type=float, default=0.5)
    n.add_argument("--j-list", type=float, nargs="+", default=[10, 20, 40, 80])
    o = sp.add_argument_group("output")
    o.add_argument("--out", default=".", help="output directory")
    o.add_argument("--jobs", type=int, help="worker processes (default: all cores)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kickeff", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        _add_common(sub.add_parser(name))
    rp = sub.add_parser("replay", help="re-run the configuration stored in a JSON sidecar")
    rp.add_argument("sidecar")
    rp.add_argument("--out", help="override the output directory")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.command == "replay":
        with open(args.sidecar) as fh:
            d = json.load(fh)["config"]
        if args.out is not None:
            d["out"] = args.out
        return RunConfig.from_dict(d)
    d = {k: v for k, v in vars(args).items()}
    return RunConfig.from_dict(d)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        parser.print_usage(sys.stderr)
        print(f"kickeff: error: {exc}", file=sys.stderr)
        return 2
    try:
        paths = run(cfg)
    except ValueError as exc:
        print(f"kickeff: error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"kickeff: numeric failure in {cfg.command} (j={cfg.j}, alpha={cfg.alpha}, beta={cfg.beta}): {exc}",
              file=sys.stderr)
        return 1
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
