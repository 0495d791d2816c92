"""Command-line front end: entropy sweeps, oracle validation, figure presets.

Exit codes: 0 success/pass, 1 usage or input error, 2 validation fail,
3 validation inconclusive.
"""
from __future__ import annotations

import argparse
import itertools
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import (FrequencyConvention, ModelParams, disentanglement_period, entropy_series)
from .errors import InvalidInputError, NoFinitePeriodError
from .hilbert import LevelSpec
from .lindblad import IntegratorConfig, ValidationReport, validate
from .plotting import emit_plot

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("degenjc")

EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_INCONCLUSIVE = 0, 1, 2, 3
PRESETS = ("fig1", "fig2", "fig3")
CSV_HEADER = "t_omega,s_total,s_atom,s_field"


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid in units of Omega t."""

    start: float = 0.0
    end: float = 30.0
    points: int = 3001
    include_disentanglement: bool = False

    def __post_init__(self):
        if self.points < 2:
            raise InvalidInputError(f"grid needs at least 2 points, got {self.points}")
        if not self.end > self.start or self.start < 0:
            raise InvalidInputError(f"invalid grid [{self.start}, {self.end}]")

    def values(self, period_omega_t: float | None = None) -> np.ndarray:
        grid = np.linspace(self.start, self.end, self.points)
        if self.include_disentanglement and period_omega_t:
            k = np.arange(1, int(self.end // period_omega_t) + 1)
            extra = k * period_omega_t
            grid = np.union1d(grid, extra[(extra >= self.start) & (extra <= self.end)])
        return grid


@dataclass
class RunConfig:
    mode: str
    params: ModelParams
    grid: GridSpec = field(default_factory=GridSpec)
    kappas: list[float] = field(default_factory=list)
    alpha_sqs: list[float] = field(default_factory=list)
    output_dir: Path = Path("out")
    formats: tuple[str, ...] = ("csv",)
    name: str = "sweep"
    style: str = "all"
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    jobs: int = 1
    note: str = ""

    def __post_init__(self):
        if self.mode not in ("sweep", "validate", "figures"):
            raise InvalidInputError(f"unknown mode {self.mode!r}")
        if any(k < 0 for k in self.kappas):
            raise InvalidInputError("kappa values must be non-negative")
        if any(a < 0 for a in self.alpha_sqs):
            raise InvalidInputError("|alpha|^2 values must be non-negative")

    def combinations(self) -> list[ModelParams]:
        kappas = self.kappas or [self.params.kappa]
        alpha_sqs = self.alpha_sqs or [self.params.alpha_sq]
        phase = np.angle(self.params.alpha) if self.params.alpha else 0.0
        return [replace(self.params, kappa=k, alpha=complex(math.sqrt(a) * np.exp(1j * phase)))
                for k, a in itertools.product(kappas, alpha_sqs)]


def config_from_mapping(data: dict, mode: str | None = None) -> RunConfig:
    mode = mode or data.get("mode", "sweep")
    p = data.get("params", {})
    default_conv = "sz-derived" if mode == "validate" else "paper-text"
    alpha_sq = float(p.get("alpha_sq", 1.0))
    alpha = math.sqrt(alpha_sq) * np.exp(1j * float(p.get("alpha_phase", 0.0)))
    params = ModelParams(
        levels=LevelSpec(int(p.get("two_jb", 3)), int(p.get("two_jc", 3))),
        omega=float(p.get("omega", 1.0)),
        kappa=float(p.get("kappa", 0.01)),
        alpha=complex(alpha),
        convention=FrequencyConvention(p.get("convention", default_conv)),
        cutoff=int(p.get("cutoff", 30)),
    )
    g = data.get("grid", {})
    default_end = 100.0 if mode == "validate" else 30.0
    grid = GridSpec(float(g.get("start", 0.0)), float(g.get("end", default_end)),
                    int(g.get("points", 3001)), bool(g.get("include_disentanglement", False)))
    s = data.get("sweep", {})
    o = data.get("output", {})
    i = data.get("integrator", {})
    integrator = IntegratorConfig(dt=float(i.get("dt", 1e-3)), t_end=grid.end / params.omega,
                                  record_every=int(i.get("record_every", 100)),
                                  tolerance=float(i.get("tolerance", 1e-8)))
    return RunConfig(
        mode=mode,
        params=params,
        grid=grid,
        kappas=[float(k) for k in s.get("kappa", [])],
        alpha_sqs=[float(a) for a in s.get("alpha_sq", [])],
        output_dir=Path(o.get("dir", "out")),
        formats=tuple(o.get("formats", ["csv"])),
        name=str(data.get("name", mode)),
        style=str(data.get("style", "all")),
        integrator=integrator,
        note=str(data.get("note", "")),
    )


def load_config(path=None, preset: str | None = None, mode: str | None = None) -> RunConfig:
    if preset is not None:
        ref = resources.files("degenjc.presets").joinpath(f"{preset}.toml")
        if not ref.is_file():
            raise InvalidInputError(f"unknown preset {preset!r}")
        text = ref.read_text()
        return config_from_mapping(tomllib.loads(text), mode)
    if path is None:
        return config_from_mapping({}, mode)
    with open(path, "rb") as fh:
        return config_from_mapping(tomllib.load(fh), mode)


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _csv_name(name: str, params: ModelParams) -> str:
    return f"{name}_kappa{params.kappa:g}_alphasq{params.alpha_sq:.6g}.csv"


def _period_omega_t(params: ModelParams) -> float | None:
    try:
        return disentanglement_period(params.table) * params.omega
    except NoFinitePeriodError:
        return None


def write_sweep_csv(path: Path, params: ModelParams, t_omega: np.ndarray, note: str = "") -> None:
    series = entropy_series(params, t_omega / params.omega)
    d_atom = params.levels.dim
    for name, values, upper in (("s_total", series.s_total, 1.0),
                                ("s_atom", series.s_atom, 1 - 1 / d_atom + 1e-12),
                                ("s_field", series.s_field, 1.0)):
        if values.min() < -1e-12 or values.max() >= upper:
            raise InvalidInputError(f"{name} out of bounds; refusing to write {path}")
    lines = ["# degenjc entropy sweep"]
    for key, value in params.describe().items():
        if key == "alpha":
            value = f"{value.real:.17g}{value.imag:+.17g}j"
        lines.append(f"# {key} = {value}")
    period = _period_omega_t(params)
    lines.append(f"# disentanglement_period_omega_t = {_fmt(period) if period else 'none'}")
    lines.append("# source = analytic")
    if note:
        lines.append(f"# note = {note}")
    lines.append(f"# code_version = {__version__}")
    lines.append(CSV_HEADER)
    for row in zip(t_omega, series.s_total, series.s_atom, series.s_field):
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def run_sweep(config: RunConfig) -> list[Path]:
    """Write one CSV (and optionally SVG) per (kappa, |alpha|^2) combination."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    combos = config.combinations()

    def one(params: ModelParams) -> list[Path]:
        t_omega = config.grid.values(_period_omega_t(params))
        csv_path = out / _csv_name(config.name, params)
        write_sweep_csv(csv_path, params, t_omega, config.note)
        written = [csv_path] if "csv" in config.formats else []
        if "svg" in config.formats:
            written.append(emit_plot(csv_path, config.style))
        if "csv" not in config.formats:
            csv_path.unlink()
        return written

    with ThreadPoolExecutor(max_workers=max(1, config.jobs)) as pool:
        results = list(pool.map(one, combos))
    return [p for paths in results for p in paths]


def run_validate(config: RunConfig) -> tuple[ValidationReport, int]:
    report = validate(config.params, config.integrator)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "validation_report.txt").write_text(report.to_text())
    (out / "validation_summary.json").write_text(
        json.dumps(report.summary(), indent=2, sort_keys=True) + "\n")
    code = {"pass": EXIT_OK, "fail": EXIT_FAIL}.get(report.status, EXIT_INCONCLUSIVE)
    return report, code


def run_figures(base_dir: Path, formats: tuple[str, ...], jobs: int = 1) -> list[Path]:
    written = []
    for preset in PRESETS:
        config = load_config(preset=preset)
        config.output_dir = Path(base_dir) / preset
        config.formats = formats
        config.jobs = jobs
        written.extend(run_sweep(config))
    return written


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", type=Path, help="TOML run configuration")
    src.add_argument("--preset", help="shipped configuration, e.g. fig1 or validate_mismatch")
    p.add_argument("--kappa", type=float, nargs="+", help="damping rate(s), units of Omega")
    p.add_argument("--alpha-sq", type=float, nargs="+", help="initial |alpha|^2 value(s)")
    p.add_argument("--omega", type=float, help="effective coupling Omega = g^2/delta")
    p.add_argument("--cutoff", type=int, help="Fock-space cutoff")
    p.add_argument("--two-jb", type=int, help="2 J_b")
    p.add_argument("--two-jc", type=int, help="2 J_c")
    p.add_argument("--convention", choices=[c.value for c in FrequencyConvention])
    p.add_argument("--t-end", type=float, help="final Omega t")
    p.add_argument("--points", type=int, help="grid points")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--format", choices=["csv", "svg", "both"])
    p.add_argument("--jobs", type=int, default=1, help="parallel sweep workers")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="degenjc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sweep = sub.add_parser("sweep", help="write entropy CSVs from the closed form")
    _add_common(sweep)
    sweep.add_argument("--style", choices=["field", "system", "all"])

    val = sub.add_parser("validate", help="compare closed form with the master-equation oracle")
    _add_common(val)
    val.add_argument("--dt", type=float, help="RK4 step, units of 1/Omega")
    val.add_argument("--record-every", type=int, help="steps between recorded states")

    fig = sub.add_parser("figures", help="run the three figure presets")
    fig.add_argument("--out", type=Path, default=Path("figures"))
    fig.add_argument("--format", choices=["csv", "svg", "both"], default="both")
    fig.add_argument("--jobs", type=int, default=1)
    return parser


def _formats(flag: str | None) -> tuple[str, ...] | None:
    return {"csv": ("csv",), "svg": ("svg",), "both": ("csv", "svg"), None: None}[flag]


def apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    p = config.params
    levels = LevelSpec(args.two_jb if args.two_jb is not None else p.levels.two_jb,
                       args.two_jc if args.two_jc is not None else p.levels.two_jc)
    kappa = args.kappa[0] if args.kappa else p.kappa
    alpha = complex(math.sqrt(args.alpha_sq[0])) if args.alpha_sq else p.alpha
    params = replace(p, levels=levels, kappa=kappa, alpha=alpha,
                     omega=args.omega if args.omega is not None else p.omega,
                     cutoff=args.cutoff if args.cutoff is not None else p.cutoff,
                     convention=FrequencyConvention(args.convention) if args.convention
                     else p.convention)
    grid = replace(config.grid,
                   end=args.t_end if args.t_end is not None else config.grid.end,
                   points=args.points if args.points is not None else config.grid.points)
    integ = config.integrator
    integ = replace(integ, t_end=grid.end / params.omega,
                    dt=getattr(args, "dt", None) or integ.dt,
                    record_every=getattr(args, "record_every", None) or integ.record_every)
    return replace(
        config, params=params, grid=grid, integrator=integ,
        kappas=list(args.kappa) if args.kappa else config.kappas,
        alpha_sqs=list(args.alpha_sq) if args.alpha_sq else config.alpha_sqs,
        output_dir=args.out or config.output_dir,
        formats=_formats(args.format) or config.formats,
        style=getattr(args, "style", None) or config.style,
        jobs=args.jobs,
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "figures":
            for path in run_figures(args.out, _formats(args.format), args.jobs):
                print(path)
            return EXIT_OK
        config = apply_overrides(load_config(args.config, args.preset, mode=args.command), args)
        if args.command == "sweep":
            for path in run_sweep(config):
                print(path)
            return EXIT_OK
        report, code = run_validate(config)
        sys.stdout.write(report.to_text())
        return code
    except (InvalidInputError, OSError, tomllib.TOMLDecodeError, ValueError) as exc:
        print(f"degenjc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
