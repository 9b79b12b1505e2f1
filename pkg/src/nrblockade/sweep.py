"""Detuning / flux sweeps and deterministic CSV output."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, NRBlockadeError
from .model import PRESETS, NetworkModel, cycle_links, gauge_canonicalize
from .observables import PortPair, solve_observables

VARIABLES = ("detuning", "phase")


@dataclass(frozen=True)
class SweepSpec:
    """Scan grid; detuning in units of gamma, phase in radians.

    ``points == 1`` is a single solve at ``start``.
    """

    variable: str
    start: float
    stop: float
    points: int
    drive_ports: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "drive_ports", tuple(self.drive_ports))
        problems = self.problems()
        if problems:
            raise ConfigurationError(problems)

    def problems(self) -> list[str]:
        out = []
        if self.variable not in VARIABLES:
            out.append(f"sweep variable must be one of {VARIABLES}, got {self.variable!r}")
        if self.points < 1:
            out.append(f"sweep points must be >= 1, got {self.points}")
        elif self.points >= 2 and not self.start < self.stop:
            out.append(f"sweep start {self.start} must be below stop {self.stop}")
        if not self.drive_ports:
            out.append("sweep needs at least one drive port")
        if len(set(self.drive_ports)) != len(self.drive_ports):
            out.append("sweep drive_ports lists a port twice")
        return out

    def grid(self) -> np.ndarray:
        if self.points == 1:
            return np.array([float(self.start)])
        return np.linspace(self.start, self.stop, self.points)


def check_sweep_against(model: NetworkModel, sweep: SweepSpec) -> list[str]:
    problems = [
        f"drive port {p!r} is not a declared mode"
        for p in sweep.drive_ports
        if p not in model.labels
    ]
    if sweep.variable == "phase" and len(cycle_links(model)) != 1:
        problems.append(
            f"a phase sweep needs exactly one coupling loop; found {len(cycle_links(model))}"
        )
    return problems


def default_sweep(name: str) -> SweepSpec:
    if name not in PRESETS:
        raise ConfigurationError(f"unknown preset {name!r}")
    ports = ("a", "b", "c") if name == "fig7_circulator" else ("a", "b")
    if name in ("fig6_sym_molecule", "fig7_circulator"):
        return SweepSpec("phase", 0.0, 2 * math.pi, 201, ports)
    return SweepSpec("detuning", -10.0, 10.0, 401, ports)


@dataclass(frozen=True)
class PairRow:
    T: float
    g2: float
    n_out: float
    residual: float


NAN_ROW = PairRow(math.nan, math.nan, math.nan, math.nan)


@dataclass
class SweepResult:
    variable: str
    grid: tuple[float, ...]
    pairs: tuple[PortPair, ...]
    rows: list[dict] = field(default_factory=list)
    failures: dict = field(default_factory=dict)

    def series(self, quantity: str, pair: PortPair) -> np.ndarray:
        return np.array([getattr(row[pair], quantity) for row in self.rows])

    @property
    def ok(self) -> bool:
        return not self.failures


def sweep_pairs(model: NetworkModel, ports: Sequence[str]) -> tuple[PortPair, ...]:
    pairs = []
    for p in ports:
        outs = [q for q in ports if q != p] if len(ports) > 1 else [
            q for q in model.labels if q != p
        ]
        pairs.extend(PortPair(p, q) for q in outs)
    return tuple(pairs)


def point_model(model: NetworkModel, variable: str, value: float) -> NetworkModel:
    if variable == "detuning":
        return model.with_detuning(value)
    return model.with_flux(value)


def _solve_point(args):
    model, variable, value, ports, pairs, solver = args
    row = {}
    try:
        base = point_model(model, variable, value)
        for port in ports:
            outs = [p.output_mode for p in pairs if p.input_mode == port]
            obs = solver(base.with_drive_target(port), outs)
            for out in outs:
                pair = PortPair(port, out)
                row[pair] = PairRow(
                    T=obs.transmission[pair],
                    g2=obs.g2[pair],
                    n_out=obs.mean_photon[out],
                    residual=obs.residual,
                )
    except NRBlockadeError as exc:
        return {pair: NAN_ROW for pair in pairs}, f"{type(exc).__name__}: {exc}"
    return row, None


def run_grid(
    model: NetworkModel,
    variable: str,
    grid: Sequence[float],
    ports: Sequence[str],
    workers: int = 1,
    solver: Optional[Callable] = None,
) -> SweepResult:
    """Solve every grid point for every drive port; rows follow grid order."""
    solver = solver or solve_observables
    if variable == "phase":
        model = gauge_canonicalize(model)
    pairs = sweep_pairs(model, ports)
    jobs = [(model, variable, float(v), tuple(ports), pairs, solver) for v in grid]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_point, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_solve_point(job) for job in jobs]
    out = SweepResult(variable, tuple(float(v) for v in grid), pairs)
    for k, (row, failure) in enumerate(results):
        out.rows.append(row)
        if failure is not None:
            out.failures[k] = failure
    return out


def run_sweep(model: NetworkModel, sweep: SweepSpec, workers: int = 1) -> SweepResult:
    problems = check_sweep_against(model, sweep)
    if problems:
        raise ConfigurationError(problems)
    return run_grid(model, sweep.variable, sweep.grid(), sweep.drive_ports, workers)


def _fmt(x: float) -> str:
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def csv_header(result: SweepResult) -> list[str]:
    header = [result.variable]
    for pair in result.pairs:
        header += [f"{q}_{pair.tag}" for q in ("T", "g2", "n_out", "residual")]
    return header + ["status"]


def write_csv(result: SweepResult, destination) -> None:
    """Write ``result`` to a path or a text stream."""
    if isinstance(destination, (str, bytes)) or hasattr(destination, "__fspath__"):
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            write_csv(result, fh)
        return
    writer = csv.writer(destination, lineterminator="\n")
    writer.writerow(csv_header(result))
    for k, (value, row) in enumerate(zip(result.grid, result.rows)):
        cells = [_fmt(value)]
        for pair in result.pairs:
            r = row[pair]
            cells += [_fmt(r.T), _fmt(r.g2), _fmt(r.n_out), _fmt(r.residual)]
        cells.append("failed" if k in result.failures else "ok")
        writer.writerow(cells)


def to_csv_text(result: SweepResult) -> str:
    buf = io.StringIO()
    write_csv(result, buf)
    return buf.getvalue()
