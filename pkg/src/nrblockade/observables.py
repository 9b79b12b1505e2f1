"""Directional transmission, equal-time g2 and nonreciprocity figures of merit."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from . import dynamics, fockspace as fs
from .errors import UndefinedCorrelationError, UsageError
from .model import NetworkModel, build_hamiltonian, loop_fluxes

ZERO_POPULATION = 1e-14


@dataclass(frozen=True, order=True)
class PortPair:
    input_mode: str
    output_mode: str

    def reversed(self) -> "PortPair":
        return PortPair(self.output_mode, self.input_mode)

    @property
    def tag(self) -> str:
        return f"{self.input_mode}_to_{self.output_mode}"


@dataclass(frozen=True)
class ObservableSet:
    input_mode: str
    detuning: float
    fluxes: tuple[float, ...]
    epsilon: float
    mean_photon: dict
    pair_moment: dict
    transmission: dict
    g2: dict
    residual: float

    def scan_point(self):
        return (self.detuning, self.fluxes, self.epsilon)


def solve(network: NetworkModel, basis: Optional[fs.FockBasis] = None) -> dynamics.SteadyState:
    """Steady state of ``network`` with its own drive."""
    if basis is None:
        basis = network.build_basis()
    h = build_hamiltonian(network, basis)
    return dynamics.steady_state(dynamics.build_liouvillian(h, network, basis))


def _moments(ss: dynamics.SteadyState, label: str) -> tuple[float, float]:
    if ss.basis is None or label not in ss.labels:
        raise UsageError(f"steady state carries no mode {label!r}")
    k = ss.labels.index(label)
    n = np.array([s[k] for s in ss.basis.states], dtype=float)
    diag = np.real(np.diag(ss.rho))
    return float(diag @ n), float(diag @ (n * (n - 1)))


def _check_pairing(ss: dynamics.SteadyState, pair: PortPair, network: NetworkModel):
    if pair.input_mode == pair.output_mode:
        raise UsageError(f"input and output are both {pair.input_mode!r}")
    if network.drive.target != pair.input_mode or (
        ss.drive_target is not None and ss.drive_target != pair.input_mode
    ):
        raise UsageError(
            f"transmission {pair.tag} needs a state driven at {pair.input_mode!r}, "
            f"but the drive is on {ss.drive_target or network.drive.target!r}"
        )
    if network.drive.epsilon <= 0:
        raise UsageError("transmission is undefined without a drive (epsilon = 0)")


def transmission(ss: dynamics.SteadyState, pair: PortPair, network: NetworkModel) -> float:
    """(gamma_in * gamma_out / eps**2) * <o_out† o_out>."""
    _check_pairing(ss, pair, network)
    n_out, _ = _moments(ss, pair.output_mode)
    g_in = network.mode(pair.input_mode).gamma
    g_out = network.mode(pair.output_mode).gamma
    return g_in * g_out * n_out / network.drive.epsilon**2


def g2_zero(ss: dynamics.SteadyState, pair: PortPair) -> float:
    if ss.drive_target is not None and ss.drive_target != pair.input_mode:
        raise UsageError(
            f"g2 for {pair.tag} needs a state driven at {pair.input_mode!r}, "
            f"not {ss.drive_target!r}"
        )
    n, nn = _moments(ss, pair.output_mode)
    if n < ZERO_POPULATION:
        raise UndefinedCorrelationError(
            f"output population {n:.2e} of {pair.output_mode!r} is too small for g2"
        )
    return nn / n**2


def observable_set(
    ss: dynamics.SteadyState, network: NetworkModel, outputs: Optional[Sequence[str]] = None
) -> ObservableSet:
    """All observables for the drive port of ``network``; g2 is NaN when undefined."""
    source = network.drive.target
    if outputs is None:
        outputs = [label for label in network.labels if label != source]
    mean, pair_m = {}, {}
    for label in network.labels:
        mean[label], pair_m[label] = _moments(ss, label)
    trans, g2 = {}, {}
    for out in outputs:
        pair = PortPair(source, out)
        trans[pair] = transmission(ss, pair, network)
        try:
            g2[pair] = g2_zero(ss, pair)
        except UndefinedCorrelationError:
            g2[pair] = math.nan
    return ObservableSet(
        input_mode=source,
        detuning=network.drive.detuning,
        fluxes=tuple(loop_fluxes(network)),
        epsilon=network.drive.epsilon,
        mean_photon=mean,
        pair_moment=pair_m,
        transmission=trans,
        g2=g2,
        residual=ss.residual,
    )


def solve_observables(network: NetworkModel, outputs=None) -> ObservableSet:
    return observable_set(solve(network), network, outputs)


def _ratio(num: float, den: float) -> float:
    if abs(den) < ZERO_POPULATION:
        return math.inf
    return num / den


def nonreciprocity_summary(
    forward: ObservableSet, backward: ObservableSet, pair: PortPair
) -> dict:
    if forward.input_mode != pair.input_mode or backward.input_mode != pair.output_mode:
        raise UsageError(
            f"forward must be driven at {pair.input_mode!r} and backward at "
            f"{pair.output_mode!r}"
        )
    if forward.scan_point() != backward.scan_point():
        raise UsageError("forward and backward solves are at different scan points")
    t_fwd = forward.transmission[pair]
    t_bwd = backward.transmission[pair.reversed()]
    g_fwd = forward.g2[pair]
    g_bwd = backward.g2[pair.reversed()]
    ratio = _ratio(t_fwd, t_bwd)
    if ratio == math.inf:
        isolation = math.inf
    elif ratio <= 0:
        isolation = -math.inf
    else:
        isolation = 10.0 * math.log10(ratio)
    return {
        "T_fwd": t_fwd,
        "T_bwd": t_bwd,
        "isolation_dB": isolation,
        "g2_fwd": g_fwd,
        "g2_bwd": g_bwd,
        "contrast": _ratio(g_bwd, g_fwd),
    }


def _spread(values: Sequence[float]) -> float:
    scale = max(abs(v) for v in values)
    if scale == 0:
        return 0.0
    return (max(values) - min(values)) / scale


def circulator_summary(
    solves: Mapping[str, ObservableSet], ring: Optional[Sequence[str]] = None
) -> dict:
    """Clockwise / counter-clockwise aggregates for a three-port ring.

    Counter-clockwise follows ``ring`` order (a->b->c->a by default);
    clockwise is the reverse. Deviations are relative spreads within each
    triple of equivalent directed pairs.
    """
    ring = tuple(ring) if ring is not None else tuple(sorted(solves))
    if len(ring) != 3:
        raise UsageError("a circulator needs exactly three ports")
    missing = [p for p in ring if p not in solves]
    if missing:
        raise UsageError(f"missing solves for input ports {missing}")
    ccw = [PortPair(ring[k], ring[(k + 1) % 3]) for k in range(3)]
    cw = [p.reversed() for p in ccw]
    out = {}
    for name, pairs in (("ccw", ccw), ("cw", cw)):
        t = [solves[p.input_mode].transmission[p] for p in pairs]
        g = [solves[p.input_mode].g2[p] for p in pairs]
        out[f"T_{name}"] = float(np.mean(t))
        out[f"g2_{name}"] = float(np.mean(g))
        out[f"T_{name}_deviation"] = _spread(t)
        out[f"g2_{name}_deviation"] = _spread(g)
    out["symmetry_deviation"] = max(
        out[k] for k in ("T_ccw_deviation", "T_cw_deviation", "g2_ccw_deviation", "g2_cw_deviation")
    )
    return out
