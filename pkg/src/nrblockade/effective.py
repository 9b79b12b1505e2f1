"""Adiabatic elimination of a fast reservoir mode from a three-mode ring.

Eliminating ``c`` (decay ``gamma_c`` much faster than everything else) from
the ring a -> b -> c -> a leaves two modes with direction-dependent hoppings

    j_forward  = J - i J' exp(-i phi)     (a -> b)
    j_backward = J - i J' exp(+i phi)     (b -> a)

with ``J' = 2 G_ac G_bc / gamma_c`` and induced decays
``gamma'_o = 4 G_oc**2 / gamma_c``. In the reduced master equation the
Hermitian part of the hopping is coherent and everything else comes from one
collective jump ``L = sqrt(4/gamma_c) (G_bc b + G_ac exp(-i phi) a)``, whose
cross terms give the anti-Hermitian hopping and whose diagonal terms give the
induced decays.
"""

from __future__ import annotations

import cmath
import math
import sys
from dataclasses import dataclass
from functools import partial
from typing import Optional, Sequence

import numpy as np

from . import dynamics, fockspace as fs
from .errors import EliminationError, UsageError
from .model import (
    TIMESCALE_MARGIN,
    CouplingSpec,
    DriveSpec,
    NetworkModel,
    _reservoir_roles,
    build_hamiltonian,
    wrap_phase,
)
from .observables import observable_set
from .sweep import SweepResult, run_grid


def unit_phasor(phi: float) -> complex:
    """exp(i phi), exact when phi is a multiple of pi/2 to within rounding."""
    k = round(phi / (math.pi / 2))
    if abs(phi - k * (math.pi / 2)) <= 8 * sys.float_info.epsilon * max(1.0, abs(phi)):
        return (1 + 0j, 1j, -1 + 0j, -1j)[k % 4]
    return cmath.exp(1j * phi)


@dataclass(frozen=True)
class EffectiveModel:
    j_forward: complex
    j_backward: complex
    j_induced: float
    gamma_a_induced: float
    gamma_b_induced: float
    base: NetworkModel
    phi: float
    gamma_c: float
    g_ac: float
    g_bc: float
    reservoir: str

    @property
    def ports(self) -> tuple[str, str]:
        return self.base.labels

    @property
    def gamma_a_total(self) -> float:
        return self.base.modes[0].gamma + self.gamma_a_induced

    @property
    def gamma_b_total(self) -> float:
        return self.base.modes[1].gamma + self.gamma_b_induced

    @property
    def coherent_hopping(self) -> complex:
        """Coefficient of a b† in the Hermitian part of the hopping."""
        return 0.5 * (self.j_forward + self.j_backward.conjugate())

    def collective_jump(self, basis: fs.FockBasis):
        a, b = fs.annihilation(basis, 0), fs.annihilation(basis, 1)
        scale = math.sqrt(4.0 / self.gamma_c)
        return fs.clean(scale * (self.g_bc * b + self.g_ac * unit_phasor(-self.phi) * a))


def directional_hoppings(j: float, j_induced: float, phi: float) -> tuple[complex, complex]:
    return (
        j - 1j * j_induced * unit_phasor(-phi),
        j - 1j * j_induced * unit_phasor(phi),
    )


def _ring_links(network: NetworkModel, ports, reservoir):
    """Map each unordered pair of the ring to its coupling."""
    links = {}
    for c in network.couplings:
        key = frozenset((c.from_mode, c.to_mode))
        if len(key) != 2 or key in links:
            return None
        links[key] = c
    a, b = ports
    wanted = [frozenset(p) for p in ((a, b), (b, reservoir), (reservoir, a))]
    if set(links) != set(wanted):
        return None
    return [links[k] for k in wanted]


def adiabatic_eliminate(network: NetworkModel, reservoir: Optional[str] = None) -> EffectiveModel:
    """Reduce a three-mode ring to the two ports.

    The reservoir defaults to the fastest-decaying mode; the two remaining
    modes keep their declaration order as (a, b) and the flux is measured
    along a -> b -> c -> a.
    """
    if network.mode_count != 3 or len(network.couplings) != 3:
        raise UsageError("adiabatic elimination needs a three-mode ring with three couplings")
    if reservoir is None:
        reservoir = network.labels[_reservoir_roles(network)[1]]
    if reservoir not in network.labels:
        raise UsageError(f"reservoir {reservoir!r} is not a declared mode")
    ports = tuple(label for label in network.labels if label != reservoir)
    links = _ring_links(network, ports, reservoir)
    if links is None:
        raise UsageError("couplings do not form a single ring through all three modes")
    if len({m.omega for m in network.modes}) != 1:
        raise UsageError("adiabatic elimination assumes degenerate mode frequencies")

    a, b = ports
    orientation = ((a, b), (b, reservoir), (reservoir, a))
    phi = 0.0
    for link, (src, _) in zip(links, orientation):
        phi += link.phase if link.from_mode == src else -link.phase
    phi = wrap_phase(phi)
    j, g_bc, g_ac = (link.strength for link in links)

    gamma_c = network.mode(reservoir).gamma
    others = [network.mode(p).gamma for p in ports] + [j, g_bc, g_ac]
    margin = gamma_c / max(others)
    if margin < TIMESCALE_MARGIN:
        raise EliminationError(
            f"gamma_{reservoir} = {gamma_c:.3g} is only {margin:.3g}x the largest other "
            f"rate or coupling (need {TIMESCALE_MARGIN:g}x)"
        )
    if network.drive.target not in ports:
        raise UsageError(f"the drive sits on the eliminated mode {reservoir!r}")

    j_induced = 2.0 * g_ac * g_bc / gamma_c
    j_fwd, j_bwd = directional_hoppings(j, j_induced, phi)
    hop = 0.5 * (j_fwd + j_bwd.conjugate())
    caps = network.truncation.per_mode_caps
    keep = [network.index(p) for p in ports]
    base = NetworkModel(
        modes=tuple(network.mode(p) for p in ports),
        couplings=(CouplingSpec(a, b, abs(hop), cmath.phase(hop) if hop != 0 else 0.0),),
        drive=DriveSpec(network.drive.target, network.drive.epsilon, network.drive.detuning),
        truncation=fs.TruncationPolicy(
            tuple(caps[k] for k in keep), network.truncation.total_cap
        ),
    )
    return EffectiveModel(
        j_forward=j_fwd,
        j_backward=j_bwd,
        j_induced=j_induced,
        gamma_a_induced=4.0 * g_ac**2 / gamma_c,
        gamma_b_induced=4.0 * g_bc**2 / gamma_c,
        base=base,
        phi=phi,
        gamma_c=gamma_c,
        g_ac=g_ac,
        g_bc=g_bc,
        reservoir=reservoir,
    )


def effective_steady_state(eff: EffectiveModel, network: NetworkModel, basis: fs.FockBasis):
    """Steady state of the reduced master equation driven as in ``network``."""
    h = build_hamiltonian(network, basis)
    extra = [("collective", 1.0, eff.collective_jump(basis))]
    return dynamics.steady_state(dynamics.build_liouvillian(h, network, basis, extra))


def _effective_point(eff, basis, network, outputs):
    return observable_set(effective_steady_state(eff, network, basis), network, outputs)


def effective_observables(
    eff: EffectiveModel, basis: Optional[fs.FockBasis] = None, scan: Sequence[float] = (0.0,)
) -> SweepResult:
    """T and g2 in both directions of the reduced model over a detuning grid."""
    if basis is None:
        basis = eff.base.build_basis()
    if basis.mode_count != 2:
        raise UsageError(f"the effective model needs a two-mode basis, got {basis.mode_count}")
    solver = partial(_effective_point, eff, basis)
    return run_grid(eff.base, "detuning", np.asarray(scan, dtype=float), eff.ports, solver=solver)
