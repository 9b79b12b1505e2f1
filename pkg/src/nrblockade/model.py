"""Network description, rotating-frame Hamiltonian, gauge handling and presets.

All rates, couplings and detunings are in units of the port decay rate
``gamma`` (taken as 1) unless absolute frequencies are supplied.

A coupling ``CouplingSpec(src, dst, g, phi)`` contributes
``g * exp(i*phi) * o_src * o_dst^dagger + h.c.`` to the Hamiltonian, i.e. it
moves a photon from ``src`` into ``dst`` with amplitude ``g*exp(i*phi)``.
"""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.constants
import scipy.sparse as sp

from . import fockspace as fs
from .errors import ConfigurationError, UsageError

TWO_PI = 2.0 * math.pi
TIMESCALE_MARGIN = 5.0


def wrap_phase(phi: float) -> float:
    wrapped = math.fmod(phi, TWO_PI)
    if wrapped < 0:
        wrapped += TWO_PI
    if wrapped >= TWO_PI:
        wrapped = 0.0
    return wrapped


@dataclass(frozen=True)
class ModeSpec:
    label: str
    omega: float = 0.0
    kerr_u: float = 0.0
    gamma: float = 1.0

    def problems(self) -> list[str]:
        out = []
        if not self.label or not str(self.label).isidentifier():
            out.append(f"mode label {self.label!r} is not an identifier")
        if not self.gamma > 0:
            out.append(f"mode {self.label!r}: gamma must be > 0, got {self.gamma}")
        if not self.kerr_u >= 0:
            out.append(f"mode {self.label!r}: kerr must be >= 0, got {self.kerr_u}")
        return out


@dataclass(frozen=True)
class CouplingSpec:
    from_mode: str
    to_mode: str
    strength: float
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "phase", wrap_phase(float(self.phase)))

    def problems(self) -> list[str]:
        out = []
        if self.from_mode == self.to_mode:
            out.append(f"coupling {self.from_mode!r} -> {self.to_mode!r} links a mode to itself")
        if not self.strength >= 0:
            out.append(
                f"coupling {self.from_mode!r} -> {self.to_mode!r}: strength must be >= 0"
            )
        return out


@dataclass(frozen=True)
class DriveSpec:
    """Coherent probe on ``target``; ``detuning`` is omega_target - omega_probe.

    ``epsilon == 0`` is accepted to describe an undriven network; observables
    that normalise by the input flux refuse such a model.
    """

    target: str
    epsilon: float
    detuning: float = 0.0

    def problems(self) -> list[str]:
        if not self.epsilon >= 0:
            return [f"drive epsilon must be >= 0, got {self.epsilon}"]
        return []


@dataclass(frozen=True)
class NetworkModel:
    modes: tuple[ModeSpec, ...]
    couplings: tuple[CouplingSpec, ...]
    drive: DriveSpec
    truncation: fs.TruncationPolicy
    _index: dict = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "couplings", tuple(self.couplings))
        object.__setattr__(self, "_index", {m.label: k for k, m in enumerate(self.modes)})
        problems = network_problems(self)
        if problems:
            raise ConfigurationError(problems)
        omegas = [abs(m.omega) for m in self.modes]
        if all(w > 0 for w in omegas):
            # RWA sanity only applies when absolute frequencies are given.
            g_max = max((c.strength for c in self.couplings), default=0.0)
            if g_max > 0.1 * min(omegas):
                warnings.warn(
                    f"coupling {g_max} is not small against mode frequency {min(omegas)}; "
                    "the rotating-wave approximation may not hold",
                    stacklevel=3,
                )

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(m.label for m in self.modes)

    @property
    def mode_count(self) -> int:
        return len(self.modes)

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise ConfigurationError(f"undeclared mode {label!r}") from None

    def mode(self, label: str) -> ModeSpec:
        return self.modes[self.index(label)]

    def with_detuning(self, detuning: float) -> "NetworkModel":
        return replace(self, drive=replace(self.drive, detuning=float(detuning)))

    def with_drive_target(self, target: str) -> "NetworkModel":
        self.index(target)
        return replace(self, drive=replace(self.drive, target=target))

    def with_epsilon(self, epsilon: float) -> "NetworkModel":
        return replace(self, drive=replace(self.drive, epsilon=float(epsilon)))

    def with_truncation(self, truncation: fs.TruncationPolicy) -> "NetworkModel":
        return replace(self, truncation=truncation)

    def with_couplings(self, couplings) -> "NetworkModel":
        return replace(self, couplings=tuple(couplings))

    def with_modes(self, modes) -> "NetworkModel":
        return replace(self, modes=tuple(modes))

    def with_flux(self, phi: float) -> "NetworkModel":
        """Canonical gauge with the single loop threaded by flux ``phi``."""
        canon = gauge_canonicalize(self)
        loops = cycle_links(canon)
        if len(loops) != 1:
            raise UsageError(
                f"flux is defined for networks with exactly one loop; found {len(loops)}"
            )
        k = loops[0]
        couplings = list(canon.couplings)
        couplings[k] = replace(couplings[k], phase=phi)
        return canon.with_couplings(couplings)

    def build_basis(self) -> fs.FockBasis:
        return fs.build_basis(self.mode_count, self.truncation)


def network_problems(network: NetworkModel) -> list[str]:
    problems = []
    labels = [m.label for m in network.modes]
    if not labels:
        problems.append("network declares no modes")
    seen = set()
    for m in network.modes:
        problems.extend(m.problems())
        if m.label in seen:
            problems.append(f"mode {m.label!r} declared twice")
        seen.add(m.label)
    pairs = set()
    for c in network.couplings:
        problems.extend(c.problems())
        for end in (c.from_mode, c.to_mode):
            if end not in seen:
                problems.append(f"coupling references undeclared mode {end!r}")
        pair = frozenset((c.from_mode, c.to_mode))
        if pair in pairs:
            problems.append(
                f"more than one coupling between {c.from_mode!r} and {c.to_mode!r}"
            )
        pairs.add(pair)
    problems.extend(network.drive.problems())
    if network.drive.target not in seen:
        problems.append(f"drive targets undeclared mode {network.drive.target!r}")
    if len(network.truncation.per_mode_caps) != len(labels):
        problems.append(
            f"truncation lists {len(network.truncation.per_mode_caps)} per-mode caps "
            f"for {len(labels)} modes"
        )
    return problems


def _check_basis(network: NetworkModel, basis: fs.FockBasis):
    if basis.mode_count != network.mode_count:
        raise ValueError(
            f"basis has {basis.mode_count} modes but the network has {network.mode_count}"
        )


def mode_detunings(network: NetworkModel) -> np.ndarray:
    """Diagonal detunings omega_o - omega_probe in the probe's rotating frame."""
    target = network.mode(network.drive.target)
    omega_probe = target.omega - network.drive.detuning
    return np.array([m.omega - omega_probe for m in network.modes])


def build_hamiltonian(
    network: NetworkModel, basis: fs.FockBasis, include_drive: bool = True
) -> sp.csr_matrix:
    """Rotating-frame Hamiltonian; Hermitian by construction."""
    _check_basis(network, basis)
    ann = [fs.annihilation(basis, k) for k in range(network.mode_count)]
    terms = []
    for k, (mode, delta) in enumerate(zip(network.modes, mode_detunings(network))):
        if delta != 0:
            terms.append((delta, [fs.number(basis, k)]))
        if mode.kerr_u != 0:
            terms.append((mode.kerr_u, [fs.kerr_term(basis, k)]))
    for c in network.couplings:
        if c.strength == 0:
            continue
        i, j = network.index(c.from_mode), network.index(c.to_mode)
        hop = c.strength * np.exp(1j * c.phase)
        terms.append((hop, [fs.dag(ann[j]), ann[i]]))
        terms.append((np.conj(hop), [fs.dag(ann[i]), ann[j]]))
    if include_drive and network.drive.epsilon != 0:
        d = network.index(network.drive.target)
        terms.append((network.drive.epsilon, [ann[d]]))
        terms.append((network.drive.epsilon, [fs.dag(ann[d])]))
    return fs.compose(terms, dimension=basis.dimension)


def _spanning_forest(network: NetworkModel):
    """Tree couplings chosen in declaration order; later links close loops."""
    parent = list(range(network.mode_count))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree, loops = [], []
    for k, c in enumerate(network.couplings):
        ri, rj = find(network.index(c.from_mode)), find(network.index(c.to_mode))
        if ri == rj:
            loops.append(k)
        else:
            parent[ri] = rj
            tree.append(k)
    return tree, loops


def cycle_links(network: NetworkModel) -> list[int]:
    """Indices of the couplings that carry loop flux in the canonical gauge."""
    return _spanning_forest(network)[1]


def gauge_potentials(network: NetworkModel) -> np.ndarray:
    """Mode phases theta making every tree link real.

    Under o_k -> exp(i theta_k) o_k a link phase becomes
    phi + theta_src - theta_dst.
    """
    tree, _ = _spanning_forest(network)
    adj = {k: [] for k in range(network.mode_count)}
    for k in tree:
        c = network.couplings[k]
        i, j = network.index(c.from_mode), network.index(c.to_mode)
        adj[i].append((j, c.phase))
        adj[j].append((i, -c.phase))
    theta = np.zeros(network.mode_count)
    done = [False] * network.mode_count
    for root in range(network.mode_count):
        if done[root]:
            continue
        done[root] = True
        queue = deque([root])
        while queue:
            i = queue.popleft()
            for j, phi in adj[i]:
                if not done[j]:
                    theta[j] = theta[i] + phi
                    done[j] = True
                    queue.append(j)
    return theta


def gauge_canonicalize(network: NetworkModel) -> NetworkModel:
    theta = gauge_potentials(network)
    couplings = []
    for c in network.couplings:
        i, j = network.index(c.from_mode), network.index(c.to_mode)
        couplings.append(replace(c, phase=c.phase + theta[i] - theta[j]))
    tree, _ = _spanning_forest(network)
    for k in tree:
        couplings[k] = replace(couplings[k], phase=0.0)
    return network.with_couplings(couplings)


def loop_fluxes(network: NetworkModel) -> list[float]:
    canon = gauge_canonicalize(network)
    return [canon.couplings[k].phase for k in cycle_links(canon)]


def kerr_from_material(omega: float, n2: float, n: float, v_eff: float) -> float:
    """Kerr shift U = hbar * omega**2 * c * n2 / (n**2 * v_eff) in rad/s.

    SI inputs: omega in rad/s, n2 in m^2/W, v_eff in m^3.
    """
    bad = [name for name, v in (("omega", omega), ("n2", n2), ("n", n), ("v_eff", v_eff))
           if not v > 0]
    if bad:
        raise ConfigurationError([f"{name} must be positive" for name in bad])
    return scipy.constants.hbar * omega**2 * scipy.constants.c * n2 / (n**2 * v_eff)


def _reservoir_roles(network: NetworkModel):
    """Guess (ports, fast, slow) reservoir roles from the decay rates.

    Three modes: the fastest-decaying mode is the candidate reservoir. Four
    modes: the fastest and slowest are the two auxiliary modes. Ties resolve
    to the later-declared mode. Other sizes have no separated timescales.
    """
    gammas = [m.gamma for m in network.modes]
    order = sorted(range(len(gammas)), key=lambda k: (gammas[k], k))
    if len(gammas) == 3:
        fast = order[-1]
        return [k for k in range(3) if k != fast], fast, None
    if len(gammas) == 4:
        fast, slow = order[-1], min(range(4), key=lambda k: (gammas[k], -k))
        return [k for k in range(4) if k not in (fast, slow)], fast, slow
    return None


def reservoir_margin(network: NetworkModel) -> Optional[float]:
    """gamma_c / max(other rates and couplings) for a three-mode network."""
    roles = _reservoir_roles(network)
    if roles is None or roles[2] is not None:
        return None
    _, fast, _ = roles
    others = [m.gamma for k, m in enumerate(network.modes) if k != fast]
    others += [c.strength for c in network.couplings]
    return network.modes[fast].gamma / max(others)


def validate_timescales(network: NetworkModel) -> list[str]:
    roles = _reservoir_roles(network)
    if roles is None:
        return []
    ports, fast, slow = roles
    labels = network.labels
    warns = []
    if slow is None:
        ratio = reservoir_margin(network)
        if ratio < TIMESCALE_MARGIN:
            warns.append(
                f"gamma_{labels[fast]} is only {ratio:.3g}x the largest other rate or "
                "coupling; adiabatic elimination of this mode is not valid here"
            )
        return warns
    aux = {fast, slow}
    link_g = [
        c.strength
        for c in network.couplings
        if {network.index(c.from_mode), network.index(c.to_mode)} & aux
        and {network.index(c.from_mode), network.index(c.to_mode)} & set(ports)
    ]
    middle = min(link_g + [network.modes[k].gamma for k in ports])
    g_fast, g_slow = network.modes[fast].gamma, network.modes[slow].gamma
    if g_fast < TIMESCALE_MARGIN * middle:
        warns.append(
            f"gamma_{labels[fast]} = {g_fast:.3g} is not well above "
            f"min(couplings, port rates) = {middle:.3g}"
        )
    if middle < TIMESCALE_MARGIN * g_slow:
        warns.append(
            f"min(couplings, port rates) = {middle:.3g} is not well above "
            f"gamma_{labels[slow]} = {g_slow:.3g}"
        )
    return warns


# --- presets ---------------------------------------------------------------

EPSILON = 0.01
KERR = 5.0
HALF = 0.5


def _ring3(kerrs, gamma_c=1.0, g=HALF, j=HALF, phi=math.pi / 2):
    modes = (
        ModeSpec("a", kerr_u=kerrs[0]),
        ModeSpec("b", kerr_u=kerrs[1]),
        ModeSpec("c", kerr_u=kerrs[2], gamma=gamma_c),
    )
    couplings = (
        CouplingSpec("a", "b", j),
        CouplingSpec("b", "c", g),
        CouplingSpec("c", "a", g, phi),
    )
    return NetworkModel(
        modes, couplings, DriveSpec("a", EPSILON), fs.TruncationPolicy.uniform(3)
    )


def _ring4(kerr_b, phi=math.pi / 2):
    modes = (
        ModeSpec("a", kerr_u=KERR),
        ModeSpec("b", kerr_u=kerr_b),
        ModeSpec("c", gamma=1e-3),
        ModeSpec("d", gamma=16.0),
    )
    couplings = (
        CouplingSpec("a", "d", 2.0),
        CouplingSpec("b", "c", HALF),
        CouplingSpec("d", "b", 2.0),
        CouplingSpec("c", "a", HALF, phi),
    )
    return NetworkModel(
        modes, couplings, DriveSpec("a", EPSILON), fs.TruncationPolicy.uniform(4)
    )


def _molecule():
    modes = (ModeSpec("a", kerr_u=KERR), ModeSpec("b"))
    return NetworkModel(
        modes,
        (CouplingSpec("a", "b", HALF),),
        DriveSpec("a", EPSILON),
        fs.TruncationPolicy.uniform(2),
    )


PRESETS = {
    "fig2_asym_molecule": _molecule,
    "fig4_cyclic3": lambda: _ring3((KERR, 0.0, 0.0)),
    "fig5_reservoir": lambda: _ring3((KERR, 0.0, 0.0), gamma_c=100.0, g=5.0),
    "fig6_sym_molecule": lambda: _ring3((KERR, KERR, 0.0)),
    "fig7_circulator": lambda: _ring3((KERR, KERR, KERR)),
    "fig8_fourmode_asym": lambda: _ring4(0.0),
    "fig9_fourmode_sym": lambda: _ring4(KERR),
}


def preset(name: str) -> NetworkModel:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigurationError(
            f"unknown preset {name!r}; valid presets: {', '.join(PRESETS)}"
        ) from None
