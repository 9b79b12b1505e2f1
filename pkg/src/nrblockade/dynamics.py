"""Lindblad generator, steady-state solve and fixed-step time evolution.

Density matrices are vectorised by column stacking, ``vec(rho) =
rho.ravel(order="F")``, so that ``vec(A rho B) = (B^T kron A) vec(rho)``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import fockspace as fs
from .errors import IntegratorError, SolverError
from .model import NetworkModel

RESIDUAL_TOL = 1e-8
TRACE_TOL = 1e-10
HERMITICITY_TOL = 1e-10
POSITIVITY_TOL = -1e-8
MAX_REFINEMENTS = 3


@dataclass(frozen=True)
class Liouvillian:
    hilbert_dimension: int
    generator: sp.csr_matrix
    decay_channels: tuple[tuple[str, float], ...]
    basis: Optional[fs.FockBasis] = None
    labels: tuple[str, ...] = ()
    drive_target: Optional[str] = None
    epsilon: Optional[float] = None

    def trace_row(self) -> np.ndarray:
        """Row vector t with t @ vec(rho) = trace(rho)."""
        return np.eye(self.hilbert_dimension, dtype=complex).ravel(order="F")


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).ravel(order="F")


def unvec(v: np.ndarray, dimension: int) -> np.ndarray:
    return np.asarray(v).reshape((dimension, dimension), order="F")


def lindblad_generator(hamiltonian, channels: Sequence) -> sp.csr_matrix:
    """Sparse generator from ``H`` and ``(rate, jump_operator)`` channels."""
    h = sp.csr_matrix(hamiltonian, dtype=complex)
    dim = h.shape[0]
    eye = sp.identity(dim, dtype=complex, format="csr")
    gen = -1j * (sp.kron(eye, h) - sp.kron(h.T, eye))
    for rate, op in channels:
        op = sp.csr_matrix(op, dtype=complex)
        if op.shape != h.shape:
            raise ValueError(f"jump operator shape {op.shape} != Hamiltonian {h.shape}")
        nop = (op.conj().T @ op).tocsr()
        gen = gen + rate * (
            sp.kron(op.conj(), op) - 0.5 * sp.kron(eye, nop) - 0.5 * sp.kron(nop.T, eye)
        )
    return fs.clean(gen)


def build_liouvillian(
    hamiltonian, network: NetworkModel, basis: fs.FockBasis, extra_channels=()
) -> Liouvillian:
    """Generator with one zero-temperature decay channel per mode.

    ``extra_channels`` are additional ``(label, rate, jump_operator)`` triples.
    """
    if basis.mode_count != network.mode_count or hamiltonian.shape != (
        basis.dimension,
        basis.dimension,
    ):
        raise ValueError("Hamiltonian, basis and network dimensions disagree")
    channels = [
        (m.label, m.gamma, fs.annihilation(basis, k)) for k, m in enumerate(network.modes)
    ]
    channels.extend(extra_channels)
    gen = lindblad_generator(hamiltonian, [(rate, op) for _, rate, op in channels])
    return Liouvillian(
        hilbert_dimension=basis.dimension,
        generator=gen,
        decay_channels=tuple((label, rate) for label, rate, _ in channels),
        basis=basis,
        labels=network.labels,
        drive_target=network.drive.target,
        epsilon=network.drive.epsilon,
    )


@dataclass(frozen=True)
class SteadyState:
    rho: np.ndarray
    residual: float
    solver_info: dict = field(compare=False)
    basis: Optional[fs.FockBasis] = field(default=None, compare=False, repr=False)
    labels: tuple[str, ...] = ()
    drive_target: Optional[str] = None
    epsilon: Optional[float] = None

    @property
    def dimension(self) -> int:
        return self.rho.shape[0]

    def expect(self, op) -> complex:
        # trace(op @ rho) without forming the product
        return complex(sp.csr_matrix(op).multiply(self.rho.T).sum())

    def diagnostics(self) -> dict:
        rho = self.rho
        herm = 0.5 * (rho + rho.conj().T)
        return {
            "trace_error": abs(np.trace(rho) - 1.0),
            "hermiticity_error": float(np.max(np.abs(rho - rho.conj().T))),
            "min_eigenvalue": float(np.min(np.linalg.eigvalsh(herm))),
            "residual": self.residual,
        }


def _kernel_dimension(gen: sp.csr_matrix, rel_tol: float = 1e-10) -> int:
    s = scipy.linalg.svdvals(gen.toarray())
    return int(np.sum(s <= rel_tol * s[0]))


def steady_state(liouvillian: Liouvillian) -> SteadyState:
    """Solve L vec(rho) = 0 with the first equation replaced by trace(rho) = 1."""
    start = time.perf_counter()
    gen = liouvillian.generator
    n = gen.shape[0]
    constrained = gen.tolil(copy=True)
    constrained[0, :] = liouvillian.trace_row()
    rhs = np.zeros(n, dtype=complex)
    rhs[0] = 1.0
    constrained = constrained.tocsc()
    try:
        lu = spla.splu(constrained)
        v = lu.solve(rhs)
    except RuntimeError as exc:
        kdim = _kernel_dimension(gen) if n <= 10000 else None
        raise SolverError(
            f"constrained steady-state system is singular (kernel dimension estimate "
            f"{kdim}): {exc}",
            kernel_dimension=kdim,
        ) from exc
    if not np.all(np.isfinite(v)):
        raise SolverError("steady-state solve produced non-finite values")
    # Multi-photon elements are orders of magnitude below the vacuum
    # population; refinement restores their relative accuracy.
    refinements = 0
    for _ in range(MAX_REFINEMENTS):
        step = lu.solve(rhs - constrained @ v)
        v = v + step
        refinements += 1
        if np.max(np.abs(step)) <= 1e-18 * np.max(np.abs(v)):
            break
    residual = float(np.linalg.norm(gen @ v))
    rho = unvec(v, liouvillian.hilbert_dimension)
    info = {
        "method": "splu(trace-constrained) + iterative refinement",
        "iterations": 1 + refinements,
        "wall_time": time.perf_counter() - start,
    }
    ss = SteadyState(
        rho=rho,
        residual=residual,
        solver_info=info,
        basis=liouvillian.basis,
        labels=liouvillian.labels,
        drive_target=liouvillian.drive_target,
        epsilon=liouvillian.epsilon,
    )
    _check_physical(ss)
    return ss


def _check_physical(ss: SteadyState):
    d = ss.diagnostics()
    problems = []
    if d["residual"] > RESIDUAL_TOL:
        problems.append(f"residual {d['residual']:.3e} exceeds {RESIDUAL_TOL}")
    if d["trace_error"] > TRACE_TOL:
        problems.append(f"trace error {d['trace_error']:.3e}")
    if d["hermiticity_error"] > HERMITICITY_TOL:
        problems.append(f"hermiticity error {d['hermiticity_error']:.3e}")
    if d["min_eigenvalue"] < POSITIVITY_TOL:
        problems.append(f"negative eigenvalue {d['min_eigenvalue']:.3e}")
    if problems:
        raise SolverError("unphysical steady state: " + "; ".join(problems))


def suggest_dt(liouvillian: Liouvillian, safety: float = 0.5) -> float:
    """Step size keeping RK4 well inside its stability region.

    The spectral radius is bounded by the smaller of the 1- and inf-norms,
    which costs one pass over the nonzeros.
    """
    gen = abs(liouvillian.generator)
    radius = min(gen.sum(axis=0).max(), gen.sum(axis=1).max())
    return min(0.01, safety / max(float(radius), 1e-12))


def _rk4_step(gen, v, dt):
    k1 = gen @ v
    k2 = gen @ (v + 0.5 * dt * k1)
    k3 = gen @ (v + 0.5 * dt * k2)
    k4 = gen @ (v + dt * k3)
    return v + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def trajectory(
    liouvillian: Liouvillian,
    rho0: np.ndarray,
    t_final: float,
    dt: float,
    sample_every: int = 100,
    tol: float = 1e-8,
) -> Iterator[tuple[float, np.ndarray]]:
    """Yield ``(t, rho)`` every ``sample_every`` RK4 steps and at ``t_final``.

    On sampled steps the local error is estimated by step halving; an estimate
    above ``tol`` raises :class:`IntegratorError`.
    """
    if dt <= 0 or t_final < 0:
        raise ValueError("dt must be positive and t_final non-negative")
    dim = liouvillian.hilbert_dimension
    gen = liouvillian.generator
    steps = max(1, int(np.ceil(t_final / dt - 1e-12))) if t_final > 0 else 0
    h = t_final / steps if steps else 0.0
    v = vec(np.asarray(rho0, dtype=complex)).copy()
    yield 0.0, unvec(v, dim)
    for k in range(steps):
        if k % sample_every == 0:
            full = _rk4_step(gen, v, h)
            halves = _rk4_step(gen, _rk4_step(gen, v, h / 2), h / 2)
            err = float(np.max(np.abs(full - halves)))
            if err > tol:
                raise IntegratorError(
                    f"step-halving error {err:.2e} > {tol:.0e} at t={k * h:.4g}; "
                    f"reduce dt below {h:.3g}"
                )
            v = halves
        else:
            v = _rk4_step(gen, v, h)
        if (k + 1) % sample_every == 0 or k + 1 == steps:
            yield (k + 1) * h, unvec(v, dim)


def evolve(
    liouvillian: Liouvillian,
    rho0: np.ndarray,
    t_final: float,
    dt: Optional[float] = None,
    sample_every: int = 100,
    tol: float = 1e-8,
) -> np.ndarray:
    """Classical RK4 integration of d vec(rho)/dt = L vec(rho) to ``t_final``."""
    if dt is None:
        dt = suggest_dt(liouvillian)
    trace0 = np.trace(rho0)
    rho = rho0
    for _, rho in trajectory(liouvillian, rho0, t_final, dt, sample_every, tol):
        pass
    drift = abs(np.trace(rho) - trace0)
    if drift > 1e-8:
        raise IntegratorError(f"trace drifted by {drift:.2e}")
    return rho


def vacuum(basis: fs.FockBasis) -> np.ndarray:
    rho = np.zeros((basis.dimension, basis.dimension), dtype=complex)
    rho[0, 0] = 1.0
    return rho
