"""Weak-drive perturbative oracle, independent of the Liouvillian solve.

The steady state is expanded in powers of the drive amplitude,
``rho = sum_k eps**k rho_k``, and organised in blocks ``rho[p, q]`` between
the p- and q-excitation manifolds (p, q <= 2). With the non-Hermitian
Hamiltonian ``Hnh = H - (i/2) sum_o gamma_o n_o`` each block obeys

    -i (Hnh_p X - X Hnh_q^dagger) = (drive terms from order k-1)
                                    - sum_o gamma_o o rho[p+1, q+1] o^dagger

which is a small Sylvester equation. Order 1 and 2 of the off-diagonal
blocks ``rho[1,0]``, ``rho[2,0]`` are exactly the one- and two-photon
amplitude equations. Carrying the hierarchy to fourth order adds quantum-jump
recycling and vacuum depletion, which is what keeps the oracle accurate at
ports where interference cancels the one-photon amplitude.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import fockspace as fs
from .errors import OracleError
from .model import NetworkModel, mode_detunings


@dataclass(frozen=True)
class AmplitudeSolution:
    amplitudes: dict
    drive_order: int
    labels: tuple[str, ...]
    mean_photon: dict = field(repr=False)
    pair_moment: dict = field(repr=False)

    def g2(self, label: str) -> float:
        return self.pair_moment[label] / self.mean_photon[label] ** 2


def _nonhermitian_blocks(network: NetworkModel, basis: fs.FockBasis):
    ann = [fs.annihilation(basis, k).toarray() for k in range(network.mode_count)]
    dim = basis.dimension
    h = np.zeros((dim, dim), dtype=complex)
    for k, (mode, delta) in enumerate(zip(network.modes, mode_detunings(network))):
        n = ann[k].conj().T @ ann[k]
        h += (delta - 0.5j * mode.gamma) * n + mode.kerr_u * (n @ n - n)
    for c in network.couplings:
        i, j = network.index(c.from_mode), network.index(c.to_mode)
        hop = c.strength * np.exp(1j * c.phase) * (ann[j].conj().T @ ann[i])
        h += hop + hop.conj().T
    return h, ann


def _sylvester(hp, hq, rhs, p, q):
    # -i (hp X - X hq^dagger) = rhs
    ep = np.linalg.eigvals(hp) if p else np.zeros(1)
    eq = np.linalg.eigvals(hq) if q else np.zeros(1)
    gap = np.min(np.abs(ep[:, None] - np.conj(eq)[None, :]))
    if gap < 1e-12:
        raise OracleError(f"resonant singular system in block ({p},{q}), gap {gap:.1e}")
    return scipy.linalg.solve_sylvester(hp, -hq.conj().T, 1j * rhs)


def amplitude_oracle(network: NetworkModel, drive_order: int = 4) -> AmplitudeSolution:
    """Perturbative steady state to ``drive_order`` (2 or 4) in epsilon.

    ``drive_order=2`` reports the pure-state amplitude result
    (<n> = |C1|^2, <o†o†oo> = 2|C2|^2); ``drive_order=4`` also includes the
    fourth-order density-matrix corrections.
    """
    if drive_order not in (2, 4):
        raise ValueError("drive_order must be 2 or 4")
    eps = network.drive.epsilon
    if eps > 0.1 * min(m.gamma for m in network.modes):
        warnings.warn(
            f"epsilon={eps} is outside the weak-drive regime (0.1 * min gamma)",
            stacklevel=2,
        )
    m = network.mode_count
    basis = fs.build_basis(m, fs.TruncationPolicy((2,) * m, 2))
    h, ann = _nonhermitian_blocks(network, basis)
    blocks = [basis.grade_indices(g) for g in range(3)]

    def sub(mat, p, q):
        return mat[np.ix_(blocks[p], blocks[q])]

    d = network.index(network.drive.target)
    drive = ann[d] + ann[d].conj().T
    gammas = [mode.gamma for mode in network.modes]

    orders = [{(0, 0): np.ones((1, 1), dtype=complex)}]
    for k in range(1, drive_order + 1):
        prev, cur = orders[-1], {}
        for total in range(k, -1, -2):
            for p in range(min(total, 2), -1, -1):
                q = total - p
                if q > 2:
                    continue
                if (p, q) == (0, 0):
                    cur[(0, 0)] = -sum(
                        np.trace(cur[(r, r)]) for r in (1, 2) if (r, r) in cur
                    ) * np.ones((1, 1))
                    continue
                rhs = np.zeros((len(blocks[p]), len(blocks[q])), dtype=complex)
                for (pp, qq), x in prev.items():
                    if qq == q and abs(pp - p) == 1:
                        rhs += 1j * sub(drive, p, pp) @ x
                    if pp == p and abs(qq - q) == 1:
                        rhs -= 1j * x @ sub(drive, qq, q)
                up = cur.get((p + 1, q + 1))
                if up is not None:
                    for o, g in zip(ann, gammas):
                        rhs -= g * sub(o, p, p + 1) @ up @ sub(o, q, q + 1).conj().T
                cur[(p, q)] = _sylvester(sub(h, p, p), sub(h, q, q), rhs, p, q)
        orders.append(cur)

    amplitudes = {basis.states[0]: 1.0 + 0j}
    for grade in (1, 2):
        col = orders[grade][(grade, 0)][:, 0] * eps**grade
        for idx, amp in zip(blocks[grade], col):
            amplitudes[basis.states[idx]] = complex(amp)

    n_ops = [o.conj().T @ o for o in ann]
    if drive_order == 2:
        psi = np.array([amplitudes[s] for s in basis.states])
        c1 = psi[blocks[1]]
        mean = {
            mode.label: float(np.real(c1.conj() @ sub(n_ops[k], 1, 1) @ c1))
            for k, mode in enumerate(network.modes)
        }
        pair = {
            mode.label: float(np.real(psi.conj() @ (n_ops[k] @ n_ops[k] - n_ops[k]) @ psi))
            for k, mode in enumerate(network.modes)
        }
    else:
        rho = np.zeros((basis.dimension, basis.dimension), dtype=complex)
        for k, blks in enumerate(orders):
            for (p, q), x in blks.items():
                rho[np.ix_(blocks[p], blocks[q])] += eps**k * x
        mean = {mode.label: float(np.real(np.trace(n_ops[k] @ rho)))
                for k, mode in enumerate(network.modes)}
        pair = {mode.label: float(np.real(np.trace((n_ops[k] @ n_ops[k] - n_ops[k]) @ rho)))
                for k, mode in enumerate(network.modes)}
    return AmplitudeSolution(
        amplitudes=amplitudes,
        drive_order=drive_order,
        labels=network.labels,
        mean_photon=mean,
        pair_moment=pair,
    )
