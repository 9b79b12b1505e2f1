"""Independent reference results used as test oracles."""

import numpy as np


def linear_amplitudes(network):
    """Coherent amplitudes of a U = 0 network, from the classical mode equations.

    d alpha / dt = -i M alpha - i eps e_drive with M the single-excitation
    non-Hermitian matrix; the steady state is a product of coherent states.
    """
    labels = [m.label for m in network.modes]
    idx = {label: k for k, label in enumerate(labels)}
    target = network.modes[idx[network.drive.target]]
    probe = target.omega - network.drive.detuning
    m = np.diag([mode.omega - probe - 0.5j * mode.gamma for mode in network.modes])
    for c in network.couplings:
        i, j = idx[c.from_mode], idx[c.to_mode]
        m[j, i] += c.strength * np.exp(1j * c.phase)
        m[i, j] += c.strength * np.exp(-1j * c.phase)
    rhs = np.zeros(len(labels), dtype=complex)
    rhs[idx[network.drive.target]] = network.drive.epsilon
    return dict(zip(labels, -np.linalg.solve(m, rhs)))


def linear_transmission(network, output):
    alpha = linear_amplitudes(network)
    g_in = next(m.gamma for m in network.modes if m.label == network.drive.target)
    g_out = next(m.gamma for m in network.modes if m.label == output)
    return g_in * g_out * abs(alpha[output]) ** 2 / network.drive.epsilon**2
