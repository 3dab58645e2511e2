"""
Lamb shift of a link resonator and the matching qubit detuning.

The resonator is dressed by every waveguide mode it couples to. The mode
nearest to it does not shift the line (it forms the transfer channel) and
is left out; all other modes contribute a second-order self-energy
``G_m**2 / (Omega_R - omega_m)``. The sum is evaluated at the frequency of
that nearest mode, which keeps only the part of the self-energy that varies
slowly with frequency. A resonator placed between two modes therefore gets
the same shift as one sitting on the nearer mode.

When a partner node is given, the shift is evaluated for the dark
combination of the two resonators that carries the photon during a
transfer. Its value is the qubit detuning that maximizes the transfer
efficiency.
"""
from __future__ import annotations

from dataclasses import replace
from typing import Optional

import numpy as np

from ..errors import AmbiguityError, ConfigurationError
from ..nodes import NodeSpec
from ..waveguide import WaveguideSpec, coupling_table, mode_frequency, nearest_mode

METHODS = ("perturbative", "eigen")
WEIGHT_TOLERANCE = 1e-12


def self_energy_shift(resonator: float, mode_freqs, couplings,
                      exclude: Optional[int] = None) -> float:
    """Second-order shift sum_m G_m^2 / (Omega_R - omega_m).

    Parameters
    ----------
    resonator : float
        Resonator frequency (any frame shared with ``mode_freqs``).
    mode_freqs, couplings : array_like
        Mode frequencies and the resonator couplings G_m.
    exclude : int, optional
        Position of a mode to leave out (the resonant channel).
    """
    w = np.asarray(mode_freqs, dtype=float)
    g = np.asarray(couplings, dtype=float)
    keep = np.ones(w.size, bool)
    if exclude is not None:
        keep[exclude] = False
    den = resonator - w[keep]
    if np.any(den == 0.0):
        raise ConfigurationError("a retained mode is degenerate with the resonator")
    return float(np.sum(g[keep] ** 2 / den))


def max_weight_shift(resonator: float, mode_freqs, couplings) -> float:
    """Diagonalize resonator plus modes and return the shift of the line.

    The line is the eigenvector with the largest resonator weight; its
    eigenvalue minus ``resonator`` is returned.
    """
    w = np.asarray(mode_freqs, dtype=float)
    g = np.asarray(couplings, dtype=float)
    n = w.size
    H = np.zeros((n + 1, n + 1))
    H[0, 0] = resonator
    H[0, 1:] = H[1:, 0] = g
    H[np.arange(1, n + 1), np.arange(1, n + 1)] = w
    vals, vecs = np.linalg.eigh(H)
    weight = vecs[0] ** 2
    order = np.argsort(weight)
    if n and weight[order[-1]] - weight[order[-2]] < WEIGHT_TOLERANCE:
        raise AmbiguityError("two eigenvectors share the maximum resonator weight")
    return float(vals[order[-1]] - resonator)


def lamb_shift(spec: WaveguideSpec, node: NodeSpec,
               partner: Optional[NodeSpec] = None,
               method: str = "perturbative") -> float:
    """Lamb shift (rad/s) of ``node``'s resonator coupled at the near end.

    Parameters
    ----------
    spec : WaveguideSpec
        Link geometry and mode window.
    node : NodeSpec
        The node whose resonator shift is wanted.
    partner : NodeSpec, optional
        Node at the far end. When given, the shift of the dark resonator
        combination is returned, which is the compensation used for a
        transfer between the two nodes.
    method : {"perturbative", "eigen"}
        ``"eigen"`` diagonalizes the single-node problem and picks the
        eigenvector with maximum resonator weight; it ignores ``partner``.
    """
    if method not in METHODS:
        raise ConfigurationError(f"unknown Lamb-shift method {method!r}")
    table = coupling_table(spec, (node, partner))
    w = table.frequencies
    omega = node.resonator
    if method == "eigen":
        return max_weight_shift(omega, w, table.values[:, 0])
    exclude = _channel_index(spec, omega)
    if exclude is not None:
        omega = float(w[exclude])
    if partner is None:
        return self_energy_shift(omega, w, table.values[:, 0], exclude)
    # second-order self-energy matrix of the two resonators
    G = table.values
    keep = np.ones(w.size, bool)
    if exclude is not None:
        keep[exclude] = False
    den = omega - w[keep]
    sigma = (G[keep].T / den) @ G[keep]
    if exclude is None:
        d = np.array([1.0, 0.0])
    else:
        gc = G[exclude]
        d = np.array([gc[1], -gc[0]])
        d /= np.linalg.norm(d)
    return float(d @ sigma @ d)


def _channel_index(spec: WaveguideSpec, omega: float) -> Optional[int]:
    # the channel mode: nearest mode, if it lies in the window
    m = nearest_mode(spec, omega)
    lo, hi = spec.window
    return m - lo if lo <= m <= hi else None


def compensate_detuning(node: NodeSpec, shift: float) -> NodeSpec:
    """Return ``node`` with its qubit retuned by ``shift``."""
    return replace(node, qubit=node.qubit + shift) if shift else node


def channel_frequency(spec: WaveguideSpec, offset: float = 0.0) -> float:
    """Frequency of the central mode plus ``offset`` (rad/s)."""
    return float(mode_frequency(spec, spec.central_mode)) + offset
