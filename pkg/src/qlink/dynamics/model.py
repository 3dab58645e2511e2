from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import ConfigurationError
from ..nodes import NodeSpec
from ..waveguide import WaveguideSpec, coupling_table, mode_frequency

# layout of the flat amplitude vector
Q1, Q2, C1, C2 = range(4)
N_LOCAL = 4


@dataclass(frozen=True)
class LinkModel:
    """Single-excitation model of two nodes and the link, in a rotating frame.

    All frequencies stored here are frame-relative (lab value minus
    ``frame_frequency``). A detached node keeps its slots in the state
    vector but has zero coupling to the link.
    """

    spec: WaveguideSpec
    nodes: tuple
    frame_frequency: float
    modes: np.ndarray = field(repr=False)
    mode_freqs: np.ndarray = field(repr=False)
    couplings: np.ndarray = field(repr=False)  # (n_modes, 2)
    qubit_freqs: np.ndarray = field(repr=False)
    resonator_freqs: np.ndarray = field(repr=False)

    @property
    def n_modes(self) -> int:
        return self.modes.size

    @property
    def dim(self) -> int:
        return N_LOCAL + self.n_modes

    def mode_index(self, m: int) -> int:
        """Position of mode ``m`` inside the amplitude vector."""
        i = int(m) - int(self.modes[0])
        if not 0 <= i < self.n_modes:
            raise ConfigurationError(f"mode {m} outside window")
        return N_LOCAL + i

    def hamiltonian(self, g1: float = 0.0, g2: float = 0.0) -> np.ndarray:
        """Dense frame Hamiltonian at fixed qubit couplings (small windows only)."""
        n = self.dim
        H = np.zeros((n, n))
        H[Q1, Q1], H[Q2, Q2] = self.qubit_freqs
        H[C1, C1], H[C2, C2] = self.resonator_freqs
        H[Q1, C1] = H[C1, Q1] = g1
        H[Q2, C2] = H[C2, Q2] = g2
        idx = np.arange(N_LOCAL, n)
        H[idx, idx] = self.mode_freqs
        H[C1, N_LOCAL:] = H[N_LOCAL:, C1] = self.couplings[:, 0]
        H[C2, N_LOCAL:] = H[N_LOCAL:, C2] = self.couplings[:, 1]
        return H

    def with_nodes(self, nodes: Sequence[Optional[NodeSpec]]) -> "LinkModel":
        return build_model(self.spec, nodes, self.frame_frequency)


def build_model(spec: WaveguideSpec, nodes: Sequence[Optional[NodeSpec]],
                frame_frequency: Optional[float] = None) -> LinkModel:
    """Assemble frequencies and couplings for ``nodes`` (pair, entries may be None)."""
    nodes = tuple(nodes)
    if len(nodes) != 2:
        raise ConfigurationError("expected a pair of nodes")
    if frame_frequency is None:
        frame_frequency = mode_frequency(spec, spec.central_mode)
    table = coupling_table(spec, nodes)
    qubits = np.array([0.0 if n is None else n.qubit - frame_frequency for n in nodes])
    resonators = np.array([0.0 if n is None else n.resonator - frame_frequency
                           for n in nodes])
    return LinkModel(spec, nodes, float(frame_frequency), table.modes,
                     table.frequencies - frame_frequency, table.values,
                     qubits, resonators)
