from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Optional

from .errors import ConfigurationError

HIERARCHY_MARGIN = 100.0
DISPERSIVE_MARGIN = 5.0


@dataclass(frozen=True)
class DispersiveBlock:
    """Dispersive qubit-resonator parameters of a passive node (rad/s)."""

    chi: float
    detuning: float  # Delta = delta_2 - Omega_R2
    qubit_coupling: float  # g_2
    filter_coupling: Optional[float] = None  # g_p

    def __post_init__(self):
        if abs(self.detuning) < DISPERSIVE_MARGIN * abs(self.qubit_coupling):
            raise ConfigurationError(
                f"dispersive regime requires |Delta| >= {DISPERSIVE_MARGIN:g} g_2 "
                f"(Delta = {self.detuning:.4g}, g_2 = {self.qubit_coupling:.4g})")


@dataclass(frozen=True)
class NodeSpec:
    """One qubit-cavity node. Frequencies are lab-frame angular (rad/s).

    ``qubit`` is the qubit frequency delta_j, ``resonator`` the bare cavity
    frequency Omega_Rj and ``kappa`` the cavity decay rate into the link.
    """

    qubit: float
    resonator: float
    kappa: float
    dispersive: Optional[DispersiveBlock] = None

    def __post_init__(self):
        if not self.kappa > 0:
            raise ConfigurationError("kappa must be positive")
        if not self.resonator > 0:
            raise ConfigurationError("resonator frequency must be positive")
        if HIERARCHY_MARGIN * self.kappa > min(self.resonator, self.qubit):
            warnings.warn("kappa is not << resonator/qubit frequency; "
                          "rotating-wave approximation is questionable",
                          stacklevel=3)

    def with_qubit(self, qubit: float) -> "NodeSpec":
        return replace(self, qubit=qubit)

    def with_resonator(self, resonator: float) -> "NodeSpec":
        return replace(self, resonator=resonator)


def resonant_node(frequency: float, kappa: float, **kwargs) -> NodeSpec:
    """Node with qubit and cavity both at ``frequency``."""
    return NodeSpec(frequency, frequency, kappa, **kwargs)
