"""
Closed-form predictions used to validate the simulations.

Every function here is pure. Frequencies are angular (rad/s) and times
are in seconds.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np
from scipy import integrate

from .errors import AmbiguityError, ConfigurationError, DomainError
from .nodes import NodeSpec
from .waveguide import WaveguideSpec, coupling_table

SINGULAR_DENOMINATOR = 1e-9
WEIGHT_TOLERANCE = 1e-12


# --------------------------------------------------------------- scattering

def scattering_phase(omega, resonator: float, kappa: float, unwrap: bool = False):
    """Reflection phase of a side resonator.

    phi = arg[(i d + kappa/2) / (i d - kappa/2)] with ``d = omega - resonator``.
    The default branch is the principal one with ``phi(resonator) = +pi``:
    red detunings give (0, pi], blue detunings give (-pi, 0). With
    ``unwrap=True`` the continuous branch ``pi + 2 arctan(2 d / kappa)`` on
    (0, 2 pi) is returned instead.
    """
    if not kappa > 0:
        raise DomainError("kappa must be positive")
    d = np.asarray(omega, dtype=float) - resonator
    phi = math.pi + 2.0 * np.arctan(2.0 * d / kappa)
    if not unwrap:
        phi = np.where(phi > math.pi, phi - 2.0 * math.pi, phi)
    return float(phi) if phi.ndim == 0 else phi


@dataclass(frozen=True)
class PhaseExpansion:
    """Second-order expansion of the scattering phase about ``center``."""

    phi0: float
    phi1: float  # group delay, s
    phi2: float  # curvature, s^2
    center: float

    def __call__(self, omega):
        x = np.asarray(omega, dtype=float) - self.center
        return self.phi0 + self.phi1 * x + 0.5 * self.phi2 * x ** 2


def phase_expansion(resonator: float, kappa: float, center: float) -> PhaseExpansion:
    """Analytic phi, phi' and phi'' of the scattering phase at ``center``."""
    if not kappa > 0:
        raise DomainError("kappa must be positive")
    d = resonator - center
    den = kappa ** 2 + 4.0 * d ** 2
    return PhaseExpansion(scattering_phase(center, resonator, kappa),
                          4.0 * kappa / den, 32.0 * kappa * d / den ** 2, center)


# --------------------------------------------------------------- distortion

@dataclass(frozen=True)
class DistortionBudget:
    """Quadratic spectral phase ``h`` and the overlap it predicts."""

    h: float
    overlap: float  # leading-order |z|^2
    exact: float  # quadrature |z|^2
    contributions: dict = field(default_factory=dict)


def quadratic_overlap(h: float, bandwidth: float) -> Tuple[float, float]:
    """Overlap of a sech photon with itself after a phase ``h (w - w_c)^2``.

    Returns ``(exact, leading)``: the quadrature of
    ``|int |f|^2 exp(-i h (w - w_c)^2) dw|^2`` and ``1 - h^2 kt^4 / 45``.
    """
    if not bandwidth > 0:
        raise DomainError("bandwidth must be positive")
    a = h * (bandwidth / math.pi) ** 2
    if abs(h) * bandwidth ** 2 > 0.5:
        warnings.warn("h kt^2 > 0.5: the leading-order overlap is unreliable",
                      stacklevel=2)
    leading = 1.0 - h ** 2 * bandwidth ** 4 / 45.0

    # |f|^2 dw = sech(u)^2 du / 2 with u = pi (w - w_c) / kt; the weight is even
    def part(fn):
        val, _ = integrate.quad(lambda u: fn(a * u * u) / np.cosh(u) ** 2,
                                0.0, 40.0, limit=400, epsabs=1e-15, epsrel=1e-13)
        return val

    z = complex(part(math.cos), -part(math.sin))
    return abs(z) ** 2, leading


def propagation_curvature(propagation: float, curvature: float,
                          group_velocity: float) -> float:
    """Quadratic phase ``t D / (2 v_g^2)`` accumulated over time ``t``."""
    return propagation * curvature / (2.0 * group_velocity ** 2)


def transfer_distortion(length: float, curvature: float, group_velocity: float,
                        kappa: float, narrowing: float, exact: bool = False) -> float:
    """Predicted transfer overlap |z|^2 = 1 - L^2 D^2 k^4 / (180 v_g^6 eta^4)."""
    _positive(kappa=kappa, narrowing=narrowing, group_velocity=group_velocity)
    kt = kappa / narrowing
    h = propagation_curvature(length / group_velocity, curvature, group_velocity)
    if exact:
        return quadratic_overlap(h, kt)[0]
    return 1.0 - length ** 2 * curvature ** 2 * kappa ** 4 / (
        180.0 * group_velocity ** 6 * narrowing ** 4)


def scattering_budget(kappa1: float, narrowing: float, duration: float,
                      curvature: float, group_velocity: float,
                      phi2: float) -> DistortionBudget:
    """Distortion of a photon that propagates for ``duration`` and scatters once."""
    _positive(kappa1=kappa1, narrowing=narrowing, group_velocity=group_velocity)
    prop = propagation_curvature(duration, curvature, group_velocity)
    h = prop - 0.5 * phi2
    kt = kappa1 / narrowing
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        exact = quadratic_overlap(h, kt)[0]
    return DistortionBudget(h, 1.0 - h ** 2 * kt ** 4 / 45.0, exact,
                            {"propagation": prop, "scattering": -0.5 * phi2})


def scattering_overlap(kappa1: float, kappa2: float, narrowing: float,
                       duration: float, curvature: float, group_velocity: float,
                       phi2: float, exact: bool = False) -> float:
    """Predicted |z|^2 = 1 - (k^4 / 45 eta^4) (phi''/2 - T D / 2 v_g^2)^2.

    ``kappa2`` only enters through ``phi2``; it is accepted to keep the
    signature symmetric with the other budgets.
    """
    _positive(kappa2=kappa2)
    b = scattering_budget(kappa1, narrowing, duration, curvature, group_velocity, phi2)
    return b.exact if exact else b.overlap


def cphase_overlaps(kappa1: float, kappa2: float, narrowing: float,
                    propagation: float, curvature: float,
                    group_velocity: float) -> Tuple[float, float]:
    """Leading-order (|z_0|^2, |z_1|^2) of the reabsorption gate.

    |z_x|^2 = 1 - (k1^4 / 45 eta^4) (t_p D / v_g^2 + (-1)^x 2 / k2^2)^2.
    """
    _positive(kappa1=kappa1, kappa2=kappa2, narrowing=narrowing,
              group_velocity=group_velocity)
    pre = kappa1 ** 4 / (45.0 * narrowing ** 4)
    a = propagation * curvature / group_velocity ** 2
    b = 2.0 / kappa2 ** 2
    return 1.0 - pre * (a + b) ** 2, 1.0 - pre * (a - b) ** 2


def phase_correction(kappa1: float, kappa2: float, narrowing: float) -> float:
    """Gate phase pi + 2 k1^2 / (3 k2^2 eta^2)."""
    _positive(kappa1=kappa1, kappa2=kappa2, narrowing=narrowing)
    return math.pi + 2.0 * kappa1 ** 2 / (3.0 * kappa2 ** 2 * narrowing ** 2)


# --------------------------------------------------------------- fidelities

def min_transfer_fidelity(efficiency: float) -> float:
    """Worst-case state-transfer fidelity, equal to |q_2(T)|^2."""
    if not 0.0 <= efficiency <= 1.0:
        raise DomainError("efficiency must lie in [0, 1]")
    return float(efficiency)


def min_gate_fidelity(z0: float, z1: float, phi: float) -> float:
    """Minimum fidelity of a controlled-phase gate with branch overlaps z0, z1.

    With ``r = |z0|/|z1| <= 1`` (the inputs are swapped if needed) the
    minimum over input states is ``|z0|^2 sin^2 phi / (1 + r^2 + 2 r cos phi)``
    when the optimal input is interior and ``|z0|^2`` otherwise.
    """
    a, b = abs(z0), abs(z1)
    if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
        raise DomainError("overlap moduli must lie in [0, 1]")
    if a > b:
        a, b = b, a
    if b == 0.0:
        return 0.0
    r = a / b
    c = math.cos(phi)
    den = 1.0 + r * r + 2.0 * r * c
    if den < SINGULAR_DENOMINATOR:
        return a * a
    if (1.0 + r * c) / den <= 1.0:
        return a * a * math.sin(phi) ** 2 / den
    return a * a


# --------------------------------------------------------------- dressed modes

@dataclass(frozen=True)
class DressedSpectrum:
    """Eigenmodes of the two resonators coupled through the link modes.

    ``frequencies`` are lab-frame. ``weights[n, j]`` is the squared
    amplitude of resonator ``j`` in eigenmode ``n``. ``central`` indexes
    the mode with the largest joint resonator weight and ``neighbors``
    the next two, ordered by frequency.
    """

    frequencies: np.ndarray
    weights: np.ndarray
    central: int
    neighbors: Tuple[int, int]

    @property
    def center_frequency(self) -> float:
        return float(self.frequencies[self.central])

    def weight_asymmetry(self) -> float:
        lo, hi = self.neighbors
        return float(self.weights[hi].sum() - self.weights[lo].sum())


def dressed_spectrum_from(resonators: Sequence[float], mode_freqs,
                          couplings) -> DressedSpectrum:
    """Dressed spectrum from explicit resonator frequencies and couplings (n, 2)."""
    w = np.asarray(mode_freqs, dtype=float)
    G = np.asarray(couplings, dtype=float)
    n = w.size
    if G.shape != (n, 2):
        raise ConfigurationError("couplings must have shape (n_modes, 2)")
    ref = float(np.mean(resonators))  # conditioning: diagonalize relative to ref
    H = np.zeros((n + 2, n + 2))
    H[0, 0], H[1, 1] = resonators[0] - ref, resonators[1] - ref
    H[0, 2:] = H[2:, 0] = G[:, 0]
    H[1, 2:] = H[2:, 1] = G[:, 1]
    H[np.arange(2, n + 2), np.arange(2, n + 2)] = w - ref
    vals, vecs = np.linalg.eigh(H)
    weights = (vecs[:2] ** 2).T
    joint = weights.sum(axis=1)
    order = np.argsort(joint)[::-1]
    if joint[order[0]] - joint[order[1]] < WEIGHT_TOLERANCE:
        raise AmbiguityError("two dressed modes share the maximum resonator weight")
    central = int(order[0])
    lo, hi = sorted(int(i) for i in order[1:3])
    return DressedSpectrum(vals + ref, weights, central, (lo, hi))


def dressed_spectrum(spec: WaveguideSpec, nodes: Sequence[NodeSpec]) -> DressedSpectrum:
    """Dressed spectrum of the realistic link for a pair of nodes."""
    if any(n is None for n in nodes):
        raise ConfigurationError("both nodes are required")
    table = coupling_table(spec, nodes)
    return dressed_spectrum_from([n.resonator for n in nodes],
                                 table.frequencies, table.values)


def stark_infidelity(bandwidth: float, dressed_frequency: float) -> float:
    """Stark-shift infidelity estimate kt^2 / (4 w0^2) with lab-frame ``w0``."""
    if bandwidth < 0 or not dressed_frequency > 0:
        raise DomainError("need bandwidth >= 0 and a positive lab-frame frequency")
    return bandwidth ** 2 / (4.0 * dressed_frequency ** 2)


def crossover_bandwidth(length: float, group_velocity: float) -> float:
    """Photon bandwidth kt = 2 pi v_g / (sqrt(3) L) separating the two regimes."""
    return 2.0 * math.pi * group_velocity / (math.sqrt(3.0) * length)


def _positive(**values):
    for name, v in values.items():
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v}")
