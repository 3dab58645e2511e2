"""
TE10m mode structure of a rectangular waveguide quantum link.

The link is a closed guide of length ``L`` whose standing modes have
wavenumbers ``k_m = m*pi/L`` and frequencies

    omega_m = c * sqrt((pi/l1)**2 + (m*pi/L)**2)

Each end hosts a resonator. The resonator at ``x = 0`` (node 1) couples with
the same sign to every mode, the one at ``x = L`` (node 2) with the mode
parity ``(-1)**m``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .constants import (DEFAULT_CENTER_FREQUENCY, SPEED_OF_LIGHT,
                        WR90_BROAD_WALL)
from .errors import ConfigurationError, DomainError


@dataclass(frozen=True)
class WaveguideSpec:
    """Geometry of the link plus the truncated mode window.

    ``mode_window`` is an inclusive ``(m_lo, m_hi)`` pair. ``None`` selects the
    full band ``[1, 2*m_c - 1]``, i.e. every mode from the first TE10m
    mode up to its mirror image about the central index.
    """

    length: float
    broad_wall: float = WR90_BROAD_WALL
    speed_of_light: float = SPEED_OF_LIGHT
    center_frequency: float = DEFAULT_CENTER_FREQUENCY
    mode_window: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        if not self.length > 0 or not self.broad_wall > 0:
            raise ConfigurationError("length and broad_wall must be positive")
        if not self.speed_of_light > 0:
            raise ConfigurationError("speed_of_light must be positive")
        if not self.center_frequency > self.cutoff:
            raise ConfigurationError(
                f"center frequency {self.center_frequency:.6g} rad/s is below "
                f"cutoff {self.cutoff:.6g} rad/s; no propagating mode")
        if self.mode_window is not None:
            lo, hi = (int(x) for x in self.mode_window)
            if lo < 1 or hi < lo:
                raise ConfigurationError(f"invalid mode window {self.mode_window}")
            object.__setattr__(self, "mode_window", (lo, hi))

    @property
    def cutoff(self) -> float:
        """TE10 cutoff frequency c*pi/l1 (rad/s)."""
        return self.speed_of_light * math.pi / self.broad_wall

    @property
    def central_mode(self) -> int:
        return nearest_mode(self, self.center_frequency)

    @property
    def window(self) -> Tuple[int, int]:
        if self.mode_window is not None:
            return self.mode_window
        return full_band_window(self)

    def with_window(self, window) -> "WaveguideSpec":
        return WaveguideSpec(self.length, self.broad_wall, self.speed_of_light,
                             self.center_frequency,
                             None if window is None else tuple(window))

    def modes(self) -> np.ndarray:
        lo, hi = self.window
        return np.arange(lo, hi + 1)

    def frequencies(self) -> np.ndarray:
        return mode_frequency(self, self.modes())


@dataclass(frozen=True)
class DispersionPoint:
    omega: float
    k: float
    group_velocity: float
    curvature: float  # D = d^2 omega / dk^2, m^2/s


@dataclass(frozen=True)
class CouplingTable:
    """Resonator-mode couplings ``G[m, j]`` over the mode window (rad/s)."""

    modes: np.ndarray
    frequencies: np.ndarray
    values: np.ndarray = field(repr=False)  # shape (n_modes, 2)

    def node(self, j: int) -> np.ndarray:
        """Couplings of node ``j`` (1 or 2)."""
        return self.values[:, j - 1]


def mode_frequency(spec: WaveguideSpec, m):
    """Frequency of mode ``m`` (scalar or array, m >= 1) in rad/s."""
    m = np.asarray(m)
    if np.any(m < 1):
        raise DomainError("mode index must be >= 1")
    c = spec.speed_of_light
    out = c * np.sqrt((math.pi / spec.broad_wall) ** 2
                      + (m * math.pi / spec.length) ** 2)
    return float(out) if out.ndim == 0 else out


def wavenumber(spec: WaveguideSpec, omega: float) -> float:
    c = spec.speed_of_light
    radicand = (omega / c) ** 2 - (math.pi / spec.broad_wall) ** 2
    if not radicand > 0:
        raise DomainError(
            f"omega = {omega:.6g} rad/s is at or below cutoff "
            f"{spec.cutoff:.6g} rad/s (evanescent regime)")
    return math.sqrt(radicand)


def dispersion_at(spec: WaveguideSpec, omega: float) -> DispersionPoint:
    """Group velocity and dispersion curvature at ``omega``."""
    c = spec.speed_of_light
    k = wavenumber(spec, omega)
    vg = c * c * k / omega
    curvature = (c * c / omega) * (1.0 - (vg / c) ** 2)
    return DispersionPoint(omega, k, vg, curvature)


def nearest_mode(spec: WaveguideSpec, omega: float) -> int:
    """Index of the mode closest to ``omega``; ties go to the smaller index."""
    k = wavenumber(spec, omega)
    m_real = k * spec.length / math.pi
    lo = max(1, math.floor(m_real))
    candidates = [m for m in (lo - 1, lo, lo + 1, lo + 2) if m >= 1]
    return min(candidates,
               key=lambda m: (abs(mode_frequency(spec, m) - omega), m))


def full_band_window(spec: WaveguideSpec) -> Tuple[int, int]:
    mc = nearest_mode(spec, spec.center_frequency)
    return 1, max(2 * mc - 1, mc + 1)


def free_spectral_range(spec: WaveguideSpec, omega: float) -> float:
    """omega_{m+1} - omega_m for the mode nearest ``omega``."""
    wavenumber(spec, omega)  # domain check
    m = nearest_mode(spec, omega)
    return mode_frequency(spec, m + 1) - mode_frequency(spec, m)


def central_group_velocity(spec: WaveguideSpec) -> float:
    """Group velocity at the central mode, used for couplings and timing."""
    wc = mode_frequency(spec, spec.central_mode)
    return dispersion_at(spec, wc).group_velocity


def coupling_table(spec: WaveguideSpec, nodes: Sequence) -> CouplingTable:
    """Couplings ``G_{m,j} = (-1)**(m*(j-1)) sqrt(kappa_j v_g omega_m / (2 Omega_Rj L))``.

    ``nodes`` is a pair; an entry of ``None`` detaches that end (zero column).
    """
    modes = spec.modes()
    if modes.size == 0:
        raise ConfigurationError("empty mode window")
    freqs = mode_frequency(spec, modes)
    vg = central_group_velocity(spec)
    values = np.zeros((modes.size, 2))
    for j, node in enumerate(nodes, start=1):
        if node is None:
            continue
        if not node.kappa > 0:
            raise ConfigurationError(f"node {j}: kappa must be positive")
        if not node.resonator > spec.cutoff:
            raise ConfigurationError(f"node {j}: resonator below cutoff")
        amp = np.sqrt(node.kappa * vg * freqs / (2.0 * node.resonator * spec.length))
        sign = 1.0 if j == 1 else np.where(modes % 2 == 0, 1.0, -1.0)
        values[:, j - 1] = sign * amp
    return CouplingTable(modes, freqs, values)


def sech_tail_weight(half_width: float, bandwidth: float) -> float:
    """Weight of |f(omega)|^2 (sech photon) outside ``|omega - omega_c| < half_width``."""
    x = math.pi * half_width / bandwidth
    # 1 - tanh(x) without cancellation
    return 2.0 / (math.exp(2.0 * x) + 1.0)


def select_mode_window(spec: WaveguideSpec, photon_bandwidth: float,
                       tolerance: float = 1e-8,
                       carrier: Optional[float] = None) -> Tuple[int, int]:
    """Smallest symmetric window around the carrier mode holding the photon.

    The out-of-window sech spectral weight is below ``tolerance``; the window
    always has at least 3 modes.
    """
    if not photon_bandwidth > 0:
        raise DomainError("photon bandwidth must be positive")
    if not 0 < tolerance < 1:
        raise DomainError("tolerance must lie in (0, 1)")
    carrier = spec.center_frequency if carrier is None else carrier
    mc = nearest_mode(spec, carrier)
    wc = mode_frequency(spec, mc)
    # 1 - tanh(pi*D/kt) = tol  ->  D = kt/pi * artanh(1 - tol)
    half_width = photon_bandwidth / math.pi * 0.5 * math.log((2.0 - tolerance) / tolerance)
    n = 1
    while True:
        if mc - n < 1:
            raise ConfigurationError(
                "mode window would extend below the first mode; "
                "photon bandwidth too large for this guide")
        lower = wc - mode_frequency(spec, mc - n)
        upper = mode_frequency(spec, mc + n) - wc
        if min(lower, upper) >= half_width:
            return mc - n, mc + n
        n += 1
