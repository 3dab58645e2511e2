"""
Time-dependent qubit-resonator couplings and sech photon profiles.

A ``Control`` is a small tagged record (``kind`` plus up to four floats) so
the compiled integrator can evaluate it without calling back into Python.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .errors import ConfigurationError, DomainError

ZERO, CONSTANT, SECH, SECH_MIRRORED, SINE = range(5)

# 2T = t_p + DEFAULT_SPAN / kappa_tilde, i.e. ten periods of the photon bandwidth
DEFAULT_SPAN = 20.0 * math.pi


def sech_pulse(t, kappa_tilde: float, kappa: float):
    """Pulse g(t; kt, k) that emits a sech photon of bandwidth ``kt``.

        g = (k - kt tanh(kt t/2)) / (2 sqrt((1 + exp(-kt t)) k/kt - 1))

    Evaluated in a rearranged form that never overflows.
    """
    if not 0 < kappa_tilde <= kappa:
        raise DomainError(f"need 0 < kappa_tilde <= kappa, got {kappa_tilde}, {kappa}")
    x = kappa_tilde * np.asarray(t, dtype=float)
    ratio = kappa / kappa_tilde
    out = np.empty_like(x)
    neg = x < 0
    xn = x[neg]
    en = np.exp(xn)
    num = (kappa - kappa_tilde) + 2.0 * kappa_tilde / (1.0 + en)
    out[neg] = num * np.exp(0.5 * xn) / (2.0 * np.sqrt(ratio + (ratio - 1.0) * en))
    xp = x[~neg]
    ep = np.exp(-xp)
    num = (kappa - kappa_tilde) + 2.0 * kappa_tilde * ep / (1.0 + ep)
    out[~neg] = num / (2.0 * np.sqrt((ratio - 1.0) + ratio * ep))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Control:
    """Real coupling g(t) in rad/s.

    kinds: ZERO; CONSTANT(value); SECH(sigma, tau, kt, k) -> g(sigma*t + tau);
    SECH_MIRRORED(tau, kt, k) -> g(tau - |t|); SINE(amp, rate, phase).
    """

    kind: int = ZERO
    params: Tuple[float, ...] = ()

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        p = self.params
        if self.kind == ZERO:
            out = np.zeros_like(t)
        elif self.kind == CONSTANT:
            out = np.full_like(t, p[0])
        elif self.kind == SECH:
            out = sech_pulse(p[0] * t + p[1], p[2], p[3])
        elif self.kind == SECH_MIRRORED:
            out = sech_pulse(p[0] - np.abs(t), p[1], p[2])
        elif self.kind == SINE:
            out = p[0] * np.sin(p[1] * t + p[2])
        else:
            raise ValueError(f"unknown control kind {self.kind}")
        return float(out) if np.ndim(out) == 0 else out

    def packed(self) -> np.ndarray:
        out = np.zeros(5)
        out[0] = self.kind
        out[1:1 + len(self.params)] = self.params
        return out

    @classmethod
    def constant(cls, value: float) -> "Control":
        return cls(CONSTANT, (float(value),)) if value else cls()


@dataclass(frozen=True)
class ControlSchedule:
    """Pair of couplings on the protocol window ``[-T, T]``."""

    g1: Control
    g2: Control
    half_length: float
    delay: float = 0.0
    photon_bandwidth: float = float("nan")
    narrowing: float = float("nan")
    kind: str = "custom"
    warnings: Tuple[str, ...] = field(default=())

    @property
    def duration(self) -> float:
        return 2.0 * self.half_length

    @property
    def t_span(self) -> Tuple[float, float]:
        return -self.half_length, self.half_length

    def packed(self) -> np.ndarray:
        return np.stack([self.g1.packed(), self.g2.packed()])


def protocol_half_length(propagation: float, kappa_tilde: float,
                         span: float = DEFAULT_SPAN) -> float:
    return 0.5 * (propagation + span / kappa_tilde)


def transfer_schedule(kappa1: float, kappa2: float, kappa_tilde: float,
                      propagation: float, span: float = DEFAULT_SPAN,
                      half_length: float | None = None) -> ControlSchedule:
    """Emission by node 1 and time-reversed absorption by node 2.

    ``g1(t) = g(t + t_d/2; kt, k1)``, ``g2(t) = g(-t + t_d/2; kt, k2)``, with
    delay ``t_d = t_p`` and ``2T = t_p + span/kt`` unless ``half_length``
    is given.
    """
    if not 0 < kappa_tilde <= min(kappa1, kappa2):
        raise DomainError("photon bandwidth must not exceed either cavity linewidth")
    td = propagation
    T = protocol_half_length(propagation, kappa_tilde, span) if half_length is None else half_length
    return ControlSchedule(
        g1=Control(SECH, (1.0, 0.5 * td, kappa_tilde, kappa1)),
        g2=Control(SECH, (-1.0, 0.5 * td, kappa_tilde, kappa2)),
        half_length=T, delay=td, photon_bandwidth=kappa_tilde,
        narrowing=kappa1 / kappa_tilde, kind="transfer")


def stirap_schedule(g0: float, half_length: float) -> ControlSchedule:
    """Counter-intuitive ramps g1 = g0 sin((t+T)pi/4T), g2 = g0 cos((t+T)pi/4T)."""
    if not (g0 > 0 and half_length > 0):
        raise DomainError("g0 and T must be positive")
    rate = math.pi / (4.0 * half_length)
    return ControlSchedule(
        g1=Control(SINE, (g0, rate, rate * half_length)),
        g2=Control(SINE, (g0, rate, rate * half_length + 0.5 * math.pi)),
        half_length=half_length, kind="stirap")


def reabsorption_delay(kappa: float, length: float, group_velocity: float) -> float:
    """Round trip plus scattering delay, t_d = 2L/v_g + 2/kappa."""
    return 2.0 * length / group_velocity + 2.0 / kappa


def reabsorption_schedule(kappa_tilde: float, kappa: float, length: float,
                          group_velocity: float, span: float = DEFAULT_SPAN,
                          passive_coupling: float = 0.0,
                          half_length: float | None = None) -> ControlSchedule:
    """Symmetric emission/reabsorption pulse on node 1; node 2 held constant."""
    if not 0 < kappa_tilde <= kappa:
        raise DomainError("need 0 < kappa_tilde <= kappa")
    td = reabsorption_delay(kappa, length, group_velocity)
    T = protocol_half_length(td, kappa_tilde, span) if half_length is None else half_length
    notes = ()
    sigma_t = math.pi / (math.sqrt(3.0) * kappa_tilde)
    tp = length / group_velocity
    if sigma_t > tp:
        msg = (f"photon width {sigma_t:.3g} s exceeds propagation time {tp:.3g} s; "
               "emission and reabsorption overlap")
        warnings.warn(msg, stacklevel=2)
        notes = (msg,)
    return ControlSchedule(
        g1=Control(SECH_MIRRORED, (0.5 * td, kappa_tilde, kappa)),
        g2=Control.constant(passive_coupling),
        half_length=T, delay=td, photon_bandwidth=kappa_tilde,
        narrowing=kappa / kappa_tilde, kind="reabsorption", warnings=notes)


def _sech(x):
    # 2 e^-|x| / (1 + e^-2|x|) never overflows
    e = np.exp(-np.abs(x))
    return 2.0 * e / (1.0 + e * e)


@dataclass(frozen=True)
class SechWavepacket:
    center: float
    bandwidth: float

    @property
    def temporal_width(self) -> float:
        return math.pi / (math.sqrt(3.0) * self.bandwidth)

    def amplitude(self, omega):
        """Continuum spectral amplitude f(omega), normalized to unit weight."""
        kt = self.bandwidth
        x = math.pi * (np.asarray(omega, dtype=float) - self.center) / kt
        return math.sqrt(math.pi / (2.0 * kt)) * _sech(x)

    def temporal_amplitude(self, t):
        """|psi(t)| = sqrt(kt/4) sech(kt t / 2)."""
        kt = self.bandwidth
        return math.sqrt(kt / 4.0) * _sech(0.5 * kt * np.asarray(t, dtype=float))


def sech_spectrum(wavepacket: SechWavepacket, frequencies,
                  tolerance: float = 1e-8) -> np.ndarray:
    """Discrete mode amplitudes f(omega_m) sqrt(d omega_m), renormalized.

    Raises ``ConfigurationError`` when the grid misses more than ``tolerance``
    of the continuum spectral weight.
    """
    w = np.asarray(frequencies, dtype=float)
    if w.size < 2:
        raise ConfigurationError("need at least two modes")
    x_lo = math.pi * (w[0] - wavepacket.center) / wavepacket.bandwidth
    x_hi = math.pi * (w[-1] - wavepacket.center) / wavepacket.bandwidth
    # continuum weight inside [w0, w_last] is (tanh(x_hi) - tanh(x_lo)) / 2
    missing = 1.0 / (math.exp(min(2.0 * x_hi, 700.0)) + 1.0) \
        + 1.0 / (math.exp(min(-2.0 * x_lo, 700.0)) + 1.0)
    if missing > tolerance:
        raise ConfigurationError(
            f"mode grid misses {missing:.3g} of the photon spectral weight")
    spacing = np.gradient(w)
    f = wavepacket.amplitude(w) * np.sqrt(spacing)
    return f / np.linalg.norm(f)


def spectral_moment(amplitudes, frequencies, center: float, order: int) -> float:
    """sum_m |f_m|^2 (omega_m - center)**order for a normalized discrete photon."""
    p = np.abs(np.asarray(amplitudes)) ** 2
    return float(np.sum(p * (np.asarray(frequencies) - center) ** order))
