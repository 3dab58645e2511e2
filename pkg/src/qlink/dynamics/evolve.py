from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..controls import ControlSchedule
from ..errors import ConfigurationError, DomainError, IntegratorError
from . import _kernel
from .model import C1, C2, N_LOCAL, Q1, Q2, LinkModel

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
METHODS = {"dop853": _kernel.DOP853, "rk45": _kernel.RK45}


@dataclass
class AmplitudeState:
    """Amplitudes (q1, q2, c1, c2, psi_m) at time ``t`` in a rotating frame."""

    q: np.ndarray
    c: np.ndarray
    psi: np.ndarray
    frame_frequency: float
    t: float = 0.0

    @classmethod
    def from_vector(cls, y, frame_frequency, t=0.0):
        y = np.asarray(y, dtype=complex)
        return cls(y[Q1:Q2 + 1].copy(), y[C1:C2 + 1].copy(), y[N_LOCAL:].copy(),
                   frame_frequency, t)

    @classmethod
    def excited_qubit(cls, model: LinkModel, j: int = 1, t: float = 0.0):
        y = np.zeros(model.dim, complex)
        y[Q1 if j == 1 else Q2] = 1.0
        return cls.from_vector(y, model.frame_frequency, t)

    def vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.c, self.psi]).astype(complex)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.vector()) ** 2))


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray = field(repr=False)  # (n_samples, dim)
    frame_frequency: float
    steps: int
    rejected: int
    evaluations: int
    norm_drift: float  # max |N(t) - N(t0)| over every accepted step

    def __len__(self):
        return self.times.size

    def state(self, i: int) -> AmplitudeState:
        return AmplitudeState.from_vector(self.states[i], self.frame_frequency,
                                          float(self.times[i]))

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def amplitude(self, slot: int) -> np.ndarray:
        return self.states[:, slot]

    def populations(self) -> np.ndarray:
        return np.abs(self.states) ** 2

    def norms(self) -> np.ndarray:
        return np.sum(np.abs(self.states) ** 2, axis=1)


def derivative(state: AmplitudeState, controls: ControlSchedule,
               model: LinkModel) -> np.ndarray:
    """Time derivative of the amplitude vector (frame-relative equations)."""
    y = state.vector()
    if y.size != model.dim:
        raise ConfigurationError(f"state has {y.size} amplitudes, model needs {model.dim}")
    t = state.t
    a, b = controls.g1(t), controls.g2(t)
    q, c, psi = y[:2], y[2:4], y[N_LOCAL:]
    G = model.couplings
    dq = model.qubit_freqs * q + np.array([a * c[0], b * c[1]])
    dc = model.resonator_freqs * c + G.T @ psi + np.array([a * q[0], b * q[1]])
    dpsi = model.mode_freqs * psi + G @ c
    return -1j * np.concatenate([dq, dc, dpsi])


def integrate(model: LinkModel, controls: ControlSchedule, y0,
              t_span=None, rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
              sample_times=None, method: str = "dop853",
              max_steps: int = 50_000_000, first_step: float = 0.0) -> Trajectory:
    """Adaptive embedded Runge-Kutta integration of the link equations.

    ``sample_times`` are hit exactly; the first and last samples are always
    the window endpoints.
    """
    if not (rtol > 0 and atol > 0):
        raise DomainError("tolerances must be positive")
    t0, t1 = controls.t_span if t_span is None else (float(t_span[0]), float(t_span[1]))
    if not t1 > t0:
        raise DomainError("empty time window")
    if isinstance(y0, AmplitudeState):
        y0 = y0.vector()
    y0 = np.ascontiguousarray(y0, dtype=np.complex128)
    if y0.size != model.dim:
        raise ConfigurationError(f"initial state has {y0.size} amplitudes, model needs {model.dim}")
    samples = np.array([t0, t1]) if sample_times is None else np.asarray(sample_times, float)
    samples = np.unique(np.concatenate([[t0, t1], samples[(samples > t0) & (samples < t1)]]))
    n_stages, A, B, C, E5, E3, order = _kernel.TABLEAUX[METHODS[method]]
    out, stats, status, fail_time = _kernel.integrate_kernel(
        y0, t0, t1, samples, rtol, atol, first_step, max_steps,
        n_stages, A, B, C, E5, E3, order, method == "dop853",
        model.qubit_freqs, model.resonator_freqs,
        np.ascontiguousarray(model.mode_freqs), np.ascontiguousarray(model.couplings),
        controls.packed())
    if status == 1:
        raise IntegratorError(f"step size underflow at t = {fail_time:.6g} s", fail_time)
    if status == 2:
        raise IntegratorError(f"step budget exhausted at t = {fail_time:.6g} s", fail_time)
    return Trajectory(samples, out, model.frame_frequency, int(stats[0]),
                      int(stats[1]), int(stats[2]), float(stats[3]))


def wavepacket_overlap(a, b) -> complex:
    """Inner product sum_m conj(a_m) b_m of two mode-amplitude vectors."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ConfigurationError(f"mode windows differ: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))
