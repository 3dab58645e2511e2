"""
Complete link experiments built on the amplitude integrator.

Each ``run_*`` function assembles a model, integrates it once (twice for
the gate) and condenses the final state into a small result record.
Decoherence is never simulated; it enters as analytic exponential
factors on the closed-system results.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from . import theory
from .controls import (DEFAULT_SPAN, Control, ControlSchedule, SechWavepacket,
                       protocol_half_length, sech_spectrum, stirap_schedule,
                       transfer_schedule)
from .dynamics import (DEFAULT_ATOL, DEFAULT_RTOL, LinkModel, Trajectory,
                       build_model, channel_frequency, compensate_detuning,
                       integrate, lamb_shift, wavepacket_overlap)
from .dynamics.model import C1, C2, N_LOCAL, Q1, Q2
from .errors import ConfigurationError, DomainError, IntegratorError, ProbeInvalidError
from .nodes import NodeSpec
from .waveguide import (WaveguideSpec, central_group_velocity, dispersion_at,
                        free_spectral_range, mode_frequency, wavenumber)

SHORT_PHOTON = "short-photon"
LONG_PHOTON = "long-photon"
PROBE_LEAKAGE = 1e-2
PHASE_FLOOR = 1e-8
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


# --------------------------------------------------------------- inputs

@dataclass(frozen=True)
class DecoherenceSpec:
    """Qubit lifetime and optional Purcell parameters of the passive node."""

    t1: float
    g2_over_delta: Optional[float] = None
    gp_over_delta: Optional[float] = None

    def __post_init__(self):
        if not self.t1 > 0:
            raise ConfigurationError("T1 must be positive")
        for name in ("g2_over_delta", "gp_over_delta"):
            v = getattr(self, name)
            if v is not None and not 0 <= v < 1:
                raise ConfigurationError(f"{name} must lie in [0, 1)")

    def purcell_rate(self, kappa2: float) -> float:
        if not self.g2_over_delta:
            return 0.0
        return purcell_gamma(kappa2, self.g2_over_delta, self.gp_over_delta)


def link_nodes(spec: WaveguideSpec, kappa: float, kappa2: Optional[float] = None,
               off_resonant: bool = False, detuning: float = 0.0) -> Tuple[NodeSpec, NodeSpec]:
    """Two identical-frequency nodes at the central mode.

    ``off_resonant`` moves both nodes half a free spectral range up, between
    two link modes. ``detuning`` adds a further common offset.
    """
    w = channel_frequency(spec, detuning)
    if off_resonant:
        w += 0.5 * free_spectral_range(spec, w)
    k2 = kappa if kappa2 is None else kappa2
    return NodeSpec(w, w, kappa), NodeSpec(w, w, k2)


def regime(spec: WaveguideSpec, bandwidth: float) -> str:
    """Short-photon when the photon bandwidth exceeds the crossover value."""
    cross = theory.crossover_bandwidth(spec.length, central_group_velocity(spec))
    return SHORT_PHOTON if bandwidth > cross else LONG_PHOTON


def propagation_time(spec: WaveguideSpec) -> float:
    return spec.length / central_group_velocity(spec)


# --------------------------------------------------------------- state transfer

@dataclass
class TransferResult:
    """Outcome of a transfer from qubit 1 to qubit 2."""

    efficiency: float
    duration: float
    residuals: dict
    regime: str
    lamb_shifts: Tuple[float, float]
    compensated: bool
    norm_drift: float
    steps: int
    rejected: int
    evaluations: int
    trajectory: Optional[Trajectory] = field(default=None, repr=False)
    model: Optional[LinkModel] = field(default=None, repr=False)

    @property
    def infidelity(self) -> float:
        return 1.0 - self.efficiency

    def balance(self) -> float:
        """efficiency + residuals - 1 (zero for a closed system)."""
        return self.efficiency + sum(self.residuals.values()) - 1.0


def transfer_lamb_shifts(spec: WaveguideSpec, nodes) -> Tuple[float, float]:
    """Compensating qubit detunings for a transfer between ``nodes``."""
    n1, n2 = nodes
    return lamb_shift(spec, n1, partner=n2), lamb_shift(spec, n2, partner=n1)


def run_state_transfer(spec: WaveguideSpec, nodes, schedule: ControlSchedule,
                       compensate_lamb: bool = True, refine_lamb: bool = False,
                       rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                       sample_times=None, keep_trajectory: bool = False) -> TransferResult:
    """Integrate a transfer starting from q_1(-T) = 1 and report |q_2(T)|^2.

    With ``compensate_lamb`` each qubit is detuned by its Lamb shift once
    before the run. ``refine_lamb`` additionally searches the common
    detuning that maximizes the efficiency (golden section, +-25 %).
    """
    nodes = tuple(nodes)
    if any(n is None for n in nodes):
        raise ConfigurationError("a transfer needs both nodes")
    shifts = transfer_lamb_shifts(spec, nodes) if compensate_lamb else (0.0, 0.0)

    def run(s1, s2, keep):
        pair = (compensate_detuning(nodes[0], s1), compensate_detuning(nodes[1], s2))
        return _transfer(spec, pair, schedule, rtol, atol, sample_times, keep)

    if compensate_lamb and refine_lamb:
        ratio = shifts[1] / shifts[0] if shifts[0] else 1.0
        lo, hi = sorted((0.75 * shifts[0], 1.25 * shifts[0]))
        best = _golden_max(lambda s: run(s, ratio * s, False)[0].efficiency,
                           lo, hi, 1e-4 * abs(shifts[0]))
        shifts = (best, ratio * best)
    result, model = run(*shifts, keep_trajectory)
    result.lamb_shifts = shifts
    result.compensated = compensate_lamb
    return result


def run_stirap_transfer(spec: WaveguideSpec, nodes, g0: float, half_length: float,
                        compensate_lamb: bool = True, **kwargs) -> TransferResult:
    """Adiabatic transfer with counter-intuitive sine/cosine ramps."""
    return run_state_transfer(spec, nodes, stirap_schedule(g0, half_length),
                              compensate_lamb=compensate_lamb, **kwargs)


def _transfer(spec, nodes, schedule, rtol, atol, sample_times, keep):
    model = build_model(spec, nodes)
    y0 = np.zeros(model.dim, complex)
    y0[Q1] = 1.0
    try:
        tr = integrate(model, schedule, y0, rtol=rtol, atol=atol, sample_times=sample_times)
    except IntegratorError as exc:
        raise IntegratorError(f"{schedule.kind} run failed: {exc}", exc.time) from exc
    p = np.abs(tr.final) ** 2
    bandwidth = schedule.photon_bandwidth
    if not bandwidth > 0:
        bandwidth = min(n.kappa for n in nodes)
    result = TransferResult(
        efficiency=float(p[Q2]), duration=schedule.duration,
        residuals={"q1": float(p[Q1]), "c1": float(p[C1]), "c2": float(p[C2]),
                   "photon": float(p[N_LOCAL:].sum())},
        regime=regime(spec, bandwidth), lamb_shifts=(0.0, 0.0), compensated=False,
        norm_drift=tr.norm_drift, steps=tr.steps, rejected=tr.rejected,
        evaluations=tr.evaluations, trajectory=tr if keep else None,
        model=model if keep else None)
    return result, model


def emission_profile(result: TransferResult, schedule: ControlSchedule):
    """Emitted field sqrt(k1)|c_1(t)| and the target sech envelope.

    Needs a result produced with ``keep_trajectory=True`` and a dense
    ``sample_times`` grid. Returns
    ``(times, measured, target)``.
    """
    if result.trajectory is None:
        raise ConfigurationError("run the transfer with keep_trajectory=True")
    tr, model = result.trajectory, result.model
    if tr.times.size < 3:
        raise ConfigurationError("the trajectory has no interior samples; pass sample_times")
    kappa1 = model.nodes[0].kappa
    measured = math.sqrt(kappa1) * np.abs(tr.amplitude(C1))
    wp = SechWavepacket(0.0, schedule.photon_bandwidth)
    target = wp.temporal_amplitude(tr.times + 0.5 * schedule.delay)
    return tr.times, measured, target


def profile_error(times, measured, target) -> float:
    """Relative L2 distance between two sampled envelopes."""
    num = np.trapezoid((measured - target) ** 2, times)
    return float(math.sqrt(num / np.trapezoid(target ** 2, times)))


def decoherence_fold(efficiency: float, duration: float, t1: float) -> float:
    """|q_2(T)|^2 exp(-2T / T1)."""
    if not t1 > 0:
        raise DomainError("T1 must be positive")
    return efficiency * math.exp(-duration / t1)


# --------------------------------------------------------------- phase probe

def _passive_node(spec: WaveguideSpec, node2: NodeSpec, compensate_lamb: bool) -> NodeSpec:
    # move the bare cavity so its dressed line sits at node2.resonator
    if not compensate_lamb:
        return node2
    return node2.with_resonator(node2.resonator - lamb_shift(spec, node2))


def probe_time(spec: WaveguideSpec, m: int) -> float:
    """Local round-trip time 2 pi / (mode spacing) at mode ``m``."""
    spacing = 0.5 * (mode_frequency(spec, m + 1) - mode_frequency(spec, m - 1))
    return 2.0 * math.pi / spacing


def run_phase_probe(spec: WaveguideSpec, node2: NodeSpec, mode: int,
                    compensate_lamb: bool = True,
                    leakage_floor: float = PROBE_LEAKAGE,
                    rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> float:
    """Scattering phase picked up by a photon in link mode ``mode``.

    The mode is populated together with the steady-state response of the
    far cavity, then evolved for one local round trip with every qubit
    coupling off. The phase of the mode amplitude, with free evolution
    removed, is returned on the principal branch.

    Raises ``ProbeInvalidError`` when the mode population changes by more
    than ``leakage_floor``.
    """
    passive = _passive_node(spec, node2, compensate_lamb)
    model = build_model(spec, (None, passive))
    i = model.mode_index(mode)
    w = model.mode_freqs[i - N_LOCAL]
    line = node2.resonator - model.frame_frequency if compensate_lamb \
        else passive.resonator - model.frame_frequency
    y0 = np.zeros(model.dim, complex)
    y0[i] = 1.0
    y0[C2] = model.couplings[i - N_LOCAL, 1] / (w - line + 0.5j * node2.kappa)
    y0 /= np.linalg.norm(y0)
    T = probe_time(spec, mode)
    off = ControlSchedule(Control(), Control(), half_length=0.5 * T, kind="probe")
    tr = integrate(model, off, y0, t_span=(0.0, T), rtol=rtol, atol=atol)
    psi = tr.final[i]
    leakage = abs(abs(psi) ** 2 / abs(y0[i]) ** 2 - 1.0)
    if leakage > leakage_floor:
        raise ProbeInvalidError(
            f"mode {mode} population changed by {leakage:.3g} (floor {leakage_floor:g})")
    return float(np.angle(psi * np.exp(1j * w * T)))


def probe_phases(spec: WaveguideSpec, node2: NodeSpec, modes: Sequence[int],
                 **kwargs) -> np.ndarray:
    """``run_phase_probe`` over several modes; invalid probes give NaN."""
    out = np.full(len(modes), np.nan)
    for k, m in enumerate(modes):
        try:
            out[k] = run_phase_probe(spec, node2, int(m), **kwargs)
        except ProbeInvalidError:
            pass
    return out


# --------------------------------------------------------------- scattering

@dataclass
class ScatterResult:
    """A sech photon reflected once by the passive node."""

    phases: np.ndarray  # arg psi_m(T) (frame), NaN below the amplitude floor
    overlap: float  # |<xi_ref|psi(T)>|^2 from the simulation
    overlap_theory: float  # same overlap with the exact per-mode reflection phases
    overlap_predicted: float  # quadratic-phase leading order
    residual: float  # |c_2(T)|^2
    duration: float
    regime: str
    norm_drift: float
    warnings: Tuple[str, ...] = ()
    trajectory: Optional[Trajectory] = field(default=None, repr=False)

    @property
    def infidelity(self) -> float:
        return 1.0 - self.overlap


def round_trip_time(spec: WaveguideSpec, node2: NodeSpec, center: float) -> float:
    """2 t_p + phi'(center)."""
    return 2.0 * propagation_time(spec) + theory.phase_expansion(
        node2.resonator, node2.kappa, center).phi1


def scattering_reference(spec: WaveguideSpec, node2: NodeSpec, photon: SechWavepacket,
                         frequencies, amplitudes, T: float, frame: float) -> np.ndarray:
    """Undistorted reflected photon in the frame rotating at ``frame``.

    Linearized free phases about the photon center, the scattering phase
    at the center and its group delay.
    """
    wc = photon.center
    vg = dispersion_at(spec, wc).group_velocity
    kc = wavenumber(spec, wc)
    k = np.array([wavenumber(spec, w) for w in frequencies])
    linear = wc + vg * (k - kc)
    exp = theory.phase_expansion(node2.resonator, node2.kappa, wc)
    phase = -(linear - frame) * T + exp.phi0 + exp.phi1 * (linear - wc)
    return amplitudes * np.exp(1j * phase)


def run_wavepacket_scattering(spec: WaveguideSpec, node2: NodeSpec,
                              photon: SechWavepacket, duration: Optional[float] = None,
                              compensate_lamb: bool = True, tolerance: float = 1e-8,
                              rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                              sample_times=None, keep_trajectory: bool = False) -> ScatterResult:
    """Send a sech photon from the near end and let node 2 reflect it.

    The photon starts in the link (mode amplitudes from ``sech_spectrum``)
    with the far cavity empty. It is compared after ``duration`` (default
    one round trip ``2 t_p + phi'``) with the undistorted reference.
    """
    passive = _passive_node(spec, node2, compensate_lamb)
    model = build_model(spec, (None, passive))
    lab = model.mode_freqs + model.frame_frequency
    f = sech_spectrum(photon, lab, tolerance)
    T = round_trip_time(spec, node2, photon.center) if duration is None else duration
    notes = []
    tp = propagation_time(spec)
    if photon.temporal_width >= tp:
        msg = (f"photon width {photon.temporal_width:.3g} s does not fit in the "
               f"link (t_p = {tp:.3g} s)")
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)
    y0 = np.zeros(model.dim, complex)
    y0[N_LOCAL:] = f
    off = ControlSchedule(Control(), Control(), half_length=0.5 * T, kind="scatter")
    tr = integrate(model, off, y0, t_span=(0.0, T), rtol=rtol, atol=atol,
                   sample_times=sample_times)
    psi = tr.final[N_LOCAL:]
    ref = scattering_reference(spec, node2, photon, lab, f, T, model.frame_frequency)
    ideal = f * np.exp(-1j * model.mode_freqs * T) * np.exp(
        1j * theory.scattering_phase(lab, node2.resonator, node2.kappa))
    z_sim = wavepacket_overlap(ref, psi)
    z_th = wavepacket_overlap(ref, ideal)
    vg = central_group_velocity(spec)
    disp = dispersion_at(spec, photon.center)
    phi2 = theory.phase_expansion(node2.resonator, node2.kappa, photon.center).phi2
    budget = theory.scattering_budget(photon.bandwidth, 1.0, 2.0 * tp,
                                      disp.curvature, vg, phi2)
    phases = np.where(np.abs(psi) > PHASE_FLOOR, np.angle(psi), np.nan)
    return ScatterResult(phases, abs(z_sim) ** 2, abs(z_th) ** 2, budget.overlap,
                         float(abs(tr.final[C2]) ** 2), T,
                         regime(spec, photon.bandwidth), tr.norm_drift, tuple(notes),
                         tr if keep_trajectory else None)


def near_end_field(trajectory: Trajectory) -> np.ndarray:
    """Link field at the near end, sum_m psi_m(t), for every sample."""
    return trajectory.states[:, N_LOCAL:].sum(axis=1)


def return_peak(times, field) -> float:
    """Time of the field-modulus maximum, refined by a parabola through 3 samples."""
    a = np.abs(np.asarray(field))
    i = int(np.argmax(a))
    if i == 0 or i == a.size - 1:
        return float(times[i])
    t = np.asarray(times[i - 1:i + 2])
    c = np.polyfit(t - t[1], a[i - 1:i + 2], 2)
    return float(t[1] - c[1] / (2.0 * c[0]))


# --------------------------------------------------------------- controlled phase

@dataclass
class CPhaseResult:
    """Reabsorption gate: photon returns to qubit 1 with a qubit-2 dependent phase."""

    z0: complex
    z1: complex
    phase: float  # arg z1 - arg z0 on (0, 2 pi]
    fidelity: float
    fidelity_decohered: float
    chi: float
    duration: float
    norm_drift: float
    warnings: Tuple[str, ...] = ()

    @property
    def infidelity(self) -> float:
        return 1.0 - self.fidelity_decohered


def purcell_gamma(kappa2: float, g2_over_delta: float,
                  gp_over_delta: Optional[float] = None) -> float:
    """Purcell rate k2 (g2/D)^2, times (gp/D)^2 with a filter."""
    if not 0 <= g2_over_delta < 1 or (gp_over_delta is not None and not 0 < gp_over_delta < 1):
        raise DomainError("coupling ratios must lie in (0, 1)")
    rate = kappa2 * g2_over_delta ** 2
    return rate * gp_over_delta ** 2 if gp_over_delta is not None else rate


def run_cphase(spec: WaveguideSpec, nodes, schedule: ControlSchedule, chi: float,
               decoherence: Optional[DecoherenceSpec] = None,
               compensate_lamb: bool = True, rtol: float = DEFAULT_RTOL,
               atol: float = DEFAULT_ATOL) -> CPhaseResult:
    """Emit from qubit 1, reflect off the dispersively shifted cavity 2, reabsorb.

    Two runs with cavity 2 at Omega_R2 - chi (qubit 2 in 0) and
    Omega_R2 + chi (qubit 2 in 1); ``z_x = q_1(T)``.
    """
    n1, n2 = nodes
    if n1 is None or n2 is None:
        raise ConfigurationError("the gate needs both nodes")
    if compensate_lamb:
        n1 = compensate_detuning(n1, lamb_shift(spec, n1))
        n2 = _passive_node(spec, n2, True)
    z, drift = [], 0.0
    for sign in (-1.0, 1.0):
        model = build_model(spec, (n1, n2.with_resonator(n2.resonator + sign * chi)))
        y0 = np.zeros(model.dim, complex)
        y0[Q1] = 1.0
        tr = integrate(model, schedule, y0, rtol=rtol, atol=atol)
        z.append(complex(tr.final[Q1]))
        drift = max(drift, tr.norm_drift)
    z0, z1 = z
    phase = float(np.angle(z1) - np.angle(z0)) % (2.0 * math.pi)
    if phase == 0.0:
        phase = 2.0 * math.pi if abs(z0) and abs(z1) else 0.0
    F = theory.min_gate_fidelity(min(abs(z0), 1.0), min(abs(z1), 1.0), phase)
    Fd = F
    if decoherence is not None:
        gamma = decoherence.purcell_rate(n2.kappa)
        Fd = F * math.exp(-schedule.half_length * (2.0 / decoherence.t1 + gamma))
    return CPhaseResult(z0, z1, phase, F, Fd, chi, schedule.duration, drift,
                        schedule.warnings)


def optimize_chi(spec: WaveguideSpec, nodes, schedule: ControlSchedule,
                 window: Optional[Tuple[float, float]] = None, tolerance: Optional[float] = None,
                 decoherence: Optional[DecoherenceSpec] = None, grid: int = 7,
                 **kwargs) -> Tuple[float, CPhaseResult]:
    """Dispersive shift maximizing the gate fidelity.

    A coarse grid over ``window`` (default ``[k2/4, k2]``) brackets the
    best point; golden section then refines it to ``tolerance`` (default
    ``1e-3 k2``). If the grid maximum sits on the window edge the grid
    result is returned.
    """
    kappa2 = nodes[1].kappa
    lo, hi = window if window is not None else (0.25 * kappa2, kappa2)
    tol = 1e-3 * kappa2 if tolerance is None else tolerance
    cache = {}

    def fid(chi):
        if chi not in cache:
            cache[chi] = run_cphase(spec, nodes, schedule, chi, decoherence, **kwargs)
        return cache[chi].fidelity_decohered

    if hi - lo <= tol:
        chi = 0.5 * (lo + hi)
        fid(chi)
        return chi, cache[chi]
    xs = np.linspace(lo, hi, grid)
    vals = [fid(float(x)) for x in xs]
    i = int(np.argmax(vals))
    if i in (0, grid - 1):
        return float(xs[i]), cache[float(xs[i])]
    chi = _golden_max(fid, float(xs[i - 1]), float(xs[i + 1]), tol)
    best = max(cache, key=lambda c: cache[c].fidelity_decohered)
    return best, cache[best]


# --------------------------------------------------------------- gate transfer

def gate_transfer_fidelity(f_st: float, duration: float, t1: float, f23: float = 1.0) -> float:
    """Bound [F_st exp(-2T/T1)]^2 F_23 for a gate teleported by two transfers."""
    if not (0 <= f_st <= 1 and 0 <= f23 <= 1):
        raise DomainError("fidelities must lie in [0, 1]")
    if not (duration > 0 and t1 > 0):
        raise DomainError("times must be positive")
    return (f_st * math.exp(-duration / t1)) ** 2 * f23


@dataclass
class DurationOptimum:
    duration: float
    fidelity: float
    efficiency: float
    scanned: Tuple[Tuple[float, float], ...]  # (2T, F) for every evaluation


def optimize_duration(spec: WaveguideSpec, nodes, kappa_tilde: float, t1: float,
                      span_range: Tuple[float, float] = (2.0, DEFAULT_SPAN),
                      points: int = 8, f23: float = 1.0, compensate_lamb: bool = True,
                      tolerance: float = 1e-3) -> DurationOptimum:
    """Protocol length maximizing the gate-transfer bound.

    2T = t_p + s / kt with s scanned on a log grid over ``span_range``,
    then refined by golden section in log s to relative ``tolerance``.
    """
    n1, n2 = nodes
    tp = propagation_time(spec)
    cache = {}

    def evaluate(log_s):
        if log_s not in cache:
            s = math.exp(log_s)
            T = protocol_half_length(tp, kappa_tilde, s)
            sched = transfer_schedule(n1.kappa, n2.kappa, kappa_tilde, tp, half_length=T)
            res = run_state_transfer(spec, nodes, sched, compensate_lamb=compensate_lamb)
            eff = min(max(res.efficiency, 0.0), 1.0)
            cache[log_s] = (2.0 * T, gate_transfer_fidelity(eff, 2.0 * T, t1, f23), eff)
        return cache[log_s][1]

    grid = np.linspace(math.log(span_range[0]), math.log(span_range[1]), points)
    vals = [evaluate(float(x)) for x in grid]
    i = int(np.argmax(vals))
    if 0 < i < points - 1:
        _golden_max(evaluate, float(grid[i - 1]), float(grid[i + 1]), tolerance)
    best = max(cache, key=lambda k: cache[k][1])
    d, F, eff = cache[best]
    scanned = tuple(sorted((v[0], v[1]) for v in cache.values()))
    return DurationOptimum(d, F, eff, scanned)


# --------------------------------------------------------------- helpers

def _golden_max(fn: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Golden-section search for the maximum of a unimodal ``fn`` on [lo, hi]."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fn(d)
    return c if fc >= fd else d
