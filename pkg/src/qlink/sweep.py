"""
Experiment dispatch, parallel sweeps and dataset emission.

Each experiment kind maps one parameter point (internal units) to a fixed
set of output columns. ``run_sweep`` evaluates the Cartesian product of a
config's axes on a process pool and returns records in axis order.
``emit`` writes them as CSV or JSON lines plus a sidecar metadata file.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import __version__, protocols, theory
from .config import PARAMETERS, SweepConfig, to_report
from .constants import TWO_PI
from .controls import (SechWavepacket, reabsorption_schedule, stirap_schedule,
                       transfer_schedule)
from .dynamics import lamb_shift
from .errors import ConfigurationError, QLinkError
from .nodes import NodeSpec
from .waveguide import (WaveguideSpec, central_group_velocity, dispersion_at,
                        free_spectral_range, mode_frequency)

SIGNIFICANT_DIGITS = 12
MHZ = TWO_PI * 1e6
STIRAP_T1 = 11.5e-6

# output names never repeat an input column
OUTPUTS: Dict[str, Tuple[str, ...]] = {
    "modes": ("central_mode", "window_lo", "window_hi", "mode_count", "fsr_mhz",
              "group_velocity", "curvature", "propagation_time_s"),
    "lamb": ("lamb_shift_mhz", "lamb_over_kappa", "dark_lamb_over_kappa"),
    "transfer": ("efficiency", "infidelity", "folded_infidelity", "protocol_duration_s",
                 "residual_q1", "residual_c1", "residual_c2", "residual_photon",
                 "lamb1_mhz", "lamb2_mhz"),
    "stirap-compare": ("protocol_duration_s", "ps_infidelity", "stirap_infidelity",
                       "ps_folded_infidelity", "stirap_folded_infidelity"),
    "phase-probe": ("mode", "detuning_mhz", "phase", "phase_theory", "phase_error"),
    "scatter": ("infidelity", "theory_infidelity", "predicted_infidelity",
                "residual_c2", "protocol_duration_s"),
    "cphase": ("chi_used_mhz", "phase", "phase_theory", "z0_abs", "z1_abs",
               "fidelity", "fidelity_decohered"),
    "gate-transfer": ("naive_duration_s", "naive_fidelity", "optimal_duration_s",
                      "optimal_fidelity", "optimal_efficiency"),
    "dressed": ("dressed_offset_mhz", "weight_asymmetry", "stark_infidelity"),
}
STATS = ("regime", "norm_drift", "steps", "evaluations")
TRAILER = ("error", "version", "config_hash")


@dataclass(frozen=True)
class ResultRecord:
    """One sweep point: inputs, outputs and bookkeeping, in column order."""

    values: Dict[str, object]
    wall_time: float

    @property
    def failed(self) -> bool:
        return bool(self.values.get("error"))


def columns(experiment: str) -> Tuple[str, ...]:
    """Fixed column set of an experiment kind."""
    inputs = tuple(spec.column(name) for name, spec in PARAMETERS.items())
    return inputs + OUTPUTS[experiment] + STATS + TRAILER


# --------------------------------------------------------------- experiments

@dataclass
class _Point:
    p: Dict[str, object]

    def __getattr__(self, name):
        try:
            return self.p[name]
        except KeyError:
            raise AttributeError(name) from None

    @property
    def spec(self) -> WaveguideSpec:
        return WaveguideSpec(self.length, self.broad_wall,
                             center_frequency=self.center_frequency)

    @property
    def kappa_2(self) -> float:
        return self.kappa if self.kappa2 is None else self.kappa2

    @property
    def bandwidth(self) -> float:
        return self.kappa / self.eta

    @property
    def tolerances(self) -> Dict[str, float]:
        return {"rtol": self.tolerance, "atol": 1e-2 * self.tolerance}

    def nodes(self, spec):
        return protocols.link_nodes(spec, self.kappa, self.kappa_2,
                                    off_resonant=not self.resonant)


def _modes(pt: _Point) -> dict:
    spec = pt.spec
    lo, hi = spec.window
    wc = mode_frequency(spec, spec.central_mode)
    disp = dispersion_at(spec, wc)
    return {"central_mode": spec.central_mode, "window_lo": lo, "window_hi": hi,
            "mode_count": hi - lo + 1, "fsr_mhz": free_spectral_range(spec, wc) / MHZ,
            "group_velocity": disp.group_velocity, "curvature": disp.curvature,
            "propagation_time_s": protocols.propagation_time(spec)}


def _lamb(pt: _Point) -> dict:
    spec = pt.spec
    n1, n2 = pt.nodes(spec)
    single = lamb_shift(spec, n1, method=pt.method)
    dark = lamb_shift(spec, n1, partner=n2)
    return {"lamb_shift_mhz": single / MHZ, "lamb_over_kappa": single / pt.kappa,
            "dark_lamb_over_kappa": dark / pt.kappa,
            "regime": protocols.regime(spec, pt.bandwidth)}


def _transfer(pt: _Point) -> dict:
    spec = pt.spec
    nodes = pt.nodes(spec)
    tp = protocols.propagation_time(spec)
    sched = transfer_schedule(pt.kappa, pt.kappa_2, pt.bandwidth, tp, pt.span)
    r = protocols.run_state_transfer(spec, nodes, sched,
                                     compensate_lamb=pt.lamb_compensation, **pt.tolerances)
    folded = math.nan if pt.t1 is None else \
        1.0 - protocols.decoherence_fold(r.efficiency, r.duration, pt.t1)
    return {"efficiency": r.efficiency, "infidelity": r.infidelity,
            "folded_infidelity": folded, "protocol_duration_s": r.duration,
            **{f"residual_{k}": v for k, v in r.residuals.items()},
            "lamb1_mhz": r.lamb_shifts[0] / MHZ, "lamb2_mhz": r.lamb_shifts[1] / MHZ,
            **_stats(r, r.regime)}


def _stirap_compare(pt: _Point) -> dict:
    spec = pt.spec
    nodes = pt.nodes(spec)
    tp = protocols.propagation_time(spec)
    duration = tp + pt.span / pt.kappa if pt.duration is None else pt.duration
    g0 = 0.5 * pt.kappa if pt.g0 is None else pt.g0
    t1 = STIRAP_T1 if pt.t1 is None else pt.t1
    ps = protocols.run_state_transfer(
        spec, nodes, transfer_schedule(pt.kappa, pt.kappa_2, pt.kappa, tp,
                                       half_length=0.5 * duration),
        compensate_lamb=pt.lamb_compensation, **pt.tolerances)
    st = protocols.run_state_transfer(spec, nodes, stirap_schedule(g0, 0.5 * duration),
                                      compensate_lamb=pt.lamb_compensation, **pt.tolerances)
    out = {"protocol_duration_s": duration, "ps_infidelity": ps.infidelity,
           "stirap_infidelity": st.infidelity,
           "ps_folded_infidelity": 1.0 - protocols.decoherence_fold(ps.efficiency, duration, t1),
           "stirap_folded_infidelity": 1.0 - protocols.decoherence_fold(st.efficiency, duration, t1)}
    stats = _stats(st, ps.regime)
    stats["norm_drift"] = max(ps.norm_drift, st.norm_drift)
    stats["steps"] = ps.steps + st.steps
    stats["evaluations"] = ps.evaluations + st.evaluations
    return {**out, **stats}


def _phase_probe(pt: _Point) -> dict:
    spec = pt.spec
    node2 = pt.nodes(spec)[1]
    mode = spec.central_mode + pt.mode_offset
    phase = protocols.run_phase_probe(spec, node2, mode,
                                      compensate_lamb=pt.lamb_compensation, **pt.tolerances)
    wm = mode_frequency(spec, mode)
    expected = theory.scattering_phase(wm, node2.resonator, node2.kappa)
    error = (phase - expected + math.pi) % TWO_PI - math.pi
    return {"mode": mode, "detuning_mhz": (wm - node2.resonator) / MHZ, "phase": phase,
            "phase_theory": expected, "phase_error": error,
            "regime": protocols.regime(spec, pt.bandwidth)}


def _scatter(pt: _Point) -> dict:
    spec = pt.spec
    wc = mode_frequency(spec, spec.central_mode)
    resonator = wc - pt.detuning_ratio * pt.kappa_2
    node2 = NodeSpec(resonator, resonator, pt.kappa_2)
    photon = SechWavepacket(wc, pt.bandwidth)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r = protocols.run_wavepacket_scattering(
            spec, node2, photon, compensate_lamb=pt.lamb_compensation, **pt.tolerances)
    return {"infidelity": r.infidelity, "theory_infidelity": 1.0 - r.overlap_theory,
            "predicted_infidelity": 1.0 - r.overlap_predicted, "residual_c2": r.residual,
            "protocol_duration_s": r.duration, "regime": r.regime, "norm_drift": r.norm_drift}


def _decoherence(pt: _Point) -> Optional[protocols.DecoherenceSpec]:
    if pt.t1 is None:
        return None
    return protocols.DecoherenceSpec(pt.t1, pt.g2_over_delta, pt.gp_over_delta)


def _cphase(pt: _Point) -> dict:
    spec = pt.spec
    nodes = pt.nodes(spec)
    vg = central_group_velocity(spec)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sched = reabsorption_schedule(pt.bandwidth, pt.kappa, spec.length, vg, pt.span)
    kw = dict(decoherence=_decoherence(pt), compensate_lamb=pt.lamb_compensation,
              **pt.tolerances)
    if pt.chi is None:
        _, r = protocols.optimize_chi(spec, nodes, sched, **kw)
    else:
        r = protocols.run_cphase(spec, nodes, sched, pt.chi, **kw)
    return {"chi_used_mhz": r.chi / MHZ, "phase": r.phase,
            "phase_theory": theory.phase_correction(pt.kappa, pt.kappa_2, pt.eta),
            "z0_abs": abs(r.z0), "z1_abs": abs(r.z1), "fidelity": r.fidelity,
            "fidelity_decohered": r.fidelity_decohered,
            "regime": protocols.regime(spec, pt.bandwidth), "norm_drift": r.norm_drift}


def _gate_transfer(pt: _Point) -> dict:
    if pt.t1 is None:
        raise ConfigurationError("gate-transfer needs t1")
    spec = pt.spec
    nodes = pt.nodes(spec)
    tp = protocols.propagation_time(spec)
    sched = transfer_schedule(pt.kappa, pt.kappa_2, pt.bandwidth, tp, pt.span)
    naive = protocols.run_state_transfer(spec, nodes, sched,
                                         compensate_lamb=pt.lamb_compensation, **pt.tolerances)
    f_naive = protocols.gate_transfer_fidelity(min(max(naive.efficiency, 0.0), 1.0),
                                               naive.duration, pt.t1, pt.f23)
    best = protocols.optimize_duration(spec, nodes, pt.bandwidth, pt.t1, f23=pt.f23,
                                       compensate_lamb=pt.lamb_compensation)
    return {"naive_duration_s": naive.duration, "naive_fidelity": f_naive,
            "optimal_duration_s": best.duration, "optimal_fidelity": best.fidelity,
            "optimal_efficiency": best.efficiency, **_stats(naive, naive.regime)}


def _dressed(pt: _Point) -> dict:
    spec = pt.spec
    nodes = pt.nodes(spec)
    ds = theory.dressed_spectrum(spec, nodes)
    return {"dressed_offset_mhz": (ds.center_frequency - nodes[0].resonator) / MHZ,
            "weight_asymmetry": ds.weight_asymmetry(),
            "stark_infidelity": theory.stark_infidelity(pt.bandwidth, ds.center_frequency),
            "regime": protocols.regime(spec, pt.bandwidth)}


def _stats(result, regime) -> dict:
    return {"regime": regime, "norm_drift": result.norm_drift,
            "steps": result.steps, "evaluations": result.evaluations}


EXPERIMENT_RUNNERS: Dict[str, Callable[[_Point], dict]] = {
    "modes": _modes, "lamb": _lamb, "transfer": _transfer,
    "stirap-compare": _stirap_compare, "phase-probe": _phase_probe,
    "scatter": _scatter, "cphase": _cphase, "gate-transfer": _gate_transfer,
    "dressed": _dressed,
}


def run_point(experiment: str, point: Dict[str, object]) -> Tuple[dict, Optional[str], float]:
    """Evaluate one point; returns ``(outputs, error message or None, wall time)``."""
    start = time.perf_counter()
    try:
        out = EXPERIMENT_RUNNERS[experiment](_Point(dict(point)))
        err = None
    except (QLinkError, ValueError, ArithmeticError) as exc:
        out, err = {}, f"{type(exc).__name__}: {exc}"
    return out, err, time.perf_counter() - start


def _task(args):
    return run_point(*args)


# --------------------------------------------------------------- sweeps

def run_sweep(config: SweepConfig, workers: Optional[int] = None) -> List[ResultRecord]:
    """Evaluate every point of ``config`` and return records in axis order.

    Failed points keep their inputs and carry the error message; output
    cells are NaN. Raises nothing at sweep level, callers decide what an
    all-failed sweep means.
    """
    points = config.points()
    n = config.workers if workers is None else workers
    tasks = [(config.experiment, p) for p in points]
    if n > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=min(n, len(points))) as pool:
            results = list(pool.map(_task, tasks, chunksize=1))
    else:
        results = [_task(t) for t in tasks]
    digest = config.digest()
    records = []
    for point, (out, err, wall) in zip(points, results):
        records.append(ResultRecord(_row(config.experiment, point, out, err, digest), wall))
    return records


def _row(experiment, point, outputs, error, digest) -> Dict[str, object]:
    row: Dict[str, object] = {}
    for name, spec in PARAMETERS.items():
        row[spec.column(name)] = to_report(name, point.get(name))
    for name in OUTPUTS[experiment] + STATS:
        row[name] = outputs.get(name, math.nan)
    for name in ("steps", "evaluations"):
        if error is None and name not in outputs:
            row[name] = 0
    if error is None and "regime" not in outputs:
        row["regime"] = "none"
    if error is None and "norm_drift" not in outputs:
        row["norm_drift"] = 0.0
    row["error"] = error or ""
    row["version"] = __version__
    row["config_hash"] = digest
    return row


# --------------------------------------------------------------- emission

def format_value(value) -> str:
    """Cell text: 12 significant digits for floats, ``nan`` for missing."""
    if value is None:
        return "nan"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, f".{SIGNIFICANT_DIGITS}g")
    return str(value)


def _json_value(value):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return None
    if isinstance(value, float):
        return float(format(value, f".{SIGNIFICANT_DIGITS}g"))
    return value


def render(records: Sequence[ResultRecord], fmt: str = "csv") -> str:
    """Dataset text for ``records`` (CSV with header or JSON lines)."""
    if not records:
        raise ConfigurationError("nothing to emit")
    cols = list(records[0].values)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for r in records:
            writer.writerow([format_value(r.values[c]) for c in cols])
        return buf.getvalue()
    if fmt == "jsonl":
        return "".join(json.dumps({c: _json_value(r.values[c]) for c in cols},
                                  ensure_ascii=False) + "\n" for r in records)
    raise ConfigurationError(f"unknown format {fmt!r}")


def metadata(config: SweepConfig, records: Sequence[ResultRecord], fmt: str) -> dict:
    """Sidecar content: resolved config, columns and per-point wall times."""
    return {"version": __version__, "config_hash": config.digest(),
            "format": fmt, "config": config.resolved(),
            "columns": list(records[0].values) if records else [],
            "points": len(records), "failed": sum(r.failed for r in records),
            "wall_time_s": [round(r.wall_time, 6) for r in records]}


def emit(records: Sequence[ResultRecord], fmt: str, path: Optional[str],
         config: Optional[SweepConfig] = None, stream=None) -> None:
    """Write the dataset to ``path`` (or ``stream``) plus ``<path>.meta.json``.

    The dataset bytes depend only on the records' values, so repeated runs
    and different worker counts give identical files. Wall-clock times go
    to the sidecar only.
    """
    text = render(records, fmt)
    if path is None:
        (stream if stream is not None else sys.stdout).write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    if config is not None:
        with open(sidecar_path(path), "w", encoding="utf-8") as fh:
            json.dump(metadata(config, records, fmt), fh, indent=2, sort_keys=True)
            fh.write("\n")


def sidecar_path(path: str) -> str:
    return os.fspath(path) + ".meta.json"
