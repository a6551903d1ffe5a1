"""Time evolution of pulse sequences: deterministic density-matrix solver.

The dense path vectorizes rho and integrates the Liouvillian with an
embedded Dormand-Prince 5(4) pair.  Independent initial states, or one
state under a batch of scan detunings, evolve together as columns of a
single matrix so the sparse superoperator products are shared.

Segment compilation groups every time dependence into three kinds of
term: constant, beam-envelope scaled (e(t) or e(t)**2), and scan scaled
(one value per batch column).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .liouville import (diag_hamiltonian_superop, hamiltonian_superop,
                        lindblad_superop, trace_indices)
from .pulses import Segment
from .system import QuantumState

DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
DP_ERR = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
                   -17253 / 339200, 22 / 525, -1 / 40])


class IntegratorError(RuntimeError):
    """Raised when the stepper cannot proceed (step underflow, budget)."""

    def __init__(self, message, at_time=None):
        super().__init__(message)
        self.at_time = at_time


@dataclass(frozen=True)
class IntegratorConfig:
    """Stepper knobs shared by the dense and trajectory engines."""

    rtol: float = 1e-8
    atol: float = 1e-11
    first_step: float = 1e-9
    max_steps: int = 5_000_000
    fixed_step: float = 1e-9
    dense_cap: int = 4096
    min_step: float = 1e-18


@dataclass(frozen=True)
class ScanAxis:
    """Batch of static diagonal offsets: ``diag`` scaled per column."""

    diag: np.ndarray
    values: np.ndarray

    @property
    def n(self):
        return len(self.values)


@dataclass
class DenseResult:
    states: list
    n_steps: int
    wall_time: float
    trace_error: float
    hermiticity_error: float


# -- segment compilation -------------------------------------------------

def _segment_diagonal(system, segment):
    diag = system.static_diagonal().copy()
    for site, shifts in segment.detuning_offsets.items():
        diag += system.site_diagonal(site, shifts)
    return diag


def _drive_buckets(system, segment):
    """Group drive Hamiltonians by (envelope id, envelope power)."""
    buckets = {}
    for drive in segment.drives:
        coupling = system.scheme(drive.site).coupling(drive.coupling)
        key = (drive.envelope, coupling.envelope_power)
        h = system.coupling_hamiltonian(
            drive.site, drive.coupling, drive.scale, drive.phase_offset)
        buckets[key] = h if key not in buckets else buckets[key] + h
    return buckets


def _quadratic_shift_diags(system, segment):
    """Per-envelope intensity-following diagonal shifts (rad/s at peak)."""
    out = {}
    for env_id in segment.envelopes:
        diag = np.zeros(system.dim)
        hit = False
        for site in segment.illuminated_sites(env_id):
            shifts = system.scheme(site).quadratic_shifts.get(env_id)
            if shifts:
                diag += system.site_diagonal(site, shifts)
                hit = True
        if hit:
            out[env_id] = diag
    return out


def _active_envelope_jumps(system, segment, jumps):
    """Beam-gated collapse channels live only where the beam shines."""
    out = []
    for jump in jumps:
        if jump.envelope_id is None:
            continue
        if jump.envelope_id not in segment.envelopes:
            continue
        if jump.site in segment.illuminated_sites(jump.envelope_id):
            out.append(jump)
    return out


@dataclass
class _DenseSegment:
    duration: float
    s_const: sparse.csr_array
    env_terms: list
    s_scan: sparse.csr_array | None


def compile_dense_segment(system, segment, jumps, scan=None):
    s_const = diag_hamiltonian_superop(_segment_diagonal(system, segment))
    for jump in jumps:
        if jump.envelope_id is None:
            s_const = s_const + lindblad_superop(jump.matrix, jump.rate)

    buckets = {}
    for (env_id, power), h in _drive_buckets(system, segment).items():
        buckets[(env_id, power)] = hamiltonian_superop(h)
    for env_id, diag in _quadratic_shift_diags(system, segment).items():
        piece = diag_hamiltonian_superop(diag)
        key = (env_id, 2)
        buckets[key] = piece if key not in buckets else buckets[key] + piece
    for jump in _active_envelope_jumps(system, segment, jumps):
        piece = lindblad_superop(jump.matrix, jump.rate)
        key = (jump.envelope_id, 2)
        buckets[key] = piece if key not in buckets else buckets[key] + piece

    env_terms = [
        (segment.envelopes[env_id], power, sparse.csr_array(mat))
        for (env_id, power), mat in buckets.items()
    ]
    s_scan = None if scan is None else diag_hamiltonian_superop(scan.diag)
    return _DenseSegment(segment.duration, sparse.csr_array(s_const),
                         env_terms, s_scan)


def compile_idle_segment(system, duration, jumps, scan=None):
    """Free evolution: static Hamiltonian and always-on decay only."""
    seg = Segment(name="idle", start=0.0, duration=duration)
    return compile_dense_segment(system, seg, jumps, scan)


# -- adaptive stepper ----------------------------------------------------

class _AdaptiveState:
    """Step size and budget carried across segments of one run."""

    def __init__(self, config):
        self.h = config.first_step
        self.steps = 0
        self.config = config


def _integrate_dense_segment(seg, y, scan_values, adaptive, t_offset,
                             observer=None):
    cfg = adaptive.config

    def deriv(t_local, state):
        out = seg.s_const @ state
        for env, power, mat in seg.env_terms:
            e = env.value(t_local)
            if e != 0.0:
                out = out + (e ** power) * (mat @ state)
        if seg.s_scan is not None:
            out = out + (seg.s_scan @ state) * scan_values[None, :]
        return out

    t = 0.0
    h = min(adaptive.h, seg.duration)
    k1 = deriv(t, y)
    while t < seg.duration * (1.0 - 1e-15):
        h = min(h, seg.duration - t)
        if h < cfg.min_step:
            raise IntegratorError(
                f"step size underflow ({h:.3e} s) at t={t_offset + t:.3e} s",
                at_time=t_offset + t)
        ks = [k1]
        for i in range(1, 7):
            yi = y
            for a, k in zip(DP_A[i], ks):
                if a != 0.0:
                    yi = yi + (h * a) * k
            ks.append(deriv(t + DP_C[i] * h, yi))
        y5 = yi  # stage 7 state is the 5th-order solution (FSAL)
        err = np.zeros_like(y)
        for e, k in zip(DP_ERR, ks):
            if e != 0.0:
                err = err + (h * e) * k
        scale = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y5))
        enorm = float(np.max(np.abs(err) / scale))
        adaptive.steps += 1
        if adaptive.steps > cfg.max_steps:
            raise IntegratorError("step budget exceeded", at_time=t_offset + t)
        if enorm <= 1.0:
            t += h
            y = y5
            k1 = ks[6]
            if observer is not None:
                observer(t_offset + t, y)
            factor = 5.0 if enorm == 0.0 else min(
                5.0, max(0.2, 0.9 * enorm ** -0.2))
            h *= factor
        else:
            h *= max(0.2, 0.9 * enorm ** -0.2)
    adaptive.h = max(h, cfg.min_step)
    return y


def _apply_instant_dense(system, gate, y):
    u = system.instant_unitary(gate)
    d = system.dim
    out = np.empty_like(y)
    for c in range(y.shape[1]):
        rho = y[:, c].reshape(d, d)
        out[:, c] = (u @ (u @ rho.conj().T).conj().T).ravel()
    return out


def evolve_dense(states, system, sequence, config=None, scan=None,
                 observer=None):
    """Integrate the master equation for one or many initial states.

    ``states`` is a QuantumState or a list of them; with ``scan`` given,
    exactly one initial state evolves under every scan offset at once.
    Returns a :class:`DenseResult` whose ``states`` are density-matrix
    QuantumStates, one per batch column.
    """
    config = config or IntegratorConfig()
    if system.dim > config.dense_cap:
        raise IntegratorError(
            f"dimension {system.dim} above dense cap {config.dense_cap}")
    single = isinstance(states, QuantumState)
    state_list = [states] if single else list(states)
    if scan is not None and len(state_list) != 1:
        raise ValueError("scan batching requires exactly one initial state")

    d = system.dim
    if scan is not None:
        scan_values = np.asarray(scan.values, dtype=float)
        y = np.tile(state_list[0].density().ravel()[:, None], (1, scan.n))
        y = np.ascontiguousarray(y, dtype=complex)
    else:
        scan_values = np.zeros(len(state_list))
        y = np.stack([s.density().ravel() for s in state_list],
                     axis=1).astype(complex)

    jumps = system.jump_operators()
    adaptive = _AdaptiveState(config)
    started = time.perf_counter()
    cursor = 0.0
    for item in sequence.items:
        if isinstance(item, Segment):
            if item.start > cursor + 1e-15:
                idle = compile_idle_segment(
                    system, item.start - cursor, jumps, scan)
                y = _integrate_dense_segment(
                    idle, y, scan_values, adaptive, cursor, observer)
            seg = compile_dense_segment(system, item, jumps, scan)
            y = _integrate_dense_segment(
                seg, y, scan_values, adaptive, item.start, observer)
            cursor = item.stop
        else:
            if item.at > cursor + 1e-15:
                idle = compile_idle_segment(
                    system, item.at - cursor, jumps, scan)
                y = _integrate_dense_segment(
                    idle, y, scan_values, adaptive, cursor, observer)
                cursor = item.at
            y = _apply_instant_dense(system, item, y)
    if sequence.duration > cursor + 1e-15:
        idle = compile_idle_segment(
            system, sequence.duration - cursor, jumps, scan)
        y = _integrate_dense_segment(
            idle, y, scan_values, adaptive, cursor, observer)

    tr_idx = trace_indices(d)
    trace_err = float(np.max(np.abs(np.real(y[tr_idx, :].sum(axis=0)) - 1.0)))
    herm_err = 0.0
    out_states = []
    for c in range(y.shape[1]):
        rho = y[:, c].reshape(d, d)
        herm_err = max(herm_err, float(np.max(np.abs(rho - rho.conj().T))))
        out_states.append(QuantumState(system, rho))
    return DenseResult(
        states=out_states,
        n_steps=adaptive.steps,
        wall_time=time.perf_counter() - started,
        trace_error=trace_err,
        hermiticity_error=herm_err,
    )


# -- fixed-step Schrodinger pieces (trajectory engine) --------------------

@dataclass
class SchrodingerSegment:
    """Non-Hermitian effective evolution compiled for one segment.

    ``diag_const`` already contains -i*H_diag - gamma_const/2; env terms
    hold -i*H_drive matrices; ``env_diags`` hold complex diagonal pieces
    scaled by e(t)**2 (quadratic shifts and beam-gated decay).
    ``jump_channels`` lists (jump, envelope or None) active here.
    """

    duration: float
    diag_const: np.ndarray
    env_terms: list
    env_diags: list
    jump_channels: list


def compile_schrodinger_segment(system, segment, jumps):
    diag = -1j * _segment_diagonal(system, segment).astype(complex)
    channels = []
    for jump in jumps:
        if jump.envelope_id is None:
            ind = np.zeros(system.dim)
            ind[system.label_indices(jump.site, (jump.from_label,))] = 1.0
            diag = diag - 0.5 * jump.rate * ind
            channels.append((jump, None))

    env_terms = [
        (segment.envelopes[env_id], power, sparse.csr_array(-1j * h))
        for (env_id, power), h in _drive_buckets(system, segment).items()
    ]
    env_diag_map = {}
    for env_id, shift in _quadratic_shift_diags(system, segment).items():
        env_diag_map[env_id] = env_diag_map.get(env_id, 0) + (-1j) * shift
    for jump in _active_envelope_jumps(system, segment, jumps):
        ind = np.zeros(system.dim)
        ind[system.label_indices(jump.site, (jump.from_label,))] = 1.0
        env_diag_map[jump.envelope_id] = (
            env_diag_map.get(jump.envelope_id, 0) - 0.5 * jump.rate * ind)
        channels.append((jump, segment.envelopes[jump.envelope_id]))
    env_diags = [(segment.envelopes[env_id], np.asarray(vec, dtype=complex))
                 for env_id, vec in env_diag_map.items()]
    return SchrodingerSegment(segment.duration, diag, env_terms, env_diags,
                              channels)


def compile_idle_schrodinger(system, duration, jumps):
    seg = Segment(name="idle", start=0.0, duration=duration)
    return compile_schrodinger_segment(system, seg, jumps)


def schrodinger_deriv(seg, t_local, psi):
    out = seg.diag_const * psi
    for env, power, mat in seg.env_terms:
        e = env.value(t_local)
        if e != 0.0:
            out = out + (e ** power) * (mat @ psi)
    for env, vec in seg.env_diags:
        e = env.value(t_local)
        if e != 0.0:
            out = out + (e * e) * (vec * psi)
    return out


def rk4_step(seg, t_local, psi, h):
    k1 = schrodinger_deriv(seg, t_local, psi)
    k2 = schrodinger_deriv(seg, t_local + 0.5 * h, psi + (0.5 * h) * k1)
    k3 = schrodinger_deriv(seg, t_local + 0.5 * h, psi + (0.5 * h) * k2)
    k4 = schrodinger_deriv(seg, t_local + h, psi + h * k3)
    return psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
