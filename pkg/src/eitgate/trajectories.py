"""Quantum-trajectory unraveling of the master equation.

Fixed-step RK4 on the non-Hermitian effective Hamiltonian with
norm-based jump detection.  Two variance and cost reductions:

* The no-jump trajectory is integrated once (the root pass), recording
  the squared norm after every step plus periodic state checkpoints.
  Each trajectory reuses it up to its own first-jump threshold, so only
  the post-jump continuations cost fresh integration.
* First-jump thresholds are stratified, u_i = (i + v_i) / N, removing
  the binomial noise of how many trajectories jump at all.  Jumps after
  the first use ordinary exponential sampling.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .integrate import (IntegratorConfig, IntegratorError,
                        compile_idle_schrodinger,
                        compile_schrodinger_segment, rk4_step)
from .pulses import Segment

CHECKPOINT_STRIDE = 256


@dataclass
class TrajectoryResult:
    n_trajectories: int
    means: dict
    sems: dict
    mean_jumps: float
    n_resampled: int
    wall_time: float
    samples: dict | None = None


@dataclass
class _Entry:
    """One compiled timeline element: a segment grid or an instant gate."""

    kind: str           # "seg" or "gate"
    start: float
    compiled: object    # SchrodingerSegment or csr unitary
    n_steps: int = 0
    h: float = 0.0


def _segment_step(comp, duration, config):
    """Step count for a compiled segment, capped by its spectral scale.

    Fixed-step RK4 goes unstable once |generator|*h leaves its stability
    region; interaction-shifted diagonals (stacked Rydberg pairs) can
    dwarf the nominal step.  The bound sums the static diagonal with the
    peak-envelope drive and shift norms.
    """
    bound = float(np.max(np.abs(comp.diag_const))) if comp.diag_const.size \
        else 0.0
    for _env, _power, mat in comp.env_terms:
        bound += float(np.max(np.abs(mat).sum(axis=1)))
    for _env, vec in comp.env_diags:
        bound += float(np.max(np.abs(vec)))
    h = config.fixed_step
    if bound > 0.0:
        h = min(h, 0.5 / bound)
    n = max(1, int(np.ceil(duration / h)))
    return n, duration / n


def _compile_timeline(system, sequence, config):
    jumps = system.jump_operators()
    entries = []
    cursor = 0.0

    def add_idle(until):
        nonlocal cursor
        if until > cursor + 1e-15:
            dur = until - cursor
            comp = compile_idle_schrodinger(system, dur, jumps)
            n, h = _segment_step(comp, dur, config)
            entries.append(_Entry("seg", cursor, comp, n, h))
            cursor = until

    for item in sequence.items:
        if isinstance(item, Segment):
            add_idle(item.start)
            comp = compile_schrodinger_segment(system, item, jumps)
            n, h = _segment_step(comp, item.duration, config)
            entries.append(_Entry("seg", item.start, comp, n, h))
            cursor = item.stop
        else:
            add_idle(item.at)
            entries.append(_Entry("gate", item.at,
                                  system.instant_unitary(item)))
    add_idle(sequence.duration)
    return entries


class _RootPass:
    """No-jump trajectory with per-step norms and checkpoints."""

    def __init__(self, entries, psi0):
        self.entries = entries
        self.norm2 = []           # per segment entry: array of norms after steps
        self.checkpoints = {}     # (entry_idx, local_step) -> psi at step start
        psi = psi0.copy()
        for idx, entry in enumerate(entries):
            if entry.kind == "gate":
                self.norm2.append(None)
                self.checkpoints[(idx, 0)] = psi.copy()
                psi = entry.compiled @ psi
                continue
            norms = np.empty(entry.n_steps)
            for step in range(entry.n_steps):
                if step % CHECKPOINT_STRIDE == 0:
                    self.checkpoints[(idx, step)] = psi.copy()
                psi = rk4_step(entry.compiled, step * entry.h, psi, entry.h)
                norms[step] = float(np.real(np.vdot(psi, psi)))
            self.norm2.append(norms)
        self.final = psi

    def locate_crossing(self, u):
        """First (entry, step) whose post-step squared norm drops below u."""
        for idx, norms in enumerate(self.norm2):
            if norms is None:
                continue
            if norms[-1] < u:
                step = int(np.searchsorted(-norms, -u, side="right"))
                # norms decrease up to integrator noise; correct the
                # searchsorted guess so norms[step] < u <= norms[step-1]
                step = min(step, len(norms) - 1)
                while norms[step] >= u:
                    step += 1
                while step > 0 and norms[step - 1] < u:
                    step -= 1
                return idx, step
        return None

    def state_at(self, idx, step):
        """Reconstruct the no-jump state at the start of a given step."""
        base = (step // CHECKPOINT_STRIDE) * CHECKPOINT_STRIDE
        psi = self.checkpoints[(idx, base)].copy()
        entry = self.entries[idx]
        for s in range(base, step):
            psi = rk4_step(entry.compiled, s * entry.h, psi, entry.h)
        return psi


def _channel_rates(compiled, t_local):
    """Instantaneous rate of every jump channel of a compiled segment."""
    rates = []
    for jump, env in compiled.jump_channels:
        if env is None:
            rates.append(jump.rate)
        else:
            e = env.value(t_local)
            rates.append(jump.rate * e * e)
    return np.asarray(rates)


def _bisect_jump_time(entry, psi_start, t_local, u, iters=30):
    """Fraction of a step at which the squared norm crosses u."""
    lo, hi = 0.0, entry.h
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        psi = rk4_step(entry.compiled, t_local, psi_start, mid)
        if float(np.real(np.vdot(psi, psi))) < u:
            hi = mid
        else:
            lo = mid
    psi = rk4_step(entry.compiled, t_local, psi_start, hi)
    return hi, psi


def _apply_jump(compiled, psi, t_local, rng):
    rates = _channel_rates(compiled, t_local)
    weights = np.empty(len(rates))
    candidates = []
    for c, (jump, _env) in enumerate(compiled.jump_channels):
        v = jump.matrix @ psi
        w = rates[c] * float(np.real(np.vdot(v, v)))
        weights[c] = w
        candidates.append(v)
    total = float(weights.sum())
    if total <= 0.0 or not np.isfinite(total):
        return None
    pick = int(rng.choice(len(weights), p=weights / total))
    v = candidates[pick]
    return v / np.linalg.norm(v)


def _continue_trajectory(entries, idx, step, frac_state, t_frac, rng):
    """Ordinary MCWF from just after a jump to the end of the timeline.

    Returns (normalized final state, extra jump count) or None when the
    norm collapses numerically and the trajectory must be resampled.
    """
    psi = frac_state
    jumps = 0
    u = rng.random()
    norm_ref = float(np.real(np.vdot(psi, psi)))

    def crossed(n2):
        return n2 < u * norm_ref

    cur = idx
    local = step
    t_local = t_frac
    while cur < len(entries):
        entry = entries[cur]
        if entry.kind == "gate":
            psi = entry.compiled @ psi
            cur += 1
            local = 0
            t_local = 0.0
            continue
        while local < entry.n_steps:
            target = (local + 1) * entry.h
            h = target - t_local
            nxt = rk4_step(entry.compiled, t_local, psi, h)
            n2 = float(np.real(np.vdot(nxt, nxt)))
            if crossed(n2):
                tj, at_jump = _bisect_jump_time_from(
                    entry, psi, t_local, u * norm_ref, h)
                jumped = _apply_jump(entry.compiled, at_jump, t_local + tj, rng)
                if jumped is None:
                    return None
                psi = jumped
                jumps += 1
                u = rng.random()
                norm_ref = 1.0
                t_local = t_local + tj
                continue
            psi = nxt
            t_local = target
            local += 1
        cur += 1
        local = 0
        t_local = 0.0
    norm = np.linalg.norm(psi)
    if norm < 1e-12:
        return None
    return psi / norm, jumps


def _bisect_jump_time_from(entry, psi_start, t_local, threshold, h, iters=30):
    lo, hi = 0.0, h
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        psi = rk4_step(entry.compiled, t_local, psi_start, mid)
        if float(np.real(np.vdot(psi, psi))) < threshold:
            hi = mid
        else:
            lo = mid
    return hi, rk4_step(entry.compiled, t_local, psi_start, hi)


def default_thread_count():
    value = os.environ.get("EITGATE_THREADS", "")
    try:
        n = int(value)
    except ValueError:
        return 1
    return max(1, n)


def evolve_trajectories(state, system, sequence, config=None,
                        n_trajectories=1000, seed=0, observables=None,
                        threads=None, keep_samples=False):
    """Monte Carlo wave-function average of per-trajectory observables.

    ``observables`` maps names to callables taking the normalized final
    state vector; means and standard errors of each are returned.  The
    seed fixes every random stream; results are independent of the
    thread count.
    """
    if state.is_density:
        raise ValueError("trajectory engine needs a pure initial state")
    if not observables:
        raise ValueError("provide at least one observable")
    config = config or IntegratorConfig()
    if threads is None:
        threads = default_thread_count()

    entries = _compile_timeline(system, sequence, config)
    psi0 = state.data / np.linalg.norm(state.data)
    started = time.perf_counter()
    root = _RootPass(entries, psi0)
    root_final = root.final / np.linalg.norm(root.final)

    master = np.random.SeedSequence(seed)
    strat = np.random.Generator(np.random.Philox(master.spawn(1)[0]))
    v = strat.random(n_trajectories)
    thresholds = (np.arange(n_trajectories) + v) / n_trajectories

    names = list(observables)
    values = np.empty((n_trajectories, len(names)), dtype=complex)
    jump_counts = np.zeros(n_trajectories)
    resample_counts = np.zeros(n_trajectories, dtype=int)

    def run_one(i):
        u = thresholds[i]
        hit = root.locate_crossing(u)
        if hit is None:
            final = root_final
            jump_counts[i] = 0.0
        else:
            idx, step = hit
            entry = entries[idx]
            psi_start = root.state_at(idx, step)
            for attempt in range(8):
                rng = np.random.Generator(np.random.Philox(
                    np.random.SeedSequence(entropy=master.entropy,
                                           spawn_key=(100 + i, attempt))))
                tj, at_jump = _bisect_jump_time(
                    entry, psi_start, step * entry.h, u)
                jumped = _apply_jump(
                    entry.compiled, at_jump, step * entry.h + tj, rng)
                if jumped is None:
                    resample_counts[i] += 1
                    continue
                done = _continue_trajectory(
                    entries, idx, step, jumped, step * entry.h + tj, rng)
                if done is None:
                    resample_counts[i] += 1
                    continue
                final, extra = done
                jump_counts[i] = 1.0 + extra
                break
            else:
                raise IntegratorError(
                    f"trajectory {i} failed to renormalize after 8 attempts")
        for k, name in enumerate(names):
            values[i, k] = observables[name](final)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_one, range(n_trajectories)))
    else:
        for i in range(n_trajectories):
            run_one(i)

    means = {}
    sems = {}
    for k, name in enumerate(names):
        col = values[:, k]
        if np.max(np.abs(col.imag)) < 1e-12:
            col = col.real
        means[name] = complex(col.mean()) if np.iscomplexobj(col) \
            else float(col.mean())
        sems[name] = float(np.std(col) / np.sqrt(n_trajectories))
    return TrajectoryResult(
        n_trajectories=n_trajectories,
        means=means,
        sems=sems,
        mean_jumps=float(jump_counts.mean()),
        n_resampled=int(resample_counts.sum()),
        wall_time=time.perf_counter() - started,
        samples={n: values[:, k].copy() for k, n in enumerate(names)}
        if keep_samples else None,
    )
