"""Detection model: blow-away patterns, loss correction, parity signals.

Two single-shot readout rules, applied per atom:

* rule A (state readout): the atom is detected iff it reads out in the
  "0" bucket; a "1" atom is expelled and leaked or lost atoms were never
  there to fluoresce.
* rule B (presence readout): the atom is detected iff it sits in either
  clock bucket; only leakage and loss count as absent.

Patterns are tuples of booleans, one per atom, True meaning detected.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .pulses import SubspaceRotation


def _bucket_arrays(system):
    """Per-atom maps: local level index -> bucket in {'0', '1', 'x'}."""
    out = []
    for scheme in system.schemes:
        buckets = []
        for label in scheme.labels():
            b = scheme.level(label).readout_bucket
            buckets.append(b if b in ("0", "1") else "x")
        out.append(buckets)
    return out


def _joint_bucket_populations(state):
    """Probability of every joint bucket assignment, e.g. ('0','x')."""
    system = state.system
    pops = state.populations()
    buckets = _bucket_arrays(system)
    table = {}
    for index, p in enumerate(pops):
        labels_idx = []
        rem = index
        for dim in reversed(system.dims):
            rem, k = divmod(rem, dim)
            labels_idx.append(k)
        labels_idx.reverse()
        key = tuple(buckets[a][k] for a, k in enumerate(labels_idx))
        table[key] = table.get(key, 0.0) + float(p)
    return table


@dataclass(frozen=True)
class OutcomeDistribution:
    """Detection-pattern probabilities under both readout rules."""

    probs_a: dict
    probs_b: dict
    n_atoms: int

    def total_a(self):
        return float(sum(self.probs_a.values()))

    def total_b(self):
        return float(sum(self.probs_b.values()))


def apply_measurement(state):
    """Map a final state to detection-pattern probabilities.

    Both rules exhaust the identity, so each returned table sums to one
    up to the trace error of the input state.
    """
    table = _joint_bucket_populations(state)
    n = state.system.n_sites
    probs_a = {pattern: 0.0 for pattern in product((True, False), repeat=n)}
    probs_b = dict(probs_a)
    for key, p in table.items():
        pat_a = tuple(b == "0" for b in key)
        pat_b = tuple(b != "x" for b in key)
        probs_a[pat_a] += p
        probs_b[pat_b] += p
    return OutcomeDistribution(probs_a, probs_b, n)


def loss_correct(probs_a, probs_b):
    """Atom-loss corrected two-qubit ground population.

    The fully detected rule-A pattern counts only the joint clock "00"
    population, while the fully detected rule-B pattern counts all four
    clock populations; their ratio is the 00 population of the state
    conditioned on neither atom being lost or leaked.
    """
    all_present = tuple(True for _ in next(iter(probs_a)))
    both_clock = float(probs_b[all_present])
    if both_clock <= 0.0:
        raise ValueError("no population left in the clock manifold")
    return {
        "p00_raw": float(probs_a[all_present]),
        "presence": both_clock,
        "p00": float(probs_a[all_present]) / both_clock,
    }


def binomial_error(p, n):
    """One-sigma statistical error of a probability from n shots."""
    if n <= 0:
        raise ValueError("need a positive shot count")
    p = np.clip(p, 0.0, 1.0)
    return float(np.sqrt(p * (1.0 - p) / n))


# -- joint parity under the analysis rotation -----------------------------

def _clock_block_elements(state):
    """Coherences entering the two-atom parity signal.

    Returns (c, d, q_sum, rho_xx) with c the 00-11 coherence, d the
    01-10 coherence, q_sum the summed clock coherences of either atom
    while the other sits outside the clock manifold, and rho_xx the
    population with both atoms outside.
    """
    system = state.system
    if system.n_sites != 2:
        raise ValueError("parity analysis is defined for atom pairs")
    rho = state.density()
    s0, s1 = system.schemes

    def idx(la, lb):
        return system.basis_index((la, lb))

    x_a = [lab for lab in s0.labels()
           if s0.level(lab).readout_bucket not in ("0", "1")]
    x_b = [lab for lab in s1.labels()
           if s1.level(lab).readout_bucket not in ("0", "1")]

    c = rho[idx("q0", "q0"), idx("q1", "q1")]
    d = rho[idx("q0", "q1"), idx("q1", "q0")]
    q_a = sum(rho[idx("q0", x), idx("q1", x)] for x in x_b)
    q_b = sum(rho[idx(x, "q0"), idx(x, "q1")] for x in x_a)
    rho_xx = sum(np.real(rho[idx(xa, xb), idx(xa, xb)])
                 for xa in x_a for xb in x_b)
    return c, d, q_a + q_b, float(rho_xx)


def parity_signal(state, phases):
    """Closed-form rule-A parity versus analysis phase.

    After a pi/2 rotation with phase phi on both atoms, the detected
    parity (+1 for patterns with an even number of absences) is

        -2 Re[c e^{-2 i phi}] + 2 Re[d] + 2 Im[q e^{-i phi}] + rho_xx

    in terms of the coherences of :func:`_clock_block_elements`.
    """
    c, d, q, rho_xx = _clock_block_elements(state)
    phases = np.asarray(phases, dtype=float)
    return (-2.0 * np.real(c * np.exp(-2j * phases))
            + 2.0 * np.real(d)
            + 2.0 * np.imag(q * np.exp(-1j * phases))
            + rho_xx)


def parity_signal_direct(state, phi):
    """Rule-A parity by explicit rotation and pattern sum (slow path)."""
    system = state.system
    rho = state.density()
    for site in range(system.n_sites):
        u = system.instant_unitary(
            SubspaceRotation(site, "q0", "q1", np.pi / 2, phase=phi))
        rho = (u @ (u @ rho.conj().T).conj().T)
    rotated = state.__class__(system, rho)
    dist = apply_measurement(rotated)
    signal = 0.0
    for pattern, p in dist.probs_a.items():
        absent = sum(1 for bit in pattern if not bit)
        signal += ((-1) ** absent) * p
    return float(signal)


def state_health(state):
    """Trace, hermiticity, and positivity diagnostics of a state."""
    rho = state.density()
    trace_err = abs(float(np.real(np.trace(rho))) - 1.0)
    herm_err = float(np.max(np.abs(rho - rho.conj().T)))
    min_eig = None
    if rho.shape[0] <= 1024:
        min_eig = float(np.min(np.linalg.eigvalsh(
            0.5 * (rho + rho.conj().T))))
    return {"trace_error": trace_err, "hermiticity_error": herm_err,
            "min_eigenvalue": min_eig}
