"""Adiabatic elimination of the intermediate excited manifold.

For drives far detuned from every intermediate level, second-order
perturbation theory replaces the optical ladder by direct effective
couplings between ground and Rydberg levels:

* a two-photon transfer between the clock states (both probe legs),
  scaling with the squared probe envelope;
* protected-ladder legs from each clock state to the Rydberg level
  (probe times coupling), scaling with the probe envelope;
* intensity-following diagonal shifts on every dressed level;
* photon-scattering decay at the off-resonant excitation rate of each
  intermediate level, branched the same way as its spontaneous decay.

Scattering paths through different intermediate levels are treated as
independent channels (their rates add; interference between paths is
dropped).  The coupling beam is assumed flat while it is on.
"""

from __future__ import annotations

from collections import defaultdict

import numpy as np

from .levels import DecayChannel, DriveCoupling, LevelScheme

PROBE_ENV = "probe"
COUPLING_ENV = "coupling"


def _leg_amplitude(coupling):
    """Complex half-Rabi matrix element <upper|H|lower> at peak envelope."""
    return 0.5 * coupling.peak_rabi * np.exp(1j * coupling.phase)


def _intermediate_legs(scheme):
    """Map each intermediate level to its (ground-or-rydberg, leg) list."""
    inter = set(scheme.intermediate_labels())
    legs = defaultdict(list)
    for coupling in scheme.couplings:
        lo, up = coupling.lower, coupling.upper
        if up in inter and lo not in inter:
            legs[up].append((lo, _leg_amplitude(coupling)))
        elif lo in inter and up not in inter:
            # stored with the intermediate as the lower level; the
            # amplitude toward the outer level is the conjugate element
            legs[lo].append((up, np.conj(_leg_amplitude(coupling))))
    return legs


def _detuning(scheme, label):
    """Positive detuning of an intermediate sitting below the frame zero."""
    delta = -scheme.level(label).energy_offset
    if delta == 0.0:
        raise ValueError(f"intermediate {label!r} has zero detuning")
    return delta


def raman_amplitude(scheme):
    """Complex effective clock-transfer half amplitude sum(A1* A0)/Delta.

    The returned value is the full effective Rabi frequency (so the
    Hamiltonian matrix element q1<-q0 is half of it) at peak envelope.
    For reduced schemes the "raman" coupling is read back directly.
    """
    if scheme.has_coupling("raman"):
        c = scheme.coupling("raman")
        return c.peak_rabi * np.exp(1j * c.phase)
    legs = _intermediate_legs(scheme)
    total = 0.0 + 0.0j
    for label, pairs in legs.items():
        amp = {lo: a for lo, a in pairs}
        if "q0" in amp and "q1" in amp:
            # H_eff[q1,q0] = H[q1,fe] H[fe,q0] / Delta with
            # H[q1,fe] = conj(A1), H[fe,q0] = A0
            total += np.conj(amp["q1"]) * amp["q0"] / _detuning(scheme, label)
    return 2.0 * total


def _effective_leg(scheme, legs, outer_a, outer_b):
    """Effective coupling amplitude (full Rabi, complex) a<->b, b upper."""
    total = 0.0 + 0.0j
    for label, pairs in legs.items():
        amp = {lo: a for lo, a in pairs}
        if outer_a in amp and outer_b in amp:
            total += np.conj(amp[outer_b]) * amp[outer_a] / _detuning(
                scheme, label)
    return 2.0 * total


def eliminate_intermediates(scheme):
    """Six-level effective scheme: clock pair, Rydberg, leakage, loss.

    Drive envelopes of the source scheme must follow the standard ids:
    probe legs on "probe", coupling legs on "coupling".  The result is
    integrable with nanosecond steps since no level sits GHz away.
    """
    inter = set(scheme.intermediate_labels())
    if not inter:
        return scheme
    legs = _intermediate_legs(scheme)
    ryd = scheme.rydberg_label()

    kept_levels = tuple(lv for lv in scheme.levels if lv.label not in inter)

    # -- effective couplings ---------------------------------------------
    couplings = []
    raman = raman_amplitude(scheme)
    if raman != 0.0:
        couplings.append(DriveCoupling(
            name="raman", lower="q0", upper="q1",
            peak_rabi=abs(raman), phase=float(np.angle(raman)),
            envelope_id=PROBE_ENV, envelope_power=2))
    for clock in ("q0", "q1"):
        leg = _effective_leg(scheme, legs, clock, ryd)
        if leg != 0.0:
            couplings.append(DriveCoupling(
                name=f"eit{clock[-1]}", lower=clock, upper=ryd,
                peak_rabi=abs(leg), phase=float(np.angle(leg)),
                envelope_id=PROBE_ENV, envelope_power=1))

    # -- intensity-following diagonal shifts -------------------------------
    quad = {env: dict(sh) for env, sh in scheme.quadratic_shifts.items()}

    def add_shift(env, label, value):
        quad.setdefault(env, {})
        quad[env][label] = quad[env].get(label, 0.0) + value

    for label, pairs in legs.items():
        delta = _detuning(scheme, label)
        for outer, amp in pairs:
            env = PROBE_ENV if outer != ryd else COUPLING_ENV
            add_shift(env, outer, abs(amp) ** 2 / delta)

    # -- scattering through the eliminated manifold ------------------------
    decays = [ch for ch in scheme.decays
              if ch.from_level not in inter and ch.to_level not in inter]
    scatter = defaultdict(float)
    for label, pairs in legs.items():
        delta = _detuning(scheme, label)
        for ch in scheme.decays:
            if ch.from_level != label or ch.to_level in inter:
                continue
            for outer, amp in pairs:
                rate = (abs(amp) / delta) ** 2 * ch.rate
                env = PROBE_ENV if outer != ryd else COUPLING_ENV
                scatter[(outer, ch.to_level, env)] += rate
    for (src, dst, env), rate in sorted(scatter.items()):
        decays.append(DecayChannel(src, dst, rate, envelope_id=env))

    return LevelScheme(
        levels=kept_levels,
        decays=tuple(decays),
        couplings=tuple(couplings),
        reference_detuning=scheme.reference_detuning,
        qubit_splitting=scheme.qubit_splitting,
        quadratic_shifts=quad,
        name=(scheme.name + "_reduced") if scheme.name else "reduced",
    )
