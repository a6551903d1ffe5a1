"""Builders assembling gate and calibration pulse sequences.

Site convention throughout: site 0 is the control atom, sites 1..k are
targets.  The control reaches its Rydberg level through a square pulse
on its "ryd" coupling; targets are driven by whatever couplings their
scheme declares, grouped by the coupling's envelope id ("probe" legs
get the raised-cosine window, "coupling" legs run flat).
"""

from __future__ import annotations

import warnings

import numpy as np

from .pulses import (ActiveDrive, Envelope, PulseSequence, Segment,
                     SubspaceRotation, duration_for_pi_area)

PROBE_ENV = "probe"
COUPLING_ENV = "coupling"
PI_ENV = "pi"


def control_pi_duration(control_scheme):
    omega = control_scheme.coupling("ryd").peak_rabi
    if omega <= 0.0:
        raise ValueError("control Rydberg Rabi frequency must be positive")
    return np.pi / omega


def _control_pi_segment(system, name, start):
    scheme = system.scheme(0)
    dur = control_pi_duration(scheme)
    return Segment(
        name=name, start=start, duration=dur,
        envelopes={PI_ENV: Envelope("constant", dur)},
        drives=(ActiveDrive(0, "ryd", PI_ENV),),
    )


def _control_pi_instant(at):
    """Ideal control flip; phase 0 reproduces the square pulse exactly,
    including the net minus sign of an excite-deexcite round trip."""
    return SubspaceRotation(0, "q1", "r", np.pi, phase=0.0, at=at)


def _feels_coupling_beam(scheme):
    """True when the beam acts on the scheme without driving a coupling."""
    if any(d.envelope_id == COUPLING_ENV for d in scheme.decays):
        return True
    return bool(scheme.quadratic_shifts.get(COUPLING_ENV))


def smooth_pulse_segment(system, tau, start=0.0, sites=None,
                         include_coupling=True, coupling_on_control=False,
                         name="smooth"):
    """Raised-cosine probe window with an optional flat coupling beam.

    ``sites`` selects which target atoms are driven (default: all atoms
    except site 0 when the system has several, else site 0 itself).
    """
    if sites is None:
        sites = tuple(range(1, system.n_sites)) if system.n_sites > 1 else (0,)
    envelopes = {PROBE_ENV: Envelope("raised_cosine", tau)}
    drives = []
    needs_coupling_env = coupling_on_control
    bathed = []
    for site in sites:
        scheme = system.scheme(site)
        driven = False
        for coupling in scheme.couplings:
            if coupling.envelope_id == PROBE_ENV:
                drives.append(ActiveDrive(site, coupling.name, PROBE_ENV))
            elif coupling.envelope_id == COUPLING_ENV and include_coupling:
                drives.append(ActiveDrive(site, coupling.name, COUPLING_ENV))
                needs_coupling_env = True
                driven = True
        # reduced schemes fold the beam into gated decays and intensity
        # shifts with no drive left on its envelope; the light is still on
        if include_coupling and not driven and _feels_coupling_beam(scheme):
            bathed.append(site)
            needs_coupling_env = True
    if needs_coupling_env and include_coupling:
        envelopes[COUPLING_ENV] = Envelope("constant", tau)
    extra_sites = tuple(bathed)
    if coupling_on_control and include_coupling:
        extra_sites = (0,) + extra_sites
    extra = {COUPLING_ENV: extra_sites} if extra_sites else {}
    return Segment(name=name, start=start, duration=tau,
                   envelopes=envelopes, drives=tuple(drives),
                   extra_illumination=extra)


def raman_pulse_sequence(system, tau, sites=None):
    """Probe-only smooth pulse: the bare two-photon transfer, coupling off."""
    seg = smooth_pulse_segment(system, tau, sites=sites,
                               include_coupling=False, name="raman")
    return PulseSequence((seg,), name="raman_pulse")


def eit_pulse_sequence(system, tau, sites=None):
    """Smooth pulse with the coupling beam on: the protected configuration."""
    seg = smooth_pulse_segment(system, tau, sites=sites,
                               include_coupling=True, name="eit")
    return PulseSequence((seg,), name="eit_pulse")


def control_round_trip(system, gap, illuminate=True):
    """Control pi up, a wait in the Rydberg state, pi back down.

    With ``illuminate`` the coupling beam shines on the control during
    the wait, activating its beam-gated scattering channel.  Measures
    how much population survives parking the control for ``gap``.
    """
    up = _control_pi_segment(system, "pi_up", 0.0)
    envelopes = {COUPLING_ENV: Envelope("constant", gap)}
    extra = {COUPLING_ENV: (0,)} if illuminate else {}
    wait = Segment(name="dwell", start=up.stop, duration=gap,
                   envelopes=envelopes, drives=(),
                   extra_illumination=extra)
    down = _control_pi_segment(system, "pi_down", wait.stop)
    return PulseSequence((up, wait, down), name="control_round_trip")


def check_pi_area(scheme, tau, warn_fraction=0.01):
    """Warn when the window length misses the transfer-pi condition."""
    from .reduction import raman_amplitude

    omega = abs(raman_amplitude(scheme))
    if omega == 0.0:
        return
    ideal = duration_for_pi_area(omega)
    if abs(tau - ideal) > warn_fraction * ideal:
        warnings.warn(
            f"window {tau * 1e6:.4f} us misses the transfer-pi length "
            f"{ideal * 1e6:.4f} us by more than {100 * warn_fraction:.0f}%",
            stacklevel=3)


def cnot_sequence(system, tau, coupling_on_control=False,
                  ideal_control=False, start=0.0, warn_area=True):
    """Conditional flip: control up, smooth window on targets, control down.

    The control excites only from q1, so the interaction shifts every
    target's Rydberg level exactly when the control holds a 1.  With the
    control in 0 the targets' protected superposition rides through the
    window unchanged; with it in 1 the two-photon transfer proceeds.
    """
    if tau <= 0.0:
        raise ValueError("window duration must be positive")
    if warn_area and system.n_sites > 1:
        check_pi_area(system.scheme(1), tau)
    items = []
    t = start
    if ideal_control:
        items.append(_control_pi_instant(t))
    else:
        seg = _control_pi_segment(system, "control_up", t)
        items.append(seg)
        t = seg.stop
    smooth = smooth_pulse_segment(
        system, tau, start=t, coupling_on_control=coupling_on_control)
    items.append(smooth)
    t = smooth.stop
    if ideal_control:
        items.append(_control_pi_instant(t))
    else:
        items.append(_control_pi_segment(system, "control_down", t))
    return PulseSequence(tuple(items), name="cnot")


def bell_prep_sequence(system, tau, coupling_on_control=False,
                       ideal_control=False):
    """Half rotation on the control followed by the conditional flip.

    The half rotation uses phase pi/2 so both branch amplitudes are real
    and positive; together with the gate's branch signs the output on
    input 00 is exactly (|00> + |11>)/sqrt(2).
    """
    prep = SubspaceRotation(0, "q0", "q1", np.pi / 2, phase=np.pi / 2, at=0.0)
    gate = cnot_sequence(system, tau, coupling_on_control=coupling_on_control,
                         ideal_control=ideal_control)
    return PulseSequence((prep,) + gate.items, name="bell_prep")


def ghz_sequence(system, tau, coupling_on_control=False, ideal_control=False):
    """Fan-out preparation: one conditional window shared by all targets."""
    return PulseSequence(
        bell_prep_sequence(system, tau,
                           coupling_on_control=coupling_on_control,
                           ideal_control=ideal_control).items,
        name=f"ghz_{system.n_sites - 1}")


def parity_sequence(system, phi, at=0.0):
    """Analysis half rotations with a common phase on every atom."""
    items = tuple(
        SubspaceRotation(site, "q0", "q1", np.pi / 2, phase=phi, at=at)
        for site in range(system.n_sites))
    return PulseSequence(items, name="parity_analysis")


def prep_and_readout_circuits(system, basis_labels):
    """Flips preparing a clock basis state from all-zeros, and their undo.

    ``basis_labels`` holds one of "q0"/"q1" per site.  Both circuits use
    phase pi/2 flips (real matrix elements); the readout circuit returns
    the prepared state to all-zeros up to a global phase, so composing
    prep and readout acts as the identity on populations.
    """
    if len(basis_labels) != system.n_sites:
        raise ValueError("need one clock label per site")
    flips = tuple(
        SubspaceRotation(site, "q0", "q1", np.pi, phase=np.pi / 2, at=0.0)
        for site, label in enumerate(basis_labels)
        if label == "q1")
    for label in basis_labels:
        if label not in ("q0", "q1"):
            raise ValueError(f"not a clock label: {label!r}")
    return {
        "prep": PulseSequence(flips, name="prep"),
        "readout": PulseSequence(flips, name="readout"),
    }


def local_microwave_shift(theta, omega):
    """Shift detuning a bystander through two full cycles during a
    resonant rotation by ``theta`` elsewhere.

    The bystander's generalized Rabi angle over the pulse time theta/omega
    must reach 4 pi, giving shift = omega * sqrt(16 pi^2/theta^2 - 1).
    """
    if not 0.0 < theta <= 4.0 * np.pi:
        raise ValueError("rotation angle must lie in (0, 4 pi]")
    if omega <= 0.0:
        raise ValueError("drive rate must be positive")
    return omega * float(np.sqrt(16.0 * np.pi ** 2 / theta ** 2 - 1.0))


def microwave_addressing_sequence(system, target_site, theta, omega,
                                  phase=0.0):
    """Global clock drive with the non-addressed atoms shifted.

    Every atom is driven through its "mw" coupling for time theta/omega;
    atoms other than ``target_site`` get a symmetric diagonal split of
    the addressing shift, so they complete two full generalized cycles
    and return to where they started.
    """
    shift = local_microwave_shift(theta, omega)
    duration = theta / omega
    offsets = {
        site: {"q0": -0.5 * shift, "q1": +0.5 * shift}
        for site in range(system.n_sites) if site != target_site
    }
    drives = tuple(
        ActiveDrive(site, "mw", "flat", phase_offset=phase)
        for site in range(system.n_sites))
    seg = Segment(
        name="mw_addressed", start=0.0, duration=duration,
        envelopes={"flat": Envelope("constant", duration)},
        drives=drives, detuning_offsets=offsets)
    return PulseSequence((seg,), name="mw_addressing")
