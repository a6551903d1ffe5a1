"""Ready-made cesium level schemes and gate presets.

Two target-atom ladders are bundled, named by the intermediate manifold
they climb through:

* ``6p32_table1``: four-path ladder through 6P3/2, driven with a 2 us
  window; moderate detunings, strong scattering contrast between the
  protected and transferring branches.
* ``7p12_figS2``: two-path ladder through 7P1/2, driven with a 0.5 us
  window; larger detunings and a narrower intermediate linewidth push
  the photon-scattering error an order of magnitude down.

All frequencies enter as rad/s.  Clock states are |F=3,m=0> (q0) and
|F=4,m=0> (q1); leakage collects in the other Zeeman states of each
hyperfine manifold (d3, d4) or in atom loss (lost).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .angular import rydberg_coupling_weight, sigma_plus_weight
from .levels import (DecayChannel, DriveCoupling, InteractionSpec, Level,
                     LevelScheme, clock_branching_table, line_geometry,
                     right_angle_geometry, star_geometry)
from .system import CompositeSystem
from .reduction import eliminate_intermediates

TWO_PI = 2.0 * np.pi

# Cesium clock splitting (exact SI definition of the second).
QUBIT_SPLITTING = TWO_PI * 9_192_631_770.0

# Rydberg lifetime model: one effective decay channel to atom loss.
GAMMA_R = TWO_PI * 1.0e3

# Blockade strength pinned at 6 um spacing, van der Waals scaling.
INTERACTION = InteractionSpec(reference_strength=TWO_PI * 34.9e6,
                              reference_distance=6.0, exponent=6)

# -- ladder through 6P3/2 --------------------------------------------------

GAMMA_E_6P32 = TWO_PI * 5.2e6
# per F' = 2..5: probe Rabi from q0 and q1, coupling Rabi, detuning
OMEGA0_6P32 = tuple(TWO_PI * 1e6 * x for x in (26.1, 42.3, 26.6, 0.0))
OMEGA1_6P32 = tuple(TWO_PI * 1e6 * x for x in (0.0, 14.1, 37.3, 39.9))
OMEGAC_6P32 = tuple(TWO_PI * 1e6 * x for x in (17.8, 38.4, 43.6, 27.1))
DELTA_6P32 = tuple(TWO_PI * 1e6 * x for x in (1474.0, 1322.0, 1121.0, 870.0))
F_LEVELS_6P32 = (2, 3, 4, 5)
DETUNING_REF_6P32 = -TWO_PI * 1134.0e6   # Rabi-squared weighted centroid
DELTA_DEFAULT_6P32 = TWO_PI * 0.294e6    # transfer-optimal clock offset
DELTA_C_DEFAULT_6P32 = TWO_PI * 0.988e6  # protection-optimal Rydberg offset
TAU_6P32 = 2.0e-6

# -- ladder through 7P1/2 --------------------------------------------------

GAMMA_E_7P12 = TWO_PI * 1.03e6
F_LEVELS_7P12 = (3, 4)
# hyperfine offsets of F'=3,4 around the quoted single detuning knob
HF_OFFSETS_7P12 = (-TWO_PI * 212.4e6, +TWO_PI * 165.2e6)
DETUNING_DEFAULT_7P12 = TWO_PI * 5.0e9
COUPLING_TOTAL_7P12 = TWO_PI * 170.0e6
TAU_7P12 = 500e-9
DELTA_DEFAULT_7P12 = TWO_PI * 1.646e6    # tuned on the transfer optimum
DELTA_C_DEFAULT_7P12 = TWO_PI * 1.104e6  # tuned on the protection optimum
PROBE_POWER_REF = 200e-6
COUPLING_POWER_REF = 50e-3
WAIST_REF = 3e-6

CLOCK_BUCKETS = {"q0": "0", "q1": "1"}


def _clock_levels(delta):
    return (
        Level("q0", energy_offset=delta, category="computational",
              readout_bucket="0"),
        Level("q1", energy_offset=0.0, category="computational",
              readout_bucket="1"),
    )


def _tail_levels(coupling_detuning):
    return (
        Level("r", energy_offset=coupling_detuning, category="rydberg"),
        Level("d3", energy_offset=0.0, category="leakage"),
        Level("d4", energy_offset=0.0, category="leakage"),
    )


LOST = Level("lost", energy_offset=0.0, category="leakage")

_DEST = {"q0": "q0", "q1": "q1", "d3": "d3", "d4": "d4"}


def _branch_decays(fe_label, f_excited, gamma_e, table):
    out = []
    for dest, fraction in table[f_excited].items():
        if fraction == 0:
            continue
        out.append(DecayChannel(fe_label, _DEST[dest],
                                gamma_e * float(fraction)))
    return out


def _cross_shifts(omega0, omega1, deltas, qubit_splitting):
    """Clock shifts from each probe beam acting on the other clock state.

    The beam addressed to one clock state also drives the other, detuned
    additionally by the full qubit splitting; only these cross terms are
    not already contained in the explicit ladder legs.
    """
    s_q1 = sum(o ** 2 / (4.0 * (d + qubit_splitting))
               for o, d in zip(omega1, deltas))
    s_q0 = sum(o ** 2 / (4.0 * (d - qubit_splitting))
               for o, d in zip(omega0, deltas))
    return {"probe": {"q0": s_q0, "q1": s_q1}}


def target_6p32(raman_power_scale=1.0, coupling_power_scale=1.0,
                delta=None, coupling_detuning=None):
    """Full ladder through 6P3/2 with four intermediate hyperfine paths."""
    if delta is None:
        delta = DELTA_DEFAULT_6P32
    if coupling_detuning is None:
        coupling_detuning = DELTA_C_DEFAULT_6P32
    p = np.sqrt(raman_power_scale)
    c = np.sqrt(coupling_power_scale)
    levels = list(_clock_levels(delta))
    couplings = []
    decays = [DecayChannel("r", "lost", GAMMA_R)]
    branching = clock_branching_table(Fraction(3, 2), F_LEVELS_6P32)
    for k, f_e in enumerate(F_LEVELS_6P32):
        label = f"fe{f_e}"
        levels.append(Level(label, energy_offset=-DELTA_6P32[k],
                            category="intermediate"))
        if OMEGA0_6P32[k] > 0.0:
            couplings.append(DriveCoupling(
                f"probe0_f{f_e}", "q0", label, p * OMEGA0_6P32[k],
                envelope_id="probe", phase=-np.pi / 2))
        if OMEGA1_6P32[k] > 0.0:
            couplings.append(DriveCoupling(
                f"probe1_f{f_e}", "q1", label, p * OMEGA1_6P32[k],
                envelope_id="probe", phase=0.0))
        couplings.append(DriveCoupling(
            f"coup_f{f_e}", label, "r", c * OMEGAC_6P32[k],
            envelope_id="coupling", phase=0.0))
        decays.extend(_branch_decays(label, f_e, GAMMA_E_6P32, branching))
    levels.extend(_tail_levels(coupling_detuning))
    levels.append(LOST)
    omega0 = tuple(p * o for o in OMEGA0_6P32)
    omega1 = tuple(p * o for o in OMEGA1_6P32)
    return LevelScheme(
        levels=tuple(levels), decays=tuple(decays),
        couplings=tuple(couplings),
        reference_detuning=DETUNING_REF_6P32,
        qubit_splitting=QUBIT_SPLITTING,
        quadratic_shifts=_cross_shifts(omega0, omega1, DELTA_6P32,
                                       QUBIT_SPLITTING),
        name="6p32")


def _probe_weights_7p12():
    """Signed relative probe amplitudes |F,0> -> |F',1> for both legs."""
    half = Fraction(1, 2)
    i_nuc = Fraction(7, 2)
    w0 = tuple(float(sigma_plus_weight(half, half, 3, f_e, i_nuc))
               for f_e in F_LEVELS_7P12)
    w1 = tuple(float(sigma_plus_weight(half, half, 4, f_e, i_nuc))
               for f_e in F_LEVELS_7P12)
    return w0, w1


def _coupling_weights_7p12():
    """Signed relative coupling amplitudes |F',1> -> |D3/2, mj=3/2>.

    Normalized to unit root sum of squares so the configured total
    coupling Rabi frequency splits across the hyperfine legs.
    """
    half = Fraction(1, 2)
    i_nuc = Fraction(7, 2)
    raw = tuple(rydberg_coupling_weight(half, f_e, 1, Fraction(3, 2),
                                        Fraction(3, 2), i_nuc)
                for f_e in F_LEVELS_7P12)
    norm = np.hypot(*raw)
    return tuple(w / norm for w in raw)


def target_7p12(probe_power=PROBE_POWER_REF,
                coupling_power=COUPLING_POWER_REF,
                waist=WAIST_REF, detuning=DETUNING_DEFAULT_7P12,
                delta=None, coupling_detuning=None):
    """Two-path ladder through 7P1/2, parametrized by beam powers.

    Rabi frequencies scale as sqrt(power)/waist from the reference
    calibration point, at which the transfer is exactly a pi pulse over
    the standard 0.5 us window and the total coupling Rabi frequency is
    170 MHz (times 2 pi).
    """
    if delta is None:
        delta = DELTA_DEFAULT_7P12
    if coupling_detuning is None:
        coupling_detuning = DELTA_C_DEFAULT_7P12
    deltas = tuple(detuning + off for off in HF_OFFSETS_7P12)
    w0, w1 = _probe_weights_7p12()
    ref_deltas = tuple(DETUNING_DEFAULT_7P12 + off for off in HF_OFFSETS_7P12)
    omega_target = 8.0 * np.pi / (3.0 * TAU_7P12)
    base = abs(sum(a * b / (2.0 * d) for a, b, d in zip(w0, w1, ref_deltas)))
    probe_unit = np.sqrt(omega_target / base)
    probe_scale = (np.sqrt(probe_power / PROBE_POWER_REF)
                   * (WAIST_REF / waist))
    coupling_scale = (np.sqrt(coupling_power / COUPLING_POWER_REF)
                      * (WAIST_REF / waist))
    wc = _coupling_weights_7p12()

    levels = list(_clock_levels(delta))
    couplings = []
    decays = [DecayChannel("r", "lost", GAMMA_R)]
    branching = clock_branching_table(Fraction(1, 2), F_LEVELS_7P12)
    omega0 = []
    omega1 = []
    for k, f_e in enumerate(F_LEVELS_7P12):
        label = f"fe{f_e}"
        levels.append(Level(label, energy_offset=-deltas[k],
                            category="intermediate"))
        o0 = probe_unit * probe_scale * w0[k]
        o1 = probe_unit * probe_scale * w1[k]
        oc = COUPLING_TOTAL_7P12 * coupling_scale * wc[k]
        omega0.append(abs(o0))
        omega1.append(abs(o1))
        couplings.append(DriveCoupling(
            f"probe0_f{f_e}", "q0", label, abs(o0), envelope_id="probe",
            phase=-np.pi / 2 + (np.pi if o0 < 0 else 0.0)))
        couplings.append(DriveCoupling(
            f"probe1_f{f_e}", "q1", label, abs(o1), envelope_id="probe",
            phase=(np.pi if o1 < 0 else 0.0)))
        couplings.append(DriveCoupling(
            f"coup_f{f_e}", label, "r", abs(oc), envelope_id="coupling",
            phase=(np.pi if oc < 0 else 0.0)))
        decays.extend(_branch_decays(label, f_e, GAMMA_E_7P12, branching))
    levels.extend(_tail_levels(coupling_detuning))
    levels.append(LOST)
    return LevelScheme(
        levels=tuple(levels), decays=tuple(decays),
        couplings=tuple(couplings),
        reference_detuning=-detuning,
        qubit_splitting=QUBIT_SPLITTING,
        quadratic_shifts=_cross_shifts(omega0, omega1, deltas,
                                       QUBIT_SPLITTING),
        name="7p12")


def rescale_probe(scheme, power_scale):
    """Scheme copy with the two-photon beam power multiplied.

    Single-photon legs scale with the square root of the power, effective
    two-photon drives of reduced schemes linearly (their envelope power
    is 2), and the intensity-following shift and scatter tables linearly.
    Used to keep the transfer area fixed when the pulse window changes.
    """
    if power_scale <= 0.0:
        raise ValueError("power_scale must be positive")
    root = np.sqrt(power_scale)
    couplings = tuple(
        replace(cp, peak_rabi=cp.peak_rabi * root ** cp.envelope_power)
        if cp.envelope_id == "probe" else cp
        for cp in scheme.couplings)
    decays = tuple(
        replace(ch, rate=ch.rate * power_scale)
        if ch.envelope_id == "probe" else ch
        for ch in scheme.decays)
    shifts = {env: dict(table)
              for env, table in scheme.quadratic_shifts.items()}
    if "probe" in shifts:
        shifts["probe"] = {k: v * power_scale
                           for k, v in shifts["probe"].items()}
    return replace(scheme, couplings=couplings, decays=decays,
                   quadratic_shifts=shifts)


def control_scheme(omega_r=TWO_PI * 1.77e6, gamma_r=GAMMA_R,
                   coupling_scatter=0.0):
    """Effective two-level control ladder plus its Rydberg loss channels."""
    levels = (
        Level("q0", 0.0, "computational", readout_bucket="0"),
        Level("q1", 0.0, "computational", readout_bucket="1"),
        Level("r", 0.0, "rydberg"),
        LOST,
    )
    decays = []
    if gamma_r > 0.0:
        decays.append(DecayChannel("r", "lost", gamma_r))
    if coupling_scatter > 0.0:
        decays.append(DecayChannel("r", "lost", coupling_scatter,
                                   envelope_id="coupling"))
    couplings = (DriveCoupling("ryd", "q1", "r", omega_r,
                               envelope_id="pi", phase=0.0),)
    return LevelScheme(
        levels=levels, decays=tuple(decays), couplings=couplings,
        reference_detuning=0.0, qubit_splitting=QUBIT_SPLITTING,
        quadratic_shifts={}, name="control")


def clock_only_scheme(omega_mw):
    """Two clock levels with a microwave drive; no dissipation."""
    levels = (
        Level("q0", 0.0, "computational", readout_bucket="0"),
        Level("q1", 0.0, "computational", readout_bucket="1"),
    )
    couplings = (DriveCoupling("mw", "q0", "q1", omega_mw,
                               envelope_id="flat", phase=0.0),)
    return LevelScheme(
        levels=levels, decays=(), couplings=couplings,
        reference_detuning=0.0, qubit_splitting=QUBIT_SPLITTING,
        quadratic_shifts={}, name="clock")


def coupling_scatter_rate(target):
    """Control-atom photon scattering rate off the coupling beam.

    The coupling legs of the target ladder also illuminate the control;
    sitting in its Rydberg level it scatters at the summed off-resonant
    rate of every leg.
    """
    rate = 0.0
    inter = set(target.intermediate_labels())
    for coupling in target.couplings:
        if coupling.envelope_id != "coupling":
            continue
        label = coupling.lower if coupling.lower in inter else coupling.upper
        delta = abs(target.level(label).energy_offset)
        if delta == 0.0:
            continue
        rate += (coupling.peak_rabi / (2.0 * delta)) ** 2 \
            * target.total_decay_rate(label)
    return rate


@dataclass(frozen=True)
class GatePreset:
    """Everything needed to instantiate gate simulations."""

    name: str
    control: LevelScheme
    target: LevelScheme
    interaction: InteractionSpec
    tau: float
    spacing_um: float
    description: str


def preset_6p32(**target_kwargs):
    target = target_6p32(**target_kwargs)
    return GatePreset(
        name="6p32_table1",
        control=control_scheme(),
        target=target,
        interaction=INTERACTION,
        tau=TAU_6P32,
        spacing_um=6.0,
        description=("four-path ladder through 6P3/2, 2 us window, "
                     "6 um spacing"),
    )


def preset_7p12(**target_kwargs):
    target = target_7p12(**target_kwargs)
    return GatePreset(
        name="7p12_figS2",
        control=control_scheme(),
        target=target,
        interaction=INTERACTION,
        tau=TAU_7P12,
        spacing_um=4.0,
        description=("two-path ladder through 7P1/2, 0.5 us window, "
                     "4 um spacing"),
    )


PRESETS = {
    "6p32_table1": preset_6p32,
    "7p12_figS2": preset_7p12,
}


def load_preset(name, **target_kwargs):
    if name not in PRESETS:
        known = ", ".join(sorted(PRESETS))
        raise KeyError(f"unknown preset {name!r}; available: {known}")
    return PRESETS[name](**target_kwargs)


def preset_catalog():
    """Preset ids with one-line physical descriptions."""
    return {name: PRESETS[name]().description for name in sorted(PRESETS)}


def make_system(preset, n_targets=1, reduced=False, geometry=None,
                spacing_um=None, suppress_target_target=False,
                include_control_decay=True, coupling_on_control=False,
                target_overrides=None):
    """Build the composite system for a gate run.

    ``reduced`` swaps each target for its eliminated six-level scheme.
    ``suppress_target_target`` keeps only control-target interaction
    pairs.  ``include_control_decay=False`` strips the control's decay
    channels (unitary control, used to isolate per-target errors).
    ``coupling_on_control`` adds the coupling-beam scattering channel to
    the control.
    """
    target = preset.target
    if target_overrides:
        target = replace(preset.target, **target_overrides)
    if reduced:
        target = eliminate_intermediates(target)
    control = preset.control
    if coupling_on_control:
        control = replace(control, decays=control.decays + (
            DecayChannel("r", "lost", coupling_scatter_rate(preset.target),
                         envelope_id="coupling"),))
    if not include_control_decay:
        control = replace(control, decays=())
    if spacing_um is None:
        spacing_um = preset.spacing_um
    if geometry is None:
        geometry = line_geometry(n_targets, spacing_um)
    pairs = [(0, j) for j in range(1, n_targets + 1)]
    if not suppress_target_target:
        pairs += [(i, j) for i in range(1, n_targets + 1)
                  for j in range(i + 1, n_targets + 1)]
    return CompositeSystem(
        schemes=(control,) + (target,) * n_targets,
        geometry=geometry,
        interaction=preset.interaction,
        interaction_pairs=tuple(pairs))


def make_geometry(kind, n_targets, spacing_um):
    if kind == "line":
        return line_geometry(n_targets, spacing_um)
    if kind == "right_angle":
        return right_angle_geometry(n_targets, spacing_um)
    if kind == "star":
        return star_geometry(n_targets, spacing_um)
    raise ValueError(f"unknown geometry kind {kind!r}")
