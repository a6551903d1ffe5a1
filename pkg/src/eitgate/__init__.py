"""Simulator and analysis toolkit for blockade-conditioned clock transfer.

The package models cesium clock qubits driven through multilevel optical
ladders, with a Rydberg control atom gating the transfer of its
neighbors.  It ships level-scheme presets, a pulse sequencer, dense and
trajectory Lindblad integrators, measurement emulation, and the scans
and reports built on top of them.
"""

from .levels import (DecayChannel, DriveCoupling, Geometry, InteractionSpec,
                     Level, LevelScheme, eit_break_margin,
                     interaction_strength, line_geometry,
                     right_angle_geometry)
from .pulses import (ActiveDrive, Envelope, PhaseGate, PulseSequence, Segment,
                     SubspaceRotation, duration_for_pi_area, raised_cosine)
from .system import CompositeSystem, QuantumState
from .integrate import IntegratorConfig, IntegratorError, ScanAxis, \
    evolve_dense
from .trajectories import TrajectoryResult, evolve_trajectories
from .reduction import eliminate_intermediates, raman_amplitude
from .measurement import (OutcomeDistribution, apply_measurement,
                          binomial_error, loss_correct, parity_signal,
                          state_health)
from .presets import (GatePreset, load_preset, make_geometry, make_system,
                      preset_catalog)
from .sequences import (bell_prep_sequence, cnot_sequence, eit_pulse_sequence,
                        ghz_sequence, local_microwave_shift,
                        microwave_addressing_sequence, parity_sequence,
                        raman_pulse_sequence)
from .analysis import (BellReport, GhzResult, ParityFit, ScanResult,
                       TruthTable, ac_stark_shift, bell_report,
                       cnot_truth_table, crosstalk_bound, dark_states,
                       effective_rabi, eit_spectrum,
                       eliminated_eit_hamiltonian, ghz_geometry_comparison,
                       ghz_scaling, measured_bell_report,
                       microwave_addressing_report, parity_curve,
                       raman_transfer_scan, run_bell)

__version__ = "0.1.0"
