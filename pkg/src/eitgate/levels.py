"""Atomic level schemes, drive couplings, decay structure, interactions.

A :class:`LevelScheme` is a frozen value object describing one atom in
the rotating frame: the diagonal energy offsets, the dipole decay
channels, and the set of drive couplings that pulse segments may switch
on.  Composite registers are assembled in :mod:`eitgate.system`.

Sign convention for the rotating-frame diagonal: the two-photon Raman
detuning ``delta`` enters as ``+delta`` on ``q0``, the coupling-laser
two-photon detuning ``delta_c`` as ``+delta_c`` on ``r``, and each
intermediate level sits at ``-Delta_fe``.  With this choice the located
Raman transfer optimum and the EIT resonance come out at positive
detunings, matching the sign convention of the reported scans.
"""

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping

import numpy as np

from .angular import branching_from_excited
from .units import TWO_PI

CATEGORIES = ("computational", "intermediate", "rydberg", "leakage")


@dataclass(frozen=True)
class Level:
    """One atomic basis state.

    ``energy_offset`` is the rotating-frame diagonal in rad/s.
    ``readout_bucket`` records which fluorescence outcome a state
    contributes to under state-selective detection: "0" for the lower
    hyperfine manifold, "1" for the upper one, None for states that are
    dark or ejected (Rydberg, transient intermediates, lost atoms).
    """

    label: str
    energy_offset: float
    category: str
    readout_bucket: str | None = None

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown level category {self.category!r}")
        if self.readout_bucket not in (None, "0", "1"):
            raise ValueError(f"readout_bucket must be '0', '1', or None")


@dataclass(frozen=True)
class DecayChannel:
    """Population decay ``from_level -> to_level`` at ``rate`` (rad/s).

    ``envelope_id`` of None means the rate is constant.  Otherwise the
    instantaneous rate is ``rate * e(t)**2`` where ``e`` is the named
    envelope of the active segment; this is how reduced schemes carry
    drive-induced scattering.  ``from_level == to_level`` denotes pure
    dephasing (jump operator proportional to the level projector).
    """

    from_level: str
    to_level: str
    rate: float
    envelope_id: str | None = None

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("decay rate must be nonnegative")

    @property
    def is_dephasing(self):
        return self.from_level == self.to_level


@dataclass(frozen=True)
class DriveCoupling:
    """A switchable field coupling two levels.

    ``peak_rabi`` is the Rabi frequency at unit envelope (rad/s); the
    Hamiltonian carries ``peak_rabi/2`` off-diagonals.  ``detuning`` is
    the single-field detuning consistent with the scheme's diagonal
    decomposition; it is bookkeeping for timeline export, the dynamics
    reads detunings from the level offsets.  ``envelope_power`` is the
    power of the segment envelope multiplying the amplitude (2 for
    two-photon effective drives in reduced schemes).
    """

    name: str
    lower: str
    upper: str
    peak_rabi: float
    detuning: float = 0.0
    envelope_id: str = "const"
    phase: float = 0.0
    envelope_power: int = 1

    def __post_init__(self):
        if self.lower == self.upper:
            raise ValueError("coupling must connect two distinct levels")
        if self.peak_rabi < 0:
            raise ValueError("peak_rabi must be nonnegative")
        if self.envelope_power not in (1, 2):
            raise ValueError("envelope_power must be 1 or 2")


@dataclass(frozen=True)
class InteractionSpec:
    """Pairwise Rydberg interaction: V(R) = V_ref * (R_ref / R)**exponent."""

    reference_strength: float  # rad/s
    reference_distance: float  # um
    exponent: float = 6.0

    def __post_init__(self):
        if self.reference_strength <= 0 or self.reference_distance <= 0:
            raise ValueError("V_ref and R_ref must be positive")


def interaction_strength(spec: InteractionSpec, distance_um: float) -> float:
    """V(R) in rad/s for a pair separation in micrometers."""
    if distance_um <= 0:
        raise ValueError("pair distance must be positive")
    return spec.reference_strength * (spec.reference_distance / distance_um) ** spec.exponent


@dataclass(frozen=True)
class Geometry:
    """Site positions in the trap plane (um).  Site 0 is the control."""

    positions: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ValueError("positions must be a sequence of 2D coordinates")
        n = len(pos)
        for i in range(n):
            for j in range(i + 1, n):
                if np.hypot(*(pos[i] - pos[j])) <= 0:
                    raise ValueError(f"sites {i} and {j} coincide")

    def distance(self, i: int, j: int) -> float:
        a = np.asarray(self.positions[i])
        b = np.asarray(self.positions[j])
        return float(np.hypot(*(a - b)))

    @property
    def n_sites(self):
        return len(self.positions)


def line_geometry(n_targets: int, spacing_um: float = 4.0) -> Geometry:
    """Control at the origin, targets alternating right/left along a line."""
    pos = [(0.0, 0.0)]
    for k in range(n_targets):
        step = (k // 2 + 1) * spacing_um
        pos.append((step if k % 2 == 0 else -step, 0.0))
    return Geometry(tuple(pos))


def right_angle_geometry(n_targets: int, spacing_um: float = 4.0) -> Geometry:
    """Control at the corner, targets along two perpendicular arms."""
    pos = [(0.0, 0.0)]
    axes = [(1.0, 0.0), (0.0, 1.0)]
    for k in range(n_targets):
        ax = axes[k % 2]
        step = (k // 2 + 1) * spacing_um
        pos.append((ax[0] * step, ax[1] * step))
    return Geometry(tuple(pos))


def star_geometry(n_targets: int, spacing_um: float = 4.0) -> Geometry:
    """Control at the center, up to four targets one spacing away.

    Every control-target distance equals ``spacing_um``, the fan-out
    protocol's working distance; perpendicular targets then sit sqrt(2)
    spacings from each other and opposite ones two spacings.
    """
    if n_targets > 4:
        raise ValueError("a planar star keeps at most 4 equidistant targets")
    arms = ((1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0))
    pos = [(0.0, 0.0)]
    pos.extend((ax * spacing_um, ay * spacing_um)
               for ax, ay in arms[:n_targets])
    return Geometry(tuple(pos))


@dataclass(frozen=True)
class LevelScheme:
    levels: tuple[Level, ...]
    decays: tuple[DecayChannel, ...]
    couplings: tuple[DriveCoupling, ...]
    reference_detuning: float  # rad/s, centroid single-photon detuning
    qubit_splitting: float  # rad/s
    quadratic_shifts: Mapping[str, Mapping[str, float]] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        labels = [lv.label for lv in self.levels]
        if len(set(labels)) != len(labels):
            raise ValueError("level labels must be unique")
        comp = sorted(lv.label for lv in self.levels if lv.category == "computational")
        if comp != ["q0", "q1"]:
            raise ValueError("computational levels must be exactly q0 and q1")
        known = set(labels)
        for ch in self.decays:
            if ch.from_level not in known or ch.to_level not in known:
                raise ValueError(f"decay channel references unknown level: {ch}")
        for cp in self.couplings:
            if cp.lower not in known or cp.upper not in known:
                raise ValueError(f"coupling references unknown level: {cp}")
        names = [cp.name for cp in self.couplings]
        if len(set(names)) != len(names):
            raise ValueError("coupling names must be unique")

    # -- lookups ----------------------------------------------------------

    @property
    def dim(self):
        return len(self.levels)

    def index(self, label: str) -> int:
        for i, lv in enumerate(self.levels):
            if lv.label == label:
                return i
        raise KeyError(label)

    def level(self, label: str) -> Level:
        return self.levels[self.index(label)]

    def coupling(self, name: str) -> DriveCoupling:
        for cp in self.couplings:
            if cp.name == name:
                return cp
        raise KeyError(name)

    def has_coupling(self, name: str) -> bool:
        return any(cp.name == name for cp in self.couplings)

    def labels(self):
        return tuple(lv.label for lv in self.levels)

    def diagonal(self) -> np.ndarray:
        return np.array([lv.energy_offset for lv in self.levels], dtype=float)

    def with_offsets(self, **offsets_rad_s) -> "LevelScheme":
        """Copy of the scheme with selected level offsets replaced."""
        new_levels = tuple(
            replace(lv, energy_offset=offsets_rad_s.get(lv.label, lv.energy_offset))
            for lv in self.levels
        )
        return replace(self, levels=new_levels)

    def intermediate_labels(self):
        return tuple(lv.label for lv in self.levels if lv.category == "intermediate")

    def leakage_labels(self):
        return tuple(lv.label for lv in self.levels if lv.category == "leakage")

    def rydberg_label(self):
        ryd = [lv.label for lv in self.levels if lv.category == "rydberg"]
        if len(ryd) != 1:
            raise ValueError("scheme must contain exactly one rydberg level")
        return ryd[0]

    def total_decay_rate(self, from_label: str) -> float:
        return sum(
            ch.rate for ch in self.decays if ch.from_level == from_label and not ch.is_dephasing
        )


def aggregate_coupling_rabi(scheme: LevelScheme) -> float:
    """Root-sum-square coupling Rabi frequency over all intermediate legs.

    This is the quantity entering the coupling-laser light shift of the
    Rydberg level, sum(Omega_c^2)/(4 Delta), which is what a blockade
    shift has to beat.
    """
    total = 0.0
    ryd = scheme.rydberg_label()
    for cp in scheme.couplings:
        if ryd in (cp.lower, cp.upper):
            other = cp.lower if cp.upper == ryd else cp.upper
            if scheme.level(other).category == "intermediate":
                total += cp.peak_rabi**2
    return float(np.sqrt(total))


def eit_break_margin(scheme: LevelScheme, interaction: float) -> float:
    """Ratio of the pair shift V to the EIT protection scale Omega_c^2/(4 Delta).

    Values above 1 mean the blockade detunes the Rydberg level far enough
    to break EIT protection.  A scheme with the coupling laser off has no
    protection scale at all, reported as infinity.
    """
    if scheme.reference_detuning == 0:
        raise ValueError("reference detuning must be nonzero")
    omega_c = aggregate_coupling_rabi(scheme)
    if omega_c == 0.0:
        return float("inf")
    return interaction / (omega_c**2 / (4.0 * abs(scheme.reference_detuning)))


def branching_fractions(scheme: LevelScheme) -> dict[str, dict[str, float]]:
    """Per-destination decay fractions for each intermediate level.

    Reads the fractions directly off the scheme's decay channels, so the
    table reflects whatever the preset computed (or a user override).
    Fractions out of each intermediate level sum to 1 within 1e-12
    because presets build them from exact rationals.
    """
    out = {}
    for fe in scheme.intermediate_labels():
        total = scheme.total_decay_rate(fe)
        if total == 0:
            continue
        out[fe] = {
            ch.to_level: ch.rate / total
            for ch in scheme.decays
            if ch.from_level == fe and not ch.is_dephasing
        }
    return out


def clock_branching_table(j_excited, f_levels, m_excited=1):
    """Exact decay fractions from |F_e, m=+1> into the four bookkeeping bins.

    Returns ``{F_e: {"q0": Fr, "q1": Fr, "d3": Fr, "d4": Fr}}`` for a Cs
    ground state (I=7/2, J=1/2, F=3/4).  ``q0``/``q1`` are the m_F=0
    clock states, ``d3``/``d4`` collect everything else in the two
    ground manifolds.
    """
    table = {}
    for fe in f_levels:
        dest = branching_from_excited(
            j_excited, fe, m_excited, j_ground=Fraction(1, 2), i_nuc=Fraction(7, 2), f_grounds=(3, 4)
        )
        row = {"q0": Fraction(0), "q1": Fraction(0), "d3": Fraction(0), "d4": Fraction(0)}
        for fg, per_m in dest.items():
            for mg, frac in per_m.items():
                if mg == 0:
                    row["q0" if fg == 3 else "q1"] += frac
                else:
                    row["d3" if fg == 3 else "d4"] += frac
        table[fe] = row
    return table
