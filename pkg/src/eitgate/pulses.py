"""Pulse envelopes, timed segments, and instantaneous gate primitives.

A protocol is described as a :class:`PulseSequence`: an ordered mix of
finite-duration :class:`Segment` items (integrated by the engine) and
zero-duration items (:class:`SubspaceRotation`, :class:`PhaseGate`) that
the engine applies as exact unitaries.  All times are seconds, all
angular frequencies rad/s.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

ENVELOPE_KINDS = ("constant", "raised_cosine")


def raised_cosine(t, duration, peak=1.0):
    """Smooth turn-on/turn-off window peak*(1-cos(2 pi t/T))/2 on [0, T].

    Vanishes (with vanishing slope) at both ends and outside the window,
    so a drive using it never switches discontinuously.  Accepts scalar
    or array ``t``.
    """
    t = np.asarray(t, dtype=float)
    inside = (t >= 0.0) & (t <= duration)
    value = np.where(inside, 0.5 * peak * (1.0 - np.cos(2.0 * np.pi * t / duration)), 0.0)
    if value.ndim == 0:
        return float(value)
    return value


def duration_for_pi_area(omega_eff):
    """Window length making a raised-cosine squared-envelope drive a pi pulse.

    For a transfer whose instantaneous rate is ``omega_eff * e(t)**2`` with
    ``e`` the unit raised cosine, the pulse area is ``omega_eff * 3 T / 8``,
    so area pi requires T = 8 pi / (3 omega_eff).
    """
    if omega_eff <= 0.0:
        raise ValueError("effective rate must be positive")
    return 8.0 * np.pi / (3.0 * omega_eff)


@dataclass(frozen=True)
class Envelope:
    """Scalar modulation e(t) applied to one or more drives in a segment.

    ``peak`` is dimensionless; the physical scale lives in the coupling's
    peak Rabi frequency.  ``t`` is measured from the owning segment start.
    """

    kind: str
    duration: float
    peak: float = 1.0

    def __post_init__(self):
        if self.kind not in ENVELOPE_KINDS:
            raise ValueError(f"unknown envelope kind {self.kind!r}")
        if self.duration <= 0.0:
            raise ValueError("envelope duration must be positive")

    def value(self, t):
        if self.kind == "constant":
            t = np.asarray(t, dtype=float)
            out = np.where((t >= 0.0) & (t <= self.duration), self.peak, 0.0)
            return float(out) if out.ndim == 0 else out
        return raised_cosine(t, self.duration, self.peak)

    def area(self, power=1):
        """Integral of e(t)**power over the window (closed form)."""
        if self.kind == "constant":
            return self.peak ** power * self.duration
        if power == 1:
            return 0.5 * self.peak * self.duration
        if power == 2:
            return 0.375 * self.peak ** 2 * self.duration
        raise ValueError("area implemented for powers 1 and 2")


@dataclass(frozen=True)
class ActiveDrive:
    """One coupling turned on during a segment.

    ``site`` indexes the atom, ``coupling`` names a DriveCoupling of that
    atom's level scheme, ``envelope`` names an entry of the segment's
    envelope table.  ``scale`` multiplies the coupling's peak Rabi
    frequency and ``phase_offset`` adds to its static phase.
    """

    site: int
    coupling: str
    envelope: str
    scale: float = 1.0
    phase_offset: float = 0.0


@dataclass(frozen=True)
class Segment:
    """Finite window of continuous evolution.

    ``envelopes`` maps envelope ids to shapes; every drive references one.
    ``extra_illumination`` lists sites bathed in a named beam without a
    matching drive (scattering and quadratic level shifts still apply
    there, e.g. a coupling beam covering the control atom).
    ``detuning_offsets[site][label]`` adds a static diagonal shift (rad/s)
    for the duration of the segment only.
    """

    name: str
    start: float
    duration: float
    envelopes: Mapping[str, Envelope] = field(default_factory=dict)
    drives: tuple[ActiveDrive, ...] = ()
    extra_illumination: Mapping[str, tuple[int, ...]] = field(default_factory=dict)
    detuning_offsets: Mapping[int, Mapping[str, float]] = field(default_factory=dict)

    def __post_init__(self):
        if self.duration <= 0.0:
            raise ValueError("segment duration must be positive")
        if self.start < 0.0:
            raise ValueError("segment start must be non-negative")
        for drive in self.drives:
            if drive.envelope not in self.envelopes:
                raise ValueError(
                    f"drive on site {drive.site} references unknown envelope "
                    f"{drive.envelope!r} in segment {self.name!r}"
                )
        for env_id in self.extra_illumination:
            if env_id not in self.envelopes:
                raise ValueError(
                    f"extra illumination references unknown envelope {env_id!r}"
                )

    @property
    def stop(self):
        return self.start + self.duration

    def illuminated_sites(self, envelope_id):
        """Sites receiving the named beam: driven ones plus extras."""
        sites = {d.site for d in self.drives if d.envelope == envelope_id}
        sites.update(self.extra_illumination.get(envelope_id, ()))
        return frozenset(sites)


@dataclass(frozen=True)
class SubspaceRotation:
    """Instantaneous rotation between two levels of one atom.

    Convention: the unitary restricted to (lower, upper) is
    ``[[cos(t/2), -i e^{-i phase} sin(t/2)], [-i e^{i phase} sin(t/2), cos(t/2)]]``
    with t the rotation angle, identity elsewhere.  Models a resonant
    drive much faster than every dissipative timescale.
    """

    site: int
    lower: str
    upper: str
    theta: float
    phase: float = 0.0
    at: float = 0.0

    def matrix(self):
        c = np.cos(0.5 * self.theta)
        s = np.sin(0.5 * self.theta)
        return np.array(
            [[c, -1j * np.exp(-1j * self.phase) * s],
             [-1j * np.exp(1j * self.phase) * s, c]]
        )


@dataclass(frozen=True)
class PhaseGate:
    """Instantaneous diagonal phase on selected levels of one atom."""

    site: int
    phases: Mapping[str, float] = field(default_factory=dict)
    at: float = 0.0


INSTANT_TYPES = (SubspaceRotation, PhaseGate)


def _item_start(item):
    return item.start if isinstance(item, Segment) else item.at


def _item_stop(item):
    return item.stop if isinstance(item, Segment) else item.at


@dataclass(frozen=True)
class PulseSequence:
    """Ordered protocol: segments plus instantaneous gates.

    Items must be sorted by start time and segments must not overlap.
    An instant sitting strictly inside a segment window is rejected; it
    may coincide with a segment boundary.
    """

    items: tuple
    name: str = ""

    def __post_init__(self):
        window = None
        prev_start = -np.inf
        for item in self.items:
            if not isinstance(item, (Segment,) + INSTANT_TYPES):
                raise TypeError(f"unsupported sequence item {type(item).__name__}")
            start = _item_start(item)
            if start < prev_start - 1e-15:
                raise ValueError("sequence items must be ordered by start time")
            prev_start = start
            if isinstance(item, Segment):
                if window is not None and start < window[1] - 1e-12:
                    raise ValueError(
                        f"segment {item.name!r} overlaps the previous segment"
                    )
                window = (item.start, item.stop)
            elif window is not None:
                if window[0] + 1e-12 < start < window[1] - 1e-12:
                    raise ValueError("instantaneous gate inside a segment window")

    @property
    def duration(self):
        return max((_item_stop(i) for i in self.items), default=0.0)

    @property
    def segments(self):
        return tuple(i for i in self.items if isinstance(i, Segment))

    def shifted(self, offset):
        """Copy with every start time moved by ``offset`` seconds."""
        moved = []
        for item in self.items:
            if isinstance(item, Segment):
                moved.append(replace(item, start=item.start + offset))
            else:
                moved.append(replace(item, at=item.at + offset))
        return PulseSequence(tuple(moved), name=self.name)

    def then(self, other, gap=0.0):
        """Concatenate ``other`` after this sequence."""
        tail = other.shifted(self.duration + gap)
        return PulseSequence(
            self.items + tail.items, name=self.name or other.name
        )

    def timeline_rows(self):
        """Plot-ready rows, one per drive (or instant gate).

        Columns: start_us, duration_us, site, coupling, envelope,
        peak_scale, detuning_MHz, phase_rad.  Detunings come from the
        segment's per-site offsets on the coupling's upper level.
        """
        rows = []
        for item in self.items:
            if isinstance(item, Segment):
                for d in item.drives:
                    offs = item.detuning_offsets.get(d.site, {})
                    det = sum(offs.values()) / (2e6 * np.pi) if offs else 0.0
                    rows.append(
                        (item.start * 1e6, item.duration * 1e6, d.site,
                         d.coupling, d.envelope,
                         d.scale * item.envelopes[d.envelope].peak,
                         det, d.phase_offset)
                    )
            elif isinstance(item, SubspaceRotation):
                rows.append(
                    (item.at * 1e6, 0.0, item.site,
                     f"{item.lower}>{item.upper}", "instant",
                     item.theta, 0.0, item.phase)
                )
            else:
                label = ";".join(
                    f"{k}:{v:.6g}" for k, v in sorted(item.phases.items())
                )
                rows.append(
                    (item.at * 1e6, 0.0, item.site, f"phase[{label}]",
                     "instant", 0.0, 0.0, 0.0)
                )
        return rows

    def to_dict(self):
        """Plain-data form whose floats round-trip exactly through JSON."""
        out = []
        for item in self.items:
            if isinstance(item, Segment):
                out.append({
                    "type": "segment",
                    "name": item.name,
                    "start": item.start,
                    "duration": item.duration,
                    "envelopes": {
                        k: {"kind": e.kind, "duration": e.duration, "peak": e.peak}
                        for k, e in item.envelopes.items()
                    },
                    "drives": [
                        {"site": d.site, "coupling": d.coupling,
                         "envelope": d.envelope, "scale": d.scale,
                         "phase_offset": d.phase_offset}
                        for d in item.drives
                    ],
                    "extra_illumination": {
                        k: list(v) for k, v in item.extra_illumination.items()
                    },
                    "detuning_offsets": {
                        str(site): dict(sh)
                        for site, sh in item.detuning_offsets.items()
                    },
                })
            elif isinstance(item, SubspaceRotation):
                out.append({
                    "type": "rotation", "site": item.site,
                    "lower": item.lower, "upper": item.upper,
                    "theta": item.theta, "phase": item.phase, "at": item.at,
                })
            else:
                out.append({
                    "type": "phase", "site": item.site,
                    "phases": dict(item.phases), "at": item.at,
                })
        return {"name": self.name, "items": out}

    @staticmethod
    def from_dict(data):
        items = []
        for raw in data["items"]:
            kind = raw["type"]
            if kind == "segment":
                items.append(Segment(
                    name=raw["name"], start=raw["start"],
                    duration=raw["duration"],
                    envelopes={
                        k: Envelope(e["kind"], e["duration"], e["peak"])
                        for k, e in raw["envelopes"].items()
                    },
                    drives=tuple(
                        ActiveDrive(d["site"], d["coupling"], d["envelope"],
                                    d["scale"], d["phase_offset"])
                        for d in raw["drives"]
                    ),
                    extra_illumination={
                        k: tuple(v)
                        for k, v in raw["extra_illumination"].items()
                    },
                    detuning_offsets={
                        int(site): dict(sh)
                        for site, sh in raw["detuning_offsets"].items()
                    },
                ))
            elif kind == "rotation":
                items.append(SubspaceRotation(
                    raw["site"], raw["lower"], raw["upper"],
                    raw["theta"], raw["phase"], raw["at"]))
            elif kind == "phase":
                items.append(PhaseGate(raw["site"], dict(raw["phases"]), raw["at"]))
            else:
                raise ValueError(f"unknown sequence item type {kind!r}")
        return PulseSequence(tuple(items), name=data.get("name", ""))
