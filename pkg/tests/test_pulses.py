"""Envelope shapes, pulse areas, and sequence assembly."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eitgate.pulses import (Envelope, PulseSequence, Segment,
                            SubspaceRotation, duration_for_pi_area,
                            raised_cosine)


def test_raised_cosine_shape():
    duration = 2e-6
    assert raised_cosine(0.0, duration) == 0.0
    assert raised_cosine(duration, duration) == 0.0
    assert raised_cosine(0.5 * duration, duration) == pytest.approx(1.0)
    assert raised_cosine(-1e-9, duration) == 0.0
    assert raised_cosine(duration + 1e-9, duration) == 0.0


def test_raised_cosine_array_matches_scalar():
    duration = 1e-6
    ts = np.linspace(-0.1e-6, 1.1e-6, 37)
    vals = raised_cosine(ts, duration)
    for t, v in zip(ts, vals):
        assert v == raised_cosine(float(t), duration)


@given(st.floats(min_value=1e-8, max_value=1e-4),
       st.floats(min_value=0.1, max_value=10.0))
@settings(max_examples=25, deadline=None)
def test_envelope_areas_match_quadrature(duration, peak):
    env = Envelope("raised_cosine", duration, peak)
    ts = np.linspace(0.0, duration, 20001)
    for power in (1, 2):
        numeric = np.trapezoid(env.value(ts) ** power, ts)
        assert env.area(power) == pytest.approx(numeric, rel=1e-6)


def test_duration_for_pi_area():
    omega = 2.0 * np.pi * 0.6681e6
    t = duration_for_pi_area(omega)
    # squared raised cosine integrates to 3T/8, so omega * 3T/8 = pi
    assert omega * 0.375 * t == pytest.approx(np.pi, rel=1e-12)
    assert t == pytest.approx(1.9956e-6, rel=1e-3)
    with pytest.raises(ValueError):
        duration_for_pi_area(0.0)


def test_envelope_validation():
    with pytest.raises(ValueError):
        Envelope("triangle", 1e-6)
    with pytest.raises(ValueError):
        Envelope("constant", -1e-6)
    with pytest.raises(ValueError):
        Envelope("raised_cosine", 1e-6).area(3)


def test_subspace_rotation_matrix_is_unitary():
    for theta in (0.3, np.pi / 2, np.pi):
        for phase in (0.0, 0.7, np.pi):
            u = SubspaceRotation(0, "q0", "q1", theta, phase=phase).matrix()
            assert np.allclose(u @ u.conj().T, np.eye(2), atol=1e-14)
    # a pi rotation moves all population across
    u = SubspaceRotation(0, "q0", "q1", np.pi, phase=0.3).matrix()
    assert abs(u[0, 0]) < 1e-14
    assert abs(u[1, 0]) == pytest.approx(1.0, abs=1e-14)


def test_sequence_ordering_and_duration():
    seg = Segment("probe", start=0.0, duration=1e-6,
                  envelopes={"p": Envelope("raised_cosine", 1e-6)})
    seq = PulseSequence((seg,))
    assert seq.duration == pytest.approx(1e-6)
    gate = SubspaceRotation(0, "q0", "q1", np.pi, at=2e-6)
    seq2 = PulseSequence((seg, gate))
    assert seq2.duration == pytest.approx(2e-6)


def test_sequence_rejects_overlap_and_interior_instants():
    a = Segment("a", start=0.0, duration=1e-6)
    b = Segment("b", start=0.5e-6, duration=1e-6)
    with pytest.raises(ValueError):
        PulseSequence((a, b))
    inside = SubspaceRotation(0, "q0", "q1", np.pi, at=0.5e-6)
    with pytest.raises(ValueError):
        PulseSequence((a, inside))
    # boundary instants are allowed
    PulseSequence((a, SubspaceRotation(0, "q0", "q1", np.pi, at=1e-6)))
