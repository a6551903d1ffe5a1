"""Detection rules, loss correction, and the parity observable."""

import numpy as np
import pytest

from conftest import random_density
from eitgate.measurement import (apply_measurement, binomial_error,
                                 loss_correct, parity_signal,
                                 parity_signal_direct, state_health)
from eitgate.presets import make_system, preset_7p12
from eitgate.system import QuantumState


@pytest.fixture(scope="module")
def pair_system():
    return make_system(preset_7p12(), reduced=True)


def _phi_plus(system):
    vec = np.zeros(system.dim, dtype=complex)
    i00 = np.ravel_multi_index((system.scheme(0).index("q0"),
                                system.scheme(1).index("q0")), system.dims)
    i11 = np.ravel_multi_index((system.scheme(0).index("q1"),
                                system.scheme(1).index("q1")), system.dims)
    vec[i00] = vec[i11] = np.sqrt(0.5)
    return QuantumState(system, vec), i00, i11


def test_both_rules_exhaust_identity(pair_system, rng):
    # random mixed states with leakage and loss population included
    for _ in range(200):
        rho = random_density(rng, pair_system.dim)
        dist = apply_measurement(QuantumState(pair_system, rho))
        assert sum(dist.probs_a.values()) == pytest.approx(1.0, abs=1e-12)
        assert sum(dist.probs_b.values()) == pytest.approx(1.0, abs=1e-12)


def test_parity_closed_form_matches_brute_force(pair_system, rng):
    phases = np.linspace(0.0, 2.0 * np.pi, 7)
    for _ in range(20):
        rho = random_density(rng, pair_system.dim)
        state = QuantumState(pair_system, rho)
        closed = parity_signal(state, phases)
        direct = [parity_signal_direct(state, phi) for phi in phases]
        assert np.max(np.abs(closed - np.asarray(direct))) < 1e-10


def test_parity_of_ideal_bell_state(pair_system):
    state, _, _ = _phi_plus(pair_system)
    phases = np.linspace(0.0, 2.0 * np.pi, 33)
    signal = parity_signal(state, phases)
    assert np.max(np.abs(signal + np.cos(2.0 * phases))) < 1e-12


def test_loss_correction_recovers_conditional(pair_system, rng):
    # one atom leaks with known probability; conditioning on both atoms
    # present must undo the dilution exactly
    scheme = pair_system.scheme(0)
    for leak in (0.0, 0.17, 0.65):
        pops = {"q0": 0.6 * (1.0 - leak), "q1": 0.4 * (1.0 - leak),
                "lost": leak}
        local = np.zeros(scheme.dim)
        for label, p in pops.items():
            local[scheme.index(label)] = p
        other = np.zeros(scheme.dim)
        other[scheme.index("q0")] = 0.3
        other[scheme.index("q1")] = 0.7
        rho = np.diag(np.kron(local, other)).astype(complex)
        dist = apply_measurement(QuantumState(pair_system, rho))
        got = loss_correct(dist.probs_a, dist.probs_b)
        assert got["presence"] == pytest.approx(1.0 - leak, abs=1e-12)
        assert got["p00"] == pytest.approx(0.6 * 0.3, abs=1e-12)


def test_loss_correction_needs_surviving_population(pair_system):
    scheme = pair_system.scheme(0)
    local = np.zeros(scheme.dim)
    local[scheme.index("lost")] = 1.0
    rho = np.diag(np.kron(local, local)).astype(complex)
    with pytest.raises(ValueError):
        loss_correct(*apply_measurement(QuantumState(pair_system, rho))[:2])


def test_binomial_error_values():
    assert binomial_error(0.25, 200) == pytest.approx(
        np.sqrt(0.25 * 0.75 / 200.0), rel=1e-12)
    assert binomial_error(0.0, 100) == 0.0
    assert binomial_error(1.0, 100) == 0.0
    with pytest.raises(ValueError):
        binomial_error(0.5, 0)


def test_state_health_flags_clean_state(pair_system):
    state, _, _ = _phi_plus(pair_system)
    health = state_health(state)
    assert health["trace_error"] < 1e-12
    assert health["hermiticity_error"] < 1e-12
    assert health["min_eigenvalue"] > -1e-12
