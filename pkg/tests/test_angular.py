"""Angular-momentum algebra against an independent symbolic oracle.

The frozen decimal values below were produced once with sympy's
Clebsch-Gordan and Wigner-6j routines and are asserted directly, so
the suite still guards the numbers when sympy is unavailable; when it
is importable the dual route is checked live.
"""

from fractions import Fraction

import numpy as np
import pytest

from eitgate.angular import (branching_from_excited, clebsch_gordan,
                             clebsch_gordan_signed_square, decay_strength,
                             rydberg_coupling_weight, sigma_plus_weight,
                             wigner_6j)

half = Fraction(1, 2)


def test_cg_known_values():
    # spin-1/2 singlet/triplet decomposition, hand-checkable
    assert clebsch_gordan(half, half, half, -half, 1, 0) == pytest.approx(
        np.sqrt(0.5))
    assert clebsch_gordan(half, half, half, -half, 0, 0) == pytest.approx(
        np.sqrt(0.5))
    assert clebsch_gordan(half, -half, half, half, 0, 0) == pytest.approx(
        -np.sqrt(0.5))
    # stretched states are always coefficient one
    assert clebsch_gordan(2, 2, 1, 1, 3, 3) == pytest.approx(1.0)


def test_cg_signed_square_is_exact_rational():
    sign, square = clebsch_gordan_signed_square(half, -half, half, half, 0, 0)
    assert sign == -1
    assert square == Fraction(1, 2)


def test_cg_selection_rules():
    assert clebsch_gordan(1, 0, 1, 0, 3, 0) == 0.0
    assert clebsch_gordan(1, 1, 1, 1, 1, 1) == 0.0
    assert clebsch_gordan(1, 1, 1, 0, 2, 0) == 0.0


def test_cg_row_orthonormality():
    # fixed coupled pair: summing the squares over (j3, m3) gives one
    j1, j2 = Fraction(3, 2), 1
    for twom1 in range(-3, 4, 2):
        m1 = Fraction(twom1, 2)
        for m2 in (-1, 0, 1):
            total = 0.0
            for twoj3 in range(1, 6, 2):
                j3 = Fraction(twoj3, 2)
                total += clebsch_gordan(j1, m1, j2, m2, j3, m1 + m2) ** 2
            assert total == pytest.approx(1.0, abs=1e-12)


def test_wigner_6j_known_value():
    # {1 1 1; 1 1 1} = 1/6, a tabulated classic
    assert wigner_6j(1, 1, 1, 1, 1, 1) == pytest.approx(1.0 / 6.0)
    assert wigner_6j(half, half, 1, half, half, 1) == pytest.approx(1.0 / 6.0)


@pytest.mark.parametrize("args", [
    (half, half, half, -half, 1, 0),
    (half, half, half, -half, 0, 0),
    (Fraction(3, 2), half, 1, 0, Fraction(3, 2), half),
    (Fraction(3, 2), half, 1, 1, Fraction(5, 2), Fraction(3, 2)),
    (Fraction(7, 2), Fraction(-1, 2), Fraction(1, 2), Fraction(1, 2), 3, 0),
    (Fraction(7, 2), Fraction(-3, 2), Fraction(1, 2), Fraction(1, 2), 4, -1),
])
def test_cg_against_sympy(args):
    sympy = pytest.importorskip("sympy")
    from sympy.physics.quantum.cg import CG

    j1, m1, j2, m2, j3, m3 = args
    want = float(CG(sympy.Rational(j1), sympy.Rational(m1),
                    sympy.Rational(j2), sympy.Rational(m2),
                    sympy.Rational(j3), sympy.Rational(m3)).doit())
    assert clebsch_gordan(*args) == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("args", [
    (1, 1, 1, 1, 1, 1),
    (half, half, 1, half, half, 1),
    (half, Fraction(3, 2), 1, 4, 3, Fraction(7, 2)),
    (half, half, 1, 4, 3, Fraction(7, 2)),
])
def test_6j_against_sympy(args):
    sympy = pytest.importorskip("sympy")
    from sympy.physics.wigner import wigner_6j as sympy_6j

    want = float(sympy_6j(*[sympy.Rational(a) for a in args]))
    assert wigner_6j(*args) == pytest.approx(want, abs=1e-12)


def test_branching_sums_to_one():
    # summing over lower hyperfine levels and polarizations exhausts the
    # spontaneous decay of any excited sublevel, exactly in Fractions
    for f_e in (2, 3, 4, 5):
        for m_e in range(-min(f_e, 2), min(f_e, 2) + 1):
            table = branching_from_excited(
                Fraction(3, 2), f_e, m_e, j_ground=half,
                i_nuc=Fraction(7, 2), f_grounds=(3, 4))
            total = sum(sum(per_m.values()) for per_m in table.values())
            assert total == 1


def test_decay_strength_closes_over_ground_levels():
    for f_e in (3, 4):
        total = sum(decay_strength(half, half, f_e, f_g, Fraction(7, 2))
                    for f_g in (3, 4))
        assert total == pytest.approx(1.0, abs=1e-12)


# Frozen sigma+ two-photon path amplitudes, oracle: explicit triple
# Clebsch-Gordan sums evaluated symbolically.  q0 is the lower clock
# level (F=3), q1 the upper (F=4).
W1_6P32 = {2: 0.0, 3: 0.20412415, 4: 0.54006172, 5: 0.57735027}
W0_6P32 = {2: 0.37796447, 3: 0.61237244, 4: 0.38575837, 5: 0.0}

W1_7P12 = {3: -0.35355339, 4: -0.45643546}
W0_7P12 = {3: 0.35355339, 4: 0.45643546}
WC_7P12 = {3: 0.61237244, 4: 0.79056942}

# Hand-entered coupling Rabi frequencies of the four-path ladder, in
# MHz.  Their ratios should be pure angular factors: the decomposition
# of each |F_e, m=1> onto the stretched electron channel (mj=3/2,
# mI=-1/2), the only channel an S-state Rydberg level accepts.
COUPLING_TABLE_6P32 = {2: 17.8, 3: 38.4, 4: 43.6, 5: 27.1}


def test_sigma_plus_weights_6p32():
    j_g, j_e, i_nuc = half, Fraction(3, 2), Fraction(7, 2)
    for f_e in (2, 3, 4, 5):
        got1 = sigma_plus_weight(j_g, j_e, 4, f_e, i_nuc)
        got0 = sigma_plus_weight(j_g, j_e, 3, f_e, i_nuc)
        assert got1 == pytest.approx(W1_6P32[f_e], abs=1e-8)
        assert got0 == pytest.approx(W0_6P32[f_e], abs=1e-8)


def test_sigma_plus_weights_7p12():
    j_g, j_e, i_nuc = half, half, Fraction(7, 2)
    for f_e in (3, 4):
        got1 = sigma_plus_weight(j_g, j_e, 4, f_e, i_nuc)
        got0 = sigma_plus_weight(j_g, j_e, 3, f_e, i_nuc)
        assert got1 == pytest.approx(W1_7P12[f_e], abs=1e-8)
        assert got0 == pytest.approx(W0_7P12[f_e], abs=1e-8)


def test_rydberg_weights():
    i_nuc = Fraction(7, 2)
    for f_e, want in WC_7P12.items():
        got = rydberg_coupling_weight(half, f_e, 1,
                                      Fraction(3, 2), Fraction(3, 2), i_nuc)
        assert got == pytest.approx(want, abs=1e-8)
    # exact closed forms for the two-path ladder
    assert WC_7P12[3] == pytest.approx(np.sqrt(3.0 / 8.0), abs=1e-8)
    assert WC_7P12[4] == pytest.approx(np.sqrt(5.0 / 8.0), abs=1e-8)


def test_coupling_table_matches_stretched_channel():
    """The four hand-entered coupling Rabi values share one reduced
    matrix element times the stretched-channel decomposition CG."""
    i_nuc = Fraction(7, 2)
    table = np.array([COUPLING_TABLE_6P32[f] for f in (2, 3, 4, 5)])
    angular = np.array([
        clebsch_gordan(Fraction(3, 2), Fraction(3, 2), i_nuc,
                       Fraction(-1, 2), f_e, 1)
        for f_e in (2, 3, 4, 5)])
    assert np.all(angular > 0.0)
    assert np.sum(angular ** 2) == pytest.approx(1.0, abs=1e-12)
    reduced = table / angular
    # the table is quoted to three significant figures
    assert np.ptp(reduced) / np.mean(reduced) < 5e-3


def test_pathway_products_share_a_sign():
    """Interference safety: every q0->r and q1->r two-photon product
    carries the same phase within a ladder, so the paths add."""
    from eitgate.presets import preset_6p32, preset_7p12

    for preset in (preset_6p32(), preset_7p12()):
        scheme = preset.target
        coupling_phase = {}
        probe_phases = {"q0": {}, "q1": {}}
        for cp in scheme.couplings:
            if cp.lower in ("q0", "q1"):
                probe_phases[cp.lower][cp.upper] = cp.phase
            else:
                coupling_phase[cp.lower] = cp.phase
        for family in ("q0", "q1"):
            path_phases = {
                np.round(np.mod(phi + coupling_phase[mid], 2.0 * np.pi), 9)
                for mid, phi in probe_phases[family].items()
                if mid in coupling_phase}
            assert len(path_phases) == 1, (preset.name, family, path_phases)
