"""Level schemes, geometries, and interaction scaling."""

import numpy as np
import pytest

from eitgate.levels import (Geometry, InteractionSpec, interaction_strength,
                            line_geometry, right_angle_geometry,
                            star_geometry)
from eitgate.presets import INTERACTION
from eitgate.units import TWO_PI, to_mhz


def test_interaction_reference_point():
    assert to_mhz(interaction_strength(INTERACTION, 6.0)) == pytest.approx(
        34.9, rel=1e-12)


def test_interaction_power_law():
    # 1/R^6 from the reference: 4 um is (6/4)^6 = 11.390625 times stronger
    v6 = interaction_strength(INTERACTION, 6.0)
    v4 = interaction_strength(INTERACTION, 4.0)
    assert v4 / v6 == pytest.approx(1.5 ** 6, rel=1e-12)
    v8 = interaction_strength(INTERACTION, 8.0)
    assert v6 / v8 == pytest.approx((8.0 / 6.0) ** 6, rel=1e-12)


def test_interaction_rejects_nonpositive_distance():
    spec = InteractionSpec(TWO_PI * 1e6, 6.0, 6)
    with pytest.raises(ValueError):
        interaction_strength(spec, 0.0)


def test_line_geometry_distances():
    g = line_geometry(2, spacing_um=4.0)
    assert g.distance(0, 1) == pytest.approx(4.0)
    assert g.distance(0, 2) == pytest.approx(4.0)
    assert g.distance(1, 2) == pytest.approx(8.0)


def test_right_angle_geometry_distances():
    g = right_angle_geometry(2, spacing_um=4.0)
    assert g.distance(0, 1) == pytest.approx(4.0)
    assert g.distance(0, 2) == pytest.approx(4.0)
    assert g.distance(1, 2) == pytest.approx(4.0 * np.sqrt(2.0))


def test_star_geometry_keeps_working_distance():
    for k in (1, 2, 3, 4):
        g = star_geometry(k, spacing_um=4.0)
        for t in range(1, k + 1):
            assert g.distance(0, t) == pytest.approx(4.0)
    g = star_geometry(4, spacing_um=4.0)
    # perpendicular arms sit sqrt(2) spacings apart, opposite ones two
    seps = sorted(round(g.distance(a, b), 6)
                  for a in range(1, 5) for b in range(a + 1, 5))
    assert seps == pytest.approx([4.0 * np.sqrt(2.0)] * 4 + [8.0] * 2)


def test_star_geometry_caps_at_four():
    with pytest.raises(ValueError):
        star_geometry(5)


def test_schemes_expose_clock_pair(table_preset, fast_preset):
    for preset in (table_preset, fast_preset):
        labels = [l.label for l in preset.target.levels]
        assert labels[:2] == ["q0", "q1"]
        assert "r" in labels
        inter = preset.target.intermediate_labels()
        assert all(lbl.startswith("fe") for lbl in inter)


def test_branching_fractions_close(table_preset):
    from eitgate.levels import branching_fractions

    table = branching_fractions(table_preset.target)
    for label, outs in table.items():
        assert sum(outs.values()) == pytest.approx(1.0, abs=1e-9), label
