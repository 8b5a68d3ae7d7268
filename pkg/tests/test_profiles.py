import math

import numpy as np
import pytest

from rotorrouter.lattice import DirectionOrdering
from rotorrouter.profiles import (
    EULER_GAMMA, RadialProfile, axis_profile, fit_root_exponent, ftilde_root, green_compare,
    green_tilde, profile3d,
)
from rotorrouter.rotornd import grow

CYCLIC2 = DirectionOrdering.cyclic(2)
CYCLIC3 = DirectionOrdering.cyclic(3)


def planted(lam, r0=100.0, c=3.0):
    r = np.arange(0, 101, dtype=np.float64)
    return RadialProfile(r, c * np.clip(r0 - r, 0, None) ** lam)


@pytest.mark.parametrize("lam", [2.0, 2.232, 1.5])
def test_fit_recovers_planted_exponent(lam):
    fit = fit_root_exponent(planted(lam))
    assert fit.r0 == pytest.approx(100.0)
    assert abs(fit.lam - lam) < 0.01
    assert fit.n_samples >= 40 and fit.residual < 1e-12


def test_fit_window_checks():
    prof = planted(2.0)
    with pytest.raises(ValueError):
        fit_root_exponent(prof, (0.9, 0.5))
    with pytest.raises(ValueError):
        fit_root_exponent(prof, (0.5, 1.2))
    with pytest.raises(ValueError):
        fit_root_exponent(prof, (0.97, 0.98))


def test_root_interpolates():
    prof = RadialProfile([0, 1, 2, 3], [9, 4, -4, 0])
    assert prof.root() == pytest.approx(1.5)
    assert RadialProfile([0, 1], [0, 3]).root() == 0.0
    with pytest.raises(ValueError):
        RadialProfile([0, 1], [1, 1]).root()


def test_profile_validation():
    with pytest.raises(ValueError):
        RadialProfile([0, 2, 1], [1, 1, 1])
    with pytest.raises(ValueError):
        RadialProfile([0, 1], [1])


def test_green_tilde_values():
    assert EULER_GAMMA == pytest.approx(0.5772156649015329, abs=1e-16)
    assert float(green_tilde(1)) == pytest.approx(0.2573438, abs=1e-6)
    assert float(green_tilde(math.e)) - float(green_tilde(1)) == pytest.approx(1 / (2 * math.pi))
    with pytest.raises(ValueError):
        green_tilde(0.5)


def test_axis_profile_and_green_rows():
    s = grow(3000, CYCLIC2, method="sequential")
    prof = axis_profile(s)
    assert prof.values[-1] == 0 and (prof.values[:-1] > 0).all()
    assert prof.values.dtype.kind == "i"
    assert prof.values[0] == s.visits_at((0, 0))
    assert 0.8 * math.sqrt(3000 / math.pi) < prof.root() < 1.2 * math.sqrt(3000 / math.pi)
    rows = green_compare(s)
    assert rows[0][2] is None and rows[0][3] is None
    for r, h, f, ft in rows[1:]:
        assert ft - f == pytest.approx(3000 / 2)
    assert ftilde_root(s) >= 1.0
    with pytest.raises(ValueError):
        axis_profile(s, 3)


def test_negative_axis_profile_mirrors():
    s = grow(2000, DirectionOrdering.axial(2), method="sequential")
    for axis in (-1, 2, -2):
        assert axis_profile(s, axis).root() == pytest.approx(axis_profile(s, 1).root(), abs=2)


def test_profile3d_rows():
    s = grow(1500, CYCLIC3, method="sequential")
    rows = profile3d(s)
    assert rows[0][2] is None and rows[1][2] == 1500
    assert rows[-1][1] == 0
    with pytest.raises(ValueError):
        profile3d(grow(10, CYCLIC2, method="sequential"))
    with pytest.raises(ValueError):
        green_compare(s)
