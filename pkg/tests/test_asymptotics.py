import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entangle_lab.asymptotics import (
    abs_phi_sq_samples,
    envelope,
    fit_decay,
    fit_decay_auto,
    superpoly_certificate,
    top_decade_grid,
)
from entangle_lab.errors import DegenerateFit, NoPeaksFound, TooFewPoints
from entangle_lab.field import r0
from entangle_lab.formfactor import CompactBump, Gaussian, QuadratureSpec, StepCutoff

SPEC = QuadratureSpec()
BUMP = CompactBump(0.5, 2.0)


def test_envelope_of_modulated_power_law():
    r = np.linspace(10, 100, 20001)
    y = np.cos(5 * r) ** 2 / r**4
    peaks = envelope(list(zip(r, y)))
    assert len(peaks) > 100
    for pr, py in peaks:
        assert abs(py * pr**4 - 1) < 0.02


@pytest.mark.parametrize("y", [lambda r: 1 / r, lambda r: r**2, lambda r: 0 * r + 3.0])
def test_envelope_without_peaks(y):
    r = np.linspace(1, 10, 50)
    with pytest.raises(NoPeaksFound):
        envelope(list(zip(r, y(r))))


def test_envelope_input_checks():
    with pytest.raises(TooFewPoints):
        envelope([(1.0, 1.0), (2.0, 2.0)])
    with pytest.raises(ValueError):
        envelope([(2.0, 1.0), (1.0, 2.0), (3.0, 0.5)])


@pytest.mark.parametrize("s", [-1, -2, -4, -8])
def test_exact_power_law_recovered(s):
    r = np.geomspace(3, 3000, 40)
    fit = fit_decay(list(zip(r, 2.5 * r**s)))
    assert abs(fit.slope - s) < 1e-6
    assert abs(fit.intercept - math.log(2.5)) < 1e-6
    assert fit.residual_rms < 1e-9
    assert fit.n_points == 40 and not fit.used_envelope


@settings(max_examples=40, deadline=None)
@given(s=st.floats(-9, -0.5), c=st.floats(1e-6, 1e6), lam=st.floats(0.01, 100))
def test_slope_scale_invariance(s, c, lam):
    r = np.geomspace(10, 1000, 25)
    y = c * r**s
    base = fit_decay(list(zip(r, y))).slope
    assert abs(fit_decay(list(zip(r, lam * y))).slope - base) < 1e-8
    assert abs(fit_decay(list(zip(lam * r, y))).slope - base) < 1e-8


def test_fit_guards():
    r = np.geomspace(10, 50, 20)
    with pytest.raises(DegenerateFit):
        fit_decay(list(zip(r, r**-2)))
    with pytest.raises(TooFewPoints):
        fit_decay([(1.0, 1.0), (10.0, 0.1), (100.0, 0.01)])
    with pytest.raises(ValueError):
        fit_decay(list(zip(np.geomspace(1, 100, 10), np.zeros(10))))


def test_auto_fit_falls_back_to_raw():
    r = np.geomspace(10, 1000, 30)
    fit = fit_decay_auto(list(zip(r, r**-3.0)), prefer_envelope=True)
    assert not fit.used_envelope and abs(fit.slope + 3) < 1e-9


def test_as_dict_keys():
    r = np.geomspace(10, 1000, 8)
    d = fit_decay(list(zip(r, r**-2.0))).as_dict()
    assert set(d) == {"slope", "intercept", "window", "n_points", "residual_rms", "used_envelope"}


def test_step_envelope_slope():
    r = np.linspace(100, 1000, 4001)
    fit = fit_decay(abs_phi_sq_samples(StepCutoff(1.0), 1.0, r, SPEC), use_envelope=True)
    assert fit.used_envelope
    assert fit.slope <= -1.9
    assert abs(fit.slope + 4) < 0.05


def test_gaussian_slope():
    r = np.geomspace(100, 1000, 32)
    fit = fit_decay_auto(abs_phi_sq_samples(Gaussian(1.0), 1.0, r, SPEC), prefer_envelope=True)
    assert fit.slope <= -1.9
    assert abs(fit.slope + 8) < 0.05


def test_r0_slope_is_twice_amplitude_slope():
    # with r1 = r2 = r, R0 = |phi|^4
    r = np.geomspace(100, 1000, 24)
    amp = fit_decay(abs_phi_sq_samples(Gaussian(1.0), 1.0, r, SPEC)).slope
    both = fit_decay([(x, r0(Gaussian(1.0), x, x, 1.0, SPEC).r0) for x in r]).slope
    assert abs(both - 2 * amp) < 0.05


def test_top_decade_grid():
    g = top_decade_grid(500.0, 7)
    assert g[0] == pytest.approx(50.0) and g[-1] == pytest.approx(500.0) and len(g) == 7


@pytest.mark.parametrize("k", [0, 2, 4, 6, 10])
def test_bump_certificate(k):
    r = np.linspace(20, 200, 256)
    assert superpoly_certificate(BUMP, 1.0, [k], r, SPEC) == [(k, True)]


def test_certificate_guards():
    r = np.linspace(20, 200, 64)
    with pytest.raises(ValueError):
        superpoly_certificate(StepCutoff(1.0), 1.0, [2], r)
    with pytest.raises(ValueError):
        superpoly_certificate(BUMP, 1.0, [-1], r)
    with pytest.raises(ValueError):
        superpoly_certificate(BUMP, 1.0, [2], [20.0, 200.0])
    with pytest.raises(ValueError):
        superpoly_certificate(BUMP, 1.0, [2], r[::-1])
