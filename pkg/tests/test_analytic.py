import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from eit5.analytic import (PRINTED_TO_MODEL, chi_at_zero_detuning, chi_reduced, chi_reduced_as_printed,
                           chi_standard_eit, dressed_excited_triplet, narrow_lorentzian,
                           narrow_resonances, narrow_width)
from eit5.model import AtomParams, FieldParams, bare_hamiltonian
from eit5.observables import dispersion_slope
from eit5.steady_state import chi_derivative, chi_numeric
from eit5.sweep import extract_features

from conftest import atoms, resonant_fields


def test_standard_eit_on_resonance_without_control():
    atom = AtomParams()
    assert chi_standard_eit(atom, 0.0, 0.0, 0.0) == pytest.approx(0.5j)
    # exactly zero RF: the general path keeps the population in b
    assert chi_numeric(atom, FieldParams(omega_mu=0.0)) == pytest.approx(0.5j, abs=1e-15)
    # relaxed doublet: half the population, and the quoted prefactor is four times larger
    assert chi_reduced(atom, FieldParams(omega_mu=0.0)) == pytest.approx(0.25j)
    assert chi_reduced_as_printed(atom, FieldParams(omega_mu=0.0)) == pytest.approx(1.0j)
    assert PRINTED_TO_MODEL == 4.0


def test_ideal_transparency_at_line_center():
    atom = AtomParams()
    assert abs(chi_standard_eit(atom, 2.0, 0.0, 0.0)) < 1e-15
    assert abs(chi_reduced(atom, FieldParams(omega_mu=2.0), 0.0)) < 1e-15


def test_closed_form_rejects_detuned_rf():
    with pytest.raises(ValueError):
        chi_reduced(AtomParams(), FieldParams(omega_b_rf=0.1, delta_b=0.01), 0.0)


def test_relaxed_limit_is_half_standard_over_random_draws(rng):
    worst = 0.0
    for _ in range(1000):
        atom = AtomParams(gamma_C=rng.uniform(0, 1e-2), gamma_Cprime=rng.uniform(0, 1e-2))
        om = rng.uniform(0, 3)
        dp = rng.uniform(-3, 3)
        a = chi_reduced(atom, FieldParams(omega_mu=om), dp)
        b = chi_standard_eit(atom, om, dp, atom.gamma_C) / 2
        worst = max(worst, abs(a - b) / abs(b))
    assert worst < 1e-12


@given(atoms(), resonant_fields())
def test_mirror_symmetry(atom, fields):
    fields = replace(fields, delta_mu=0.0)
    dp = np.linspace(0.0, 3.0, 31)
    plus, minus = chi_reduced(atom, fields, dp), chi_reduced(atom, fields, -dp)
    scale = np.max(np.abs(plus))
    assert np.allclose(plus.imag, minus.imag, atol=1e-13 * scale, rtol=0)
    assert np.allclose(plus.real, -minus.real, atol=1e-13 * scale, rtol=0)


@given(atoms(), resonant_fields())
def test_passive_medium(atom, fields):
    dp = np.linspace(-3.0, 3.0, 121)
    chi = chi_reduced(atom, fields, dp)
    assert np.all(chi.imag >= -1e-15 * np.max(np.abs(chi)))


def test_narrow_width_example():
    atom = AtomParams()
    fields = FieldParams(omega_mu=2.0, omega_b_rf=0.1, omega_c_rf=0.1)
    assert narrow_width(atom, fields) == pytest.approx(0.005)
    assert narrow_width(atom, fields) == pytest.approx(2 * 0.1 ** 2 / 2.0 ** 2)


def test_narrow_resonances_at_quoted_point():
    atom = AtomParams()
    fields = FieldParams(omega_mu=2.0, omega_b_rf=0.1, omega_c_rf=0.1)
    left, right = narrow_resonances(atom, fields)
    assert (left.center, right.center) == pytest.approx((-0.05, 0.05))
    assert right.height == pytest.approx(1.0)
    assert right.height_model == pytest.approx(0.125)
    assert right.height / right.height_model == pytest.approx(4 * fields.omega_mu / atom.gamma_ab)
    assert right.valid
    assert not narrow_resonances(atom, replace(fields, delta_mu=0.1))[0].valid


def test_narrow_resonances_match_extracted_peaks():
    atom = AtomParams()
    fields = FieldParams(omega_mu=2.0, omega_b_rf=0.1, omega_c_rf=0.1)
    dp = np.linspace(-0.1, 0.1, 40001)
    report = extract_features(dp, chi_reduced(atom, fields, dp).imag)
    peaks = sorted(report.peaks, key=lambda p: p.center)
    assert len(peaks) == 2
    for peak, res in zip(peaks, narrow_resonances(atom, fields)):
        assert peak.center == pytest.approx(res.center, abs=1e-4)
        assert peak.fwhm == pytest.approx(res.fwhm, rel=0.02)
        assert peak.height == pytest.approx(res.height_model, rel=0.02)


@pytest.mark.parametrize("gamma_cp", [0.0, 1e-3, 1e-2])
def test_lorentzian_at_figure_parameters(gamma_cp):
    atom = AtomParams(gamma_Cprime=gamma_cp)
    fields = FieldParams(omega_mu=2.0, omega_b_rf=0.1, omega_c_rf=0.1)
    exact = chi_reduced(atom, fields, 0.05).imag
    assert narrow_lorentzian(atom, fields, 0.05) == pytest.approx(exact, rel=0.05)
    # the quoted amplitude is larger by 4 Omega_mu / gamma_ab
    assert narrow_lorentzian(atom, fields, 0.05, printed=True) == pytest.approx(
        8 * narrow_lorentzian(atom, fields, 0.05))


def test_lorentzian_where_narrow_feature_dominates(rng):
    checked, worst = 0, 0.0
    for _ in range(20000):
        om = rng.uniform(0.5, 3.0)
        atom = AtomParams(gamma_C=rng.uniform(0, 1e-2), gamma_Cprime=rng.uniform(0, 1e-2))
        fields = FieldParams(omega_mu=om, omega_b_rf=rng.uniform(0, 0.1) * om,
                             omega_c_rf=rng.uniform(0, 0.1) * om)
        center = fields.omega_b_rf / 2
        approx = narrow_lorentzian(atom, fields, center)
        background = chi_standard_eit(atom, om, center, atom.gamma_C).imag / 2
        # resolved pair standing well above the plain-EIT background
        if fields.omega_b_rf < 10 * narrow_width(atom, fields) or approx < 50 * background:
            continue
        exact = chi_reduced(atom, fields, center).imag
        worst = max(worst, abs(exact - approx) / exact)
        checked += 1
    assert checked > 500
    assert worst < 0.05


def test_lorentzian_misses_background_when_control_coupling_is_weak():
    atom = AtomParams(gamma_C=4.7e-3, gamma_Cprime=6.5e-3)
    fields = FieldParams(omega_mu=0.57, omega_b_rf=0.0403, omega_c_rf=0.00294)
    exact = chi_reduced(atom, fields, fields.omega_b_rf / 2).imag
    approx = narrow_lorentzian(atom, fields, fields.omega_b_rf / 2)
    assert approx < 0.05 * exact


def test_triplet_without_rf():
    t = dressed_excited_triplet(2.0, 0.0, 0.0)
    assert (t.energies["+"], t.energies["-"], t.energies["0"]) == pytest.approx((1.0, -1.0, 0.0))
    assert abs(abs(t.states["0"][2]) - 1) < 1e-15
    assert np.allclose(t.transition_detunings, [-1, -1, 0, 0, 1, 1])


def test_triplet_three_four_five():
    t = dressed_excited_triplet(3.0, 4.0, 0.0)
    assert (t.energies["+"], t.energies["-"]) == pytest.approx((2.5, -2.5))
    assert math.tan(t.theta) == pytest.approx(3.0 / 4.0)


@given(st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.floats(0.0, 3.0))
def test_triplet_diagonalizes_excited_block(om, oc, ob):
    assume(om + oc > 1e-3)
    H = bare_hamiltonian(FieldParams(omega_mu=om, omega_c_rf=oc))
    block = H[np.ix_([0, 3, 4], [0, 3, 4])]
    t = dressed_excited_triplet(om, oc, ob)
    basis = np.array([t.states[k] for k in "+-0"])
    assert np.allclose(basis @ basis.T, np.eye(3), atol=1e-12)
    for key in "+-0":
        v = t.states[key]
        assert np.allclose(block @ v, t.energies[key] * v, atol=1e-12)
    expected = sorted(s * ob / 2 + e for s in (-1, 1) for e in t.energies.values())
    assert np.allclose(t.transition_detunings, expected)


def test_zero_detuning_formulas_at_slow_light_parameters():
    atom = AtomParams(gamma_C=6e-4, gamma_Cprime=6e-4)
    fields = FieldParams(omega_mu=2.0, omega_b_rf=0.06, omega_c_rf=0.06)
    res = chi_at_zero_detuning(atom, fields)
    assert res.valid
    exact = chi_numeric(atom, fields, 0.0)
    slope = chi_derivative(atom, fields, 0.0).real
    assert res.im_chi == pytest.approx(exact.imag, rel=0.02)
    assert res.dispersion_slope == pytest.approx(slope, rel=0.02)
    assert res.im_chi_symmetric == pytest.approx(exact.imag, rel=0.02)
    assert res.dispersion_slope_symmetric == pytest.approx(slope, rel=0.02)
    numeric = dispersion_slope(lambda x: chi_reduced(atom, fields, x), 0.0, 1e-5)
    assert numeric.value == pytest.approx(slope, rel=1e-6)


def test_zero_detuning_absorption_without_dephasing():
    # Im chi(0) -> gamma_ab^2 (Omega_b^2 - Omega_c^2)^2 / (Omega_b^2 Omega_mu^4) from the closed form
    atom = AtomParams()
    fields = FieldParams(omega_mu=2.0, omega_b_rf=0.01, omega_c_rf=0.02)
    res = chi_at_zero_detuning(atom, fields)
    exact = chi_reduced(atom, fields, 0.0).imag
    leading = (0.01 ** 2 - 0.02 ** 2) ** 2 / (0.01 ** 2 * 2.0 ** 4)
    assert exact == pytest.approx(leading, rel=1e-3)
    assert res.im_chi == pytest.approx(exact, rel=0.02)
    assert res.im_chi_as_printed == pytest.approx(4 * res.im_chi, rel=1e-12)


def test_zero_detuning_validity_flag():
    atom = AtomParams(gamma_C=6e-3, gamma_Cprime=6e-3)
    fields = FieldParams(omega_mu=2.0, omega_b_rf=0.06, omega_c_rf=0.06)
    assert not chi_at_zero_detuning(atom, fields).valid
