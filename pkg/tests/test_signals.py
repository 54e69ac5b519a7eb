import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import erfc

from pudtai.signals import (
    ApertureSpec,
    Domain,
    GaussianParams,
    SampledField,
    TwoSourceSpec,
    apply_aperture,
    centered_axis,
    default_time_grid,
    gaussian_envelope,
    gaussian_spectrum,
    hermite_gauss1_envelope,
    hermite_gauss1_spectrum,
    phase_average,
    synthesize_two_source,
    to_conjugate,
)

W = centered_axis(4096, 8.0)


def test_gaussian_peak_value():
    g = gaussian_spectrum(GaussianParams(), W)
    assert g.samples[W.size // 2].real == pytest.approx((2 * np.pi) ** -0.25, rel=1e-12)
    assert (2 * np.pi) ** -0.25 == pytest.approx(0.631619, abs=1e-6)


def test_gaussian_unit_norm():
    assert gaussian_spectrum(GaussianParams(), W).norm() == pytest.approx(1.0, abs=1e-9)


def test_scale_covariance():
    # oracle: direct substitution of the closed form at sigma = 1
    w = centered_axis(4096, 16.0)
    g2 = gaussian_spectrum(GaussianParams(sigma=2.0), w)
    g1 = gaussian_spectrum(GaussianParams(sigma=1.0), w)
    v2 = g2.samples[np.argmin(np.abs(w - 2.0))]
    v1 = g1.samples[np.argmin(np.abs(w - 1.0))]
    assert v2.real == pytest.approx(v1.real / np.sqrt(2), rel=1e-12)


def test_rejects_bad_sigma_and_short_grid():
    with pytest.raises(ValueError):
        GaussianParams(sigma=0.0)
    with pytest.raises(ValueError):
        gaussian_spectrum(GaussianParams(), centered_axis(256, 3.0))


def test_hg1_odd_and_orthogonal():
    p = GaussianParams()
    h = hermite_gauss1_spectrum(p, W)
    g = gaussian_spectrum(p, W)
    assert h.samples[W.size // 2] == 0
    assert h.norm() == pytest.approx(1.0, abs=1e-8)
    assert abs(np.sum(np.conj(g.samples) * h.samples) * g.step) < 1e-9


def _expansion_residual(eps):
    p = GaussianParams()
    g = lambda w: (np.sqrt(2 * np.pi)) ** -0.5 * np.exp(-(w**2) / 4)
    h = hermite_gauss1_spectrum(p, W).samples.real
    return np.max(np.abs(g(W - eps / 2) - (g(W) + eps / 4 * h)))


def test_hg1_first_order_expansion():
    assert _expansion_residual(0.1) <= 3e-3


@pytest.mark.parametrize("eps", [0.02, 0.05, 0.1])
def test_expansion_residual_is_quadratic(eps):
    ratio = _expansion_residual(2 * eps) / _expansion_residual(eps)
    assert ratio == pytest.approx(4.0, rel=0.1)


def test_time_envelopes_are_transforms_of_spectra():
    t = default_time_grid()
    for env, spec in ((gaussian_envelope, gaussian_spectrum), (hermite_gauss1_envelope, hermite_gauss1_spectrum)):
        f = to_conjugate(env(GaussianParams(), t))
        ref = spec(GaussianParams(), f.axis).samples
        np.testing.assert_allclose(f.samples, ref, rtol=0, atol=1e-10)


def test_two_source_eps0_phi0():
    t = default_time_grid()
    s = synthesize_two_source(TwoSourceSpec(0.0, 0.0), t)
    psi = gaussian_envelope(GaussianParams(), t).samples
    np.testing.assert_allclose(s.samples, np.sqrt(2) * psi, atol=1e-15)


def test_phase_average_is_incoherent():
    t = default_time_grid()
    psi2 = np.abs(gaussian_envelope(GaussianParams(), t).samples) ** 2
    avg = phase_average(lambda phi: synthesize_two_source(TwoSourceSpec(0.5, phi), t).intensity(), 64)
    assert np.max(np.abs(avg - psi2)) < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 4), st.integers(4, 16))
def test_phase_average_exact_for_few_phases(eps, k):
    t = centered_axis(512, 8.0)
    psi2 = np.abs(gaussian_envelope(GaussianParams(), t).samples) ** 2
    avg = phase_average(lambda phi: synthesize_two_source(TwoSourceSpec(eps, phi), t).intensity(), k)
    assert np.max(np.abs(avg - psi2)) < 1e-9


def test_two_source_spectrum_lines():
    # oracle: FFT of the synthesized shot, peak fit of the two lines
    t = centered_axis(4096, 32.0)
    eps, phi = 12.0, 1.0
    f = to_conjugate(synthesize_two_source(TwoSourceSpec(eps, phi), t))
    w, a = f.axis, f.samples
    right = w > 0
    w_r = w[right][np.argmax(np.abs(a[right]))]
    w_l = w[~right][np.argmax(np.abs(a[~right]))]
    assert w_r == pytest.approx(eps / 2, abs=f.step)
    assert w_l == pytest.approx(-eps / 2, abs=f.step)
    rel = a[np.argmin(np.abs(w + eps / 2))] / a[np.argmin(np.abs(w - eps / 2))]
    assert abs(rel) == pytest.approx(1.0, abs=1e-6)
    assert np.angle(rel) == pytest.approx(phi, abs=1e-6)


def test_two_source_spec_validation():
    with pytest.raises(ValueError):
        TwoSourceSpec(epsilon=-0.1)
    with pytest.raises(ValueError):
        TwoSourceSpec(mean_photons=0)
    with pytest.raises(ValueError):
        TwoSourceSpec(phi=2 * np.pi)


def test_aperture_identity_and_norm():
    t = default_time_grid()
    g = gaussian_envelope(GaussianParams(), t)
    assert apply_aperture(g, ApertureSpec(0.0)) is g
    clipped = apply_aperture(g, ApertureSpec(0.564))
    # oracle: Gaussian tail quadrature
    tail = 2 * quad(lambda x: np.sqrt(2 / np.pi) * np.exp(-2 * x * x), 0.564, np.inf)[0]
    assert clipped.norm() == pytest.approx(tail, abs=2e-3)
    assert tail == pytest.approx(erfc(np.sqrt(2) * 0.564), rel=1e-10)
    assert tail == pytest.approx(0.2594, abs=1e-4)


def test_aperture_converges_with_grid():
    errs = []
    for n in (1024, 4096, 16384):
        g = gaussian_envelope(GaussianParams(), centered_axis(n, 8.0))
        errs.append(abs(apply_aperture(g, ApertureSpec(0.564)).norm() - erfc(np.sqrt(2) * 0.564)))
    assert errs[2] < errs[0]


def test_aperture_symmetric_idempotent():
    t = centered_axis(4097, 8.0 * 4097 / 4096)
    g = gaussian_envelope(GaussianParams(), t)
    once = apply_aperture(g, ApertureSpec(0.7))
    twice = apply_aperture(once, ApertureSpec(0.7))
    np.testing.assert_array_equal(once.samples, twice.samples)
    np.testing.assert_allclose(once.samples, once.samples[::-1], atol=1e-15)
    assert once.norm() <= g.norm()


def test_aperture_rejects_frequency_domain():
    f = gaussian_spectrum(GaussianParams(), W)
    with pytest.raises(ValueError):
        apply_aperture(f, ApertureSpec(0.5))


def test_sampled_field_invariants():
    with pytest.raises(ValueError):
        SampledField(Domain.TIME, 0.0, 0.0, np.ones(4))
    with pytest.raises(ValueError):
        SampledField(Domain.TIME, 0.0, 1.0, np.ones(1))
    with pytest.raises(ValueError):
        SampledField(Domain.TIME, 0.0, 1.0, np.array([1.0, np.inf]))
    f = SampledField("frequency", -1.0, 0.5, np.ones(4))
    assert f.domain is Domain.FREQUENCY
    np.testing.assert_allclose(f.axis, [-1, -0.5, 0, 0.5])
