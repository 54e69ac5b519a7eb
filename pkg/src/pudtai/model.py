"""Closed-form outcome probabilities of the interferometer with imperfections.

Normalized units throughout (sigma = 1). The aperture enters through
x = t_a * sigma. Outcomes: antisymmetric port (-), symmetric port (+),
and everything else (x: loss, higher grating orders, blocked light).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import erfc as erfc_real

from ._validation import check_non_negative, check_unit_interval
from .signals import Domain, SampledField, aperture_mask
from .special import erfc, wofz

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class DeviceCalibration:
    """Port visibilities, symmetric-port transmission and aperture size."""

    v_minus: float = 1.0
    v_plus: float = 1.0
    eta_plus: float = 1.0
    t_a_sigma: float = 0.0

    def __post_init__(self):
        check_unit_interval(self.v_minus, "v_minus")
        check_unit_interval(self.v_plus, "v_plus")
        check_unit_interval(self.eta_plus, "eta_plus")
        check_non_negative(self.t_a_sigma, "t_a_sigma")

    @classmethod
    def measured(cls) -> "DeviceCalibration":
        """Calibration reported for the experiment."""
        return cls(v_minus=0.9751, v_plus=0.764, eta_plus=0.719, t_a_sigma=0.564)

    @classmethod
    def ideal(cls, t_a_sigma: float = 0.0) -> "DeviceCalibration":
        return cls(1.0, 1.0, 1.0, t_a_sigma)

    def replace(self, **kw) -> "DeviceCalibration":
        d = asdict(self)
        d.update(kw)
        return DeviceCalibration(**d)


@dataclass(frozen=True)
class PortProbabilities:
    p_minus: np.ndarray | float
    p_plus: np.ndarray | float
    p_cross: np.ndarray | float

    def as_array(self) -> np.ndarray:
        """Outcomes along the last axis: [p_minus, p_plus, p_cross]."""
        return np.stack(np.broadcast_arrays(self.p_minus, self.p_plus, self.p_cross), axis=-1)


def _unwrap(x):
    return float(x) if np.ndim(x) == 0 else x


def aux_f(t_a_sigma, epsilon):
    """f(x, eps) = Re erfc((4x + i eps) / (2 sqrt 2)), the clipped-overlap factor.

    exp(-eps^2/8) f equals the overlap of the clipped Gaussian intensity
    with cos(eps t).
    """
    x = np.asarray(t_a_sigma, dtype=float)
    eps = np.asarray(epsilon, dtype=float)
    z = (4 * x + 1j * eps) / (2 * SQRT2)
    return _unwrap(np.real(erfc(z)))


def clipped_overlap(t_a_sigma, epsilon):
    """exp(-eps^2/8) f(x, eps), the fringe term shared by both ports."""
    # exp(-b^2) erfc(a + i b) = exp(-a^2 - 2iab) w(-b + i a) keeps large eps finite.
    a = SQRT2 * np.asarray(t_a_sigma, dtype=float)
    b = np.asarray(epsilon, dtype=float) / (2 * SQRT2)
    return _unwrap(np.exp(-(a**2)) * np.real(np.exp(-2j * a * b) * wofz(-b + 1j * a)))


def aperture_transmission(t_a_sigma):
    """Fraction of the Gaussian intensity passing the aperture, erfc(sqrt2 x)."""
    return _unwrap(erfc_real(SQRT2 * np.asarray(t_a_sigma, dtype=float)))


def port_probabilities(epsilon, cal: DeviceCalibration) -> PortProbabilities:
    """Outcome probabilities (p_minus, p_plus, p_cross) at separation epsilon.

    The model is even in epsilon; |epsilon| is used.
    """
    eps = np.abs(np.asarray(epsilon, dtype=float))
    c = aperture_transmission(cal.t_a_sigma)
    ov = clipped_overlap(cal.t_a_sigma, eps)
    p_minus = 0.5 * (c - cal.v_minus * ov)
    p_plus = 0.5 * cal.eta_plus * (c + cal.v_plus * ov)
    # Rounding can push p_minus a hair below zero at eps = 0, V = 1.
    p_minus = np.maximum(p_minus, 0.0)
    p_cross = 1.0 - p_minus - p_plus
    return PortProbabilities(_unwrap(p_minus), _unwrap(p_plus), _unwrap(p_cross))


def port_ratio(epsilon, cal: DeviceCalibration):
    """p_minus / p_plus."""
    p = port_probabilities(epsilon, cal)
    return _unwrap(np.asarray(p.p_minus) / np.asarray(p.p_plus))


def _clipped_line_spectrum(nu, x):
    """Fourier amplitude of the clipped Gaussian envelope times exp(i nu t) at zero frequency.

    Real valued: psi~(nu) * Re erfc(x + i nu / 2).
    """
    y = 0.5 * np.asarray(nu, dtype=float)
    return (2 * np.pi) ** -0.25 * np.exp(-(x**2)) * np.real(np.exp(-2j * x * y) * wofz(-y + 1j * x))


def port_distributions(epsilon, cal: DeviceCalibration, grid) -> tuple[SampledField, SampledField]:
    """Frequency-resolved count densities of the two output ports.

    Each line k = +/-1 (at +/-eps/2, weight 1/2) contributes
    |a_k(w) -/+ a_k(-w)|^2 / 4 with the cross term scaled by the port
    visibility; the symmetric port also carries eta_plus. The samples of
    the returned fields are densities, not amplitudes; their integrals
    equal the port probabilities.
    """
    w = np.asarray(grid, dtype=float)
    eps = abs(float(epsilon))
    x = cal.t_a_sigma
    dens_m = np.zeros_like(w)
    dens_p = np.zeros_like(w)
    for k in (1.0, -1.0):
        a = _clipped_line_spectrum(k * eps / 2 - w, x)
        b = _clipped_line_spectrum(k * eps / 2 + w, x)
        diag = a**2 + b**2
        dens_m += 0.125 * (diag - 2 * cal.v_minus * a * b)
        dens_p += 0.125 * cal.eta_plus * (diag + 2 * cal.v_plus * a * b)
    dens_m = np.maximum(dens_m, 0.0)
    return (
        SampledField.on_axis(Domain.FREQUENCY, w, dens_m),
        SampledField.on_axis(Domain.FREQUENCY, w, dens_p),
    )


def density_integral(fld: SampledField) -> float:
    """Integral of a density stored in a SampledField."""
    return float(np.sum(fld.samples.real) * fld.step)


def port_densities_time(epsilon, cal: DeviceCalibration, t) -> tuple[np.ndarray, np.ndarray]:
    """Time-resolved port densities over the input time axis.

    p_minus(t) = f_A psi^2 (1 - V_- cos(eps t)) / 2 and
    p_plus(t) = eta f_A psi^2 (1 + V_+ cos(eps t)) / 2. They integrate to
    the port probabilities.
    """
    t = np.asarray(t, dtype=float)
    eps = float(epsilon)
    base = aperture_mask(t, cal.t_a_sigma) * np.sqrt(2 / np.pi) * np.exp(-2 * t**2)
    c = np.cos(eps * t)
    return 0.5 * base * (1 - cal.v_minus * c), 0.5 * cal.eta_plus * base * (1 + cal.v_plus * c)


def port_densities_time_derivative(epsilon, cal: DeviceCalibration, t) -> tuple[np.ndarray, np.ndarray]:
    """Epsilon derivatives of :func:`port_densities_time`."""
    t = np.asarray(t, dtype=float)
    eps = float(epsilon)
    base = aperture_mask(t, cal.t_a_sigma) * np.sqrt(2 / np.pi) * np.exp(-2 * t**2)
    s = t * np.sin(eps * t)
    return 0.5 * base * cal.v_minus * s, -0.5 * cal.eta_plus * base * cal.v_plus * s
