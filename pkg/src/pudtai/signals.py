"""Mode functions, the two-source signal and the temporal aperture.

Conventions: normalized units (sigma = 1 unless stated), forward Fourier
transform with kernel exp(-i w t) and a symmetric 1/sqrt(2 pi) factor.
Grids are centered, x_j = (j - n//2) * step, so that FFT shifts line up.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from ._validation import check_non_negative, check_positive, check_uniform_axis

SQRT_2PI = np.sqrt(2.0 * np.pi)


class Domain(str, Enum):
    TIME = "time"
    FREQUENCY = "frequency"
    POSITION = "position"
    WAVEVECTOR = "wavevector"


CONJUGATE = {
    Domain.TIME: Domain.FREQUENCY,
    Domain.FREQUENCY: Domain.TIME,
    Domain.POSITION: Domain.WAVEVECTOR,
    Domain.WAVEVECTOR: Domain.POSITION,
}
# Domains from which the conjugate is reached by the forward transform.
_FORWARD_FROM = (Domain.TIME, Domain.POSITION)


@dataclass(frozen=True)
class GaussianParams:
    """Spectral width and centroid of the Gaussian mode."""

    sigma: float = 1.0
    omega0: float = 0.0

    def __post_init__(self):
        check_positive(self.sigma, "sigma")
        if not np.isfinite(self.omega0):
            raise ValueError("omega0 must be finite")


@dataclass(frozen=True)
class TwoSourceSpec:
    """Two equally bright incoherent lines separated by delta_omega = sigma * epsilon."""

    epsilon: float = 0.0
    phi: float = 0.0
    gaussian: GaussianParams = field(default_factory=GaussianParams)
    mean_photons: float = 0.69

    def __post_init__(self):
        check_non_negative(self.epsilon, "epsilon")
        check_positive(self.mean_photons, "mean_photons")
        if not (0.0 <= self.phi < 2 * np.pi):
            raise ValueError(f"phi must lie in [0, 2*pi), got {self.phi!r}")

    @property
    def delta_omega(self) -> float:
        return self.gaussian.sigma * self.epsilon


@dataclass(frozen=True)
class ApertureSpec:
    """Hard central obscuration: samples with |t| < t_a are blocked."""

    t_a: float = 0.0

    def __post_init__(self):
        check_non_negative(self.t_a, "t_a")


@dataclass(frozen=True, eq=False)
class SampledField:
    """Complex envelope on a uniform 1-D grid."""

    domain: Domain
    start: float
    step: float
    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "domain", Domain(self.domain))
        samples = np.asarray(self.samples, dtype=complex)
        if samples.ndim != 1 or samples.size < 2:
            raise ValueError("samples must be 1-D with at least 2 points")
        if not (np.isfinite(self.step) and self.step > 0):
            raise ValueError(f"step must be positive, got {self.step!r}")
        if not np.isfinite(self.start):
            raise ValueError("start must be finite")
        object.__setattr__(self, "samples", samples)
        if not np.isfinite(self.norm()):
            raise ValueError("field norm is not finite")

    @classmethod
    def on_axis(cls, domain, axis, samples) -> "SampledField":
        axis = check_uniform_axis(axis)
        return cls(domain, float(axis[0]), float(axis[1] - axis[0]), samples)

    @property
    def axis(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.samples.size)

    def __len__(self) -> int:
        return self.samples.size

    def norm(self) -> float:
        """Squared L2 norm, sum |a|^2 * step."""
        return float(np.sum(np.abs(self.samples) ** 2) * self.step)

    def intensity(self) -> np.ndarray:
        return np.abs(self.samples) ** 2

    def with_samples(self, samples, domain=None) -> "SampledField":
        return SampledField(self.domain if domain is None else domain, self.start, self.step, samples)

    def is_centered(self) -> bool:
        n = self.samples.size
        return abs(self.start + (n // 2) * self.step) <= 1e-9 * self.step * n


def centered_axis(n: int = 4096, half_span: float = 8.0) -> np.ndarray:
    """Uniform axis with n points covering [-half_span, half_span)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    check_positive(half_span, "half_span")
    step = 2.0 * half_span / n
    return (np.arange(n) - n // 2) * step


def default_time_grid(sigma: float = 1.0) -> np.ndarray:
    """4096 points over t in [-8/sigma, 8/sigma)."""
    return centered_axis(4096, 8.0 / sigma)


def conjugate_axis(axis) -> np.ndarray:
    """Centered FFT-conjugate axis (angular units) of a centered axis."""
    axis = np.asarray(axis, dtype=float)
    n = axis.size
    d = 2.0 * np.pi / (n * (axis[1] - axis[0]))
    return (np.arange(n) - n // 2) * d


def fft_c(a: np.ndarray, axis: int = -1) -> np.ndarray:
    """Unnormalized forward DFT for centered grids."""
    return np.fft.fftshift(np.fft.fft(np.fft.ifftshift(a, axes=axis), axis=axis), axes=axis)


def ifft_c(a: np.ndarray, axis: int = -1) -> np.ndarray:
    """Inverse of :func:`fft_c`."""
    return np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(a, axes=axis), axis=axis), axes=axis)


def to_conjugate(fld: SampledField) -> SampledField:
    """Continuous Fourier transform onto the conjugate grid.

    Time and position go forward (kernel exp(-i p q)); frequency and
    wavevector go back. Requires a centered grid.
    """
    if not fld.is_centered():
        raise ValueError("Fourier transform requires a centered grid")
    n = len(fld)
    if fld.domain in _FORWARD_FROM:
        out = fft_c(fld.samples) * fld.step / SQRT_2PI
    else:
        out = ifft_c(fld.samples) * n * fld.step / SQRT_2PI
    d = 2.0 * np.pi / (n * fld.step)
    return SampledField(CONJUGATE[fld.domain], -(n // 2) * d, d, out)


def _check_span(axis: np.ndarray, center: float, half_width: float, what: str) -> None:
    if axis[0] > center - half_width or axis[-1] < center + half_width:
        raise ValueError(f"grid must span at least +/-{half_width:g} around {center:g} ({what})")


def gaussian_spectrum(params: GaussianParams, grid) -> SampledField:
    """Unit-norm Gaussian spectral amplitude (sqrt(2 pi) sigma)^(-1/2) exp(-(w-w0)^2 / 4 sigma^2)."""
    grid = check_uniform_axis(grid, "frequency grid")
    _check_span(grid, params.omega0, 6 * params.sigma, "6 sigma")
    x = grid - params.omega0
    amp = (SQRT_2PI * params.sigma) ** -0.5 * np.exp(-(x**2) / (4 * params.sigma**2))
    return SampledField.on_axis(Domain.FREQUENCY, grid, amp)


def hermite_gauss1_spectrum(params: GaussianParams, grid) -> SampledField:
    """First Hermite-Gauss spectral mode, ((w-w0)/sigma) times the Gaussian."""
    g = gaussian_spectrum(params, grid)
    x = (g.axis - params.omega0) / params.sigma
    return g.with_samples(x * g.samples)


def gaussian_envelope(params: GaussianParams, grid) -> SampledField:
    """Temporal amplitude of the Gaussian mode, (2 sigma^2/pi)^(1/4) exp(-sigma^2 t^2) exp(i w0 t)."""
    grid = check_uniform_axis(grid, "time grid")
    s = params.sigma
    amp = (2 * s**2 / np.pi) ** 0.25 * np.exp(-(s * grid) ** 2) * np.exp(1j * params.omega0 * grid)
    return SampledField.on_axis(Domain.TIME, grid, amp)


def hermite_gauss1_envelope(params: GaussianParams, grid) -> SampledField:
    """Temporal amplitude of the first Hermite-Gauss mode, 2 i sigma t psi_G(t)."""
    g = gaussian_envelope(params, grid)
    return g.with_samples(2j * params.sigma * g.axis * g.samples)


def synthesize_two_source(spec: TwoSourceSpec, grid) -> SampledField:
    """Single-shot amplitude S_phi(t) = psi_G(t) sqrt(2) cos((dw t - phi)/2) exp(i phi/2).

    Its spectrum holds a Gaussian at +dw/2 and one at -dw/2 weighted by
    exp(i phi); averaging |S_phi|^2 over phi gives the incoherent mixture.
    """
    grid = check_uniform_axis(grid, "time grid")
    _check_span(grid, 0.0, 6.0 / spec.gaussian.sigma, "6/sigma")
    psi = gaussian_envelope(spec.gaussian, grid).samples
    phase = (spec.delta_omega * grid - spec.phi) / 2
    amp = psi * np.sqrt(2) * np.cos(phase) * np.exp(0.5j * spec.phi)
    return SampledField.on_axis(Domain.TIME, grid, amp)


def phase_grid(n_phases: int = 64) -> np.ndarray:
    if n_phases < 1:
        raise ValueError("n_phases must be >= 1")
    return 2 * np.pi * np.arange(n_phases) / n_phases


def phase_average(func: Callable[[float], object], n_phases: int = 64):
    """Average ``func(phi)`` over uniformly spaced phases in [0, 2 pi).

    Exact for trigonometric polynomials of degree below n_phases.
    """
    results = [func(float(phi)) for phi in phase_grid(n_phases)]
    first = results[0]
    if isinstance(first, tuple):
        return tuple(np.mean([r[i] for r in results], axis=0) for i in range(len(first)))
    return np.mean(results, axis=0)


def aperture_mask(t, t_a: float) -> np.ndarray:
    """1 where light passes, 0 for |t| < t_a (decided by sample centers)."""
    return (np.abs(np.asarray(t, dtype=float)) >= t_a).astype(float)


def apply_aperture(fld: SampledField, ap: ApertureSpec) -> SampledField:
    """Zero the samples with |t| < t_a."""
    if fld.domain is not Domain.TIME:
        raise ValueError(f"aperture acts in the time domain, got {fld.domain.value}")
    if ap.t_a == 0:
        return fld
    return fld.with_samples(fld.samples * aperture_mask(fld.axis, ap.t_a))
