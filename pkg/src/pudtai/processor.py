"""End-to-end instruments built from phase-space operations.

PuDTAI chain (normalized units, beta = 1 so frequency doubles as position z
and time as wavevector k_z):

    aperture -> dual-lens phase -alpha t|t|/2 (time)
             -> grating G1, sq(kappa w^2/2 + zeta1) (frequency)
             -> read out the |t| <= band slice: antisymmetric port
             -> grating G2, sq(kappa w^2 + zeta2) on what is left
             -> read out the |t| <= band slice: symmetric port

With kappa = 1/alpha the +1 order of G1 refocuses the t < 0 half onto
t = 0 and the -1 order does the same for the t > 0 half; the halves meet
with opposite time orientation and interfere. G2 picks up the two halves
G1 sent to 2t. The offsets zeta1 = (theta - pi/2)/2 and zeta2 = 2 zeta1
make theta = 0 the dark (antisymmetric) working point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .phasespace import PhaseKind, PhaseProfile, sq
from .signals import (
    ApertureSpec,
    Domain,
    SampledField,
    TwoSourceSpec,
    aperture_mask,
    fft_c,
    ifft_c,
    phase_average,
    synthesize_two_source,
)

# Power a square-wave grating sends into its two first orders.
ORDER_EFFICIENCY = 8 / np.pi**2
# Relative amplitude below which the stored signal counts as zero.
_SUPPORT_TOL = 1e-12


@dataclass(frozen=True)
class ProcessorParams:
    """Physical knobs of the two instruments.

    ``kappa`` defaults to 1/alpha. ``band_fraction`` is the readout half
    width as a fraction of the input time span and ``pad`` the time-span
    zero-padding factor used inside the pipeline.
    """

    alpha: float = 16000.0
    kappa: float | None = None
    alpha_di: float = 1.0
    beta: float = 1.0
    theta: float = 0.0
    aperture: ApertureSpec = field(default_factory=lambda: ApertureSpec(0.564))
    omega0: float = 0.0
    band_fraction: float = 0.05
    pad: int = 2

    def __post_init__(self):
        if self.alpha == 0 or not np.isfinite(self.alpha):
            raise ValueError("alpha must be non-zero and finite")
        if self.kappa is None:
            object.__setattr__(self, "kappa", 1.0 / self.alpha)
        if self.alpha_di == 0 or self.beta == 0:
            raise ValueError("alpha_di and beta must be non-zero")
        if not 0 < self.band_fraction < 0.5:
            raise ValueError("band_fraction must lie in (0, 0.5)")
        if int(self.pad) != self.pad or self.pad < 1:
            raise ValueError("pad must be a positive integer")
        if isinstance(self.aperture, dict):
            object.__setattr__(self, "aperture", ApertureSpec(**self.aperture))

    @property
    def focal_time(self) -> float:
        """f_t = omega0 / alpha."""
        return self.omega0 / self.alpha

    @property
    def grating_distance(self) -> float:
        """d_t = kappa / (omega0 beta^2); infinite at omega0 = 0."""
        return float("inf") if self.omega0 == 0 else self.kappa / (self.omega0 * self.beta**2)

    def check_pudtai(self) -> None:
        if abs(self.kappa * self.alpha - 1) >= 1e-9:
            raise ValueError("PuDTAI needs kappa = 1/alpha")


@dataclass(frozen=True, eq=False)
class PortAmplitudes:
    u_minus: SampledField
    u_plus: SampledField

    @property
    def powers(self) -> tuple[float, float]:
        return self.u_minus.norm(), self.u_plus.norm()


def _mirror(a: np.ndarray) -> np.ndarray:
    """a(-t) on a centered grid."""
    if a.size % 2:
        return a[::-1]
    return np.roll(a[::-1], 1)


def pudtai_ports_ideal(signal: SampledField, params: ProcessorParams) -> PortAmplitudes:
    """Reference decomposition u+/-(t) = f_A(t) (S(t) +/- S(-t)) / 2."""
    if signal.domain is not Domain.TIME:
        raise ValueError("signal must be in the time domain")
    if not signal.is_centered():
        raise ValueError("signal grid must be symmetric about t = 0")
    s = signal.samples
    f = aperture_mask(signal.axis, params.aperture.t_a)
    r = _mirror(s)
    return PortAmplitudes(signal.with_samples(0.5 * f * (s - r)), signal.with_samples(0.5 * f * (s + r)))


def _upsample(signal: SampledField, alpha: float) -> SampledField:
    """Band-limited interpolation so the dual-lens chirp stays below Nyquist."""
    a = signal.samples
    amp = np.abs(a)
    live = np.nonzero(amp > _SUPPORT_TOL * amp.max())[0]
    t = signal.axis
    t_sup = max(abs(t[live[0]]), abs(t[live[-1]])) if live.size else abs(t[0])
    n = len(signal)
    dt_needed = np.pi / (abs(alpha) * t_sup)
    factor = 1
    while signal.step / factor > dt_needed:
        factor *= 2
    if factor == 1:
        return signal
    m = n * factor
    spec = np.zeros(m, dtype=complex)
    lo = m // 2 - n // 2
    spec[lo : lo + n] = fft_c(a)
    fine = ifft_c(spec) * factor
    return SampledField(Domain.TIME, signal.start, signal.step / factor, fine)


def _zero_pad(a: np.ndarray, pad: int) -> np.ndarray:
    if pad == 1:
        return a
    n = a.size
    out = np.zeros(n * pad, dtype=complex)
    lo = (n * pad) // 2 - n // 2
    out[lo : lo + n] = a
    return out


def _grating_offsets(theta: float) -> tuple[float, float]:
    z1 = np.mod((theta - np.pi / 2) / 2, 2 * np.pi)
    return float(z1), float(np.mod(2 * z1, 2 * np.pi))


@dataclass(frozen=True, eq=False)
class _Plan:
    """Signal-independent arrays of the chain for one grid and parameter set."""

    t: np.ndarray
    dt: float
    transmit: np.ndarray
    dual_lens: np.ndarray
    grating1: np.ndarray
    grating2: np.ndarray
    readout: np.ndarray
    lo: int
    hi: int


_PLAN_CACHE: dict = {}
_PLAN_CACHE_SIZE = 4


def _plan(n: int, dt: float, band: float, params: ProcessorParams) -> _Plan:
    key = (n, dt, band, params)
    plan = _PLAN_CACHE.get(key)
    if plan is not None:
        return plan
    t = (np.arange(n) - n // 2) * dt
    w = (np.arange(n) - n // 2) * (2 * np.pi / (n * dt))
    z1, z2 = _grating_offsets(params.theta)
    readout = np.abs(t) <= band
    lo, hi = np.nonzero(readout)[0][[0, -1]]
    plan = _Plan(
        t=t,
        dt=dt,
        transmit=aperture_mask(t, params.aperture.t_a),
        dual_lens=np.exp(1j * PhaseProfile("temporal", "dual_lens", params.alpha).phase(t)),
        grating1=np.exp(1j * PhaseProfile("spectral", PhaseKind.BIDIRECTIONAL, params.kappa, z1).phase(w)),
        grating2=np.exp(1j * PhaseProfile("spectral", PhaseKind.BIDIRECTIONAL, 2 * params.kappa, z2).phase(w)),
        readout=readout,
        lo=int(lo),
        hi=int(hi),
    )
    if len(_PLAN_CACHE) >= _PLAN_CACHE_SIZE:
        _PLAN_CACHE.pop(next(iter(_PLAN_CACHE)))
    _PLAN_CACHE[key] = plan
    return plan


def pudtai_pipeline(
    signal: SampledField,
    params: ProcessorParams,
    record: Callable[[str, SampledField], None] | None = None,
) -> PortAmplitudes:
    """Simulate the interferometer on a single coherent shot.

    The input is interpolated onto a finer grid chosen from alpha, then
    zero-padded in time by ``params.pad``. Returned port fields are the
    readout slices |t| <= band. Grating light outside the slices is lost,
    so port powers carry the first-order efficiency 8/pi^2. ``record``, if
    given, is called with (stage name, field) after each step.
    """
    if signal.domain is not Domain.TIME:
        raise ValueError("signal must be in the time domain")
    if not signal.is_centered():
        raise ValueError("signal grid must be symmetric about t = 0")
    params.check_pudtai()
    emit = record or (lambda name, fld: None)
    band = params.band_fraction * len(signal) * signal.step

    fine = _upsample(signal, params.alpha)
    n = len(fine) * params.pad
    plan = _plan(n, fine.step, band, params)
    t, dt = plan.t, plan.dt

    a = _zero_pad(fine.samples, params.pad)
    emit("input", SampledField(Domain.TIME, t[0], dt, a))
    a = a * plan.transmit
    emit("aperture", SampledField(Domain.TIME, t[0], dt, a))
    a = a * plan.dual_lens
    emit("dual_lens", SampledField(Domain.TIME, t[0], dt, a))

    # The grating needs at least two samples per local period over the support.
    amp = np.abs(a)
    w_max = abs(params.alpha) * np.max(np.abs(t[amp > _SUPPORT_TOL * amp.max()]))
    if 2 * abs(params.kappa) * w_max * (2 * np.pi / (n * dt)) > np.pi:
        raise ValueError("grid too coarse to resolve the grating chirp; widen the time span or raise pad")

    lo, hi = plan.lo, plan.hi
    a = ifft_c(fft_c(a) * plan.grating1)
    emit("grating1", SampledField(Domain.TIME, t[0], dt, a))
    u_minus = SampledField(Domain.TIME, t[lo], dt, a[lo : hi + 1].copy())
    a[plan.readout] = 0
    a = ifft_c(fft_c(a) * plan.grating2)
    emit("grating2", SampledField(Domain.TIME, t[0], dt, a))
    u_plus = SampledField(Domain.TIME, t[lo], dt, a[lo : hi + 1].copy())
    emit("port_minus", u_minus)
    emit("port_plus", u_plus)
    return PortAmplitudes(u_minus, u_plus)


def pipeline_port_powers(
    spec: TwoSourceSpec, grid, params: ProcessorParams, n_phases: int = 64, calibrated: bool = True
) -> tuple[float, float]:
    """Phase-averaged port powers of the simulated interferometer.

    With ``calibrated`` the powers are divided by the first-order grating
    efficiency 8/pi^2 so they compare directly with the V = 1 model.
    """

    def shot(phi):
        s = synthesize_two_source(TwoSourceSpec(spec.epsilon, phi, spec.gaussian, spec.mean_photons), grid)
        return pudtai_pipeline(s, params).powers

    pm, pp = phase_average(shot, n_phases)
    scale = ORDER_EFFICIENCY if calibrated else 1.0
    return float(pm) / scale, float(pp) / scale


def qmti_spectrum(signal: SampledField, params: ProcessorParams) -> SampledField:
    """Temporal-imaging spectrometer: lens then propagation, final lens omitted.

    Lens strength -2 alpha_di followed by propagation -1/(2 alpha_di) maps
    frequency to time as w = 2 alpha_di t, so |out(t)|^2 = 2 alpha_di |S~(2 alpha_di t)|^2.
    """
    if signal.domain is not Domain.TIME:
        raise ValueError("signal must be in the time domain")
    if not signal.is_centered():
        raise ValueError("signal grid must be symmetric about t = 0")
    a = 2 * params.alpha_di
    t = signal.axis
    amp = np.abs(signal.samples)
    live = amp > _SUPPORT_TOL * amp.max()
    if a * np.max(np.abs(t[live])) > np.pi / signal.step:
        raise ValueError("time lens chirp exceeds the grid Nyquist limit")
    lens = signal.samples * np.exp(1j * PhaseProfile("temporal", "lens", -a).phase(t))
    n = len(signal)
    w = (np.arange(n) - n // 2) * (2 * np.pi / (n * signal.step))
    prop = PhaseProfile("spectral", "propagation", -1.0 / a).phase(w)
    out = ifft_c(fft_c(lens) * np.exp(1j * prop))
    return signal.with_samples(out)
