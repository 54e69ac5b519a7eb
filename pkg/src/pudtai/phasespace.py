"""Wigner-function numerics and the catalogue of quadratic-type phase modulations."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .signals import CONJUGATE, Domain, SampledField, fft_c

# Wigner rows are processed in chunks to bound memory (rows x 2N complex).
_ROW_CHUNK = 128


class PhaseDomain(str, Enum):
    TEMPORAL = "temporal"
    SPECTRAL = "spectral"


class PhaseKind(str, Enum):
    LENS = "lens"
    PROPAGATION = "propagation"
    DUAL_LENS = "dual_lens"
    BIDIRECTIONAL = "bidirectional_propagation"


# Field domains a profile may act on. Time and wavevector share the temporal
# role (the stored envelope lives on k_z); frequency and position the spectral.
_ACTS_ON = {
    PhaseDomain.TEMPORAL: (Domain.TIME, Domain.WAVEVECTOR),
    PhaseDomain.SPECTRAL: (Domain.FREQUENCY, Domain.POSITION),
}


def sq(xi):
    """Square wave pi((-1)^floor(xi/pi) + 1)/2, taking values pi and 0."""
    n = np.floor(np.asarray(xi, dtype=float) / np.pi)
    return np.where(np.mod(n, 2) == 0, np.pi, 0.0)


@dataclass(frozen=True)
class PhaseProfile:
    """One row of the modulation catalogue.

    Phases, with s = strength:
        lens, propagation         s x^2 / 2
        dual_lens                 -s x |x| / 2
        bidirectional_propagation sq(s x^2 / 2 + phase_offset)
    The bidirectional grating's +/-1 orders are the two propagations +/-s x^2/2.
    """

    domain: PhaseDomain
    kind: PhaseKind
    strength: float
    phase_offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "domain", PhaseDomain(self.domain))
        object.__setattr__(self, "kind", PhaseKind(self.kind))
        if not np.isfinite(self.strength):
            raise ValueError("strength must be finite")
        if not (0.0 <= self.phase_offset < 2 * np.pi):
            raise ValueError("phase_offset must lie in [0, 2*pi)")
        if self.phase_offset != 0.0 and self.kind is not PhaseKind.BIDIRECTIONAL:
            raise ValueError("phase_offset only applies to square-wave profiles")

    def phase(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        s = self.strength
        if self.kind in (PhaseKind.LENS, PhaseKind.PROPAGATION):
            return 0.5 * s * x**2
        if self.kind is PhaseKind.DUAL_LENS:
            return -0.5 * s * x * np.abs(x)
        return sq(0.5 * s * x**2 + self.phase_offset)

    def slope(self, x) -> np.ndarray:
        """d(phase)/dx for the smooth kinds; the +1 order for the grating."""
        x = np.asarray(x, dtype=float)
        if self.kind is PhaseKind.DUAL_LENS:
            return -self.strength * np.abs(x)
        return self.strength * x


def apply_phase(fld: SampledField, profile: PhaseProfile) -> SampledField:
    """Multiply the field by exp(i phase(x)); the norm is untouched."""
    if fld.domain not in _ACTS_ON[profile.domain]:
        raise ValueError(f"{profile.domain.value} profile cannot act on a {fld.domain.value} field")
    return fld.with_samples(fld.samples * np.exp(1j * profile.phase(fld.axis)))


@dataclass(frozen=True, eq=False)
class WignerGrid:
    """Real quasi-probability on a (q, p) grid."""

    q_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray
    q_domain: Domain = Domain.TIME

    def __post_init__(self):
        values = np.asarray(self.values)
        if np.iscomplexobj(values):
            raise ValueError("Wigner values must be real")
        if values.shape != (len(self.q_axis), len(self.p_axis)):
            raise ValueError("values shape does not match axes")

    @property
    def p_domain(self) -> Domain:
        return CONJUGATE[self.q_domain]

    @property
    def dq(self) -> float:
        return float(self.q_axis[1] - self.q_axis[0])

    @property
    def dp(self) -> float:
        return float(self.p_axis[1] - self.p_axis[0])

    def marginal_q(self) -> np.ndarray:
        """Integral over p, compare with |Q(q)|^2."""
        return self.values.sum(axis=1) * self.dp

    def marginal_p(self) -> np.ndarray:
        """Integral over q, compare with |Q~(p)|^2."""
        return self.values.sum(axis=0) * self.dq

    def total(self) -> float:
        return float(self.values.sum() * self.dq * self.dp)


def wigner(fld: SampledField, q_stride: int = 1) -> WignerGrid:
    """Wigner function via FFT over the lag variable.

    Lags run in steps of 2*dq so that Q(q +/- xi/2) sits on grid points;
    2N zero-padded lags are used. The overall constant is 1/(2 pi), so
    the q-marginal equals |Q(q)|^2 and the full integral equals the norm.
    The p axis then covers +/-pi/(2 dq), half the conjugate band, so the
    spectrum must fit in that window. ``q_stride`` keeps every n-th row.
    """
    n = len(fld)
    if n < 16:
        raise ValueError("wigner needs at least 16 samples")
    fld_q = fld
    q_domain = fld.domain
    if q_stride < 1:
        raise ValueError("q_stride must be >= 1")
    dq = fld_q.step
    q_axis_full = fld_q.axis
    rows = np.arange(0, n, q_stride)
    m_count = 2 * n
    lags = np.arange(m_count) - m_count // 2
    padded = np.zeros(3 * n + 1, dtype=complex)
    padded[n : 2 * n] = fld_q.samples
    values = np.empty((rows.size, m_count))
    scale = 2 * dq / (2 * np.pi)
    for c0 in range(0, rows.size, _ROW_CHUNK):
        r = rows[c0 : c0 + _ROW_CHUNK, None]
        i_plus = np.clip(r + lags + n, 0, 3 * n)
        i_minus = np.clip(r - lags + n, 0, 3 * n)
        prod = padded[i_plus] * np.conj(padded[i_minus])
        values[c0 : c0 + _ROW_CHUNK] = (fft_c(prod, axis=1) * scale).real
    dp = 2 * np.pi / (m_count * 2 * dq)
    p_axis = (np.arange(m_count) - m_count // 2) * dp
    return WignerGrid(q_axis_full[rows], p_axis, values, q_domain)


def _acts_on_q(profile: PhaseProfile, grid: WignerGrid) -> bool:
    if grid.q_domain in _ACTS_ON[profile.domain]:
        return True
    if grid.p_domain in _ACTS_ON[profile.domain]:
        return False
    raise ValueError("profile domain does not match either grid coordinate")


def wigner_shear_check(profile: PhaseProfile, grid: WignerGrid) -> WignerGrid:
    """Move the Wigner function along the phase-space shear of ``profile``.

    A phase chi acting on q sends p -> p + chi'(q); acting on p it sends
    q -> q - chi'(p). The grating is treated as the equal mixture of its
    two first orders with weight (2/pi)^2 each, cross terms dropped.
    Linear interpolation, zero outside the grid. Meant as an oracle.
    """
    interp = RegularGridInterpolator(
        (grid.q_axis, grid.p_axis), grid.values, method="linear", bounds_error=False, fill_value=0.0
    )
    qq, pp = np.meshgrid(grid.q_axis, grid.p_axis, indexing="ij")
    on_q = _acts_on_q(profile, grid)

    def shifted(sign: float) -> np.ndarray:
        if on_q:
            pts = np.stack([qq, pp - sign * profile.slope(qq)], axis=-1)
        else:
            pts = np.stack([qq + sign * profile.slope(pp), pp], axis=-1)
        return interp(pts)

    if profile.kind is PhaseKind.BIDIRECTIONAL:
        values = (2 / np.pi) ** 2 * (shifted(1.0) + shifted(-1.0))
    else:
        values = shifted(1.0)
    return WignerGrid(grid.q_axis, grid.p_axis, values, grid.q_domain)


_COORDINATE_MAP = {
    Domain.FREQUENCY: (Domain.POSITION, -1),  # z = w / beta
    Domain.POSITION: (Domain.FREQUENCY, 1),  # w = beta z
    Domain.TIME: (Domain.WAVEVECTOR, 1),  # k_z = beta t
    Domain.WAVEVECTOR: (Domain.TIME, -1),  # t = k_z / beta
}


def coordinate_map(fld: SampledField, beta: float) -> SampledField:
    """Relabel between the optical and spin-wave pictures.

    Frequency <-> position via w = beta z, time <-> wavevector via
    k_z = beta t. Amplitudes pick up sqrt of the Jacobian so the norm is
    kept; a negative beta reverses the axis.
    """
    if beta == 0 or not np.isfinite(beta):
        raise ValueError("beta must be non-zero and finite")
    target, power = _COORDINATE_MAP[fld.domain]
    scale = float(beta) ** power
    axis = fld.axis * scale
    samples = fld.samples / np.sqrt(abs(scale))
    if scale < 0:
        axis = axis[::-1]
        samples = samples[::-1]
    return SampledField(target, float(axis[0]), float(axis[1] - axis[0]), samples)


def wigner_to_csv(grid: WignerGrid, path) -> None:
    """Write (q, p, value) triples, 12 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["q", "p", "value"])
        for i, q in enumerate(grid.q_axis):
            for j, p in enumerate(grid.p_axis):
                w.writerow([f"{q:.12g}", f"{p:.12g}", f"{grid.values[i, j]:.12g}"])
