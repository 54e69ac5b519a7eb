"""Fisher information, quantum and classical bounds, and the super-resolution factor.

Per-photon Fisher information with respect to the normalized separation
epsilon. Direct imaging (DI) is the intensity measurement of the
two-line spectrum; its small-epsilon limit is epsilon^2 / 8.
"""

from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import erfc as erfc_real
from scipy.special import gamma, gammaincc

from .model import (
    DeviceCalibration,
    aperture_transmission,
    clipped_overlap,
    port_densities_time,
    port_densities_time_derivative,
    port_probabilities,
)
from .signals import Domain, SampledField

log = logging.getLogger(__name__)

PROB_FLOOR = 1e-12
QFI = 0.25


@dataclass(frozen=True, eq=False)
class FisherCurve:
    epsilons: np.ndarray
    values: np.ndarray
    label: str

    def __post_init__(self):
        e = np.asarray(self.epsilons, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if e.shape != v.shape or e.ndim != 1:
            raise ValueError("epsilons and values must be 1-D arrays of equal length")
        if np.any(v < -1e-15):
            raise ValueError("Fisher information must be non-negative")
        object.__setattr__(self, "epsilons", e)
        object.__setattr__(self, "values", np.maximum(v, 0.0))


@dataclass(frozen=True)
class SpectrometerSpec:
    """Direct-imaging spectrometer with Gaussian resolution sigma_rl and full bandwidth sigma_bwl."""

    sigma_rl: float
    sigma_bwl: float
    label: str = ""

    def __post_init__(self):
        if not (self.sigma_rl > 0 and self.sigma_bwl > 0):
            raise ValueError("sigma_rl and sigma_bwl must be positive")
        if not self.sigma_bwl > self.sigma_rl:
            raise ValueError("sigma_bwl must exceed sigma_rl")

    @classmethod
    def qmti(cls) -> "SpectrometerSpec":
        """Memory-based temporal-imaging spectrometer (Hz)."""
        return cls(7.2e3, 300e3, "QMTI")

    @classmethod
    def fourier_transform(cls) -> "SpectrometerSpec":
        """Benchtop FT spectrometer: 0.001 cm^-1 resolution, 50e3 cm^-1 range (Hz)."""
        c_cm = 2.99792458e10
        return cls(1e-3 * c_cm, 50e3 * c_cm, "FT")


@dataclass(frozen=True)
class QmtiNoiseModel:
    """Direct-imaging family with resolution broadening, finite band and a flat dark floor.

    All widths are in units of the line width sigma. ``dark_fraction`` is
    the share of detections spread uniformly over the band.
    """

    sigma_rl_ratio: float = 0.0
    bwl_ratio: float = float("inf")
    dark_fraction: float = 0.0

    def __post_init__(self):
        if self.sigma_rl_ratio < 0 or not self.bwl_ratio > 0:
            raise ValueError("sigma_rl_ratio must be >= 0 and bwl_ratio > 0")
        if not 0 <= self.dark_fraction < 1:
            raise ValueError("dark_fraction must lie in [0, 1)")
        if self.dark_fraction > 0 and not np.isfinite(self.bwl_ratio):
            raise ValueError("a dark floor needs a finite bandwidth")

    @property
    def width(self) -> float:
        return float(np.sqrt(1.0 + self.sigma_rl_ratio**2))


# -- generic numeric Fisher information ------------------------------------


def _probe(prob_family, epsilon):
    out = prob_family(epsilon)
    if isinstance(out, SampledField):
        return out.samples.real, out.step
    if isinstance(out, tuple):
        values, weights = out
        return np.asarray(values, dtype=float), weights
    return np.asarray(out, dtype=float), 1.0


def fisher_numeric(
    prob_family: Callable[[float], object],
    epsilon: float,
    d_eps: float = 1e-4,
    richardson: bool = True,
) -> float:
    """Fisher information sum((dp/deps)^2 / p) by central differences.

    ``prob_family(eps)`` returns discrete probabilities (array), a density
    as a SampledField, or a ``(values, weights)`` pair. Families must
    accept negative epsilon (all models here are even). Bins with
    p < 1e-12 are dropped; their probability mass and derivative mass are
    logged at debug level.
    """
    if not d_eps > 0:
        raise ValueError("d_eps must be positive")
    p0, w = _probe(prob_family, epsilon)

    def deriv(h):
        pp, _ = _probe(prob_family, epsilon + h)
        pm, _ = _probe(prob_family, epsilon - h)
        return (pp - pm) / (2 * h)

    d = deriv(d_eps)
    if richardson:
        d = (4 * deriv(d_eps / 2) - d) / 3
    keep = p0 >= PROB_FLOOR
    ww = np.broadcast_to(w, p0.shape)
    if not np.all(keep):
        log.debug(
            "fisher_numeric: excluded %d bins, mass %.3g, |dp| mass %.3g",
            int((~keep).sum()),
            float(np.sum(ww[~keep] * p0[~keep])),
            float(np.sum(ww[~keep] * np.abs(d[~keep]))),
        )
    return float(np.sum(ww[keep] * d[keep] ** 2 / p0[keep]))


def pudtai_family(cal: DeviceCalibration, outcomes: int = 3) -> Callable[[float], np.ndarray]:
    """Discrete family [p_minus, p_plus(, p_cross)] of the interferometer."""
    if outcomes not in (2, 3):
        raise ValueError("outcomes must be 2 or 3")
    return lambda eps: port_probabilities(eps, cal).as_array()[..., :outcomes]


def di_family(grid, width: float = 1.0) -> Callable[[float], SampledField]:
    """Direct-imaging density: two Gaussian lines of rms width ``width`` at +/-eps/2."""
    w = np.asarray(grid, dtype=float)

    def family(eps):
        h = eps / 2
        g = lambda u: np.exp(-0.5 * (u / width) ** 2) / (np.sqrt(2 * np.pi) * width)
        return SampledField.on_axis(Domain.FREQUENCY, w, 0.5 * (g(w - h) + g(w + h)))

    return family


# -- closed forms ----------------------------------------------------------


def qfi() -> float:
    """Quantum Fisher information for the separation, independent of epsilon."""
    return QFI


def f_sliver(epsilon):
    """Approximate Fisher information of ideal image inversion, 1/4 - eps^2/32."""
    return 0.25 - np.asarray(epsilon, dtype=float) ** 2 / 32


def s_sliver(v):
    """Super-resolution factor of ideal image inversion at visibility V."""
    v = np.asarray(v, dtype=float)
    with np.errstate(divide="ignore"):
        return v**2 / (2 * (1 - v**2))


def clipped_moment(order: int, t_a_sigma) -> float:
    """Integral of t^order psi_G(t)^2 over |t| > t_a (even order)."""
    if order % 2:
        return 0.0
    k = order // 2
    s2 = 0.25  # variance of psi_G^2
    y = np.asarray(t_a_sigma, dtype=float) ** 2 / (2 * s2)
    return s2**k * 2**k * gamma(k + 0.5) * gammaincc(k + 0.5, y) / np.sqrt(np.pi)


def _fringe_slope(epsilon, x):
    """sqrt(F): the epsilon-slope of the fringe term, scaled by 8."""
    return np.sqrt(8 / np.pi) * np.exp(-2 * x**2) * np.sin(x * epsilon) + epsilon * clipped_overlap(x, epsilon)


def _p_minus_ideal_small(epsilon, x):
    # (c - overlap) / 2 from the moment series, safe where the direct form cancels.
    e2 = epsilon**2
    return 0.5 * (
        e2 / 2 * clipped_moment(2, x) - e2**2 / 24 * clipped_moment(4, x) + e2**3 / 720 * clipped_moment(6, x)
    )


def f_pudtai_ports(epsilon, cal: DeviceCalibration) -> tuple[np.ndarray, np.ndarray]:
    """Bucket Fisher information of the antisymmetric and symmetric ports."""
    eps = np.abs(np.asarray(epsilon, dtype=float))
    x = cal.t_a_sigma
    F = _fringe_slope(eps, x) ** 2
    p = port_probabilities(eps, cal)
    p_minus = np.asarray(p.p_minus, dtype=float)
    p_plus = np.asarray(p.p_plus, dtype=float)
    if cal.v_minus == 1.0:
        small = eps < 1e-2
        p_minus = np.where(small, _p_minus_ideal_small(eps, x), p_minus)
    with np.errstate(divide="ignore", invalid="ignore"):
        f_minus = cal.v_minus**2 * F / (64 * p_minus)
        f_plus = cal.eta_plus**2 * cal.v_plus**2 * F / (64 * p_plus)
    # eps = 0 with perfect visibility: 0/0, the limit is the clipped second moment.
    f_minus = np.where(p_minus > 0, f_minus, np.where(eps == 0, clipped_moment(2, x), 0.0))
    f_plus = np.where(p_plus > 0, f_plus, 0.0)
    if np.ndim(epsilon) == 0:
        return float(f_minus), float(f_plus)
    return f_minus, f_plus


def f_pudtai(epsilon, cal: DeviceCalibration):
    """Fisher information of the two port counts, V_-^2 F/(64 p_-) + eta^2 V_+^2 F/(64 p_+)."""
    f_minus, f_plus = f_pudtai_ports(epsilon, cal)
    return f_minus + f_plus


def _di_integrand(w, h, s):
    # dI/de^2 / I for two lines at +/-h with rms width s, in overflow-safe form.
    a = w * h / s**2
    g = np.exp(-0.5 * (w / s) ** 2 - 0.5 * (h / s) ** 2) / (np.sqrt(2 * np.pi) * s)
    return g, 0.5 * g * (w * np.sinh(a) - h * np.cosh(a)) / s**2, g * np.cosh(a)


def fisher_di(epsilon, model: QmtiNoiseModel | None = None):
    """Direct-imaging Fisher information by quadrature.

    Without a model this is the ideal DI curve (about eps^2 / 8 for small
    eps). With a :class:`QmtiNoiseModel` the lines are broadened, counted
    only inside the band and mixed with a flat dark floor.
    """
    model = model or QmtiNoiseModel()
    s = model.width
    half = 0.5 * model.bwl_ratio
    d = model.dark_fraction

    def one(eps):
        h = abs(eps) / 2
        if h == 0:
            return 0.0
        lo, hi = -(h + 40 * s), h + 40 * s
        if np.isfinite(half):
            lo, hi = max(lo, -half), min(hi, half)
        floor = d / (2 * half) if d > 0 else 0.0

        def f(w):
            _, dens_d, dens = _di_integrand(w, h, s)
            return ((1 - d) * dens_d) ** 2 / ((1 - d) * dens + floor) if dens + floor > 0 else 0.0

        # integrand is even in w
        val, _ = quad(f, 0.0, hi, limit=400, epsabs=0, epsrel=1e-11)
        if lo > -hi + 1e-12:  # asymmetric window never happens, kept for clarity
            val += quad(f, lo, 0.0, limit=400, epsabs=0, epsrel=1e-11)[0]
        else:
            val *= 2
        return val

    eps = np.asarray(epsilon, dtype=float)
    out = np.vectorize(one, otypes=[float])(eps)
    return float(out) if out.ndim == 0 else out


def fisher_qmti(epsilon, model: QmtiNoiseModel):
    """Fisher information of the temporal-imaging spectrometer under ``model``."""
    return fisher_di(epsilon, model)


# -- densities and aperture figures of merit -------------------------------


def _fi_density_values(port: str, epsilon: float, cal: DeviceCalibration, t: np.ndarray) -> np.ndarray:
    idx = 0 if port == "minus" else 1
    p = port_densities_time(epsilon, cal, t)[idx]
    if port == "minus" and cal.v_minus == 1.0:
        # (t sin)^2 / (1 - cos) = t^2 (1 + cos): avoids the 0/0 at small eps t.
        base = 2 * port_densities_time(0.0, cal.replace(v_minus=0.0), t)[0]
        return 0.5 * base * t**2 * (1 + np.cos(epsilon * t))
    dp = port_densities_time_derivative(epsilon, cal, t)[idx]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(p >= PROB_FLOOR, dp**2 / p, 0.0)


def fi_density(port: str, epsilon, cal: DeviceCalibration, grid) -> SampledField:
    """Time-resolved Fisher-information density (dp(t)/deps)^2 / p(t).

    Evaluated over the input time axis, where the two information lobes
    sit outside the aperture. ``port`` is "minus" or "plus". Samples hold
    the density.
    """
    if port not in ("minus", "plus"):
        raise ValueError("port must be 'minus' or 'plus'")
    t = np.asarray(grid, dtype=float)
    return SampledField.on_axis(Domain.TIME, t, _fi_density_values(port, float(epsilon), cal, t))


def aperture_flux_efficiencies(t_a_sigma):
    """Fractions of port flux kept by the aperture at small epsilon: (eta_p-, eta_p+)."""
    x = np.asarray(t_a_sigma, dtype=float)
    eta_plus = erfc_real(np.sqrt(2) * x)
    eta_minus = eta_plus + 2 * np.sqrt(2 / np.pi) * x * np.exp(-2 * x**2)
    if x.ndim == 0:
        return float(eta_minus), float(eta_plus)
    return eta_minus, eta_plus


def fi_aperture_improvement(cal: DeviceCalibration, epsilon: float = 1e-3) -> tuple[float, float]:
    """Per-port bucket Fisher information with the aperture over that without it."""
    with_ap = f_pudtai_ports(epsilon, cal)
    without = f_pudtai_ports(epsilon, cal.replace(t_a_sigma=0.0))
    return with_ap[0] / without[0], with_ap[1] / without[1]


def resolved_fi_efficiency(port: str, cal: DeviceCalibration, epsilon: float = 1e-3) -> float:
    """Share of the time-resolved Fisher information that survives the aperture.

    Integral of :func:`fi_density` over |t| > t_a divided by the same
    integral with no aperture.
    """
    open_cal = cal.replace(t_a_sigma=0.0)

    if port not in ("minus", "plus"):
        raise ValueError("port must be 'minus' or 'plus'")

    def dens(t, c):
        return float(_fi_density_values(port, epsilon, c, np.array([t]))[0])

    upper = 12.0
    kept = 2 * quad(dens, cal.t_a_sigma, upper, args=(open_cal,), limit=200, epsrel=1e-11)[0]
    total = 2 * quad(dens, 0.0, upper, args=(open_cal,), limit=200, epsrel=1e-11)[0]
    return kept / total


# -- super-resolution factor -----------------------------------------------


def s_factor(fisher, eps0: float = 1e-3, rtol_check: float = 1e-2) -> float:
    """Limit of F / F_DI as epsilon -> 0.

    ``fisher`` is a callable of epsilon or a :class:`FisherCurve` (its two
    smallest epsilons are used). Ratios at eps0 and eps0/2 are combined by
    Richardson extrapolation; a warning is issued if they disagree by more
    than ``rtol_check``.
    """
    if isinstance(fisher, FisherCurve):
        order = np.argsort(fisher.epsilons)
        e1, e2 = fisher.epsilons[order[1]], fisher.epsilons[order[0]]
        r1 = fisher.values[order[1]] / fisher_di(e1)
        r2 = fisher.values[order[0]] / fisher_di(e2)
        q = (e1 / e2) ** 2
        s = (q * r2 - r1) / (q - 1)
    else:
        r1 = float(fisher(eps0)) / fisher_di(eps0)
        r2 = float(fisher(eps0 / 2)) / fisher_di(eps0 / 2)
        s = (4 * r2 - r1) / 3
    if abs(r1 - r2) > rtol_check * abs(s):
        warnings.warn(f"s_factor: ratio not converged ({r1:.6g} vs {r2:.6g})", RuntimeWarning, stacklevel=2)
    return float(s)


def s_pudtai_closed_form(cal: DeviceCalibration) -> float:
    """Closed-form super-resolution factor of the interferometer.

    Written with erfc and the antisymmetric flux efficiency, which is the
    same expression as the exp/erf form but free of cancellation.
    """
    vm, vp, eta = cal.v_minus, cal.v_plus, cal.eta_plus
    if vm >= 1.0:
        return float("inf")
    eta_m, eta_p = aperture_flux_efficiencies(cal.t_a_sigma)
    num = (vm**2 * (vp + 1) + eta * vp**2 * (1 - vm)) * eta_m**2
    return float(num / (4 * (1 - vm) * (vp + 1) * eta_p))


def di_bwl_fraction(half_window) -> float:
    """Share of the small-epsilon DI information inside |w| <= half_window (in line widths)."""
    u = float(half_window)
    if not np.isfinite(u):
        return 1.0
    phi = np.exp(-0.5 * u * u) / np.sqrt(2 * np.pi)
    i0 = erfc_real(0.0) - erfc_real(u / np.sqrt(2))
    i2 = i0 - 2 * u * phi
    i4 = 3 * i2 - 2 * u**3 * phi
    return float((i4 - 2 * i2 + i0) / 2)


def di_spectrometer_s(spec: SpectrometerSpec, sigma_signal) -> float:
    """Super-resolution factor of a direct-imaging spectrometer for lines of width sigma.

    Resolution broadening sigma -> sqrt(sigma^2 + sigma_rl^2) shrinks the
    effective separation by r = sigma / sqrt(...), counted as r^2; the
    finite band keeps only the information inside |w| <= sigma_bwl / 2.
    """
    sigma = np.asarray(sigma_signal, dtype=float)
    if np.any(sigma <= 0):
        raise ValueError("sigma_signal must be positive")
    broad = np.sqrt(sigma**2 + spec.sigma_rl**2)
    r2 = (sigma / broad) ** 2
    frac = np.vectorize(di_bwl_fraction)(spec.sigma_bwl / (2 * broad))
    out = r2 * frac
    return float(out) if out.ndim == 0 else out


# -- curve emitters --------------------------------------------------------


def comparison_curves(
    epsilons: Sequence[float], cal: DeviceCalibration, qmti: QmtiNoiseModel | None = None
) -> list[FisherCurve]:
    """Curves F_Q, F_SLIVER, F_DI, F_PuDTAI and F_QMTI over ``epsilons``."""
    eps = np.asarray(epsilons, dtype=float)
    qmti = qmti or QmtiNoiseModel()
    return [
        FisherCurve(eps, np.full_like(eps, QFI), "F_Q"),
        FisherCurve(eps, np.maximum(f_sliver(eps), 0.0), "F_SLIVER"),
        FisherCurve(eps, fisher_di(eps), "F_DI"),
        FisherCurve(eps, f_pudtai(eps, cal), "F_PuDTAI"),
        FisherCurve(eps, fisher_qmti(eps, qmti), "F_QMTI"),
    ]


def s_curves(specs: Sequence[SpectrometerSpec], cal: DeviceCalibration, n_points: int = 200):
    """Super-resolution factor versus line width for each spectrometer, log-spaced in sigma.

    Returns a list of (label, sigma, s) tuples. The interferometer is
    tailored to the line shape, so its value is constant in sigma.
    """
    out = []
    s_pud = s_pudtai_closed_form(cal)
    for spec in specs:
        sigma = np.logspace(np.log10(spec.sigma_rl) - 2, np.log10(spec.sigma_bwl) + 1, n_points)
        out.append((spec.label, sigma, di_spectrometer_s(spec, sigma)))
        out.append(("PuDTAI", sigma, np.full_like(sigma, s_pud)))
    return out


def write_curves_csv(curves: Sequence[FisherCurve], path) -> None:
    """CSV with an epsilon column followed by one column per curve, 12 significant digits."""
    eps = curves[0].epsilons
    for c in curves:
        if not np.array_equal(c.epsilons, eps):
            raise ValueError("curves must share the epsilon grid")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epsilon"] + [c.label for c in curves])
        for i, e in enumerate(eps):
            w.writerow([f"{e:.12g}"] + [f"{c.values[i]:.12g}" for c in curves])
