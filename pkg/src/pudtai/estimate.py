"""Photon-counting Monte Carlo, maximum-likelihood estimators and bootstrap reports."""

from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy.optimize import brentq, minimize_scalar

from ._validation import check_int
from .fisher import QmtiNoiseModel, f_pudtai, fisher_qmti
from .model import DeviceCalibration, port_probabilities, port_ratio

log = logging.getLogger(__name__)

EPS_MAX = 5.0
_SCAN_POINTS = 251
_QMTI_GRID = 101


class DegenerateCountsError(ValueError):
    """Raised when a count record carries no symmetric-port clicks."""


@dataclass(frozen=True)
class CountRecord:
    n_minus: int
    n_plus: int
    n_total: int

    def __post_init__(self):
        for name in ("n_minus", "n_plus", "n_total"):
            check_int(getattr(self, name), name, 0)
        if self.n_minus + self.n_plus > self.n_total:
            raise ValueError("n_minus + n_plus must not exceed n_total")

    @property
    def n_cross(self) -> int:
        return self.n_total - self.n_minus - self.n_plus


@dataclass(frozen=True, eq=False)
class EstimatorReport:
    eps_hat_mean: float
    variance: float
    bias: float
    n_boot: int
    photons_per_set: int
    epsilon_true: float = float("nan")
    estimates: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("variance must be non-negative")
        if self.n_boot < 1:
            raise ValueError("n_boot must be >= 1")

    @property
    def sem(self) -> float:
        """Standard error of the mean estimate."""
        return float(np.sqrt(self.variance / self.n_boot))

    @property
    def variance_per_10_photons(self) -> float:
        """Variance rescaled to 10 processed photons, Var * N / 10."""
        return self.variance * self.photons_per_set / 10


def make_rng(seed) -> np.random.Generator:
    """Counter-based generator (Philox) from an int, SeedSequence or Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(_seed_sequence(seed)))


def _seed_sequence(seed) -> np.random.SeedSequence:
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)


def sample_counts(
    epsilon: float,
    cal: DeviceCalibration,
    n_photons: int,
    rng_seed,
    shot_mode: bool = False,
    mean_photons: float = 0.69,
) -> CountRecord:
    """Draw trinomial port counts for ``n_photons`` processed photons.

    In shot mode the photon total is itself random: n_photons / mean_photons
    shots, each with a Poisson photon number.
    """
    n_photons = check_int(n_photons, "n_photons", 1)
    rng = make_rng(rng_seed)
    p = port_probabilities(epsilon, cal).as_array()
    p = np.clip(p, 0.0, None)
    p = p / p.sum()
    if shot_mode:
        n_shots = max(1, int(round(n_photons / mean_photons)))
        n_photons = int(rng.poisson(mean_photons * n_shots))
    n_minus, n_plus, _ = rng.multinomial(n_photons, p)
    return CountRecord(int(n_minus), int(n_plus), int(n_photons))


def trinomial_loglik(epsilon, counts: CountRecord, cal: DeviceCalibration):
    """Log-likelihood of the three outcome counts (up to the multinomial constant)."""
    p = port_probabilities(epsilon, cal)
    with np.errstate(divide="ignore"):
        terms = [
            counts.n_minus * np.log(p.p_minus) if counts.n_minus else 0.0,
            counts.n_plus * np.log(p.p_plus) if counts.n_plus else 0.0,
            counts.n_cross * np.log(p.p_cross) if counts.n_cross else 0.0,
        ]
    return sum(terms)


def _ratio_scan(cal: DeviceCalibration) -> tuple[np.ndarray, np.ndarray]:
    u = np.linspace(0.0, EPS_MAX**2, _SCAN_POINTS)
    return u, np.asarray(port_ratio(np.sqrt(u), cal))


def mle_pudtai(counts: CountRecord, cal: DeviceCalibration) -> float:
    """Separation estimate from p_-(eps)/p_+(eps) = N_-/N_+.

    Root-finding runs in u = eps^2 on [0, 25], where the ratio is linear
    near the origin. Ratios at or below the eps = 0 value give 0. With
    finite visibility the ratio peaks inside the bracket; the lowest root
    is taken, and ratios above the peak clamp to the peak (5 for a
    monotone curve) with a warning, which is where the likelihood is
    largest.
    """
    if counts.n_plus == 0:
        raise DegenerateCountsError("n_plus = 0: the ratio estimator is undefined")
    r = counts.n_minus / counts.n_plus
    u, ratios = _ratio_scan(cal)
    if r <= ratios[0]:
        return 0.0
    above = np.nonzero(ratios >= r)[0]
    if above.size == 0:
        warnings.warn("count ratio above the model's largest ratio on [0, 5]; clamped", RuntimeWarning, stacklevel=2)
        i = int(np.argmax(ratios))
        if i == ratios.size - 1:
            return EPS_MAX
        res = minimize_scalar(
            lambda uu: -port_ratio(np.sqrt(uu), cal), bounds=(u[i - 1], u[i + 1]), method="bounded",
            options={"xatol": 1e-12},
        )
        return float(np.sqrt(res.x))
    k = int(above[0])
    if ratios[k] == r:
        return float(np.sqrt(u[k]))
    g = lambda uu: port_ratio(np.sqrt(uu), cal) - r
    root = brentq(g, u[k - 1], u[k], xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return float(np.sqrt(root))


def _log_cosh(x):
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2 * ax)) - np.log(2.0)


def qmti_loglik(epsilon: float, tags: np.ndarray, sigma: float = 1.0) -> float:
    """Log-likelihood of frequency tags under two Gaussian lines at +/- sigma eps / 2.

    Terms constant in epsilon are dropped.
    """
    h = sigma * abs(epsilon) / 2
    return float(np.sum(_log_cosh(tags * h / sigma**2)) - tags.size * h**2 / (2 * sigma**2))


def mle_qmti(frequency_tags, sigma: float = 1.0) -> float:
    """Maximum-likelihood separation from direct-imaging frequency tags.

    A coarse grid over [0, 5] locates the peak, then Brent's bounded
    search (golden section with parabolic steps) refines it. When the
    sample variance does not exceed sigma^2 the likelihood peaks at 0.
    """
    tags = np.asarray(frequency_tags, dtype=float).ravel()
    if tags.size == 0:
        raise ValueError("empty tag set")
    if tags.size < 10:
        raise ValueError("mle_qmti needs at least 10 tags")
    grid = np.linspace(0.0, EPS_MAX, _QMTI_GRID)
    ll = np.array([qmti_loglik(e, tags, sigma) for e in grid])
    k = int(np.argmax(ll))
    if k == 0 and np.sum(tags**2) <= tags.size * sigma**2:
        return 0.0
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    res = minimize_scalar(
        lambda e: -qmti_loglik(e, tags, sigma), bounds=(lo, hi), method="bounded", options={"xatol": 1e-10}
    )
    return float(res.x)


def sample_tags(
    epsilon: float, n: int, rng_seed, sigma: float = 1.0, model: QmtiNoiseModel | None = None
) -> np.ndarray:
    """Frequency tags from the two-line spectrum, optionally broadened and with a dark floor."""
    n = check_int(n, "n", 1)
    rng = make_rng(rng_seed)
    model = model or QmtiNoiseModel()
    width = sigma * model.width
    centers = np.where(rng.random(n) < 0.5, 0.5, -0.5) * sigma * epsilon
    tags = centers + width * rng.standard_normal(n)
    if model.dark_fraction > 0:
        dark = rng.random(n) < model.dark_fraction
        half = 0.5 * model.bwl_ratio * sigma
        tags[dark] = rng.uniform(-half, half, int(dark.sum()))
    if np.isfinite(model.bwl_ratio):
        # Tags outside the band are never recorded.
        tags = tags[np.abs(tags) <= 0.5 * model.bwl_ratio * sigma]
    return tags


def _one_set(instrument, epsilon, cal, photons, seq, shot_mode, mean_photons, qmti_model):
    if instrument == "pudtai":
        counts = sample_counts(epsilon, cal, photons, seq, shot_mode=shot_mode, mean_photons=mean_photons)
        return mle_pudtai(counts, cal)
    tags = sample_tags(epsilon, photons, seq, model=qmti_model)
    return mle_qmti(tags)


def bootstrap(
    epsilon_true: float,
    cal: DeviceCalibration,
    photons_per_set: int,
    n_boot: int,
    rng_seed,
    instrument: str = "pudtai",
    n_jobs: int = 1,
    shot_mode: bool = False,
    mean_photons: float = 0.69,
    qmti_model: QmtiNoiseModel | None = None,
) -> EstimatorReport:
    """Repeat sampling plus estimation ``n_boot`` times and summarize.

    Each set draws from its own Philox stream spawned from ``rng_seed``,
    so results do not depend on ``n_jobs``.
    """
    n_boot = check_int(n_boot, "n_boot", 1)
    if n_boot < 2:
        raise ValueError("n_boot must be >= 2 for a variance")
    photons_per_set = check_int(photons_per_set, "photons_per_set", 1)
    if instrument not in ("pudtai", "qmti"):
        raise ValueError("instrument must be 'pudtai' or 'qmti'")
    seqs = _seed_sequence(rng_seed).spawn(n_boot)
    args = (instrument, epsilon_true, cal, photons_per_set)
    extra = (shot_mode, mean_photons, qmti_model)
    if n_jobs == 1:
        est = [_one_set(*args, s, *extra) for s in seqs]
    else:
        est = Parallel(n_jobs=n_jobs)(delayed(_one_set)(*args, s, *extra) for s in seqs)
    est = np.asarray(est, dtype=float)
    mean = float(est.mean())
    return EstimatorReport(
        eps_hat_mean=mean,
        variance=float(est.var(ddof=1)),
        bias=mean - float(epsilon_true),
        n_boot=n_boot,
        photons_per_set=photons_per_set,
        epsilon_true=float(epsilon_true),
        estimates=est,
    )


def crb(epsilon, cal: DeviceCalibration, n_photons: int):
    """Cramer-Rao bound of the interferometer for ``n_photons``."""
    return 1.0 / (n_photons * f_pudtai(epsilon, cal))


def crb_qmti(epsilon, n_photons: int, model: QmtiNoiseModel | None = None):
    """Cramer-Rao bound of the direct-imaging spectrometer for ``n_photons``."""
    return 1.0 / (n_photons * fisher_qmti(epsilon, model or QmtiNoiseModel()))


def improvement_ratio(
    epsilon,
    cal: DeviceCalibration,
    qmti_model: QmtiNoiseModel | None = None,
    method: str = "crb",
    photons_per_set: int = 150_000,
    n_boot: int = 1000,
    rng_seed=0,
    n_jobs: int = 1,
):
    """Variance of the spectrometer over that of the interferometer at equal photon number.

    ``method="crb"`` uses the Fisher-information bounds, ``"bootstrap"``
    runs both Monte Carlo estimators from the same seed.
    """
    qmti_model = qmti_model or QmtiNoiseModel()
    if method == "crb":
        return f_pudtai(epsilon, cal) / fisher_qmti(epsilon, qmti_model)
    if method != "bootstrap":
        raise ValueError("method must be 'crb' or 'bootstrap'")
    ss = np.random.SeedSequence(rng_seed).spawn(2)
    pud = bootstrap(epsilon, cal, photons_per_set, n_boot, ss[0], n_jobs=n_jobs)
    qm = bootstrap(epsilon, cal, photons_per_set, n_boot, ss[1], instrument="qmti", n_jobs=n_jobs, qmti_model=qmti_model)
    return qm.variance / pud.variance


REPORT_COLUMNS = ("epsilon_true", "eps_hat_mean", "variance_per_10_photons", "bias", "crb_pudtai", "crb_qmti")


def write_report_csv(
    reports: Sequence[EstimatorReport], cal: DeviceCalibration, path, qmti_model: QmtiNoiseModel | None = None
) -> None:
    """CSV report; the bound columns are also scaled to 10 photons."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in reports:
            row = (
                r.epsilon_true,
                r.eps_hat_mean,
                r.variance_per_10_photons,
                r.bias,
                crb(r.epsilon_true, cal, 10),
                crb_qmti(r.epsilon_true, 10, qmti_model),
            )
            w.writerow([f"{float(v):.12g}" for v in row])
