"""scikit-learn style wrappers around the separation estimators."""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_counts, check_tags
from .estimate import CountRecord, mle_pudtai, mle_qmti, qmti_loglik
from .model import DeviceCalibration, port_probabilities

_V_MAX = 1 - 1e-9


def fit_calibration(counts, epsilons, t_a_sigma: float, start: DeviceCalibration | None = None) -> DeviceCalibration:
    """Fit (V_-, V_+, eta_+) by maximizing the pooled trinomial likelihood at known separations.

    Args:
        counts: (n, 3) array of [N_minus, N_plus, N_total].
        epsilons: known separation for each row.
        t_a_sigma: aperture, held fixed.
        start: initial guess (defaults to the reported calibration).
    """
    X = check_counts(counts)
    eps = np.asarray(epsilons, dtype=float).ravel()
    if eps.size != X.shape[0]:
        raise ValueError("need one separation per count row")
    start = start or DeviceCalibration.measured().replace(t_a_sigma=t_a_sigma)
    n_m, n_p = X[:, 0], X[:, 1]
    n_x = X[:, 2] - n_m - n_p

    def nll(theta):
        cal = DeviceCalibration(*np.clip(theta, 0.0, _V_MAX), t_a_sigma=t_a_sigma)
        p = port_probabilities(eps, cal)
        pr = np.clip(np.stack([p.p_minus, p.p_plus, p.p_cross]), 1e-300, None)
        return -float(np.sum(n_m * np.log(pr[0]) + n_p * np.log(pr[1]) + n_x * np.log(pr[2])))

    x0 = np.clip([start.v_minus, start.v_plus, start.eta_plus], 1e-3, 1 - 1e-3)
    res = minimize(nll, x0, method="L-BFGS-B", bounds=[(0.0, _V_MAX)] * 3)
    vm, vp, eta = np.clip(res.x, 0.0, _V_MAX)
    return DeviceCalibration(float(vm), float(vp), float(eta), t_a_sigma)


class PudtaiSeparationEstimator(RegressorMixin, BaseEstimator):
    """Separation estimates from interferometer port counts.

    Rows of X are [N_minus, N_plus, N_total]. With ``calibrate=True`` the
    visibilities and transmission are fitted from training rows whose
    separations y are known; otherwise the given constants are used.
    """

    def __init__(self, v_minus=0.9751, v_plus=0.764, eta_plus=0.719, t_a_sigma=0.564, calibrate=False):
        self.v_minus = v_minus
        self.v_plus = v_plus
        self.eta_plus = eta_plus
        self.t_a_sigma = t_a_sigma
        self.calibrate = calibrate

    def fit(self, X, y=None):
        X = check_counts(X)
        cal = DeviceCalibration(self.v_minus, self.v_plus, self.eta_plus, self.t_a_sigma)
        if self.calibrate:
            if y is None:
                raise ValueError("calibrate=True needs the known separations y")
            cal = fit_calibration(X, y, self.t_a_sigma, start=cal)
        self.calibration_ = cal
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "calibration_")
        X = check_counts(X)
        return np.array([mle_pudtai(CountRecord(*map(int, row)), self.calibration_) for row in X])


class QmtiSeparationEstimator(BaseEstimator):
    """Separation from direct-imaging frequency tags; ``fit`` stores ``eps_``."""

    def __init__(self, sigma=1.0):
        self.sigma = sigma

    def fit(self, X, y=None):
        tags = check_tags(X)
        self.eps_ = mle_qmti(tags, self.sigma)
        self.n_features_in_ = 1
        return self

    def score(self, X, y=None) -> float:
        """Mean log-density of the tags under the fitted separation."""
        check_is_fitted(self, "eps_")
        tags = check_tags(X)
        s = float(self.sigma)
        const = -0.5 * np.log(2 * np.pi * s**2) - 0.5 * np.mean(tags**2) / s**2
        return const + qmti_loglik(self.eps_, tags, s) / tags.size
