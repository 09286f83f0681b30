"""scikit-learn style regressors wrapping the incremental solvers."""

from __future__ import annotations

from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .iterative import LeastSquaresInstance, run_igm, run_kaczmarz
from .sampling import SamplerConfig

__all__ = ["LMSRegressor", "KaczmarzRegressor"]


class _IncrementalRegressor(RegressorMixin, BaseEstimator):
    def _instance(self, X, y) -> LeastSquaresInstance:
        X, y = check_X_y(X, y, y_numeric=True)
        self.n_features_in_ = X.shape[1]
        return LeastSquaresInstance.from_targets(X, y)

    def _finish(self, run, X):
        self.coef_ = run.final_iterates[0].copy()
        self.n_iter_ = run.iterations
        self.diverged_ = bool(run.diverged)
        return self

    def predict(self, X):
        check_is_fitted(self)
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X @ self.coef_


class LMSRegressor(_IncrementalRegressor):
    """Least-mean-squares incremental gradient over the rows of ``X``.

    Parameters
    ----------
    gamma : float or None
        Constant step; ``None`` picks ``0.5 / max ||x_i||^2``.
    epochs : int
        Passes over the data (``epochs * n`` steps).
    scheme : str
        Sampling scheme name (see :mod:`agm.solvers.sampling`).
    step_rule : {"constant", "harmonic"}
    weight_power : {1, 2}
        Exponent for ``row-norm-weighted`` sampling.
    random_state : int
        Sampler seed.
    """

    def __init__(self, gamma=None, epochs=10, scheme="without-replacement-permutation",
                 step_rule="constant", weight_power=2, random_state=0):
        self.gamma = gamma
        self.epochs = epochs
        self.scheme = scheme
        self.step_rule = step_rule
        self.weight_power = weight_power
        self.random_state = random_state

    def fit(self, X, y):
        inst = self._instance(X, y)
        sampler = SamplerConfig(self.scheme, self.random_state, self.weight_power)
        run = run_igm(inst, sampler, self.epochs * inst.n, 1, self.step_rule, self.gamma)
        return self._finish(run, X)


class KaczmarzRegressor(_IncrementalRegressor):
    """Kaczmarz row projections for ``X w = y``.

    Parameters
    ----------
    epochs : int
        Passes over the rows.
    scheme : str
        Sampling scheme; the randomized method of Strohmer and Vershynin is
        ``row-norm-weighted`` with ``weight_power=2``.
    weight_power : {1, 2}
    random_state : int
    """

    def __init__(self, epochs=10, scheme="without-replacement-permutation", weight_power=2,
                 random_state=0):
        self.epochs = epochs
        self.scheme = scheme
        self.weight_power = weight_power
        self.random_state = random_state

    def fit(self, X, y):
        inst = self._instance(X, y)
        sampler = SamplerConfig(self.scheme, self.random_state, self.weight_power)
        run = run_kaczmarz(inst, sampler, self.epochs * inst.n, 1)
        return self._finish(run, X)
