"""scikit-learn style wrappers, for use in pipelines and parameter grids."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import bounds as bd
from .errors import ValidationError
from .gaussian import centralized_gaussian, new_gaussian, rw_gaussian
from .optimize import OptimizerConfig

_DISCRETE = {
    "g": lambda scn, aux, t, cfg: bd.g_bound(scn, *aux.x_kernels(scn), cfg),
    "addsub": lambda scn, aux, t, cfg: bd.addsub_upper_bound(scn, aux, t, cfg),
    "rw": lambda scn, aux, t, cfg: bd.rw_bound(scn, aux, cfg),
    "corollary1": lambda scn, aux, t, cfg: bd.corollary1_bound(scn, aux, cfg),
    "ac": lambda scn, aux, t, cfg: bd.ac_lower_bound(scn, cfg),
}


class DiscreteBoundEstimator(BaseEstimator):
    """Evaluate one bound on a discrete scenario.

    ``fit(scenario, aux)`` stores ``value_`` (nats) and the full ``result_``.
    ``rate`` overrides the scenario's rate when given.
    """

    def __init__(self, bound: str = "addsub", rate: float | None = None, terminal="centralized",
                 n_starts: int = 8, seed: int = 0):
        self.bound = bound
        self.rate = rate
        self.terminal = terminal
        self.n_starts = n_starts
        self.seed = seed

    def fit(self, scenario: bd.DiscreteScenario, aux: bd.AuxiliaryReceiver | None = None):
        if self.bound not in _DISCRETE:
            raise ValidationError(f"unknown bound {self.bound!r}; choose from {sorted(_DISCRETE)}")
        if aux is None and self.bound != "ac":
            raise ValidationError(f"bound {self.bound!r} needs an auxiliary receiver")
        scn = scenario if self.rate is None else scenario.with_rate(self.rate)
        cfg = OptimizerConfig(seed=self.seed, n_starts=self.n_starts)
        self.result_ = _DISCRETE[self.bound](scn, aux, self.terminal, cfg)
        self.value_ = float(self.result_.value)
        return self

    def score(self, scenario=None, aux=None) -> float:
        check_is_fitted(self, "value_")
        return self.value_


class GaussianBoundTransformer(TransformerMixin, BaseEstimator):
    """Map a column of rho0 values to a Gaussian exponent bound.

    ``bound`` is one of ``"new"``, ``"rw"`` or ``"centralized"``; with
    ``normalize=True`` values are divided by (rho0 - rho1)^2.
    """

    def __init__(self, rho1: float = 0.7, rate: float = 0.5, bound: str = "new", normalize: bool = False):
        self.rho1 = rho1
        self.rate = rate
        self.bound = bound
        self.normalize = normalize

    def fit(self, X=None, y=None):
        if self.bound not in ("new", "rw", "centralized"):
            raise ValidationError(f"unknown bound {self.bound!r}")
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        rho0 = np.asarray(X, dtype=float).reshape(-1)
        if self.bound == "new":
            v = np.asarray(new_gaussian(rho0, self.rho1, self.rate).value)
        elif self.bound == "rw":
            v = np.asarray(rw_gaussian(rho0, self.rho1, self.rate))
        else:
            v = np.asarray(centralized_gaussian(rho0, self.rho1))
        if self.normalize:
            v = v / (rho0 - self.rho1) ** 2
        return v.reshape(-1, 1)
