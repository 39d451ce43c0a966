"""scikit-learn style wrappers.

``fit`` ingests the channel (a matrix, or a Weyl symbol); ``transform``
maps a column of snr values to the per-snr quantities, so the channels can
be cloned, parameter-searched and chained like other estimators.  Since
``fit`` and ``transform`` take different inputs there is no
``fit_transform``.

>>> import numpy as np
>>> est = VectorChannelTransformer(noise_variance=1.0).fit(np.eye(2))
>>> est.transform([[2.0]])
array([[0.69314718, 1.        , 0.5       , 0.5       ]])
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from . import ltv, spectral
from .exceptions import InvalidInputError
from .quadrature import QuadratureConfig
from .symbols import GaussianSymbol, TabulatedSymbol, WeylSymbolModel

__all__ = ["VectorChannelTransformer", "LTVChannelTransformer"]


def _snr_column(X):
    X = check_array(X, ensure_2d=False, dtype=float)
    X = X.reshape(-1, 1) if X.ndim == 1 else X
    if X.shape[1] != 1:
        raise InvalidInputError(f"expected a single snr column, got {X.shape[1]} columns")
    if np.any(X <= 0):
        raise InvalidInputError("snr values must be positive")
    return X[:, 0]


class VectorChannelTransformer(BaseEstimator):
    """Capacity, NODE, MMSE and Fisher term of a vector Gaussian channel.

    Parameters
    ----------
    noise_variance : float
        ``theta^2`` of the additive noise.

    Attributes
    ----------
    spectrum_ : SpectralChannel
    eigenvalues_ : ndarray of shape (L,)
    n_features_in_ : int
        Always 1 (the snr column) after ``fit``.
    """

    feature_names = ("capacity", "node", "mmse", "fisher_term")

    def __init__(self, noise_variance=1.0):
        self.noise_variance = noise_variance

    def fit(self, X, y=None):
        H = check_array(X, dtype=float)
        self.spectrum_ = spectral.spectrum(spectral.ChannelSpec(H, self.noise_variance))
        self.eigenvalues_ = self.spectrum_.eigenvalues
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "spectrum_")
        snr = _snr_column(X)
        spec = self.spectrum_
        out = np.zeros((snr.size, 4))
        for i, s in enumerate(snr):
            rep = spectral.mmse(spec, s)
            cap = spectral.capacity_from_snr(spec, s) if spectral.is_feasible(spec, s) else 0.0
            out[i] = cap, rep.node, rep.mmse, rep.fisher_term
        return out

    def waterfill(self, budget):
        check_is_fitted(self, "spectrum_")
        return spectral.waterfill(self.spectrum_, budget)

    def get_feature_names_out(self, input_features=None):
        return np.asarray(self.feature_names, dtype=object)


class LTVChannelTransformer(BaseEstimator):
    """Time-frequency integrals of a continuous-time LTV channel.

    With ``X=None`` the Gaussian symbol with shear ``gamma`` is used;
    otherwise ``X`` is a tabulated symbol grid and ``t_axis``/``omega_axis``
    give its nodes.  ``transform`` returns capacity, count, NODE and MMSE
    per snr.
    """

    feature_names = ("capacity", "count", "node", "mmse")

    def __init__(self, gamma=1.0, spread=1.0, noise_psd=1.0, tolerance=1e-8,
                 t_axis=None, omega_axis=None):
        self.gamma = gamma
        self.spread = spread
        self.noise_psd = noise_psd
        self.tolerance = tolerance
        self.t_axis = t_axis
        self.omega_axis = omega_axis

    def fit(self, X=None, y=None):
        if X is None:
            sym = GaussianSymbol(self.gamma)
        else:
            if self.t_axis is None or self.omega_axis is None:
                raise InvalidInputError("a tabulated symbol needs t_axis and omega_axis")
            sym = TabulatedSymbol(self.t_axis, self.omega_axis, check_array(X, dtype=float))
        self.model_ = WeylSymbolModel(sym, self.spread, self.noise_psd)
        self.quad_ = QuadratureConfig(tolerance=self.tolerance)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "model_")
        snr = _snr_column(X)
        out = np.zeros((snr.size, 4))
        for i, s in enumerate(snr):
            rep = ltv.continuous_report(self.model_, s, self.quad_)
            out[i] = rep.capacity, rep.count, rep.node, rep.mmse
        return out

    def get_feature_names_out(self, input_features=None):
        return np.asarray(self.feature_names, dtype=object)
