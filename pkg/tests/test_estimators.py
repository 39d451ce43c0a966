import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from cnode.estimators import LTVChannelTransformer, VectorChannelTransformer
from cnode.exceptions import InvalidInputError


def test_vector_transform():
    est = VectorChannelTransformer(noise_variance=1.0).fit(np.diag([2.0, 1.0]))
    out = est.transform([[0.5], [10.0]])
    np.testing.assert_allclose(out[0], [0.5 * math.log(2.0), 2.0, 1.0, 1.0])
    assert out[1, 1] == pytest.approx(0.2)
    assert list(est.get_feature_names_out()) == ["capacity", "node", "mmse", "fisher_term"]


def test_vector_infeasible_row_is_zero():
    est = VectorChannelTransformer().fit(np.diag([2.0, 1.0]))
    np.testing.assert_array_equal(est.transform([0.1]), [[0, 0, 0, 0]])


def test_vector_waterfill():
    est = VectorChannelTransformer().fit(np.diag([2.0, 1.0]))
    assert est.waterfill(2.0).water_level == pytest.approx(1.625, abs=1e-10)


def test_not_fitted():
    with pytest.raises(NotFittedError):
        VectorChannelTransformer().transform([[1.0]])


def test_bad_snr_column():
    est = VectorChannelTransformer().fit(np.eye(2))
    with pytest.raises(InvalidInputError):
        est.transform([[1.0, 2.0]])
    with pytest.raises(InvalidInputError):
        est.transform([[-1.0]])


def test_clone_and_params():
    est = LTVChannelTransformer(gamma=2.0, spread=3.0)
    c = clone(est)
    assert c.get_params()["spread"] == 3.0
    c.set_params(spread=1.0)
    assert est.spread == 3.0


def test_ltv_gaussian():
    out = LTVChannelTransformer(tolerance=1e-8).fit().transform([[math.e]])
    np.testing.assert_allclose(out[0], [1 / 8, 0.5, 0.5 / math.e, 0.5 / math.e ** 2], rtol=1e-7)


def test_ltv_tabulated_needs_axes():
    with pytest.raises(InvalidInputError):
        LTVChannelTransformer().fit(np.zeros((5, 5)))
