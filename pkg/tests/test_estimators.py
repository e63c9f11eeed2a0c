import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import make_pipeline

from conftest import in_r_instance
from dhtbound import ValidationError, rw_bound
from dhtbound.estimators import DiscreteBoundEstimator, GaussianBoundTransformer
from dhtbound.gaussian import new_gaussian, rw_gaussian


class TestGaussianTransformer:
    def test_column_out(self):
        rho0 = np.linspace(0.72, 0.98, 9)
        out = GaussianBoundTransformer().fit_transform(rho0.reshape(-1, 1))
        assert out.shape == (9, 1)
        np.testing.assert_array_equal(out[:, 0], new_gaussian(rho0, 0.7, 0.5).value)

    def test_normalize_and_params(self):
        t = GaussianBoundTransformer(bound="rw", normalize=True)
        assert t.get_params()["bound"] == "rw"
        c = clone(t).set_params(rho1=0.5, rate=0.2)
        out = c.fit_transform([[0.8]])
        assert out[0, 0] == pytest.approx(rw_gaussian(0.8, 0.5, 0.2) / 0.09, rel=1e-12)

    def test_in_pipeline(self):
        pipe = make_pipeline(GaussianBoundTransformer(bound="centralized"))
        assert pipe.fit_transform([[0.9]])[0, 0] == pytest.approx(0.2191835229, abs=1e-9)

    def test_unknown_bound(self):
        with pytest.raises(ValidationError):
            GaussianBoundTransformer(bound="sha").fit()


class TestDiscreteEstimator:
    def test_matches_functional_api(self):
        scn, aux = in_r_instance(np.random.default_rng(5))
        est = DiscreteBoundEstimator(bound="rw").fit(scn, aux)
        assert est.value_ == rw_bound(scn, aux).value
        assert est.score() == est.value_

    def test_rate_override(self):
        scn, aux = in_r_instance(np.random.default_rng(6))
        lo = DiscreteBoundEstimator(bound="rw", rate=0.0).fit(scn, aux).value_
        hi = DiscreteBoundEstimator(bound="rw", rate=0.5).fit(scn, aux).value_
        assert lo <= hi + 1e-9

    def test_needs_receiver(self):
        scn, _ = in_r_instance(np.random.default_rng(7))
        with pytest.raises(ValidationError):
            DiscreteBoundEstimator(bound="g").fit(scn)
        with pytest.raises(ValidationError):
            DiscreteBoundEstimator(bound="nope").fit(scn)

    def test_clone_keeps_params(self):
        est = DiscreteBoundEstimator(bound="ac", n_starts=3, seed=2)
        assert clone(est).get_params() == est.get_params()
