import json

import numpy as np
import pytest

import meglm


def test_closed_forms():
    mean, prec = meglm.mec_conditional(np.array([3.0]), 2.0, 1.0, 4.0, np.array([1.0]))
    assert prec[0] == 5.0
    assert mean[0] == pytest.approx(2.8)
    mean, prec = meglm.meb_conditional(np.array([1.0]), 4.0, np.array([1.0]), 2.0)
    assert (mean[0], prec[0]) == (2.0, 1.0)
    assert meglm.attenuation_factor(1.0, 1.0) == 0.5


def test_elicitation():
    assert meglm.precision_from_uniform_range(0.05) == pytest.approx(4800.0)
    mu, sigma2 = meglm.lognormal_from_quantiles(40.0, 130.0)
    assert abs(mu - 4.3) < 0.05
    shape, rate = meglm.gamma_from_quantiles(0.5, 2.0)
    assert shape == pytest.approx(8.5, rel=0.15)
    with pytest.raises(ValueError):
        meglm.gamma_from_quantiles(2.0, 0.5)


def test_naive_fit_recovers_ols():
    rng = np.random.default_rng(0)
    w = rng.normal(size=200)
    y = 1.0 + 2.0 * w + rng.normal(scale=0.1, size=200)
    f = meglm.naive_glm_fit(y, w, np.zeros((200, 0)), "gaussian")
    x = np.column_stack([np.ones(200), w])
    assert np.allclose(f["coefficients"], np.linalg.lstsq(x, y, rcond=None)[0], atol=1e-10)


def test_simulate_and_fit():
    s = meglm.simulate("framingham", seed=3, n=80)
    assert s == meglm.simulate("framingham", seed=3, n=80)
    truth = json.loads(s["truth_json"])
    assert "beta_x" in json.dumps(truth)
    report = meglm.fit(s["model_yaml"], s["data_csv"], "laplace")
    names = [p["parameter"] for p in report["parameters"]]
    assert "beta_x" in names
    chain = meglm.fit(s["model_yaml"], s["data_csv"], "mcmc", iterations=2000, burn_in=500, thin=1, seed=1)
    assert any(p["parameter"] == "beta_x" for p in chain["parameters"])
    with pytest.raises(ValueError):
        meglm.fit(s["model_yaml"], s["data_csv"], "mcmc", iterations=2000, burn_in=500, thin=1)
    with pytest.raises(ValueError):
        meglm.simulate("wolves", seed=1)
