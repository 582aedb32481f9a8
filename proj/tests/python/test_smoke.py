import math

import numpy as np
import pytest

import entlab

LOG_2PI_E = math.log(2 * math.pi) + 1


def test_models_and_closed_forms():
    g = entlab.standard_gaussian(3)
    assert g.dim == 3
    assert g.analytic_entropy == pytest.approx(1.5 * LOG_2PI_E, abs=1e-12)
    e = entlab.power(entlab.exponential(), 4)
    assert e.analytic_entropy == pytest.approx(4.0)
    assert e.log_density(np.ones(4)) == pytest.approx(-4.0)
    assert entlab.kappa_convolution(0.25, 0.25) == pytest.approx(0.125)
    assert entlab.unit_volume_ball(2).log_volume() == pytest.approx(0.0, abs=1e-12)


def test_sampling_is_seeded():
    cube = entlab.uniform_body(entlab.unit_cube(2))
    a = cube.sample(1000, seed=3)
    assert a.shape == (1000, 2)
    assert np.array_equal(a, cube.sample(1000, seed=3))
    assert not np.array_equal(a, cube.sample(1000, seed=4))
    assert ((a >= 0) & (a <= 1)).all()


def test_estimators_agree_with_truth():
    g = entlab.standard_gaussian(2)
    plug = entlab.plugin_entropy(g, m=20000, seed=1)
    assert plug["method"] == "plugin_mc"
    assert abs(plug["value"] - LOG_2PI_E) <= 3 * plug["std_error"]
    knn = entlab.knn_entropy(g.sample(20000, seed=2), k=5)
    assert abs(knn["value"] - LOG_2PI_E) < 0.05
    u = entlab.uniform_interval()
    tri = entlab.estimate_entropy(entlab.convolve(u, u), seed=3, route="convolution", m_outer=20000)
    assert abs(tri["value"] - 0.5) <= 3 * tri["std_error"]


def test_checks_return_reports():
    sandwich = entlab.check_entropy_sandwich(entlab.zoo_model("exponential", 8))
    assert sandwich["upper"]["satisfied"]
    assert abs(sandwich["upper"]["margin"]) < 1e-12
    epi = entlab.check_epi(entlab.zoo_model("cube", 2), entlab.zoo_model("ball", 2), seed=5, m_outer=4000)
    assert epi["satisfied"]
    assert epi["params"]["ratio"] >= 1 - 3 * epi["params"]["ratio_se"]
    profile = entlab.concentration_profile(entlab.standard_gaussian(16), m=20000)
    assert profile["bound"][-1] == pytest.approx(4 * math.exp(-4.0))
    assert profile["oracle_tail"] is not None
    assert profile["svg"].startswith("<svg")


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        entlab.exponential(-1.0)
    with pytest.raises(ValueError):
        entlab.kappa_convolution(0.5, -0.5)
    with pytest.raises(entlab.UnsupportedOperation):
        entlab.minkowski_sum(entlab.unit_cube(2), entlab.unit_volume_ball(2))
    with pytest.raises(entlab.ConfigError):
        entlab.run_config("models:\n  - {name: x, family: cauchy}\n")


def test_config_run_is_deterministic():
    text = """
seed: 5
models:
  - {name: e2, family: exponential, power: 2}
  - {name: c2, family: uniform, lower: 0, upper: 1, power: 2}
checks:
  - {checker: entropy-sandwich, models: [e2, c2]}
  - {checker: epi, models: [e2, c2], m_outer: 2000}
"""
    first = entlab.run_config(text)
    assert first == entlab.run_config(text)
    assert len(first) == 5
    assert not entlab.unsatisfied(first)
    assert "reverse-epi: " in entlab.list_suites()
