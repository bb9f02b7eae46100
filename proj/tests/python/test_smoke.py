import json
import math

import numpy as np
import pytest

import driftlab as dl


def test_presets_and_errors():
    assert "gradient_cos" in dl.drift_preset_names()
    b = dl.drift_preset("gradient_cos", 1, 0.5)
    # B = A cos(2 pi x), b = B'
    assert b([0.25])[0] == pytest.approx(-0.5 * 2 * math.pi)
    with pytest.raises(dl.ConfigError):
        dl.drift_preset("nope", 1)
    assert issubclass(dl.FormatError, dl.IoError)
    assert issubclass(dl.IoError, dl.Error)


def test_simulate_stats_fit_sample(tmp_path):
    b = dl.drift_preset("gradient_cos", 1, 0.5)
    path = dl.simulate(b, T=50.0, delta=1e-3, seed=3)
    assert path.positions.shape == (50001, 1)
    assert path.horizon == pytest.approx(50.0)
    again = dl.simulate(b, T=50.0, delta=1e-3, seed=3)
    assert path.hash == again.hash

    spec = dl.build_basis(dl.Family.Daubechies, 2, 1, 6)
    stats = dl.sufficient_stats(path, spec)
    assert stats.gram.shape == (4, 4)
    assert np.allclose(stats.gram, stats.gram.T)
    # the occupation Gram of an orthonormal basis has trace ~ 1 per function on average
    assert np.trace(stats.gram) == pytest.approx(4.0, rel=0.05)

    post = dl.fit(stats, dl.PriorSpec(0.5, 2.0, 2, 1))
    assert post.normal_equation_residual() < 1e-9
    draws = dl.sample(post, 2000, seed=5)
    assert draws.shape == (2000, 4, 1)
    cov = np.cov(draws[:, :, 0].T)
    assert np.allclose(np.diag(cov), np.diag(post.covariance()), rtol=0.15)

    direct = dl.log_likelihood(path, post.mean)
    quad = dl.log_likelihood(stats, post.mean)
    assert direct == pytest.approx(quad, rel=1e-10)

    f = tmp_path / "post.bin"
    dl.save(str(f), post)
    back = dl.load_posterior(str(f))
    assert back.hash == post.hash
    assert np.array_equal(back.mean.values, post.mean.values)


def test_callable_drift_matches_preset():
    preset = dl.drift_preset("constant", 1, 0.5)
    const = preset([0.3])[0]
    p1 = dl.simulate(preset, T=2.0, delta=1e-2, seed=9)
    p2 = dl.simulate(lambda x: [const], T=2.0, delta=1e-2, seed=9, dim=1)
    assert np.array_equal(p1.positions, p2.positions)


def test_invariant_measure_gradient_oracle():
    amp = 0.5
    b = dl.drift_preset("gradient_cos", 1, amp)
    mu = dl.invariant_measure(b, K=32)
    Z = 1.2660658777520082  # I_0(1) = int exp(cos 2 pi x) dx
    for x in (0.0, 0.2, 0.5, 0.8):
        assert mu([x]) == pytest.approx(math.exp(2 * amp * math.cos(2 * math.pi * x)) / Z, rel=1e-9)


def test_poisson_zero_drift():
    zero = dl.drift_preset("zero", 1)
    mu = dl.invariant_measure(zero, K=8)
    f = dl.FourierField.from_function(lambda x: math.cos(2 * math.pi * x[0]), 1, 8)
    u = dl.solve_poisson(zero, f, mu)
    # (1/2) u'' = cos(2 pi x)  =>  u = -cos(2 pi x) / (2 pi^2)
    assert u([0.1]) == pytest.approx(-math.cos(0.2 * math.pi) / (2 * math.pi**2), rel=1e-10)
    with pytest.raises(dl.PreconditionError):
        dl.solve_poisson(zero, dl.FourierField.from_function(lambda x: 1.0, 1, 8), mu, center=False)


def test_pipeline_and_study(tmp_path):
    cfg = dl.parse_config(json.dumps({
        "model": {"d": 1, "drift": {"preset": "gradient_cos"}},
        "discretization": {"T": 40, "seed": 2},
        "study": {"kind": "rate", "horizons": [20, 40, 80], "replications": 10},
    }))
    out = dl.run_pipeline(cfg, str(tmp_path / "run"))
    text = dl.describe_artifacts([out["path"], out["stats"], out["posterior"]])
    assert "provenance chain verified" in text
    report = dl.run_study(cfg)
    assert report["study"].startswith("rate")
    assert "slope" in report["metrics"]
    bad = dl.parse_config(json.dumps({"model": {"d": 1}, "study": {"kind": "rate", "horizons": [50]}}))
    with pytest.raises(dl.StageError, match="stage study"):
        dl.run_pipeline(bad, str(tmp_path / "bad"))
    with pytest.raises(dl.ConfigError, match="discretization.T"):
        dl.parse_config('{"model": {"d": 1}, "discretization": {"T": -1}}')
