import math

import numpy as np
import pytest
from scipy.stats import multivariate_normal

import acerac


def lag_matrix(kind, n, alpha):
    idx = np.arange(n)
    lam = alpha ** np.abs(idx[:, None] - idx[None, :])
    if kind == "conditional":
        lam = lam - alpha ** (idx[:, None] + idx[None, :] + 2)
    return lam


def test_version_and_defaults():
    assert acerac.__version__
    cfg = acerac.default_config()
    assert cfg["env"] == "pendulum"
    assert float(cfg["alpha"]) == 0.5


def test_resolved_scalings():
    r = acerac.resolve_config({"d": 10})
    assert float(r["gamma"]) == pytest.approx(0.99 ** 0.1, rel=1e-12)
    assert int(r["n"]) == 20
    assert float(r["alpha"]) == pytest.approx(0.5 ** 0.1, rel=1e-12)
    wn = acerac.resolve_config({"d": 10, "white_noise": True})
    assert float(wn["alpha"]) == 0.0
    assert int(wn["n"]) == 1


def test_bad_config_names_the_key():
    with pytest.raises(Exception, match="bogus"):
        acerac.resolve_config({"bogus": 1})


def test_window_density_matches_scipy():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(2, 2))
    cov = a @ a.T + 0.5 * np.eye(2)
    for kind in ("stationary", "conditional"):
        for n, alpha in ((1, 0.0), (3, 0.5), (5, 0.9)):
            dense = np.kron(lag_matrix(kind, n, alpha), cov)
            np.testing.assert_allclose(acerac.window_covariance(kind, n, alpha, cov), dense, atol=1e-12)
            x, m = rng.normal(size=2 * n), rng.normal(size=2 * n)
            want = multivariate_normal(mean=m, cov=dense).logpdf(x)
            assert acerac.window_log_density(kind, n, alpha, cov, x, m) == pytest.approx(want, abs=1e-9)
    with pytest.raises(ValueError):
        acerac.window_log_density("other", 2, 0.5, cov, np.zeros(4), np.zeros(4))


def test_ar_noise_moments():
    xs = acerac.ar_noise(0.7, np.eye(1), 200_000, seed=3)[:, 0]
    assert xs.shape == (200_000,)
    # standard error of both estimates is below 0.01 here
    assert np.mean(xs * xs) == pytest.approx(1.0, abs=0.03)
    assert np.mean(xs[1:] * xs[:-1]) == pytest.approx(0.7, abs=0.03)


def numpy_forward(widths, params, x):
    h, off = x.T, 0
    for i in range(len(widths) - 1):
        fan_in, fan_out = widths[i], widths[i + 1]
        w = params[off : off + fan_in * fan_out].reshape(fan_in, fan_out).T
        off += fan_in * fan_out
        b = params[off : off + fan_out]
        off += fan_out
        h = w @ h + b[:, None]
        if i < len(widths) - 2:
            h = np.tanh(h)
    assert off == len(params)
    return h.T


def test_train_eval_compare(tmp_path):
    out = tmp_path / "run"
    cfg = {"steps": 1200, "eval_interval": 400, "eval_episodes": 2, "learning_start": 200,
           "hidden": [8], "seeds": [1, 2], "out": str(out)}
    seeds = acerac.train(cfg)
    assert [s["seed"] for s in seeds] == [1, 2]
    for s in seeds:
        assert s["ok"], s["error"]
        assert s["curve"].shape == (4, 3)
        assert s["curve"][-1, 0] == 1200
        assert s["updates"] > 0
        np.testing.assert_array_equal(acerac.read_curve(str(out / f"seed_{s['seed']}" / "curve.csv")), s["curve"])

    widths, params = acerac.load_checkpoint(str(out / "seed_1" / "actor.bin"))
    assert widths == [3, 8, 1]
    x = np.random.default_rng(1).normal(size=(5, 3))
    np.testing.assert_allclose(acerac.mlp_forward(widths, params, x), numpy_forward(widths, params, x),
                               rtol=1e-12, atol=1e-12)

    ev = acerac.evaluate_checkpoint(str(out / "seed_1" / "actor.bin"), episodes=3, seed=4)
    assert len(ev["returns"]) == 3
    assert ev["mean"] == pytest.approx(np.mean(ev["returns"]))
    assert ev == acerac.evaluate_checkpoint(str(out / "seed_1" / "actor.bin"), episodes=3, seed=4)

    rows, problems = acerac.compare([str(out), str(tmp_path / "missing")])
    assert len(rows) == 1 and len(problems) == 1
    finals = [s["curve"][-1, 1] for s in seeds]  # 4 rows -> final window is the last row
    assert rows[0]["final_mean"] == pytest.approx(np.mean(finals))
    assert rows[0]["seeds"] == 2
    assert math.isfinite(rows[0]["final_std"])
