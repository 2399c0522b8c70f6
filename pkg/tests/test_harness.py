import json
import math

import pytest

from hypvis.cli import main
from hypvis.config import ConfigError, ExperimentConfig
from hypvis.harness import (
    exp_alpha_fit,
    exp_frate,
    exp_lines_dim,
    exp_pair_correlation,
    exp_visibility_dim,
)


def make(**over):
    cfg = ExperimentConfig()
    cfg.mc.replicates = 200
    cfg.mc.batch_size = 64
    for k, v in over.items():
        cfg.apply_override(k.replace("__", "."), v)
    return cfg


# --- configuration ------------------------------------------------------------

def test_config_roundtrip():
    cfg = make(model__lambda=0.25, probe__depths=[1, 2], mc__survivors=10)
    again = ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg
    assert again.to_dict()["model"]["lambda"] == 0.25


def test_window_radius_recorded():
    cfg = make(probe__depths=[1, 7], model__radius__params=[0.8])
    assert cfg.window_radius == pytest.approx(7 + 0.8 + 2)


def test_string_overrides_are_parsed():
    cfg = ExperimentConfig()
    cfg.apply_override("model.lambda", "0.4")
    cfg.apply_override("probe.depths", "[1, 2, 3]")
    cfg.apply_override("probe.first_moment", "false")
    cfg.apply_override("model.radius.law", "two-point")
    cfg.apply_override("model.radius.params", "[0.5, 1.0, 0.5]")
    assert cfg.model.lam == 0.4 and cfg.probe.depths == [1.0, 2.0, 3.0]
    assert cfg.probe.first_moment is False
    assert cfg.law.mean() == 0.75


@pytest.mark.parametrize("key, value", [("mc.replicates", 50), ("probe.depths", [1, -2]),
                                        ("model.phase", "solid"), ("model.radius.params", [-1])])
def test_validation_errors(key, value):
    cfg = ExperimentConfig()
    cfg.apply_override(key, value)
    with pytest.raises(ConfigError):
        cfg.validate()


def test_unknown_key():
    with pytest.raises(ConfigError):
        ExperimentConfig().apply_override("model.colour", 1)


# --- experiments ----------------------------------------------------------------

def test_zero_intensity():
    vac = exp_frate(make(model__lambda=0.0))
    assert all(r["f_hat"] == 1.0 and r["stderr"] == 0.0 for r in vac.rows)
    occ = exp_frate(make(model__lambda=0.0, model__phase="occupied"))
    assert all(r["f_hat"] == 0.0 for r in occ.rows)


def test_frate_monotone_and_first_moment():
    res = exp_frate(make(model__lambda=0.2, model__radius__params=[0.8], mc__replicates=1000))
    f = [r["f_hat"] for r in res.rows]
    assert f == sorted(f, reverse=True)
    assert all(r["first_moment_z"] <= 4 for r in res.rows)
    assert all(r["f_analytic"] is not None for r in res.rows)


def test_alpha_fit_reports_reference():
    res = exp_alpha_fit(make(model__lambda=0.1, mc__replicates=2000))
    assert res.summary["alpha_analytic"] == pytest.approx(0.2350402, abs=1e-7)
    assert res.summary["alpha_stderr"] > 0


def test_alpha_fit_stderr_scales_with_n():
    a = exp_alpha_fit(make(model__lambda=0.1, mc__replicates=4000, probe__first_moment=False))
    b = exp_alpha_fit(make(model__lambda=0.1, mc__replicates=8000, probe__first_moment=False))
    assert a.summary["alpha_stderr"] / b.summary["alpha_stderr"] == pytest.approx(math.sqrt(2), rel=0.15)


def test_alpha_fit_needs_four_depths():
    with pytest.raises(ConfigError):
        exp_alpha_fit(make(probe__depths=[1, 2, 3]))


def test_alpha_fit_rejects_empty_depths():
    with pytest.raises(ConfigError, match="reduce the maximum depth"):
        exp_alpha_fit(make(model__lambda=2.0, probe__depths=[1, 2, 3, 4], probe__first_moment=False))


def test_everything_blocked_gives_no_dimension():
    res = exp_visibility_dim(make(model__lambda=12.0, probe__depths=[1.0]))
    row = res.rows[0]
    assert row["survival"] == 0 and row["dimension_mean"] is None


def test_small_visibility_and_lines_runs():
    lam = 0.3 / (2 * math.sinh(1))
    v = exp_visibility_dim(make(model__lambda=lam, probe__depths=[2.0, 4.0], mc__replicates=100))
    assert v.rows[0]["survival"] >= v.rows[1]["survival"]
    assert 0 < v.rows[1]["dimension_mean"] <= 1
    assert v.rows[1]["union_dimension_mean"] == pytest.approx(1 + v.rows[1]["dimension_mean"])
    ln = exp_lines_dim(make(model__lambda=lam, probe__depths=[3.0], mc__replicates=100))
    assert ln.rows[0]["survival"] <= v.rows[0]["survival"] + 0.2


def test_survivor_target_stops_early():
    lam = 0.3 / (2 * math.sinh(1))
    res = exp_visibility_dim(make(model__lambda=lam, probe__depths=[3.0], mc__survivors=30,
                                  mc__batch_size=16))
    assert 30 <= res.rows[0]["survivors"] < 30 + 16


def test_pairs_small_run():
    lam = 0.3 / (2 * math.sinh(1))
    res = exp_pair_correlation(make(model__lambda=lam, probe__depths=[3.0], mc__replicates=400,
                                    probe__separations=[math.pi, math.pi / 4, math.pi / 32]))
    ratios = [r["ratio"] for r in res.rows]
    assert ratios[0] < ratios[2]
    assert res.summary["antipodal_exact"] == pytest.approx(math.exp(lam * 2 * math.pi * (math.cosh(1) - 1)))
    # coinciding directions: the ratio tends to 1 / f
    near = exp_pair_correlation(make(model__lambda=lam, probe__depths=[3.0], mc__replicates=400,
                                     probe__separations=[1e-9, math.pi]))
    assert near.rows[0]["ratio"] == pytest.approx(1 / near.rows[0]["f_hat"], rel=1e-6)


def test_pairs_needs_separations():
    with pytest.raises(ConfigError):
        exp_pair_correlation(make())


@pytest.mark.parametrize("run", [exp_frate, exp_visibility_dim])
def test_worker_count_does_not_change_csv(run, tmp_path):
    outs = []
    for workers in (1, 3):
        cfg = make(model__lambda=0.15, probe__depths=[1.0, 2.5], mc__replicates=150,
                   mc__batch_size=40, mc__workers=workers, mc__survivors=None)
        res = run(cfg)
        paths = res.write(str(tmp_path / f"w{workers}"))
        outs.append(open(paths["rows"], "rb").read() + open(paths["summary"], "rb").read())
    assert outs[0] == outs[1]


# --- command line ------------------------------------------------------------------

def test_cli_alpha(capsys):
    assert main(["alpha", "--set", "model.lambda=0.1"]) == 0
    assert json.loads(capsys.readouterr().out)["alpha"] == pytest.approx(0.2350402, abs=1e-7)


def test_cli_exit_codes(tmp_path, monkeypatch):
    assert main(["alpha", "--set", "model.nothing=1"]) == 1
    assert main(["alpha", "--set", "mc.replicates=5"]) == 1
    assert main(["alpha", "--set", "model.phase=occupied", "--set", "model.lambda=0.3",
                 "--set", "model.mode=literal"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["frate", "--config", str(bad)]) == 1


def test_cli_writes_to_env_directory(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("HYPVIS_OUTPUT_DIR", str(tmp_path))
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": {"lambda": 0.2}, "mc": {"replicates": 100}}))
    assert main(["frate", "--config", str(cfg), "--quiet"]) == 0
    assert capsys.readouterr().out == ""
    side = json.loads((tmp_path / "frate.json").read_text())
    assert side["config"]["model"]["lambda"] == 0.2
    assert side["window_radius"] == pytest.approx(4 + 1 + 2)
    assert "numpy" in side["versions"]
    assert (tmp_path / "frate.csv").read_text().startswith("depth,n,f_hat,stderr")


def test_cli_selftest(capsys):
    assert main(["selftest"]) == 0
    assert capsys.readouterr().out.count("PASS") == 5
