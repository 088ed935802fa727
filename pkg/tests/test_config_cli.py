import csv
import io
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from isomix import cli
from isomix.config import ConfigError, ExperimentConfig, load, parse, preset_names
from isomix.errors import PreconditionError
from isomix.estimators import WeightPair
from isomix.models import BivariateNormal, GammaScale
from isomix.svg import line_chart, nice_ticks

SVG_NS = "{http://www.w3.org/2000/svg}"


def _write_cfg(tmp_path, name, body):
    path = tmp_path / f"{name}.cfg"
    path.write_text(body)
    return str(path)


class TestParse:
    def test_minimal(self):
        cfg = parse("family = gamma_scale\na1 = 2\na2 = 3\n")
        assert cfg.model() == GammaScale(2, 3)
        assert cfg.weights == WeightPair()

    def test_comments_and_blanks(self):
        cfg = parse("# header\n\nfamily = normal  # trailing\nsigma1=1\nsigma2=2\nrho=0.1\np1 = 4\n")
        assert cfg.model() == BivariateNormal(1, 2, 0.1)
        assert cfg.weights.p1 == 4.0

    def test_default_grids(self):
        assert np.array_equal(parse("family = normal\nsigma1=1\nsigma2=1\nrho=0").lambda_grid(),
                              np.arange(0, 5.001, 0.25))
        assert parse("family = power_scale\na1=1\na2=2").lambda_grid()[[0, -1]].tolist() == [1.0, 6.0]

    def test_grid_endpoint_included(self):
        cfg = parse("family = gamma_scale\na1=1\na2=1\nlambda_start=1\nlambda_stop=2\nlambda_step=0.1")
        assert len(cfg.lambda_grid()) == 11

    @pytest.mark.parametrize("text,match", [
        ("family = gama\na1=1\na2=1", "gama"),
        ("family = gamma_scale\na1=1\na2=1\nsigma1=1", "does not apply"),
        ("family = gamma_scale\na1=1", "needs a2"),
        ("family = gamma_scale\na1=1\na2=1\nbogus=3", "unknown key"),
        ("family = gamma_scale\na1=1\na1=2\na2=1", "duplicate"),
        ("family = gamma_scale\na1=one\na2=1", "expected a number"),
        ("family = gamma_scale\na1=1\na2=1\np1=0", "p1"),
        ("family = gamma_scale\na1=1\na2=1\nestimators = mix:abc", "mix"),
        ("family = gamma_scale\na1=1\na2=1\nn=1", "n"),
        ("family = gamma_scale\na1=1\na2=1\ninclude_relative_scale=maybe", "true or false"),
        ("just words", "key = value"),
    ])
    def test_errors(self, text, match):
        with pytest.raises(ConfigError, match=match):
            parse(text)

    def test_bad_grid(self):
        with pytest.raises(ConfigError):
            parse("family = normal\nsigma1=1\nsigma2=1\nrho=0\nlambda_step=0").lambda_grid()

    def test_bad_hyper_value(self):
        with pytest.raises(PreconditionError):
            parse("family = normal\nsigma1=-1\nsigma2=1\nrho=0").model()


class TestPresets:
    def test_all_present(self):
        names = preset_names()
        assert len(names) == 18
        assert {f"fig{i}{c}" for i in "123" for c in "abcdef"} == set(names)

    @pytest.mark.parametrize("name", [f"fig{i}{c}" for i in "123" for c in "abcdef"])
    def test_loads(self, name):
        cfg = load(name)
        model = cfg.model()
        for spec in cfg.estimator_specs():
            spec.check_applicable(model)
        assert cfg.n == 50_000 and cfg.name == name

    def test_normal_preset_alpha(self):
        cfg = load("fig1a")
        assert cfg.weights.alpha0 == pytest.approx(0.25 / 0.29, rel=1e-12)
        assert "mix:0.8620689655172413" in cfg.estimators

    def test_missing(self):
        with pytest.raises(ConfigError):
            load("nope")


class TestExitCodes:
    def test_alpha_curve_normal(self, tmp_path):
        cfg = _write_cfg(tmp_path, "n", "family=normal\nsigma1=1\nsigma2=1\nrho=0\n"
                                      "lambda_start=0\nlambda_stop=5\nlambda_step=0.5\n")
        assert cli.main(["alpha-curve", "--config", cfg, "--out", str(tmp_path)]) == 0
        rows = list(csv.DictReader(io.StringIO((tmp_path / "n_alpha.csv").read_text())))
        assert len(rows) == 11
        assert float(rows[0]["alpha"]) == 0.5
        alphas = [float(r["alpha"]) for r in rows]
        assert all(b <= a for a, b in zip(alphas, alphas[1:]))

    def test_alpha_curve_gamma(self, tmp_path):
        cfg = _write_cfg(tmp_path, "g", "family=gamma_scale\na1=2\na2=3\n"
                                      "lambda_start=1\nlambda_stop=5\nlambda_step=1\n")
        assert cli.main(["alpha-curve", "--config", cfg, "--out", str(tmp_path)]) == 0
        alphas = [float(r["alpha"]) for r in csv.DictReader(open(tmp_path / "g_alpha.csv"))]
        assert len(alphas) == 5 and all(b <= a for a, b in zip(alphas, alphas[1:]))

    def test_unknown_family(self, tmp_path, capsys):
        cfg = _write_cfg(tmp_path, "bad", "family=gama\na1=1\na2=1\n")
        assert cli.main(["alpha-curve", "--config", cfg, "--out", str(tmp_path)]) == 2
        assert "gama" in capsys.readouterr().err

    def test_rmle_on_power(self, tmp_path):
        cfg = _write_cfg(tmp_path, "p", "family=power_scale\na1=1\na2=2\nestimators=bsee, rmle\n")
        assert cli.main(["risk-sweep", "--config", cfg, "--out", str(tmp_path), "--n", "100"]) == 2
        assert not (tmp_path / "p_risk.csv").exists()

    def test_missing_config(self, tmp_path):
        assert cli.main(["alpha-curve", "--out", str(tmp_path)]) == 2

    def test_bad_overrides(self, tmp_path):
        assert cli.main(["risk-sweep", "--config", "fig1a", "--out", str(tmp_path), "--n", "1"]) == 2
        assert cli.main(["risk-sweep", "--config", "fig1a", "--out", str(tmp_path), "--seed", "-1"]) == 2
        assert cli.main(["risk-sweep", "--config", "fig1a", "--out", str(tmp_path), "--threads", "0"]) == 2

    def test_check_default_passes(self, tmp_path, capsys):
        assert cli.main(["check", "--out", str(tmp_path)]) == 0
        report = (tmp_path / "check_check.txt").read_text()
        assert report.count("PASS") >= 10 and "FAIL" not in report

    def test_check_identity_violation(self, tmp_path):
        cfg = _write_cfg(tmp_path, "ident", "identity_alpha = 0.5\ntrials = 2000\n")
        assert cli.main(["check", "--config", cfg, "--out", str(tmp_path)]) == 4
        assert "FAIL identity" in (tmp_path / "ident_check.txt").read_text()

    def test_check_relative_scale_fails(self, tmp_path):
        cfg = _write_cfg(tmp_path, "rel", "include_relative_scale = true\ntrials = 20000\n")
        assert cli.main(["check", "--config", cfg, "--out", str(tmp_path)]) == 4
        assert "FAIL scale_relative" in (tmp_path / "rel_check.txt").read_text()

    def test_admissible_interval(self, tmp_path):
        cfg = _write_cfg(tmp_path, "iv", "family=gamma_scale\na1=1\na2=1\np1=2\np2=1\n")
        assert cli.main(["admissible-interval", "--config", cfg, "--out", str(tmp_path)]) == 0
        row = list(csv.DictReader(open(tmp_path / "iv_interval.csv")))[0]
        assert row["lower"] == "-inf" and float(row["upper"]) == pytest.approx(2 / 3)
        assert row["diverges"] == "true"


class TestRiskSweepOutputs:
    def test_csv_and_svg(self, tmp_path):
        assert cli.main(["risk-sweep", "--config", "fig2a", "--out", str(tmp_path), "--n", "2000"]) == 0
        rows = list(csv.DictReader(open(tmp_path / "fig2a_risk.csv")))
        cfg = load("fig2a")
        assert len(rows) == len(cfg.lambda_grid()) * len(cfg.estimators)
        assert {r["n"] for r in rows} == {"2000"}
        root = ET.parse(tmp_path / "fig2a_risk.svg").getroot()
        assert root.tag == SVG_NS + "svg"
        texts = [t.text for t in root.iter(SVG_NS + "text")]
        for tok in cfg.estimators:
            assert tok in texts

    def test_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert cli.main(["risk-sweep", "--config", "fig1a", "--out", str(out), "--n", "5000"]) == 0
        assert (a / "fig1a_risk.csv").read_bytes() == (b / "fig1a_risk.csv").read_bytes()

    def test_threads_do_not_change_output(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        cli.main(["risk-sweep", "--config", "fig3b", "--out", str(a), "--n", "3000"])
        cli.main(["risk-sweep", "--config", "fig3b", "--out", str(b), "--n", "3000", "--threads", "4"])
        assert (a / "fig3b_risk.csv").read_bytes() == (b / "fig3b_risk.csv").read_bytes()

    def test_seed_override(self, tmp_path):
        cli.main(["risk-sweep", "--config", "fig2b", "--out", str(tmp_path), "--n", "500", "--seed", "9"])
        assert {r["seed"] for r in csv.DictReader(open(tmp_path / "fig2b_risk.csv"))} == {"9"}


class TestSvg:
    def test_ticks(self):
        t = nice_ticks(0, 5)
        assert t[0] <= 0 and t[-1] >= 5 and len(t) >= 3

    def test_chart_well_formed(self):
        svg = line_chart({"a": ([0, 1], [1, 2]), "b&c": ([0, 1], [2, 1])}, "t", "x", "y")
        root = ET.fromstring(svg)
        assert root.get("viewBox") == "0 0 800 600"
        assert "b&c" in [t.text for t in root.iter(SVG_NS + "text")]


def test_default_config_is_check_only():
    assert ExperimentConfig().family is None
