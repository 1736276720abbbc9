import json
import math

import pytest

from cornerlab import cli, report


def test_exponents(tmp_path, capsys):
    assert cli.main(["exponents", "--omega", str(1.5 * math.pi), "--count", "3", "--out", str(tmp_path)]) == 0
    names, rows = report.read_csv(tmp_path / "exponents.csv")
    assert names == ["j", "mu", "lambda_plus", "lambda_minus"]
    assert [r[2] for r in rows] == pytest.approx([2 / 3, 4 / 3, 2])


def test_missing_config(tmp_path, capsys):
    assert cli.main(["sweep", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 2
    assert "config file not found" in capsys.readouterr().err


def test_bad_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["sweep", "--config", str(bad), "--out", str(tmp_path)]) == 2


def test_library_error_exit_one(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"eps": [0.5, 0.1, 0.05, 0.025]}))
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    assert "EpsilonOutOfRange" in err and "experiments" in err


def test_verify(tmp_path, capsys):
    assert cli.main(["verify", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "verify.csv").exists()
    assert "FAIL" not in capsys.readouterr().out


def test_svg(tmp_path):
    from cornerlab.experiments import fit_rate
    eps = [0.1, 0.05, 0.025, 0.0125]
    fit = fit_rate(eps, [e ** 0.5 for e in eps], 0.5)
    path = report.svg_loglog(tmp_path / "a.svg", eps, [e ** 0.5 for e in eps], "t", fit, 0.5)
    text = open(path).read()
    assert text.startswith("<svg") and "fit slope 0.5000" in text
