import csv
import json
import locale
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from foxfade import cli, perf
from foxfade.errors import NumericalFailure

REF_FLAGS = ["--alpha", "2", "--eta", "1", "--kappa", "1", "--mu", "2", "--p", "3", "--q", "1",
              "--rhat", "1"]


def read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_pdf_spec_example(tmp_path):
    out = tmp_path / "pdf.csv"
    rc = cli.run(["pdf", *REF_FLAGS, "--grid", "0.01:3:300", "--out", str(out)])
    rows = read(out)
    assert rc == 0
    assert rows[0] == ["r", "pdf_exact", "pdf_series_n20", "pdf_asymptotic", "pdf_oracle"]
    assert len(rows) == 301
    vals = np.array(rows[1:], dtype=float)
    assert np.max(np.abs(vals[:, 1] / vals[:, 4] - 1)) <= 1e-4


def test_unknown_flag_is_usage_error(capsys):
    assert cli.run(["pdf", "--bogus"]) == 2
    assert "usage:" in capsys.readouterr().err


def test_missing_command_is_usage_error(capsys):
    assert cli.run([]) == 2


def test_invalid_channel_is_usage_error(capsys):
    assert cli.run(["pdf", "--mu", "-1", "--grid", "0.5:1:2"]) == 2
    err = capsys.readouterr().err
    assert "usage:" in err and "mu" in err


def test_bad_grid(capsys):
    assert cli.run(["cdf", "--grid", "0:1:1"]) == 2
    assert cli.run(["cdf", "--grid", "0:1"]) == 2


def test_numerical_failure_exit_code(capsys):
    rc = cli.run(["pdf", "--grid", "0.5:1:2", "--tol-rel", "1e-17", "--no-oracle"])
    err = capsys.readouterr().err
    assert rc == 1
    assert "numerical failure" in err and "foxfade.FoxHSpec" in err


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# channel\nrhat = 2\nmu = 1\ngrid = 0.5:1.5:3\nno-oracle = yes\n"
                   "series-terms = 5\n")
    out = tmp_path / "a.csv"
    assert cli.run(["pdf", "--config", str(cfg), "--mu", "2", "--out", str(out)]) == 0
    rows = read(out)
    assert rows[0][2] == "pdf_series_n5" and len(rows) == 4
    assert all(r[4] == "nan" for r in rows[1:])
    ref = tmp_path / "b.csv"
    cli.run(["pdf", "--rhat", "2", "--mu", "2", "--grid", "0.5:1.5:3", "--no-oracle",
             "--series-terms", "5", "--out", str(ref)])
    assert out.read_bytes() == ref.read_bytes()


@pytest.mark.parametrize("text", ["bogus = 1\n", "mu 2\n", "modulation = qam\n", "mu = abc\n"])
def test_bad_config(tmp_path, text, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    assert cli.run(["ber", "--config", str(cfg)]) == 2


def test_missing_config(tmp_path):
    assert cli.run(["ber", "--config", str(tmp_path / "none.cfg")]) == 2


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.ENV_OUT, str(tmp_path / "outdir"))
    assert cli.run(["sample", "--n", "10", "--seed", "4"]) == 0
    rows = read(tmp_path / "outdir" / "sample.csv")
    assert rows[0] == ["r"] and len(rows) == 11


def test_sample_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cli.run(["sample", "--n", "5000", "--seed", "9", "--out", str(a)])
    cli.run(["sample", "--n", "5000", "--seed", "9", "--workers", "2", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_locale_independent_output(tmp_path):
    out = tmp_path / "c.csv"
    env_locale = None
    for name in ("de_DE.UTF-8", "fr_FR.UTF-8", "C.UTF-8"):
        try:
            locale.setlocale(locale.LC_ALL, name)
            env_locale = name
            break
        except locale.Error:
            continue
    try:
        cli.run(["outage", "--grid", "30:40:2", "--out", str(out)])
    finally:
        locale.setlocale(locale.LC_ALL, "C")
    text = out.read_text()
    assert env_locale is not None
    for row in read(out)[1:]:
        for cell in row:
            float(cell)
    assert ";" not in text


def test_outage_columns(tmp_path):
    out = tmp_path / "o.csv"
    assert cli.run(["outage", "--grid", "30:40:2", "--threshold-db", "0", "--mc-samples", "1000",
                    "--out", str(out)]) == 0
    rows = read(out)
    assert rows[0] == ["avg_snr_db", "outage_exact", "outage_asymptotic",
                       "outage_printed_asymptotic", "outage_mc"]
    exact, asym = float(rows[2][1]), float(rows[2][2])
    assert abs(exact / asym - 1) <= 0.05


def test_ber_command(tmp_path):
    out = tmp_path / "b.csv"
    assert cli.run(["ber", "--modulation", "dpsk", "--grid", "20:30:2", "--out", str(out)]) == 0
    rows = read(out)
    assert rows[0] == ["avg_snr_db", "ber_exact", "ber_oracle"]
    assert float(rows[1][1]) == pytest.approx(float(rows[1][2]), rel=0.01)


def test_sweep_reports_row_errors(tmp_path, monkeypatch):
    real = perf.outage

    def flaky(params, link, **kw):
        if link.avg_snr > 1e-2:      # rows sit at about -35 and -15 dB
            raise NumericalFailure("injected", {})
        return real(params, link, **kw)

    monkeypatch.setattr(perf, "outage", flaky)
    out = tmp_path / "s.csv"
    rc = cli.run(["sweep", *REF_FLAGS, "--pt-grid", "-40:-20:2", "--noise-floor", "-40",
                  "--gain-tx", "40", "--gain-rx", "40", "--no-oracle", "--out", str(out)])
    rows = read(out)
    assert rc == 0
    assert rows[0] == ["Pt_dbm", "avg_snr_db", "outage_exact", "outage_asymptotic", "ber_exact",
                       "ber_oracle", "error"]
    assert len(rows) == 3
    first, second = rows[1], rows[2]
    assert float(first[1]) < 30 and first[6] == ""
    assert second[6].startswith("NumericalFailure") and second[2] == ""


def test_help_documents_columns(capsys):
    with pytest.raises(SystemExit):
        cli.build_parser()[0].parse_args(["sweep", "--help"])
    assert "Pt_dbm" in capsys.readouterr().out


def test_verify_subset_writes_summary(tmp_path, capsys):
    summary = tmp_path / "v.json"
    assert cli.run(["verify", "--only", "5", "--json", str(summary)]) == 0
    data = json.loads(summary.read_text())
    assert data["passed"] and data["criteria"][0]["number"] == 5
    assert "PASS" in capsys.readouterr().out


def test_verify_unknown_criterion():
    assert cli.run(["verify", "--only", "42"]) == 2


def test_verify_failure_dumps_spec(tmp_path, monkeypatch, capsys):
    from foxfade import akmu, verify

    def boom(*a, **k):
        raise NumericalFailure("injected", {"spec": akmu.pdf_spec(akmu.REFERENCE).to_dict()})

    monkeypatch.setitem(verify.CRITERIA, 5, ("leading coefficient", 10, boom))
    assert cli.run(["verify", "--only", "5", "--out", str(tmp_path)]) == 1
    dumped = list(tmp_path.glob("verify_c5_*.foxh.json"))
    assert len(dumped) == 1 and "foxfade.FoxHSpec" in dumped[0].read_text()


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "foxfade", "--version"], capture_output=True,
                         text=True)
    assert res.returncode == 0 and res.stdout.startswith("foxfade ")


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.integers(2, 500))
def test_parse_grid(a, b, n):
    g = cli.parse_grid(f"{a!r}:{b!r}:{n}")
    assert len(g) == n and g[0] == a and g[-1] == pytest.approx(b)


@given(st.floats(allow_nan=False))
def test_csv_float_format_round_trips(x):
    assert float(cli._fmt(x)) == x
