import os

import numpy as np
import pytest

from dressed.cli import (
    RunConfig,
    _fmt,
    _thread_count,
    main,
    output_grid,
    parse_config,
    write_atomic,
)
from dressed.errors import ConfigError
from dressed.model import ModelParams

REF_LINES = "model.omega0 = 0.5\nmodel.coupling_scale = 0.01\n"


def write_conf(tmp_path, body, name="run.conf"):
    path = tmp_path / name
    path.write_text(body)
    return str(path)


def read_csv(path):
    meta, header, rows = {}, None, []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# "):
                key, _, val = line[2:].partition("=")
                meta[key] = val
            elif header is None:
                header = line.split(",")
            else:
                rows.append(line.split(","))
    return meta, header, rows


# -- config parsing ---------------------------------------------------------

def test_parse_config_roundtrip(tmp_path):
    cfg = parse_config(write_conf(
        tmp_path, "# comment\n\n" + REF_LINES + "grid.points = 7\n"))
    assert cfg.params == ModelParams(omega0=0.5, coupling_scale=0.01)
    assert cfg.get_int("grid.points", 0) == 7


@pytest.mark.parametrize("body,fragment", [
    (REF_LINES + "grid.pionts = 7\n", "unknown key"),
    (REF_LINES + "model.omega0 = 0.6\n", "duplicate key"),
    ("model.omega0 = 0.5\n", "missing required key"),
    (REF_LINES + "just some words\n", "expected key=value"),
    ("model.omega0 = fast\nmodel.coupling_scale = 0.01\n", "malformed"),
    (REF_LINES + "grid.spacing = cubic\n", "log or linear"),
])
def test_parse_config_rejections(tmp_path, body, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(write_conf(tmp_path, body))


def test_parse_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        parse_config(str(tmp_path / "absent.conf"))


def test_output_grid_spacings():
    cfg = RunConfig(params=ModelParams(omega0=0.5, coupling_scale=0.0),
                    raw={"grid.min": "0.1", "grid.max": "10", "grid.points": "5"})
    np.testing.assert_allclose(output_grid(cfg, 1, 2, 3),
                               np.geomspace(0.1, 10, 5))
    cfg.raw["grid.spacing"] = "linear"
    np.testing.assert_allclose(output_grid(cfg, 1, 2, 3),
                               np.linspace(0.1, 10, 5))


@pytest.mark.parametrize("raw", [
    {"grid.min": "5", "grid.max": "1"},
    {"grid.min": "-1"},
    {"grid.points": "1"},
    {"grid.max": "soon"},
])
def test_output_grid_rejections(raw):
    cfg = RunConfig(params=ModelParams(omega0=0.5, coupling_scale=0.0), raw=raw)
    with pytest.raises(ConfigError):
        output_grid(cfg, 0.05, 5.0, 40)


def test_value_formatting():
    assert _fmt(True) == "true" and _fmt(np.False_) == "false"
    assert _fmt(np.int64(7)) == "7"
    assert _fmt(1.0 / 3.0) == "0.33333333333333331"
    assert _fmt(1.5 - 2.5j) == "1.5-2.5j"


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("DRESSED_THREADS", "6")
    assert _thread_count() == 6
    monkeypatch.setenv("DRESSED_THREADS", "zero")
    with pytest.raises(ConfigError):
        _thread_count()
    monkeypatch.setenv("DRESSED_THREADS", "0")
    with pytest.raises(ConfigError):
        _thread_count()
    monkeypatch.delenv("DRESSED_THREADS")
    assert _thread_count() >= 1


def test_write_atomic_permissions_and_cleanup(tmp_path):
    target = tmp_path / "out.csv"
    write_atomic(str(target), b"payload\n")
    assert target.read_bytes() == b"payload\n"
    assert oct(target.stat().st_mode & 0o777) == "0o644"
    assert not [p for p in os.listdir(tmp_path) if p.startswith(".tmp-")]


# -- end-to-end command runs ------------------------------------------------

def test_moments_uncoupled_and_deterministic(tmp_path):
    conf = write_conf(tmp_path, "model.omega0 = 0.5\nmodel.coupling_scale = 0\n")
    out_a, out_b = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(["moments", "--config", conf, "--out", out_a]) == 0
    assert main(["moments", "--config", conf, "--out", out_b]) == 0
    meta, header, rows = read_csv(os.path.join(out_a, "moments.csv"))
    assert meta["command"] == "moments"
    assert meta["resolved.omega0"] == "0.5"
    row = dict(zip(header, rows[0]))
    assert row["atom_energy"] == "0.5"
    assert row["omega_T"] == "0"
    assert float(row["uncertainty_product"]) == 1.0
    with open(os.path.join(out_a, "moments.csv"), "rb") as fa, \
            open(os.path.join(out_b, "moments.csv"), "rb") as fb:
        assert fa.read() == fb.read()


def test_moments_threshold_exit_and_atomicity(tmp_path):
    conf = write_conf(tmp_path, "model.omega0 = 0.5\nmodel.coupling_scale = 0.3\n")
    out = str(tmp_path / "out")
    assert main(["moments", "--config", conf, "--out", out]) == 2
    assert not os.path.exists(os.path.join(out, "moments.csv"))
    assert not [p for p in os.listdir(out) if p.startswith(".tmp-")]


def test_spectrum_single_member(tmp_path):
    conf = write_conf(tmp_path, REF_LINES
                      + "grid.min = 0.01\ngrid.max = 20\ngrid.points = 150\n")
    out = str(tmp_path / "out")
    assert main(["spectrum", "--config", conf, "--out", out]) == 0
    meta, header, rows = read_csv(os.path.join(out, "spectrum_01.csv"))
    assert header == ["omega", "omega_in_figure_units", "pi", "N", "S"]
    data = np.array(rows, dtype=float)
    assert float(meta["member.pi_norm"]) == pytest.approx(1.0, abs=1e-6)
    assert np.all(data[:, 2] >= 0.0) and np.all(data[:, 3] >= 0.0)
    np.testing.assert_allclose(data[:, 4], data[:, 0] * data[:, 3], rtol=1e-12)
    with open(os.path.join(out, "spectrum.png"), "rb") as fh:
        assert fh.read(8) == b"\x89PNG\r\n\x1a\n"


def test_correlations_outputs(tmp_path):
    conf = write_conf(tmp_path, REF_LINES + "grid.points = 10\n")
    out = str(tmp_path / "out")
    assert main(["correlations", "--config", conf, "--out", out]) == 0
    meta, header, rows = read_csv(os.path.join(out, "correlations.csv"))
    assert len(rows) == 10
    assert float(meta["z_E"]) < 0.0 < float(meta["dz_dE"])
    data = np.array(rows, dtype=float)
    assert np.all(data[:, 1] < 0.0) and np.all(data[:, 2] > 0.0)
    assert np.all(data[:, 3] == 0.0) and np.all(data[:, 4] == 0.0)
    _, coh_header, coh_rows = read_csv(os.path.join(out, "coherence.csv"))
    assert coh_header == ["omega", "omega_prime", "bb"]
    n = int(np.sqrt(len(coh_rows)))
    assert n * n == len(coh_rows)
    assert os.path.exists(os.path.join(out, "correlations.png"))


def test_chi_check_failure_exit_code(tmp_path):
    # unreachable tolerance: command must still write the report, then
    # signal the numerical mismatch through the exit code
    conf = write_conf(tmp_path, REF_LINES + "cmd.tolerance = 1e-16\n")
    out = str(tmp_path / "out")
    assert main(["chi-check", "--config", conf, "--out", out]) == 3
    _, header, rows = read_csv(os.path.join(out, "chi_check.csv"))
    assert header[0] == "moment" and header[-1] == "status"
    assert any(row[-1] == "FAIL" for row in rows)


def test_oracle_compare_small(tmp_path):
    conf = write_conf(tmp_path, REF_LINES + "cmd.m_list = 60, 120\n")
    out = str(tmp_path / "out")
    assert main(["oracle-compare", "--config", conf, "--out", out]) == 0
    meta, header, rows = read_csv(os.path.join(out, "oracle_compare.csv"))
    assert header[0] == "m" and len(header) == 8
    assert [r[0] for r in rows] == ["60", "120"]
    assert meta["monotone"] in ("true", "false")
    assert os.path.exists(os.path.join(out, "oracle_compare.png"))


def test_pair_command_and_instability(tmp_path):
    conf = write_conf(tmp_path,
                      "model.omega0 = 1.0\nmodel.coupling_scale = 0\n"
                      "cmd.g_list = 0.0, 0.6\n")
    out = str(tmp_path / "out")
    assert main(["pair", "--config", conf, "--out", out]) == 0
    _, header, rows = read_csv(os.path.join(out, "pair.csv"))
    row = dict(zip(header, rows[1]))
    assert float(row["ground_energy"]) == pytest.approx(0.9486832980505138)
    assert float(row["xx"]) == pytest.approx(0.1976423537605237)
    bad = write_conf(tmp_path, "model.omega0 = 1.0\nmodel.coupling_scale = 0\n"
                     "cmd.g_list = 1.0\n", name="bad.conf")
    assert main(["pair", "--config", bad, "--out", out]) == 2


def test_exit_codes_for_bad_invocations(tmp_path):
    conf = write_conf(tmp_path, REF_LINES + "grid.pionts = 7\n")
    assert main(["moments", "--config", conf, "--out", str(tmp_path)]) == 1
    missing = str(tmp_path / "none.conf")
    assert main(["moments", "--config", missing, "--out", str(tmp_path)]) == 1
    assert main(["moments"]) == 1          # argparse: --config is required
    assert main(["--help"]) == 0
