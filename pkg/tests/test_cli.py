import numpy as np
import pytest

from wslight import cli
from wslight.config import PRESETS, RunConfig, load_preset, parse_config
from wslight.errors import ConfigError
from wslight.output import read_table, write_table


def run(tmp_path, *args):
    return cli.main([*args, "--out", str(tmp_path)])


def test_parse_config_and_lists():
    cfg = parse_config("""
[model]
kind = cw
[window]
d_J = 60
[sweep]
beta_circ = 0.02:0.3:15
theta = 0, 1.5707963267948966
""")
    assert cfg.kind == "cw" and cfg.d_J == 60
    assert len(cfg.beta_sweep) == 15
    assert cfg.beta_sweep[0] == pytest.approx(0.02) and cfg.beta_sweep[-1] == pytest.approx(0.3)


@pytest.mark.parametrize("text", [
    "[model]\nshape = gauss\n",
    "[detector]\nalpha = 1.5\n",
    "[model]\nkind = cw\n",
    "[window]\nd_J = 2.5\n",
    "not an ini file",
])
def test_config_rejects(text):
    with pytest.raises(ConfigError):
        parse_config(text)


@pytest.mark.parametrize("name", PRESETS)
def test_presets_load(name):
    assert isinstance(load_preset(name), RunConfig)


def test_digest_tracks_config():
    a = RunConfig()
    assert a.digest() == RunConfig().digest()
    assert a.digest() != parse_config("[squeezing]\nbeta_circ = 0.2\n").digest()


def test_table_roundtrip(tmp_path):
    path = write_table(tmp_path / "t", {"x": [0.1, 1 / 3], "name": ["a", "b"]}, "abc")
    digest, cols = read_table(path)
    assert digest == "abc"
    assert cols["x"][1] == 1 / 3
    assert list(cols["name"]) == ["a", "b"]
    with pytest.raises(ValueError):
        write_table(tmp_path / "bad", {"x": [1], "y": [1, 2]}, "abc")


def test_decompose_fig1(tmp_path):
    assert run(tmp_path, "decompose", "--preset", "fig1") == 0
    digest, r = read_table(tmp_path / "r_matrix.csv")
    assert digest == load_preset("fig1").digest()
    n, m, rr = r["n"], r["m"], r["r_re"]
    far = np.abs(rr[np.abs(n - m) > 1])
    near = np.abs(rr[np.abs(n - m) == 1])
    # r is small more than one space off the diagonal
    assert far.max() < 0.05 < near.max()
    _, win = read_table(tmp_path / "window.csv")
    assert win["n_J"][0] == 7


def test_decompose_cw_toeplitz(tmp_path):
    cfg = tmp_path / "cw.ini"
    cfg.write_text("[model]\nkind = cw\n[window]\nd_J = 12\n")
    assert run(tmp_path, "decompose", "--config", str(cfg)) == 0
    _, r = read_table(tmp_path / "r_matrix.csv")
    mat = r["r_re"].reshape(12, 12)
    np.testing.assert_allclose(mat[1:, 1:], mat[:-1, :-1], atol=1e-15)


def test_homodyne_zero_squeezing_and_determinism(tmp_path):
    cfg = tmp_path / "h.ini"
    cfg.write_text("[model]\nkind = cw\n[window]\nd_J = 40\n[sweep]\nbeta_circ = 0, 0.1\n")
    assert run(tmp_path / "a", "homodyne", "--config", str(cfg)) == 0
    assert run(tmp_path / "b", "homodyne", "--config", str(cfg)) == 0
    _, cols = read_table(tmp_path / "a" / "strength.csv")
    assert cols["db_min_cw"][0] == 0 and cols["db_max_cw"][0] == 0
    assert cols["db_min_cw"][1] < 0
    assert (tmp_path / "a" / "strength.csv").read_bytes() == (tmp_path / "b" / "strength.csv").read_bytes()


def test_coincidence_fig5(tmp_path):
    assert run(tmp_path, "coincidence", "--preset", "fig5", "--threads", "2") == 0
    _, s = read_table(tmp_path / "visibility_vs_beta.csv")
    assert np.all(s["sum_P"] >= 1 - 1e-10)
    np.testing.assert_allclose(s["P_HH_alpha1"], s["one_minus_detW_sq"], atol=1e-12)
    assert np.all(np.diff(s["mean_pairs"]) > 0)


def test_hom_symmetric_columns(tmp_path):
    cfg = tmp_path / "hom.ini"
    cfg.write_text("[model]\nT_p = 4\n[squeezing]\nbeta_circ = 0.2\n[sweep]\nq_min = -6\nq_max = 6\n")
    assert run(tmp_path, "hom", "--config", str(cfg)) == 0
    _, d = read_table(tmp_path / "dip.csv")
    p = d["P_norm_beta=0.2"]
    np.testing.assert_allclose(p, p[::-1], atol=1e-8)


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[model]\nunknown = 1\n")
    assert run(tmp_path, "decompose", "--config", str(bad)) == 1
    assert run(tmp_path, "decompose", "--config", str(tmp_path / "missing.ini")) == 2
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.main(["decompose", "--preset", "fig1", "--out", str(blocker / "sub")]) == 2
    with pytest.raises(SystemExit):
        cli.main(["nosuchcommand"])


def test_oracle_check_commands(tmp_path):
    small = tmp_path / "o.ini"
    small.write_text("[oracle]\ncount = 3\nbeta_circ_max = 0.15\n")
    assert run(tmp_path / "ok", "oracle-check", "--config", str(small), "--seed", "5") == 0
    _, rep = read_table(tmp_path / "ok" / "oracle_report.csv")
    assert np.all(rep["passed"] == 1)
    corrupt = tmp_path / "c.ini"
    corrupt.write_text("[oracle]\ncount = 3\ncorrupt = true\n")
    assert run(tmp_path / "bad", "oracle-check", "--config", str(corrupt)) == 1
    zero = tmp_path / "z.ini"
    zero.write_text("[oracle]\ncount = 3\nbeta_circ_max = 0\n")
    assert run(tmp_path / "zero", "oracle-check", "--config", str(zero)) == 0
    _, rep = read_table(tmp_path / "zero" / "oracle_report.csv")
    assert np.all(rep["max_abs_error"] == 0)
