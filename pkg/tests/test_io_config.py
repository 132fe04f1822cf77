import numpy as np
import pytest

from cdgrmhd.io_config import (ConfigError, DivergenceSeries, RunConfig,
                               emit_config, parse_config, read_snapshot_1d,
                               read_snapshot_2d, write_snapshot_1d,
                               write_snapshot_2d)


def test_defaults_and_overrides(tmp_path):
    cfg = parse_config(None, ["problem=rp1"])
    assert cfg.problem == "rp1" and cfg.k == 2 and cfg.cfl == 0.25
    assert cfg.cad == "cui-ding-wu"
    cfg = parse_config(None, ["problem=blast", "ba=2000", "bp_limiter=off"])
    assert cfg.blast_ba == 2000.0 and cfg.bp_limiter is False


def test_file_parsing(tmp_path):
    p = tmp_path / "run.ini"
    p.write_text("# comment\nproblem = orszag_tang\nnx = 50  # inline\nny=50\n")
    cfg = parse_config(str(p))
    assert cfg.problem == "orszag_tang" and (cfg.nx, cfg.ny) == (50, 50)


def test_validation_errors(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(None, ["k=9"])
    with pytest.raises(ConfigError):
        parse_config(None, ["problem=nope"])
    with pytest.raises(ConfigError):
        parse_config(None, ["mystery=1"])
    with pytest.raises(ConfigError):
        parse_config(None, ["cfl=-0.5"])
    with pytest.raises(ConfigError):
        parse_config(None, ["nx=3"])
    p = tmp_path / "bad.ini"
    p.write_text("problem orszag_tang\n")
    with pytest.raises(ConfigError) as err:
        parse_config(str(p))
    assert "1" in str(err.value)  # line info


def test_emit_round_trip(tmp_path):
    cfg = parse_config(None, ["problem=rotor", "nx=64", "ny=48", "tvb_m=30",
                              "strict_bp_cfl=true"])
    p = tmp_path / "canon.ini"
    p.write_text(emit_config(cfg))
    again = parse_config(str(p))
    assert again == cfg


def test_snapshot_1d_round_trip(tmp_path):
    x = np.linspace(0, 1, 11)
    prim = np.random.default_rng(0).standard_normal((11, 8))
    lor = np.ones(11) + 0.5
    path = tmp_path / "snap.csv"
    write_snapshot_1d(str(path), x, prim, lor)
    x2, data = read_snapshot_1d(str(path))
    assert np.array_equal(x2, x)
    assert np.array_equal(data[:, :8], prim)
    assert np.array_equal(data[:, 8], lor)
    header = path.read_text().splitlines()[0]
    assert header == "x,rho,v1,v2,v3,B1,B2,B3,p,W"


def test_snapshot_2d_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    grids = {"rho": rng.standard_normal((6, 4)), "p": rng.standard_normal((6, 4))}
    meta = {"problem": "rotor", "t": 0.25, "nx": 6, "ny": 4,
            "xmin": -0.5, "xmax": 0.5, "ymin": -0.5, "ymax": 0.5}
    prefix = str(tmp_path / "rotor_final")
    write_snapshot_2d(prefix, meta, grids)
    meta2, grids2 = read_snapshot_2d(prefix)
    assert meta2["problem"] == "rotor"
    assert np.array_equal(grids2["rho"], grids["rho"])
    assert np.array_equal(grids2["p"], grids["p"])
    assert meta2["dtype"] == "<f8"


def test_divergence_series(tmp_path):
    ds = DivergenceSeries(str(tmp_path))
    ds.append(0.1, 1e-5)
    ds.append(0.2, 2e-5)
    rows = (tmp_path / "eps_div.csv").read_text().splitlines()
    assert rows[0] == "t,eps_div" and len(rows) == 3


def test_deterministic_emission(tmp_path):
    x = np.linspace(0, 1, 7)
    prim = np.full((7, 8), 0.123456789)
    write_snapshot_1d(str(tmp_path / "a.csv"), x, prim, np.ones(7))
    write_snapshot_1d(str(tmp_path / "b.csv"), x, prim, np.ones(7))
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
