"""Config validation and end-to-end runs of the command-line tools.

CLI tests call ``cli.main`` in process with artifact paths under tmp_path
and then parse what was written back in.
"""
import csv
import json
import math
import os

import numpy as np
import pytest

from doslab import cli, percolation
from doslab.config import (SCHEMAS, config_digest, fn_from, space_from,
                           validate)
from doslab.errors import ConfigError


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


FREE_CHAIN = {"hopping": {"kind": "adjacency"}}


# ---------------------------------------------------------------------------
# config validation


def test_unknown_key_reports_dotted_path():
    with pytest.raises(ConfigError, match="unknown key") as err:
        validate({"space": {"kind": "lattice", "dd": 3}},
                 SCHEMAS["space-ladder"])
    assert err.value.path == "space.dd"


def test_missing_required_key():
    with pytest.raises(ConfigError, match="missing required key") as err:
        validate({"p": 0.5}, SCHEMAS["percolate"])
    assert err.value.path == "L"


def test_type_and_bound_errors():
    with pytest.raises(ConfigError, match="expected an integer"):
        validate({"mmax": True}, SCHEMAS["counterexample"])
    with pytest.raises(ConfigError, match="must be <= 1") as err:
        validate({"L": 10, "p": 1.5}, SCHEMAS["percolate"])
    assert err.value.path == "p"
    with pytest.raises(ConfigError, match="must be one of lattice, f2"):
        validate({"space": {"kind": "tree"}, "kmax": 3},
                 SCHEMAS["space-ladder"])


def test_array_items_are_validated_with_index():
    cfg = {"space": {"kind": "lattice"}, "hamiltonian": FREE_CHAIN,
           "g": {"kind": "one"}, "radii": [10.0, "x"]}
    with pytest.raises(ConfigError, match="expected a number") as err:
        validate(cfg, SCHEMAS["dos"])
    assert err.value.path == "radii[1]"


def test_defaults_are_filled_in():
    cfg = validate({"L": 8, "p": 0.5}, SCHEMAS["percolate"])
    assert cfg["d"] == 2
    assert cfg["seed"] == 0
    assert cfg["threshold"] == 0.05
    assert cfg["tmax"] is None and cfg["out"] is None


def test_inf_norm_is_parsed():
    cfg = validate({"space": {"kind": "lattice", "d": 2, "p": "inf"},
                    "kmax": 3}, SCHEMAS["space-ladder"])
    assert cfg["space"]["p"] == math.inf
    digest = config_digest(cfg)
    assert len(digest) == 64 and set(digest) <= set("0123456789abcdef")


def test_digest_ignores_artifact_paths():
    base = {"L": 8, "p": 0.5}
    a = validate(base, SCHEMAS["percolate"])
    b = validate({**base, "out": "x.json", "sample_out": "y.bin"},
                 SCHEMAS["percolate"])
    assert config_digest(a) == config_digest(b)
    c = validate({"L": 8, "p": 0.6}, SCHEMAS["percolate"])
    assert config_digest(a) != config_digest(c)


def test_nested_table_paths():
    cfg = {"space": {"kind": "lattice"}, "hamiltonian": FREE_CHAIN,
           "g": {"kind": "one"}, "r_outer": 64.0,
           "tolerance": {"relative_gap": -0.1}}
    with pytest.raises(ConfigError) as err:
        validate(cfg, SCHEMAS["theorem-check"])
    assert err.value.path == "tolerance.relative_gap"


def test_domain_errors_are_wrapped_with_the_path():
    # validation sees a well-formed array; the length clash surfaces only
    # when the space object is built, and still names the config field
    cfg = validate({"space": {"kind": "lattice", "d": 1, "base": [1, 2]},
                    "kmax": 3}, SCHEMAS["space-ladder"])
    with pytest.raises(ConfigError) as err:
        space_from(cfg["space"])
    assert err.value.path == "space"


def test_polynomial_profile_needs_coefficients():
    with pytest.raises(ConfigError) as err:
        fn_from({"kind": "polynomial", "center": 0.0, "sigma": 1.0,
                 "halfwidth": 1.0, "coeffs": None})
    assert err.value.path == "g.coeffs"


# ---------------------------------------------------------------------------
# artifact round trips


def test_counterexample_table_and_determinism(tmp_path):
    out = tmp_path / "blocks.csv"
    assert cli.main(["counterexample", "--mmax", "4",
                     "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["m", "n", "cesaro", "log_cesaro"]
    assert len(rows) == 10
    assert rows[0][:3] == ["0", "1", "1/1"]
    assert rows[2][:3] == ["1", "4", "3/4"]
    assert rows[9][:3] == ["4", "512", "171/512"]
    meta = json.loads((tmp_path / "blocks.csv.meta.json").read_text())
    assert meta["tool"] == "doslab" and meta["mmax"] == 4
    assert len(meta["config_sha256"]) == 64
    again = tmp_path / "again.csv"
    assert cli.main(["counterexample", "--mmax", "4",
                     "--out", str(again)]) == 0
    assert again.read_bytes() == out.read_bytes()


def test_space_ladder_csv(tmp_path, capsys):
    out = tmp_path / "ladder.csv"
    rc = cli.main(["space", "ladder", "--space", "lattice", "--d", "2",
                   "--p", "1", "--kmax", "6", "--out", str(out)])
    assert rc == 0
    assert "6 levels, 85 points" in capsys.readouterr().out
    header, rows = read_csv(out)
    assert header == ["k", "r_k", "ball_count", "shell_count", "ratio"]
    assert [int(r[2]) for r in rows] == [2 * k * k + 2 * k + 1
                                         for k in range(1, 7)]


def test_space_check_c_verdict(tmp_path, capsys):
    out = tmp_path / "cc.json"
    rc = cli.main(["space", "check-c", "--space", "f2", "--kmax", "12",
                   "--out", str(out)])
    assert rc == 0  # a fail verdict is still a completed run
    assert "verdict: fail" in capsys.readouterr().out
    data = json.loads(out.read_text())
    assert data["verdict"] == "fail"
    assert 2.5 < data["tail_mean_ratio"] < 3.5


def test_vp_trace_json(tmp_path):
    out = tmp_path / "vp.json"
    rc = cli.main(["vp-trace", "--d", "1", "--radius", "20000",
                   "--out", str(out)])
    assert rc == 0
    data = json.loads(out.read_text())
    assert data["ball_volume"] == 2.0
    assert data["relative_error"] < 1e-4
    assert data["terms"] == 40001


def test_percolate_artifacts(tmp_path):
    out, growth = tmp_path / "perc.json", tmp_path / "growth.csv"
    sample_path = tmp_path / "sample.bin"
    rc = cli.main(["percolate", "--d", "2", "--L", "60", "--p", "0.6",
                   "--seed", "2", "--tmax", "15", "--out", str(out),
                   "--growth-out", str(growth),
                   "--sample-out", str(sample_path)])
    assert rc == 0
    data = json.loads(out.read_text())
    assert data["cluster_size"] == 3333
    assert data["open_fraction"] == pytest.approx(0.598587570621469)
    assert data["plateau_stat"] == pytest.approx(0.295382, abs=1e-5)
    assert data["condition_c"]["verdict"] == "fail"  # small box, noisy tail
    header, rows = read_csv(growth)
    assert header == ["t", "ball_count", "normalized"]
    assert len(rows) == 15
    assert rows[0] == ["1", "4", "4.0"]
    sample = percolation.load_sample(str(sample_path))
    assert percolation.sample_digest(sample) == data["sample_sha256"]
    # identical config, different path: artifact bytes must not change
    rerun = tmp_path / "rerun.json"
    cli.main(["percolate", "--d", "2", "--L", "60", "--p", "0.6",
              "--seed", "2", "--tmax", "15", "--out", str(rerun)])
    assert rerun.read_bytes() == out.read_bytes()


def test_dos_csv_matches_library(tmp_path):
    from doslab.dos import dos_approximant
    from doslab.hamiltonians import adjacency
    from doslab.spaces import Lattice
    from doslab.spectral import gaussian
    out = tmp_path / "dos.csv"
    cfg = write_config(tmp_path, {
        "space": {"kind": "lattice", "d": 1},
        "hamiltonian": FREE_CHAIN,
        "g": {"kind": "gaussian", "center": 0.3, "sigma": 0.7},
        "radii": [40.0, 80.0], "margin": 20.0, "out": str(out)})
    assert cli.main(["dos", "--config", cfg]) == 0
    header, rows = read_csv(out)
    assert header == ["r", "ball_count", "average"]
    est = dos_approximant(Lattice(1), adjacency(), gaussian(0.3, 0.7),
                          [40.0, 80.0], margin=20.0)
    assert [float(r[2]) for r in rows] == pytest.approx(list(est.values),
                                                        rel=1e-15)
    meta = json.loads((tmp_path / "dos.csv.meta.json").read_text())
    assert meta["tail_mean"] == pytest.approx(est.tail_mean)
    assert meta["diverged"] is False


def test_ids_csv(tmp_path):
    out = tmp_path / "ids.csv"
    cfg = write_config(tmp_path, {
        "space": {"kind": "lattice", "d": 1},
        "hamiltonian": FREE_CHAIN, "radius": 60.0, "out": str(out)})
    assert cli.main(["ids", "--config", cfg]) == 0
    header, rows = read_csv(out)
    assert header == ["energy", "fraction"]
    assert len(rows) == 121
    assert float(rows[-1][1]) == 1.0
    fracs = np.array([float(r[1]) for r in rows])
    assert np.all(np.diff(fracs) > 0)


def test_dixmier_json(tmp_path):
    out = tmp_path / "dix.json"
    cfg = write_config(tmp_path, {
        "space": {"kind": "lattice", "d": 1},
        "hamiltonian": FREE_CHAIN,
        "g": {"kind": "gaussian", "center": 0.0, "sigma": 1.0},
        "r_outer": 1024.0, "out": str(out)})
    assert cli.main(["dixmier", "--config", cfg]) == 0
    data = json.loads(out.read_text())
    assert data["slope"] == pytest.approx(0.465259, abs=1e-4)
    assert data["window"] == [4, 512]
    assert data["measurability"]["verdict"] == "strong-measurable"


def test_theorem_check_exit_codes(tmp_path):
    """Exit 0 when the identity holds within tolerance, 2 when the same
    run misses an unreachable tolerance; the artifact records both."""
    out = tmp_path / "check.json"
    base = {"space": {"kind": "lattice", "d": 1},
            "hamiltonian": FREE_CHAIN,
            "g": {"kind": "gaussian", "center": 0.0, "sigma": 1.0},
            "r_outer": 1024.0, "margin": 30.0, "out": str(out)}
    loose = write_config(tmp_path, {
        **base, "tolerance": {"relative_gap": 1.0}}, "loose.json")
    assert cli.main(["theorem-check", "--config", loose]) == 0
    data = json.loads(out.read_text())
    assert data["passed"] is True
    assert data["relative_gap"] < 0.01
    assert data["condition_c_verdict"] == "pass"
    assert data["modulated_ok"] is True
    tight = write_config(tmp_path, {
        **base, "tolerance": {"relative_gap": 1e-8}}, "tight.json")
    assert cli.main(["theorem-check", "--config", tight]) == 2
    data = json.loads(out.read_text())
    assert data["passed"] is False
    assert data["lhs_slope"] == pytest.approx(0.465259, abs=1e-4)


def test_equivariance_csv_aligned_shift(tmp_path):
    out = tmp_path / "eq.csv"
    cfg = write_config(tmp_path, {
        "space": {"kind": "lattice", "d": 1},
        "hamiltonian": {"hopping": {"kind": "adjacency"},
                        "potential": {"kind": "periodic",
                                      "values": [0.0, 1.0]}},
        "g": {"kind": "gaussian", "center": 0.3, "sigma": 0.7},
        "shift": [2], "radii": [40.0, 80.0], "margin": 20.0,
        "out": str(out)})
    assert cli.main(["equivariance", "--config", cfg]) == 0
    header, rows = read_csv(out)
    assert header == ["r", "average", "shifted_average", "abs_diff"]
    assert [r[3] for r in rows] == ["0.0", "0.0"]
    meta = json.loads((tmp_path / "eq.csv.meta.json").read_text())
    assert meta["max_diff"] == 0.0 and meta["nonincreasing"] is True


def test_ergodic_artifacts_and_seed_override(tmp_path):
    from doslab.ergodic import cubes, ergodic_average
    from doslab.hamiltonians import adjacency, iid_potential
    from doslab.spaces import Lattice
    from doslab.spectral import gaussian
    out, table = tmp_path / "erg.json", tmp_path / "erg.csv"
    cfg = write_config(tmp_path, {
        "space": {"kind": "lattice", "d": 1},
        "hamiltonian": {"hopping": {"kind": "adjacency"},
                        "potential": {"kind": "iid_uniform",
                                      "low": 0.0, "high": 1.0}},
        "g": {"kind": "gaussian", "center": 0.3, "sigma": 0.7},
        "folner": {"shape": "cube", "d": 1, "schedule": [2, 4, 8]},
        "realizations": 3, "margin": 4.0,
        "out": str(out), "csv_out": str(table)})
    rc = cli.main(["ergodic", "--config", cfg, "--seed", "7"])
    assert rc == 0
    data = json.loads(out.read_text())
    want = ergodic_average(Lattice(1),
                           adjacency(iid_potential(0.0, 1.0, seed=0)),
                           gaussian(0.3, 0.7), cubes(1, [2, 4, 8]),
                           realizations=3, seed=7, margin=4.0)
    assert data["mean"] == pytest.approx(want.mean, rel=1e-15)
    assert data["seeds"] == list(want.seeds)
    assert data["window_size"] == 17
    header, rows = read_csv(table)
    assert header == ["realization", "seed", "average", "z_score"]
    assert len(rows) == 3


def test_folner_lacunary_table(tmp_path):
    out = tmp_path / "folner.csv"
    rc = cli.main(["folner", "--shape", "lacunary", "--schedule", "1,2,3,4",
                   "--out", str(out)])
    assert rc == 0
    header, rows = read_csv(out)
    assert header == ["n", "cardinality", "deviation_max", "tempered_ratio"]
    assert rows[0] == ["1", "2", "1.0", ""]
    assert rows[1] == ["2", "4", "0.5", "1.25"]
    assert rows[3] == ["4", "16", "0.125", "1.4375"]
    meta = json.loads((tmp_path / "folner.csv.meta.json").read_text())
    assert meta["c_estimate"] == 1.4375 and meta["shape"] == "lacunary"


# ---------------------------------------------------------------------------
# failure modes


def test_invalid_json_config(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope", encoding="utf-8")
    assert cli.main(["counterexample", "--config", str(bad)]) == 1
    assert "invalid JSON" in capsys.readouterr().err


def test_unknown_config_key_exits_one(tmp_path, capsys):
    cfg = write_config(tmp_path, {"bogus": 1})
    assert cli.main(["counterexample", "--config", cfg]) == 1
    assert "unknown key 'bogus'" in capsys.readouterr().err


def test_missing_required_key_exits_one(capsys):
    assert cli.main(["percolate", "--p", "0.5"]) == 1
    assert "L: missing required key" in capsys.readouterr().err


def test_unknown_command_and_bad_flag_exit_one():
    with pytest.raises(SystemExit) as err:
        cli.main(["frobnicate"])
    assert err.value.code == 1
    with pytest.raises(SystemExit) as err:
        cli.main(["percolate", "--L", "abc"])
    assert err.value.code == 1


def test_bare_invocations_print_usage(capsys):
    assert cli.main([]) == 1
    assert "COMMAND" in capsys.readouterr().out
    assert cli.main(["space"]) == 1
    assert "space {ladder,check-c}" in capsys.readouterr().err


def test_failed_precondition_exits_one(tmp_path, capsys):
    # the free-group ball ratios violate the averaging hypothesis, which
    # must abort the check rather than produce a gap
    cfg = write_config(tmp_path, {
        "space": {"kind": "f2"}, "hamiltonian": FREE_CHAIN,
        "g": {"kind": "gaussian"}, "r_outer": 12.0})
    assert cli.main(["theorem-check", "--config", cfg]) == 1
    assert "ratios stabilise above 1" in capsys.readouterr().err


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as err:
        cli.main(["--version"])
    assert err.value.code == 0
    assert capsys.readouterr().out.startswith("doslab ")


def test_thread_cap_lands_in_environment(monkeypatch, capsys):
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        monkeypatch.setenv(var, "sentinel")
    assert cli.main(["counterexample", "--mmax", "2", "--threads", "3"]) == 0
    assert os.environ["OMP_NUM_THREADS"] == "3"
    assert os.environ["NUMEXPR_NUM_THREADS"] == "3"
    assert cli.main(["counterexample", "--mmax", "2", "--threads", "0"]) == 1
    assert "threads: must be >= 1" in capsys.readouterr().err
