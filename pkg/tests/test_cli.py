import csv
import io
import json

import pytest

from bosonic_mac import cli, rates


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_fmt_twelve_digits():
    assert cli.fmt(1 / 3) == "0.333333333333"
    assert cli.fmt(True) == "1" and cli.fmt(2) == "2"


def test_region_csv_lists_six_regions():
    code, out, _ = run("region", "--eta", "0.5", "--nsa", "1", "--nsb", "1")
    assert code == 0
    assert out.splitlines()[0] == "region,vertex_index,r1_bits,r2_bits"
    names = {r["region"] for r in rows(out)}
    assert names == {"yen_shapiro", "min_entropy_1", "min_entropy_2", "hull",
                     "heterodyne_baseline", "homodyne_baseline"}
    assert "\r" not in out


def test_region_zero_power_is_origin():
    _, out, _ = run("region", "--eta", "0.5", "--nsa", "0", "--nsb", "0")
    for r in rows(out):
        assert float(r["r1_bits"]) == 0.0 and float(r["r2_bits"]) == 0.0


def test_region_hull_matches_yen_shapiro_at_high_power():
    _, out, _ = run("region", "--eta", "0.5", "--nsa", "10", "--nsb", "8")
    poly = {}
    for r in rows(out):
        poly.setdefault(r["region"], []).append((float(r["r1_bits"]), float(r["r2_bits"])))
    assert poly["hull"] == pytest.approx(poly["yen_shapiro"], rel=1e-9)


def test_region_json():
    code, out, _ = run("region", "--format", "json", "--nsa", "10", "--nsb", "8")
    body = json.loads(out)
    assert code == 0 and body["equality"] is True
    assert len(body["regions"]) == 6


def test_map_examples():
    _, out, _ = run("map", "--eta", "0.5", "--min", "0", "--max", "20", "--steps", "21")
    table = {(float(r["nsa"]), float(r["nsb"])): int(r["equal"]) for r in rows(out)}
    assert table[(0.0, 0.0)] == 1
    assert table[(1.0, 1.0)] == 0
    assert table[(10.0, 8.0)] == 1
    assert table[(20.0, 20.0)] == 1


def test_map_default_etas_and_files(tmp_path):
    _, out, _ = run("map", "--steps", "3")
    assert {r["eta"] for r in rows(out)} == {"0.5", "0.8"}
    code, _, _ = run("map", "--steps", "3", "--out", str(tmp_path / "map.csv"))
    assert code == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["map_eta0.5.csv", "map_eta0.8.csv"]
    text = (tmp_path / "map_eta0.5.csv").read_text()
    assert text.splitlines()[0] == "nsa,nsb,equal" and len(rows(text)) == 9


def test_map_agrees_with_library():
    _, out, _ = run("map", "--eta", "0.8", "--steps", "5")
    for r in rows(out):
        p = rates.ChannelParams(0.8, float(r["nsa"]), float(r["nsb"]))
        assert int(r["equal"]) == int(rates.equality_conditions(p))


def test_simulate_bosonic_zero_rates():
    code, out, _ = run("simulate", "--mode", "bosonic", "--rates", "0", "0")
    assert code == 0
    assert float(rows(out)[0]["error_mean"]) == 0.0


def test_simulate_discrete_xor_trend():
    code, out, _ = run("simulate", "--mode", "discrete", "--mac", "xor", "--rates", "0.3", "0.3",
                       "--n", "4,8", "--codebooks", "200")
    table = rows(out)
    assert code == 0 and [int(r["n"]) for r in table] == [4, 8]
    assert all(r["trend"] == "PASS" for r in table)


def test_simulate_mac_file(tmp_path):
    from bosonic_mac import discrete_mac as dm
    path = tmp_path / "mac.json"
    path.write_text(dm.xor_mac().to_json())
    code, out, _ = run("simulate", "--mode", "discrete", "--mac", str(path), "--rates", "0.3", "0.3",
                       "--n", "4", "--format", "json")
    body = json.loads(out)
    assert code == 0 and body["results"][0]["L"] == 3 and body["trend"] == "N/A"


def test_byte_identical_and_thread_independent(tmp_path):
    args = ["simulate", "--mode", "bosonic", "--rates", "0.2", "0.2", "--n", "2,3",
            "--codebooks", "6", "--trials", "20", "--seed", "5"]
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert run(*args, "--out", str(a))[0] == 0
    assert run(*args, "--out", str(b), "--threads", "3")[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_usage_errors():
    assert run("region", "--eta", "2")[0] == 2
    assert run("region", "--nsa", "-1")[0] == 2
    assert run("bogus")[0] == 2
    assert run("map", "--steps", "0")[0] == 2
    code, _, err = run("simulate", "--mode", "discrete", "--mac", "/nonexistent.json")
    assert code == 2 and "cannot load" in err


def test_resource_guard_exit():
    code, _, err = run("simulate", "--mode", "discrete", "--mac", "xor", "--rates", "0.1", "0.1", "--n", "20")
    assert code == 3 and err.count("resource limit") == 1


def test_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"nsa": 10, "nsb": 8, "format": "json"}))
    _, out, _ = run("region", "--config", str(cfg))
    assert json.loads(out)["params"]["nsa"] == 10
    _, out, _ = run("region", "--config", str(cfg), "--nsa", "1", "--nsb", "1")
    assert json.loads(out)["equality"] is False
    cfg.write_text(json.dumps({"nonsense": 1}))
    assert run("region", "--config", str(cfg))[0] == 2


def test_verify_oracles_and_typicality():
    code, out, _ = run("verify", "--suite", "oracles", "--samples", "30")
    assert code == 0 and all(r["passed"] == "1" for r in rows(out))
    code, out, _ = run("verify", "--suite", "typicality", "--format", "json")
    assert code == 0 and json.loads(out)["passed"] is True


def test_verify_lemmas_small():
    code, out, _ = run("verify", "--suite", "lemmas", "--samples", "200", "--seed", "7")
    assert code == 0
    assert all(json.loads(r["detail"])["violations"] == 0 for r in rows(out))
