import json
import shutil
import subprocess

import pytest

from cecprove.aiger import write_aiger
from cecprove.cli import CliError, main, par2, resolve_threads
from cecprove.features import FEATURE_NAMES
from cecprove.miter import build_miter, mutate
from cecprove.xag import Xag, random_xag


def run(argv, capsys):
    """main() plus captured stdout lines; argparse errors surface as the code."""
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    out = capsys.readouterr().out
    return code, out.splitlines()


@pytest.fixture()
def neq_pair(tmp_path):
    a = random_xag(5, 30, seed=4)
    mut = None
    for s in range(40):
        try:
            mut = mutate(a, seed=s)
            break
        except ValueError:
            continue
    if mut is None:
        pytest.skip("no function-changing mutation found")
    pa = tmp_path / "a.aag"
    pb = tmp_path / "b.aag"
    pm = tmp_path / "miter.aag"
    pa.write_bytes(write_aiger(a))
    pb.write_bytes(write_aiger(mut))
    pm.write_bytes(write_aiger(build_miter(a, mut)))
    return str(pa), str(pb), str(pm)


def test_gen_then_prove_eq(tmp_path, capsys):
    path = str(tmp_path / "m3.aag")
    code, _ = run(["gen", "mult", "3", path], capsys)
    assert code == 0
    code, out = run(["prove", path, "--threads", "1"], capsys)
    assert code == 0
    assert out[0] == "EQ"


def test_prove_two_files_neq_and_replay(neq_pair, capsys):
    pa, pb, pm = neq_pair
    code, out = run(["prove", pa, pb, "--threads", "1"], capsys)
    assert code == 1
    word, bits = out[0].split()
    assert word == "NEQ"
    # the same witness must drive the merged miter file to 1
    code, out = run(["prove", pm, "--threads", "1"], capsys)
    assert code == 1
    bits = out[0].split()[1]
    code, out = run(["eval", pm, bits], capsys)
    assert code == 0
    assert out[0] == "1"


def test_eval_zero(tmp_path, capsys):
    path = str(tmp_path / "m2.aag")
    run(["gen", "mult", "2", path], capsys)
    code, out = run(["eval", path, "0000"], capsys)
    assert code == 0
    assert out[0] == "0"


def test_par2_fixtures():
    assert par2([("a", "EQ", 10.0), ("b", "NEQ", 10.0),
                 ("c", "UNKNOWN", 3600.0)], 3600.0) == pytest.approx(2406.67, abs=0.01)
    assert par2([("EQ", 0.001), ("EQ", 0.002)], 3600.0) == pytest.approx(0.0, abs=0.01)
    assert par2([("UNKNOWN", 1.0)] * 5, 60.0) == pytest.approx(120.0, abs=0.01)
    with pytest.raises(ValueError):
        par2([], 60.0)


def test_bench_csv(tmp_path, capsys):
    d = tmp_path / "suite"
    d.mkdir()
    run(["gen", "mult", "2", str(d / "m2.aag")], capsys)
    run(["gen", "mult", "3", str(d / "m3.aag")], capsys)
    code, out = run(["bench", str(d), "--threads", "1", "--cutoff", "60"], capsys)
    assert code == 0
    assert out[0] == "name,verdict,seconds"
    assert out[1].startswith("m2.aag,EQ,")
    assert out[2].startswith("m3.aag,EQ,")
    assert out[3] == "# solved,2/2"
    assert out[4].startswith("# par2,")
    assert float(out[4].split(",")[1]) < 60.0


def test_bench_empty_dir(tmp_path, capsys):
    code, _ = run(["bench", str(tmp_path)], capsys)
    assert code == 3


def test_exit3_cases(tmp_path, capsys):
    assert run(["prove", str(tmp_path / "missing.aag")], capsys)[0] == 3
    path = str(tmp_path / "m2.aag")
    run(["gen", "mult", "2", path], capsys)
    assert run(["eval", path, "00"], capsys)[0] == 3  # wrong length
    assert run(["eval", path, "00x0"], capsys)[0] == 3  # bad charset
    assert run(["gen", "mult", "99", str(tmp_path / "w.aag")], capsys)[0] == 3
    assert run(["prove"], capsys)[0] == 3  # usage error
    # a two-output file is not a miter on its own
    two = random_xag(3, 8, seed=0)
    multi = Xag(two.num_pis, two.gates, (two.outputs[0], two.outputs[0]))
    p2 = tmp_path / "two.aag"
    p2.write_bytes(write_aiger(multi))
    assert run(["prove", str(p2)], capsys)[0] == 3


def test_resolve_threads_precedence(monkeypatch):
    monkeypatch.setenv("FASTLEC_THREADS", "7")
    assert resolve_threads(None) == 7
    assert resolve_threads(3) == 3  # flag beats env
    monkeypatch.setenv("FASTLEC_THREADS", "abc")
    with pytest.raises(CliError):
        resolve_threads(None)
    monkeypatch.setenv("FASTLEC_THREADS", "0")
    with pytest.raises(CliError):
        resolve_threads(None)
    monkeypatch.delenv("FASTLEC_THREADS")
    assert 1 <= resolve_threads(None) <= 32
    with pytest.raises(CliError):
        resolve_threads(0)


def test_bad_env_only_matters_without_flag(tmp_path, capsys, monkeypatch):
    path = str(tmp_path / "m2.aag")
    run(["gen", "mult", "2", path], capsys)
    monkeypatch.setenv("FASTLEC_THREADS", "never")
    assert run(["prove", path], capsys)[0] == 3
    assert run(["prove", path, "--threads", "1"], capsys)[0] == 0


def test_stats_json(tmp_path, capsys):
    path = str(tmp_path / "m3.aag")
    run(["gen", "mult", "3", path], capsys)
    code, out = run(["prove", path, "--threads", "1", "--stats", "json"], capsys)
    assert code == 0
    assert out[0] == "EQ"
    doc = json.loads("\n".join(out[1:]))
    assert doc["verdict"] == "EQ"
    assert doc["threads"] == 1
    assert doc["engine_mode"] == "auto"
    assert doc["witness"] is None
    assert doc["merges"] >= 1
    assert doc["submiters"] >= 1
    assert isinstance(doc["engine_stats"], dict)
    assert doc["wall_seconds"] >= 0.0


def test_dump_submiters_then_features(tmp_path, capsys):
    path = str(tmp_path / "m3.aag")
    dump = str(tmp_path / "dump")
    run(["gen", "mult", "3", path], capsys)
    code, _ = run(["prove", path, "--threads", "1", "--engine", "es",
                   "--dump-submiters", dump], capsys)
    assert code == 0
    code, out = run(["features", dump], capsys)
    assert code == 0
    header = out[0].split(",")
    assert header == ["submiter_id"] + list(FEATURE_NAMES)
    assert len(out) >= 2
    for row in out[1:]:
        assert len(row.split(",")) == 1 + len(FEATURE_NAMES)


def test_features_single_file(tmp_path, capsys):
    path = str(tmp_path / "m2.aag")
    run(["gen", "mult", "2", path], capsys)
    code, out = run(["features", path], capsys)
    assert code == 0
    assert out[0].split(",") == list(FEATURE_NAMES)
    vals = out[1].split(",")
    assert len(vals) == 32
    assert float(vals[FEATURE_NAMES.index("num_PIs")]) == 4.0


def test_engine_modes_smoke(tmp_path, capsys):
    path = str(tmp_path / "m3.aag")
    run(["gen", "mult", "3", path], capsys)
    for extra in (["--engine", "portfolio-even", "--threads", "4"],
                  ["--select-only", "--threads", "2"],
                  ["--engine", "bdd", "--threads", "1"]):
        code, out = run(["prove", path] + extra, capsys)
        assert code == 0, extra
        assert out[0] == "EQ"


def test_console_script(tmp_path):
    exe = shutil.which("cecprove")
    if exe is None:
        pytest.skip("console script not on PATH")
    path = str(tmp_path / "m2.aag")
    assert subprocess.run([exe, "gen", "mult", "2", path]).returncode == 0
    done = subprocess.run([exe, "prove", path, "--threads", "1"],
                          capture_output=True, text=True)
    assert done.returncode == 0
    assert done.stdout.splitlines()[0] == "EQ"
