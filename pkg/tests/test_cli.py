import csv
import json

import pytest

from kickeff.cli import RunConfig, main

SMALL = {
    "spectrum-sweep": ["--j", "3", "--alpha-count", "4", "--alpha-stop", "1"],
    "dos": ["--j", "4", "--alpha", "0.2"],
    "reconstruct": ["--j", "3", "--alpha", "1.0", "--beta", "0.1", "0.05"],
    "gap-scan": ["--j", "2", "--beta", "0.5", "--alpha-count", "6", "--alpha-stop", "0.25"],
    "singularity-probe": ["--j", "2", "--n-points", "11"],
    "phase-portrait": ["--alpha", "0.2", "--n-kicks", "5", "--ic-grid", "2x1", "--dt", "0.05"],
    "classical-limit": ["--j-list", "4", "8"],
}


def run_cli(command, extra, out, jobs=1):
    code = main([command, *extra, "--out", str(out), "--jobs", str(jobs)])
    assert code == 0
    return {p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))}


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


@pytest.mark.parametrize("command", sorted(SMALL))
def test_pipelines_are_byte_deterministic(command, tmp_path):
    a = run_cli(command, SMALL[command], tmp_path / "a")
    b = run_cli(command, SMALL[command], tmp_path / "b")
    assert a and a == b
    for name in a:
        meta = json.loads((tmp_path / "a" / (name + ".json")).read_text())
        assert meta["file"] == name and meta["config"]["command"] == command
        assert meta["wall_time_s"] >= 0


def test_replay_reproduces_output(tmp_path):
    first = run_cli("dos", SMALL["dos"], tmp_path / "a")
    sidecar = tmp_path / "a" / "dos.csv.json"
    assert main(["replay", str(sidecar), "--out", str(tmp_path / "b")]) == 0
    second = {p.name: p.read_bytes() for p in sorted((tmp_path / "b").glob("*.csv"))}
    assert first == second


def test_parallel_matches_serial(tmp_path):
    args = ["--j", "3", "--alpha-count", "9", "--alpha-stop", "2"]
    assert run_cli("spectrum-sweep", args, tmp_path / "a", jobs=1) == run_cli(
        "spectrum-sweep", args, tmp_path / "b", jobs=2
    )


def test_spectrum_sweep_layout(tmp_path):
    run_cli("spectrum-sweep", ["--j", "40", "--alpha-count", "2", "--alpha-stop", "0.1"], tmp_path)
    rows = read_csv(tmp_path / "spectrum_sweep.csv")
    assert len(rows[0]) == 1 + 81 + 81 and rows[0][0] == "alpha"
    assert len(rows) == 3


def test_dos_layout(tmp_path):
    run_cli("dos", SMALL["dos"], tmp_path)
    rows = read_csv(tmp_path / "dos.csv")
    assert rows[0] == ["angle", "rho_exact", "rho_effective"]
    assert len(rows) > 1024


def test_phase_portrait_files(tmp_path):
    out = run_cli("phase-portrait", ["--alpha", "0.2", "1.0", "--n-kicks", "3", "--ic-grid", "1x1", "--dt", "0.1"], tmp_path)
    for a in ("0.2", "1"):
        assert f"phase_portrait_alpha{a}_map.csv" in out
        assert f"phase_portrait_alpha{a}_flow.csv" in out
    rows = read_csv(tmp_path / "phase_portrait_alpha0.2_map.csv")
    assert rows[0] == ["ic", "kick", "psi", "z"] and len(rows) == 4


def test_floats_use_seventeen_digits(tmp_path):
    run_cli("classical-limit", SMALL["classical-limit"], tmp_path)
    rows = read_csv(tmp_path / "classical_limit.csv")
    assert float(rows[1][1]) == float(repr(float(rows[1][1])))
    assert any(len(v.replace("-", "").replace(".", "").split("e")[0]) >= 15 for v in rows[1][1:])


def test_usage_errors_exit_2(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["dos", "--no-such-flag"])
    assert exc.value.code == 2
    assert main(["dos", "--j", "0.3", "--out", str(tmp_path)]) == 2
    assert main(["replay", str(tmp_path / "missing.json")]) == 2


def test_config_roundtrip():
    cfg = RunConfig(command="gap-scan", j=2, beta=[0.5])
    assert RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg
