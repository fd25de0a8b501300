import argparse
import json
import subprocess
import sys

import pytest

from polyint import cli


def run(tmp_path, *args):
    return cli.main(list(args) + ["--out", str(tmp_path)])


def load(tmp_path, name):
    return json.loads((tmp_path / name).read_text())


def test_suite_ball(tmp_path):
    assert run(tmp_path, "suite", "--body", "ball3") == 0
    rep = load(tmp_path, "suite.json")
    assert list(rep)[:2] == ["header", "command"]
    assert rep["config"]["body"] == "ball3" and rep["exit_code"] == 0
    section = rep["stages"][0]
    a0 = [c for c in section["checks"] if c["name"] == "A(0)"][0]
    assert a0["closed_form"] == pytest.approx(3.141592653589793)
    for name in ("section.csv", "fracderiv.csv", "identities.csv", "integrability.csv"):
        assert (tmp_path / name).exists()
    # header sits alone on the second line
    lines = (tmp_path / "suite.json").read_text().splitlines()
    assert lines[1].startswith('  "header": {"timestamp"')


def test_integrability_negative_control(tmp_path):
    assert run(tmp_path, "integrability", "--body", "l4ball3", "--dirs", "16") == 0
    rep = load(tmp_path, "integrability.json")
    assert rep["result"]["verdict"]["global_N"] is None
    assert rep["result"]["negative_control"]["global_N"] is None
    assert run(tmp_path, "integrability", "--body", "l4ball3", "--dirs", "16",
               "--expect-degree", "2") == 14


def test_reconstruct_shifted_ellipsoid(tmp_path):
    assert run(tmp_path, "reconstruct", "--body", "shifted-ellipsoid3") == 0
    rep = load(tmp_path, "reconstruct.json")
    assert rep["result"]["pipeline"]["matrix_error"] <= 1e-6
    assert run(tmp_path, "reconstruct", "--body", "l4ball3", "--expect-ellipsoid", "true") == 15
    assert load(tmp_path, "reconstruct.json")["result"]["pipeline"]["failing_stage"] == "fit_P_Q"


def test_other_subcommands(tmp_path):
    assert run(tmp_path, "section", "--body", "disk") == 0
    assert run(tmp_path, "fracderiv", "--body", "ball3", "--orders", "0.5,1.5") == 0
    rep = load(tmp_path, "fracderiv.json")
    assert [r["order"] for r in rep["result"]["sweep"]] == [0.5, 1.5]
    assert run(tmp_path, "identities", "--body", "ball5", "--dirs", "8") == 0


@pytest.mark.parametrize("args", [
    ["suite", "--bogus"],
    ["nope"],
    ["suite", "--nodes", "8"],
    ["suite", "--nmax", "40"],
    ["suite", "--tol", "-1"],
    ["suite", "--body", '{"type": "ball", "radius": 1}'],
    ["identities", "--body", "l4ball3"],
    ["section", "--body", "product-shifted-ball3"],
    ["fracderiv", "--xi", "1,2"],
])
def test_usage_errors(tmp_path, args):
    assert run(tmp_path, *args) == 2


def test_numeric_failure_writes_diagnostic(tmp_path):
    assert run(tmp_path, "fracderiv", "--orders", "9.5") == 3
    diag = load(tmp_path, "error.json")
    assert diag["error"] == "ResolutionError" and diag["config"]["orders"] == [9.5]


def test_stage_codes_and_first_failure(tmp_path, monkeypatch):
    def failing(body, cfg):
        return {}, [cli._check("forced", 1.0, 0.0)], {}

    monkeypatch.setitem(cli.STAGES, "fracderiv", failing)
    monkeypatch.setitem(cli.STAGES, "reconstruct", failing)
    assert run(tmp_path, "suite", "--no-csv") == 12
    assert run(tmp_path, "reconstruct") == 15


def _ns(**kw):
    base = {name: None for name in cli._FIELDS}
    base.update(config=None, command="suite")
    base.update(kw)
    return argparse.Namespace(**base)


def test_precedence_flags_env_file_defaults(tmp_path):
    toml = tmp_path / "run.toml"
    toml.write_text('body = "disk"\ndirs = 16\nnodes = 41\nseed = 4\n')
    cfg = cli.resolve_config(_ns(config=str(toml)), environ={})
    assert (cfg.body, cfg.dirs, cfg.nodes, cfg.seed, cfg.nmax) == ("disk", 16, 41, 4, 10)
    env = {"POLYINT_DIRS": "24", "POLYINT_SEED": "9"}
    cfg = cli.resolve_config(_ns(config=str(toml)), environ=env)
    assert (cfg.dirs, cfg.seed, cfg.nodes) == (24, 9, 41)
    cfg = cli.resolve_config(_ns(config=str(toml), dirs=32), environ=env)
    assert (cfg.dirs, cfg.seed) == (32, 9)


def test_json_config_and_errors(tmp_path):
    js = tmp_path / "run.json"
    js.write_text(json.dumps({"body": {"type": "ball", "radius": 2.0, "dim": 3}, "tol": 1e-6}))
    cfg = cli.resolve_config(_ns(config=str(js)), environ={})
    assert cfg.body["radius"] == 2.0 and cfg.tol == 1e-6
    js.write_text(json.dumps({"bodyy": "ball3"}))
    with pytest.raises(cli.UsageError, match="unknown config keys"):
        cli.resolve_config(_ns(config=str(js)), environ={})
    with pytest.raises(cli.UsageError, match="invalid value"):
        cli.resolve_config(_ns(), environ={"POLYINT_DIRS": "many"})
    with pytest.raises(cli.UsageError, match="cannot read"):
        cli.resolve_config(_ns(config=str(tmp_path / "none.toml")), environ={})


def test_env_body_reaches_run(tmp_path, monkeypatch):
    monkeypatch.setenv("POLYINT_BODY", "ellipsoid149")
    assert run(tmp_path, "section") == 0
    assert load(tmp_path, "section.json")["body"]["type"] == "ellipsoid"


def test_deterministic_reports(tmp_path):
    def strip(text):
        return [ln for ln in text.splitlines() if '"header"' not in ln]

    args = ["suite", "--body", "shifted-ellipsoid3", "--seed", "3", "--out", str(tmp_path)]
    snapshots = []
    for _ in range(2):
        assert cli.main(args) == 0
        snapshots.append({p.name: p.read_text() for p in sorted(tmp_path.iterdir())})
    first, second = snapshots
    assert sorted(first) == sorted(second)
    assert strip(first["suite.json"]) == strip(second["suite.json"])
    for name in first:
        if name.endswith(".csv"):
            assert first[name] == second[name]


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "polyint", "--version"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("polyint")
