import json

import pytest

from taseplab.cli import fmt, main, parse_config, seed_derivation
from taseplab.errors import ParameterError

BASE = """
[run]
master_seed = 20260809
output_dir = {out}
workers = 1

[law]
variant = twopoint
r = 0.5
b = 1.0
p = 0.5
"""


def _config(tmp_path, body, name="cfg.ini", out="out"):
    text = BASE.format(out=tmp_path / out) + body
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path, text


def test_fmt_is_12_significant_digits():
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(0.125) == "0.125"
    assert fmt(True) == "true"
    assert fmt(8192) == "8192"


def test_seed_derivation_contract():
    s = seed_derivation(1, "lpp-tau", 0, "Y")
    assert s == seed_derivation(1, "lpp-tau", 0, "Y")
    assert s != seed_derivation(1, "lpp-tau", 0, "U")
    assert s != seed_derivation(1, "lpp-tau", 1, "Y")


def test_env_sample_round_trip(tmp_path):
    cfg, text = _config(tmp_path, "[env-sample]\ni_min = 0\ni_max = 9\n")
    assert main(["env-sample", "--config", str(cfg)]) == 0
    out = tmp_path / "out"
    csv = (out / "env-sample.csv").read_text()
    lines = csv.strip().split("\n")
    assert lines[0] == "law,law_params,i,alpha"
    assert len(lines) == 11
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config_text"] == text
    assert "env-sample.csv" in manifest["outputs"]


def test_plateau_report(tmp_path):
    cfg, _ = _config(tmp_path, "[plateau]\nrho_grid = 0.44,0.5,0.6\n")
    assert main(["plateau", "--config", str(cfg)]) == 0
    rep = json.loads((tmp_path / "out" / "plateau.json").read_text())
    assert rep["r"] == 0.5 and rep["mu"] == 0.5
    assert rep["interval"] == [0.4375, 0.5625]
    verdicts = {v["rho"]: v for v in rep["verdicts"]}
    assert verdicts[0.44]["plateau_pass"] is True
    assert verdicts[0.5]["plateau_pass"] is True
    assert verdicts[0.6]["plateau_pass"] is False
    for v in rep["verdicts"]:
        assert v["plateau_pass"] == v["flux_at_plateau_level"]


def test_lpp_tau_csv(tmp_path):
    cfg, _ = _config(tmp_path, "[lpp-tau]\nx = 0\ny = 1\nsizes = 20,40\nreplicas = 4\n")
    assert main(["lpp-tau", "--config", str(cfg)]) == 0
    lines = (tmp_path / "out" / "lpp-tau.csv").read_text().strip().split("\n")
    assert lines[0] == "law,law_params,x,y,n,replicas,mean,sem"
    assert len(lines) == 3
    summary = json.loads((tmp_path / "out" / "lpp-tau.json").read_text())
    assert summary["sizes"] == [20, 40]
    assert summary["point"] > 0


def test_coupling_audit_json(tmp_path):
    cfg, _ = _config(
        tmp_path, "[coupling-audit]\nsamples = 2000\nx = 1\ny = 1\nn = 30\nreplicas = 8\n")
    assert main(["coupling-audit", "--config", str(cfg)]) == 0
    rep = json.loads((tmp_path / "out" / "coupling-audit.json").read_text())
    assert set(rep) == {"law", "z_audit", "path_bound", "passed"}
    assert rep["z_audit"]["samples"] == 2000
    assert isinstance(rep["path_bound"]["passed"], bool)


def test_flux_curve_csv_and_manifest_seeds(tmp_path):
    body = ("[flux-curve]\nl = 32\nrho_grid = 0.4,0.6\nburn_in = 100\n"
            "window = 1500\nbatches = 8\nenv_seeds = 2\n")
    cfg, _ = _config(tmp_path, body)
    assert main(["flux-curve", "--config", str(cfg)]) == 0
    lines = (tmp_path / "out" / "flux-curve.csv").read_text().strip().split("\n")
    assert lines[0] == "law,law_params,L,rho,burn_in,window,estimate,sem,batches"
    assert len(lines) == 5
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert len(manifest["seeds"]["runs"]) == 4
    for run in manifest["seeds"]["runs"]:
        assert set(run) >= {"env_seed", "placement_seed", "event_seed", "rho"}


def test_fundamental_diagram_join(tmp_path):
    body = ("[fundamental-diagram]\nl = 32\nrho_grid = 0.45,0.5\nburn_in = 100\n"
            "window = 1500\nbatches = 8\n")
    cfg, _ = _config(tmp_path, body)
    assert main(["fundamental-diagram", "--config", str(cfg)]) == 0
    rep = json.loads((tmp_path / "out" / "fundamental-diagram.json").read_text())
    assert (tmp_path / "out" / "flux-curve.csv").exists()
    for v in rep["verdicts"]:
        assert v["simulated_flux"] is not None


def test_byte_determinism_across_runs_and_workers(tmp_path):
    body = ("[flux-curve]\nl = 32\nrho_grid = 0.5\nburn_in = 50\n"
            "window = 800\nbatches = 8\n")
    outputs = []
    for k, workers in enumerate((1, 2, 1)):
        cfg, _ = _config(tmp_path, body, name=f"cfg{k}.ini", out=f"out{k}")
        assert main(["flux-curve", "--config", str(cfg), "--workers", str(workers),
                     "--output-dir", str(tmp_path / f"out{k}")]) == 0
        outputs.append((tmp_path / f"out{k}" / "flux-curve.csv").read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]


def test_validation_exit_codes(tmp_path):
    # density at 1.0 is invalid; message must name the offending field
    cfg, _ = _config(tmp_path, "[plateau]\nrho_grid = 0.5,1.0\n")
    assert main(["plateau", "--config", str(cfg)]) == 1
    with pytest.raises(ParameterError, match="rho_grid"):
        parse_config(cfg.read_text(), "plateau")

    cfg2, _ = _config(tmp_path, "[plateau]\nrho_grid = 0.5\nbogus = 1\n", name="c2.ini")
    assert main(["plateau", "--config", str(cfg2)]) == 1
    with pytest.raises(ParameterError, match="bogus"):
        parse_config(cfg2.read_text(), "plateau")

    # [run] experiment mismatch
    text = cfg.read_text().replace("[run]", "[run]\nexperiment = plateau")
    cfg3 = tmp_path / "c3.ini"
    cfg3.write_text(text)
    assert main(["flux-curve", "--config", str(cfg3)]) == 1

    # sections for other experiments are unknown to this one
    with pytest.raises(ParameterError, match="unknown config section"):
        parse_config(cfg.read_text() + "\n[flux-curve]\nl = 16\n", "plateau")


def test_resource_error_exit_code(tmp_path):
    body = "[coupling-audit]\nsamples = 2000\nx = 1\ny = 1\nn = 20000\nreplicas = 2\n"
    cfg, _ = _config(tmp_path, body)
    assert main(["coupling-audit", "--config", str(cfg)]) == 2


def test_missing_law_and_seed(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[run]\nmaster_seed = 1\n\n[plateau]\nrho_grid = 0.5\n")
    assert main(["plateau", "--config", str(path)]) == 1  # no [law]
    path2 = tmp_path / "bad2.ini"
    path2.write_text("[law]\nvariant = pointmass\nr = 1\n\n[plateau]\nrho_grid = 0.5\n")
    assert main(["plateau", "--config", str(path2)]) == 1  # no master_seed


def test_mixture_law_config(tmp_path):
    text = """
[run]
master_seed = 5

[law]
variant = mixture
base = 1.0
epsilon = 0.25
slow_variant = pointmass
slow_r = 0.5

[env-sample]
i_min = 0
i_max = 99
"""
    path = tmp_path / "mix.ini"
    path.write_text(text)
    assert main(["env-sample", "--config", str(path),
                 "--output-dir", str(tmp_path / "o")]) == 0
    csv = (tmp_path / "o" / "env-sample.csv").read_text().strip().split("\n")
    alphas = {line.split(",")[3] for line in csv[1:]}
    assert alphas <= {"0.5", "1"}


def test_grid_parsing():
    cfg = parse_config(
        BASE.format(out="o") + "[plateau]\nrho_grid = 0.1:0.3:0.1\n", "plateau")
    assert cfg.params["rho_grid"] == pytest.approx([0.1, 0.2, 0.3])
