import json
import math

import numpy as np
import pytest

from entangle_lab import cli
from entangle_lab.bell import VIOLATION_THRESHOLD
from entangle_lab.field import phi_radial
from entangle_lab.formfactor import QuadratureSpec, StepCutoff
from entangle_lab.table import SweepTable

SMALL = {
    "phi": ["--points", "8"],
    "r0-sweep": ["--points", "8", "--r2", "3"],
    "decay-fit": ["--formfactor", "gaussian", "--points", "12"],
    "chsh": ["--packet", "correlated", "--region1", "-2", "-2", "-2", "2", "2", "2",
             "--region2", "-3", "-2", "-2", "1", "2", "2", "--budget", "20000", "--seed", "5"],
    "g-factor": ["--region1", "-1", "-1", "-1", "1", "1", "1", "--region2", "all"],
    "franson": ["--phase-points", "24", "--delta-t", "0.5"],
}
PLOTTABLE = {"phi", "r0-sweep", "decay-fit", "franson"}


def invoke(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def table_from(text):
    return SweepTable.from_csv(text)


def outputs(tmp_path, tag, cmd, argv, capsys):
    paths = {k: tmp_path / f"{tag}.{k}" for k in ("csv", "json", "svg")}
    full = [cmd, *argv, "--out", str(paths["csv"]), "--json-out", str(paths["json"])]
    if cmd in PLOTTABLE:
        full += ["--plot", str(paths["svg"])]
    code, out, _ = invoke(full, capsys)
    assert code == 0
    files = {k: p.read_bytes() for k, p in paths.items() if p.exists()}
    return out, files


@pytest.mark.parametrize("cmd", sorted(SMALL))
def test_byte_identical_reruns(cmd, tmp_path, capsys):
    out1, files1 = outputs(tmp_path, "a", cmd, SMALL[cmd], capsys)
    out2, files2 = outputs(tmp_path, "b", cmd, SMALL[cmd], capsys)
    assert out1 == out2
    assert files1 == files2 and files1


@pytest.mark.parametrize("cmd", sorted(SMALL))
def test_flags_and_json_config_agree(cmd, tmp_path, capsys):
    parsed = vars(cli.parse_args([cmd, *SMALL[cmd]]))
    config = {"command": cmd}
    for k, v in parsed.items():
        if k not in ("command", "config", "out", "json_out", "plot", "input"):
            config[k] = v
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(config))
    _, by_flags = outputs(tmp_path, "f", cmd, SMALL[cmd], capsys)
    _, by_json = outputs(tmp_path, "j", cmd, ["--config", str(cfg)], capsys)
    assert by_flags == by_json


def test_hyphenated_config_keys(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"r-min": 2.0, "points": 3}))
    _, out, _ = invoke(["phi", "--config", str(cfg)], capsys)
    assert table_from(out).column("r")[0] == 2.0


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"points": 3, "t": 0.5}))
    _, out, _ = invoke(["phi", "--config", str(cfg), "--t", "2.0"], capsys)
    table = table_from(out)
    assert len(table.rows) == 3 and set(table.column("t")) == {2.0}


@pytest.mark.parametrize("content", ['{"command": "chsh"}', "[1, 2]", "{not json", '{"config": "x"}'])
def test_bad_config_is_usage_error(content, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(content)
    assert invoke(["phi", "--config", str(cfg)], capsys)[0] == 1


def test_config_echo_in_outputs(tmp_path, capsys):
    _, out, _ = invoke(["phi", "--points", "4", "--seed", "11"], capsys)
    header = [l for l in out.splitlines() if l.startswith("#")]
    assert any(l.startswith("# config:") and '"points": 4' in l for l in header)
    assert "# seed: 11" in header
    assert any(l.startswith("# entangle_lab:") for l in header)
    _, out, _ = invoke(["g-factor", "--seed", "3"], capsys)
    doc = json.loads(out)
    assert doc["provenance"]["seed"] == 3 and doc["provenance"]["config"]["budget"] == 100000


@pytest.mark.parametrize("argv", [
    ["phi", "--r-min", "0"],
    ["phi", "--r-min", "-1"],
    ["phi", "--points", "1"],
    ["phi", "--r-max", "0.5"],
    ["phi", "--tol", "0"],
    ["phi", "--formfactor", "bump", "--support", "2", "1"],
    ["phi", "--cutoff", "-1"],
    ["franson", "--eta1", "0"],
    ["franson", "--r1", "0"],
    ["g-factor", "--region1", "1", "2"],
    ["g-factor", "--budget", "0"],
    ["chsh", "--plot", "x.svg"],
    ["nosuch"],
    [],
])
def test_usage_errors_exit_1(argv, capsys):
    assert invoke(argv, capsys)[0] == 1


def test_zero_radius_message_names_flag(capsys):
    code, _, err = invoke(["phi", "--r-min", "0"], capsys)
    assert code == 1 and "--r-min" in err


def test_unwritable_output_exit_1(tmp_path, capsys):
    assert invoke(["phi", "--points", "2", "--out", str(tmp_path / "no" / "x.csv")], capsys)[0] == 1


def test_numeric_failures_exit_2(capsys):
    assert invoke(["decay-fit", "--r-min", "100", "--r-max", "500"], capsys)[0] == 2
    assert invoke(["phi", "--formfactor", "gaussian", "--r-min", "500", "--r-max", "600", "--points", "2",
                   "--tol", "1e-14", "--abs-tol", "1e-30"], capsys)[0] == 2
    assert invoke(["g-factor", "--packet", "correlated", "--region1", "-4", "-4", "-4", "4", "4", "4",
                   "--region2", "-4", "-4", "-4", "4", "4", "4", "--budget", "1"], capsys)[0] == 2


def test_phi_at_zero_time(capsys):
    _, out, _ = invoke(["phi", "--t", "0", "--points", "10"], capsys)
    assert all(v < 1e-24 for v in table_from(out).column("abs_phi_sq"))


def test_phi_rows_match_library(capsys):
    _, out, _ = invoke(["phi", "--points", "9", "--log-spacing", "--r-max", "50"], capsys)
    table = table_from(out)
    for r, t, re_, im_, a2, err in table.rows:
        v = phi_radial(StepCutoff(1.0), r, t, QuadratureSpec()).value
        assert (re_, im_) == (v.real, v.imag)
        assert a2 == abs(v) ** 2 and err == 0.0
    assert table.column("r") == list(np.geomspace(1, 50, 9))


def test_r0_sweep_symmetric_and_swap(capsys):
    _, out, _ = invoke(["r0-sweep", "--t", "0", "--points", "5"], capsys)
    assert set(table_from(out).column("r0")) == {0.0}
    _, a, _ = invoke(["r0-sweep", "--r2", "4", "--points", "7"], capsys)
    _, b, _ = invoke(["r0-sweep", "--r2", "4", "--points", "7", "--swap"], capsys)
    ta, tb = table_from(a), table_from(b)
    assert ta.column("r0") == tb.column("r0")
    assert ta.column("r1") == tb.column("r2")


def test_r0_sweep_positive_on_log_grid(capsys):
    _, out, _ = invoke(["r0-sweep", "--r-min", "10", "--r-max", "1000", "--log-spacing", "--points", "40"], capsys)
    assert all(v > 0 for v in table_from(out).column("r0"))


def test_decay_fit_injected_table(tmp_path, capsys):
    r = np.geomspace(5, 5000, 50)
    src = SweepTable(["r", "abs_phi_sq"], [(x, 3.0 / x**4) for x in r])
    path = tmp_path / "in.csv"
    path.write_text(src.to_csv())
    code, out, _ = invoke(["decay-fit", "--input", str(path)], capsys)
    doc = json.loads(out)
    assert code == 0 and abs(doc["slope"] + 4) < 1e-6
    assert set(doc) == {"slope", "intercept", "window", "n_points", "residual_rms", "used_envelope", "provenance"}


def test_decay_fit_input_errors(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("r,abs_phi_sq\n")
    assert invoke(["decay-fit", "--input", str(empty)], capsys)[0] == 1
    assert invoke(["decay-fit", "--input", str(empty), "--y-column", "nope"], capsys)[0] == 1
    assert invoke(["decay-fit", "--input", str(tmp_path / "missing.csv")], capsys)[0] == 1


def test_decay_fit_step_defaults(capsys):
    code, out, _ = invoke(["decay-fit"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["used_envelope"]
    assert doc["slope"] <= -1.9
    assert doc["window"][0] >= 100 and doc["window"][1] <= 1000


def test_chsh_all_space_canonical(capsys):
    code, out, _ = invoke(["chsh"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["g"] == 1.0 and doc["violated"] is True
    assert abs(doc["s_weighted"] + 2 * math.sqrt(2)) < 1e-12
    assert doc["s_weighted"] == doc["g"] * doc["s_spin"]


def test_chsh_small_regions_not_violated(capsys):
    doc = json.loads(invoke(["chsh", "--region1", "-.1", "-.1", "-.1", ".1", ".1", ".1"], capsys)[1])
    assert doc["g"] < 0.01 and doc["violated"] is False


def _chsh_at(h, capsys):
    box = [str(-h)] * 3 + [str(h)] * 3
    code, out, _ = invoke(["chsh", "--region1", *box, "--region2", *box], capsys)
    assert code == 0
    return json.loads(out)


def test_chsh_flip_by_bisection_over_region_size(capsys):
    lo, hi = 0.5, 5.0
    assert not _chsh_at(lo, capsys)["violated"] and _chsh_at(hi, capsys)["violated"]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        doc = _chsh_at(mid, capsys)
        assert doc["violated"] == (doc["g"] > VIOLATION_THRESHOLD)
        if doc["violated"]:
            hi = mid
        else:
            lo = mid
    below, above = _chsh_at(lo, capsys), _chsh_at(hi, capsys)
    assert below["g"] <= VIOLATION_THRESHOLD < above["g"]
    assert above["g"] - below["g"] < 1e-9
    assert below["max_chsh"] <= 2.0 < above["max_chsh"]


def test_franson_fringe(capsys):
    _, out, _ = invoke(["franson"], capsys)
    table = table_from(out)
    assert len(table.rows) == 360
    for d, ratio in zip(table.column("delta_phi"), table.column("rc_over_r0")):
        assert abs(ratio - math.cos(d) ** 2 / 4) < 1e-12
    trailer = [l for l in out.splitlines() if l.startswith("# visibility:")]
    assert abs(float(trailer[0].split(":")[1]) - 1) < 1e-9


def test_franson_efficiency_halves_rates(capsys):
    full = table_from(invoke(["franson", "--phase-points", "16"], capsys)[1]).column("rc")
    half = table_from(invoke(["franson", "--phase-points", "16", "--eta1", "0.5"], capsys)[1]).column("rc")
    for a, b in zip(full, half):
        assert abs(b - 0.5 * a) <= 1e-15 * max(a, 1e-300)


def test_franson_zero_base_rate_is_numeric_failure(capsys):
    assert invoke(["franson", "--t", "0"], capsys)[0] == 2


def test_thread_cap_env(monkeypatch, capsys):
    monkeypatch.setenv(cli.THREADS_ENV, "1")
    assert cli._workers() == 1
    one = invoke(["phi", "--points", "16"], capsys)[1]
    monkeypatch.setenv(cli.THREADS_ENV, "4")
    assert cli._workers() == 4
    assert invoke(["phi", "--points", "16"], capsys)[1] == one
    monkeypatch.setenv(cli.THREADS_ENV, "many")
    assert invoke(["phi", "--points", "4"], capsys)[0] == 1


def test_parallel_map_preserves_order(monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "8")
    assert cli.parallel_map(lambda x: x * x, range(100)) == [x * x for x in range(100)]
