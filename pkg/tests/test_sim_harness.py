"""Scenario validation, RK4 stepping, run reports, and file outputs."""

import copy
import json
import math

import numpy as np
import pytest

from gstrand import (
    BlowUpError,
    ConfigError,
    ScenarioConfig,
    SimulationError,
    SingularConfigurationError,
    convergence_study,
    list_scenarios,
    rk4_step,
    run_scenario,
)

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi


def chiral_dict():
    return {
        "model": "chiral",
        "grid": {"S": TWO_PI, "N_s": 64, "dt": 0.0125, "t_end": 0.1},
        "params": {
            "initial": {
                "u": [[[1.0, 1.0, 0.0]], [], [[1.0, 1.0, HALF_PI]]],
                "v": [[], [[1.0, 1.0, HALF_PI]], []],
            }
        },
        "diagnostics": [{"kind": "zero_curvature"}],
        "output": {"directory": None, "cadence": 1},
    }


def single_exact_dict():
    return {
        "model": "peakon_single_exact",
        "grid": {"S": TWO_PI, "N_s": 64, "dt": 0.0125, "t_end": 0.1},
        "params": {
            "profile": {
                "type": "superposition",
                "parts": [
                    {"type": "traveling", "terms": [[0.3, 1.0, 0.0]], "direction": 1},
                    {"type": "traveling", "terms": [[0.1, 2.0, 0.0]], "direction": -1},
                ],
            }
        },
        "diagnostics": [{"kind": "s_constraint"}],
        "output": {"directory": None, "cadence": 1},
    }


# ------------------------------------------------------------------------- rk4


def test_rk4_frozen_decay_step():
    out = rk4_step(1.0, lambda y: -y, 0.1)
    assert abs(float(out) - 0.9048375) < 1e-15


def test_rk4_zero_rhs_identity():
    y = np.arange(6.0).reshape(2, 3)
    np.testing.assert_array_equal(rk4_step(y, lambda y: np.zeros_like(y), 0.3), y)


def test_rk4_global_order_four():
    errs = []
    for steps in (20, 40):
        y = 1.0
        dt = 1.0 / steps
        for _ in range(steps):
            y = rk4_step(y, lambda y: -y, dt)
        errs.append(abs(y - math.exp(-1.0)))
    order = math.log2(errs[0] / errs[1])
    assert 3.9 < order < 4.1


def test_rk4_rejects_bad_dt():
    with pytest.raises(ValueError):
        rk4_step(1.0, lambda y: -y, 0.0)
    with pytest.raises(ValueError):
        rk4_step(1.0, lambda y: -y, -0.1)


def test_rk4_flags_non_finite_result():
    with pytest.raises(BlowUpError):
        rk4_step(np.array([1.0]), lambda y: y * np.inf, 0.1)


# ------------------------------------------------------------ config validation


def test_valid_config_parses():
    cfg = ScenarioConfig.from_dict(chiral_dict())
    assert cfg.model == "chiral"
    assert cfg.n_steps == 8
    assert cfg.n_nodes == 64
    assert cfg.diagnostics[0]["kind"] == "zero_curvature"
    assert cfg.diagnostics[0]["lambdas"] == (0.5, 1.0, 2.0, -1.0)


def mutate(path, value):
    d = chiral_dict()
    node = d
    for key in path[:-1]:
        node = node[key]
    node[path[-1]] = value
    return d


@pytest.mark.parametrize(
    "path,value",
    [
        (("model",), "heat"),
        (("grid", "N_s"), 4),
        (("grid", "N_s"), 64.5),
        (("grid", "N_s"), True),
        (("grid", "dt"), 0.0),
        (("grid", "dt"), 0.05),           # CFL 0.509 > 0.5
        (("grid", "t_end"), 0.105),       # not a multiple of dt
        (("grid", "t_end"), 0.001),       # shorter than one step
        (("grid", "S"), -1.0),
        (("output", "cadence"), 0),
        (("output", "cadence"), 3),       # does not divide 8 steps
        (("output", "directory"), 42),
        (("diagnostics",), "zero_curvature"),
        (("diagnostics",), [{"kind": "s_constraint"}]),
        (("diagnostics",), [{"kind": "zero_curvature"}, {"kind": "zero_curvature"}]),
        (("diagnostics",), [{"kind": "zero_curvature", "lambdas": [0.0]}]),
        (("diagnostics",), [{"kind": "zero_curvature", "lambdas": []}]),
        (("diagnostics",), [{"kind": "zero_curvature", "window": 2}]),
        (("params",), {}),
        (("params", "initial"), {"u": [[], [], []]}),
        (("params", "initial", "u"), [[[1.0, 1.5, 0.0]], [], []]),  # aperiodic k
        (("params", "initial", "u"), [[], []]),
    ],
)
def test_config_rejects(path, value):
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict(mutate(path, value))


def test_config_rejects_unknown_top_key():
    d = chiral_dict()
    d["seed"] = 7
    with pytest.raises(ConfigError, match="seed"):
        ScenarioConfig.from_dict(d)


def test_config_rejects_missing_output():
    d = chiral_dict()
    del d["output"]
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict(d)


def test_cadence_must_leave_three_snapshots_for_curvature():
    d = chiral_dict()
    d["output"]["cadence"] = 8  # stores only t = 0 and t_end
    with pytest.raises(ConfigError, match="3"):
        ScenarioConfig.from_dict(d)


def test_spin_chain_compatibility_takes_no_lambdas():
    d = chiral_dict()
    d["model"] = "spin_chain"
    d["params"]["A"] = [1.0, 2.0, 3.0]
    d["params"]["B"] = [2.0, 1.0, 1.0]
    d["diagnostics"] = [{"kind": "zero_curvature", "lambdas": [1.0]}]
    with pytest.raises(ConfigError, match="spectral"):
        ScenarioConfig.from_dict(d)


def test_peakon_count_must_match_initial_lists():
    d = {
        "model": "peakon",
        "grid": {"S": TWO_PI, "N_s": 64, "dt": 0.0125, "t_end": 0.05},
        "params": {
            "count": 2,
            "initial": {
                "q": [[[1.0, 0.0, HALF_PI]]],  # only one peakon given
                "m": [[[0.5, 0.0, HALF_PI]], []],
                "n": [[], []],
            },
        },
        "diagnostics": [],
        "output": {"directory": None, "cadence": 1},
    }
    with pytest.raises(ConfigError, match="2"):
        ScenarioConfig.from_dict(d)


def test_collision_branch_validated():
    d = {
        "model": "peakon_collision_exact",
        "grid": {"S": TWO_PI, "N_s": 64, "dt": 0.0125, "t_end": 0.05},
        "params": {
            "profile": {"type": "standing", "amplitude": 0.5, "wavenumber": 1.0},
            "branch": 0,
        },
        "diagnostics": [],
        "output": {"directory": None, "cadence": 1},
    }
    with pytest.raises(ConfigError, match="branch"):
        ScenarioConfig.from_dict(d)


def test_bad_profile_descriptor_is_config_error():
    d = single_exact_dict()
    d["params"]["profile"] = {"type": "sawtooth"}
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict(d)


def test_from_file_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        ScenarioConfig.from_file(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="valid JSON"):
        ScenarioConfig.from_file(bad)


def test_from_file_round_trip(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(chiral_dict()), encoding="utf-8")
    cfg = ScenarioConfig.from_file(path)
    assert cfg.n_steps == 8


def test_refined_halves_jointly():
    cfg = ScenarioConfig.from_dict(chiral_dict())
    fine = cfg.refined(2)
    assert fine.n_nodes == 128
    assert fine.dt == 0.00625
    assert fine.directory is None
    assert fine.n_steps == 16
    with pytest.raises(ConfigError):
        cfg.refined(0)


# ----------------------------------------------------------------- run_scenario


def test_chiral_run_report_shape():
    cfg = ScenarioConfig.from_dict(chiral_dict())
    rep = run_scenario(cfg)
    assert rep.status == "ok"
    assert rep.n_steps == 8
    assert len(rep.snapshots) == 9
    assert rep.times[0] == 0.0
    assert abs(rep.times[-1] - 0.1) < 1e-12
    assert set(rep.diagnostics) == {"zero_curvature"}
    cols = rep.diagnostics["zero_curvature"]["columns"]
    assert set(cols) == {"lam_0.5", "lam_1", "lam_2", "lam_-1"}
    # the pair degenerates to zero at lambda = -1, so its residual is exact
    np.testing.assert_array_equal(cols["lam_-1"], np.zeros(7))
    assert 0.0 < np.max(cols["lam_1"]) < 1e-2


def test_chiral_fixed_point_stays_exact():
    """Aligned constant fields u = v = e3 solve the model exactly; every
    snapshot and every curvature residual must be identically zero."""
    d = chiral_dict()
    d["params"]["initial"] = {
        "u": [[], [], [[1.0, 0.0, HALF_PI]]],
        "v": [[], [], [[1.0, 0.0, HALF_PI]]],
    }
    rep = run_scenario(ScenarioConfig.from_dict(d))
    for y in rep.snapshots:
        np.testing.assert_array_equal(y, rep.snapshots[0])
    for series in rep.diagnostics["zero_curvature"]["columns"].values():
        np.testing.assert_array_equal(series, np.zeros_like(series))


def test_spin_chain_run_compatibility_residual():
    d = chiral_dict()
    d["model"] = "spin_chain"
    d["params"]["A"] = [1.0, 2.0, 3.0]
    d["params"]["B"] = [2.0, 1.0, 1.0]
    rep = run_scenario(ScenarioConfig.from_dict(d))
    cols = rep.diagnostics["zero_curvature"]["columns"]
    assert set(cols) == {"residual"}
    assert 0.0 < np.max(cols["residual"]) < 1e-2


def test_aniso_xy_run_preserves_node_magnitudes():
    d = {
        "model": "aniso_xy",
        "grid": {"S": TWO_PI, "N_s": 64, "dt": 0.0125, "t_end": 0.1},
        "params": {
            "P": [1.0, 2.0, 3.0],
            "initial": {
                "X": [[[1.0, 0.0, HALF_PI]], [], []],
                "Y": [[], [[1.0, 0.0, HALF_PI]], []],
            },
        },
        "diagnostics": [{"kind": "invariant_drift"}],
        "output": {"directory": None, "cadence": 1},
    }
    rep = run_scenario(ScenarioConfig.from_dict(d))
    cols = rep.diagnostics["invariant_drift"]["columns"]
    assert np.max(cols["drift_X"]) < 1e-8
    assert np.max(cols["drift_Y"]) < 1e-8


def test_single_exact_reference_error_tracked():
    rep = run_scenario(ScenarioConfig.from_dict(single_exact_dict()))
    err = rep.reference_error["columns"]
    assert set(err) == {"err_Q", "err_M", "err_N"}
    assert err["err_Q"][0] == 0.0
    assert np.max(err["err_Q"]) < 2e-3
    assert np.max(rep.diagnostics["s_constraint"]["columns"]["residual"]) < 5e-3


def test_collision_run_away_from_interaction():
    """Profile 1 + small standing wave keeps h away from 0: no singularity."""
    d = {
        "model": "peakon_collision_exact",
        "grid": {"S": TWO_PI, "N_s": 64, "dt": 0.0125, "t_end": 0.1},
        "params": {
            "profile": {
                "type": "superposition",
                "parts": [
                    {"type": "traveling", "terms": [[1.0, 0.0, HALF_PI]], "direction": 1},
                    {"type": "standing", "amplitude": 0.25, "wavenumber": 1.0},
                ],
            },
            "branch": 1,
        },
        "diagnostics": [{"kind": "s_constraint"}, {"kind": "conservation_sums"}],
        "output": {"directory": None, "cadence": 1},
    }
    rep = run_scenario(ScenarioConfig.from_dict(d))
    assert rep.status == "ok"
    assert set(rep.reference_error["columns"]) == {"err_X"}
    assert np.max(rep.reference_error["columns"]["err_X"]) < 0.05
    sums = rep.diagnostics["conservation_sums"]["columns"]
    assert set(sums) == {"sum_M", "sum_N_skew"}
    assert np.max(np.abs(sums["sum_M"] - sums["sum_M"][0])) < 1e-10


def test_single_peakon_conservation_has_no_skew_column():
    d = single_exact_dict()
    d["diagnostics"] = [{"kind": "conservation_sums"}]
    rep = run_scenario(ScenarioConfig.from_dict(d))
    assert set(rep.diagnostics["conservation_sums"]["columns"]) == {"sum_M"}


def test_collision_hits_interaction_node():
    """With 64 nodes one grid point sits where h = 0 at t = 0: the two peakon
    positions coincide there and the coincidence guard must fire."""
    d = {
        "model": "peakon_collision_exact",
        "grid": {"S": TWO_PI, "N_s": 64, "dt": 0.0125, "t_end": 0.1},
        "params": {
            "profile": {"type": "standing", "amplitude": 0.5, "wavenumber": 1.0},
            "branch": 1,
        },
        "diagnostics": [],
        "output": {"directory": None, "cadence": 1},
    }
    with pytest.raises(SingularConfigurationError):
        run_scenario(ScenarioConfig.from_dict(d))


def test_blow_up_annotated_and_partial_outputs_written(tmp_path):
    d = chiral_dict()
    d["params"]["initial"]["u"] = [[[1e160, 1.0, 0.0]], [], []]
    out = tmp_path / "boom"
    d["output"]["directory"] = str(out)
    with pytest.raises(BlowUpError, match=r"step 1"):
        run_scenario(ScenarioConfig.from_dict(d))
    assert (out / "report.json").exists()
    assert (out / "u.csv").exists()
    report = json.loads((out / "report.json").read_text())
    assert report["status"].startswith("failed")


def test_runs_are_deterministic(tmp_path):
    d = chiral_dict()
    outs = []
    for name in ("a", "b"):
        d2 = copy.deepcopy(d)
        d2["output"]["directory"] = str(tmp_path / name)
        run_scenario(ScenarioConfig.from_dict(d2))
        outs.append(tmp_path / name)
    for fname in ("report.json", "u.csv", "v.csv", "zero_curvature.csv"):
        a = (outs[0] / fname).read_bytes()
        b = (outs[1] / fname).read_bytes()
        assert a == b, fname


def test_csv_round_trip_exact(tmp_path):
    d = chiral_dict()
    d["grid"]["t_end"] = 0.025
    d["output"]["directory"] = str(tmp_path / "run")
    rep = run_scenario(ScenarioConfig.from_dict(d))
    lines = (tmp_path / "run" / "u.csv").read_text().splitlines()
    assert lines[0] == "t,s_index,u_1,u_2,u_3"
    # 17 significant digits reproduce the binary doubles exactly
    t, idx, *comps = lines[1 + 64 * 2].split(",")  # first row of final snapshot
    assert float(t) == rep.times[2]
    assert int(idx) == 0
    np.testing.assert_array_equal(np.array(comps, dtype=float), rep.snapshots[2][0][0])


def test_report_summary_structure():
    rep = run_scenario(ScenarioConfig.from_dict(chiral_dict()))
    summary = rep.summary()
    assert summary["model"] == "chiral"
    assert summary["status"] == "ok"
    assert summary["n_steps"] == 8
    zc = summary["diagnostics"]["zero_curvature"]
    assert zc["max"] == max(zc["columns"].values())
    json.dumps(summary)  # must be serializable as-is


def test_out_dir_argument_overrides_config(tmp_path):
    cfg = ScenarioConfig.from_dict(chiral_dict())
    run_scenario(cfg, out_dir=tmp_path / "override")
    assert (tmp_path / "override" / "report.json").exists()


# ------------------------------------------------------------------ convergence


def test_convergence_study_chiral_order_two():
    d = chiral_dict()
    d["grid"]["N_s"] = 32
    d["grid"]["dt"] = 0.025
    d["grid"]["t_end"] = 0.2
    study = convergence_study(ScenarioConfig.from_dict(d), 3)
    assert [lvl["N_s"] for lvl in study["levels"]] == [32, 64, 128]
    assert study["levels"][2]["dt"] == 0.00625
    zc = study["diagnostics"]["zero_curvature"]
    assert zc["order"] is not None
    assert zc["order"] > 1.8
    assert all(o > 1.8 for o in zc["orders"])


def test_convergence_study_flags_floor_as_undefined():
    d = chiral_dict()
    d["params"]["initial"] = {
        "u": [[], [], [[1.0, 0.0, HALF_PI]]],
        "v": [[], [], [[1.0, 0.0, HALF_PI]]],
    }
    study = convergence_study(ScenarioConfig.from_dict(d), 3)
    zc = study["diagnostics"]["zero_curvature"]
    assert zc["order"] is None
    assert zc["orders"] is None


def test_convergence_study_needs_three_levels():
    with pytest.raises(ConfigError):
        convergence_study(ScenarioConfig.from_dict(chiral_dict()), 2)


def test_list_scenarios_registry():
    entries = list_scenarios()
    names = [name for name, _ in entries]
    assert len(entries) == 7
    assert set(names) == {
        "spin_chain",
        "chiral",
        "aniso_uv",
        "aniso_xy",
        "peakon",
        "peakon_single_exact",
        "peakon_collision_exact",
    }
    assert all(isinstance(desc, str) and desc for _, desc in entries)
