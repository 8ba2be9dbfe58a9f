"""Config and weights file loading, validation, and path handling."""

import json
from pathlib import Path

import pytest

from facsim.config import (CalibrationSettings, RunConfig, load_config,
                           load_weights)
from facsim.distributions import InferenceType, JobMixDistribution
from facsim.errors import ConfigInvalid, ConfigParse
from facsim.profiles import WorkloadType

FLAT_TEMPORAL = {"hourly": [1] * 24, "day_of_week": [1] * 7, "monthly": [1] * 12}

JOB_MIX = {
    "type_probs": {"training": 0.7, "fine_tuning": 0.3},
    "node_count_probs": {"training": {"2": 0.6, "4": 0.4},
                         "fine_tuning": {"1": 1.0}},
}

INFERENCE_MIX = {
    "inference_mix": [
        {"name": "chat", "share": 0.619, "max_rate_pps": 50.0},
        {"name": "code", "share": 0.381, "max_rate_pps": 100.0,
         "nodes_per_instance": 2, "latency_cap_s": 2.5},
    ]
}


def write_json(path: Path, payload: dict) -> Path:
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def make_workspace(tmp_path: Path, mode="colocation", **overrides) -> Path:
    (tmp_path / "profiles").mkdir(exist_ok=True)
    mix = JOB_MIX if mode == "colocation" else INFERENCE_MIX
    write_json(tmp_path / "weights.json", {**FLAT_TEMPORAL, **mix})
    cfg = {
        "mode": mode,
        "n_nodes": 284,
        "targets": [0.3, 0.5],
        "profiles_dir": "profiles",
        "weights": "weights.json",
        **overrides,
    }
    return write_json(tmp_path / "run.json", cfg)


class TestLoadConfig:
    def test_defaults_and_path_resolution(self, tmp_path):
        cfg = load_config(make_workspace(tmp_path))
        assert cfg.mode == "colocation"
        assert cfg.n_nodes == 284
        assert cfg.targets == (0.3, 0.5)
        assert cfg.profiles_dir == (tmp_path / "profiles").resolve()
        assert cfg.weights_path == (tmp_path / "weights.json").resolve()
        assert cfg.out_dir is None
        assert cfg.days == 30
        assert cfg.timestep_s == 60.0
        assert cfg.idle_node_kw == 0.42
        assert cfg.node_tdp_kw == 3.52
        assert cfg.seed == 0
        assert cfg.calibration == CalibrationSettings()
        assert cfg.violations() == []

    def test_explicit_fields(self, tmp_path):
        path = make_workspace(tmp_path, days=7, timestep_s=300, seed=9,
                              out_dir="results", rated_power_mw=1.5,
                              calibration={"tolerance_pp": 0.2,
                                           "max_iterations": 10})
        cfg = load_config(path)
        assert cfg.days == 7
        assert cfg.out_dir == (tmp_path / "results").resolve()
        assert cfg.rated_power_mw == 1.5
        assert cfg.calibration.tolerance_pp == 0.2
        assert cfg.calibration.max_iterations == 10

    def test_unknown_key_rejected(self, tmp_path):
        path = make_workspace(tmp_path, node_count=12)
        with pytest.raises(ConfigParse, match="unknown keys.*node_count"):
            load_config(path)

    def test_missing_keys_listed(self, tmp_path):
        path = write_json(tmp_path / "run.json", {"mode": "colocation"})
        with pytest.raises(ConfigParse, match="missing keys") as err:
            load_config(path)
        for key in ("n_nodes", "targets", "profiles_dir", "weights"):
            assert key in str(err.value)

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigParse, match="not valid JSON"):
            load_config(path)

    def test_non_object_json(self, tmp_path):
        path = write_json(tmp_path / "run.json", [1, 2])  # type: ignore[arg-type]
        with pytest.raises(ConfigParse, match="JSON object"):
            load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigParse, match="cannot read"):
            load_config(tmp_path / "absent.json")

    def test_malformed_field_type(self, tmp_path):
        path = make_workspace(tmp_path, n_nodes="lots")
        with pytest.raises(ConfigParse, match="malformed field"):
            load_config(path)

    def test_calibration_must_be_object(self, tmp_path):
        path = make_workspace(tmp_path, calibration=[1, 2])
        with pytest.raises(ConfigParse, match="calibration must be an object"):
            load_config(path)


class TestViolations:
    def base(self, tmp_path, **overrides) -> RunConfig:
        (tmp_path / "profiles").mkdir(exist_ok=True)
        weights = write_json(tmp_path / "weights.json",
                             {**FLAT_TEMPORAL, **JOB_MIX})
        fields = dict(mode="colocation", n_nodes=16, targets=(0.5,),
                      profiles_dir=tmp_path / "profiles", weights_path=weights)
        fields.update(overrides)
        return RunConfig(**fields)

    def test_clean_config_validates(self, tmp_path):
        cfg = self.base(tmp_path)
        cfg.validate()

    def test_all_violations_collected(self, tmp_path):
        cfg = self.base(tmp_path, mode="batch", n_nodes=0,
                        targets=(0.5, 1.2, -0.1), timestep_s=7.0,
                        idle_node_kw=5.0, node_tdp_kw=3.0, seed=-1,
                        start="not-a-date")
        problems = cfg.violations()
        assert any("mode" in p for p in problems)
        assert any("n_nodes" in p for p in problems)
        assert sum("target out of (0,1]" in p for p in problems) == 2
        assert any("divide a day" in p for p in problems)
        assert any("idle_node_kw cannot exceed" in p for p in problems)
        assert any("seed" in p for p in problems)
        assert any("ISO date" in p for p in problems)
        assert len(problems) >= 8

    def test_validate_raises_with_everything(self, tmp_path):
        cfg = self.base(tmp_path, n_nodes=0, targets=(2.0,))
        with pytest.raises(ConfigInvalid) as err:
            cfg.validate()
        assert len(err.value.violations) == 2

    def test_boundary_targets(self, tmp_path):
        assert self.base(tmp_path, targets=(1.0,)).violations() == []
        assert self.base(tmp_path, targets=(0.0,)).violations() != []

    def test_missing_paths_reported(self, tmp_path):
        cfg = self.base(tmp_path, profiles_dir=tmp_path / "nope",
                        weights_path=tmp_path / "nope.json")
        problems = cfg.violations()
        assert any("profiles_dir" in p for p in problems)
        assert any("weights file" in p for p in problems)

    def test_empty_targets(self, tmp_path):
        cfg = self.base(tmp_path, targets=())
        assert any("non-empty" in p for p in cfg.violations())

    def test_grid_and_facility_builders(self, tmp_path):
        cfg = self.base(tmp_path, days=7, timestep_s=300.0)
        grid = cfg.grid()
        assert grid.n_steps == 7 * 288
        fac = cfg.facility()
        assert fac.n_total == 16
        assert fac.idle_floor_kw == pytest.approx(16 * 0.42)

    def test_echo_keys_cover_file_schema(self, tmp_path):
        from facsim.config import CONFIG_KEYS
        echo = self.base(tmp_path).echo()
        assert set(echo) == CONFIG_KEYS


class TestLoadWeights:
    def test_colocation_mix(self, tmp_path):
        path = write_json(tmp_path / "w.json", {**FLAT_TEMPORAL, **JOB_MIX})
        temporal, mix = load_weights(path, "colocation")
        assert temporal.hourly.size == 24
        assert isinstance(mix, JobMixDistribution)
        pairs = dict(mix.flat_pairs())
        assert pairs[(WorkloadType.TRAINING, 2)] == pytest.approx(0.42)

    def test_inference_mix(self, tmp_path):
        path = write_json(tmp_path / "w.json", {**FLAT_TEMPORAL, **INFERENCE_MIX})
        temporal, mix = load_weights(path, "inference")
        assert [t.name for t in mix] == ["chat", "code"]
        assert mix[1].nodes_per_instance == 2
        assert mix[1].latency_cap_s == 2.5
        assert sum(t.share for t in mix) == pytest.approx(1.0)

    def test_share_normalization(self, tmp_path):
        payload = {**FLAT_TEMPORAL,
                   "inference_mix": [
                       {"name": "a", "share": 3.0, "max_rate_pps": 10.0},
                       {"name": "b", "share": 1.0, "max_rate_pps": 10.0}]}
        _, mix = load_weights(write_json(tmp_path / "w.json", payload),
                              "inference")
        assert mix[0].share == pytest.approx(0.75)
        assert mix[1].share == pytest.approx(0.25)

    def test_duplicate_names_rejected(self, tmp_path):
        payload = {**FLAT_TEMPORAL,
                   "inference_mix": [
                       {"name": "a", "share": 0.5, "max_rate_pps": 10.0},
                       {"name": "a", "share": 0.5, "max_rate_pps": 20.0}]}
        with pytest.raises(ConfigParse, match="duplicate"):
            load_weights(write_json(tmp_path / "w.json", payload), "inference")

    def test_missing_temporal_key(self, tmp_path):
        payload = {k: v for k, v in {**FLAT_TEMPORAL, **JOB_MIX}.items()
                   if k != "monthly"}
        with pytest.raises(ConfigParse, match="missing monthly"):
            load_weights(write_json(tmp_path / "w.json", payload), "colocation")

    def test_unknown_key_rejected(self, tmp_path):
        payload = {**FLAT_TEMPORAL, **JOB_MIX, "quarterly": [1] * 4}
        with pytest.raises(ConfigParse, match="unknown keys.*quarterly"):
            load_weights(write_json(tmp_path / "w.json", payload), "colocation")

    def test_inference_needs_mix_list(self, tmp_path):
        path = write_json(tmp_path / "w.json", {**FLAT_TEMPORAL, **JOB_MIX})
        with pytest.raises(ConfigParse, match="inference_mix"):
            load_weights(path, "inference")

    def test_colocation_needs_job_mix(self, tmp_path):
        path = write_json(tmp_path / "w.json", {**FLAT_TEMPORAL, **INFERENCE_MIX})
        with pytest.raises(ConfigParse, match="type_probs"):
            load_weights(path, "colocation")

    def test_all_zero_hourly_rejected(self, tmp_path):
        payload = {**FLAT_TEMPORAL, **JOB_MIX, "hourly": [0] * 24}
        with pytest.raises(ConfigParse):
            load_weights(write_json(tmp_path / "w.json", payload), "colocation")

    def test_negative_weight_rejected(self, tmp_path):
        payload = {**FLAT_TEMPORAL, **JOB_MIX, "day_of_week": [1] * 6 + [-1]}
        with pytest.raises(ConfigParse):
            load_weights(write_json(tmp_path / "w.json", payload), "colocation")

    def test_wrong_length_rejected(self, tmp_path):
        payload = {**FLAT_TEMPORAL, **JOB_MIX, "hourly": [1] * 23}
        with pytest.raises(ConfigParse):
            load_weights(write_json(tmp_path / "w.json", payload), "colocation")

    def test_bad_workload_type_name(self, tmp_path):
        payload = {**FLAT_TEMPORAL,
                   "type_probs": {"speculation": 1.0},
                   "node_count_probs": {"speculation": {"1": 1.0}}}
        with pytest.raises(ConfigParse, match="bad job mix entry"):
            load_weights(write_json(tmp_path / "w.json", payload), "colocation")

    def test_zero_shares_rejected(self, tmp_path):
        payload = {**FLAT_TEMPORAL,
                   "inference_mix": [
                       {"name": "a", "share": 0.0, "max_rate_pps": 10.0}]}
        with pytest.raises(ConfigParse, match="all zero"):
            load_weights(write_json(tmp_path / "w.json", payload), "inference")

    def test_bad_mode(self, tmp_path):
        path = write_json(tmp_path / "w.json", {**FLAT_TEMPORAL, **JOB_MIX})
        with pytest.raises(ConfigParse, match="mode"):
            load_weights(path, "batch")
