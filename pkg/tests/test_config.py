import pytest

from aqmflow import ConfigError, ModelKind, parse_config
from aqmflow.aqm import PiConfig, RaqConfig, RemConfig
from aqmflow.presets import PRESET_DESCRIPTIONS, PRESETS, preset_config


class TestDefaults:
    def test_empty_config_yields_standard_bottleneck(self):
        cfg = parse_config("")
        assert cfg.params.n_flows == 500
        assert cfg.params.capacity == 5625.0
        assert cfg.params.prop_delay == 0.1
        assert cfg.params.buffer == 1125.0
        assert cfg.params.q_ref == 500.0
        assert cfg.params.ecn_on is True
        assert cfg.dt == 0.0005
        assert cfg.duration == 200.0
        assert isinstance(cfg.aqm, PiConfig)
        assert cfg.aqm.T == 0.005
        assert cfg.aqm.a == 1.822e-5 and cfg.aqm.b == 1.816e-5
        assert [m.kind for m in cfg.models] == [ModelKind.SCENARIO_B]

    def test_comments_and_blanks_ignored(self):
        cfg = parse_config("# a comment\n\nn_flows = 200  # trailing\n")
        assert cfg.params.n_flows == 200


class TestParsing:
    def test_capacity_converted_from_mbps(self):
        cfg = parse_config("capacity_mbps = 15")
        assert cfg.params.capacity == 1875.0

    def test_model_list_with_rho(self):
        cfg = parse_config("model = mgt, scenario_b:1, scenario_b:1.5318\n")
        kinds = [(m.kind, m.rho) for m in cfg.models]
        assert kinds == [
            (ModelKind.MGT_TRUNCATED, 1.0),
            (ModelKind.SCENARIO_B, 1.0),
            (ModelKind.SCENARIO_B, 1.5318),
        ]

    def test_model_all_expands(self):
        cfg = parse_config("model = all\nrho = 2.5\n")
        kinds = [(m.kind, m.rho) for m in cfg.models]
        assert kinds == [
            (ModelKind.MGT_TRUNCATED, 1.0),
            (ModelKind.SCENARIO_A, 2.5),
            (ModelKind.SCENARIO_B, 2.5),
        ]

    def test_aqm_selection(self):
        assert isinstance(parse_config("aqm.kind = rem").aqm, RemConfig)
        assert isinstance(parse_config("aqm.kind = raq").aqm, RaqConfig)

    def test_schedule_parsing(self):
        cfg = parse_config("n_flows = 300\nschedule = 65:+200, 130:-200\n")
        assert cfg.schedule == ((65.0, 200), (130.0, -200))

    def test_ecn_off(self):
        assert parse_config("ecn = off").params.ecn_on is False


class TestErrors:
    def test_unknown_key_carries_line_number(self):
        with pytest.raises(ConfigError) as err:
            parse_config("n_flows = 500\nbogus = 1\n")
        assert "line 2" in str(err.value)
        assert "bogus" in str(err.value)

    def test_malformed_number_carries_line_number(self):
        with pytest.raises(ConfigError) as err:
            parse_config("\n\nq_ref = five hundred\n")
        assert "line 3" in str(err.value)

    def test_missing_equals_sign(self):
        with pytest.raises(ConfigError) as err:
            parse_config("just words\n")
        assert "line 1" in str(err.value)

    def test_dt_above_aqm_period_rejected(self):
        with pytest.raises(ConfigError) as err:
            parse_config("dt = 0.01\naqm.T = 0.005\n")
        assert "sampling period" in str(err.value)

    def test_period_not_multiple_of_dt_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("dt = 0.0004\n")

    def test_schedule_time_out_of_range(self):
        with pytest.raises(ConfigError):
            parse_config("duration = 100\nschedule = 150:+10\n")

    def test_schedule_population_floor(self):
        with pytest.raises(ConfigError):
            parse_config("n_flows = 100\nschedule = 10:-200\n")

    def test_unknown_model(self):
        with pytest.raises(ConfigError):
            parse_config("model = reno\n")

    def test_rho_out_of_range(self):
        with pytest.raises(ConfigError):
            parse_config("n_flows = 10\nmodel = scenario_b:50\n")

    def test_invariant_violation_reported(self):
        with pytest.raises(ConfigError):
            parse_config("q_ref = 2000\nbuffer = 1125\n")


class TestPrecedence:
    def test_file_overrides_preset(self):
        cfg = parse_config("n_flows = 42\n", preset=PRESETS["fig-pi-n200"])
        assert cfg.params.n_flows == 42

    def test_overrides_beat_file(self):
        cfg = parse_config("n_flows = 42\n", overrides={"n_flows": "7"})
        assert cfg.params.n_flows == 7

    def test_unknown_override_key_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("", overrides={"bogus": "1"})


class TestPresets:
    def test_every_preset_parses(self):
        for name in PRESETS:
            cfg = preset_config(name)
            assert cfg.label == name
            assert name in PRESET_DESCRIPTIONS

    def test_severe_case_preset(self):
        cfg = preset_config("fig-pi-n2000")
        assert cfg.params.n_flows == 2000
        assert isinstance(cfg.aqm, PiConfig)
        assert ModelKind.SCENARIO_A in {m.kind for m in cfg.models}

    def test_vary_n_preset(self):
        cfg = preset_config("vary-n")
        assert cfg.params.n_flows == 300
        assert cfg.schedule == ((65.0, 200), (130.0, -200))

    def test_drop_mode_preset(self):
        cfg = preset_config("ecn-off-n500")
        assert cfg.params.ecn_on is False
        assert any(m.rho == 1.9789 for m in cfg.models)

    def test_coarse_step_preset(self):
        cfg = preset_config("dt-02")
        assert cfg.dt == 0.2
        assert cfg.aqm.T == 0.2
        assert isinstance(cfg.aqm, RaqConfig)

    def test_unknown_preset(self):
        with pytest.raises(KeyError):
            preset_config("nope")

    def test_every_preset_runs_end_to_end(self):
        # shortened horizons; exercises every preset's full model list
        from aqmflow import parse_config, run_experiment

        for name, overrides in PRESETS.items():
            shortened = {"duration": "16", "stride": "40"}
            if overrides.get("schedule"):
                shortened["schedule"] = "5:+200, 10:-200"
            cfg = parse_config(preset=overrides, overrides=shortened)
            results = run_experiment(cfg)
            assert len(results) == len(cfg.models)
            for res in results:
                assert (res.series.q >= 0).all()
                assert (res.series.q <= cfg.params.buffer).all()
