import pytest

from platoonsim.config import (
    ConfigError,
    Settings,
    apply_profile,
    dump_config,
    load_config,
    parse_config,
    settings_mapping,
)


class TestParse:
    def test_defaults_without_overrides(self):
        settings = parse_config("")
        assert settings == Settings()
        assert settings.mac_slot_us == 13.0
        assert settings.swarm_m == 15
        assert settings.topo_a == 0.5

    def test_overrides_and_comments(self):
        text = """
        # experiment tweak
        topo.n = 8
        mac.p_error = 0.0   # clean channel
        swarm.iter_limit = 10
        seed = 99
        """
        settings = parse_config(text)
        assert settings.topo_n == 8
        assert settings.mac_p_error == 0.0
        assert settings.swarm_iter_limit == 10
        assert settings.seed == 99

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config("mac.slot = 13")

    def test_bad_value_rejected(self):
        with pytest.raises(ConfigError, match="bad value"):
            parse_config("topo.n = six")

    def test_garbage_line_rejected(self):
        with pytest.raises(ConfigError, match="key = value"):
            parse_config("just some words")

    def test_bool_key(self):
        assert parse_config("swarm.per_component_r = true").swarm_per_component_r
        assert not parse_config("swarm.per_component_r = off").swarm_per_component_r
        with pytest.raises(ConfigError):
            parse_config("swarm.per_component_r = maybe")


class TestRoundTrip:
    def test_dump_and_reload(self, tmp_path):
        settings = parse_config("topo.n = 10\nseed = 3\nmac.p_error = 0.05")
        path = tmp_path / "run.cfg"
        path.write_text(dump_config(settings))
        assert load_config(path) == settings

    def test_mapping_uses_documented_keys(self):
        mapping = settings_mapping(Settings())
        for key in (
            "mac.slot_us",
            "mac.payload_bits",
            "topo.n",
            "sim.window_us",
            "swarm.dcw_max",
            "pipeline.d_avg_factor",
            "seed",
        ):
            assert key in mapping

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "absent.cfg")


class TestProfiles:
    def test_full_is_identity(self):
        settings = Settings()
        assert apply_profile(settings, "full") == settings

    def test_fast_shrinks_budgets(self):
        fast = apply_profile(Settings(), "fast")
        assert fast.sim_window_us == 500_000.0
        assert fast.sim_warmup_us == 200_000.0
        assert fast.swarm_iter_limit == 60

    def test_fast_never_raises_budget(self):
        small = parse_config("swarm.iter_limit = 5")
        assert apply_profile(small, "fast").swarm_iter_limit == 5

    def test_unknown_profile(self):
        with pytest.raises(ConfigError):
            apply_profile(Settings(), "turbo")
