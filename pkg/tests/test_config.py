"""Tests for configuration layering and the error-to-exit-code mapping."""

import json

import pytest

from config import CACHE_DIR_ENV, RunConfig, build_config, config_keys, load_config_file
from errors import (
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    EXIT_VALIDATION,
    ConfigError,
    NumericalError,
    ValidationFailure,
    exit_code_for,
)


def write_config(tmp_path, values):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps(values))
    return str(path)


class TestRunConfig:

    def test_defaults(self):
        config = RunConfig()
        assert config.sizes == [128, 256, 512, 1024, 1280, 1536, 1792, 2048, 4096]
        assert config.grid == 'ns-even'
        assert config.fine_range == (0.8, 1.1)
        assert config.collapse_sizes == [256, 512, 1024, 2048]

    def test_odd_sizes_need_odd_grid(self):
        with pytest.raises(ConfigError, match="even sizes"):
            RunConfig(sizes=[101])

    def test_odd_grid_accepts_odd_sizes(self):
        config = RunConfig(sizes=[101, 401], fit_sizes=[101, 201, 401, 801], collapse_sizes=[101, 201, 401],
                           pindex_sizes=[1001, 1201, 1401, 1601], grid='odd-ring')
        assert config.sizes == [101, 401]

    @pytest.mark.parametrize("key, value", [
        ('workers', 0),
        ('check_stride', -1),
        ('collapse_window', 0.0),
        ('asymptotic_window', (0.98, 0.9)),
        ('lambda_fine', 0.0),
        ('grid', 'periodic'),
    ])
    def test_invalid_values(self, key, value):
        with pytest.raises(ConfigError):
            RunConfig(**{key: value})

    def test_sizes_above_maximum(self):
        with pytest.raises(ConfigError, match="max_sites"):
            RunConfig(sizes=[64, 128], max_sites=100)

    def test_default_sweep_covers_pindex_window(self):
        config = RunConfig()
        swept = [n for n in config.pindex_sizes if n in config.sizes]
        assert len(swept) >= 4

    @pytest.mark.parametrize("command, values", [
        ('sweep', {'sizes': [101, 201]}),
        ('scaling', {'fit_sizes': [33, 65, 129], 'collapse_sizes': [65, 129], 'asymptotic_size': 257}),
        ('validate', {'validate_sizes': [5, 7]}),
    ])
    def test_parity_checked_per_command(self, command, values):
        config = RunConfig(grid='odd-ring', command=command, **values)
        assert config.grid == 'odd-ring'
        with pytest.raises(ConfigError, match="odd sizes"):
            config.validate()

    def test_sweep_ignores_scaling_lists_above_max_sites(self):
        config = RunConfig(sizes=[64], max_sites=100, command='sweep')
        assert config.max_sites == 100

    def test_to_dict_is_json_ready(self):
        values = RunConfig().to_dict()
        assert json.loads(json.dumps(values)) == values
        assert set(values) == set(config_keys())


class TestBuildConfig:

    def test_precedence(self, tmp_path):
        path = write_config(tmp_path, {'workers': 3, 'cache_dir': 'from_file', 'output_dir': 'file_out'})
        config = build_config(path, {'workers': 5, 'output_dir': None}, environ={CACHE_DIR_ENV: 'from_env'})
        assert config.workers == 5
        assert config.output_dir == 'file_out'
        assert config.cache_dir == 'from_env'

    def test_override_beats_environment(self):
        config = build_config(None, {'cache_dir': 'flag'}, environ={CACHE_DIR_ENV: 'from_env'})
        assert config.cache_dir == 'flag'

    def test_command_scopes_parity(self):
        overrides = {'grid': 'odd-ring', 'sizes': [101, 201]}
        assert build_config(None, overrides, environ={}, command='sweep').sizes == [101, 201]
        with pytest.raises(ConfigError, match="fit_sizes"):
            build_config(None, overrides, environ={})

    def test_unknown_key(self, tmp_path):
        path = write_config(tmp_path, {'workers': 2, 'colour': 'blue'})
        with pytest.raises(ConfigError, match="colour"):
            load_config_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            build_config(str(tmp_path / 'absent.json'), environ={})

    def test_not_an_object(self, tmp_path):
        path = tmp_path / 'list.json'
        path.write_text('[1, 2]')
        with pytest.raises(ConfigError, match="JSON object"):
            load_config_file(str(path))

    def test_invalid_json(self, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('{"workers": ')
        with pytest.raises(ConfigError, match="not valid JSON"):
            load_config_file(str(path))


class TestExitCodes:

    @pytest.mark.parametrize("error, code", [
        (ValidationFailure("off"), EXIT_VALIDATION),
        (ConfigError("bad"), EXIT_CONFIG),
        (ValueError("bad"), EXIT_CONFIG),
        (FileNotFoundError("gone"), EXIT_CONFIG),
        (NumericalError("drift"), EXIT_NUMERICAL),
        (RuntimeError("other"), EXIT_NUMERICAL),
    ])
    def test_mapping(self, error, code):
        assert exit_code_for(error) == code
