"""Тесты для конфигурации запусков"""
import pytest

from errors import StorageError, ValidationError


@pytest.mark.unit
class TestLoadRunConfig:
    """Тесты модуля config.py"""

    def test_defaults(self):
        """Тест значений по умолчанию"""
        from config import load_run_config

        config = load_run_config('fit', {'data': 'd.csv', 'output': 'c.csv', 'iterations': '10'})
        assert config.algorithm == 'nn'
        assert config.m == 15
        assert config.iterations == 10
        assert config.proposal_scales == (0.5, 0.5)
        assert config.sources['m'] == 'default'
        assert config.sources['iterations'] == 'flag'

    def test_flag_beats_file(self, tmp_path):
        """Тест приоритета: флаг > файл > значение по умолчанию"""
        from config import load_run_config

        path = tmp_path / 'run.cfg'
        path.write_text("m = 25\nseed = 9\nbatch-fraction = 0.3\n")
        config = load_run_config('fit', {'data': 'd.csv', 'output': 'c.csv', 'iterations': 5, 'm': '7'}, str(path))
        assert config.m == 7
        assert config.seed == 9
        assert config.batch_fraction == 0.3
        assert config.sources['seed'] == 'file'

    def test_unknown_key_in_file(self, tmp_path):
        """Тест отказа на неизвестный ключ"""
        from config import load_run_config

        path = tmp_path / 'run.cfg'
        path.write_text("neighbours = 10\n")
        with pytest.raises(ValidationError, match="neighbours"):
            load_run_config('fit', {'data': 'd.csv', 'output': 'c.csv', 'iterations': 5}, str(path))

    def test_missing_file(self, tmp_path):
        from config import load_run_config

        with pytest.raises(StorageError):
            load_run_config('predict', {}, str(tmp_path / 'absent.cfg'))

    def test_all_problems_listed(self):
        """Тест сбора всех ошибок в одном сообщении"""
        from config import load_run_config

        with pytest.raises(ValidationError) as info:
            load_run_config('fit', {'data': 'd.csv', 'cutoff': '7', 'm': 'many', 'threads': '0'})
        message = str(info.value)
        assert '--output' in message
        assert 'cutoff' in message
        assert 'm: некорректное значение' in message
        assert 'threads' in message

    def test_fit_schedule_checked_before_compute(self):
        from config import load_run_config

        with pytest.raises(ValidationError, match="epochs"):
            load_run_config('fit', {'data': 'd.csv', 'output': 'c.csv', 'algorithm': 'fb', 'batches': '4'})

    def test_simulate_preset(self):
        """Тест предустановки исследования"""
        from config import load_run_config

        config = load_run_config('simulate', {'output': 'data.csv', 'preset': 'timing', 'n': '500'})
        assert config.n == 500
        assert config.m_sim == 30
        assert config.beta == (0.0, 1.0, -5.0)
        assert config.sources['m_sim'] == 'preset'

    def test_unknown_preset(self):
        from config import load_run_config

        with pytest.raises(ValidationError, match="huge"):
            load_run_config('simulate', {'output': 'data.csv', 'preset': 'huge'})

    def test_score_inputs(self):
        from config import load_run_config

        with pytest.raises(ValidationError, match="--predictions"):
            load_run_config('score', {'metrics': 'm.csv', 'draws': 'chain.csv'})
        config = load_run_config('score', {'metrics': 'm.csv', 'draws': 'chain.csv', 'truth': 'data.csv'})
        assert config.label == 'run'

    def test_boolean_and_lists(self):
        from config import load_run_config

        config = load_run_config('fit', {'data': 'd.csv', 'output': 'c.csv', 'iterations': 3,
                                         'adapt': 'no', 'fixed': 'beta, sigma2'})
        assert config.adapt is False
        assert config.fixed == ('beta', 'sigma2')

    def test_log_level_normalised(self):
        from config import load_run_config

        assert load_run_config('correction-dist', {'output': 'h.txt', 'log_level': 'debug'}).log_level == 'DEBUG'

    def test_defaults_and_unknown_attribute(self):
        """Тест значений по умолчанию и обращения к неизвестному полю"""
        from config import load_run_config

        config = load_run_config('predict', {'data': 'd.csv', 'draws': 'c.csv', 'output': 'p.csv'})
        assert config.max_draws == 500
        assert config.sources['max_draws'] == 'default'
        with pytest.raises(AttributeError):
            config.unknown_field


@pytest.mark.unit
class TestErrors:
    """Тесты кодов выхода ошибок"""

    def test_exit_codes(self):
        from errors import NumericalError, SamplerError, StorageError, ValidationError

        assert SamplerError.exit_code == 1
        assert ValidationError.exit_code == 2
        assert NumericalError.exit_code == 3
        assert StorageError.exit_code == 4
        assert issubclass(ValidationError, ValueError)
        assert NumericalError("x", index=4).index == 4
