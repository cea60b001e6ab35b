"""Интеграционные тесты командной строки и воспроизведения исследования"""
import numpy as np
import pandas as pd
import pytest


@pytest.mark.integration
class TestCommandLine:
    """Полный цикл simulate → fit → predict → score через main()"""

    def test_full_pipeline(self, tmp_path, capsys):
        """Тест полного цикла на небольшом наборе данных"""
        from main import main

        data, chain, pred, metrics = (str(tmp_path / name) for name in ('data.csv', 'chain.csv', 'pred.csv',
                                                                           'metrics.csv'))
        assert main(['simulate', '--output', data, '--n', '200', '--seed', '1']) == 0
        assert main(['fit', '--data', data, '--output', chain, '--iterations', '40', '--m', '8', '--seed', '3',
                     '--graph-output', str(tmp_path / 'graph.txt')]) == 0
        assert main(['predict', '--data', data, '--draws', chain, '--output', pred, '--m', '8',
                     '--keep-draws']) == 0
        assert main(['score', '--predictions', pred, '--draws', chain, '--truth', data, '--metrics', metrics,
                     '--label', 'nn']) == 0

        predictions = pd.read_csv(pred)
        assert len(predictions) == 40
        assert np.all(predictions['lo95'] <= predictions['hi95'])
        table = pd.read_csv(metrics)
        assert list(table['label']) == ['nn']
        for column in ('MAE', 'RPMSE', 'CRPS', 'INT', 'WID', 'CVG', 'crps_beta0', 'energy'):
            assert column in table.columns
        assert (tmp_path / 'pred_draws.csv').exists()
        assert '✅' in capsys.readouterr().out

    def test_fit_is_reproducible(self, tmp_path):
        from main import main

        data = str(tmp_path / 'data.csv')
        main(['simulate', '--output', data, '--n', '150', '--seed', '4'])
        for name in ('a.csv', 'b.csv'):
            assert main(['fit', '--data', data, '--output', str(tmp_path / name), '--algorithm', 'fb',
                         '--epochs', '5', '--batches', '3', '--m', '6', '--seed', '8']) == 0
        first = pd.read_csv(tmp_path / 'a.csv')
        second = pd.read_csv(tmp_path / 'b.csv')
        columns = [c for c in first.columns if c != 'wall_ms']
        pd.testing.assert_frame_equal(first[columns], second[columns])
        assert len(first) == 15

    def test_config_file(self, tmp_path):
        from main import main

        data = tmp_path / 'data.csv'
        settings = tmp_path / 'simulate.cfg'
        settings.write_text(f"output = {data}\nn = 80\ntest-fraction = 0.25\n")
        assert main(['simulate', '--config', str(settings), '--seed', '5']) == 0
        frame = pd.read_csv(data)
        assert len(frame) == 80
        assert (frame['split'] == 'test').sum() == 20

    def test_presets_listing(self, capsys):
        """Тест: команда presets выводит все предустановки simulate"""
        from main import main
        from presets import SIMULATION_PRESETS

        assert main(['presets']) == 0
        out = capsys.readouterr().out
        for name, data in SIMULATION_PRESETS.items():
            assert name in out
            assert data['description'] in out

    def test_validation_exit_code(self, tmp_path, capsys):
        from main import main

        code = main(['fit', '--data', str(tmp_path / 'data.csv'), '--output', str(tmp_path / 'c.csv'),
                     '--algorithm', 'fb', '--epochs', '3'])
        assert code == 2
        assert '❌' in capsys.readouterr().out
        assert not (tmp_path / 'c.csv').exists()

    def test_missing_input_exit_code(self, tmp_path):
        from main import main

        code = main(['fit', '--data', str(tmp_path / 'absent.csv'), '--output', str(tmp_path / 'c.csv'),
                     '--iterations', '5'])
        assert code == 4

    def test_numerical_exit_code(self, tmp_path, mocker):
        from errors import NumericalError
        from handlers import fit_handler
        from main import main

        data = str(tmp_path / 'data.csv')
        main(['simulate', '--output', data, '--n', '60'])
        mocker.patch.object(fit_handler, 'run_chain', side_effect=NumericalError("Итерация 2: вырождение", index=5))
        code = main(['fit', '--data', data, '--output', str(tmp_path / 'c.csv'), '--iterations', '5'])
        assert code == 3

    def test_predict_rejects_other_dataset(self, tmp_path):
        from main import main

        first, second = str(tmp_path / 'one.csv'), str(tmp_path / 'two.csv')
        main(['simulate', '--output', first, '--n', '100', '--seed', '1'])
        main(['simulate', '--output', second, '--n', '100', '--seed', '2'])
        main(['fit', '--data', first, '--output', str(tmp_path / 'chain.csv'), '--iterations', '5', '--m', '5'])
        code = main(['predict', '--data', second, '--draws', str(tmp_path / 'chain.csv'),
                     '--output', str(tmp_path / 'pred.csv')])
        assert code == 2


@pytest.mark.slow
@pytest.mark.integration
class TestStudyReplica:
    """Уменьшенное воспроизведение имитационного исследования (--runslow)"""

    def test_estimates_and_interval_widths(self):
        """Тест: β в пределах 3 СКО, ширина интервалов растёт с уменьшением батча, RMSE и σ²ω/φ сопоставимы"""
        from model import PriorSpec
        from prediction import predict_at
        from samplers import DERIVED_NAME, AlgoConfig, posterior_summary, run_chain
        from scoring import prediction_metrics
        from simulation import simulate_dataset

        truth_beta = np.array([0.0, 1.0, -5.0])
        covered, sd_beta1, rmse = 0, {'nn': [], 'fb2': [], 'fb8': []}, {'nn': [], 'fb2': [], 'fb8': []}
        derived_mean, derived_sd = {'nn': [], 'fb2': [], 'fb8': []}, {'nn': [], 'fb2': [], 'fb8': []}
        hits, test_points = 0.0, 0
        for seed in range(5):
            dataset, _, kernel = simulate_dataset(2000, truth_beta, 1.0, 0.5, 0.236, seed=seed)
            train, test = dataset.train(), dataset.test()
            prior = PriorSpec.default(3)
            configs = {
                'nn': AlgoConfig(algorithm='nn', iterations=12_800, seed=seed, log_every=5000),
                'fb2': AlgoConfig(algorithm='fb', epochs=6400, batches=2, seed=seed, log_every=5000),
                'fb8': AlgoConfig(algorithm='fb', epochs=1600, batches=8, seed=seed, log_every=5000),
            }
            for name, config in configs.items():
                output = run_chain(train, config, prior, kernel)
                summary = posterior_summary(output)
                sd_beta1[name].append(summary.loc['beta1', 'sd'])
                prediction = predict_at(test.locations, test.X, train, output.kept_draws(), 15, kernel)
                metrics = prediction_metrics(prediction, test.y)
                rmse[name].append(metrics['RPMSE'])
                derived_mean[name].append(summary.loc[DERIVED_NAME, 'mean'])
                derived_sd[name].append(summary.loc[DERIVED_NAME, 'sd'])
                if name == 'nn':
                    hits += metrics['CVG'] * test.n
                    test_points += test.n
                    means = summary.loc[['beta0', 'beta1', 'beta2'], 'mean'].to_numpy()
                    sds = summary.loc[['beta0', 'beta1', 'beta2'], 'sd'].to_numpy()
                    covered += int(np.all(np.abs(means - truth_beta) <= 3.0 * sds))

        assert covered >= 4
        assert np.mean(sd_beta1['nn']) <= np.mean(sd_beta1['fb2']) <= np.mean(sd_beta1['fb8'])
        for name in ('fb2', 'fb8'):
            assert np.mean(rmse[name]) <= 1.1 * np.mean(rmse['nn'])
            assert np.mean(derived_mean[name]) == pytest.approx(np.mean(derived_mean['nn']), rel=0.1)
        assert np.mean(derived_sd['nn']) <= np.mean(derived_sd['fb2']) <= np.mean(derived_sd['fb8'])
        assert 0.90 <= hits / test_points <= 0.99

    def test_minibatch_iterations_are_cheaper(self):
        """Тест: итерация FB дешевле итерации NN на n = 20000"""
        from model import PriorSpec
        from samplers import AlgoConfig, run_chain
        from simulation import simulate_dataset

        dataset, _, kernel = simulate_dataset(20_000, [0.0, 1.0, -5.0], 1.0, 0.5, 0.236, m_sim=30,
                                              test_fraction=0.0, seed=0)
        prior = PriorSpec.default(3)
        timings = {}
        for name, config in {
            'nn': AlgoConfig(algorithm='nn', iterations=32, seed=1),
            'fb2': AlgoConfig(algorithm='fb', epochs=16, batches=2, seed=1),
            'fb16': AlgoConfig(algorithm='fb', epochs=2, batches=16, seed=1),
        }.items():
            output = run_chain(dataset, config, prior, kernel)
            timings[name] = output.wall_time.mean()

        assert timings['fb2'] <= 0.6 * timings['nn']
        assert timings['fb16'] <= 0.2 * timings['nn']
