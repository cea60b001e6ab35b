"""Тесты корректирующего распределения и правил принятия θ"""
import numpy as np
import pytest
from scipy.stats import logistic

from errors import NumericalError, ValidationError


def constant_lambda(total: float, n: int):
    """Λᵢ = total / n для всех i, так что nΛ̄_B = total при любом B"""
    return lambda rows: np.full(np.asarray(rows).size, total / n)


@pytest.mark.unit
class TestBatchGate:
    """Тесты условия роста батча"""

    def test_worked_example(self):
        from acceptance import batch_gate
        from gibbs import finite_population_variance

        assert finite_population_variance(100, 50, 0.01) == pytest.approx(1.4213, abs=1e-4)
        assert batch_gate(100, 50, 0.01, 3.0) is False

    def test_zero_variance_never_grows(self):
        from acceptance import batch_gate

        for size in (1, 10, 99, 100):
            assert batch_gate(100, size, 0.0, 0.5) is False

    def test_gate_decreases_with_batch_size(self):
        from gibbs import finite_population_variance

        values = [finite_population_variance(500, size, 0.3) for size in range(1, 501)]
        assert np.all(np.diff(values) < 0.0)

    def test_invalid_batch_size(self):
        from acceptance import batch_gate

        with pytest.raises(ValidationError):
            batch_gate(10, 11, 0.1, 1.0)
        with pytest.raises(ValidationError):
            batch_gate(10, 5, -0.1, 1.0)

    def test_sample_variance(self):
        from acceptance import estimate_sigma2_lambda

        assert estimate_sigma2_lambda([0.0, 2.0]) == pytest.approx(2.0)
        with pytest.raises(ValidationError):
            estimate_sigma2_lambda([1.0])


@pytest.mark.unit
class TestCorrectionDistribution:
    """Тесты оценки h(·|c)"""

    def test_certified_at_unit_cutoff(self, correction_c1):
        from acceptance import TARGET_SUP_ERROR

        assert correction_c1.c == 1.0
        assert correction_c1.sup_error <= TARGET_SUP_ERROR
        assert correction_c1.mass.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(correction_c1.mass >= 0.0)
        assert correction_c1.grid[0] == -15.0 and correction_c1.grid[-1] == 15.0

    def test_convolution_approximates_logistic(self, correction_c1):
        from acceptance import convolution_design

        points = np.linspace(-15.0, 15.0, 3001)
        density = convolution_design(1.0, correction_c1.grid, points) @ correction_c1.mass
        assert np.max(np.abs(density - logistic.pdf(points))) <= 0.01

    def test_moments(self, correction_c1):
        assert correction_c1.mean == pytest.approx(0.0, abs=0.02)
        variance = correction_c1.grid ** 2 @ correction_c1.mass - correction_c1.mean ** 2
        assert variance == pytest.approx(np.pi ** 2 / 3.0 - 1.0, abs=0.3)

    def test_error_grows_with_cutoff(self):
        from acceptance import EVAL_STEP, GRID_BOUND, GRID_STEP, _fit, select_penalty

        penalty = select_penalty(1.0)
        _, _, error_1 = _fit(1.0, penalty, GRID_BOUND, GRID_STEP, EVAL_STEP)
        _, _, error_3 = _fit(3.0, penalty, GRID_BOUND, GRID_STEP, EVAL_STEP)
        assert error_3 > error_1

    def test_samples_lie_on_grid(self, correction_c1, rng):
        draws = correction_c1.sample(rng, size=5000)
        assert np.all(np.isin(draws, correction_c1.grid))
        assert draws.mean() == pytest.approx(correction_c1.mean, abs=0.1)
        assert isinstance(correction_c1.sample(rng), float)

    def test_sampling_is_by_mass(self, rng):
        from acceptance import CorrectionDistribution

        cd = CorrectionDistribution(grid=[-1.0, 0.0, 1.0], mass=[0.2, 0.0, 0.8], c=1.0, sup_error=0.0)
        draws = cd.sample(rng, size=20000)
        assert not np.any(draws == 0.0)
        assert np.mean(draws == 1.0) == pytest.approx(0.8, abs=0.02)

    def test_uncertified_distribution_rejected(self):
        from acceptance import CorrectionDistribution

        with pytest.raises(NumericalError):
            CorrectionDistribution(grid=[0.0], mass=[1.0], c=1.0, sup_error=0.05)

    def test_invalid_inputs(self):
        from acceptance import CorrectionDistribution, estimate_correction_distribution

        with pytest.raises(ValidationError):
            estimate_correction_distribution(4.0)
        with pytest.raises(ValidationError):
            CorrectionDistribution(grid=[0.0, 1.0], mass=[0.5, 0.6], c=1.0, sup_error=0.0)
        with pytest.raises(ValidationError):
            CorrectionDistribution(grid=[1.0, 0.0], mass=[0.5, 0.5], c=1.0, sup_error=0.0)


@pytest.mark.unit
class TestBarkerStep:
    """Тесты адаптивного теста Баркера"""

    def test_identical_proposal_is_coin_flip(self, correction_c1, rng):
        from acceptance import BarkerSettings, barker_accept_step

        settings = BarkerSettings(cutoff=1.0, b_init=10, b_inc=10)
        accepted = [barker_accept_step("prop", "cur", constant_lambda(0.0, 50), 50, 0.0, correction_c1,
                                       settings, rng)[1].accepted for _ in range(10000)]
        assert np.mean(accepted) == pytest.approx(0.5, abs=0.02)

    @pytest.mark.parametrize("log_r", [-2.0, 0.7])
    def test_full_batch_accepts_with_barker_probability(self, log_r, correction_c1, rng):
        from acceptance import BarkerSettings, barker_accept_step

        settings = BarkerSettings(cutoff=1.0, force_full_batch=True)
        results = [barker_accept_step(1, 0, constant_lambda(log_r, 20), 20, 0.0, correction_c1, settings, rng)
                   for _ in range(20000)]
        assert all(diag.batch_size == 20 for _, diag in results)
        rate = np.mean([theta == 1 for theta, _ in results])
        assert rate == pytest.approx(1.0 / (1.0 + np.exp(-log_r)), abs=0.015)

    def test_batch_grows_until_gate_closes(self, correction_c1, rng):
        from acceptance import BarkerSettings, barker_accept_step

        values = np.random.default_rng(1).standard_normal(1000)
        settings = BarkerSettings(cutoff=1.0, b_init=100, b_inc=100)
        _, diag = barker_accept_step(1, 0, lambda rows: values[rows], 1000, 0.0, correction_c1, settings, rng)
        assert diag.batch_size == 1000
        assert diag.gate_value == 0.0

    def test_quiet_terms_keep_initial_batch(self, correction_c1, rng):
        from acceptance import BarkerSettings, barker_accept_step

        values = np.random.default_rng(2).normal(0.0, 1e-6, 1000)
        calls = []

        def lambda_fn(rows):
            calls.append(rows.size)
            return values[rows]

        settings = BarkerSettings(cutoff=1.0, b_init=100, b_inc=100)
        _, diag = barker_accept_step(1, 0, lambda_fn, 1000, 0.0, correction_c1, settings, rng)
        assert calls == [100]
        assert diag.batch_size == 100
        assert 0.0 < diag.gate_value <= 1.0
        assert diag.classical_value < diag.gate_value

    def test_rows_are_distinct_and_sorted(self, correction_c1, rng):
        from acceptance import BarkerSettings, barker_accept_step

        seen = []

        def lambda_fn(rows):
            assert np.all(np.diff(rows) > 0)
            seen.extend(rows.tolist())
            return np.ones(rows.size) * (len(seen) % 3)

        settings = BarkerSettings(cutoff=1.0, b_init=5, b_inc=7)
        barker_accept_step(1, 0, lambda_fn, 60, 0.0, correction_c1, settings, rng)
        assert len(seen) == len(set(seen))

    def test_cutoff_mismatch(self, correction_c1, rng):
        from acceptance import BarkerSettings, barker_accept_step

        with pytest.raises(ValidationError):
            barker_accept_step(1, 0, constant_lambda(0.0, 10), 10, 0.0, correction_c1,
                               BarkerSettings(cutoff=2.0), rng)


@pytest.mark.unit
class TestMetropolisStep:
    """Тесты минибатч-теста Метрополиса–Гастингса"""

    def test_neutral_proposal_always_accepted(self, rng):
        from acceptance import mh_accept_step

        for _ in range(200):
            theta, diag = mh_accept_step(1, 0, constant_lambda(0.0, 30), np.arange(30), 30, 0.0, rng)
            assert theta == 1 and diag.accepted

    def test_full_batch_is_exact(self, rng):
        from acceptance import mh_accept_step

        results = [mh_accept_step(1, 0, constant_lambda(-0.5, 25), np.arange(25), 25, -0.5, rng)[0]
                   for _ in range(20000)]
        assert np.mean(np.array(results) == 1) == pytest.approx(np.exp(-1.0), abs=0.015)

    def test_scaling_by_batch(self, rng):
        from acceptance import mh_accept_step

        values = np.linspace(-1.0, 1.0, 40)
        _, diag = mh_accept_step(1, 0, lambda rows: values[rows], np.array([0, 1, 2, 3]), 40, 0.0, rng)
        assert diag.batch_size == 4
        assert diag.sigma2_lambda == pytest.approx(np.var(values[:4], ddof=1))
        assert diag.delta >= 40 / 4 * values[:4].sum()

    def test_bad_batch(self, rng):
        from acceptance import mh_accept_step

        with pytest.raises(ValidationError):
            mh_accept_step(1, 0, constant_lambda(0.0, 5), np.array([0, 0]), 5, 0.0, rng)
