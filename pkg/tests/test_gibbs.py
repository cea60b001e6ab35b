"""Тесты сопряжённых шагов Гиббса и минибатч-оценок сумм"""
import numpy as np
import pytest

from errors import ValidationError


@pytest.fixture
def full_cache(small_dataset, small_params, kernel):
    """Кэш с M = n − 1: условные распределения совпадают с точными"""
    from neighbors import build_neighbor_sets
    from vecchia import build_conditional_cache

    graph = build_neighbor_sets(small_dataset.locations, small_dataset.n - 1)
    return build_conditional_cache(graph, small_params.omega, small_params.phi, kernel, small_dataset)


def dense_precision(dataset, params, kernel):
    from model import correlation_matrix
    return np.linalg.inv(correlation_matrix(dataset.locations, params.omega, params.phi, kernel))


@pytest.mark.unit
class TestConjugateConditionals:
    """При B = n и M = n − 1 условные распределения совпадают с плотной сопряжённой формой"""

    @pytest.mark.parametrize("p", [0, 1])
    def test_beta_matches_dense(self, p, full_cache, small_dataset, small_params, kernel):
        from gibbs import beta_conditional, minibatch_sum
        from model import PriorSpec

        prior = PriorSpec(beta_mean=[0.5, -0.5], beta_var=[10.0, 4.0])
        batch = np.arange(small_dataset.n)
        sum_q1 = minibatch_sum(1, p, batch, full_cache, small_params.beta).value
        sum_q2 = minibatch_sum(2, p, batch, full_cache, small_params.beta).value
        mean, variance = beta_conditional(p, sum_q1, sum_q2, small_params.sigma2, prior)

        Q = dense_precision(small_dataset, small_params, kernel)
        X = small_dataset.X
        others = [k for k in range(2) if k != p]
        partial = small_dataset.y - X[:, others] @ small_params.beta[others]
        expected_var = 1.0 / (X[:, p] @ Q @ X[:, p] / small_params.sigma2 + 1.0 / prior.beta_var[p])
        expected_mean = expected_var * (X[:, p] @ Q @ partial / small_params.sigma2
                                        + prior.beta_mean[p] / prior.beta_var[p])
        assert variance == pytest.approx(expected_var, rel=1e-8)
        assert mean == pytest.approx(expected_mean, rel=1e-8, abs=1e-10)

    def test_sigma2_matches_dense(self, full_cache, small_dataset, small_params, kernel):
        from gibbs import minibatch_sum, sigma2_conditional
        from model import PriorSpec

        prior = PriorSpec.default(2, sigma2_shape=2.0, sigma2_rate=0.5)
        estimate = minibatch_sum(3, 0, np.arange(small_dataset.n), full_cache, small_params.beta)
        shape, rate = sigma2_conditional(estimate.value, prior, small_dataset.n)

        Q = dense_precision(small_dataset, small_params, kernel)
        resid = small_dataset.y - small_dataset.X @ small_params.beta
        assert shape == 64 / 2.0 + 2.0
        assert rate == pytest.approx(resid @ Q @ resid / 2.0 + 0.5, rel=1e-8)

    def test_beta_draws_match_dense_posterior(self, full_cache, small_dataset, small_params, kernel):
        """Тест: выборки βₚ воспроизводят плотное сопряжённое среднее и дисперсию"""
        from gibbs import draw_beta_p, minibatch_sum
        from model import PriorSpec

        prior = PriorSpec(beta_mean=[0.0, 1.0], beta_var=[5.0, 2.0])
        batch = np.arange(small_dataset.n)
        sum_q1 = minibatch_sum(1, 1, batch, full_cache, small_params.beta).value
        sum_q2 = minibatch_sum(2, 1, batch, full_cache, small_params.beta).value
        gen = np.random.default_rng(17)
        draws = np.array([draw_beta_p(1, sum_q1, sum_q2, small_params.sigma2, prior, gen) for _ in range(20000)])

        Q = dense_precision(small_dataset, small_params, kernel)
        x = small_dataset.X[:, 1]
        partial = small_dataset.y - small_dataset.X[:, 0] * small_params.beta[0]
        expected_var = 1.0 / (x @ Q @ x / small_params.sigma2 + 1.0 / prior.beta_var[1])
        expected_mean = expected_var * (x @ Q @ partial / small_params.sigma2 + prior.beta_mean[1] / prior.beta_var[1])
        assert abs(draws.mean() - expected_mean) < 4.0 * np.sqrt(expected_var / draws.size)
        assert draws.var(ddof=1) == pytest.approx(expected_var, rel=0.05)

    def test_full_batch_has_no_clt_variance(self, full_cache, small_dataset, small_params):
        from gibbs import minibatch_sum

        estimate = minibatch_sum(3, 0, np.arange(small_dataset.n), full_cache, small_params.beta)
        assert estimate.clt_variance == 0.0
        assert estimate.clt_variance_classical == 0.0

    def test_sigma2_draws_have_inverse_gamma_mean(self, rng):
        from gibbs import draw_sigma2
        from model import PriorSpec

        prior = PriorSpec.default(1, sigma2_shape=3.0, sigma2_rate=2.0)
        draws = np.array([draw_sigma2(40.0, prior, 60, rng) for _ in range(2000)])
        shape, rate = 60 / 2.0 + 3.0, 40.0 / 2.0 + 2.0
        assert np.all(draws > 0.0)
        assert draws.mean() == pytest.approx(rate / (shape - 1.0), rel=0.03)

    def test_tight_prior_pins_beta(self, full_cache, small_dataset, small_params, rng):
        from gibbs import update_beta
        from model import PriorSpec

        prior = PriorSpec(beta_mean=[7.0, -3.0], beta_var=[1e-12, 1e-12])
        beta = update_beta(small_params.beta, np.arange(small_dataset.n), full_cache, small_params.sigma2,
                           prior, rng)
        assert beta == pytest.approx([7.0, -3.0], abs=1e-4)

    def test_update_is_reproducible(self, full_cache, small_params):
        from gibbs import update_beta, update_sigma2
        from model import PriorSpec

        prior = PriorSpec.default(2)
        batch = np.arange(0, 64, 4)
        runs = []
        for _ in range(2):
            gen = np.random.default_rng(99)
            beta = update_beta(small_params.beta, batch, full_cache, small_params.sigma2, prior, gen)
            runs.append((beta, update_sigma2(beta, batch, full_cache, prior, gen)))
        assert np.array_equal(runs[0][0], runs[1][0])
        assert runs[0][1] == runs[1][1]

    def test_negative_q3_rejected(self):
        from gibbs import sigma2_conditional
        from model import PriorSpec

        with pytest.raises(ValidationError):
            sigma2_conditional(-1.0, PriorSpec.default(1), 10)


@pytest.mark.unit
class TestMinibatchEstimates:
    """Тесты минибатч-оценки Σ q_j и её дисперсии"""

    def test_scaling(self, full_cache, small_params):
        from gibbs import minibatch_sum
        from vecchia import compute_q

        batch = np.array([1, 5, 9, 30])
        estimate = minibatch_sum(3, 0, batch, full_cache, small_params.beta)
        q3 = compute_q(batch, 0, full_cache, small_params.beta)[2]
        assert estimate.value == pytest.approx(64 / 4 * q3.sum())
        assert estimate.sigma2_q == pytest.approx(np.var(q3, ddof=1))
        assert estimate.clt_variance > estimate.clt_variance_classical

    def test_invalid_batches(self, full_cache, small_params):
        from gibbs import minibatch_sum

        with pytest.raises(ValidationError):
            minibatch_sum(3, 0, np.array([], dtype=int), full_cache, small_params.beta)
        with pytest.raises(ValidationError):
            minibatch_sum(3, 0, np.array([1, 1]), full_cache, small_params.beta)
        with pytest.raises(ValidationError):
            minibatch_sum(3, 0, np.array([64]), full_cache, small_params.beta)
        with pytest.raises(ValidationError):
            minibatch_sum(4, 0, np.array([1]), full_cache, small_params.beta)

    def test_classical_correction_matches_sampling_variance(self):
        from gibbs import finite_population_variance

        gen = np.random.default_rng(5)
        n, size = 5000, 500
        values = gen.gamma(2.0, 1.5, n)
        totals = np.array([n * values[gen.choice(n, size, replace=False)].mean() for _ in range(4000)])
        predicted = finite_population_variance(n, size, np.var(values), rooted=False)
        assert totals.var(ddof=1) == pytest.approx(predicted, rel=0.1)
        rooted = finite_population_variance(n, size, np.var(values), rooted=True)
        assert rooted == pytest.approx(predicted / np.sqrt((n - size) / (n - 1)))

    def test_variance_vanishes_at_full_batch(self):
        from gibbs import finite_population_variance

        assert finite_population_variance(100, 100, 3.0) == 0.0
        assert finite_population_variance(100, 1, 3.0, rooted=False) == pytest.approx(100 * 100 * 3.0)

    @pytest.mark.parametrize("j", [1, 2, 3])
    def test_minibatch_sum_is_unbiased(self, j, full_cache, small_dataset, small_params):
        """Тест: среднее минибатч-оценок по многим батчам совпадает с полной суммой"""
        from gibbs import minibatch_sum

        n = small_dataset.n
        full = minibatch_sum(j, 1, np.arange(n), full_cache, small_params.beta).value
        gen = np.random.default_rng(23)
        values = np.array([
            minibatch_sum(j, 1, gen.choice(n, 16, replace=False), full_cache, small_params.beta).value
            for _ in range(4000)
        ])
        standard_error = values.std(ddof=1) / np.sqrt(values.size)
        assert abs(values.mean() - full) < 4.0 * standard_error + 1e-12
