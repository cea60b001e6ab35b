"""Сопряжённые шаги Гиббса для βₚ и σ² с минибатч-оценками сумм q₁, q₂, q₃"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.stats import invgamma

from errors import NumericalError, ValidationError
from model import PriorSpec
from vecchia import Cache, chunked_sum, compute_q

logger = logging.getLogger(__name__)


def finite_population_variance(n: int, batch_size: int, sigma2: float, rooted: bool = True) -> float:
    """
    Дисперсия n·q̄_B по ЦПТ с поправкой на конечную совокупность

    Args:
        n (int): Размер совокупности
        batch_size (int): Размер минибатча B
        sigma2 (float): Дисперсия слагаемых
        rooted (bool): True - корневая поправка √((n−B)/(n−1)) для затвора,
            False - классическая поправка (n−B)/(n−1)

    Returns:
        float: (n²/B)·поправка·σ²
    """
    if batch_size >= n:
        return 0.0
    factor = (n - batch_size) / (n - 1)
    if rooted:
        factor = np.sqrt(factor)
    return float(n * n / batch_size * factor * sigma2)


@dataclass(frozen=True)
class MinibatchSumEstimate:
    """Минибатч-оценка n·q̄_{j,B} суммы Σᵢ q_j(sᵢ) вместе с диагностикой ЦПТ"""

    j: int
    value: float
    batch_size: int
    batch_indices: np.ndarray
    sigma2_q: float
    clt_variance: float
    clt_variance_classical: float


def check_batch(batch: np.ndarray, n: int) -> np.ndarray:
    batch = np.asarray(batch, dtype=int).reshape(-1)
    if batch.size == 0:
        raise ValidationError("Минибатч пуст")
    if batch.min() < 0 or batch.max() >= n:
        raise ValidationError(f"Индексы минибатча вне диапазона [0, {n})")
    if np.unique(batch).size != batch.size:
        raise ValidationError("Минибатч содержит повторяющиеся индексы")
    return batch


def minibatch_sum(j: int, p: int, batch: np.ndarray, cache: Cache, beta: np.ndarray,
                  dataset=None, graph=None) -> MinibatchSumEstimate:
    """
    Оценка Σᵢ q_j(sᵢ) ≈ (n/B)·Σ_{i∈𝓑} q_j(sᵢ)

    Args:
        j (int): Какая из величин: 1, 2 или 3
        p (int): Номер коэффициента β (для q₁ и q₂)
        batch: Индексы минибатча без повторов
        cache: Кэш условных величин для текущих (ω, φ)
        beta: Текущий вектор β

    Returns:
        MinibatchSumEstimate: Оценка и диагностика
    """
    if j not in (1, 2, 3):
        raise ValidationError(f"j должно быть 1, 2 или 3, получено {j}")
    n = cache.filled.shape[0]
    batch = check_batch(batch, n)
    q = compute_q(batch, p, cache, beta)[j - 1]
    size = batch.size
    sigma2_q = float(np.var(q, ddof=1)) if size > 1 else 0.0
    return MinibatchSumEstimate(
        j=j,
        value=n / size * chunked_sum(q),
        batch_size=size,
        batch_indices=batch,
        sigma2_q=sigma2_q,
        clt_variance=finite_population_variance(n, size, sigma2_q, rooted=True),
        clt_variance_classical=finite_population_variance(n, size, sigma2_q, rooted=False),
    )


def beta_conditional(p: int, sum_q1: float, sum_q2: float, sigma2: float, prior: PriorSpec) -> Tuple[float, float]:
    """Среднее и дисперсия полного условного распределения βₚ"""
    precision = sum_q1 / sigma2 + 1.0 / prior.beta_var[p]
    variance = 1.0 / precision
    if not (np.isfinite(variance) and variance > 0.0):
        raise NumericalError(f"Неположительная дисперсия полного условного распределения β{p}: {variance}")
    mean = variance * (sum_q2 / sigma2 + prior.beta_mean[p] / prior.beta_var[p])
    return float(mean), float(variance)


def draw_beta_p(p: int, sum_q1: float, sum_q2: float, sigma2: float, prior: PriorSpec,
                rng: np.random.Generator) -> float:
    """Выборка βₚ из N(V·(Σq₂/σ² + mₚ/s²ₚ), V), V = [Σq₁/σ² + 1/s²ₚ]⁻¹"""
    mean, variance = beta_conditional(p, sum_q1, sum_q2, sigma2, prior)
    return float(rng.normal(mean, np.sqrt(variance)))


def sigma2_conditional(sum_q3: float, prior: PriorSpec, n: int) -> Tuple[float, float]:
    """Форма и интенсивность IG(n/2 + a_σ, Σq₃/2 + b_σ)"""
    if sum_q3 < 0.0:
        raise ValidationError(f"Сумма q₃ не может быть отрицательной: {sum_q3}")
    return n / 2.0 + prior.sigma2_shape, sum_q3 / 2.0 + prior.sigma2_rate


def draw_sigma2(sum_q3: float, prior: PriorSpec, n: int, rng: np.random.Generator) -> float:
    """Выборка σ² из обратного гамма-распределения"""
    shape, rate = sigma2_conditional(sum_q3, prior, n)
    return float(invgamma.rvs(shape, scale=rate, random_state=rng))


def update_beta(beta: np.ndarray, batch: np.ndarray, cache: Cache, sigma2: float, prior: PriorSpec,
                rng: np.random.Generator) -> np.ndarray:
    """Систематический проход по β₀..β_P на одном минибатче со свежими β₋ₚ"""
    n = cache.filled.shape[0]
    scale = n / batch.size
    beta = np.array(beta, dtype=float)
    for p in range(beta.shape[0]):
        q1, q2, _ = compute_q(batch, p, cache, beta)
        beta[p] = draw_beta_p(p, scale * chunked_sum(q1), scale * chunked_sum(q2), sigma2, prior, rng)
    return beta


def update_sigma2(beta: np.ndarray, batch: np.ndarray, cache: Cache, prior: PriorSpec,
                  rng: np.random.Generator) -> float:
    n = cache.filled.shape[0]
    _, _, q3 = compute_q(batch, 0, cache, beta)
    return draw_sigma2(n / batch.size * chunked_sum(q3), prior, n, rng)
