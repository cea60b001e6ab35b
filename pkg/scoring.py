"""Правильные правила оценки и метрики качества предсказания"""
import logging
from typing import Dict, Mapping

import numpy as np
from scipy.spatial.distance import pdist
from scipy.stats import norm

from errors import ValidationError
from prediction import PredictiveSummary, thin_draws

logger = logging.getLogger(__name__)

MAX_ENERGY_DRAWS = 2000
INTERVAL_ALPHA = 0.05


def crps_gaussian(mu, sigma, y):
    """
    CRPS нормального распределения N(mu, sigma²) в точке y

    CRPS = σ[z(2Φ(z) − 1) + 2φ(z) − 1/√π], z = (y − μ)/σ; при σ = 0 равно |y − μ|.
    """
    mu, sigma, y = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (mu, sigma, y)))
    if np.any(sigma < 0.0):
        raise ValidationError("Стандартное отклонение в CRPS не может быть отрицательным")
    positive = sigma > 0.0
    safe = np.where(positive, sigma, 1.0)
    z = (y - mu) / safe
    value = safe * (z * (2.0 * norm.cdf(z) - 1.0) + 2.0 * norm.pdf(z) - 1.0 / np.sqrt(np.pi))
    result = np.where(positive, value, np.abs(y - mu))
    return float(result) if result.ndim == 0 else result


def crps_ensemble(samples, y: float) -> float:
    """Ансамблевая CRPS: (1/S)Σ|xₛ − y| − (1/2S²)ΣΣ|xₛ − xₜ|"""
    x = np.sort(np.asarray(samples, dtype=float).reshape(-1))
    size = x.size
    if size == 0:
        raise ValidationError("Ансамбль для CRPS пуст")
    # ΣΣ|xₛ − xₜ| = 2Σ(2i − S − 1)x₍ᵢ₎ для упорядоченной выборки
    ranks = 2.0 * np.arange(1, size + 1) - size - 1.0
    spread = float(ranks @ x) / (size * size)
    return max(float(np.mean(np.abs(x - y))) - spread, 0.0)


def energy_score(draws, truth, max_draws: int = MAX_ENERGY_DRAWS) -> float:
    """
    Многомерная энергетическая оценка

    (1/S)Σ‖θₛ − θ*‖ − (1/2S²)ΣΣ‖θₛ − θₜ‖; выборка прореживается до max_draws строк.
    """
    draws = np.asarray(draws, dtype=float)
    if draws.ndim == 1:
        draws = draws[:, None]
    truth = np.asarray(truth, dtype=float).reshape(-1)
    if draws.shape[0] == 0 or draws.shape[1] == 0:
        raise ValidationError("Выборка для энергетической оценки пуста")
    if draws.shape[1] != truth.size:
        raise ValidationError(f"Размерность выборки {draws.shape[1]} не совпадает с истинным вектором {truth.size}")

    draws = thin_draws(draws, max_draws)
    size = draws.shape[0]
    diff = draws - truth
    first = float(np.mean(np.sqrt(np.einsum("sk,sk->s", diff, diff))))
    spread = float(pdist(draws).sum()) / (size * size) if size > 1 else 0.0
    return max(first - spread, 0.0)


def interval_score(lower, upper, y, alpha: float = INTERVAL_ALPHA):
    """(u − l) + (2/α)(l − y)·1[y < l] + (2/α)(y − u)·1[y > u]"""
    lower, upper, y = (np.asarray(a, dtype=float) for a in (lower, upper, y))
    below = np.where(y < lower, lower - y, 0.0)
    above = np.where(y > upper, y - upper, 0.0)
    return (upper - lower) + 2.0 / alpha * (below + above)


def prediction_metrics(summary: PredictiveSummary, truth) -> Dict[str, float]:
    """
    Метрики предсказания

    Returns:
        dict: MAE, RPMSE, CRPS, INT, WID, CVG
    """
    truth = np.asarray(truth, dtype=float).reshape(-1)
    if truth.size != summary.size:
        raise ValidationError(f"Число истинных значений {truth.size} не совпадает с числом предсказаний {summary.size}")
    if truth.size == 0:
        raise ValidationError("Нет тестовых точек для оценки")

    error = summary.mean - truth
    return {
        "MAE": float(np.mean(np.abs(error))),
        "RPMSE": float(np.sqrt(np.mean(error * error))),
        "CRPS": float(np.mean(crps_gaussian(summary.mean, summary.sd, truth))),
        "INT": float(np.mean(interval_score(summary.lower, summary.upper, truth))),
        "WID": float(np.mean(summary.upper - summary.lower)),
        "CVG": float(np.mean((summary.lower <= truth) & (truth <= summary.upper))),
    }


def parameter_scores(draws: Mapping[str, np.ndarray], truth: Mapping[str, float]) -> Dict[str, float]:
    """
    Оценки восстановления параметров

    Args:
        draws: Выборки по именам параметров (включая производные)
        truth: Истинные значения; оцениваются только общие имена

    Returns:
        dict: crps_<имя> для каждого параметра и energy по общему вектору
    """
    names = [name for name in draws.keys() if name in truth]
    if not names:
        raise ValidationError("Нет общих параметров между выборкой и истинными значениями")
    scores = {f"crps_{name}": crps_ensemble(np.asarray(draws[name]), float(truth[name])) for name in names}
    matrix = np.column_stack([np.asarray(draws[name], dtype=float) for name in names])
    scores["energy"] = energy_score(matrix, [float(truth[name]) for name in names])
    logger.debug(f"Оценки параметров: {scores}")
    return scores
