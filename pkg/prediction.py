"""Апостериорное предсказание в тестовых точках кригингом Векки"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.spatial import cKDTree
from scipy.stats import norm

from errors import NumericalError, ValidationError
from model import GpParams, KernelSpec, SpatialDataset

logger = logging.getLogger(__name__)

MAX_PREDICT_DRAWS = 500
VARIANCE_TOLERANCE = 1e-10
INTERVAL_LEVEL = 0.95


@dataclass(frozen=True)
class PredictiveSummary:
    """
    Сводка апостериорного предсказания по тестовым точкам

    Attributes:
        mean: Среднее смеси по выборке параметров
        sd: Стандартное отклонение смеси
        lower, upper: Квантили 2.5% и 97.5% смеси
        draws: Необязательные выборки Y* (S × T)
    """

    mean: np.ndarray
    sd: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    draws: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("mean", "sd", "lower", "upper"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(-1))
        size = self.mean.shape[0]
        if any(getattr(self, name).shape[0] != size for name in ("sd", "lower", "upper")):
            raise ValidationError("Длины полей сводки предсказания не совпадают")
        if np.any(self.sd < 0.0):
            raise ValidationError("Стандартное отклонение предсказания отрицательно")
        slack = 1e-9 * np.maximum(1.0, np.abs(self.mean))
        if np.any(self.lower > self.mean + slack) or np.any(self.mean > self.upper + slack):
            raise ValidationError("Нарушено lower ≤ mean ≤ upper в сводке предсказания")

    @property
    def size(self) -> int:
        return self.mean.shape[0]


class NeighborBlock:
    """M ближайших обучающих точек для каждой тестовой точки и попарные расстояния"""

    def __init__(self, test_locations: np.ndarray, train_locations: np.ndarray, m: int):
        if m < 1:
            raise ValidationError(f"Число соседей M должно быть не меньше 1, получено {m}")
        k = min(m, train_locations.shape[0])
        dist, idx = cKDTree(train_locations).query(test_locations, k=k)
        self.idx = np.asarray(idx, dtype=int).reshape(test_locations.shape[0], k)
        self.cross_dist = np.asarray(dist, dtype=float).reshape(test_locations.shape[0], k)
        nbr = train_locations[self.idx]
        diff = nbr[:, :, None, :] - nbr[:, None, :, :]
        self.pair_dist = np.sqrt(np.einsum("tijd,tijd->tij", diff, diff))


def kriging_moments(block: NeighborBlock, test_X: np.ndarray, train: SpatialDataset, params: GpParams,
                    kernel: KernelSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    Условные среднее и дисперсия Y(s₀) при одном наборе параметров

    b = R(0,𝒩₀)R⁻¹(𝒩₀,𝒩₀), v = 1 − b·R(𝒩₀,0) с единичной диагональю R,
    включая наггет.

    Returns:
        Tuple: (средние, дисперсии σ²v) по тестовым точкам
    """
    omega, phi = params.omega, params.phi
    R = (1.0 - omega) * kernel.correlation(block.pair_dist, phi)
    k = R.shape[-1]
    R[:, np.arange(k), np.arange(k)] = 1.0
    r0 = (1.0 - omega) * kernel.correlation(block.cross_dist, phi)

    try:
        b = np.linalg.solve(R, r0[..., None])[..., 0]
    except np.linalg.LinAlgError as e:
        raise NumericalError("Вырожденная корреляционная матрица соседей тестовой точки") from e
    v = 1.0 - np.einsum("tk,tk->t", b, r0)

    bad = np.flatnonzero(v < -VARIANCE_TOLERANCE)
    if bad.size:
        raise NumericalError(f"Отрицательная условная дисперсия {v[bad[0]]:.3e} в тестовой точке {bad[0]}",
                             index=int(bad[0]))
    v = np.maximum(v, 0.0)

    resid = train.y[block.idx] - train.X[block.idx] @ params.beta
    mean = test_X @ params.beta + np.einsum("tk,tk->t", b, resid)
    return mean, params.sigma2 * v


def _mixture_cdf(x: float, means: np.ndarray, sds: np.ndarray) -> float:
    positive = sds > 0.0
    values = np.where(positive, norm.cdf((x - means) / np.where(positive, sds, 1.0)), (x >= means).astype(float))
    return float(values.mean())


def mixture_quantile(q: float, means: np.ndarray, sds: np.ndarray) -> float:
    """Квантиль равновесной смеси нормальных компонент (sd = 0 - точечная масса)"""
    if np.all(sds == 0.0):
        return float(np.quantile(means, q, method="inverted_cdf"))
    lo = float(np.min(means - 10.0 * sds)) - 1.0
    hi = float(np.max(means + 10.0 * sds)) + 1.0
    return float(brentq(lambda x: _mixture_cdf(x, means, sds) - q, lo, hi, xtol=1e-12, rtol=1e-12))


def thin_draws(draws: np.ndarray, limit: int) -> np.ndarray:
    """Равномерное прореживание до не более чем limit строк"""
    stride = int(np.ceil(draws.shape[0] / limit))
    return draws[::max(stride, 1)]


def predict_at(test_locations: np.ndarray, test_X: np.ndarray, train: SpatialDataset, draws: np.ndarray, m: int,
               kernel: KernelSpec, max_draws: int = MAX_PREDICT_DRAWS, keep_draws: bool = False,
               rng: Optional[np.random.Generator] = None) -> PredictiveSummary:
    """
    Апостериорное предсказание откликов в тестовых точках

    Args:
        test_locations: Координаты тестовых точек T × d
        test_X: Ковариаты тестовых точек T × (P+1)
        train: Обучающие данные
        draws: Выборка параметров S × (P+4): β, σ², ω, φ
        m (int): Число соседей для кригинга
        kernel: Ядро корреляции
        max_draws (int): Предел числа используемых выборок
        keep_draws (bool): Сохранить выборки Y*
        rng: Генератор для выборок Y*

    Returns:
        PredictiveSummary: Моменты и квантили смеси по выборке
    """
    draws = np.atleast_2d(np.asarray(draws, dtype=float))
    if draws.shape[0] == 0:
        raise ValidationError("Выборка параметров пуста")
    if draws.shape[1] != train.n_beta + 3:
        raise ValidationError(f"Ожидалось {train.n_beta + 3} столбцов параметров, получено {draws.shape[1]}")
    test_locations = np.atleast_2d(np.asarray(test_locations, dtype=float))
    test_X = np.atleast_2d(np.asarray(test_X, dtype=float))
    if test_locations.shape[0] != test_X.shape[0] or test_X.shape[1] != train.n_beta:
        raise ValidationError("Размеры тестовых координат и ковариат не согласованы с обучающими данными")

    used = thin_draws(draws, max_draws)
    block = NeighborBlock(test_locations, train.locations, m)
    logger.info(f"Предсказание в {test_locations.shape[0]} точках по {used.shape[0]} выборкам, M={m}")

    means = np.empty((used.shape[0], test_locations.shape[0]))
    variances = np.empty_like(means)
    for s, row in enumerate(used):
        means[s], variances[s] = kriging_moments(block, test_X, train, GpParams.from_vector(row), kernel)

    mean = means.mean(axis=0)
    spread = means - mean
    sd = np.sqrt(variances.mean(axis=0) + (spread * spread).mean(axis=0))
    sds = np.sqrt(variances)
    tail = (1.0 - INTERVAL_LEVEL) / 2.0
    lower = np.array([mixture_quantile(tail, means[:, t], sds[:, t]) for t in range(mean.shape[0])])
    upper = np.array([mixture_quantile(1.0 - tail, means[:, t], sds[:, t]) for t in range(mean.shape[0])])

    samples = None
    if keep_draws:
        rng = rng if rng is not None else np.random.default_rng()
        samples = means + sds * rng.standard_normal(means.shape)

    return PredictiveSummary(mean=mean, sd=sd, lower=lower, upper=upper, draws=samples)
