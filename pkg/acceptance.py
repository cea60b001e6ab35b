"""Правила принятия для θ = (ω, φ)

Корректирующее распределение h(·|c), адаптивный минибатч-тест Баркера,
минибатч-тест Метрополиса–Гастингса на фиксированном батче и точный тест
на полных данных (тот же МХ при B = n).
"""
import logging
import time
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence, Tuple

import numpy as np
from scipy.stats import logistic, norm
from sklearn.exceptions import ConvergenceWarning
from sklearn.linear_model import Lasso, LinearRegression

from errors import NumericalError, ValidationError
from gibbs import check_batch, finite_population_variance
from vecchia import chunked_sum

logger = logging.getLogger(__name__)

GRID_BOUND = 15.0
GRID_STEP = 0.05
EVAL_STEP = 0.01

SUP_ERROR_LIMIT = 0.02
TARGET_SUP_ERROR = 0.01
MAX_CUTOFF = 3.0

# Лестница штрафов LASSO по убыванию; последняя ступень - NNLS без штрафа
PENALTY_LADDER = (1e-4, 3e-5, 1e-5, 3e-6, 1e-6, 3e-7, 1e-7, 3e-8, 1e-8, 1e-9, 0.0)

LambdaEvaluator = Callable[[np.ndarray], np.ndarray]


def _uniform_grid(bound: float, step: float) -> np.ndarray:
    return np.linspace(-bound, bound, int(round(2.0 * bound / step)) + 1)


@dataclass(frozen=True)
class CorrectionDistribution:
    """
    Дискретная плотность h на сетке 𝒳, свёртка которой с N(0, c)
    приближает стандартную логистическую плотность

    Attributes:
        grid: Строго возрастающие точки носителя
        mass: Неотрицательные массы, сумма равна 1
        c: Дисперсия σ²_{L₁} гауссовой компоненты
        sup_error: Достигнутая равномерная ошибка свёртки на сетке оценки
        penalty: Использованный штраф LASSO
    """

    grid: np.ndarray
    mass: np.ndarray
    c: float
    sup_error: float
    penalty: float = 0.0
    grid_step: float = GRID_STEP
    eval_step: float = EVAL_STEP
    bound: float = GRID_BOUND
    _cdf: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float).reshape(-1)
        mass = np.array(self.mass, dtype=float).reshape(-1)
        if grid.shape != mass.shape or grid.size == 0:
            raise ValidationError("Сетка и массы корректирующего распределения должны иметь одинаковую ненулевую длину")
        if np.any(np.diff(grid) <= 0.0):
            raise ValidationError("Сетка корректирующего распределения должна строго возрастать")
        if np.any(mass < 0.0) or abs(mass.sum() - 1.0) > 1e-9:
            raise ValidationError("Массы корректирующего распределения должны быть неотрицательными с суммой 1")
        if not (0.0 < self.c <= MAX_CUTOFF):
            raise ValidationError(f"c должно лежать в (0, {MAX_CUTOFF}], получено {self.c}")
        if not (self.sup_error <= SUP_ERROR_LIMIT):
            raise NumericalError(
                f"Ошибка приближения логистической плотности {self.sup_error:.4f} превышает порог {SUP_ERROR_LIMIT}"
            )
        for array in (grid, mass):
            array.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "_cdf", np.cumsum(mass))

    @property
    def mean(self) -> float:
        return float(self.grid @ self.mass)

    def sample(self, rng: np.random.Generator, size=None):
        """Выборка точек сетки с вероятностями mass"""
        u = rng.random(size)
        idx = np.minimum(np.searchsorted(self._cdf, u, side="right"), self.grid.size - 1)
        return self.grid[idx] if size is not None else float(self.grid[idx])


def convolution_design(c: float, grid: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Матрица A[z, x] = N(z − x; 0, c)"""
    return norm.pdf(points[:, None] - grid[None, :], scale=np.sqrt(c))


def _fit_mass(design: np.ndarray, target: np.ndarray, penalty: float) -> np.ndarray:
    if penalty == 0.0:
        model = LinearRegression(fit_intercept=False, positive=True)
    else:
        model = Lasso(alpha=penalty, positive=True, fit_intercept=False, precompute=True,
                      max_iter=20000, tol=1e-10)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        model.fit(design, target)
    for warning in caught:
        logger.warning(f"Оптимизатор корректирующего распределения (штраф {penalty}): {warning.message}")

    mass = np.clip(model.coef_, 0.0, None)
    total = mass.sum()
    if not (np.isfinite(total) and total > 0.0):
        raise NumericalError(f"Оптимизатор вернул нулевое корректирующее распределение (штраф {penalty})")
    return mass / total


def _fit(c: float, penalty: float, bound: float, grid_step: float, eval_step: float):
    grid = _uniform_grid(bound, grid_step)
    points = _uniform_grid(bound, eval_step)
    design = convolution_design(c, grid, points)
    target = logistic.pdf(points)
    mass = _fit_mass(design, target, penalty)
    sup_error = float(np.max(np.abs(design @ mass - target)))
    return grid, mass, sup_error


@lru_cache(maxsize=None)
def select_penalty(c: float = 1.0, target: float = TARGET_SUP_ERROR, ladder: Sequence[float] = PENALTY_LADDER,
                   bound: float = GRID_BOUND, grid_step: float = GRID_STEP, eval_step: float = EVAL_STEP) -> float:
    """
    Наибольший штраф из лестницы, при котором равномерная ошибка ≤ target

    Бинарный поиск по лестнице, упорядоченной по убыванию штрафа (ошибка
    считается монотонной по штрафу). Последняя ступень возвращается, даже
    если не достигает цели: сертификация проводится отдельно.
    """
    lo, hi = 0, len(ladder) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        _, _, error = _fit(c, ladder[mid], bound, grid_step, eval_step)
        logger.debug(f"Штраф {ladder[mid]}: ошибка {error:.5f}")
        if error <= target:
            hi = mid
        else:
            lo = mid + 1
    logger.info(f"Выбран штраф LASSO {ladder[lo]} для c={c}")
    return ladder[lo]


def estimate_correction_distribution(c: float = 1.0, penalty: float = None, bound: float = GRID_BOUND,
                                     grid_step: float = GRID_STEP, eval_step: float = EVAL_STEP) -> CorrectionDistribution:
    """
    Оценить корректирующее распределение h(·|c) неотрицательным LASSO

    Args:
        c (float): Дисперсия гауссовой компоненты, 0 < c ≤ 3
        penalty (float): Штраф LASSO; по умолчанию выбирается по лестнице при c = 1
        bound, grid_step, eval_step: Носитель [−bound, bound], шаг сетки 𝒳 и шаг сетки оценки

    Returns:
        CorrectionDistribution: Нормированное распределение с сертифицированной ошибкой

    Raises:
        NumericalError: если ошибка превышает 0.02 или оптимизатор не справился
    """
    if not (0.0 < c <= MAX_CUTOFF):
        raise ValidationError(f"c должно лежать в (0, {MAX_CUTOFF}], получено {c}")
    if penalty is None:
        penalty = select_penalty(1.0, TARGET_SUP_ERROR, PENALTY_LADDER, bound, grid_step, eval_step)

    start = time.perf_counter()
    grid, mass, sup_error = _fit(c, penalty, bound, grid_step, eval_step)
    logger.info(
        f"Корректирующее распределение для c={c}: ошибка {sup_error:.5f}, "
        f"{np.count_nonzero(mass)} ненулевых масс, {time.perf_counter() - start:.1f} с"
    )
    return CorrectionDistribution(
        grid=grid, mass=mass, c=float(c), sup_error=sup_error, penalty=float(penalty),
        grid_step=grid_step, eval_step=eval_step, bound=bound,
    )


def sample_correction(cd: CorrectionDistribution, rng: np.random.Generator) -> float:
    """Выборка L₂ ~ h(·|c)"""
    return cd.sample(rng)


def batch_gate(n: int, batch_size: int, sigma2_lambda: float, c: float) -> bool:
    """True, если (n²/B)√((n−B)/(n−1))σ²_Λ > c и батч нужно увеличить"""
    if not (1 <= batch_size <= n):
        raise ValidationError(f"Размер батча B = {batch_size} вне [1, {n}]")
    if sigma2_lambda < 0.0:
        raise ValidationError("σ²_Λ не может быть отрицательной")
    return finite_population_variance(n, batch_size, sigma2_lambda, rooted=True) > c


def estimate_sigma2_lambda(lambda_terms: np.ndarray) -> float:
    """Несмещённая выборочная дисперсия {Λᵢ}"""
    terms = np.asarray(lambda_terms, dtype=float).reshape(-1)
    if terms.size < 2:
        raise ValidationError("Для оценки σ²_Λ нужно хотя бы два слагаемых")
    return float(np.var(terms, ddof=1))


@dataclass(frozen=True)
class AcceptanceDiagnostics:
    """Диагностика одного шага принятия θ"""

    batch_size: int
    sigma2_lambda: float
    delta: float
    accepted: bool
    wall_time: float
    gate_value: float = 0.0
    classical_value: float = 0.0
    clamped: bool = False


@dataclass(frozen=True)
class BarkerSettings:
    cutoff: float = 1.0
    b_init: int = 1000
    b_inc: int = 1000
    force_full_batch: bool = False

    def __post_init__(self):
        if not (0.0 < self.cutoff <= MAX_CUTOFF):
            raise ValidationError(f"Порог c должен лежать в (0, {MAX_CUTOFF}]")
        if self.b_init < 1 or self.b_inc < 1:
            raise ValidationError("B_init и B_inc должны быть не меньше 1")


def _batch_variance(terms: np.ndarray) -> float:
    return estimate_sigma2_lambda(terms) if terms.size > 1 else 0.0


def barker_accept_step(theta_prop, theta_cur, lambda_fn: LambdaEvaluator, n: int, log_ratio: float,
                       cd: CorrectionDistribution, settings: BarkerSettings,
                       rng: np.random.Generator) -> Tuple[object, AcceptanceDiagnostics]:
    """
    Адаптивный минибатч-тест Баркера

    Батч растёт на B_inc наблюдений без возвращения, пока
    (n²/B)√((n−B)/(n−1))σ²_Λ > c, затем
    Δ = nΛ̄_B + log[π(θ_prop)g(θ_cur|θ_prop)/(π(θ_cur)g(θ_prop|θ_cur))] + L₁* + L₂.

    Args:
        theta_prop, theta_cur: Предложенное и текущее значения θ
        lambda_fn: Функция строк → Λᵢ
        n (int): Число наблюдений
        log_ratio (float): Логарифм отношения априорных и предложных плотностей
        cd: Корректирующее распределение для порога c
        settings: Порог c, B_init, B_inc
        rng: Генератор цепи

    Returns:
        Tuple: (принятое θ, диагностика)
    """
    start = time.perf_counter()
    if abs(cd.c - settings.cutoff) > 1e-12:
        raise ValidationError(f"Корректирующее распределение построено для c={cd.c}, а порог {settings.cutoff}")

    order = rng.permutation(n)
    size = n if settings.force_full_batch else min(settings.b_init, n)
    terms = lambda_fn(np.sort(order[:size]))
    sigma2 = _batch_variance(terms)
    while size < n and batch_gate(n, size, sigma2, settings.cutoff):
        extra = np.sort(order[size:size + settings.b_inc])
        terms = np.concatenate([terms, lambda_fn(extra)])
        size = terms.size
        sigma2 = _batch_variance(terms)

    gate_value = finite_population_variance(n, size, sigma2, rooted=True)
    l1_variance = settings.cutoff - gate_value
    clamped = l1_variance < 0.0
    if clamped:
        logger.warning(f"Дисперсия L₁* отрицательна ({l1_variance:.3e}) из-за округления, приравнена к 0")
        l1_variance = 0.0

    l2 = cd.sample(rng)
    l1 = float(rng.normal(0.0, np.sqrt(l1_variance)))
    delta = n / size * chunked_sum(terms) + log_ratio + l1 + l2
    accepted = bool(delta > 0.0)

    diagnostics = AcceptanceDiagnostics(
        batch_size=int(size),
        sigma2_lambda=sigma2,
        delta=float(delta),
        accepted=accepted,
        wall_time=time.perf_counter() - start,
        gate_value=gate_value,
        classical_value=finite_population_variance(n, size, sigma2, rooted=False),
        clamped=clamped,
    )
    return (theta_prop if accepted else theta_cur), diagnostics


def mh_accept_step(theta_prop, theta_cur, lambda_fn: LambdaEvaluator, batch: np.ndarray, n: int,
                   log_ratio: float, rng: np.random.Generator) -> Tuple[object, AcceptanceDiagnostics]:
    """
    Минибатч-тест Метрополиса–Гастингса на фиксированном батче

    Δ = nΛ̄_B + log-отношение + L, L = −log U, U ~ 𝒰(0, 1); при B = n это
    точный МХ с вероятностью принятия min(1, r).
    """
    start = time.perf_counter()
    batch = check_batch(batch, n)
    terms = lambda_fn(batch)
    size = batch.size
    with np.errstate(divide="ignore"):
        noise = float(-np.log(rng.random()))
    delta = n / size * chunked_sum(terms) + log_ratio + noise
    accepted = bool(delta > 0.0)
    sigma2 = _batch_variance(terms)

    diagnostics = AcceptanceDiagnostics(
        batch_size=int(size),
        sigma2_lambda=sigma2,
        delta=float(delta),
        accepted=accepted,
        wall_time=time.perf_counter() - start,
        gate_value=finite_population_variance(n, size, sigma2, rooted=True),
        classical_value=finite_population_variance(n, size, sigma2, rooted=False),
    )
    return (theta_prop if accepted else theta_cur), diagnostics
