"""Базовые типы модели: пространственные данные, ядра корреляции, параметры ГП и априорные распределения"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree
from scipy.spatial.distance import cdist, pdist
from scipy.special import expit, logit
from scipy.stats import norm

from errors import ValidationError

logger = logging.getLogger(__name__)

# Границы диапазона φ в долях диаметра области наблюдений
PHI_MIN_FRACTION = 0.001
PHI_MAX_FRACTION = 1.0

DUPLICATE_TOLERANCE = 1e-12
BRUTE_FORCE_DIAMETER_LIMIT = 5000

SQRT3 = np.sqrt(3.0)
SQRT5 = np.sqrt(5.0)


def _exponential(r: np.ndarray) -> np.ndarray:
    return np.exp(-r)


def _matern32(r: np.ndarray) -> np.ndarray:
    s = SQRT3 * r
    return (1.0 + s) * np.exp(-s)


def _matern52(r: np.ndarray) -> np.ndarray:
    s = SQRT5 * r
    return (1.0 + s + s * s / 3.0) * np.exp(-s)


def _gaussian(r: np.ndarray) -> np.ndarray:
    return np.exp(-r * r)


# Семейства корреляционных функций от масштабированного расстояния d/φ
CORRELATION_FAMILIES = {
    "exponential": _exponential,
    "matern-3/2": _matern32,
    "matern-5/2": _matern52,
    "gaussian": _gaussian,
}


def location_diameter(locations: np.ndarray) -> float:
    """
    Диаметр множества точек (максимальное попарное расстояние)

    Для d >= 2 расстояния считаются только между вершинами выпуклой оболочки.
    Вырожденные конфигурации (все точки на прямой) обрабатываются через
    крайние точки по осям координат.

    Args:
        locations: Матрица координат n × d

    Returns:
        float: Диаметр
    """
    locations = np.atleast_2d(np.asarray(locations, dtype=float))
    n, d = locations.shape
    if n < 2:
        return 0.0
    if d == 1:
        return float(locations.max() - locations.min())
    if n <= d + 1:
        return float(pdist(locations).max())

    try:
        hull = ConvexHull(locations)
        candidates = locations[hull.vertices]
    except QhullError:
        if n <= BRUTE_FORCE_DIAMETER_LIMIT:
            candidates = locations
        else:
            # Для точек на одной прямой концы диаметра экстремальны по какой-то оси
            extremes = np.unique(np.concatenate([locations.argmin(axis=0), locations.argmax(axis=0)]))
            candidates = locations[extremes]
    return float(pdist(candidates).max())


@dataclass(frozen=True)
class KernelSpec:
    """Семейство корреляционной функции и допустимые границы φ"""

    family: str = "exponential"
    phi_min: float = 0.001
    phi_max: float = 1.0

    def __post_init__(self):
        if self.family not in CORRELATION_FAMILIES:
            raise ValidationError(
                f"Неизвестное семейство ядра '{self.family}', доступны: {', '.join(CORRELATION_FAMILIES)}"
            )
        if not (0.0 < self.phi_min < self.phi_max < np.inf):
            raise ValidationError(
                f"Границы φ должны удовлетворять 0 < φ_min < φ_max < ∞, получено ({self.phi_min}, {self.phi_max})"
            )

    @classmethod
    def from_locations(cls, locations: np.ndarray, family: str = "exponential") -> "KernelSpec":
        """Границы φ по умолчанию: [0.001·D, D], где D - диаметр области наблюдений"""
        diameter = location_diameter(locations)
        if diameter <= 0.0:
            raise ValidationError("Для оценки границ φ нужны хотя бы две различные точки")
        return cls(family=family, phi_min=PHI_MIN_FRACTION * diameter, phi_max=PHI_MAX_FRACTION * diameter)

    def check_phi(self, phi: float) -> None:
        if not (self.phi_min <= phi <= self.phi_max):
            raise ValidationError(f"φ = {phi} вне допустимого диапазона [{self.phi_min}, {self.phi_max}]")

    def correlation(self, dist, phi: float) -> np.ndarray:
        """Корреляция ρ(d | φ) для массива расстояний"""
        self.check_phi(phi)
        dist = np.asarray(dist, dtype=float)
        if np.any(dist < 0.0):
            raise ValidationError("Расстояние не может быть отрицательным")
        return CORRELATION_FAMILIES[self.family](dist / phi)


def correlation(kernel: KernelSpec, dist, phi: float):
    """
    Значение корреляционной функции

    Args:
        kernel (KernelSpec): Семейство ядра и границы φ
        dist: Неотрицательное расстояние (число или массив)
        phi (float): Параметр диапазона

    Returns:
        Значение(я) ρ(d | φ) в [0, 1]
    """
    value = kernel.correlation(dist, phi)
    return float(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class GpParams:
    """Параметры модели (β, σ², ω, φ)"""

    beta: np.ndarray
    sigma2: float
    omega: float
    phi: float

    def __post_init__(self):
        beta = np.array(self.beta, dtype=float).reshape(-1)
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        if not np.all(np.isfinite(beta)):
            raise ValidationError("Коэффициенты β должны быть конечными")
        if not (np.isfinite(self.sigma2) and self.sigma2 > 0.0):
            raise ValidationError(f"σ² должна быть положительной, получено {self.sigma2}")
        if not (0.0 <= self.omega <= 1.0):
            raise ValidationError(f"ω должна лежать в [0, 1], получено {self.omega}")
        if not (np.isfinite(self.phi) and self.phi > 0.0):
            raise ValidationError(f"φ должна быть положительной, получено {self.phi}")

    @property
    def n_beta(self) -> int:
        return self.beta.shape[0]

    def check_bounds(self, kernel: KernelSpec) -> None:
        kernel.check_phi(self.phi)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.beta, [self.sigma2, self.omega, self.phi]])

    @classmethod
    def from_vector(cls, values: np.ndarray) -> "GpParams":
        values = np.asarray(values, dtype=float)
        return cls(beta=values[:-3], sigma2=values[-3], omega=values[-2], phi=values[-1])


def _phi_fraction(phi: float, kernel: KernelSpec) -> float:
    return (phi - kernel.phi_min) / (kernel.phi_max - kernel.phi_min)


def to_unconstrained(params: GpParams, kernel: KernelSpec) -> Tuple[float, float]:
    """
    Перевести (ω, φ) на всю числовую прямую

    ω* = logit(ω), φ* = logit((φ − φ_min)/(φ_max − φ_min))

    Raises:
        ValidationError: если ω или φ на границе (образ равен ±∞)
    """
    return omega_phi_to_unconstrained(params.omega, params.phi, kernel)


def omega_phi_to_unconstrained(omega: float, phi: float, kernel: KernelSpec) -> Tuple[float, float]:
    if not (0.0 < omega < 1.0):
        raise ValidationError(f"ω = {omega} на границе [0, 1]: образ преобразования равен ±∞")
    if not (kernel.phi_min < phi < kernel.phi_max):
        raise ValidationError(
            f"φ = {phi} на границе [{kernel.phi_min}, {kernel.phi_max}]: образ преобразования равен ±∞"
        )
    return float(logit(omega)), float(logit(_phi_fraction(phi, kernel)))


def from_unconstrained(omega_star: float, phi_star: float, kernel: KernelSpec) -> Tuple[float, float]:
    """Обратное преобразование (ω*, φ*) → (ω, φ)"""
    omega = float(expit(omega_star))
    phi = kernel.phi_min + (kernel.phi_max - kernel.phi_min) * float(expit(phi_star))
    return omega, float(np.clip(phi, kernel.phi_min, kernel.phi_max))


@dataclass(frozen=True)
class ContinuousThetaPrior:
    """ω* ~ N(0, omega_var), φ* ~ N(0, phi_var) на преобразованной шкале"""

    omega_var: float = 3.0
    phi_var: float = 3.0

    kind = "continuous"

    def __post_init__(self):
        if self.omega_var <= 0.0 or self.phi_var <= 0.0:
            raise ValidationError("Дисперсии априорного распределения θ должны быть положительными")

    def log_density(self, omega_star: float, phi_star: float) -> float:
        return float(
            norm.logpdf(omega_star, 0.0, np.sqrt(self.omega_var))
            + norm.logpdf(phi_star, 0.0, np.sqrt(self.phi_var))
        )


@dataclass(frozen=True)
class DiscreteThetaPrior:
    """Дискретное равномерное распределение на сетке значений ω × φ"""

    omega_grid: np.ndarray
    phi_grid: np.ndarray

    kind = "discrete"

    def __post_init__(self):
        for name in ("omega_grid", "phi_grid"):
            grid = np.array(getattr(self, name), dtype=float).reshape(-1)
            grid.setflags(write=False)
            object.__setattr__(self, name, grid)
            if grid.size == 0:
                raise ValidationError(f"Сетка {name} пуста")
            if np.any(np.diff(grid) <= 0.0):
                raise ValidationError(f"Сетка {name} должна строго возрастать")
        if self.omega_grid[0] < 0.0 or self.omega_grid[-1] > 1.0:
            raise ValidationError("Значения сетки ω должны лежать в [0, 1]")

    @classmethod
    def uniform(cls, kernel: KernelSpec, size: int = 20) -> "DiscreteThetaPrior":
        """Равномерные сетки по size значений, концы отступают на полшага от границ"""
        if size < 1:
            raise ValidationError("Размер сетки должен быть не меньше 1")
        offsets = (np.arange(size) + 0.5) / size
        return cls(omega_grid=offsets, phi_grid=kernel.phi_min + (kernel.phi_max - kernel.phi_min) * offsets)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.omega_grid.size, self.phi_grid.size

    def log_density(self, omega_index: int, phi_index: int) -> float:
        return -float(np.log(self.omega_grid.size * self.phi_grid.size))

    def nearest(self, omega: float, phi: float) -> Tuple[int, int]:
        return int(np.argmin(np.abs(self.omega_grid - omega))), int(np.argmin(np.abs(self.phi_grid - phi)))

    def check_bounds(self, kernel: KernelSpec) -> None:
        if self.phi_grid[0] < kernel.phi_min or self.phi_grid[-1] > kernel.phi_max:
            raise ValidationError(f"Сетка φ выходит за границы [{kernel.phi_min}, {kernel.phi_max}]")


ThetaPrior = Union[ContinuousThetaPrior, DiscreteThetaPrior]


@dataclass(frozen=True)
class PriorSpec:
    """Априорные распределения: βₚ ~ N(mₚ, s²ₚ), σ² ~ IG(a_σ, b_σ), θ ~ π(·)"""

    beta_mean: np.ndarray
    beta_var: np.ndarray
    sigma2_shape: float = 0.01
    sigma2_rate: float = 0.01
    theta: ThetaPrior = ContinuousThetaPrior()

    def __post_init__(self):
        for name in ("beta_mean", "beta_var"):
            values = np.array(getattr(self, name), dtype=float).reshape(-1)
            values.setflags(write=False)
            object.__setattr__(self, name, values)
        if self.beta_mean.shape != self.beta_var.shape:
            raise ValidationError("Размерности mₚ и s²ₚ не совпадают")
        if np.any(self.beta_var <= 0.0):
            raise ValidationError("Все s²ₚ должны быть положительными")
        if self.sigma2_shape <= 0.0 or self.sigma2_rate <= 0.0:
            raise ValidationError("Параметры a_σ и b_σ должны быть положительными")

    @classmethod
    def default(
        cls,
        n_beta: int,
        beta_mean: float = 0.0,
        beta_var: float = 1000.0,
        sigma2_shape: float = 0.01,
        sigma2_rate: float = 0.01,
        theta: Optional[ThetaPrior] = None,
    ) -> "PriorSpec":
        return cls(
            beta_mean=np.full(n_beta, beta_mean),
            beta_var=np.full(n_beta, beta_var),
            sigma2_shape=sigma2_shape,
            sigma2_rate=sigma2_rate,
            theta=theta if theta is not None else ContinuousThetaPrior(),
        )

    @property
    def n_beta(self) -> int:
        return self.beta_mean.shape[0]

    def check_against(self, kernel: KernelSpec, n_beta: int) -> None:
        if self.n_beta != n_beta:
            raise ValidationError(f"Априорное распределение задано для {self.n_beta} коэффициентов β, а в данных {n_beta}")
        if isinstance(self.theta, DiscreteThetaPrior):
            self.theta.check_bounds(kernel)


@dataclass(frozen=True)
class SpatialDataset:
    """
    Пространственный набор данных

    Attributes:
        locations: Координаты n × d
        y: Отклики длины n
        X: Матрица ковариат n × (P+1); столбец 0 - свободный член, если intercept=True
        test_mask: Логическая маска тестовых наблюдений или None
        intercept: Соблюдается ли соглашение о свободном члене
    """

    locations: np.ndarray
    y: np.ndarray
    X: np.ndarray
    test_mask: Optional[np.ndarray] = None
    intercept: bool = True

    def __post_init__(self):
        locations = np.array(self.locations, dtype=float)
        if locations.ndim == 1:
            locations = locations[:, None]
        y = np.array(self.y, dtype=float).reshape(-1)
        X = np.array(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]

        n = y.shape[0]
        if n < 1:
            raise ValidationError("Набор данных пуст")
        if locations.shape[0] != n or X.shape[0] != n:
            raise ValidationError(
                f"Число строк не совпадает: locations {locations.shape[0]}, y {n}, X {X.shape[0]}"
            )
        if not np.all(np.isfinite(locations)):
            raise ValidationError("Координаты содержат нечисловые значения")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
            raise ValidationError("Отклики или ковариаты содержат нечисловые значения")
        if self.intercept and not np.all(X[:, 0] == 1.0):
            raise ValidationError("Столбец 0 матрицы X должен состоять из единиц (свободный член)")

        if n > 1:
            pairs = cKDTree(locations).query_pairs(DUPLICATE_TOLERANCE, output_type="ndarray")
            if len(pairs):
                i, j = pairs[0]
                raise ValidationError(f"Совпадающие координаты у наблюдений {i} и {j}")

        test_mask = None
        if self.test_mask is not None:
            test_mask = np.array(self.test_mask, dtype=bool).reshape(-1)
            if test_mask.shape[0] != n:
                raise ValidationError("Длина маски разбиения не совпадает с числом наблюдений")
            test_mask.setflags(write=False)

        for array in (locations, y, X):
            array.setflags(write=False)
        object.__setattr__(self, "locations", locations)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "test_mask", test_mask)

    @classmethod
    def from_arrays(
        cls,
        locations: np.ndarray,
        y: np.ndarray,
        covariates: Optional[np.ndarray] = None,
        test_mask: Optional[np.ndarray] = None,
        intercept: bool = True,
    ) -> "SpatialDataset":
        """Собрать набор данных, добавив столбец единиц к ковариатам"""
        y = np.asarray(y, dtype=float).reshape(-1)
        n = y.shape[0]
        columns = []
        if intercept:
            columns.append(np.ones((n, 1)))
        if covariates is not None:
            covariates = np.asarray(covariates, dtype=float)
            columns.append(covariates.reshape(n, -1))
        if not columns:
            raise ValidationError("Матрица ковариат пуста: нужен свободный член или хотя бы одна ковариата")
        return cls(locations=locations, y=y, X=np.hstack(columns), test_mask=test_mask, intercept=intercept)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def dim(self) -> int:
        return self.locations.shape[1]

    @property
    def n_beta(self) -> int:
        return self.X.shape[1]

    @property
    def covariates(self) -> np.ndarray:
        """Ковариаты без столбца свободного члена"""
        return self.X[:, 1:] if self.intercept else self.X

    def subset(self, indices: np.ndarray) -> "SpatialDataset":
        indices = np.asarray(indices, dtype=int)
        test_mask = None if self.test_mask is None else self.test_mask[indices]
        return SpatialDataset(
            locations=self.locations[indices],
            y=self.y[indices],
            X=self.X[indices],
            test_mask=test_mask,
            intercept=self.intercept,
        )

    def reorder(self, perm: np.ndarray) -> "SpatialDataset":
        perm = np.asarray(perm, dtype=int)
        if perm.shape[0] != self.n or not np.array_equal(np.sort(perm), np.arange(self.n)):
            raise ValidationError("Перестановка некорректна")
        return self.subset(perm)

    def train(self) -> "SpatialDataset":
        """Обучающая часть (весь набор, если разбиения нет)"""
        if self.test_mask is None:
            return self
        return self.subset(np.flatnonzero(~self.test_mask))

    def test(self) -> "SpatialDataset":
        if self.test_mask is None or not self.test_mask.any():
            raise ValidationError("В наборе данных нет тестовых наблюдений")
        return self.subset(np.flatnonzero(self.test_mask))


def correlation_matrix(locations: np.ndarray, omega: float, phi: float, kernel: KernelSpec,
                       other: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Корреляционная матрица R = ωI + (1−ω)M

    Если передан other, возвращается перекрёстная матрица (1−ω)ρ между
    locations и other (без слагаемого наггета).
    """
    locations = np.atleast_2d(locations)
    if other is not None:
        return (1.0 - omega) * kernel.correlation(cdist(locations, np.atleast_2d(other)), phi)
    R = (1.0 - omega) * kernel.correlation(cdist(locations, locations), phi)
    np.fill_diagonal(R, 1.0)
    return R


def covariance_entry(i: int, j: int, params: GpParams, kernel: KernelSpec, locations: np.ndarray) -> float:
    """
    Элемент ковариационной матрицы Σ = σ²R

    Args:
        i, j: Индексы наблюдений
        params: Параметры модели
        kernel: Ядро корреляции
        locations: Координаты n × d

    Returns:
        float: σ² при i == j, иначе σ²(1−ω)ρ(‖sᵢ − sⱼ‖ | φ)
    """
    n = np.atleast_2d(locations).shape[0]
    if not (0 <= i < n and 0 <= j < n):
        raise ValidationError(f"Индексы ({i}, {j}) вне диапазона [0, {n})")
    if i == j:
        return float(params.sigma2)
    locations = np.atleast_2d(locations)
    dist = float(np.linalg.norm(locations[i] - locations[j]))
    return float(params.sigma2 * (1.0 - params.omega) * kernel.correlation(dist, params.phi))
