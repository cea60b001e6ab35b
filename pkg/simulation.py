"""Моделирование пространственных данных из модели гауссовского процесса"""
import logging
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from errors import NumericalError, ValidationError
from model import GpParams, KernelSpec, SpatialDataset, correlation_matrix
from neighbors import build_neighbor_sets
from vecchia import DENSE_LIMIT, conditional_weights

logger = logging.getLogger(__name__)

# До этого n отклики моделируются точно через полную матрицу
DENSE_SIMULATION_LIMIT = 4000
DEFAULT_SIMULATION_NEIGHBORS = 30
DEFAULT_TEST_FRACTION = 0.2


def _dense_residuals(locations: np.ndarray, params: GpParams, kernel: KernelSpec,
                     z: np.ndarray) -> np.ndarray:
    R = correlation_matrix(locations, params.omega, params.phi, kernel)
    try:
        L = linalg.cholesky(R, lower=True)
    except linalg.LinAlgError as e:
        raise NumericalError("Корреляционная матрица для моделирования не положительно определена") from e
    return np.sqrt(params.sigma2) * (L @ z)


def _sequential_residuals(locations: np.ndarray, params: GpParams, kernel: KernelSpec, m_sim: int,
                          z: np.ndarray) -> np.ndarray:
    """Последовательная выборка wᵢ = bᵢw_𝒩ᵢ + σ√vᵢ zᵢ по факторизации Векки"""
    graph = build_neighbor_sets(locations, m_sim)
    weights, v = conditional_weights(graph, locations, kernel, params.omega, params.phi, np.arange(locations.shape[0]))
    scale = np.sqrt(params.sigma2 * v)
    w = np.zeros(locations.shape[0])
    for i in range(locations.shape[0]):
        nbrs = graph.neighbor_set(i)
        w[i] = weights[i, :nbrs.size] @ w[nbrs] + scale[i] * z[i]
    return w


def simulate_dataset(
    n: int,
    beta: Sequence[float],
    sigma2: float,
    omega: float,
    phi: float,
    kernel_family: str = "exponential",
    m_sim: Optional[int] = None,
    test_fraction: float = DEFAULT_TEST_FRACTION,
    seed: int = 0,
    dim: int = 2,
) -> Tuple[SpatialDataset, GpParams, KernelSpec]:
    """
    Смоделировать набор данных на единичном квадрате

    Координаты равномерны на [0, 1]^d, ковариаты - свободный член и P
    стандартных нормальных столбцов, отклики - Xβ плюс гауссовский процесс
    с ковариацией σ²R. Точная выборка через полную матрицу используется при
    n ≤ 4000 или M_sim ≥ n − 1, иначе последовательная выборка Векки.

    Args:
        n (int): Число наблюдений
        beta: Истинные коэффициенты (β₀ - свободный член)
        sigma2, omega, phi: Истинные σ², ω, φ
        kernel_family (str): Семейство корреляции
        m_sim (int): Число соседей при последовательной выборке
        test_fraction (float): Доля тестовых наблюдений
        seed (int): Зерно генератора
        dim (int): Размерность области

    Returns:
        Tuple: (набор данных, истинные параметры, ядро)
    """
    if n < 2:
        raise ValidationError("Для моделирования нужно n ≥ 2")
    if dim < 1:
        raise ValidationError("Размерность области должна быть ≥ 1")
    if not (0.0 <= test_fraction < 1.0):
        raise ValidationError("Доля тестовых наблюдений должна лежать в [0, 1)")
    if m_sim is not None and m_sim < 1:
        raise ValidationError("Число соседей M_sim должно быть ≥ 1")
    truth = GpParams(beta=np.asarray(beta, dtype=float), sigma2=sigma2, omega=omega, phi=phi)

    rng = np.random.default_rng(seed)
    locations = rng.random((n, dim))
    kernel = KernelSpec.from_locations(locations, kernel_family)
    truth.check_bounds(kernel)
    covariates = rng.standard_normal((n, truth.n_beta - 1))
    z = rng.standard_normal(n)

    dense = n <= DENSE_SIMULATION_LIMIT or (m_sim is not None and m_sim >= n - 1)
    if dense and n > DENSE_LIMIT:
        raise ValidationError(f"Точная выборка ограничена n ≤ {DENSE_LIMIT}")
    if dense:
        w = _dense_residuals(locations, truth, kernel, z)
    else:
        w = _sequential_residuals(locations, truth, kernel, m_sim or DEFAULT_SIMULATION_NEIGHBORS, z)

    test_mask = np.zeros(n, dtype=bool)
    test_mask[rng.permutation(n)[:int(round(test_fraction * n))]] = True

    X = np.hstack([np.ones((n, 1)), covariates])
    dataset = SpatialDataset(locations=locations, y=X @ truth.beta + w, X=X, test_mask=test_mask)
    logger.info(
        f"Смоделировано n={n} наблюдений ({'точно' if dense else 'по Векки'}), тестовых {int(test_mask.sum())}"
    )
    return dataset, truth, kernel
