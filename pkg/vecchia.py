"""Величины правдоподобия Векки: условные моменты μᵢ и vᵢ, логарифм правдоподобия, Λᵢ и q₁–q₃

Оба кэша (ConditionalCache для Векки и DenseCache для полной модели) хранят
«отбелённые» строки

    zyᵢ = (Y(sᵢ) − bᵢY_𝒩ᵢ) / √vᵢ,   zxᵢ = (x(sᵢ) − bᵢX_𝒩ᵢ) / √vᵢ,

через которые выражаются все слагаемые правдоподобия и суммы q. Кэши не
зависят от β и σ² и определяются только парой (ω, φ).
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Tuple, Union

import numpy as np
from scipy import linalg

from errors import NumericalError, ValidationError
from model import GpParams, KernelSpec, SpatialDataset, correlation_matrix
from neighbors import NeighborGraph

logger = logging.getLogger(__name__)

DEGENERACY_THRESHOLD = 1e-12
JITTER = 1e-10
CHUNK_SIZE = 4096
DENSE_LIMIT = 20000
LOG_2PI = float(np.log(2.0 * np.pi))


def chunked_sum(values: np.ndarray) -> float:
    """Сумма с фиксированным разбиением на блоки (воспроизводима при любом числе потоков)"""
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.size <= CHUNK_SIZE:
        return float(np.sum(values))
    partial = np.add.reduceat(values, np.arange(0, values.size, CHUNK_SIZE))
    return float(np.sum(partial))


def _factor_rows(A: np.ndarray, row_ids: np.ndarray) -> np.ndarray:
    """Разложение Холецкого стопки матриц; при неудаче повтор по строкам с добавкой JITTER"""
    try:
        return np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        pass

    factors = np.empty_like(A)
    eye = np.eye(A.shape[-1])
    for j, row in enumerate(row_ids):
        try:
            factors[j] = np.linalg.cholesky(A[j])
        except np.linalg.LinAlgError:
            logger.warning(f"Разложение R(𝒩ᵢ, 𝒩ᵢ) для наблюдения {row} не удалось, повтор с добавкой {JITTER}")
            try:
                factors[j] = np.linalg.cholesky(A[j] + JITTER * eye)
            except np.linalg.LinAlgError as e:
                raise NumericalError(
                    f"Матрица R(𝒩ᵢ, 𝒩ᵢ) для наблюдения {row} не положительно определена", index=int(row)
                ) from e
    return factors


def conditional_weights(
    graph: NeighborGraph,
    locations: np.ndarray,
    kernel: KernelSpec,
    omega: float,
    phi: float,
    rows: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Веса bᵢ = R(i, 𝒩ᵢ)R⁻¹(𝒩ᵢ, 𝒩ᵢ) и дисперсии vᵢ для заданных строк

    Returns:
        Tuple: (веса len(rows) × ширина графа, дополненные нулями; vᵢ длины len(rows))

    Raises:
        NumericalError: если vᵢ ≤ 1e-12 или факторизация не удалась
    """
    rows = np.asarray(rows, dtype=int)
    nbrs = graph.neighbors[rows]
    counts = (nbrs >= 0).sum(axis=1)
    weights = np.zeros(nbrs.shape, dtype=float)
    v = np.ones(rows.shape[0], dtype=float)

    for k in np.unique(counts):
        if k == 0:
            continue
        sel = np.flatnonzero(counts == k)
        idx = nbrs[sel, :k]
        points = locations[rows[sel]]
        nb_points = locations[idx]

        diff = nb_points[:, :, None, :] - nb_points[:, None, :, :]
        d_in = np.sqrt(np.sum(diff * diff, axis=-1))
        diff = nb_points - points[:, None, :]
        d_out = np.sqrt(np.sum(diff * diff, axis=-1))

        A = (1.0 - omega) * kernel.correlation(d_in, phi)
        diag = np.arange(k)
        A[:, diag, diag] = 1.0
        r = (1.0 - omega) * kernel.correlation(d_out, phi)

        L = _factor_rows(A, rows[sel])
        w = np.linalg.solve(L, r[..., None])[..., 0]
        v[sel] = 1.0 - np.sum(w * w, axis=1)
        weights[sel, :k] = np.linalg.solve(np.swapaxes(L, -1, -2), w[..., None])[..., 0]

    bad = np.flatnonzero(v <= DEGENERACY_THRESHOLD)
    if bad.size:
        row = int(rows[bad[0]])
        raise NumericalError(
            f"Условная дисперсия vᵢ = {v[bad[0]]:.3e} вырождена для наблюдения {row} "
            f"(исходный индекс {int(graph.perm[row])}); вероятно, совпадающие точки при ω≈0",
            index=row,
        )
    return weights, v


class ConditionalCache:
    """Кэш bᵢ, vᵢ и отбелённых строк для фиксированных (ω, φ) с ленивым заполнением"""

    def __init__(self, graph: NeighborGraph, dataset: SpatialDataset, kernel: KernelSpec,
                 omega: float, phi: float, threads: int = 1):
        if graph.n != dataset.n:
            raise ValidationError(f"Граф построен для {graph.n} наблюдений, а в данных {dataset.n}")
        if not (0.0 <= omega <= 1.0):
            raise ValidationError(f"ω = {omega} вне [0, 1]")
        kernel.check_phi(phi)

        self.graph = graph
        self.dataset = dataset
        self.kernel = kernel
        self.omega = float(omega)
        self.phi = float(phi)
        self.threads = max(1, int(threads))

        n = dataset.n
        self.weights = np.zeros(graph.neighbors.shape, dtype=float)
        self.v = np.ones(n, dtype=float)
        self.zy = np.zeros(n, dtype=float)
        self.zx = np.zeros((n, dataset.n_beta), dtype=float)
        self.filled = np.zeros(n, dtype=bool)

    @property
    def is_complete(self) -> bool:
        return bool(self.filled.all())

    def matches(self, omega: float, phi: float) -> bool:
        return self.omega == omega and self.phi == phi

    def _compute_chunk(self, rows: np.ndarray):
        weights, v = conditional_weights(self.graph, self.dataset.locations, self.kernel, self.omega, self.phi, rows)
        nbrs = self.graph.neighbors[rows]
        safe = np.where(nbrs >= 0, nbrs, 0)
        y_f = self.dataset.y[rows] - np.einsum("rk,rk->r", weights, self.dataset.y[safe])
        x_f = self.dataset.X[rows] - np.einsum("rk,rkp->rp", weights, self.dataset.X[safe])
        scale = 1.0 / np.sqrt(v)
        return rows, weights, v, y_f * scale, x_f * scale[:, None]

    def ensure(self, rows: Optional[np.ndarray] = None) -> None:
        """Досчитать отсутствующие строки (все, если rows не задан)"""
        if rows is None:
            missing = np.flatnonzero(~self.filled)
        else:
            rows = np.asarray(rows, dtype=int)
            missing = np.unique(rows[~self.filled[rows]])
        if missing.size == 0:
            return

        chunks = [missing[start:start + CHUNK_SIZE] for start in range(0, missing.size, CHUNK_SIZE)]
        if self.threads > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                results = list(pool.map(self._compute_chunk, chunks))
        else:
            results = [self._compute_chunk(chunk) for chunk in chunks]

        for chunk, weights, v, zy, zx in results:
            self.weights[chunk] = weights
            self.v[chunk] = v
            self.zy[chunk] = zy
            self.zx[chunk] = zx
            self.filled[chunk] = True


class DenseCache:
    """Точные последовательные условные распределения из разложения Холецкого полной R"""

    def __init__(self, dataset: SpatialDataset, kernel: KernelSpec, omega: float, phi: float):
        if dataset.n > DENSE_LIMIT:
            raise ValidationError(f"Полная модель ограничена n ≤ {DENSE_LIMIT}, получено n = {dataset.n}")
        kernel.check_phi(phi)
        self.dataset = dataset
        self.kernel = kernel
        self.omega = float(omega)
        self.phi = float(phi)

        R = correlation_matrix(dataset.locations, omega, phi, kernel)
        try:
            L = linalg.cholesky(R, lower=True)
        except linalg.LinAlgError as e:
            raise NumericalError(f"Матрица R не положительно определена при ω={omega}, φ={phi}") from e

        self.v = np.diag(L) ** 2
        self.zy = linalg.solve_triangular(L, dataset.y, lower=True)
        self.zx = linalg.solve_triangular(L, dataset.X, lower=True)
        self.filled = np.ones(dataset.n, dtype=bool)
        # веса bᵢ не хранятся: условное среднее берётся из отбелённых строк
        self.weights = None

    @property
    def is_complete(self) -> bool:
        return True

    def matches(self, omega: float, phi: float) -> bool:
        return self.omega == omega and self.phi == phi

    def ensure(self, rows: Optional[np.ndarray] = None) -> None:
        return None


Cache = Union[ConditionalCache, DenseCache]


def build_conditional_cache(graph: NeighborGraph, omega: float, phi: float, kernel: KernelSpec,
                            dataset: SpatialDataset, threads: int = 1) -> ConditionalCache:
    """
    Полностью заполненный кэш условных величин для (ω, φ)

    Args:
        graph: Граф соседей для упорядоченных данных
        omega, phi: Доля наггета и параметр диапазона
        kernel: Ядро корреляции
        dataset: Упорядоченные данные
        threads: Число потоков для заполнения блоков

    Returns:
        ConditionalCache: Кэш с bᵢ, vᵢ и отбелёнными строками
    """
    cache = ConditionalCache(graph, dataset, kernel, omega, phi, threads=threads)
    cache.ensure()
    logger.debug(f"Кэш условных величин построен для ω={omega:.4f}, φ={phi:.4f}")
    return cache


def _rows(i) -> np.ndarray:
    return np.atleast_1d(np.asarray(i, dtype=int))


def _unwrap(values: np.ndarray, i):
    return float(values[0]) if np.ndim(i) == 0 else values


def conditional_mean(i, cache: Cache, beta: np.ndarray, dataset: SpatialDataset, graph: NeighborGraph = None):
    """μᵢ = x′(sᵢ)β + bᵢ(Y_𝒩ᵢ − X_𝒩ᵢβ)"""
    rows = _rows(i)
    cache.ensure(rows)
    beta = np.asarray(beta, dtype=float)
    if cache.weights is not None:
        graph = graph if graph is not None else cache.graph
        nbrs = graph.neighbors[rows]
        safe = np.where(nbrs >= 0, nbrs, 0)
        resid = dataset.y[safe] - dataset.X[safe] @ beta
        mu = dataset.X[rows] @ beta + np.einsum("rk,rk->r", cache.weights[rows], resid)
    else:
        # Для полной модели: μᵢ = Y(sᵢ) − √vᵢ(zyᵢ − zxᵢβ)
        mu = dataset.y[rows] - np.sqrt(cache.v[rows]) * (cache.zy[rows] - cache.zx[rows] @ beta)
    return _unwrap(mu, i)


def loglik_terms(cache: Cache, beta: np.ndarray, sigma2: float, rows: Optional[np.ndarray] = None) -> np.ndarray:
    """Слагаемые log N(Y(sᵢ); μᵢ, σ²vᵢ) для заданных строк"""
    if rows is None:
        cache.ensure()
        zy, zx, v = cache.zy, cache.zx, cache.v
    else:
        rows = np.asarray(rows, dtype=int)
        cache.ensure(rows)
        zy, zx, v = cache.zy[rows], cache.zx[rows], cache.v[rows]
    resid = zy - zx @ np.asarray(beta, dtype=float)
    return -0.5 * (LOG_2PI + np.log(sigma2) + np.log(v)) - 0.5 * resid * resid / sigma2


def _check_cache(cache: Cache, params: GpParams) -> None:
    if not cache.matches(params.omega, params.phi):
        raise ValidationError(
            f"Кэш построен для (ω={cache.omega}, φ={cache.phi}), а параметры ({params.omega}, {params.phi})"
        )


def vecchia_loglik(dataset: SpatialDataset, graph: NeighborGraph, params: GpParams, cache: Cache) -> float:
    """Σᵢ log N(Y(sᵢ); μᵢ, σ²vᵢ)"""
    _check_cache(cache, params)
    return chunked_sum(loglik_terms(cache, params.beta, params.sigma2))


def dense_loglik(dataset: SpatialDataset, params: GpParams, kernel: KernelSpec) -> float:
    """
    Точный логарифм многомерной нормальной плотности через разложение Холецкого

    Raises:
        ValidationError: если n > DENSE_LIMIT
        NumericalError: если матрица не положительно определена
    """
    n = dataset.n
    if n > DENSE_LIMIT:
        raise ValidationError(f"Полное правдоподобие ограничено n ≤ {DENSE_LIMIT}, получено n = {n}")
    R = correlation_matrix(dataset.locations, params.omega, params.phi, kernel)
    try:
        factor = linalg.cho_factor(R, lower=True)
    except linalg.LinAlgError as e:
        raise NumericalError("Матрица ковариаций не положительно определена") from e
    resid = dataset.y - dataset.X @ params.beta
    quad = float(resid @ linalg.cho_solve(factor, resid))
    logdet = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))
    return -0.5 * (n * (LOG_2PI + np.log(params.sigma2)) + logdet + quad / params.sigma2)


def loglik_ratio_term(i, cache_prop: Cache, cache_cur: Cache, beta: np.ndarray, sigma2: float,
                      dataset: SpatialDataset = None, graph: NeighborGraph = None):
    """Λᵢ = log fᵢ(Y | θ_prop) − log fᵢ(Y | θ_cur)"""
    rows = _rows(i)
    terms = loglik_terms(cache_prop, beta, sigma2, rows) - loglik_terms(cache_cur, beta, sigma2, rows)
    return _unwrap(terms, i)


def compute_q(i, p: int, cache: Cache, beta: np.ndarray, dataset: SpatialDataset = None,
              graph: NeighborGraph = None):
    """
    Величины q₁(sᵢ), q₂(sᵢ), q₃(sᵢ) полных условных распределений βₚ и σ²

    Args:
        i: Индекс или массив индексов наблюдений
        p (int): Номер коэффициента β
        cache: Кэш для текущих (ω, φ)
        beta: Текущий вектор β (βₚ в q₂ не участвует)

    Returns:
        Tuple: (q₁, q₂, q₃)
    """
    rows = _rows(i)
    beta = np.asarray(beta, dtype=float)
    if not (0 <= p < beta.shape[0]):
        raise ValidationError(f"Номер коэффициента p = {p} вне [0, {beta.shape[0]})")
    cache.ensure(rows)
    zy, zx = cache.zy[rows], cache.zx[rows]
    resid = zy - zx @ beta
    a = zx[:, p]
    q1 = a * a
    q2 = a * (resid + a * beta[p])
    q3 = resid * resid
    return _unwrap(q1, i), _unwrap(q2, i), _unwrap(q3, i)
