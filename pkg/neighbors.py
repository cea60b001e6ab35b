"""Упорядочивание наблюдений и построение множеств соседей Векки"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from errors import ValidationError

logger = logging.getLogger(__name__)

ORDERING_SCHEMES = ("as-given", "coordinate-sum", "maxmin", "random")

# Ниже этого n соседи ищутся полным перебором
BRUTE_FORCE_LIMIT = 5000


def point_distances(locations: np.ndarray, point: np.ndarray) -> np.ndarray:
    """Евклидовы расстояния от point до каждой строки locations"""
    diff = locations - point
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def _maxmin_order(locations: np.ndarray) -> np.ndarray:
    n = locations.shape[0]
    order = np.empty(n, dtype=int)
    # Первая точка ближайшая к центроиду, при равенстве меньший индекс
    first = int(np.argmin(point_distances(locations, locations.mean(axis=0))))
    order[0] = first
    min_dist = point_distances(locations, locations[first])
    min_dist[first] = -np.inf
    for k in range(1, n):
        nxt = int(np.argmax(min_dist))
        order[k] = nxt
        np.minimum(min_dist, point_distances(locations, locations[nxt]), out=min_dist)
        min_dist[nxt] = -np.inf
    return order


def order_observations(locations: np.ndarray, scheme: str = "maxmin", seed: Optional[int] = None) -> np.ndarray:
    """
    Перестановка наблюдений для факторизации Векки

    Args:
        locations: Координаты n × d
        scheme (str): as-given, coordinate-sum, maxmin или random
        seed (int): Зерно генератора для схемы random

    Returns:
        np.ndarray: Перестановка индексов 0..n−1
    """
    locations = np.atleast_2d(np.asarray(locations, dtype=float))
    n = locations.shape[0]
    if n < 1:
        raise ValidationError("Нельзя упорядочить пустой набор точек")

    if scheme == "as-given":
        return np.arange(n)
    if scheme == "coordinate-sum":
        return np.argsort(locations.sum(axis=1), kind="stable")
    if scheme == "random":
        return np.random.default_rng(seed).permutation(n)
    if scheme == "maxmin":
        return _maxmin_order(locations)
    raise ValidationError(f"Неизвестная схема упорядочивания '{scheme}', доступны: {', '.join(ORDERING_SCHEMES)}")


@dataclass(frozen=True)
class NeighborGraph:
    """
    Порядок наблюдений и множества соседей 𝒩ᵢ

    Attributes:
        perm: Перестановка, применённая к исходным данным
        neighbors: Матрица n × min(M, n−1) индексов предшественников, дополненная −1;
            соседи в строке упорядочены по расстоянию, при равенстве по индексу
        m: Максимальное число соседей M
        scheme: Схема упорядочивания
    """

    perm: np.ndarray
    neighbors: np.ndarray
    m: int
    scheme: str = "as-given"

    def __post_init__(self):
        for name in ("perm", "neighbors"):
            values = np.array(getattr(self, name), dtype=int)
            values.setflags(write=False)
            object.__setattr__(self, name, values)

    @property
    def n(self) -> int:
        return self.neighbors.shape[0]

    @property
    def counts(self) -> np.ndarray:
        return (self.neighbors >= 0).sum(axis=1)

    def neighbor_set(self, i: int) -> np.ndarray:
        row = self.neighbors[i]
        return row[row >= 0]

    def check_invariants(self) -> None:
        """
        Проверить граф, прочитанный извне

        Raises:
            ValidationError: perm не перестановка, сосед не предшествует строке,
                дополнение не −1 в конце строки или |𝒩ᵢ| ≠ min(M, i)
        """
        n = self.perm.shape[0]
        if self.neighbors.ndim != 2 or self.neighbors.shape[0] != n:
            raise ValidationError(f"Матрица соседей {self.neighbors.shape} не согласована с n = {n}")
        if self.m < 1:
            raise ValidationError(f"Число соседей M = {self.m} должно быть ≥ 1")
        if not np.array_equal(np.sort(self.perm), np.arange(n)):
            raise ValidationError("Порядок наблюдений в графе не является перестановкой 0..n−1")
        if np.any(self.neighbors < -1):
            raise ValidationError("Дополнение строк графа соседей должно быть −1")

        rows = np.arange(n)[:, None]
        padding = self.neighbors < 0
        if np.any(padding[:, :-1] & ~padding[:, 1:]):
            row = int(np.flatnonzero((padding[:, :-1] & ~padding[:, 1:]).any(axis=1))[0])
            raise ValidationError(f"Строка {row} графа: −1 стоит перед индексом соседа")
        late = ~padding & (self.neighbors >= rows)
        if np.any(late):
            row = int(np.flatnonzero(late.any(axis=1))[0])
            raise ValidationError(f"Строка {row} графа: сосед не предшествует наблюдению")
        expected = np.minimum(self.m, np.arange(n))
        wrong = np.flatnonzero(self.counts != expected)
        if wrong.size:
            row = int(wrong[0])
            raise ValidationError(f"Строка {row} графа: {int(self.counts[row])} соседей вместо {int(expected[row])}")
        for i in range(n):
            nbrs = self.neighbor_set(i)
            if np.unique(nbrs).size != nbrs.size:
                raise ValidationError(f"Строка {i} графа: повторяющиеся соседи")


def _brute_force_rows(locations: np.ndarray, m: int, rows: range, out: np.ndarray) -> None:
    for i in rows:
        k = min(m, i)
        if k == 0:
            continue
        dist = point_distances(locations[:i], locations[i])
        out[i, :k] = np.argsort(dist, kind="stable")[:k]


def _tree_rows(locations: np.ndarray, m: int, start: int, out: np.ndarray) -> None:
    """Точный поиск предшествующих соседей через k-d дерево по префиксам растущих блоков"""
    n = locations.shape[0]
    block_start = start
    while block_start < n:
        block_end = min(n, 2 * block_start)
        tree = cKDTree(locations[:block_end])
        pending = np.arange(block_start, block_end)
        k_search = min(block_end, 2 * (m + 1))
        while pending.size:
            dist, idx = tree.query(locations[pending], k=k_search)
            unresolved = []
            for row, i in enumerate(pending):
                need = min(m, i)
                candidates = idx[row][idx[row] < i]
                if candidates.size < need and k_search < block_end:
                    unresolved.append(i)
                    continue
                cand_dist = point_distances(locations[candidates], locations[i])
                order = np.lexsort((candidates, cand_dist))[:need]
                boundary = cand_dist[order[-1]]
                # Все точки не дальше граничной должны попасть в выдачу дерева
                if k_search < block_end and dist[row, -1] <= boundary + 1e-12 * max(1.0, boundary):
                    unresolved.append(i)
                    continue
                out[i, :need] = candidates[order]
            pending = np.asarray(unresolved, dtype=int)
            k_search = min(block_end, 2 * k_search)
        block_start = block_end


def build_neighbor_sets(ordered_locations: np.ndarray, m: int, perm: Optional[np.ndarray] = None,
                        scheme: str = "as-given") -> NeighborGraph:
    """
    Построить множества из не более чем M ближайших предшествующих соседей

    Args:
        ordered_locations: Координаты, уже переставленные в порядке факторизации
        m (int): Максимальное число соседей M ≥ 1
        perm: Применённая перестановка (по умолчанию тождественная)
        scheme (str): Название схемы упорядочивания для метаданных

    Returns:
        NeighborGraph: Граф соседей
    """
    if m < 1:
        raise ValidationError(f"Число соседей M должно быть не меньше 1, получено {m}")
    locations = np.atleast_2d(np.asarray(ordered_locations, dtype=float))
    n = locations.shape[0]
    width = min(m, max(n - 1, 0))
    neighbors = np.full((n, width), -1, dtype=int)

    if n <= BRUTE_FORCE_LIMIT:
        _brute_force_rows(locations, m, range(n), neighbors)
    else:
        start = min(n, 2 * (m + 1))
        _brute_force_rows(locations, m, range(start), neighbors)
        _tree_rows(locations, m, start, neighbors)

    logger.info(f"Построен граф соседей: n={n}, M={m}, схема {scheme}")
    return NeighborGraph(
        perm=np.arange(n) if perm is None else perm,
        neighbors=neighbors,
        m=m,
        scheme=scheme,
    )
