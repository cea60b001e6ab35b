"""Тесты упорядочивания и множеств соседей"""
import numpy as np
import pytest

from errors import ValidationError


def brute_force_neighbors(locations, m):
    """Эталон: ближайшие предшественники полным перебором, равенства по индексу"""
    rows = []
    for i in range(locations.shape[0]):
        dist = np.linalg.norm(locations[:i] - locations[i], axis=1)
        order = np.lexsort((np.arange(i), dist))[:min(m, i)]
        rows.append(list(order))
    return rows


@pytest.mark.unit
class TestOrdering:
    """Тесты схем упорядочивания"""

    @pytest.mark.parametrize("scheme", ["as-given", "coordinate-sum", "maxmin", "random"])
    def test_is_permutation(self, scheme, rng):
        from neighbors import order_observations

        locations = rng.random((50, 2))
        perm = order_observations(locations, scheme, seed=1)
        assert np.array_equal(np.sort(perm), np.arange(50))

    def test_coordinate_sum(self):
        from neighbors import order_observations

        locations = np.array([[0.9, 0.9], [0.1, 0.0], [0.5, 0.2]])
        assert list(order_observations(locations, "coordinate-sum")) == [1, 2, 0]

    def test_maxmin_first_is_central_then_farthest(self):
        from neighbors import order_observations

        locations = np.array([[0.0, 0.0], [1.0, 0.0], [0.45, 0.05], [0.1, 0.0]])
        perm = order_observations(locations, "maxmin")
        assert perm[0] == 2
        assert perm[1] == 1

    def test_maxmin_spreads_points(self, rng):
        from neighbors import order_observations

        locations = rng.random((200, 2))
        perm = order_observations(locations, "maxmin")
        head = locations[perm[:10]]
        gaps = np.linalg.norm(head[:, None] - head[None], axis=-1) + np.eye(10) * 10
        assert gaps.min() > 0.1

    def test_random_is_seeded(self, rng):
        from neighbors import order_observations

        locations = rng.random((30, 2))
        assert np.array_equal(order_observations(locations, "random", seed=5),
                              order_observations(locations, "random", seed=5))

    def test_unknown_scheme(self, rng):
        from neighbors import order_observations

        with pytest.raises(ValidationError):
            order_observations(rng.random((5, 2)), "hilbert")


@pytest.mark.unit
class TestNeighborSets:
    """Тесты построения графа соседей"""

    def test_matches_brute_force(self, rng):
        from neighbors import build_neighbor_sets

        locations = rng.random((120, 2))
        graph = build_neighbor_sets(locations, 7)
        expected = brute_force_neighbors(locations, 7)
        for i in range(120):
            assert list(graph.neighbor_set(i)) == expected[i]

    def test_first_rows(self, rng):
        from neighbors import build_neighbor_sets

        graph = build_neighbor_sets(rng.random((10, 2)), 3)
        assert graph.neighbor_set(0).size == 0
        assert list(graph.neighbor_set(1)) == [0]
        assert list(graph.counts) == [0, 1, 2] + [3] * 7

    def test_full_conditioning(self, rng):
        from neighbors import build_neighbor_sets

        graph = build_neighbor_sets(rng.random((12, 2)), 11)
        for i in range(12):
            assert sorted(graph.neighbor_set(i)) == list(range(i))

    def test_m_larger_than_n(self, rng):
        from neighbors import build_neighbor_sets

        graph = build_neighbor_sets(rng.random((5, 2)), 50)
        assert graph.neighbors.shape == (5, 4)

    def test_ties_broken_by_index(self):
        from neighbors import build_neighbor_sets

        locations = np.array([[0.0, 1.0], [0.0, -1.0], [1.0, 0.0], [0.0, 0.0]])
        graph = build_neighbor_sets(locations, 2)
        assert list(graph.neighbor_set(3)) == [0, 1]

    def test_invalid_m(self, rng):
        from neighbors import build_neighbor_sets

        with pytest.raises(ValidationError):
            build_neighbor_sets(rng.random((5, 2)), 0)

    def test_tree_search_matches_brute_force(self, rng, monkeypatch):
        import neighbors

        monkeypatch.setattr(neighbors, "BRUTE_FORCE_LIMIT", 50)
        locations = rng.random((400, 2))
        graph = neighbors.build_neighbor_sets(locations, 6)
        expected = brute_force_neighbors(locations, 6)
        for i in range(400):
            assert list(graph.neighbor_set(i)) == expected[i]

    def test_tree_search_on_lattice_ties(self, monkeypatch):
        import neighbors

        monkeypatch.setattr(neighbors, "BRUTE_FORCE_LIMIT", 20)
        grid = np.stack(np.meshgrid(np.arange(12.0), np.arange(12.0)), axis=-1).reshape(-1, 2)
        graph = neighbors.build_neighbor_sets(grid, 4)
        expected = brute_force_neighbors(grid, 4)
        for i in range(grid.shape[0]):
            assert list(graph.neighbor_set(i)) == expected[i]

    def test_built_graph_passes_checks(self, rng):
        from neighbors import build_neighbor_sets

        build_neighbor_sets(rng.random((40, 2)), 5).check_invariants()

    @pytest.mark.parametrize("rows, message", [
        ([[-1, -1], [0, -1], [0, 2], [1, 0]], "не предшествует"),
        ([[-1, -1], [0, -1], [-1, 0], [1, 0]], "−1 стоит перед"),
        ([[-1, -1], [0, -1], [0, -1], [1, 0]], "1 соседей вместо 2"),
        ([[-1, -1], [0, -1], [1, 1], [1, 0]], "повторяющиеся"),
        ([[-1, -1], [0, -1], [0, 1], [1, -2]], "Дополнение"),
    ])
    def test_invariant_violations(self, rows, message):
        """Тест: внешний граф с нарушенной структурой отклоняется"""
        from neighbors import NeighborGraph

        graph = NeighborGraph(perm=np.arange(4), neighbors=np.array(rows), m=2)
        with pytest.raises(ValidationError, match=message):
            graph.check_invariants()

    def test_perm_must_be_permutation(self):
        from neighbors import NeighborGraph

        graph = NeighborGraph(perm=[0, 0, 2], neighbors=[[-1], [0], [1]], m=1)
        with pytest.raises(ValidationError, match="перестановкой"):
            graph.check_invariants()
