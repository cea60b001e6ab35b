"""Общие фикстуры для тестов"""
import os
import sys

import numpy as np
import pytest

# Добавляем корневую директорию в path для импортов
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="Запускать долгие воспроизведения")


def pytest_configure(config):
    config.addinivalue_line("markers", "unit: быстрые модульные тесты")
    config.addinivalue_line("markers", "integration: сквозные тесты нескольких модулей")
    config.addinivalue_line("markers", "slow: долгие статистические воспроизведения (--runslow)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="нужен флаг --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    """Генератор с фиксированным зерном"""
    return np.random.default_rng(20240101)


@pytest.fixture
def kernel():
    from model import KernelSpec
    return KernelSpec(family="exponential", phi_min=0.001, phi_max=1.5)


@pytest.fixture
def small_dataset():
    """64 точки на единичном квадрате с одной ковариатой"""
    from model import SpatialDataset

    gen = np.random.default_rng(7)
    locations = gen.random((64, 2))
    covariate = gen.standard_normal(64)
    y = 1.0 + 2.0 * covariate + gen.standard_normal(64)
    return SpatialDataset.from_arrays(locations, y, covariate[:, None])


@pytest.fixture
def small_params():
    from model import GpParams
    return GpParams(beta=np.array([1.0, 2.0]), sigma2=1.3, omega=0.3, phi=0.2)


@pytest.fixture
def simulated():
    """Смоделированный набор n=300 с тестовой частью"""
    from simulation import simulate_dataset
    dataset, truth, kernel = simulate_dataset(300, beta=(0.0, 1.0, -5.0), sigma2=1.0, omega=0.5, phi=0.236, seed=3)
    return dataset, truth, kernel


@pytest.fixture(scope="session")
def correction_c1():
    """Корректирующее распределение для c = 1 (строится один раз за сессию)"""
    from acceptance import estimate_correction_distribution
    return estimate_correction_distribution(1.0)
