"""Готовые настройки моделирования и априорные распределения по умолчанию"""
from typing import Optional

from errors import ValidationError
from model import ContinuousThetaPrior, DiscreteThetaPrior, KernelSpec, PriorSpec

# Истинные параметры имитационного исследования
STUDY_TRUTH = {
    'beta': (0.0, 1.0, -5.0),
    'sigma2': 1.0,
    'omega': 0.5,
    'phi': 0.236,
}

SIMULATION_PRESETS = {
    'desk-replica': {
        'description': 'Уменьшенная копия исследования: n=2000, 400 тестовых',
        'n': 2000,
        'test_fraction': 0.2,
        **STUDY_TRUTH,
    },
    'small-study': {
        'description': 'Малое исследование: n=8000, 1600 тестовых',
        'n': 8000,
        'test_fraction': 0.2,
        **STUDY_TRUTH,
    },
    'timing': {
        'description': 'Замеры времени: n=20000, M_sim=30',
        'n': 20000,
        'm_sim': 30,
        'test_fraction': 0.0,
        **STUDY_TRUTH,
    },
    'large': {
        'description': 'Большое исследование: n=120000, M_sim=30',
        'n': 120000,
        'm_sim': 30,
        'test_fraction': 0.2,
        **STUDY_TRUTH,
    },
}

# Априорные распределения исследования
DEFAULT_BETA_MEAN = 0.0
DEFAULT_BETA_VAR = 1000.0
DEFAULT_SIGMA2_SHAPE = 0.01
DEFAULT_SIGMA2_RATE = 0.01
DEFAULT_THETA_VAR = 3.0
DEFAULT_GRID_SIZE = 20


def get_simulation_preset(name: str) -> dict:
    """
    Получить настройки моделирования по имени

    Args:
        name (str): Имя предустановки

    Returns:
        dict: Параметры simulate без описания
    """
    if name not in SIMULATION_PRESETS:
        raise ValidationError(f"Неизвестная предустановка '{name}', доступны: {', '.join(SIMULATION_PRESETS)}")
    return {key: value for key, value in SIMULATION_PRESETS[name].items() if key != 'description'}


def list_presets():
    return [(name, data['description']) for name, data in SIMULATION_PRESETS.items()]


def build_prior(
    n_beta: int,
    kind: str = 'continuous',
    kernel: Optional[KernelSpec] = None,
    grid_size: int = DEFAULT_GRID_SIZE,
    beta_mean: float = DEFAULT_BETA_MEAN,
    beta_var: float = DEFAULT_BETA_VAR,
    sigma2_shape: float = DEFAULT_SIGMA2_SHAPE,
    sigma2_rate: float = DEFAULT_SIGMA2_RATE,
    theta_var: float = DEFAULT_THETA_VAR,
) -> PriorSpec:
    """
    Априорное распределение: β ~ N(m, s²I), σ² ~ IG(a, b) и θ

    Для kind='discrete' нужна сетка, поэтому обязательно ядро с границами φ.
    """
    if kind == 'continuous':
        theta = ContinuousThetaPrior(omega_var=theta_var, phi_var=theta_var)
    elif kind == 'discrete':
        if kernel is None:
            raise ValidationError("Для дискретного априорного распределения θ нужно ядро с границами φ")
        theta = DiscreteThetaPrior.uniform(kernel, grid_size)
    else:
        raise ValidationError(f"Неизвестный вид априорного распределения θ: '{kind}'")
    return PriorSpec.default(
        n_beta,
        beta_mean=beta_mean,
        beta_var=beta_var,
        sigma2_shape=sigma2_shape,
        sigma2_rate=sigma2_rate,
        theta=theta,
    )
