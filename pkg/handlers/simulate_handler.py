"""Обработчик команды simulate"""
import logging

from config import RunConfig
from reports import format_simulation_summary
from simulation import simulate_dataset
from storage import write_dataset, write_meta

logger = logging.getLogger(__name__)


def cmd_simulate(config: RunConfig):
    """Смоделировать набор данных и записать его вместе с истинными параметрами"""
    dataset, truth, kernel = simulate_dataset(
        n=config.n,
        beta=config.beta,
        sigma2=config.sigma2,
        omega=config.omega,
        phi=config.phi,
        kernel_family=config.kernel,
        m_sim=config.m_sim,
        test_fraction=config.test_fraction,
        seed=config.seed,
        dim=config.dim,
    )
    write_dataset(config.output, dataset)

    meta = {f'beta{p}': float(b) for p, b in enumerate(truth.beta)}
    meta.update(
        sigma2=float(truth.sigma2),
        omega=float(truth.omega),
        phi=float(truth.phi),
        kernel=kernel.family,
        phi_min=kernel.phi_min,
        phi_max=kernel.phi_max,
        n=dataset.n,
        m_sim=config.m_sim,
        test_fraction=config.test_fraction,
        preset=config.preset,
        seed=config.seed,
    )
    write_meta(config.output, meta)

    print(format_simulation_summary(dataset, truth, config.output))
    return dataset
