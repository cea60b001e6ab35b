"""Обработчик команды fit"""
import logging
from dataclasses import fields
from pathlib import Path

from config import RunConfig
from model import KernelSpec
from presets import build_prior
from reports import format_chain_summary
from samplers import AlgoConfig, ChainOutput, run_chain
from storage import read_correction, read_dataset, read_neighbor_graph, sha256_file, write_chain, write_neighbor_graph

logger = logging.getLogger(__name__)


def algo_config_from(config: RunConfig) -> AlgoConfig:
    """Настройки цепи из конфигурации команды"""
    names = [item.name for item in fields(AlgoConfig) if item.name != 'initial']
    return AlgoConfig(**{name: config.values[name] for name in names if name in config.values})


def cmd_fit(config: RunConfig) -> ChainOutput:
    """
    Запустить сэмплер на обучающей части набора данных

    Args:
        config (RunConfig): Проверенная конфигурация команды fit

    Returns:
        ChainOutput: Выборка, записанная в config.output
    """
    algo = algo_config_from(config)
    dataset = read_dataset(config.data)
    train = dataset.train()
    logger.info(f"Запуск {algo.algorithm} на {train.n} обучающих наблюдениях из {config.data}")

    kernel = KernelSpec.from_locations(train.locations, algo.kernel)
    prior = build_prior(
        train.n_beta,
        kind=algo.prior_kind,
        kernel=kernel,
        grid_size=algo.grid_size,
        beta_mean=config.beta_mean,
        beta_var=config.beta_var,
        sigma2_shape=config.sigma2_shape,
        sigma2_rate=config.sigma2_rate,
        theta_var=config.theta_var,
    )
    cd = read_correction(config.correction) if config.correction and algo.algorithm == 'barker' else None
    graph = read_neighbor_graph(config.graph) if config.graph and algo.algorithm != 'full' else None

    output = run_chain(train, algo, prior, kernel=kernel, cd=cd, graph=graph)
    write_chain(config.output, output, extra={
        'data_path': str(Path(config.data)),
        'data_sha256': sha256_file(config.data),
        'n_train': train.n,
    })
    if config.graph_output and output.graph is not None:
        write_neighbor_graph(config.graph_output, output.graph)
        logger.info(f"Граф соседей записан в {config.graph_output}")

    print(format_chain_summary(output))
    return output
