"""Обработчик команды predict"""
import logging

import numpy as np

from config import RunConfig
from errors import ValidationError
from model import KernelSpec
from prediction import PredictiveSummary, predict_at
from reports import format_prediction_summary
from storage import read_chain, read_dataset, sha256_file, write_predictions

logger = logging.getLogger(__name__)

BOUNDS_TOLERANCE = 1e-12


def check_chain_matches(meta: dict, kernel: KernelSpec, expected: KernelSpec, data_hash: str) -> None:
    """
    Проверить, что выборка получена на этих же данных и с тем же ядром

    Raises:
        ValidationError: при несовпадении ядра, границ φ или хэша данных
    """
    if kernel is None:
        raise ValidationError("В метаданных выборки нет описания ядра")
    if kernel.family != expected.family:
        raise ValidationError(f"Ядро выборки {kernel.family}, а для данных ожидается {expected.family}")
    for name in ('phi_min', 'phi_max'):
        got, want = getattr(kernel, name), getattr(expected, name)
        if abs(got - want) > BOUNDS_TOLERANCE * max(1.0, abs(want)):
            raise ValidationError(f"Граница {name} выборки {got} не совпадает с границей данных {want}")
    recorded = meta.get('data_sha256')
    if recorded and recorded != data_hash:
        raise ValidationError("Выборка получена на другом наборе данных (хэш SHA-256 не совпадает)")


def cmd_predict(config: RunConfig) -> PredictiveSummary:
    """Предсказать отклики в тестовых точках по сохранённой выборке"""
    chain, meta = read_chain(config.draws)
    dataset = read_dataset(config.data)
    train, test = dataset.train(), dataset.test()

    expected = KernelSpec.from_locations(train.locations, chain.config.kernel)
    check_chain_matches(meta, chain.kernel, expected, sha256_file(config.data))

    summary = predict_at(
        test.locations,
        test.X,
        train,
        chain.kept_draws(),
        config.m,
        chain.kernel,
        max_draws=config.max_draws,
        keep_draws=config.keep_draws,
        rng=np.random.default_rng(config.seed),
    )
    write_predictions(config.output, test.locations, test.y, summary)
    print(format_prediction_summary(summary, config.output))
    return summary
