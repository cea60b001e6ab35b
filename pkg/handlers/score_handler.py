"""Обработчик команды score"""
import logging
from typing import Dict

from config import RunConfig
from errors import ValidationError
from reports import format_metrics
from samplers import DERIVED_NAME
from scoring import parameter_scores, prediction_metrics
from storage import append_metrics, read_chain, read_meta, read_predictions

logger = logging.getLogger(__name__)


def truth_from_meta(meta: dict) -> Dict[str, float]:
    """Истинные параметры из метаданных simulate, включая σ²ω/φ"""
    try:
        truth = {key: float(value) for key, value in meta.items()
                 if key.startswith('beta') or key in ('sigma2', 'omega', 'phi')}
        truth[DERIVED_NAME] = truth['sigma2'] * truth['omega'] / truth['phi']
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"В метаданных нет истинных параметров: {e}") from e
    return truth


def cmd_score(config: RunConfig) -> Dict[str, float]:
    """Посчитать метрики предсказания и/или восстановления параметров и дописать их в таблицу"""
    metrics = {}
    if config.predictions:
        summary, truth = read_predictions(config.predictions)
        metrics.update(prediction_metrics(summary, truth))
    if config.draws and config.truth:
        chain, _ = read_chain(config.draws)
        frame = chain.with_derived()
        draws = {name: frame[name].to_numpy() for name in frame.columns}
        metrics.update(parameter_scores(draws, truth_from_meta(read_meta(config.truth))))

    append_metrics(config.metrics, config.label, metrics)
    print(format_metrics(metrics, config.label))
    return metrics
