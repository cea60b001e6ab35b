"""Обработчик команды correction-dist"""
import logging

from acceptance import CorrectionDistribution, estimate_correction_distribution
from config import RunConfig
from reports import format_correction_summary
from storage import write_correction

logger = logging.getLogger(__name__)


def cmd_correction_dist(config: RunConfig) -> CorrectionDistribution:
    """Оценить корректирующее распределение для порога c и сохранить его"""
    cd = estimate_correction_distribution(config.c, penalty=config.penalty)
    write_correction(config.output, cd)
    print(format_correction_summary(cd, config.output))
    return cd
