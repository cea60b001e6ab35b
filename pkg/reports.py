"""Текстовые сводки для вывода команд"""
from typing import Dict, List, Tuple

import pandas as pd

from acceptance import CorrectionDistribution
from model import GpParams, SpatialDataset
from prediction import PredictiveSummary
from samplers import ChainOutput, posterior_summary


def format_chain_summary(output: ChainOutput) -> str:
    """Таблица апостериорных средних и СКО с диагностикой цепи"""
    table = posterior_summary(output)
    lines = [
        f"✅ Цепь {output.config.algorithm}: {output.n_iterations} итераций, прогрев {output.burn_in}",
        table.to_string(float_format=lambda v: f"{v:.4f}"),
        f"Доля принятий θ: {output.acceptance_rate:.3f}",
        f"Средний размер батча: {output.mean_batch_size:.1f}",
        f"Общее время: {output.total_wall_time:.2f} с",
    ]
    return "\n".join(lines)


def format_metrics(metrics: Dict[str, float], label: str = "") -> str:
    frame = pd.DataFrame([metrics], index=[label or "run"])
    return "✅ Метрики\n" + frame.to_string(float_format=lambda v: f"{v:.4f}")


def format_prediction_summary(summary: PredictiveSummary, path: str) -> str:
    return (
        f"✅ Предсказания для {summary.size} точек записаны в {path}\n"
        f"Средняя ширина 95% интервала: {(summary.upper - summary.lower).mean():.4f}"
    )


def format_simulation_summary(dataset: SpatialDataset, truth: GpParams, path: str) -> str:
    n_test = 0 if dataset.test_mask is None else int(dataset.test_mask.sum())
    beta = ", ".join(f"{b:g}" for b in truth.beta)
    return (
        f"✅ Набор данных записан в {path}\n"
        f"n = {dataset.n} (тестовых {n_test}), β = ({beta}), σ² = {truth.sigma2:g}, "
        f"ω = {truth.omega:g}, φ = {truth.phi:g}"
    )


def format_correction_summary(cd: CorrectionDistribution, path: str) -> str:
    support = int((cd.mass > 0).sum())
    return (
        f"✅ Корректирующее распределение для c = {cd.c:g} записано в {path}\n"
        f"Ошибка приближения: {cd.sup_error:.5f}, точек с ненулевой массой: {support}, штраф {cd.penalty:g}, "
        f"среднее {cd.mean:+.4f}"
    )


def format_preset_list(presets: List[Tuple[str, str]]) -> str:
    """Список предустановок simulate с описаниями"""
    width = max(len(name) for name, _ in presets)
    lines = ["📋 Предустановки simulate (--preset):"]
    lines.extend(f"  {name.ljust(width)}  {description}" for name, description in presets)
    return "\n".join(lines)
