"""Конфигурация запусков: схема полей, файлы key=value и проверка значений"""
import logging
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Any, Callable, Dict, Mapping, Optional

from dotenv import dotenv_values

from errors import StorageError, ValidationError
from model import CORRELATION_FAMILIES
from neighbors import ORDERING_SCHEMES
from presets import (
    DEFAULT_BETA_MEAN,
    DEFAULT_BETA_VAR,
    DEFAULT_GRID_SIZE,
    DEFAULT_SIGMA2_RATE,
    DEFAULT_SIGMA2_SHAPE,
    DEFAULT_THETA_VAR,
    SIMULATION_PRESETS,
    get_simulation_preset,
)
from samplers import ALGORITHMS, FIXABLE, PRIOR_KINDS

logger = logging.getLogger(__name__)

COMMANDS = ('simulate', 'fit', 'predict', 'score', 'correction-dist')
LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR')

# Значения по умолчанию
DEFAULT_SEED = 0
DEFAULT_THREADS = 1
DEFAULT_LOG_LEVEL = 'INFO'
DEFAULT_NEIGHBORS = 15
DEFAULT_PREDICT_DRAWS = 500


def _to_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ('1', 'true', 'yes', 'on'):
        return True
    if text in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError(f"ожидалось логическое значение, получено '{value}'")


def _to_floats(value) -> tuple:
    if isinstance(value, (list, tuple)):
        return tuple(float(v) for v in value)
    return tuple(float(v) for v in str(value).split(',') if v.strip())


def _to_names(value) -> tuple:
    if isinstance(value, (list, tuple)):
        return tuple(str(v) for v in value)
    return tuple(v.strip() for v in str(value).split(',') if v.strip())


def _to_int(value) -> int:
    if isinstance(value, bool):
        raise ValueError("ожидалось целое число")
    if isinstance(value, float) and not value.is_integer():
        raise ValueError(f"ожидалось целое число, получено {value}")
    return int(value)


@dataclass(frozen=True)
class Field:
    """Описание одного параметра командной строки и файла конфигурации"""

    name: str
    convert: Callable[[Any], Any]
    default: Any = None
    help: str = ''
    check: Optional[Callable[[Any], bool]] = None
    rule: str = ''
    required: bool = False

    @property
    def flag(self) -> str:
        return '--' + self.name.replace('_', '-')


def _positive(v) -> bool:
    return v > 0


def _at_least_one(v) -> bool:
    return v >= 1


def _choice(options) -> Callable[[Any], bool]:
    return lambda v: v in options


COMMON_FIELDS = (
    Field('seed', _to_int, DEFAULT_SEED, 'Зерно генератора', lambda v: v >= 0, '≥ 0'),
    Field('threads', _to_int, DEFAULT_THREADS, 'Потоки для внутренних циклов', _at_least_one, '≥ 1'),
    Field('log_level', lambda v: str(v).upper(), DEFAULT_LOG_LEVEL, 'Уровень логирования',
          _choice(LOG_LEVELS), ', '.join(LOG_LEVELS)),
)

COMMAND_FIELDS = {
    'simulate': (
        Field('output', str, None, 'CSV-файл набора данных', required=True),
        Field('preset', str, None, 'Предустановка исследования', _choice(SIMULATION_PRESETS),
              ', '.join(SIMULATION_PRESETS)),
        Field('n', _to_int, 2000, 'Число наблюдений', lambda v: v >= 2, '≥ 2'),
        Field('beta', _to_floats, (0.0, 1.0, -5.0), 'Истинные β через запятую', lambda v: len(v) >= 1, 'непусто'),
        Field('sigma2', float, 1.0, 'Истинная σ²', _positive, '> 0'),
        Field('omega', float, 0.5, 'Истинная доля наггета ω', lambda v: 0.0 <= v <= 1.0, '[0, 1]'),
        Field('phi', float, 0.236, 'Истинный параметр диапазона φ', _positive, '> 0'),
        Field('kernel', str, 'exponential', 'Семейство корреляции', _choice(CORRELATION_FAMILIES),
              ', '.join(CORRELATION_FAMILIES)),
        Field('m_sim', _to_int, None, 'Соседи при последовательной выборке', _at_least_one, '≥ 1'),
        Field('test_fraction', float, 0.2, 'Доля тестовых наблюдений', lambda v: 0.0 <= v < 1.0, '[0, 1)'),
        Field('dim', _to_int, 2, 'Размерность области', _at_least_one, '≥ 1'),
    ),
    'fit': (
        Field('data', str, None, 'CSV-файл набора данных', required=True),
        Field('output', str, None, 'CSV-файл выборки', required=True),
        Field('algorithm', str, 'nn', 'Алгоритм', _choice(ALGORITHMS), ', '.join(ALGORITHMS)),
        Field('iterations', _to_int, None, 'Число итераций (full, nn, barker)', _at_least_one, '≥ 1'),
        Field('epochs', _to_int, None, 'Число эпох (fb)', _at_least_one, '≥ 1'),
        Field('batches', _to_int, None, 'Число батчей H (fb)', _at_least_one, '≥ 1'),
        Field('m', _to_int, DEFAULT_NEIGHBORS, 'Число соседей M', _at_least_one, '≥ 1'),
        Field('batch_fraction', float, 0.1, 'Доля батча для β и σ² (barker)', lambda v: 0.0 < v <= 1.0, '(0, 1]'),
        Field('batch_size', _to_int, None, 'Размер батча для β и σ² (barker)', _at_least_one, '≥ 1'),
        Field('cutoff', float, 1.0, 'Порог c', lambda v: 0.0 < v <= 3.0, '(0, 3]'),
        Field('b_init', _to_int, None, 'Начальный батч B_init', _at_least_one, '≥ 1'),
        Field('b_inc', _to_int, None, 'Приращение батча B_inc', _at_least_one, '≥ 1'),
        Field('proposal_scales', _to_floats, (0.5, 0.5), 'Масштабы предложения для ω*, φ*',
              lambda v: len(v) == 2 and min(v) >= 0.0, 'два числа ≥ 0'),
        Field('prior_kind', str, 'continuous', 'Вид априорного распределения θ', _choice(PRIOR_KINDS),
              ', '.join(PRIOR_KINDS)),
        Field('grid_size', _to_int, DEFAULT_GRID_SIZE, 'Размер сетки θ', _at_least_one, '≥ 1'),
        Field('ordering', str, 'maxmin', 'Схема упорядочивания', _choice(ORDERING_SCHEMES), ', '.join(ORDERING_SCHEMES)),
        Field('kernel', str, 'exponential', 'Семейство корреляции', _choice(CORRELATION_FAMILIES),
              ', '.join(CORRELATION_FAMILIES)),
        Field('burn_in', float, 0.5, 'Доля прогрева', lambda v: 0.0 <= v < 1.0, '[0, 1)'),
        Field('adapt', _to_bool, True, 'Адаптация масштабов на прогреве'),
        Field('resplit', _to_bool, False, 'Новое разбиение на батчи в каждой эпохе (fb)'),
        Field('force_full_batch', _to_bool, False, 'Тест Баркера на полных данных'),
        Field('fixed', _to_names, (), 'Фиксированные параметры (beta, sigma2)',
              lambda v: set(v) <= set(FIXABLE), ', '.join(FIXABLE)),
        Field('log_every', _to_int, 1000, 'Период записи прогресса', _at_least_one, '≥ 1'),
        Field('correction', str, None, 'Файл корректирующего распределения (barker)'),
        Field('graph', str, None, 'Готовый граф соседей (вместо построения)'),
        Field('graph_output', str, None, 'Файл для графа соседей'),
        Field('beta_mean', float, DEFAULT_BETA_MEAN, 'Априорное среднее β'),
        Field('beta_var', float, DEFAULT_BETA_VAR, 'Априорная дисперсия β', _positive, '> 0'),
        Field('sigma2_shape', float, DEFAULT_SIGMA2_SHAPE, 'Форма a_σ', _positive, '> 0'),
        Field('sigma2_rate', float, DEFAULT_SIGMA2_RATE, 'Интенсивность b_σ', _positive, '> 0'),
        Field('theta_var', float, DEFAULT_THETA_VAR, 'Дисперсия ω*, φ*', _positive, '> 0'),
    ),
    'predict': (
        Field('data', str, None, 'CSV-файл набора данных', required=True),
        Field('draws', str, None, 'CSV-файл выборки', required=True),
        Field('output', str, None, 'CSV-файл предсказаний', required=True),
        Field('m', _to_int, DEFAULT_NEIGHBORS, 'Число соседей для кригинга', _at_least_one, '≥ 1'),
        Field('max_draws', _to_int, DEFAULT_PREDICT_DRAWS, 'Предел числа выборок', _at_least_one, '≥ 1'),
        Field('keep_draws', _to_bool, False, 'Сохранить выборки Y*'),
    ),
    'score': (
        Field('predictions', str, None, 'CSV-файл предсказаний'),
        Field('draws', str, None, 'CSV-файл выборки для оценки параметров'),
        Field('truth', str, None, 'Набор данных с метаданными истинных параметров'),
        Field('metrics', str, None, 'CSV-файл метрик', required=True),
        Field('label', str, 'run', 'Метка строки метрик'),
    ),
    'correction-dist': (
        Field('output', str, None, 'Файл корректирующего распределения', required=True),
        Field('c', float, 1.0, 'Дисперсия гауссовой компоненты', lambda v: 0.0 < v <= 3.0, '(0, 3]'),
        Field('penalty', float, None, 'Штраф LASSO (по умолчанию подбирается)', lambda v: v >= 0.0, '≥ 0'),
    ),
}


def command_fields(command: str) -> Dict[str, Field]:
    if command not in COMMAND_FIELDS:
        raise ValidationError(f"Неизвестная команда '{command}', доступны: {', '.join(COMMANDS)}")
    return {item.name: item for item in COMMON_FIELDS + COMMAND_FIELDS[command]}


@dataclass(frozen=True)
class RunConfig:
    """Проверенные параметры одной команды"""

    command: str
    values: Mapping[str, Any]
    sources: Mapping[str, str]

    def __getattr__(self, name: str):
        values = object.__getattribute__(self, 'values')
        if name in values:
            return values[name]
        raise AttributeError(name)

    def get(self, name: str, default=None):
        return self.values.get(name, default)


def read_config_file(path: str) -> Dict[str, Optional[str]]:
    """
    Прочитать плоский файл key=value

    Дефисы в ключах заменяются подчёркиваниями.
    """
    if not Path(path).is_file():
        raise StorageError(f"Файл конфигурации {path} не найден")
    values = dotenv_values(path)
    return {key.strip().replace('-', '_'): value for key, value in values.items()}


def load_run_config(command: str, flags: Mapping[str, Any], config_file: Optional[str] = None) -> RunConfig:
    """
    Собрать конфигурацию: флаг > файл > значение по умолчанию

    Args:
        command (str): Имя команды
        flags: Значения флагов (None - флаг не задан)
        config_file (str): Путь к файлу key=value

    Returns:
        RunConfig: Проверенная конфигурация

    Raises:
        ValidationError: с перечнем всех проблем
    """
    schema = command_fields(command)
    file_values = read_config_file(config_file) if config_file else {}
    problems = []

    unknown = sorted(set(file_values) - set(schema))
    if unknown:
        problems.append(f"неизвестные ключи в {config_file}: {', '.join(unknown)}")

    preset = flags.get('preset') or file_values.get('preset')
    preset_values = {}
    if command == 'simulate' and preset:
        try:
            preset_values = get_simulation_preset(preset)
        except ValidationError as e:
            problems.append(str(e))

    values, sources = {}, {}
    for name, item in schema.items():
        if flags.get(name) is not None:
            raw, source = flags[name], 'flag'
        elif file_values.get(name) not in (None, ''):
            raw, source = file_values[name], 'file'
        elif name in preset_values:
            raw, source = preset_values[name], 'preset'
        else:
            raw, source = item.default, 'default'

        if raw is None:
            values[name], sources[name] = None, source
            continue
        try:
            values[name] = item.convert(raw)
        except (TypeError, ValueError) as e:
            problems.append(f"{name}: некорректное значение '{raw}' ({e})")
            continue
        sources[name] = source

    config = RunConfig(command=command, values=MappingProxyType(values), sources=MappingProxyType(sources))
    problems.extend(collect_problems(config, schema))
    if problems:
        raise ValidationError("Ошибки конфигурации: " + "; ".join(problems))
    logger.debug(f"Конфигурация {command}: {dict(values)}")
    return config


def collect_problems(config: RunConfig, schema: Optional[Dict[str, Field]] = None) -> list:
    schema = schema or command_fields(config.command)
    problems = []
    for name, item in schema.items():
        if name not in config.values:
            continue
        value = config.values[name]
        if value is None:
            if item.required:
                problems.append(f"не задан обязательный параметр {item.flag}")
            continue
        if item.check is not None and not item.check(value):
            problems.append(f"{name} = {value!r} вне допустимых значений ({item.rule})")

    if config.command == 'fit' and not problems:
        from handlers.fit_handler import algo_config_from
        try:
            algo_config_from(config)
        except ValidationError as e:
            problems.append(str(e))
    if config.command == 'score' and not (config.get('predictions') or (config.get('draws') and config.get('truth'))):
        problems.append("для score нужен --predictions или пара --draws и --truth")
    return problems
