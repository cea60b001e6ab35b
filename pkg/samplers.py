"""Оркестрация цепей: Full, NN, Barker и FB"""
import logging
import time
from dataclasses import dataclass, field, fields
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from acceptance import BarkerSettings, CorrectionDistribution, barker_accept_step, estimate_correction_distribution, mh_accept_step
from errors import NumericalError, ValidationError
from gibbs import update_beta, update_sigma2
from model import (
    CORRELATION_FAMILIES,
    DiscreteThetaPrior,
    GpParams,
    KernelSpec,
    PriorSpec,
    SpatialDataset,
    ThetaPrior,
    from_unconstrained,
    omega_phi_to_unconstrained,
)
from neighbors import ORDERING_SCHEMES, NeighborGraph, build_neighbor_sets, order_observations
from vecchia import DENSE_LIMIT, Cache, ConditionalCache, DenseCache, loglik_terms

logger = logging.getLogger(__name__)

ALGORITHMS = ("full", "nn", "barker", "fb")
PRIOR_KINDS = ("continuous", "discrete")
FIXABLE = ("beta", "sigma2")

TARGET_ACCEPTANCE = 0.4
ADAPT_WINDOW = 50
DERIVED_NAME = "sigma2_omega_over_phi"
DIAGNOSTIC_COLUMNS = ("delta", "sigma2_lambda", "gate_value", "classical_value")


def param_names(n_beta: int) -> List[str]:
    return [f"beta{p}" for p in range(n_beta)] + ["sigma2", "omega", "phi"]


@dataclass(frozen=True)
class AlgoConfig:
    """
    Настройки одной цепи

    Для fb задаются epochs и batches (E·H сохранённых итераций), для
    остальных алгоритмов - iterations. NN исполняется как FB с H = 1.
    """

    algorithm: str = "nn"
    iterations: Optional[int] = None
    epochs: Optional[int] = None
    batches: Optional[int] = None
    m: int = 15
    batch_fraction: float = 0.1
    batch_size: Optional[int] = None
    cutoff: float = 1.0
    b_init: Optional[int] = None
    b_inc: Optional[int] = None
    proposal_scales: Tuple[float, float] = (0.5, 0.5)
    prior_kind: str = "continuous"
    grid_size: int = 20
    seed: int = 0
    ordering: str = "maxmin"
    kernel: str = "exponential"
    burn_in: float = 0.5
    adapt: bool = True
    resplit: bool = False
    force_full_batch: bool = False
    fixed: Tuple[str, ...] = ()
    initial: Optional[GpParams] = None
    threads: int = 1
    log_every: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "proposal_scales", tuple(float(s) for s in self.proposal_scales))
        object.__setattr__(self, "fixed", tuple(self.fixed))

        problems = []
        if self.algorithm not in ALGORITHMS:
            problems.append(f"неизвестный алгоритм '{self.algorithm}', доступны: {', '.join(ALGORITHMS)}")
        elif self.algorithm == "fb":
            if self.iterations is not None:
                problems.append("для fb задаются epochs и batches, а не iterations")
            if self.epochs is None or self.epochs < 1:
                problems.append("для fb нужно epochs ≥ 1")
            if self.batches is None or self.batches < 1:
                problems.append("для fb нужно batches ≥ 1")
        else:
            if self.epochs is not None or self.batches is not None:
                problems.append(f"epochs и batches допустимы только для fb, а не для {self.algorithm}")
            if self.iterations is None or self.iterations < 1:
                problems.append(f"для {self.algorithm} нужно iterations ≥ 1")

        if self.m < 1:
            problems.append("число соседей M должно быть ≥ 1")
        if not (0.0 < self.batch_fraction <= 1.0):
            problems.append("доля батча должна лежать в (0, 1]")
        if self.batch_size is not None and self.batch_size < 1:
            problems.append("размер батча должен быть ≥ 1")
        if not (0.0 < self.cutoff <= 3.0):
            problems.append("порог c должен лежать в (0, 3]")
        for name in ("b_init", "b_inc"):
            value = getattr(self, name)
            if value is not None and value < 1:
                problems.append(f"{name} должен быть ≥ 1")
        if len(self.proposal_scales) != 2 or not all(np.isfinite(s) and s >= 0.0 for s in self.proposal_scales):
            problems.append("нужны два неотрицательных масштаба предложения")
        if self.prior_kind not in PRIOR_KINDS:
            problems.append(f"вид априорного распределения θ: {', '.join(PRIOR_KINDS)}")
        if self.grid_size < 1:
            problems.append("размер сетки θ должен быть ≥ 1")
        if self.ordering not in ORDERING_SCHEMES:
            problems.append(f"схема упорядочивания: {', '.join(ORDERING_SCHEMES)}")
        if self.kernel not in CORRELATION_FAMILIES:
            problems.append(f"семейство корреляции: {', '.join(CORRELATION_FAMILIES)}")
        if not (0.0 <= self.burn_in < 1.0):
            problems.append("доля прогрева должна лежать в [0, 1)")
        unknown = set(self.fixed) - set(FIXABLE)
        if unknown:
            problems.append(f"фиксировать можно только {', '.join(FIXABLE)}, получено {', '.join(sorted(unknown))}")
        if self.threads < 1:
            problems.append("число потоков должно быть ≥ 1")
        if self.log_every < 1:
            problems.append("log_every должно быть ≥ 1")

        if problems:
            raise ValidationError("Некорректная конфигурация цепи: " + "; ".join(problems))

    @property
    def schedule(self) -> Tuple[int, int]:
        """(число эпох, число батчей) расписания; для full, nn и barker H = 1"""
        if self.algorithm == "fb":
            return self.epochs, self.batches
        return self.iterations, 1

    @property
    def total_iterations(self) -> int:
        epochs, batches = self.schedule
        return epochs * batches

    @property
    def burn_in_iterations(self) -> int:
        return int(self.burn_in * self.total_iterations)

    def resolved_batch_size(self, n: int) -> int:
        size = self.batch_size if self.batch_size is not None else int(round(self.batch_fraction * n))
        return int(min(max(size, 1), n))

    def resolved_b_init(self, n: int) -> int:
        return self.b_init if self.b_init is not None else max(1000, int(np.ceil(0.01 * n)))

    def resolved_b_inc(self, n: int) -> int:
        return self.b_inc if self.b_inc is not None else self.resolved_b_init(n)

    def to_dict(self) -> dict:
        """Плоское представление для файла метаданных"""
        echo = {}
        for item in fields(self):
            value = getattr(self, item.name)
            if item.name == "initial":
                value = None if value is None else ",".join(repr(float(v)) for v in value.to_vector())
            elif item.name in ("proposal_scales", "fixed"):
                value = ",".join(str(v) for v in value)
            echo[item.name] = value
        return echo

    @classmethod
    def from_dict(cls, values: dict) -> "AlgoConfig":
        """Обратное к to_dict; значения могут быть строками"""
        known = {item.name: item for item in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            if key not in known:
                continue
            if raw is None or raw in ("", "None"):
                kwargs[key] = None if key not in ("fixed",) else ()
                continue
            if key == "initial":
                kwargs[key] = GpParams.from_vector(np.array([float(v) for v in str(raw).split(",")]))
            elif key == "proposal_scales":
                kwargs[key] = tuple(float(v) for v in str(raw).split(","))
            elif key == "fixed":
                kwargs[key] = tuple(v for v in str(raw).split(",") if v)
            elif key in ("adapt", "resplit", "force_full_batch"):
                kwargs[key] = raw if isinstance(raw, bool) else str(raw).lower() == "true"
            elif key in ("algorithm", "prior_kind", "ordering", "kernel"):
                kwargs[key] = str(raw)
            elif key in ("batch_fraction", "cutoff", "burn_in"):
                kwargs[key] = float(raw)
            else:
                kwargs[key] = int(raw)
        return cls(**kwargs)


@dataclass(eq=False)
class ChainOutput:
    """
    Выборка из апостериорного распределения и трассы диагностики

    Attributes:
        draws: Матрица S × (P+4): β₀..β_P, σ², ω, φ на каждой итерации
        accepted: Индикаторы принятия θ
        batch_size: Размер батча шага θ
        wall_time: Время итерации в секундах
        diagnostics: Δ, σ²_Λ, значение затвора и классическая поправка
    """

    draws: np.ndarray
    accepted: np.ndarray
    batch_size: np.ndarray
    wall_time: np.ndarray
    seed: int
    config: AlgoConfig
    kernel: Optional[KernelSpec] = None
    diagnostics: dict = field(default_factory=dict)
    graph: Optional[NeighborGraph] = None

    def __post_init__(self):
        self.draws = np.atleast_2d(np.asarray(self.draws, dtype=float))
        self.accepted = np.asarray(self.accepted, dtype=bool).reshape(-1)
        self.batch_size = np.asarray(self.batch_size, dtype=int).reshape(-1)
        self.wall_time = np.asarray(self.wall_time, dtype=float).reshape(-1)
        rows = self.draws.shape[0]
        for name in ("accepted", "batch_size", "wall_time"):
            if getattr(self, name).shape[0] != rows:
                raise ValidationError(f"Длина трассы {name} не совпадает с числом итераций {rows}")
        self.diagnostics = {
            name: np.asarray(self.diagnostics.get(name, np.full(rows, np.nan)), dtype=float)
            for name in DIAGNOSTIC_COLUMNS
        }

        sigma2, omega, phi = self.draws[:, -3], self.draws[:, -2], self.draws[:, -1]
        if np.any(sigma2 <= 0.0) or np.any((omega < 0.0) | (omega > 1.0)):
            raise ValidationError("Сохранённые значения σ² или ω нарушают ограничения")
        if self.kernel is not None and np.any((phi < self.kernel.phi_min) | (phi > self.kernel.phi_max)):
            raise ValidationError("Сохранённые значения φ вне границ ядра")

    @property
    def n_iterations(self) -> int:
        return self.draws.shape[0]

    @property
    def n_beta(self) -> int:
        return self.draws.shape[1] - 3

    @property
    def names(self) -> List[str]:
        return param_names(self.n_beta)

    @property
    def burn_in(self) -> int:
        return int(self.config.burn_in * self.n_iterations)

    def kept_draws(self, burn_in: bool = True) -> np.ndarray:
        return self.draws[self.burn_in:] if burn_in else self.draws

    def with_derived(self, burn_in: bool = True) -> pd.DataFrame:
        """Выборка параметров со столбцом σ²ω/φ"""
        frame = pd.DataFrame(self.kept_draws(burn_in), columns=self.names)
        frame[DERIVED_NAME] = frame["sigma2"] * frame["omega"] / frame["phi"]
        return frame

    @property
    def acceptance_rate(self) -> float:
        return float(self.accepted.mean())

    @property
    def mean_batch_size(self) -> float:
        return float(self.batch_size.mean())

    @property
    def total_wall_time(self) -> float:
        return float(self.wall_time.sum())

    def to_frame(self) -> pd.DataFrame:
        """Таблица для CSV: обязательные столбцы и затем диагностика"""
        frame = pd.DataFrame(self.draws, columns=self.names)
        frame.insert(0, "iter", np.arange(1, self.n_iterations + 1))
        frame["accepted"] = self.accepted.astype(int)
        frame["batch_size"] = self.batch_size
        frame["wall_ms"] = self.wall_time * 1000.0
        for name in DIAGNOSTIC_COLUMNS:
            frame[name] = self.diagnostics[name]
        return frame

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, seed: int, config: AlgoConfig,
                   kernel: Optional[KernelSpec] = None) -> "ChainOutput":
        betas = [c for c in frame.columns if c.startswith("beta")]
        names = betas + ["sigma2", "omega", "phi"]
        missing = [c for c in names + ["accepted", "batch_size", "wall_ms"] if c not in frame.columns]
        if missing:
            raise ValidationError(f"В таблице выборки нет столбцов: {', '.join(missing)}")
        return cls(
            draws=frame[names].to_numpy(dtype=float),
            accepted=frame["accepted"].to_numpy() != 0,
            batch_size=frame["batch_size"].to_numpy(dtype=int),
            wall_time=frame["wall_ms"].to_numpy(dtype=float) / 1000.0,
            seed=seed,
            config=config,
            kernel=kernel,
            diagnostics={c: frame[c].to_numpy(dtype=float) for c in DIAGNOSTIC_COLUMNS if c in frame.columns},
        )


def posterior_summary(output: ChainOutput, burn_in: bool = True) -> pd.DataFrame:
    """Апостериорные средние, СКО и 95% интервалы по параметрам и σ²ω/φ"""
    frame = output.with_derived(burn_in)
    return pd.DataFrame({
        "mean": frame.mean(),
        "sd": frame.std(ddof=1) if len(frame) > 1 else frame.mean() * 0.0,
        "q025": frame.quantile(0.025),
        "q975": frame.quantile(0.975),
    })


def propose_theta(current: tuple, theta_prior: ThetaPrior, scales, rng: np.random.Generator) -> Tuple[tuple, float]:
    """
    Предложение для θ

    Непрерывное априорное распределение: случайное блуждание по (ω*, φ*)
    с масштабами scales; дискретное: независимый равномерный выбор узла
    сетки. В обоих случаях log-отношение предложных плотностей равно 0.

    Returns:
        Tuple: (предложение, log-отношение предложных плотностей)
    """
    if isinstance(theta_prior, DiscreteThetaPrior):
        size_omega, size_phi = theta_prior.shape
        return (int(rng.integers(size_omega)), int(rng.integers(size_phi))), 0.0
    step = rng.standard_normal(2) * np.asarray(scales, dtype=float)
    return (float(current[0] + step[0]), float(current[1] + step[1])), 0.0


def adapt_proposal_scales(acceptance_history, scales, t: int, target: float = TARGET_ACCEPTANCE) -> np.ndarray:
    """Масштаб умножается на exp((rate − target)/√t) по окну t"""
    if t < 1:
        raise ValidationError("Номер окна адаптации должен быть ≥ 1")
    rate = float(np.mean(acceptance_history))
    return np.asarray(scales, dtype=float) * np.exp((rate - target) / np.sqrt(t))


def split_batches(n: int, h: int, rng: np.random.Generator) -> List[np.ndarray]:
    """Случайное разбиение {0..n−1} на H непересекающихся батчей, размеры отличаются не более чем на 1"""
    if h < 1 or h > n:
        raise ValidationError(f"Число батчей H = {h} должно лежать в [1, n = {n}]")
    return [np.sort(batch) for batch in np.array_split(rng.permutation(n), h)]


def theta_values(theta: tuple, theta_prior: ThetaPrior, kernel: KernelSpec) -> Tuple[float, float]:
    """(ω, φ) для состояния цепи: индексы сетки или (ω*, φ*)"""
    if isinstance(theta_prior, DiscreteThetaPrior):
        return float(theta_prior.omega_grid[theta[0]]), float(theta_prior.phi_grid[theta[1]])
    return from_unconstrained(theta[0], theta[1], kernel)


def theta_log_prior(theta: tuple, theta_prior: ThetaPrior) -> float:
    return theta_prior.log_density(theta[0], theta[1])


def initial_state(dataset: SpatialDataset, prior: PriorSpec, kernel: KernelSpec,
                  config: AlgoConfig) -> Tuple[np.ndarray, float, tuple]:
    """
    Начальное состояние (β, σ², θ)

    По умолчанию β - МНК-оценка, σ² - средний квадрат остатков, θ - центр
    априорного распределения (ω = 0.5, φ посередине границ) или ближайший к
    нему узел сетки.
    """
    theta_prior = prior.theta
    if config.initial is not None:
        init = config.initial
        if init.n_beta != dataset.n_beta:
            raise ValidationError(f"Начальное β имеет длину {init.n_beta}, а в данных {dataset.n_beta} коэффициентов")
        kernel.check_phi(init.phi)
        beta, sigma2, omega, phi = np.array(init.beta), init.sigma2, init.omega, init.phi
    else:
        beta = np.linalg.lstsq(dataset.X, dataset.y, rcond=None)[0]
        resid = dataset.y - dataset.X @ beta
        sigma2 = float(np.mean(resid * resid))
        if not sigma2 > 0.0:
            sigma2 = 1.0
        omega, phi = 0.5, 0.5 * (kernel.phi_min + kernel.phi_max)

    if isinstance(theta_prior, DiscreteThetaPrior):
        theta = theta_prior.nearest(omega, phi)
    else:
        theta = omega_phi_to_unconstrained(omega, phi, kernel)
    return beta, float(sigma2), theta


class ChainRunner:
    """Состояние одной цепи и её расписание"""

    def __init__(self, dataset: SpatialDataset, config: AlgoConfig, prior: PriorSpec, kernel: KernelSpec,
                 graph: Optional[NeighborGraph], cd: Optional[CorrectionDistribution], rng: np.random.Generator):
        self.dataset = dataset
        self.config = config
        self.prior = prior
        self.kernel = kernel
        self.graph = graph
        self.cd = cd
        self.rng = rng
        self.n = dataset.n

        self.beta, self.sigma2, self.theta = initial_state(dataset, prior, kernel, config)
        self.cache = self.make_cache(self.theta)
        self.scales = np.array(config.proposal_scales, dtype=float)
        self.settings = None
        if config.algorithm == "barker":
            self.settings = BarkerSettings(
                cutoff=config.cutoff,
                b_init=config.resolved_b_init(self.n),
                b_inc=config.resolved_b_inc(self.n),
                force_full_batch=config.force_full_batch,
            )

    def make_cache(self, theta: tuple) -> Cache:
        omega, phi = theta_values(theta, self.prior.theta, self.kernel)
        if self.config.algorithm == "full":
            return DenseCache(self.dataset, self.kernel, omega, phi)
        return ConditionalCache(self.graph, self.dataset, self.kernel, omega, phi, threads=self.config.threads)

    def random_batch(self) -> np.ndarray:
        size = self.config.resolved_batch_size(self.n)
        return np.sort(self.rng.permutation(self.n)[:size])

    def gibbs_step(self, beta_batch: np.ndarray, sigma2_batch: np.ndarray) -> None:
        if "beta" not in self.config.fixed:
            self.beta = update_beta(self.beta, beta_batch, self.cache, self.sigma2, self.prior, self.rng)
        if "sigma2" not in self.config.fixed:
            self.sigma2 = update_sigma2(self.beta, sigma2_batch, self.cache, self.prior, self.rng)

    def theta_step(self, batch: Optional[np.ndarray]):
        proposal, log_q = propose_theta(self.theta, self.prior.theta, self.scales, self.rng)
        log_ratio = theta_log_prior(proposal, self.prior.theta) - theta_log_prior(self.theta, self.prior.theta) + log_q
        cache_prop = self.cache if proposal == self.theta else self.make_cache(proposal)
        cache_cur, beta, sigma2 = self.cache, self.beta, self.sigma2

        def lambda_fn(rows: np.ndarray) -> np.ndarray:
            return loglik_terms(cache_prop, beta, sigma2, rows) - loglik_terms(cache_cur, beta, sigma2, rows)

        if self.settings is not None:
            _, diagnostics = barker_accept_step(proposal, self.theta, lambda_fn, self.n, log_ratio, self.cd,
                                                self.settings, self.rng)
        else:
            _, diagnostics = mh_accept_step(proposal, self.theta, lambda_fn, batch, self.n, log_ratio, self.rng)
        if diagnostics.accepted:
            self.theta = proposal
            self.cache = cache_prop
        return diagnostics

    def current_row(self) -> np.ndarray:
        omega, phi = theta_values(self.theta, self.prior.theta, self.kernel)
        return np.concatenate([self.beta, [self.sigma2, omega, phi]])

    def run(self) -> ChainOutput:
        config = self.config
        epochs, n_batches = config.schedule
        total = config.total_iterations
        burn = config.burn_in_iterations
        adapt = config.adapt and config.prior_kind == "continuous"

        draws = np.empty((total, self.dataset.n_beta + 3))
        accepted = np.zeros(total, dtype=bool)
        batch_size = np.zeros(total, dtype=int)
        wall_time = np.zeros(total)
        diagnostics = {name: np.zeros(total) for name in DIAGNOSTIC_COLUMNS}

        batches = None if config.algorithm == "barker" else split_batches(self.n, n_batches, self.rng)
        window, window_count = [], 0

        logger.info(f"Старт цепи {config.algorithm}: {total} итераций, n={self.n}, seed={config.seed}")
        for t in range(total):
            start = time.perf_counter()
            try:
                if batches is None:
                    self.gibbs_step(self.random_batch(), self.random_batch())
                    step = self.theta_step(None)
                else:
                    h = t % n_batches
                    if h == 0 and t > 0 and config.resplit:
                        batches = split_batches(self.n, n_batches, self.rng)
                    self.gibbs_step(batches[h], batches[h])
                    step = self.theta_step(batches[h])
            except NumericalError as e:
                raise NumericalError(f"Итерация {t + 1}: {e}", index=e.index) from e

            draws[t] = self.current_row()
            accepted[t] = step.accepted
            batch_size[t] = step.batch_size
            diagnostics["delta"][t] = step.delta
            diagnostics["sigma2_lambda"][t] = step.sigma2_lambda
            diagnostics["gate_value"][t] = step.gate_value
            diagnostics["classical_value"][t] = step.classical_value
            wall_time[t] = time.perf_counter() - start

            if adapt and t < burn:
                window.append(step.accepted)
                if len(window) == ADAPT_WINDOW:
                    window_count += 1
                    self.scales = adapt_proposal_scales(window, self.scales, window_count)
                    window = []

            if (t + 1) % config.log_every == 0:
                logger.info(
                    f"{config.algorithm}: итерация {t + 1}/{total}, доля принятий {accepted[:t + 1].mean():.3f}, "
                    f"средний батч {batch_size[:t + 1].mean():.1f}"
                )

        logger.info(f"Цепь {config.algorithm} завершена за {wall_time.sum():.1f} с, доля принятий {accepted.mean():.3f}")
        return ChainOutput(
            draws=draws,
            accepted=accepted,
            batch_size=batch_size,
            wall_time=wall_time,
            seed=config.seed,
            config=config,
            kernel=self.kernel,
            diagnostics=diagnostics,
            graph=self.graph,
        )


def run_chain(dataset: SpatialDataset, config: AlgoConfig, prior: PriorSpec, kernel: Optional[KernelSpec] = None,
              cd: Optional[CorrectionDistribution] = None, graph: Optional[NeighborGraph] = None) -> ChainOutput:
    """
    Запустить цепь выбранного алгоритма

    Args:
        dataset: Обучающие данные в исходном порядке
        config: Настройки цепи
        prior: Априорные распределения
        kernel: Ядро (по умолчанию семейство config.kernel с границами φ по диаметру)
        cd: Корректирующее распределение для barker (строится, если не передано)
        graph: Готовый граф соседей для упорядочения данных

    Returns:
        ChainOutput: Выборка и диагностика

    Raises:
        ValidationError: при несогласованной конфигурации
        NumericalError: при вырождении, с номером итерации
    """
    if kernel is None:
        kernel = KernelSpec.from_locations(dataset.locations, config.kernel)
    elif kernel.family != config.kernel:
        raise ValidationError(f"Ядро {kernel.family} не совпадает с настройкой {config.kernel}")
    prior.check_against(kernel, dataset.n_beta)
    if prior.theta.kind != config.prior_kind:
        raise ValidationError(f"Априорное распределение θ {prior.theta.kind}, а в настройках {config.prior_kind}")
    if config.algorithm == "fb" and config.batches > dataset.n:
        raise ValidationError(f"Число батчей H = {config.batches} больше n = {dataset.n}")

    seeds = np.random.SeedSequence(config.seed).spawn(2)
    rng = np.random.default_rng(seeds[0])

    if config.algorithm == "full":
        if dataset.n > DENSE_LIMIT:
            raise ValidationError(f"Алгоритм full ограничен n ≤ {DENSE_LIMIT}, получено n = {dataset.n}")
        ordered, graph = dataset, None
    else:
        if graph is None:
            ordering_seed = int(seeds[1].generate_state(1)[0])
            perm = order_observations(dataset.locations, config.ordering, seed=ordering_seed)
            ordered = dataset.reorder(perm)
            graph = build_neighbor_sets(ordered.locations, config.m, perm, config.ordering)
        else:
            if graph.n != dataset.n:
                raise ValidationError(f"Граф соседей построен для n = {graph.n}, а в данных n = {dataset.n}")
            if graph.m != config.m:
                raise ValidationError(f"Граф соседей построен для M = {graph.m}, а в настройках M = {config.m}")
            ordered = dataset.reorder(graph.perm)

    if config.algorithm == "barker":
        if cd is None:
            cd = estimate_correction_distribution(config.cutoff)
        elif abs(cd.c - config.cutoff) > 1e-12:
            raise ValidationError(f"Корректирующее распределение построено для c={cd.c}, а порог {config.cutoff}")

    return ChainRunner(ordered, config, prior, kernel, graph, cd, rng).run()
