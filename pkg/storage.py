"""Чтение и запись файлов: наборы данных, цепи, предсказания, метрики, графы соседей и корректирующие распределения"""
import hashlib
import logging
import re
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np
import pandas as pd
from dotenv import dotenv_values

from acceptance import CorrectionDistribution
from errors import StorageError, ValidationError
from model import KernelSpec, SpatialDataset
from neighbors import NeighborGraph
from prediction import PredictiveSummary
from samplers import AlgoConfig, ChainOutput

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

FLOAT_FORMAT = "%.17g"
LINE_TERMINATOR = "\n"
SPLIT_VALUES = ("train", "test")
PREDICTION_COLUMNS = ("truth", "mean", "sd", "lo95", "hi95")

_GRAPH_HEADER = re.compile(r"#\s*n=(\d+)\s+M=(\d+)\s+scheme=(\S+)")


def meta_path(path: PathLike) -> Path:
    """Путь файла метаданных <stem>.meta рядом с основным файлом"""
    return Path(path).with_suffix(".meta")


def sha256_file(path: PathLike) -> str:
    """SHA-256 содержимого файла"""
    digest = hashlib.sha256()
    try:
        with open(path, "rb") as handle:
            for block in iter(lambda: handle.read(1 << 20), b""):
                digest.update(block)
    except OSError as e:
        raise StorageError(f"Не удалось прочитать {path}: {e}") from e
    return digest.hexdigest()


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


class ArtifactStore:
    """Файловое хранилище артефактов запуска"""

    def __init__(self, float_format: str = FLOAT_FORMAT):
        self.float_format = float_format

    def _write_frame(self, frame: pd.DataFrame, path: PathLike) -> None:
        try:
            Path(path).parent.mkdir(parents=True, exist_ok=True)
            frame.to_csv(path, index=False, float_format=self.float_format, lineterminator=LINE_TERMINATOR)
        except OSError as e:
            raise StorageError(f"Не удалось записать {path}: {e}") from e

    def _read_frame(self, path: PathLike) -> pd.DataFrame:
        try:
            return pd.read_csv(path, float_precision="round_trip")
        except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise StorageError(f"Файл {path} повреждён: {e}") from e
        except OSError as e:
            raise StorageError(f"Не удалось прочитать {path}: {e}") from e

    def write_meta(self, path: PathLike, values: Dict[str, object]) -> Path:
        """Записать файл метаданных строками key = value"""
        target = meta_path(path)
        lines = [f"{key} = {_format_value(value)}" for key, value in values.items()]
        try:
            target.write_text(LINE_TERMINATOR.join(lines) + LINE_TERMINATOR, encoding="utf-8")
        except OSError as e:
            raise StorageError(f"Не удалось записать {target}: {e}") from e
        return target

    def read_meta(self, path: PathLike) -> Dict[str, Optional[str]]:
        target = meta_path(path)
        if not target.exists():
            raise StorageError(f"Файл метаданных {target} не найден")
        return dict(dotenv_values(target))

    def write_dataset(self, path: PathLike, dataset: SpatialDataset) -> None:
        """
        Записать набор данных в CSV со столбцами s1..sd, y, x1..xP, split

        Столбец свободного члена не сохраняется.
        """
        frame = pd.DataFrame(dataset.locations, columns=[f"s{k + 1}" for k in range(dataset.dim)])
        frame["y"] = dataset.y
        covariates = dataset.covariates
        for k in range(covariates.shape[1]):
            frame[f"x{k + 1}"] = covariates[:, k]
        mask = dataset.test_mask if dataset.test_mask is not None else np.zeros(dataset.n, dtype=bool)
        frame["split"] = np.where(mask, "test", "train")
        self._write_frame(frame, path)
        logger.info(f"Набор данных записан в {path}: n={dataset.n}")

    def read_dataset(self, path: PathLike) -> SpatialDataset:
        frame = self._read_frame(path)
        s_cols = sorted((c for c in frame.columns if re.fullmatch(r"s\d+", c)), key=lambda c: int(c[1:]))
        x_cols = sorted((c for c in frame.columns if re.fullmatch(r"x\d+", c)), key=lambda c: int(c[1:]))
        if not s_cols or "y" not in frame.columns:
            raise ValidationError(f"В {path} нужны столбцы координат s1.. и отклик y")
        unknown = set(frame.columns) - set(s_cols) - set(x_cols) - {"y", "split"}
        if unknown:
            raise ValidationError(f"Неизвестные столбцы в {path}: {', '.join(sorted(unknown))}")

        test_mask = None
        if "split" in frame.columns:
            split = frame["split"].astype(str)
            bad = ~split.isin(SPLIT_VALUES)
            if bad.any():
                raise ValidationError(f"Недопустимое значение split в строке {int(np.flatnonzero(bad)[0]) + 1}")
            test_mask = (split == "test").to_numpy()
        try:
            locations = frame[s_cols].to_numpy(dtype=float)
            y = frame["y"].to_numpy(dtype=float)
            covariates = frame[x_cols].to_numpy(dtype=float) if x_cols else None
        except ValueError as e:
            raise ValidationError(f"Нечисловые значения в {path}: {e}") from e
        dataset = SpatialDataset.from_arrays(locations, y, covariates, test_mask)
        logger.info(f"Набор данных прочитан из {path}: n={dataset.n}, d={dataset.dim}, P={dataset.n_beta - 1}")
        return dataset

    def write_chain(self, path: PathLike, output: ChainOutput, extra: Optional[Dict[str, object]] = None) -> None:
        """Записать выборку цепи и метаданные (настройки, зерно, ядро)"""
        self._write_frame(output.to_frame(), path)
        meta = {"seed": output.seed, **output.config.to_dict()}
        if output.kernel is not None:
            meta.update(kernel_family=output.kernel.family, phi_min=output.kernel.phi_min, phi_max=output.kernel.phi_max)
        meta.update(extra or {})
        self.write_meta(path, meta)
        logger.info(f"Цепь записана в {path}: {output.n_iterations} итераций")

    def read_chain(self, path: PathLike) -> Tuple[ChainOutput, Dict[str, Optional[str]]]:
        meta = self.read_meta(path)
        frame = self._read_frame(path)
        try:
            config = AlgoConfig.from_dict(meta)
            kernel = None
            if meta.get("kernel_family"):
                kernel = KernelSpec(meta["kernel_family"], float(meta["phi_min"]), float(meta["phi_max"]))
            seed = int(meta["seed"])
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"Метаданные цепи {meta_path(path)} некорректны: {e}") from e
        return ChainOutput.from_frame(frame, seed, config, kernel), meta

    def write_predictions(self, path: PathLike, locations: np.ndarray, truth: np.ndarray,
                          summary: PredictiveSummary) -> None:
        locations = np.atleast_2d(locations)
        frame = pd.DataFrame(locations, columns=[f"s{k + 1}" for k in range(locations.shape[1])])
        for name, values in zip(PREDICTION_COLUMNS, (truth, summary.mean, summary.sd, summary.lower, summary.upper)):
            frame[name] = values
        self._write_frame(frame, path)
        if summary.draws is not None:
            draws_path = Path(path).with_name(f"{Path(path).stem}_draws.csv")
            self._write_frame(pd.DataFrame(summary.draws.T), draws_path)
        logger.info(f"Предсказания записаны в {path}: {summary.size} точек")

    def read_predictions(self, path: PathLike) -> Tuple[PredictiveSummary, np.ndarray]:
        frame = self._read_frame(path)
        missing = [c for c in PREDICTION_COLUMNS if c not in frame.columns]
        if missing:
            raise ValidationError(f"В {path} нет столбцов: {', '.join(missing)}")
        summary = PredictiveSummary(
            mean=frame["mean"].to_numpy(dtype=float),
            sd=frame["sd"].to_numpy(dtype=float),
            lower=frame["lo95"].to_numpy(dtype=float),
            upper=frame["hi95"].to_numpy(dtype=float),
        )
        return summary, frame["truth"].to_numpy(dtype=float)

    def append_metrics(self, path: PathLike, label: str, metrics: Dict[str, float]) -> pd.DataFrame:
        """Добавить строку метрик с меткой запуска"""
        row = pd.DataFrame([{"label": label, **metrics}])
        if Path(path).exists():
            row = pd.concat([self._read_frame(path), row], ignore_index=True)
        self._write_frame(row, path)
        logger.info(f"Метрики '{label}' добавлены в {path}")
        return row

    def write_neighbor_graph(self, path: PathLike, graph: NeighborGraph) -> None:
        """Текстовый формат: заголовок, затем строки «позиция исходный_индекс | соседи»"""
        lines = [f"# n={graph.n} M={graph.m} scheme={graph.scheme}"]
        for i in range(graph.n):
            nbrs = " ".join(str(j) for j in graph.neighbor_set(i))
            lines.append(f"{i} {int(graph.perm[i])} | {nbrs}".rstrip())
        try:
            Path(path).write_text(LINE_TERMINATOR.join(lines) + LINE_TERMINATOR, encoding="utf-8")
        except OSError as e:
            raise StorageError(f"Не удалось записать {path}: {e}") from e

    def read_neighbor_graph(self, path: PathLike) -> NeighborGraph:
        try:
            lines = Path(path).read_text(encoding="utf-8").splitlines()
        except OSError as e:
            raise StorageError(f"Не удалось прочитать {path}: {e}") from e
        header = _GRAPH_HEADER.fullmatch(lines[0].strip()) if lines else None
        if header is None:
            raise ValidationError(f"Некорректный заголовок графа соседей в {path}")
        n, m, scheme = int(header.group(1)), int(header.group(2)), header.group(3)
        if len(lines) - 1 != n:
            raise ValidationError(f"В {path} ожидалось {n} строк соседей, получено {len(lines) - 1}")

        perm = np.full(n, -1, dtype=int)
        neighbors = np.full((n, min(m, max(n - 1, 0))), -1, dtype=int)
        for number, line in enumerate(lines[1:], start=2):
            left, _, right = line.partition("|")
            try:
                position, original = (int(v) for v in left.split())
                nbrs = [int(v) for v in right.split()]
                if position != number - 2:
                    raise ValueError(f"позиция {position} вместо {number - 2}")
                perm[position] = original
                neighbors[position, :len(nbrs)] = nbrs
            except (ValueError, IndexError) as e:
                raise ValidationError(f"Некорректная строка {number} графа соседей в {path}: {e}") from e
        graph = NeighborGraph(perm=perm, neighbors=neighbors, m=m, scheme=scheme)
        graph.check_invariants()
        logger.info(f"Граф соседей прочитан из {path}: n={n}, M={m}, схема {scheme}")
        return graph

    def write_correction(self, path: PathLike, cd: CorrectionDistribution) -> None:
        header = LINE_TERMINATOR.join([
            f"c = {cd.c!r}",
            f"grid = {cd.bound!r} {cd.grid_step!r}",
            f"eval_step = {cd.eval_step!r}",
            f"sup_error = {cd.sup_error!r}",
            f"penalty = {cd.penalty!r}",
        ])
        try:
            np.savetxt(path, np.column_stack([cd.grid, cd.mass]), fmt=self.float_format, header=header,
                       comments="# ", newline=LINE_TERMINATOR)
        except OSError as e:
            raise StorageError(f"Не удалось записать {path}: {e}") from e
        logger.info(f"Корректирующее распределение для c={cd.c} записано в {path}")

    def read_correction(self, path: PathLike) -> CorrectionDistribution:
        try:
            text = Path(path).read_text(encoding="utf-8")
            table = np.loadtxt(path, comments="#", ndmin=2)
        except OSError as e:
            raise StorageError(f"Не удалось прочитать {path}: {e}") from e
        except ValueError as e:
            raise StorageError(f"Файл {path} повреждён: {e}") from e

        header = {}
        for line in text.splitlines():
            if line.startswith("#") and "=" in line:
                key, _, value = line.lstrip("# ").partition("=")
                header[key.strip()] = value.strip()
        try:
            bound, grid_step = (float(v) for v in header["grid"].split())
            return CorrectionDistribution(
                grid=table[:, 0],
                mass=table[:, 1],
                c=float(header["c"]),
                sup_error=float(header["sup_error"]),
                penalty=float(header.get("penalty", 0.0)),
                grid_step=grid_step,
                eval_step=float(header["eval_step"]),
                bound=bound,
            )
        except (KeyError, ValueError) as e:
            raise ValidationError(f"Заголовок корректирующего распределения {path} некорректен: {e}") from e


store = ArtifactStore()


def write_dataset(path: PathLike, dataset: SpatialDataset) -> None:
    store.write_dataset(path, dataset)


def read_dataset(path: PathLike) -> SpatialDataset:
    return store.read_dataset(path)


def write_chain(path: PathLike, output: ChainOutput, extra: Optional[Dict[str, object]] = None) -> None:
    store.write_chain(path, output, extra)


def read_chain(path: PathLike) -> Tuple[ChainOutput, Dict[str, Optional[str]]]:
    return store.read_chain(path)


def write_meta(path: PathLike, values: Dict[str, object]) -> Path:
    return store.write_meta(path, values)


def read_meta(path: PathLike) -> Dict[str, Optional[str]]:
    return store.read_meta(path)


def write_predictions(path: PathLike, locations: np.ndarray, truth: np.ndarray, summary: PredictiveSummary) -> None:
    store.write_predictions(path, locations, truth, summary)


def read_predictions(path: PathLike) -> Tuple[PredictiveSummary, np.ndarray]:
    return store.read_predictions(path)


def append_metrics(path: PathLike, label: str, metrics: Dict[str, float]) -> pd.DataFrame:
    return store.append_metrics(path, label, metrics)


def write_neighbor_graph(path: PathLike, graph: NeighborGraph) -> None:
    store.write_neighbor_graph(path, graph)


def read_neighbor_graph(path: PathLike) -> NeighborGraph:
    return store.read_neighbor_graph(path)


def write_correction(path: PathLike, cd: CorrectionDistribution) -> None:
    store.write_correction(path, cd)


def read_correction(path: PathLike) -> CorrectionDistribution:
    return store.read_correction(path)
