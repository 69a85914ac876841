#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import hashlib
import json
import math
from collections import deque
from dataclasses import asdict, dataclass, field
from enum import StrEnum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy import stats

DEFAULT_STEP_CAP = 10**9
CONFIG_SCHEMA_VERSION = 1
GENERATOR_ID = "numpy.random.PCG64"


# ============ КЛАССЫ ИСКЛЮЧЕНИЙ ============
class LabError(Exception):
    """Базовое исключение лаборатории"""

    def __init__(self, subject: Any, message: str = "Ошибка лаборатории"):
        self.subject = subject
        self.message = message
        super().__init__(f"{subject} -> {message}")

    def __str__(self):
        return f"{self.subject} -> {self.message}"

    def __reduce__(self):
        # исключения из процессов пула передаются через pickle
        return type(self), (self.subject, self.message)


class UnknownFamilyError(LabError):
    """Исключение для неизвестного семейства графов"""

    def __init__(self, family: str, message="Неизвестное семейство графов"):
        super().__init__(family, message)


class InvalidParameterError(LabError):
    """Исключение для некорректных параметров построения или операции"""

    def __init__(self, params: Any, message="Некорректные параметры"):
        super().__init__(params, message)


class InvalidVertexError(LabError):
    """Исключение для вершины, не принадлежащей графу"""

    def __init__(self, vertex: int, message="Вершина не принадлежит графу"):
        super().__init__(vertex, message)


class SingularSystemError(LabError):
    """Внутренняя ошибка: вырожденная или плохо решённая линейная система"""

    def __init__(self, size: int, message="Линейная система вырождена"):
        super().__init__(size, message)


class TruncationTooSmallError(LabError):
    """Исключение: окно усечения не покрывает горизонт блуждания"""

    def __init__(self, radius: int, message="Радиус усечения слишком мал"):
        super().__init__(radius, message)


class NoExitError(LabError):
    """Исключение: у множества S нет внешних соседей"""

    def __init__(self, size: int, message="У множества нет внешних соседей"):
        super().__init__(size, message)


class InsufficientTraceError(LabError):
    """Исключение: траектория не достигла нужного диапазона"""

    def __init__(self, length: int, message="Траектория слишком короткая"):
        super().__init__(length, message)


class FlaggedProfileError(LabError):
    """Исключение: профиль содержит помеченные (неточные) значения f или g"""

    def __init__(self, entry: Any, message="Помеченное значение в профиле"):
        super().__init__(entry, message)


class BudgetExceededError(LabError):
    """Исключение: превышен бюджет вычислений"""

    def __init__(self, seconds: float, message="Превышен бюджет времени"):
        super().__init__(seconds, message)


class ConfigError(LabError):
    """Исключение для некорректной конфигурации запуска"""

    def __init__(self, field_name: str, message="Некорректная конфигурация"):
        super().__init__(field_name, message)


class DataFormatError(LabError):
    """Исключение для ошибок формата JSON/CSV-файла"""

    def __init__(self, filename: str, message="Некорректный формат данных"):
        super().__init__(filename, message)


# ============ ПЕРЕЧИСЛЕНИЯ ============
class FProvenance(StrEnum):
    EXACT_ENUMERATION = "exact-enumeration"
    CLOSED_FORM = "closed-form"
    UPPER_BOUND = "upper-bound"


class GProvenance(StrEnum):
    EXACT_FINITE = "exact-finite"
    CLOSED_FORM = "closed-form"
    TRUNCATED_MIN = "truncated-min"


class BoundId(StrEnum):
    THM_MAIN = "thm-main"
    COR_UNIVERSAL_T = "cor-universal-T"
    COR_UNIVERSAL_R = "cor-universal-R"
    LEM_NEIGHBOR = "lem-neighbor"
    LEM_ESCAPE = "lem-escape"
    LEM_PACKING = "lem-packing"
    PROP_SHARPNESS = "prop-sharpness"
    PROP_LOCALTIME = "prop-localtime"
    EQ_RETURN = "eq-return"
    LINEAR_RANGE = "linear-range"
    DIFFUSIVE_RANGE = "diffusive-range"
    DISCOVERY_CHAIN = "discovery-chain"


class Verdict(StrEnum):
    HOLDS = "holds"
    VIOLATED = "violated"
    INCONCLUSIVE = "inconclusive"


class Task(StrEnum):
    SIMULATE = "simulate"
    EXACT = "exact"
    COARSE = "coarse"
    VERIFY = "verify"
    SHARPNESS = "sharpness"
    OSCILLATION = "oscillation"


# ============ СПЕЦИФИКАЦИИ КОНСТРУКЦИЙ ============
@dataclass(frozen=True)
class LollipopSpec:
    """Леденец L_n: клика порядка ⌊n/2⌋ и путь порядка ⌈n/2⌉, соединённые ребром"""

    n: int  # Общее число вершин

    def __post_init__(self):
        if self.n < 2:
            raise InvalidParameterError(self.n, "Леденец требует n >= 2")

    @property
    def clique_order(self) -> int:
        return self.n // 2

    @property
    def path_order(self) -> int:
        return self.n - self.n // 2

    @property
    def origin(self) -> int:
        """Первая вершина клики, не инцидентная соединяющему ребру"""
        return 0

    @property
    def attachment(self) -> int:
        """Вершина клики, к которой прикреплён путь"""
        return self.clique_order - 1

    @property
    def end(self) -> int:
        """Висячая вершина на дальнем конце пути"""
        return self.n - 1

    @property
    def edge_count(self) -> int:
        return math.comb(self.clique_order, 2) + (self.path_order - 1) + 1


@dataclass(frozen=True)
class MultiScaleSpec:
    """Цепочка леденцов L_{n_1}, L_{n_2}, ..., связанных ребром конец -> начало"""

    scales: Tuple[int, ...]  # Явно заданные масштабы n_1 < n_2 < ...

    def __post_init__(self):
        if not self.scales:
            raise InvalidParameterError(self.scales, "Пустая последовательность масштабов")
        if self.scales[0] < 2:
            raise InvalidParameterError(self.scales, "Первый масштаб должен быть >= 2")
        for prev, cur in zip(self.scales, self.scales[1:]):
            if cur <= prev:
                raise InvalidParameterError(
                    self.scales, "Масштабы должны строго возрастать"
                )

    @classmethod
    def dyadic(cls, max_block: int = 12) -> "MultiScaleSpec":
        """Диадическая последовательность n_i = 2^i, i = 1..max_block"""
        if max_block < 1:
            raise InvalidParameterError(max_block, "Нужен хотя бы один блок")
        return cls(tuple(2**i for i in range(1, max_block + 1)))

    def scale(self, block: int) -> int:
        """Порядок блока; после явного списка масштабы удваиваются"""
        if block < 0:
            raise InvalidParameterError(block, "Номер блока отрицателен")
        if block < len(self.scales):
            return self.scales[block]
        return self.scales[-1] * 2 ** (block - len(self.scales) + 1)

    def block_boundaries(self, blocks: int) -> List[int]:
        """Накопленные числа вершин n_1 + ... + n_k для k = 1..blocks"""
        boundaries = []
        total = 0
        for block in range(blocks):
            total += self.scale(block)
            boundaries.append(total)
        return boundaries


# ============ ТРАЕКТОРИИ И СВОДКИ ============
@dataclass
class WalkTrace:
    """Одна траектория блуждания с процессом диапазона и временами открытий"""

    start: int
    seed: int
    range_process: List[int] = field(default_factory=list)
    discovery_times: List[int] = field(default_factory=list)
    discovery_vertices: List[int] = field(default_factory=list)
    discovery_distances: List[int] = field(default_factory=list)
    discovery_edges: List[int] = field(default_factory=list)  # |E_{S_k}|
    checkpoints: Dict[int, int] = field(default_factory=dict)
    positions: Optional[deque] = None
    final_time: int = 0
    final_range: int = 1
    truncated: bool = False

    def discovery_time(self, n: int) -> int:
        """T_n; ошибка, если диапазон n не достигнут"""
        if n < 1 or n > len(self.discovery_times):
            raise InsufficientTraceError(len(self.discovery_times), f"Нет T_{n}")
        return self.discovery_times[n - 1]


@dataclass(frozen=True)
class MonteCarloSummary:
    """Оценка математического ожидания по независимым повторам"""

    replicates: int
    mean: float
    stderr: float
    values: Tuple[float, ...]
    seeds: Tuple[int, ...]
    censored_mask: Tuple[bool, ...] = ()
    generator: str = GENERATOR_ID

    @classmethod
    def from_values(cls, values, seeds, censored_mask=()) -> "MonteCarloSummary":
        data = np.asarray(values, dtype=float)
        if data.size < 2:
            raise InvalidParameterError(data.size, "Нужно не меньше двух повторов")
        stderr = float(data.std(ddof=1) / math.sqrt(data.size))
        return cls(
            replicates=int(data.size),
            mean=float(data.mean()),
            stderr=stderr,
            values=tuple(float(v) for v in data),
            seeds=tuple(int(s) for s in seeds),
            censored_mask=tuple(bool(c) for c in censored_mask),
        )

    @property
    def censored(self) -> bool:
        """Если есть цензурированные повторы, среднее лишь нижняя граница"""
        return any(self.censored_mask)

    @property
    def censored_count(self) -> int:
        return sum(self.censored_mask)

    @property
    def ci95(self) -> Tuple[float, float]:
        return (self.mean - 1.96 * self.stderr, self.mean + 1.96 * self.stderr)

    def ci(self, level: float) -> Tuple[float, float]:
        z = float(stats.norm.ppf(0.5 + level / 2))
        return (self.mean - z * self.stderr, self.mean + z * self.stderr)


# ============ КРУПНОМАСШТАБНАЯ ГЕОМЕТРИЯ ============
@dataclass(frozen=True)
class FValue:
    value: int
    provenance: FProvenance
    witness: Tuple[int, ...] = ()

    @property
    def flagged(self) -> bool:
        """Верхняя оценка min(C(n,2), Δn/2) вместо точного f(n)"""
        return self.provenance == FProvenance.UPPER_BOUND


@dataclass(frozen=True)
class GValue:
    value: int
    provenance: GProvenance
    witness: Optional[int] = None

    @property
    def flagged(self) -> bool:
        """Усечённый минимум лишь оценивает g сверху"""
        return self.provenance == GProvenance.TRUNCATED_MIN


@dataclass
class CoarseProfile:
    """Табулированные f(n), g(r) и гармонические суммы для одного графа"""

    family: str
    f: Dict[int, FValue] = field(default_factory=dict)
    g: Dict[int, GValue] = field(default_factory=dict)
    harmonic_sums: Dict[int, Fraction] = field(default_factory=dict)

    def to_json(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "f": [[n, v.value, str(v.provenance)] for n, v in sorted(self.f.items())],
            "g": [[r, v.value, str(v.provenance)] for r, v in sorted(self.g.items())],
        }


# ============ ОТЧЁТЫ О НЕРАВЕНСТВАХ ============
@dataclass(frozen=True)
class BoundReport:
    """Одно неравенство, подставленное для конкретного графа и параметров"""

    bound_id: BoundId
    family: str
    params: Dict[str, Any]
    lhs: float
    lhs_err: float
    rhs: float
    verdict: Verdict
    seed: Optional[int] = None
    replicates: int = 0
    lhs_source: str = "exact"  # exact | monte-carlo | fit
    grade: str = "verdict"  # verdict | asymptotic-indicative | empirical
    notes: str = ""

    @property
    def violated(self) -> bool:
        return self.verdict == Verdict.VIOLATED

    def as_row(self) -> Dict[str, Any]:
        """Плоская строка CSV"""
        return {
            "bound_id": str(self.bound_id),
            "family": self.family,
            "params": json.dumps(self.params, sort_keys=True),
            "lhs": repr(float(self.lhs)),
            "lhs_err": repr(float(self.lhs_err)),
            "rhs": repr(float(self.rhs)),
            "verdict": str(self.verdict),
            "seed": "" if self.seed is None else self.seed,
            "replicates": self.replicates,
        }

    def to_json(self) -> Dict[str, Any]:
        data = asdict(self)
        data["bound_id"] = str(self.bound_id)
        data["verdict"] = str(self.verdict)
        return data


@dataclass(frozen=True)
class OscillationProfile:
    """Оконные наклоны log E[R_t] против log t на геометрической сетке"""

    time_grid: Tuple[int, ...]
    means: Tuple[float, ...]
    stderrs: Tuple[float, ...]
    window: int
    slopes: Tuple[float, ...]
    slope_errors: Tuple[float, ...]
    classes: Tuple[str, ...]  # sub | super | inconclusive

    @property
    def alpha_hat(self) -> float:
        return min(self.slopes)

    @property
    def beta_hat(self) -> float:
        return max(self.slopes)

    @property
    def alternates(self) -> bool:
        """Есть и суб-, и супердиффузионные окна"""
        return "sub" in self.classes and "super" in self.classes


@dataclass(frozen=True)
class SharpnessFit:
    """Подгонка показателя роста E[T_n] по логарифмической сетке"""

    family: str
    n_grid: Tuple[int, ...]
    summaries: Tuple[MonteCarloSummary, ...]
    exponent: float
    constant: float
    cubic_floor: float  # min_n Ê[T_n]/n^3

    @property
    def means(self) -> Tuple[float, ...]:
        return tuple(s.mean for s in self.summaries)


# ============ КОНФИГУРАЦИЯ ЗАПУСКА ============
@dataclass(frozen=True)
class RunConfig:
    """Полностью сериализуемая конфигурация одного пакетного запуска"""

    graph: Dict[str, Any]
    task: Task
    task_params: Dict[str, Any] = field(default_factory=dict)
    master_seed: int = 0
    output_dir: str = "range_lab_output"
    step_cap: int = DEFAULT_STEP_CAP
    threads: int = 1
    budget_seconds: Optional[float] = None
    schema: int = CONFIG_SCHEMA_VERSION

    def __post_init__(self):
        """Валидация данных после инициализации"""
        if self.schema != CONFIG_SCHEMA_VERSION:
            raise ConfigError("schema", f"Поддерживается только схема {CONFIG_SCHEMA_VERSION}")
        if not isinstance(self.graph, dict) or "family" not in self.graph:
            raise ConfigError("graph", "Нужен объект с полем family")
        if self.task not in set(Task):
            raise ConfigError("task", f"Неизвестная задача {self.task}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed", "Зерно должно быть 64-битным")
        if self.step_cap < 1:
            raise ConfigError("step_cap", "Лимит шагов должен быть положительным")
        if self.threads < 1:
            raise ConfigError("threads", "Число рабочих процессов должно быть положительным")

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["task"] = str(self.task)
        return data

    @property
    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
