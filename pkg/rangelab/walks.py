#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Воспроизводимое моделирование простого случайного блуждания с записью
процесса диапазона R_t, времён открытий T_n и расстояний dist(X_{T_k}, S_k^c).
"""

import logging
import math
import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from rangelab.geometry import harmonic_sum
from rangelab.graphs import FiniteGraph, GraphHandle, distance_to_complement
from rangelab.models import (
    DEFAULT_STEP_CAP,
    CoarseProfile,
    InsufficientTraceError,
    InvalidParameterError,
    InvalidVertexError,
    MonteCarloSummary,
    TruncationTooSmallError,
    WalkTrace,
)

UNIFORM_BATCH = 4096
NEIGHBOR_CACHE = 4096  # соседи последних вершин; сбрасывается при переполнении


def default_step_cap() -> int:
    """Лимит шагов: переменная RANGE_LAB_STEP_CAP или 10^9"""
    raw = os.environ.get("RANGE_LAB_STEP_CAP")
    if raw is None:
        return DEFAULT_STEP_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise InvalidParameterError(raw, "RANGE_LAB_STEP_CAP должен быть целым")
    if cap < 1:
        raise InvalidParameterError(cap, "RANGE_LAB_STEP_CAP должен быть положительным")
    return cap


def replicate_seed(master_seed: int, replicate: int) -> int:
    """64-битное зерно повтора: SeedSequence(master_seed, spawn_key=(replicate,))"""
    words = np.random.SeedSequence(master_seed, spawn_key=(replicate,)).generate_state(
        2, np.uint32
    )
    return int(words[0]) | (int(words[1]) << 32)


def make_generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


# ============ КОНФИГУРАЦИЯ БЛУЖДАНИЯ ============
@dataclass(frozen=True)
class WalkConfig:
    """Граф, старт, зерно и правило остановки одного блуждания"""

    graph: GraphHandle
    seed: int = 0
    start: Optional[int] = None  # по умолчанию начало графа
    horizon: Optional[int] = None
    target_range: Optional[int] = None
    step_cap: int = DEFAULT_STEP_CAP
    record_range: bool = True
    record_distances: bool = True
    ring_buffer: int = 0  # 0 - позиции не хранятся
    checkpoints: Tuple[int, ...] = ()

    def __post_init__(self):
        """Валидация данных после инициализации"""
        if self.horizon is None and self.target_range is None:
            raise InvalidParameterError("stop-rule", "Нужен горизонт или целевой диапазон")
        if self.horizon is not None and self.horizon < 0:
            raise InvalidParameterError(self.horizon, "Горизонт отрицателен")
        if self.target_range is not None and self.target_range < 1:
            raise InvalidParameterError(self.target_range, "Целевой диапазон < 1")
        if self.step_cap < 1:
            raise InvalidParameterError(self.step_cap, "Лимит шагов должен быть >= 1")
        if not self.graph.contains(self.start_vertex):
            raise InvalidVertexError(self.start_vertex)

    @property
    def start_vertex(self) -> int:
        return self.graph.origin if self.start is None else self.start


# ============ ОДНО БЛУЖДАНИЕ ============
def run_walk(cfg: WalkConfig) -> WalkTrace:
    """
    Моделирование одного блуждания до горизонта и/или целевого диапазона
    """
    g = cfg.graph
    rng = make_generator(cfg.seed)
    current = cfg.start_vertex
    trace = WalkTrace(start=current, seed=cfg.seed)
    if cfg.ring_buffer > 0:
        trace.positions = deque([current], maxlen=cfg.ring_buffer)

    edge = g.boundary if isinstance(g, FiniteGraph) else frozenset()
    contiguous = isinstance(g, FiniteGraph) and g.vertices == list(range(g.order))
    marks = bytearray(g.order) if contiguous else None
    visited = set() if marks is None or cfg.record_distances else None

    def discover(v: int, t: int, edges_before: int) -> None:
        if v in edge:
            # окно усечения не содержит продолжения траектории
            raise TruncationTooSmallError(
                g.truncation_radius, f"Блуждание дошло до края окна в момент {t}"
            )
        if marks is not None:
            marks[v] = 1
        if visited is not None:
            visited.add(v)
        trace.discovery_times.append(t)
        trace.discovery_vertices.append(v)
        inside_nbrs = sum(1 for u in g.neighbors(v) if u != v and is_seen(u))
        trace.discovery_edges.append(edges_before + inside_nbrs)
        if cfg.record_distances:
            # после покрытия конечного графа S^c пусто, расстояние записывается как 0
            covered = isinstance(g, FiniteGraph) and len(visited) == g.order
            trace.discovery_distances.append(
                0 if covered else distance_to_complement(g, visited, v)
            )

    def is_seen(v: int) -> bool:
        return marks[v] == 1 if marks is not None else v in visited

    discover(current, 0, 0)
    horizon = cfg.horizon
    target = cfg.target_range
    checkpoints = set(cfg.checkpoints)
    cache = {}
    t, size = 0, 1
    if cfg.record_range:
        trace.range_process.append(1)
    if 0 in checkpoints:
        trace.checkpoints[0] = 1

    uniforms = rng.random(UNIFORM_BATCH)
    cursor = 0
    while not (
        (target is not None and size >= target) or (horizon is not None and t >= horizon)
    ):
        if t >= cfg.step_cap:
            trace.truncated = True
            break
        if cursor == UNIFORM_BATCH:
            uniforms = rng.random(UNIFORM_BATCH)
            cursor = 0
        nbrs = cache.get(current)
        if nbrs is None:
            if len(cache) >= NEIGHBOR_CACHE:
                cache.clear()
            nbrs = cache[current] = g.neighbors(current)
        current = nbrs[int(uniforms[cursor] * len(nbrs))]
        cursor += 1
        t += 1
        if not is_seen(current):
            size += 1
            discover(current, t, trace.discovery_edges[-1])
        if cfg.record_range:
            trace.range_process.append(size)
        if t in checkpoints:
            trace.checkpoints[t] = size
        if trace.positions is not None:
            trace.positions.append(current)

    trace.final_time = t
    trace.final_range = size
    if trace.truncated:
        logging.warning(
            f"Блуждание на {g.name}{list(g.params)} остановлено лимитом {cfg.step_cap} шагов"
        )
    return trace


# ============ ЛЕММА ОБ УПАКОВКЕ ============
@dataclass(frozen=True)
class PackingCheck:
    """Σ_{k<=n} dist(X_{T_k}, S_k^c) против 2n Σ_{r<⌈n/2⌉} 1/g(r)"""

    n: int
    lhs: int
    rhs: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


def packing_sum_check(trace: WalkTrace, profile: CoarseProfile, n: int) -> PackingCheck:
    """
    Детерминированная граница упаковки для одной траектории
    """
    if n < 1:
        raise InvalidParameterError(n, "n должно быть >= 1")
    if len(trace.discovery_distances) < n:
        raise InsufficientTraceError(len(trace.discovery_distances), f"Нужен диапазон {n}")
    lhs = sum(trace.discovery_distances[:n])
    rhs = 2 * n * harmonic_sum(profile, math.ceil(n / 2))
    check = PackingCheck(n, lhs, rhs)
    if not check.holds:
        logging.error(f"Нарушение границы упаковки (seed {trace.seed}): {lhs} > {rhs}")
    return check


def chain_sum(trace: WalkTrace, n: int) -> int:
    """Σ_{k<n} (2|E_{S_k}|+1)·dist(X_{T_k}, S_k^c): случайная оценка сверху для T_n"""
    if len(trace.discovery_distances) < n:
        raise InsufficientTraceError(len(trace.discovery_distances), f"Нужен диапазон {n}")
    return sum(
        (2 * trace.discovery_edges[k] + 1) * trace.discovery_distances[k]
        for k in range(n - 1)
    )


# ============ МОНТЕ-КАРЛО ============
def run_replicates(
    graph: GraphHandle,
    replicates: int,
    master_seed: int,
    threads: int = 1,
    **walk_options,
) -> List[WalkTrace]:
    """
    Независимые повторы в пуле процессов; результаты собираются в порядке
    номеров повторов, поэтому не зависят от числа процессов
    """
    if replicates < 1:
        raise InvalidParameterError(replicates, "Нужен хотя бы один повтор")
    configs = [
        WalkConfig(graph, seed=replicate_seed(master_seed, r), **walk_options)
        for r in range(replicates)
    ]
    if threads <= 1:
        return [run_walk(cfg) for cfg in configs]
    chunk = max(1, replicates // (4 * threads))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run_walk, configs, chunksize=chunk))


def _summarize(
    traces: Sequence[WalkTrace], value: Callable[[WalkTrace], float], label: str
) -> MonteCarloSummary:
    summary = MonteCarloSummary.from_values(
        [value(tr) for tr in traces],
        [tr.seed for tr in traces],
        [tr.truncated for tr in traces],
    )
    if summary.censored:
        logging.warning(
            f"{label}: {summary.censored_count} повторов цензурировано, среднее - нижняя граница"
        )
    logging.info(f"{label}: среднее {summary.mean:.6g} ± {summary.stderr:.3g}")
    return summary


def estimate_ET(
    graph: GraphHandle,
    n: int,
    replicates: int,
    master_seed: int,
    step_cap: Optional[int] = None,
    threads: int = 1,
    start: Optional[int] = None,
) -> MonteCarloSummary:
    """
    Оценка E[T_n]; для цензурированных повторов берётся время остановки
    """
    if replicates < 2:
        raise InvalidParameterError(replicates, "Нужно не меньше двух повторов")
    traces = run_replicates(
        graph,
        replicates,
        master_seed,
        threads,
        start=start,
        target_range=n,
        step_cap=step_cap or default_step_cap(),
        record_range=False,
        record_distances=False,
    )
    return _summarize(
        traces,
        lambda tr: tr.final_time if tr.truncated else tr.discovery_time(n),
        f"E[T_{n}] на {graph.name}{list(graph.params)}",
    )


def estimate_ER(
    graph: GraphHandle,
    t: int,
    replicates: int,
    master_seed: int,
    step_cap: Optional[int] = None,
    threads: int = 1,
    start: Optional[int] = None,
) -> MonteCarloSummary:
    """
    Оценка E[R_t] по повторам с горизонтом t
    """
    if replicates < 2:
        raise InvalidParameterError(replicates, "Нужно не меньше двух повторов")
    traces = run_replicates(
        graph,
        replicates,
        master_seed,
        threads,
        start=start,
        horizon=t,
        step_cap=step_cap or default_step_cap(),
        record_range=False,
        record_distances=False,
    )
    return _summarize(
        traces, lambda tr: tr.final_range, f"E[R_{t}] на {graph.name}{list(graph.params)}"
    )


def estimate_range_curve(
    graph: GraphHandle,
    times: Sequence[int],
    replicates: int,
    master_seed: int,
    step_cap: Optional[int] = None,
    threads: int = 1,
) -> List[MonteCarloSummary]:
    """
    E[R_t] сразу для сетки моментов: одно блуждание на повтор
    с контрольными точками
    """
    grid = sorted(set(times))
    if not grid or grid[0] < 0:
        raise InvalidParameterError(list(times), "Нужна непустая сетка t >= 0")
    traces = run_replicates(
        graph,
        replicates,
        master_seed,
        threads,
        horizon=grid[-1],
        step_cap=step_cap or default_step_cap(),
        record_range=False,
        record_distances=False,
        checkpoints=tuple(grid),
    )
    # цензурированные повторы дают диапазон на момент остановки
    return [
        _summarize(
            traces,
            lambda tr, t=t: tr.checkpoints.get(t, tr.final_range),
            f"E[R_{t}] на {graph.name}{list(graph.params)}",
        )
        for t in grid
    ]
