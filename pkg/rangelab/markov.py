#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Точные вычисления для простого случайного блуждания на конечных графах
и конечных окнах ленивых графов: времена достижения, возвращения и выхода,
локальные времена и вероятности возвращения.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import numpy as np
from scipy import linalg, sparse
from scipy.sparse import linalg as sparse_linalg

from rangelab.graphs import (
    FiniteGraph,
    GraphHandle,
    RegularTree,
    distance_to_complement,
    distances,
    induced_edge_count,
)
from rangelab.models import (
    InvalidParameterError,
    InvalidVertexError,
    NoExitError,
    SingularSystemError,
    TruncationTooSmallError,
)

DENSE_LIMIT = 2000  # до этого размера систем - плотное исключение
EXACT_LIMIT = 50  # рациональная арифметика допустима до 50 состояний
RESIDUAL_TOL = 1e-10
BOUND_TOL = 1e-9
STATE_CAP = 200_000


# ============ ТИПЫ ============
@dataclass(frozen=True)
class TransitionRow:
    """Строка матрицы перехода P(x, y) = 1/deg(x)"""

    source: int
    targets: Tuple[Tuple[int, Fraction], ...]

    @property
    def total(self) -> Fraction:
        return sum((p for _, p in self.targets), Fraction(0))


@dataclass(frozen=True)
class HittingProblem:
    """Время достижения τ_A множества A из вершины start на конечном графе"""

    graph: FiniteGraph
    target: FrozenSet[int]
    start: int

    def __post_init__(self):
        if not self.graph.is_finite:
            raise InvalidParameterError(self.graph.name, "Нужен конечный граф")
        if not self.target:
            raise InvalidParameterError(self.target, "Целевое множество пусто")
        for v in list(self.target) + [self.start]:
            if not self.graph.contains(v):
                raise InvalidVertexError(v)


@dataclass(frozen=True)
class HittingResult:
    value: float
    residual: float
    exact: bool = False
    rational: Optional[Fraction] = None


@dataclass(frozen=True)
class ReturnTime:
    """E_y[τ_y^+]: формула 2|F|/deg(y) и значение линейной системы"""

    vertex: int
    formula: Fraction
    linear: float

    @property
    def discrepancy(self) -> float:
        return abs(float(self.formula) - self.linear)


@dataclass(frozen=True)
class NeighborHitting:
    """max по ориентированным рёбрам E_x[τ_y] с ребром-свидетелем"""

    value: float
    edge: Tuple[int, int]
    bound: int  # 2|F| - 1

    @property
    def holds(self) -> bool:
        return self.value <= self.bound + BOUND_TOL


@dataclass(frozen=True)
class EscapeResult:
    """E_x[τ_{S^c}] и граница (2|E_S|+1)·dist(x, S^c)"""

    value: float
    inside_edges: int
    distance: int
    residual: float

    @property
    def bound(self) -> int:
        return (2 * self.inside_edges + 1) * self.distance

    @property
    def holds(self) -> bool:
        return self.value <= self.bound + BOUND_TOL


@dataclass
class LocalTimeTable:
    """ℓ_x(t) = Σ_{s<=t} P_x(X_s = x) для набора вершин"""

    horizon: int
    values: Dict[int, float] = field(default_factory=dict)

    @property
    def ell_star(self) -> float:
        return max(self.values.values())

    @property
    def argmax(self) -> int:
        return max(sorted(self.values), key=lambda v: self.values[v])


# ============ ЛИНЕЙНАЯ АЛГЕБРА ============
def transition_row(g: GraphHandle, v: int) -> TransitionRow:
    """Строка P(v, ·) в рациональной записи; на краю окна сумма меньше 1"""
    p = Fraction(1, g.walk_degree(v))
    return TransitionRow(v, tuple((u, p) for u in g.neighbors(v)))


def _solve_fractions(rows: List[List[Fraction]], rhs: List[Fraction]) -> List[Fraction]:
    """Метод Гаусса в рациональных числах"""
    size = len(rhs)
    a = [row[:] + [b] for row, b in zip(rows, rhs)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if a[r][col] != 0), None)
        if pivot is None:
            raise SingularSystemError(size)
        a[col], a[pivot] = a[pivot], a[col]
        lead = a[col][col]
        a[col] = [x / lead for x in a[col]]
        for r in range(size):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return [a[r][size] for r in range(size)]


def _solve(matrix: sparse.csr_matrix, rhs: np.ndarray) -> Tuple[np.ndarray, float]:
    """Решение системы (I - Q) h = b: плотно или разреженно, с невязкой"""
    size = matrix.shape[0]
    try:
        if size <= DENSE_LIMIT:
            solution = linalg.solve(matrix.toarray(), rhs)
        else:
            solution = sparse_linalg.spsolve(matrix.tocsc(), rhs)
    except (linalg.LinAlgError, RuntimeError) as e:
        logging.error(f"Ошибка решения системы размера {size}: {e}")
        raise SingularSystemError(size, str(e))

    residual = float(np.max(np.abs(matrix @ solution - rhs), initial=0.0))
    scale = max(1.0, float(np.max(np.abs(solution), initial=0.0)))
    relative = residual / scale
    if not np.all(np.isfinite(solution)) or relative > RESIDUAL_TOL:
        logging.error(f"Невязка {relative:.3e} превышает допуск для системы {size}")
        raise SingularSystemError(size, f"Невязка {relative:.3e}")
    return solution, relative


def _absorption_times(
    g: GraphHandle, transient: List[int], exact: bool = False
) -> Tuple[Dict[int, float], float, Optional[Dict[int, Fraction]]]:
    """
    Ожидаемое время поглощения из каждой невсасывающей вершины:
    h(x) = 1 + (1/deg x) Σ_{y~x} h(y), h = 0 вне transient.
    deg - степень в исходном графе: на усечённом окне шаг за край обрывает
    траекторию
    """
    position = {v: i for i, v in enumerate(transient)}
    size = len(transient)
    if size == 0:
        return {}, 0.0, {}

    if exact and size <= EXACT_LIMIT:
        rows = [[Fraction(0)] * size for _ in range(size)]
        for v, i in position.items():
            p = Fraction(1, g.walk_degree(v))
            rows[i][i] += 1
            for u in g.neighbors(v):
                j = position.get(u)
                if j is not None:
                    rows[i][j] -= p
        solution = _solve_fractions(rows, [Fraction(1)] * size)
        rational = dict(zip(transient, solution))
        return {v: float(h) for v, h in rational.items()}, 0.0, rational

    row_idx, col_idx, data = [], [], []
    for v, i in position.items():
        p = 1.0 / g.walk_degree(v)
        row_idx.append(i)
        col_idx.append(i)
        data.append(1.0)
        for u in g.neighbors(v):
            j = position.get(u)
            if j is not None:
                row_idx.append(i)
                col_idx.append(j)
                data.append(-p)
    matrix = sparse.csr_matrix((data, (row_idx, col_idx)), shape=(size, size))
    solution, residual = _solve(matrix, np.ones(size))
    return dict(zip(transient, solution.tolist())), residual, None


def hitting_times_to(g: FiniteGraph, target: Iterable[int]) -> Dict[int, float]:
    """E_x[τ_A] для всех вершин x конечного графа"""
    target_set = set(target)
    transient = [v for v in g.vertices if v not in target_set]
    values, _, _ = _absorption_times(g, transient)
    values.update({v: 0.0 for v in target_set})
    return values


def _require_own_walk(g: FiniteGraph) -> None:
    if g.boundary:
        raise InvalidParameterError(
            g.name, "Нужен самостоятельный конечный граф, а не окно (см. standalone)"
        )


# ============ ОПЕРАЦИИ ============
def hitting_time(p: HittingProblem, exact: bool = False) -> HittingResult:
    """
    E_start[τ_A] как решение поглощающей системы;
    exact=True даёт рациональный ответ на графах до 50 вершин.
    На усечённом окне результат - E[min(τ_A, выход из окна)]
    """
    if p.start in p.target:
        return HittingResult(0.0, 0.0, exact=True, rational=Fraction(0))

    transient = [v for v in p.graph.vertices if v not in p.target]
    values, residual, rational = _absorption_times(p.graph, transient, exact)
    logging.info(
        f"Время достижения на {p.graph.name}{list(p.graph.params)}: "
        f"{values[p.start]:.6g} (невязка {residual:.2e})"
    )
    if rational is not None:
        return HittingResult(float(rational[p.start]), 0.0, True, rational[p.start])
    return HittingResult(values[p.start], residual)


def expected_return_time(g: FiniteGraph, y: int) -> ReturnTime:
    """
    E_y[τ_y^+] = 2|F|/deg(y), проверенное по линейной системе
    1 + (1/deg y) Σ_{z~y} E_z[τ_y]
    """
    _require_own_walk(g)
    nbrs = g.neighbors(y)
    formula = Fraction(2 * g.edge_count, len(nbrs))
    hits = hitting_times_to(g, [y])
    linear = 1.0 + sum(hits[z] for z in nbrs) / len(nbrs)
    result = ReturnTime(y, formula, linear)
    if result.discrepancy > BOUND_TOL * max(1.0, float(formula)):
        logging.error(f"Время возвращения в {y}: формула {formula} != {linear}")
        raise SingularSystemError(g.order, "Формула времени возвращения не сошлась")
    return result


def max_neighbor_hitting(g: FiniteGraph) -> NeighborHitting:
    """
    Точный максимум E_x[τ_y] по обеим ориентациям каждого ребра
    """
    _require_own_walk(g)
    if g.edge_count == 0:
        raise InvalidParameterError(g.name, "В графе нет рёбер")

    best_value, best_edge = -1.0, (g.origin, g.origin)
    for y in g.vertices:
        hits = hitting_times_to(g, [y])
        for x in g.neighbors(y):
            if hits[x] > best_value + 1e-12:
                best_value, best_edge = hits[x], (x, y)

    result = NeighborHitting(best_value, best_edge, 2 * g.edge_count - 1)
    if not result.holds:
        logging.error(
            f"Нарушение 2|F|-1 на {g.name}{list(g.params)}: {best_value} > {result.bound}"
        )
    return result


def escape_time(g: GraphHandle, inside: Iterable[int], x: int) -> EscapeResult:
    """
    E_x[τ_{S^c}]: система на S с поглощающей внешней границей ∂_V S
    """
    members = set(inside)
    if x not in members:
        raise InvalidVertexError(x, "Вершина не лежит в S")
    exits = any(v not in members for u in members for v in g.neighbors(u))
    if not exits and not any(g.walk_degree(u) > g.degree(u) for u in members):
        raise NoExitError(len(members))

    transient = sorted(members)
    values, residual, _ = _absorption_times(g, transient)
    result = EscapeResult(
        value=values[x],
        inside_edges=induced_edge_count(g, members),
        distance=distance_to_complement(g, members, x),
        residual=residual,
    )
    if not result.holds:
        logging.error(f"Нарушение границы выхода: {result.value} > {result.bound}")
    return result


# ============ РАСПРЕДЕЛЕНИЯ ВО ВРЕМЕНИ ============
def _tree_return_series(tree: RegularTree, t: int) -> np.ndarray:
    """
    Вероятности возвращения на d-регулярном дереве через цепь расстояний
    от старта: 0 -> 1 с вероятностью 1, d -> d-1 с вероятностью 1/deg
    """
    deg = tree.degree_bound
    down, up = 1.0 / deg, 1.0 - 1.0 / deg
    mass = np.zeros(t + 2)
    mass[0] = 1.0
    series = np.empty(t + 1)
    series[0] = 1.0
    for s in range(1, t + 1):
        moved = np.zeros_like(mass)
        moved[1] += mass[0]
        moved[:-1] += down * mass[1:]
        moved[2:] += up * mass[1:-1]
        mass = moved
        series[s] = mass[0]
    return series


def _window(g: GraphHandle, x: int, t: int) -> Tuple[List[int], sparse.csr_matrix]:
    """
    Окно, внутри которого распределение за t шагов вычисляется точно,
    и транспонированная матрица перехода с истинными степенями
    """
    if isinstance(g, FiniteGraph) and g.truncation_radius is not None:
        depth = distances(g, g.origin, g.truncation_radius).get(x)
        if depth is None or depth + t > g.truncation_radius:
            raise TruncationTooSmallError(
                g.truncation_radius, f"Нужен радиус >= dist(o,x) + {t}"
            )
        members = g.vertices
    elif g.is_finite:
        members = g.vertices
    else:
        members = sorted(distances(g, x, t))

    position = {v: i for i, v in enumerate(members)}
    rows, cols, data = [], [], []
    for v, i in position.items():
        p = 1.0 / g.walk_degree(v)
        for u in g.neighbors(v):
            j = position.get(u)
            if j is not None:
                rows.append(j)
                cols.append(i)
                data.append(p)
    size = len(members)
    return members, sparse.csr_matrix((data, (rows, cols)), shape=(size, size))


def distribution_series(g: GraphHandle, x: int, t: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Итерация распределения из δ_x: возвращает (P_x(X_s = x), масса на шаге s)
    для s = 0..t
    """
    if t < 0:
        raise InvalidParameterError(t, "Горизонт должен быть неотрицательным")
    if isinstance(g, RegularTree):
        return _tree_return_series(g, t), np.ones(t + 1)

    members, transposed = _window(g, x, t)
    mass = np.zeros(len(members))
    start = members.index(x)
    mass[start] = 1.0
    returns = np.empty(t + 1)
    totals = np.empty(t + 1)
    returns[0], totals[0] = 1.0, 1.0
    for s in range(1, t + 1):
        mass = transposed @ mass
        returns[s] = mass[start]
        totals[s] = mass.sum()
    return returns, totals


def local_times(g: GraphHandle, horizon: int, vertices: Iterable[int]) -> LocalTimeTable:
    """
    ℓ_x(t) для всех x из W накоплением массы в x при итерации распределения
    """
    table = LocalTimeTable(horizon)
    tree_value = None
    for x in sorted(set(vertices)):
        if isinstance(g, RegularTree):
            # дерево вершинно-транзитивно: ℓ_x(t) одинаково для всех x
            if tree_value is None:
                tree_value = float(_tree_return_series(g, horizon).sum())
            table.values[x] = tree_value
            continue
        returns, totals = distribution_series(g, x, horizon)
        if np.max(np.abs(totals - 1.0)) > RESIDUAL_TOL:
            raise TruncationTooSmallError(horizon, "Масса распределения покинула окно")
        table.values[x] = float(returns.sum())
    logging.info(
        f"Локальные времена на {g.name}{list(g.params)}, t={horizon}: "
        f"ℓ* = {table.ell_star:.6g} в вершине {table.argmax}"
    )
    return table


def return_probability(g: GraphHandle, x: int, t: int) -> float:
    """
    P_x(X_t = x); проверяется оценка 4 deg(x)/sqrt(t+1)
    """
    returns, _ = distribution_series(g, x, t)
    value = float(returns[t])
    bound = 4 * g.degree(x) / math.sqrt(t + 1)
    if value > bound + BOUND_TOL:
        logging.error(f"Нарушение оценки возвращения в {x} при t={t}: {value} > {bound}")
    return value


# ============ ЦЕПЬ ПОСЕЩЁННЫХ МНОЖЕСТВ ============
State = Tuple[FrozenSet[int], int]


def _check_inside_window(g: GraphHandle, v: int) -> None:
    if isinstance(g, FiniteGraph) and v in g.boundary:
        raise TruncationTooSmallError(
            g.truncation_radius, f"Цепь достигает края окна в вершине {v}"
        )


def _explore_states(g: GraphHandle, start: int, n: int) -> List[State]:
    """Достижимые состояния (посещённое множество, позиция) с |S| < n"""
    first: State = (frozenset([start]), start)
    seen = {first}
    order = [first]
    stack = [first]
    while stack:
        visited, current = stack.pop()
        _check_inside_window(g, current)
        for v in g.neighbors(current):
            grown = visited | {v}
            if len(grown) >= n:
                continue
            state = (grown, v)
            if state not in seen:
                seen.add(state)
                order.append(state)
                stack.append(state)
                if len(order) > STATE_CAP:
                    raise InvalidParameterError(n, "Слишком много состояний цепи")
    return order


def discovery_time_exact(g: GraphHandle, n: int, start: Optional[int] = None) -> float:
    """
    Точное E[T_n] через цепь на парах (посещённое множество, позиция);
    открытие n-й вершины - поглощение
    """
    start = g.origin if start is None else start
    if n < 1:
        raise InvalidParameterError(n, "n должно быть >= 1")
    if isinstance(g, FiniteGraph) and n > g.order:
        raise InvalidParameterError(n, "n больше числа вершин")
    if n == 1:
        return 0.0

    states = _explore_states(g, start, n)
    position = {s: i for i, s in enumerate(states)}
    rows, cols, data = [], [], []
    for (visited, current), i in position.items():
        nbrs = g.neighbors(current)
        rows.append(i)
        cols.append(i)
        data.append(1.0)
        for v in nbrs:
            j = position.get((visited | {v}, v))
            if j is not None:
                rows.append(i)
                cols.append(j)
                data.append(-1.0 / len(nbrs))
    size = len(states)
    matrix = sparse.csr_matrix((data, (rows, cols)), shape=(size, size))
    solution, residual = _solve(matrix, np.ones(size))
    logging.info(
        f"Точное E[T_{n}] на {g.name}{list(g.params)}: {solution[0]:.6g} "
        f"({size} состояний, невязка {residual:.2e})"
    )
    return float(solution[0])


def expected_range_exact(g: GraphHandle, t: int, start: Optional[int] = None) -> float:
    """Точное E[R_t] прямой итерацией распределения по состояниям"""
    start = g.origin if start is None else start
    if t < 0:
        raise InvalidParameterError(t, "Горизонт должен быть неотрицательным")
    mass: Dict[State, float] = {(frozenset([start]), start): 1.0}
    for _ in range(t):
        moved: Dict[State, float] = {}
        for (visited, current), p in mass.items():
            _check_inside_window(g, current)
            nbrs = g.neighbors(current)
            share = p / len(nbrs)
            for v in nbrs:
                key = (visited | {v}, v)
                moved[key] = moved.get(key, 0.0) + share
        if len(moved) > STATE_CAP:
            raise InvalidParameterError(t, "Слишком много состояний цепи")
        mass = moved
    return float(sum(p * len(visited) for (visited, _), p in mass.items()))
