#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Крупномасштабные параметры графа: максимальная плотность рёбер
f(n) = max_{|S|=n} |E_S|, минимальный рост объёма g(r) = min_x |B(x, r)|,
гармоническая сумма Σ_{r<n} 1/g(r) и вершинная изопериметрия |∂_V S|/|S|.

Вывод замкнутых форм для g на ленивых семействах:

  Бесконечный леденец G_n (c = ⌊n/2⌋ >= 2). Вершина пути на расстоянии
  j >= r от вершины прикрепления видит 2r+1 вершин пути. Вершина клики,
  не являющаяся точкой прикрепления, видит всю клику (c вершин, включая
  прикрепление на расстоянии 1) и r-1 вершин пути: c + r - 1. Все прочие
  вершины видят больше. Отсюда g(r) = min(2r+1, r+c-1) при r >= 1.
  При c = 1 граф - луч, g(r) = r+1.

  Звезда с лучом (k >= 2 листьев). Свободный лист видит центр (1),
  остальные k-1 листьев (2) и r-2 вершины луча: k + r - 1 при r >= 2;
  при r = 1 - ровно 2 вершины. Вершина луча далеко от центра видит 2r+1.

  Многомасштабный леденец. Вершины o_1, (e_1), o_2, a_2, путь, o_3, ...
  образуют «хребет» - луч кратчайших путей от начала; вершины клик вне
  хребта смежны с o_i и a_i. Вершина на хребте на расстоянии s >= r от
  начала видит не меньше r вершин хребта в каждую сторону (2r+1 всего),
  вершина клики вне хребта видит ещё больше. Поскольку мосты между
  кликами неограниченно удлиняются, значение 2r+1 достигается серединой
  достаточно длинного моста. Поэтому
      g(r) = min(2r+1, min_{v in B(o, r)} |B(v, r)|),
  и второй минимум вычисляется точно поиском в ширину по конечному шару.
"""

import logging
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

from rangelab.graphs import (
    FiniteGraph,
    GraphHandle,
    InfiniteLollipop,
    Lattice,
    Line,
    MultiScaleLollipop,
    Ray,
    RegularTree,
    StarRay,
    ball,
    distances,
    outer_boundary,
)
from rangelab.models import (
    BudgetExceededError,
    CoarseProfile,
    FlaggedProfileError,
    FProvenance,
    FValue,
    GProvenance,
    GValue,
    InvalidParameterError,
)

ENUMERATION_CAP = 16
ENUMERATION_BUDGET = 60.0  # секунд на вызов


# ============ f(n): МАКСИМАЛЬНАЯ ПЛОТНОСТЬ РЁБЕР ============
def f_closed_form(g: GraphHandle, n: int) -> Optional[int]:
    """Доказанные замкнутые формы f(n) для семейств каталога"""
    if isinstance(g, (Ray, Line, RegularTree, StarRay)):
        return n - 1
    if isinstance(g, Lattice):
        d = g.params[0]
        if d == 1:
            return n - 1
        if d == 2:
            # ⌈2√n⌉ = isqrt(4n - 1) + 1
            return 2 * n - (math.isqrt(4 * n - 1) + 1)
        return None
    if isinstance(g, InfiniteLollipop):
        c = g.spec.clique_order
        return math.comb(min(n, c), 2) + max(0, n - c)
    if isinstance(g, MultiScaleLollipop):
        # клики неограниченного размера
        return math.comb(n, 2)
    if isinstance(g, FiniteGraph) and g.truncation_radius is None:
        first = g.params[0] if g.params else None
        if g.name == "clique":
            return math.comb(n, 2)
        if g.name in ("path", "star"):
            return n - 1
        if g.name == "cycle":
            return first if n == first else n - 1
        if g.name == "lollipop":
            c = first // 2
            return math.comb(min(n, c), 2) + max(0, n - c)
    return None


def _greedy_dense(adj: List[set], n: int) -> int:
    """Жадная нижняя оценка f(n)"""
    chosen = {max(range(len(adj)), key=lambda v: (len(adj[v]), -v))}
    while len(chosen) < n:
        best = max(
            (v for v in range(len(adj)) if v not in chosen),
            key=lambda v: (len(adj[v] & chosen), len(adj[v]), -v),
        )
        chosen.add(best)
    return sum(len(adj[v] & chosen) for v in chosen) // 2


def densest_subset(
    g: FiniteGraph, n: int, budget: float = ENUMERATION_BUDGET
) -> Tuple[int, Tuple[int, ...]]:
    """
    Точный максимум |E_S| по всем n-подмножествам (включая несвязные)
    методом ветвей и границ; свидетель - лексикографически наименьшее
    оптимальное множество
    """
    vertices = g.vertices
    size = len(vertices)
    if not 1 <= n <= size:
        raise InvalidParameterError(n, f"n должно быть в пределах 1..{size}")
    position = {v: i for i, v in enumerate(vertices)}
    adj = [{position[u] for u in g.neighbors(v)} for v in vertices]
    ceiling = math.comb(n, 2)

    lower = _greedy_dense(adj, n)
    best = {"value": lower - 1, "set": None}
    deadline = time.monotonic() + budget
    nodes = [0]

    def bound(i: int, chosen: List[int], chosen_set: set, inside: int, k: int) -> float:
        if k == 0:
            return inside
        rest = range(i, size)
        scores = sorted(
            (
                len(adj[v] & chosen_set)
                + min(sum(1 for u in adj[v] if u >= i), k - 1) / 2
                for v in rest
            ),
            reverse=True,
        )
        return min(inside + sum(scores[:k]), ceiling)

    def search(i: int, chosen: List[int], chosen_set: set, inside: int) -> None:
        nodes[0] += 1
        if nodes[0] % 1024 == 0 and time.monotonic() > deadline:
            raise BudgetExceededError(budget)
        k = n - len(chosen)
        if k == 0:
            if inside > best["value"]:
                best["value"], best["set"] = inside, tuple(chosen)
            return
        if size - i < k or best["value"] >= ceiling:
            return
        if bound(i, chosen, chosen_set, inside, k) <= best["value"]:
            return
        gained = len(adj[i] & chosen_set)
        chosen.append(i)
        chosen_set.add(i)
        search(i + 1, chosen, chosen_set, inside + gained)
        chosen.pop()
        chosen_set.discard(i)
        search(i + 1, chosen, chosen_set, inside)

    search(0, [], set(), 0)
    return best["value"], tuple(vertices[i] for i in best["set"])


def edge_density_f(
    g: GraphHandle,
    n: int,
    cap: int = ENUMERATION_CAP,
    budget: float = ENUMERATION_BUDGET,
) -> FValue:
    """
    f(n): перебор для конечных графов (n <= cap), иначе замкнутая форма,
    иначе помеченная верхняя оценка min(C(n,2), ⌊Δn/2⌋)
    """
    if n < 1:
        raise InvalidParameterError(n, "n должно быть >= 1")
    if isinstance(g, FiniteGraph) and n > g.order:
        raise InvalidParameterError(n, f"В графе только {g.order} вершин")

    if isinstance(g, FiniteGraph) and n <= cap:
        try:
            value, witness = densest_subset(g, n, budget)
            return FValue(value, FProvenance.EXACT_ENUMERATION, witness)
        except BudgetExceededError as e:
            logging.warning(f"Перебор f({n}) на {g.name} прерван: {e}")

    closed = f_closed_form(g, n)
    if closed is not None:
        return FValue(closed, FProvenance.CLOSED_FORM)

    upper = math.comb(n, 2)
    if g.max_degree is not None:
        upper = min(upper, g.max_degree * n // 2)
    logging.warning(f"f({n}) на {g.name}{list(g.params)}: только верхняя оценка {upper}")
    return FValue(upper, FProvenance.UPPER_BOUND)


# ============ g(r): МИНИМАЛЬНЫЙ РОСТ ОБЪЁМА ============
def _lattice_ball(d: int, r: int) -> int:
    """Число точек Z^d в шаре L1 радиуса r"""
    return sum(2**k * math.comb(d, k) * math.comb(r, k) for k in range(min(d, r) + 1))


def _multiscale_g(g: MultiScaleLollipop, r: int) -> Tuple[int, int]:
    """Выведенная форма g(r) для многомасштабного леденца (см. описание модуля)"""
    near = sorted(ball(g, g.origin, r))
    witness = min(near, key=lambda v: (len(ball(g, v, r)), v))
    near_value = len(ball(g, witness, r))
    if near_value <= 2 * r + 1:
        return near_value, witness

    block = 0
    spec = g.spec
    while spec.scale(block) - spec.scale(block) // 2 + 2 < 2 * r + 1:
        block += 1
    c = spec.scale(block) // 2
    return 2 * r + 1, g.pack(block, c - 1 + r)


def g_closed_form(g: GraphHandle, r: int) -> Optional[Tuple[int, int]]:
    """(значение, вершина-свидетель) для семейств с замкнутой формой g"""
    if r == 0:
        return 1, g.origin
    if isinstance(g, Ray):
        return r + 1, 0
    if isinstance(g, Line):
        return 2 * r + 1, 0
    if isinstance(g, Lattice):
        return _lattice_ball(g.params[0], r), 0
    if isinstance(g, RegularTree):
        d = g.degree_bound
        return 1 + d * ((d - 1) ** r - 1) // (d - 2), 0
    if isinstance(g, InfiniteLollipop):
        c = g.spec.clique_order
        if c == 1:
            return r + 1, 0
        if 2 * r + 1 <= r + c - 1:
            return 2 * r + 1, c + r
        return r + c - 1, 0
    if isinstance(g, StarRay):
        k = g.params[0]
        if k == 1:
            return r + 1, 0
        if r == 1:
            return 2, 1
        if 2 * r + 1 <= k + r - 1:
            return 2 * r + 1, k + r
        return k + r - 1, 1
    if isinstance(g, MultiScaleLollipop):
        return _multiscale_g(g, r)
    return None


def truncated_min(g: GraphHandle, r: int, core: Iterable[int]) -> GValue:
    """Минимум |B(x, r)| по конечному набору вершин: лишь оценка g сверху"""
    members = sorted(set(core))
    if not members:
        raise InvalidParameterError(members, "Пустой набор вершин")
    witness = min(members, key=lambda v: (len(ball(g, v, r)), v))
    return GValue(len(ball(g, witness, r)), GProvenance.TRUNCATED_MIN, witness)


def volume_growth_g(
    g: GraphHandle, r: int, scope: str = "auto", core: Optional[Iterable[int]] = None
) -> GValue:
    """
    g(r) = min_x |B(x, r)|; scope: all (конечные графы) | core-set |
    closed-form | auto
    """
    if r < 0:
        raise InvalidParameterError(r, "Радиус должен быть неотрицательным")
    if scope == "auto":
        if g.is_finite:
            scope = "all"
        else:
            closed = g_closed_form(g, r)
            if closed is not None:
                return GValue(closed[0], GProvenance.CLOSED_FORM, closed[1])
            scope = "core-set"

    if scope == "all":
        if not isinstance(g, FiniteGraph):
            raise InvalidParameterError(
                g.name, "scope=all недоступен для бесконечного графа"
            )
        witness = min(g.vertices, key=lambda v: (len(ball(g, v, r)), v))
        return GValue(len(ball(g, witness, r)), GProvenance.EXACT_FINITE, witness)
    if scope == "closed-form":
        closed = g_closed_form(g, r)
        if closed is None:
            raise InvalidParameterError(g.name, "Нет замкнутой формы g")
        return GValue(closed[0], GProvenance.CLOSED_FORM, closed[1])
    if scope == "core-set":
        if core is None:
            core = distances(g, g.origin, max(r, 10))
        value = truncated_min(g, r, core)
        logging.warning(
            f"g({r}) на {g.name}{list(g.params)} по конечному ядру: {value.value} (оценка сверху)"
        )
        return value
    raise InvalidParameterError(scope, "Неизвестная область минимизации")


# ============ ПРОФИЛЬ ============
def harmonic_sum(profile: CoarseProfile, n: int) -> Fraction:
    """
    Σ_{r=0}^{n-1} 1/g(r) в рациональных числах
    """
    total = Fraction(0)
    for r in range(n):
        entry = profile.g.get(r)
        if entry is None:
            raise InvalidParameterError(r, f"Нет значения g({r}) в профиле")
        if entry.flagged:
            raise FlaggedProfileError(r, f"g({r}) - лишь оценка сверху")
        total += Fraction(1, entry.value)
    profile.harmonic_sums[n] = total
    return total


def build_profile(
    g: GraphHandle,
    n_max: int,
    r_max: Optional[int] = None,
    cap: int = ENUMERATION_CAP,
) -> CoarseProfile:
    """
    Профиль f(1..n_max), g(0..r_max) и гармонические суммы
    """
    if isinstance(g, FiniteGraph):
        n_max = min(n_max, g.order)
    r_max = n_max - 1 if r_max is None else r_max
    profile = CoarseProfile(family=g.name)
    for n in range(1, n_max + 1):
        profile.f[n] = edge_density_f(g, n, cap)
    for r in range(r_max + 1):
        profile.g[r] = volume_growth_g(g, r)
    if not any(v.flagged for v in profile.g.values()):
        for n in range(1, min(n_max, r_max + 1) + 1):
            harmonic_sum(profile, n)
    logging.info(f"Профиль {g.name}{list(g.params)}: n <= {n_max}, r <= {r_max}")
    return profile


def chaining_holds(profile: CoarseProfile) -> bool:
    """2f(n)+1 <= 2f(n+1) всякий раз, когда f(n+1) >= f(n)+1"""
    values = profile.f
    return all(
        2 * values[n].value + 1 <= 2 * values[n + 1].value
        for n in values
        if n >= 2 and n + 1 in values and values[n + 1].value >= values[n].value + 1
    )


# ============ ИЗОПЕРИМЕТРИЯ ============
@dataclass(frozen=True)
class BoundaryRatio:
    boundary: int
    size: int

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.boundary, self.size)


def boundary_ratio(g: GraphHandle, inside: Iterable[int]) -> BoundaryRatio:
    """|∂_V S| / |S| одним проходом по соседям S"""
    members = set(inside)
    if not members:
        raise InvalidParameterError(members, "Множество S пусто")
    return BoundaryRatio(len(outer_boundary(g, members)), len(members))


def ball_boundary_profile(g: GraphHandle, radius: int) -> Dict[int, BoundaryRatio]:
    """Изопериметрические отношения шаров B(o, r), r = 0..radius"""
    dist = distances(g, g.origin, radius)
    return {
        r: boundary_ratio(g, [v for v, d in dist.items() if d <= r])
        for r in range(radius + 1)
    }
