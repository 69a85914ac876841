#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Графы для блужданий: конечные (явная смежность) и ленивые бесконечные
(детерминированный оракул соседей), а также каталог конструкций.

Соглашения о номерах вершин:
  - конечные графы каталога: 0..N-1, начало (origin) задаётся семейством;
  - луч: 0, 1, 2, ... (0 - концевая вершина);
  - двусторонняя прямая: zigzag-код z -> 2z (z >= 0), -2z-1 (z < 0);
  - решётка Z^d: zigzag-коды координат, упакованные по 64//d бит;
  - d-регулярное дерево: нумерация в ширину, корень 0;
  - бесконечный леденец G_n: клика 0..c-1, затем путь c, c+1, ...;
  - звезда с лучом: центр 0, листья 1..k, луч k+1, k+2, ... из листа k;
  - многомасштабный леденец: (номер блока << 32) | номер внутри блока.

Списки соседей всегда возвращаются по возрастанию номеров.
"""

import itertools
import logging
import math
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Set, Tuple

import networkx as nx

from rangelab.models import (
    InvalidParameterError,
    InvalidVertexError,
    LollipopSpec,
    MultiScaleSpec,
    NoExitError,
    UnknownFamilyError,
)

BLOCK_BITS = 32
BLOCK_MASK = (1 << BLOCK_BITS) - 1


# ============ АБСТРАКЦИЯ ГРАФА ============
class GraphHandle(ABC):
    """Неизменяемый граф с оракулом соседей и выделенным началом X_0"""

    kind: str = "finite"

    def __init__(self, name: str, params: Tuple[int, ...], origin: int):
        self._name = name
        self._params = tuple(params)
        self._origin = origin

    @property
    def name(self) -> str:
        return self._name

    @property
    def params(self) -> Tuple[int, ...]:
        return self._params

    @property
    def origin(self) -> int:
        return self._origin

    @property
    def metadata(self) -> Dict[str, object]:
        return {"family": self._name, "params": list(self._params), "kind": self.kind}

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    @property
    def max_degree(self) -> Optional[int]:
        """Максимальная степень, если она ограничена"""
        return None

    @abstractmethod
    def contains(self, v: int) -> bool:
        """Принадлежит ли вершина графу"""

    @abstractmethod
    def _neighbors(self, v: int) -> Tuple[int, ...]:
        pass

    def neighbors(self, v: int) -> Tuple[int, ...]:
        """Соседи вершины по возрастанию номеров"""
        if not self.contains(v):
            raise InvalidVertexError(v)
        return self._neighbors(v)

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def walk_degree(self, v: int) -> int:
        """Степень, определяющая переходные вероятности 1/deg(v)"""
        return self.degree(v)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self._name}, {list(self._params)})"


class FiniteGraph(GraphHandle):
    """Конечный граф с явной смежностью (в том числе усечение ленивого)"""

    kind = "finite"

    def __init__(
        self,
        adjacency: Dict[int, Tuple[int, ...]],
        origin: int,
        name: str,
        params: Tuple[int, ...] = (),
        truncation_radius: Optional[int] = None,
        outer_degree: Optional[Dict[int, int]] = None,
    ):
        super().__init__(name, params, origin)
        self._adjacency = {v: tuple(sorted(adjacency[v])) for v in sorted(adjacency)}
        self._truncation_radius = truncation_radius
        self._outer_degree = dict(outer_degree) if outer_degree else None
        self._boundary = frozenset(
            v
            for v, nbrs in self._adjacency.items()
            if self._outer_degree is not None and len(nbrs) < self._outer_degree[v]
        )
        if origin not in self._adjacency:
            raise InvalidVertexError(origin, "Начало не принадлежит графу")

    @property
    def vertices(self) -> List[int]:
        return list(self._adjacency)

    @property
    def order(self) -> int:
        return len(self._adjacency)

    @property
    def edges(self) -> List[Tuple[int, int]]:
        return [(u, v) for u, nbrs in self._adjacency.items() for v in nbrs if u < v]

    @property
    def edge_count(self) -> int:
        return sum(len(nbrs) for nbrs in self._adjacency.values()) // 2

    @property
    def max_degree(self) -> Optional[int]:
        return max((len(n) for n in self._adjacency.values()), default=0)

    @property
    def truncation_radius(self) -> Optional[int]:
        """Радиус усечения, если граф получен через truncate"""
        return self._truncation_radius

    @property
    def metadata(self) -> Dict[str, object]:
        data = super().metadata
        if self._truncation_radius is not None:
            data["truncation_radius"] = self._truncation_radius
        return data

    def contains(self, v: int) -> bool:
        return v in self._adjacency

    def _neighbors(self, v: int) -> Tuple[int, ...]:
        return self._adjacency[v]

    def walk_degree(self, v: int) -> int:
        if self._outer_degree is not None:
            return self._outer_degree[v]
        return len(self.neighbors(v))

    @property
    def boundary(self) -> FrozenSet[int]:
        """Вершины окна, у которых часть рёбер ведёт за пределы усечения"""
        return self._boundary

    def standalone(self) -> "FiniteGraph":
        """Окно как самостоятельный конечный граф: блуждание отражается от края"""
        if self._truncation_radius is None:
            return self
        return FiniteGraph(self._adjacency, self.origin, self.name, self.params)

    def index(self) -> Dict[int, int]:
        """Номер вершины -> позиция в матрицах"""
        return {v: i for i, v in enumerate(self._adjacency)}

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(self._adjacency)
        graph.add_edges_from(self.edges)
        return graph


class LazyGraph(GraphHandle):
    """Бесконечный граф, соседи вычисляются по запросу"""

    kind = "lazy-infinite"

    def contains(self, v: int) -> bool:
        return isinstance(v, int) and v >= 0


# ============ ЛЕНИВЫЕ СЕМЕЙСТВА ============
def zigzag(z: int) -> int:
    return 2 * z if z >= 0 else -2 * z - 1


def unzigzag(v: int) -> int:
    return v // 2 if v % 2 == 0 else -(v + 1) // 2


class Ray(LazyGraph):
    """Односторонний бесконечный путь, начало - концевая вершина"""

    def __init__(self):
        super().__init__("ray", (), 0)

    @property
    def max_degree(self) -> Optional[int]:
        return 2

    def _neighbors(self, v: int) -> Tuple[int, ...]:
        return (1,) if v == 0 else (v - 1, v + 1)


class Line(LazyGraph):
    """Двусторонняя прямая Z"""

    def __init__(self):
        super().__init__("line", (), 0)

    @property
    def max_degree(self) -> Optional[int]:
        return 2

    def _neighbors(self, v: int) -> Tuple[int, ...]:
        z = unzigzag(v)
        return tuple(sorted((zigzag(z - 1), zigzag(z + 1))))


class Lattice(LazyGraph):
    """Решётка Z^d с упакованными zigzag-координатами"""

    def __init__(self, d: int):
        if not 1 <= d <= 8:
            raise InvalidParameterError(d, "Размерность решётки должна быть 1..8")
        super().__init__("lattice", (d,), 0)
        self._d = d
        self._bits = 64 // d

    @property
    def max_degree(self) -> Optional[int]:
        return 2 * self._d

    def decode(self, v: int) -> List[int]:
        mask = (1 << self._bits) - 1
        return [unzigzag((v >> (self._bits * i)) & mask) for i in range(self._d)]

    def encode(self, coords: Iterable[int]) -> int:
        v = 0
        for i, z in enumerate(coords):
            code = zigzag(z)
            if code >> self._bits:
                raise InvalidVertexError(code, "Координата вне упаковки")
            v |= code << (self._bits * i)
        return v

    def contains(self, v: int) -> bool:
        return isinstance(v, int) and 0 <= v < 2 ** (self._bits * self._d)

    def _neighbors(self, v: int) -> Tuple[int, ...]:
        coords = self.decode(v)
        result = []
        for i in range(self._d):
            for step in (-1, 1):
                moved = list(coords)
                moved[i] += step
                result.append(self.encode(moved))
        return tuple(sorted(result))


class RegularTree(LazyGraph):
    """d-регулярное дерево; корень 0, нумерация в ширину"""

    def __init__(self, d: int = 3):
        if d < 3:
            raise InvalidParameterError(d, "Степень дерева должна быть >= 3")
        super().__init__("regular-tree", (d,), 0)
        self._d = d

    @property
    def degree_bound(self) -> int:
        return self._d

    @property
    def max_degree(self) -> Optional[int]:
        return self._d

    def parent(self, v: int) -> int:
        if v == 0:
            raise InvalidVertexError(v, "У корня нет родителя")
        if v <= self._d:
            return 0
        return (v - self._d - 1) // (self._d - 1) + 1

    def children(self, v: int) -> Tuple[int, ...]:
        if v == 0:
            return tuple(range(1, self._d + 1))
        first = (self._d - 1) * (v - 1) + self._d + 1
        return tuple(range(first, first + self._d - 1))

    def _neighbors(self, v: int) -> Tuple[int, ...]:
        if v == 0:
            return self.children(0)
        return (self.parent(v),) + self.children(v)


class InfiniteLollipop(LazyGraph):
    """G_n: леденец L_n, путь которого продолжен в бесконечный луч"""

    def __init__(self, n: int):
        self._spec = LollipopSpec(n)
        super().__init__("infinite-lollipop", (n,), self._spec.origin)
        self._c = self._spec.clique_order

    @property
    def spec(self) -> LollipopSpec:
        return self._spec

    @property
    def max_degree(self) -> Optional[int]:
        return max(self._c, 2)

    def _neighbors(self, v: int) -> Tuple[int, ...]:
        c = self._c
        if v < c:
            result = [u for u in range(c) if u != v]
            if v == c - 1:
                result.append(c)
            return tuple(result)
        left = v - 1 if v > c else c - 1
        return (left, v + 1)


class StarRay(LazyGraph):
    """Звезда с k листьями, лист k продолжен бесконечным лучом"""

    def __init__(self, k: int):
        if k < 1:
            raise InvalidParameterError(k, "Звезде нужен хотя бы один лист")
        super().__init__("star-ray", (k,), 0)
        self._k = k

    @property
    def max_degree(self) -> Optional[int]:
        return max(self._k, 2)

    def _neighbors(self, v: int) -> Tuple[int, ...]:
        k = self._k
        if v == 0:
            return tuple(range(1, k + 1))
        if v < k:
            return (0,)
        if v == k:
            return (0, k + 1)
        return (v - 1, v + 1)


class MultiScaleLollipop(LazyGraph):
    """Цепочка леденцов: конец L_{n_i} соединён с началом L_{n_{i+1}}"""

    def __init__(self, spec: MultiScaleSpec):
        super().__init__("multiscale-lollipop", spec.scales, 0)
        self._spec = spec

    @property
    def spec(self) -> MultiScaleSpec:
        return self._spec

    @staticmethod
    def pack(block: int, w: int) -> int:
        return (block << BLOCK_BITS) | w

    @staticmethod
    def unpack(v: int) -> Tuple[int, int]:
        return v >> BLOCK_BITS, v & BLOCK_MASK

    def contains(self, v: int) -> bool:
        if not isinstance(v, int) or v < 0:
            return False
        block, w = self.unpack(v)
        return block <= BLOCK_MASK and w < self._spec.scale(block)

    def _neighbors(self, v: int) -> Tuple[int, ...]:
        block, w = self.unpack(v)
        n = self._spec.scale(block)
        c = n // 2
        base = block << BLOCK_BITS
        result = []
        if w < c:
            result.extend(base | u for u in range(c) if u != w)
            if w == c - 1:
                result.append(base | c)
            if w == 0 and block > 0:
                result.append(self.pack(block - 1, self._spec.scale(block - 1) - 1))
        else:
            result.append(base | (w - 1) if w > c else base | (c - 1))
            if w < n - 1:
                result.append(base | (w + 1))
            else:
                result.append(self.pack(block + 1, 0))
        return tuple(sorted(result))

    def block_origin(self, block: int) -> int:
        return self.pack(block, 0)

    def block_end(self, block: int) -> int:
        return self.pack(block, self._spec.scale(block) - 1)


# ============ КАТАЛОГ ============
@dataclass(frozen=True)
class CatalogEntry:
    """Описание семейства для листинга каталога"""

    family: str
    kind: str
    params: str
    f_form: str
    g_form: str


CATALOG: Dict[str, CatalogEntry] = {
    entry.family: entry
    for entry in (
        CatalogEntry("clique", "finite", "[m]", "f(n)=C(n,2)", "g(r)=m (r>=1)"),
        CatalogEntry("path", "finite", "[m]", "f(n)=n-1", "по перебору"),
        CatalogEntry(
            "cycle", "finite", "[m], m>=3", "f(n)=n-1 (n<m), f(m)=m", "по перебору"
        ),
        CatalogEntry("star", "finite", "[k] листьев", "f(n)=n-1", "g(1)=2 (k>=2)"),
        CatalogEntry("box", "finite", "[d, m]", "по перебору", "по перебору"),
        CatalogEntry(
            "lollipop", "finite", "[n], n>=2", "C(min(n,c),2)+max(0,n-c)", "по перебору"
        ),
        CatalogEntry("ray", "lazy-infinite", "[]", "f(n)=n-1", "g(r)=r+1"),
        CatalogEntry("line", "lazy-infinite", "[]", "f(n)=n-1", "g(r)=2r+1"),
        CatalogEntry(
            "lattice",
            "lazy-infinite",
            "[d]",
            "d=1: n-1; d=2: 2n-ceil(2*sqrt(n))",
            "шар L1 в Z^d",
        ),
        CatalogEntry(
            "regular-tree",
            "lazy-infinite",
            "[d], d>=3",
            "f(n)=n-1",
            "g(r)=1+d((d-1)^r-1)/(d-2)",
        ),
        CatalogEntry(
            "infinite-lollipop",
            "lazy-infinite",
            "[n], n>=2",
            "C(min(n,c),2)+max(0,n-c), c=n//2",
            "g(0)=1, g(r)=min(2r+1, r+c-1) (r>=1)",
        ),
        CatalogEntry(
            "star-ray",
            "lazy-infinite",
            "[k]",
            "f(n)=n-1",
            "g(1)=2, g(r)=min(2r+1, k+r-1) (r>=2)",
        ),
        CatalogEntry(
            "multiscale-lollipop",
            "lazy-infinite",
            "[max_block] или scales",
            "f(n)=C(n,2)",
            "g: derived closed form, see docs (geometry.py)",
        ),
    )
}

FAMILY_ALIASES = {"dyadic": "multiscale-lollipop"}
FINITE_FAMILIES = {name for name, e in CATALOG.items() if e.kind == "finite"}
LAZY_FAMILIES = {name for name, e in CATALOG.items() if e.kind == "lazy-infinite"}


def _require(params: Tuple[int, ...], count: int, family: str) -> None:
    if len(params) != count or not all(isinstance(p, int) for p in params):
        raise InvalidParameterError(
            list(params), f"Семейство {family} ожидает {count} целых параметров"
        )


def _from_networkx(graph: nx.Graph, origin: int, name: str, params) -> FiniteGraph:
    adjacency = {v: tuple(graph.neighbors(v)) for v in graph.nodes}
    return FiniteGraph(adjacency, origin, name, tuple(params))


def lollipop_networkx(spec: LollipopSpec) -> nx.Graph:
    """Клика 0..c-1, путь c..n-1 и ребро (c-1, c)"""
    c = spec.clique_order
    graph = nx.complete_graph(c)
    nx.add_path(graph, range(c, spec.n))
    graph.add_edge(spec.attachment, c)
    return graph


def build_finite(name: str, params: Iterable[int]) -> FiniteGraph:
    """
    Построение конечного графа каталога
    """
    params = tuple(params)
    if name not in FINITE_FAMILIES:
        raise UnknownFamilyError(name)

    if name == "box":
        _require(params, 2, name)
        d, m = params
        if d < 1 or m < 1:
            raise InvalidParameterError(list(params), "Нужно d >= 1 и m >= 1")
    else:
        _require(params, 1, name)
    first = params[0]

    if name == "clique":
        if first < 1:
            raise InvalidParameterError(first, "Клика требует m >= 1")
        graph, expected = nx.complete_graph(first), math.comb(first, 2)
    elif name == "path":
        if first < 1:
            raise InvalidParameterError(first, "Путь требует m >= 1")
        graph, expected = nx.path_graph(first), first - 1
    elif name == "cycle":
        if first < 3:
            raise InvalidParameterError(first, "Цикл требует m >= 3")
        graph, expected = nx.cycle_graph(first), first
    elif name == "star":
        if first < 1:
            raise InvalidParameterError(first, "Звезда требует k >= 1")
        graph, expected = nx.star_graph(first), first
    elif name == "box":
        d, m = params
        grid = nx.grid_graph(dim=[m] * d)
        graph = nx.convert_node_labels_to_integers(grid, ordering="sorted")
        expected = d * (m - 1) * m ** (d - 1)
    else:
        spec = LollipopSpec(first)
        graph, expected = lollipop_networkx(spec), spec.edge_count

    if graph.number_of_edges() != expected:
        raise InvalidParameterError(
            list(params), f"Число рёбер {graph.number_of_edges()} != {expected}"
        )

    result = _from_networkx(graph, 0, name, params)
    logging.info(
        f"Построен конечный граф {name}{list(params)}: "
        f"{result.order} вершин, {result.edge_count} рёбер"
    )
    return result


def build_lazy(name: str, params: Iterable[int] = ()) -> LazyGraph:
    """
    Построение ленивого бесконечного графа каталога
    """
    params = tuple(params)
    if name not in LAZY_FAMILIES:
        raise UnknownFamilyError(name)

    if name in ("ray", "line"):
        _require(params, 0, name)
        graph: LazyGraph = Ray() if name == "ray" else Line()
    elif name == "lattice":
        _require(params, 1, name)
        graph = Lattice(params[0])
    elif name == "regular-tree":
        if params:
            _require(params, 1, name)
        graph = RegularTree(*params)
    elif name == "infinite-lollipop":
        _require(params, 1, name)
        graph = InfiniteLollipop(params[0])
    elif name == "star-ray":
        _require(params, 1, name)
        graph = StarRay(params[0])
    else:
        if len(params) > 1:
            return build_multiscale(MultiScaleSpec(params))
        return build_multiscale(MultiScaleSpec.dyadic(*params))

    logging.info(f"Построен ленивый граф {name}{list(params)}")
    return graph


def build_multiscale(spec: MultiScaleSpec) -> MultiScaleLollipop:
    """Многомасштабный леденец по спецификации масштабов"""
    graph = MultiScaleLollipop(spec)
    logging.info(f"Построен многомасштабный леденец, масштабы {list(spec.scales)}")
    return graph


def from_descriptor(descriptor: Dict[str, object]) -> GraphHandle:
    """
    Граф по описанию из конфигурации:
    {"family": ..., "params": [...]} или {"family": "multiscale-lollipop",
    "dyadic_max_block": 12} / {"family": "multiscale-lollipop", "scales": [...]}
    """
    family = descriptor.get("family")
    if not isinstance(family, str):
        raise UnknownFamilyError(str(family))
    family = FAMILY_ALIASES.get(family, family)
    if family == "multiscale-lollipop":
        if "scales" in descriptor:
            return build_multiscale(MultiScaleSpec(tuple(descriptor["scales"])))
        if "dyadic_max_block" in descriptor:
            return build_multiscale(
                MultiScaleSpec.dyadic(int(descriptor["dyadic_max_block"]))
            )
    params = descriptor.get("params", [])
    if not isinstance(params, list):
        raise InvalidParameterError(params, "params должен быть списком")
    if family in FINITE_FAMILIES:
        return build_finite(family, params)
    return build_lazy(family, params)


def connected_graphs(max_order: int) -> Iterator[FiniteGraph]:
    """
    Все помеченные связные графы на 2..max_order вершинах
    (параметры: [порядок, битовая маска рёбер])
    """
    for order in range(2, max_order + 1):
        pairs = list(itertools.combinations(range(order), 2))
        for mask in range(1, 2 ** len(pairs)):
            graph = nx.empty_graph(order)
            graph.add_edges_from(p for i, p in enumerate(pairs) if mask >> i & 1)
            if nx.is_connected(graph):
                yield _from_networkx(graph, 0, "all-connected", (order, mask))


# ============ ШАРЫ, УСЕЧЕНИЯ, РАССТОЯНИЯ ============
def distances(g: GraphHandle, x: int, radius: int) -> Dict[int, int]:
    """Расстояния от x до всех вершин шара B(x, radius)"""
    if radius < 0:
        raise InvalidParameterError(radius, "Радиус должен быть неотрицательным")
    if not g.contains(x):
        raise InvalidVertexError(x)
    dist = {x: 0}
    queue = deque([x])
    while queue:
        u = queue.popleft()
        if dist[u] == radius:
            continue
        for v in g.neighbors(u):
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def ball(g: GraphHandle, x: int, r: int) -> Set[int]:
    """Замкнутый шар B(x, r) в метрике графа"""
    return set(distances(g, x, r))


def truncate(g: GraphHandle, radius: int) -> FiniteGraph:
    """
    Индуцированный подграф на B(origin, radius); запоминает радиус и
    исходные степени, чтобы вероятности перехода оставались 1/deg
    """
    dist = distances(g, g.origin, radius)
    members = set(dist)
    adjacency = {v: tuple(u for u in g.neighbors(v) if u in members) for v in dist}
    outer = {v: g.degree(v) for v in dist}
    result = FiniteGraph(
        adjacency,
        g.origin,
        g.name,
        g.params,
        truncation_radius=radius,
        outer_degree=outer,
    )
    logging.info(f"Усечение {g.name}{list(g.params)} радиусом {radius}: {result.order} вершин")
    return result


def distance_to_complement(g: GraphHandle, inside: Set[int], x: int) -> int:
    """
    dist(x, S^c): поиск в ширину, проходящий только через вершины S;
    первая найденная вершина вне S даёт расстояние; на усечённом окне
    выходом считается и ребро за край окна
    """
    if x not in inside:
        return 0
    edge = g.boundary if isinstance(g, FiniteGraph) else frozenset()
    seen = {x}
    queue = deque([(x, 0)])
    while queue:
        u, d = queue.popleft()
        if u in edge:
            return d + 1
        for v in g.neighbors(u):
            if v in seen:
                continue
            if v not in inside:
                return d + 1
            seen.add(v)
            queue.append((v, d + 1))
    raise NoExitError(len(inside))


def outer_boundary(g: GraphHandle, inside: Iterable[int]) -> FrozenSet[int]:
    """Внешняя вершинная граница ∂_V S"""
    members = set(inside)
    return frozenset(v for u in members for v in g.neighbors(u) if v not in members)


def induced_edge_count(g: GraphHandle, inside: Iterable[int]) -> int:
    """|E_S|: число рёбер с обоими концами в S"""
    members = set(inside)
    return sum(1 for u in members for v in g.neighbors(u) if v in members and u < v)


def symmetry_violations(g: GraphHandle, radius: int) -> List[Tuple[int, int]]:
    """Пары (x, y), для которых y ~ x, но x не ~ y, в шаре вокруг начала"""
    bad = []
    for x in distances(g, g.origin, radius):
        nbrs = g.neighbors(x)
        if len(set(nbrs)) != len(nbrs) or x in nbrs:
            bad.append((x, x))
        for y in nbrs:
            if x not in g.neighbors(y):
                bad.append((x, y))
    return bad
