#!/usr/bin/env python3
# -*- coding: utf-8 -*-

from hypothesis import given, settings
from hypothesis import strategies as st

from rangelab.geometry import build_profile
from rangelab.graphs import FiniteGraph, Line, Ray, build_lazy, distance_to_complement
from rangelab.markov import escape_time, max_neighbor_hitting
from rangelab.walks import WalkConfig, chain_sum, packing_sum_check, run_walk

LAZY_GRAPHS = [
    Line(),
    Ray(),
    build_lazy("regular-tree", [3]),
    build_lazy("lattice", [2]),
    build_lazy("infinite-lollipop", [6]),
    build_lazy("star-ray", [4]),
]


@st.composite
def random_connected_graphs(draw, max_order: int = 7) -> FiniteGraph:
    """Случайный связный граф: остовное дерево плюс лишние рёбра"""
    order = draw(st.integers(min_value=2, max_value=max_order))
    edges = set()
    for v in range(1, order):
        parent = draw(st.integers(min_value=0, max_value=v - 1))
        edges.add((parent, v))
    extra = draw(
        st.lists(
            st.tuples(
                st.integers(min_value=0, max_value=order - 1),
                st.integers(min_value=0, max_value=order - 1),
            ),
            max_size=order,
        )
    )
    edges |= {(min(a, b), max(a, b)) for a, b in extra if a != b}
    adjacency = {v: [] for v in range(order)}
    for a, b in edges:
        adjacency[a].append(b)
        adjacency[b].append(a)
    return FiniteGraph(adjacency, 0, "random", (order,))


class TestWalkProperties:
    """Свойства траекторий на произвольных зёрнах"""

    @settings(max_examples=40, deadline=None)
    @given(
        graph=st.sampled_from(LAZY_GRAPHS),
        seed=st.integers(min_value=0, max_value=2**64 - 1),
        horizon=st.integers(min_value=0, max_value=300),
    )
    def test_range_process(self, graph, seed, horizon):
        """Тест: R_0 = 1, приращения 0 или 1, R_t <= t + 1"""
        trace = run_walk(WalkConfig(graph, seed=seed, horizon=horizon))
        process = trace.range_process

        assert process[0] == 1
        assert all(b - a in (0, 1) for a, b in zip(process, process[1:]))
        assert all(r <= t + 1 for t, r in enumerate(process))

    @settings(max_examples=30, deadline=None)
    @given(
        graph=st.sampled_from(LAZY_GRAPHS),
        seed=st.integers(min_value=0, max_value=2**32),
        n=st.integers(min_value=2, max_value=20),
    )
    def test_discovery_times_increase(self, graph, seed, n):
        """Тест: T_1 = 0, T_2 = 1, времена открытий строго растут"""
        trace = run_walk(WalkConfig(graph, seed=seed, target_range=n))
        times = trace.discovery_times

        assert times[0] == 0
        assert times[1] == 1
        assert all(a < b for a, b in zip(times, times[1:]))

    @settings(max_examples=30, deadline=None)
    @given(
        graph=st.sampled_from(LAZY_GRAPHS),
        seed=st.integers(min_value=0, max_value=2**32),
        n=st.integers(min_value=1, max_value=24),
    )
    def test_packing_bound(self, graph, seed, n):
        """Тест детерминированной границы упаковки на любой траектории"""
        profile = build_profile(graph, 1, r_max=max((n + 1) // 2 - 1, 0))
        trace = run_walk(WalkConfig(graph, seed=seed, target_range=n))

        assert packing_sum_check(trace, profile, n).holds

    @settings(max_examples=30, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=2**32),
        n=st.integers(min_value=2, max_value=16),
    )
    def test_chain_sum_nonnegative(self, seed, n):
        """Тест: цепная сумма не меньше n - 1 (каждое слагаемое >= 1)"""
        trace = run_walk(WalkConfig(Line(), seed=seed, target_range=n))

        assert chain_sum(trace, n) >= n - 1


class TestLemmaProperties:
    """Свойства точных лемм на случайных графах и множествах"""

    @settings(max_examples=60, deadline=None)
    @given(graph=random_connected_graphs())
    def test_neighbor_lemma(self, graph):
        """Тест E_x[τ_y] <= 2|F| - 1 для соседей x, y"""
        assert max_neighbor_hitting(graph).holds

    @settings(max_examples=60, deadline=None)
    @given(
        inside=st.sets(st.integers(min_value=0, max_value=15), min_size=1, max_size=10),
        data=st.data(),
    )
    def test_escape_lemma_on_ray(self, inside, data):
        """Тест E_x[τ_{S^c}] <= (2|E_S|+1)·dist(x, S^c) на луче"""
        x = data.draw(st.sampled_from(sorted(inside)))
        result = escape_time(Ray(), inside, x)

        assert result.distance == distance_to_complement(Ray(), inside, x)
        assert result.holds

    @settings(max_examples=40, deadline=None)
    @given(graph=random_connected_graphs(max_order=6), data=st.data())
    def test_escape_lemma_on_random_graph(self, graph, data):
        """Тест леммы о выходе на случайных конечных графах"""
        vertices = graph.vertices
        inside = data.draw(
            st.sets(st.sampled_from(vertices), min_size=1, max_size=len(vertices) - 1)
        )
        x = data.draw(st.sampled_from(sorted(inside)))

        assert escape_time(graph, inside, x).holds
