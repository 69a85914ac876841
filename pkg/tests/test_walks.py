#!/usr/bin/env python3
# -*- coding: utf-8 -*-

from fractions import Fraction

import pytest

from rangelab.geometry import build_profile
from rangelab.graphs import Line, Ray, RegularTree, build_finite, build_lazy, truncate
from rangelab.markov import discovery_time_exact
from rangelab.models import (
    InsufficientTraceError,
    InvalidParameterError,
    InvalidVertexError,
    MonteCarloSummary,
    TruncationTooSmallError,
)
from rangelab.walks import (
    WalkConfig,
    chain_sum,
    default_step_cap,
    estimate_ER,
    estimate_ET,
    estimate_range_curve,
    packing_sum_check,
    replicate_seed,
    run_replicates,
    run_walk,
)


class TestWalkConfig:
    """Тесты конфигурации блуждания"""

    def test_requires_stop_rule(self):
        """Тест конфигурации без горизонта и целевого диапазона"""
        with pytest.raises(InvalidParameterError):
            WalkConfig(Ray())

    def test_foreign_start(self):
        """Тест старта вне графа"""
        with pytest.raises(InvalidVertexError):
            WalkConfig(build_finite("path", [3]), start=9, horizon=5)

    def test_step_cap_from_environment(self, monkeypatch):
        """Тест переменной RANGE_LAB_STEP_CAP"""
        monkeypatch.setenv("RANGE_LAB_STEP_CAP", "500")
        assert default_step_cap() == 500

        monkeypatch.setenv("RANGE_LAB_STEP_CAP", "много")
        with pytest.raises(InvalidParameterError):
            default_step_cap()

    def test_default_step_cap(self, monkeypatch):
        """Тест лимита шагов по умолчанию"""
        monkeypatch.delenv("RANGE_LAB_STEP_CAP", raising=False)
        assert default_step_cap() == 10**9


class TestRunWalk:
    """Тесты одного блуждания"""

    def test_same_seed_same_trace(self):
        """Тест воспроизводимости траектории"""
        first = run_walk(WalkConfig(Line(), seed=42, horizon=500))
        second = run_walk(WalkConfig(Line(), seed=42, horizon=500))

        assert first.range_process == second.range_process
        assert first.discovery_vertices == second.discovery_vertices

    def test_range_process_shape(self):
        """Тест процесса диапазона: длина t+1, приращения 0 или 1"""
        trace = run_walk(WalkConfig(build_lazy("regular-tree"), seed=3, horizon=200))
        steps = [b - a for a, b in zip(trace.range_process, trace.range_process[1:])]

        assert len(trace.range_process) == 201
        assert trace.range_process[0] == 1
        assert set(steps) <= {0, 1}
        assert trace.final_range == len(trace.discovery_times)

    def test_second_discovery_at_one(self):
        """Тест T_2 = 1"""
        graph = build_lazy("infinite-lollipop", [10])
        trace = run_walk(WalkConfig(graph, seed=7, target_range=2))

        assert trace.discovery_time(1) == 0
        assert trace.discovery_time(2) == 1

    def test_inverse_relation(self):
        """Тест R_{T_n} = n и R_{T_n - 1} = n - 1"""
        trace = run_walk(WalkConfig(Ray(), seed=11, target_range=20))

        for n in range(2, 21):
            t = trace.discovery_time(n)
            assert trace.range_process[t] == n
            assert trace.range_process[t - 1] == n - 1

    def test_censoring(self):
        """Тест остановки по лимиту шагов"""
        trace = run_walk(WalkConfig(Ray(), seed=1, target_range=1000, step_cap=10))

        assert trace.truncated
        assert trace.final_time == 10

    def test_ring_buffer(self):
        """Тест хранения последних позиций"""
        trace = run_walk(WalkConfig(Line(), seed=5, horizon=50, ring_buffer=8))

        assert len(trace.positions) == 8

    def test_missing_discovery(self):
        """Тест запроса недостигнутого T_n"""
        trace = run_walk(WalkConfig(Ray(), seed=2, horizon=3))

        with pytest.raises(InsufficientTraceError):
            trace.discovery_time(10)

    def test_finite_graph_cover(self):
        """Тест покрытия конечного графа"""
        graph = build_finite("cycle", [6])
        trace = run_walk(WalkConfig(graph, seed=9, target_range=6))

        assert sorted(trace.discovery_vertices) == graph.vertices


    def test_walk_stops_at_window_edge(self):
        """Тест усечённого окна: касание края прерывает блуждание"""
        with pytest.raises(TruncationTooSmallError):
            run_walk(WalkConfig(truncate(Line(), 3), seed=1, horizon=500))

    def test_walk_inside_wide_window(self):
        """Тест окна, которое блуждание не может покинуть за горизонт"""
        trace = run_walk(WalkConfig(truncate(Line(), 20), seed=1, horizon=10))

        assert trace.final_time == 10
        assert trace.final_range <= 11
        assert not trace.truncated

    def test_small_neighbor_cache(self, monkeypatch):
        """Тест сброса кеша соседей: траектория не меняется"""
        cfg = WalkConfig(RegularTree(), seed=5, horizon=2000)
        full = run_walk(cfg)
        monkeypatch.setattr("rangelab.walks.NEIGHBOR_CACHE", 2)
        small = run_walk(cfg)

        assert small.discovery_vertices == full.discovery_vertices
        assert small.range_process == full.range_process


class TestPacking:
    """Тесты детерминированной границы упаковки"""

    def test_line_rhs(self):
        """Тест правой части на прямой: 2·8·(1 + 1/3 + 1/5 + 1/7)"""
        profile = build_profile(Line(), 8)
        trace = run_walk(WalkConfig(Line(), seed=13, target_range=8))
        check = packing_sum_check(trace, profile, 8)

        assert check.rhs == 16 * (1 + Fraction(1, 3) + Fraction(1, 5) + Fraction(1, 7))
        assert check.holds

    @pytest.mark.parametrize("n", [1, 3, 7, 16])
    def test_odd_and_even_n_on_ray(self, n):
        """Тест границы при нечётных и чётных n"""
        profile = build_profile(Ray(), n)
        for seed in range(20):
            trace = run_walk(WalkConfig(Ray(), seed=seed, target_range=n))
            assert packing_sum_check(trace, profile, n).holds

    def test_short_trace(self):
        """Тест траектории с недостаточным диапазоном"""
        profile = build_profile(Ray(), 4)
        trace = run_walk(WalkConfig(Ray(), seed=0, horizon=0))

        with pytest.raises(InsufficientTraceError):
            packing_sum_check(trace, profile, 4)

    def test_chain_sum_on_edge(self):
        """Тест цепной суммы на K_2: (2·0 + 1)·1"""
        trace = run_walk(WalkConfig(build_finite("clique", [2]), seed=0, target_range=2))

        assert chain_sum(trace, 2) == 1


class TestMonteCarlo:
    """Тесты повторов и оценок"""

    def test_replicate_seeds(self):
        """Тест детерминированных и различных зёрен повторов"""
        seeds = [replicate_seed(2024, r) for r in range(50)]

        assert seeds == [replicate_seed(2024, r) for r in range(50)]
        assert len(set(seeds)) == 50
        assert all(0 <= s < 2**64 for s in seeds)

    def test_thread_count_invariance(self):
        """Тест независимости результатов от числа рабочих процессов"""
        single = run_replicates(Line(), 40, 7, threads=1, target_range=12)
        pooled = run_replicates(Line(), 40, 7, threads=4, target_range=12)

        assert [t.discovery_times for t in single] == [t.discovery_times for t in pooled]

    def test_second_discovery_estimate(self):
        """Тест E[T_2] = 1 с нулевой дисперсией"""
        summary = estimate_ET(build_lazy("star-ray", [5]), 2, 100, 0)

        assert summary.mean == 1.0
        assert summary.stderr == 0.0
        assert not summary.censored

    def test_censored_estimate(self):
        """Тест отметки цензурированных повторов"""
        summary = estimate_ET(Ray(), 200, 10, 0, step_cap=50)

        assert summary.censored
        assert summary.censored_count == 10

    def test_single_replicate(self):
        """Тест одного повтора"""
        with pytest.raises(InvalidParameterError):
            MonteCarloSummary.from_values([1.0], [0])

    def test_range_curve_monotone(self):
        """Тест неубывания оценки E[R_t] по сетке"""
        curve = estimate_range_curve(Line(), [1, 10, 100], 50, 3)

        assert curve[0].mean == 2.0
        assert curve[0].mean <= curve[1].mean <= curve[2].mean

    def test_range_estimate_bounds(self):
        """Тест 1 <= R_t <= t + 1"""
        summary = estimate_ER(build_lazy("regular-tree"), 30, 50, 1)

        assert 1 <= min(summary.values)
        assert max(summary.values) <= 31

    @pytest.mark.parametrize(
        "family, params",
        [("path", [5]), ("cycle", [6]), ("clique", [4]), ("star", [4])],
    )
    def test_agrees_with_exact_chain(self, family, params):
        """Тест согласия Монте-Карло с точной цепью при n = |V|"""
        graph = build_finite(family, params)
        exact = discovery_time_exact(graph, graph.order)
        summary = estimate_ET(graph, graph.order, 2000, 12345)

        assert abs(summary.mean - exact) <= 4 * summary.stderr
