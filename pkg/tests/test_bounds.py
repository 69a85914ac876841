#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import math

import pytest

from rangelab.bounds import (
    LOWER,
    UPPER,
    cubic_stress,
    geometric_grid,
    judge,
    oscillation_profile,
    sharpness_fit,
    thm_main_rhs,
    universal_R_level,
    universal_T_rhs,
    verify_bound,
    verify_neighbor_sweep,
    verify_suite,
)
from rangelab.geometry import build_profile
from rangelab.graphs import (
    Line,
    Ray,
    RegularTree,
    build_finite,
    build_lazy,
    from_descriptor,
)
from rangelab.models import (
    BoundId,
    FlaggedProfileError,
    InvalidParameterError,
    Verdict,
)


class TestVerdicts:
    """Тесты правила вердикта по 99% интервалу"""

    def test_exact_upper(self):
        """Тест точной верхней границы, включая равенство"""
        assert judge(3.0, 0.0, 3.0, UPPER) == Verdict.HOLDS
        assert judge(3.5, 0.0, 3.0, UPPER) == Verdict.VIOLATED

    def test_monte_carlo_upper(self):
        """Тест интервала, пересекающего границу"""
        assert judge(10.0, 1.0, 20.0, UPPER) == Verdict.HOLDS
        assert judge(10.0, 1.0, 11.0, UPPER) == Verdict.INCONCLUSIVE
        assert judge(10.0, 1.0, 5.0, UPPER) == Verdict.VIOLATED

    def test_monte_carlo_lower(self):
        """Тест нижней границы"""
        assert judge(10.0, 1.0, 5.0, LOWER) == Verdict.HOLDS
        assert judge(10.0, 1.0, 9.0, LOWER) == Verdict.INCONCLUSIVE
        assert judge(10.0, 1.0, 20.0, LOWER) == Verdict.VIOLATED


class TestRightHandSides:
    """Тесты правых частей неравенств"""

    def test_thm_main_on_ray(self):
        """Тест 4·2·f(2)·(1 + 1/2) = 12 на луче"""
        assert thm_main_rhs(build_profile(Ray(), 2), 2) == 12

    def test_thm_main_missing_f(self):
        """Тест отсутствующего f(n)"""
        with pytest.raises(InvalidParameterError):
            thm_main_rhs(build_profile(Ray(), 2), 5)

    def test_thm_main_rejects_upper_bound_f(self):
        """Тест f(n), известного лишь сверху (Z^3): правая часть не строится"""
        profile = build_profile(build_lazy("lattice", [3]), 4)

        assert profile.f[4].flagged
        with pytest.raises(FlaggedProfileError):
            thm_main_rhs(profile, 4)

    @pytest.mark.parametrize(
        "descriptor",
        [
            {"family": "ray"},
            {"family": "line"},
            {"family": "infinite-lollipop", "params": [10]},
            {"family": "dyadic"},
            {"family": "lattice", "params": [2]},
        ],
    )
    def test_main_below_universal(self, descriptor):
        """Тест: правая часть основной оценки не больше 4n^3 ln n при n >= 3"""
        profile = build_profile(from_descriptor(descriptor), 8)

        for n in range(3, 9):
            assert float(thm_main_rhs(profile, n)) <= universal_T_rhs(n)

    def test_universal_small_n(self):
        """Тест точных значений при n = 1, 2"""
        assert universal_T_rhs(1) == 0
        assert universal_T_rhs(2) == 1

    def test_universal_cubic(self):
        """Тест 4n^3 ln n при n = 3"""
        assert universal_T_rhs(3) == pytest.approx(108 * math.log(3))

    def test_universal_invalid(self):
        """Тест n = 0"""
        with pytest.raises(InvalidParameterError):
            universal_T_rhs(0)

    def test_universal_range_level(self):
        """Тест уровня n для t = 1000"""
        n = universal_R_level(1000)

        assert n == 3
        assert 4 * n**3 * math.log(n) <= 1001 / 2

    def test_universal_range_level_small_t(self):
        """Тест t < 2"""
        with pytest.raises(InvalidParameterError):
            universal_R_level(1)


class TestExactBounds:
    """Тесты точных проверок лемм"""

    def test_neighbor_on_lollipop(self):
        """Тест леммы о соседях на леденце"""
        report = verify_bound(BoundId.LEM_NEIGHBOR, build_finite("lollipop", [10]), {})

        assert report.verdict == Verdict.HOLDS
        assert report.rhs == 29

    def test_neighbor_on_truncation(self):
        """Тест леммы о соседях на усечении бесконечного графа"""
        report = verify_bound("lem-neighbor", RegularTree(), {"radius": 3})

        assert report.verdict == Verdict.HOLDS

    def test_neighbor_sweep(self):
        """Тест перебора всех связных графов до 4 вершин"""
        reports = verify_neighbor_sweep(4)

        assert [r.params["graphs"] for r in reports] == [1, 4, 38]
        assert all(r.verdict == Verdict.HOLDS for r in reports)
        assert reports[0].lhs == pytest.approx(1.0)

    def test_escape_explicit(self):
        """Тест леммы о выходе для S = {0..3} на луче"""
        params = {"inside": [0, 1, 2, 3], "x": 0}
        report = verify_bound(BoundId.LEM_ESCAPE, Ray(), params)

        assert report.lhs == pytest.approx(16.0)
        assert report.rhs == 28
        assert report.verdict == Verdict.HOLDS

    @pytest.mark.parametrize(
        "descriptor",
        [
            {"family": "line"},
            {"family": "regular-tree"},
            {"family": "infinite-lollipop", "params": [10]},
            {"family": "dyadic"},
            {"family": "cycle", "params": [6]},
        ],
    )
    def test_escape_sampled(self, descriptor):
        """Тест леммы о выходе на случайных множествах"""
        report = verify_bound(
            BoundId.LEM_ESCAPE, from_descriptor(descriptor), {"samples": 30}, 5
        )

        assert report.verdict == Verdict.HOLDS
        assert report.lhs <= 1.0 + 1e-9

    def test_return_single_point(self):
        """Тест оценки возвращения в одной точке"""
        report = verify_bound(BoundId.EQ_RETURN, Line(), {"x": 0, "t": 4})

        assert report.lhs == pytest.approx(0.375)
        assert report.rhs == pytest.approx(8 / math.sqrt(5))
        assert report.verdict == Verdict.HOLDS

    def test_return_sweep_on_tree(self):
        """Тест оценки возвращения по ядру дерева"""
        params = {"t_max": 50, "core_radius": 3}
        report = verify_bound(BoundId.EQ_RETURN, RegularTree(), params)

        assert report.verdict == Verdict.HOLDS

    def test_localtime_exact_range(self):
        """Тест оценки через локальное время с точным E[R_t]"""
        report = verify_bound(BoundId.PROP_LOCALTIME, Ray(), {"t": 10})

        assert report.lhs_source == "exact"
        assert report.verdict == Verdict.HOLDS
        assert report.params["ell_star_scope"] == "core-radius-5"
        assert "оценка снизу" in report.notes

    def test_localtime_scope_on_finite_graph(self):
        """Тест ℓ* по всем вершинам конечного графа"""
        params = {"t": 4, "core_radius": 5}
        report = verify_bound(BoundId.PROP_LOCALTIME, build_finite("path", [5]), params)

        assert report.params["ell_star_scope"] == "all-vertices"
        assert report.verdict == Verdict.HOLDS

    def test_localtime_scope_on_line(self):
        """Тест ℓ* на вершинно-транзитивной прямой"""
        report = verify_bound(BoundId.PROP_LOCALTIME, Line(), {"t": 6})

        assert report.params["ell_star_scope"] == "vertex-transitive"


class TestMonteCarloBounds:
    """Тесты проверок с оценкой методом Монте-Карло"""

    def test_packing_on_line(self):
        """Тест границы упаковки на всех траекториях"""
        params = {"n": 16, "replicates": 50}
        report = verify_bound(BoundId.LEM_PACKING, Line(), params, 3)

        assert report.verdict == Verdict.HOLDS
        assert report.replicates == 50

    def test_main_theorem_on_ray(self):
        """Тест E[T_4] = 9 против правой части 100 на луче"""
        report = verify_bound(BoundId.THM_MAIN, Ray(), {"n": 4, "replicates": 200}, 1)

        assert report.rhs == pytest.approx(100.0)
        assert report.lhs == pytest.approx(9.0, rel=0.25)
        assert report.verdict == Verdict.HOLDS

    def test_universal_T_second_discovery(self):
        """Тест T_2 = 1 с нулевой дисперсией"""
        report = verify_bound(
            BoundId.COR_UNIVERSAL_T,
            from_descriptor({"family": "dyadic"}),
            {"n": 2, "replicates": 50},
        )

        assert report.lhs == 1.0
        assert report.lhs_err == 0.0
        assert report.verdict == Verdict.HOLDS

    def test_universal_range(self):
        """Тест универсальной нижней оценки диапазона на прямой"""
        params = {"t": 1000, "replicates": 100}
        report = verify_bound(BoundId.COR_UNIVERSAL_R, Line(), params, 2)

        assert report.params["n"] == 3
        assert report.verdict == Verdict.HOLDS

    def test_diffusive_range(self):
        """Тест диффузионной оценки √(t+1)/(8Δ)"""
        params = {"t": 100, "replicates": 50}
        report = verify_bound(BoundId.DIFFUSIVE_RANGE, Line(), params)

        assert report.rhs == pytest.approx(math.sqrt(101) / 16)
        assert report.verdict == Verdict.HOLDS

    def test_linear_range_grade(self):
        """Тест линейной оценки на дереве и градации вердикта"""
        tree = RegularTree()
        inside = verify_bound(
            BoundId.LINEAR_RANGE, tree, {"t": 100, "t_max": 1000, "replicates": 100}
        )
        beyond = verify_bound(
            BoundId.LINEAR_RANGE, tree, {"t": 2000, "t_max": 1000, "replicates": 20}
        )

        assert inside.grade == "verdict"
        assert not inside.violated
        assert beyond.grade == "asymptotic-indicative"
        assert not beyond.violated

    def test_discovery_chain(self):
        """Тест цепной оценки E[T_n] сверху"""
        graph = from_descriptor({"family": "infinite-lollipop", "params": [10]})
        params = {"n": 8, "replicates": 200}
        report = verify_bound(BoundId.DISCOVERY_CHAIN, graph, params)

        assert not report.violated
        assert report.rhs >= report.lhs


class TestFits:
    """Тесты подгонки показателя и осцилляций"""

    def test_line_exponent(self):
        """Тест показателя около 2 на прямой: E[T_n] = n(n-1)/2"""
        fit = sharpness_fit(Line(), [4, 8, 16], 100, 0)

        assert 1.8 <= fit.exponent <= 2.4
        assert fit.n_grid == (4, 8, 16)

    def test_too_few_replicates(self):
        """Тест подгонки с недостаточным числом повторов"""
        with pytest.raises(InvalidParameterError):
            sharpness_fit(Line(), [4, 8], 50)

    def test_geometric_grid(self):
        """Тест геометрической сетки"""
        assert geometric_grid(10, 1000, 3) == [10, 100, 1000]

    def test_oscillation_shape(self):
        """Тест структуры профиля наклонов на прямой"""
        grid = geometric_grid(10, 1000, 7)
        profile = oscillation_profile(Line(), grid, 100, window=3, master_seed=4)

        assert len(profile.slopes) == len(grid) - 2
        assert all(0.2 < s < 0.8 for s in profile.slopes)
        assert profile.alpha_hat <= profile.beta_hat

    def test_oscillation_rejects_irregular_grid(self):
        """Тест негеометрической сетки"""
        with pytest.raises(InvalidParameterError):
            oscillation_profile(Line(), [1, 2, 100], 10)

    def test_oscillation_window(self):
        """Тест окна из двух точек"""
        with pytest.raises(InvalidParameterError):
            oscillation_profile(Line(), [10, 100, 1000], 10, window=2)

    def test_cubic_stress(self):
        """Тест таблицы E[T_n]/n^3"""
        result = cubic_stress([Line()], [4, 8], 20)

        assert len(result["rows"]) == 2
        assert result["max_ratio"] < 1


class TestSuite:
    """Тесты набора проверок"""

    def test_budget_exhausted(self):
        """Тест нулевого бюджета"""
        entries = [(BoundId.EQ_RETURN, Line(), {"x": 0, "t": 2})]
        reports, exhausted = verify_suite(entries, budget=0)

        assert exhausted
        assert reports == []

    def test_sweep_entry(self):
        """Тест записи перебора без графа"""
        entries = [(BoundId.LEM_NEIGHBOR, None, {"max_order": 3})]
        reports, exhausted = verify_suite(entries)

        assert not exhausted
        assert len(reports) == 2


@pytest.mark.slow
class TestAcceptance:
    """Проверки масштаба приёмки"""

    def test_neighbor_all_six(self):
        """Тест леммы о соседях на всех связных графах до 6 вершин"""
        assert not any(r.violated for r in verify_neighbor_sweep(6))

    @pytest.mark.parametrize(
        "descriptor",
        [
            {"family": "ray"},
            {"family": "line"},
            {"family": "infinite-lollipop", "params": [10]},
            {"family": "infinite-lollipop", "params": [20]},
            {"family": "infinite-lollipop", "params": [40]},
            {"family": "dyadic"},
        ],
    )
    def test_main_theorem_sweep(self, descriptor):
        """Тест основной оценки при n = 4..32"""
        graph = from_descriptor(descriptor)
        for n in (4, 8, 16, 32):
            report = verify_bound(BoundId.THM_MAIN, graph, {"n": n, "replicates": 1000})
            assert report.verdict == Verdict.HOLDS

    def test_star_ray_weak_estimate(self):
        """Тест слабой оценки на звезде с лучом: правая часть < 3"""
        graph = from_descriptor({"family": "star-ray", "params": [100]})
        params = {"t": 1000, "replicates": 200}
        report = verify_bound(BoundId.PROP_LOCALTIME, graph, params)

        assert report.rhs < 3
        assert not report.violated

    def test_tree_linear_range(self):
        """Тест E[R_t]/t >= 0.25 на дереве"""
        tree = RegularTree()
        for t in (100, 1000, 10000):
            params = {"t": t, "replicates": 100}
            report = verify_bound(BoundId.LINEAR_RANGE, tree, params)
            assert report.lhs / t >= 0.25

    def test_dyadic_sharpness(self):
        """Тест показателя в [2.7, 3.3] на многомасштабном леденце"""
        graph = from_descriptor({"family": "dyadic"})
        fit = sharpness_fit(graph, [8, 16, 32, 64, 128], 100)

        assert 2.7 <= fit.exponent <= 3.3
