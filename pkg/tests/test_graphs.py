#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import pytest

from rangelab.graphs import (
    CATALOG,
    Line,
    MultiScaleLollipop,
    Ray,
    RegularTree,
    ball,
    build_finite,
    build_lazy,
    connected_graphs,
    distance_to_complement,
    from_descriptor,
    induced_edge_count,
    outer_boundary,
    symmetry_violations,
    truncate,
    unzigzag,
    zigzag,
)
from rangelab.models import (
    InvalidParameterError,
    InvalidVertexError,
    LollipopSpec,
    MultiScaleSpec,
    NoExitError,
    UnknownFamilyError,
)


class TestFiniteCatalog:
    """Тесты конечных семейств каталога"""

    def test_lollipop_edge_count(self):
        """Тест числа рёбер леденца L_10: C(5,2) + 4 + 1"""
        graph = build_finite("lollipop", [10])

        assert graph.order == 10
        assert graph.edge_count == 15
        assert graph.origin == 0

    def test_lollipop_spec_layout(self):
        """Тест разметки вершин леденца"""
        spec = LollipopSpec(7)

        assert spec.clique_order == 3
        assert spec.path_order == 4
        assert spec.attachment == 2
        assert spec.end == 6

    def test_box_graph(self):
        """Тест решётчатого бокса [2, 3]"""
        graph = build_finite("box", [2, 3])

        assert graph.order == 9
        assert graph.edge_count == 12

    def test_cycle_too_short(self):
        """Тест цикла из двух вершин"""
        with pytest.raises(InvalidParameterError):
            build_finite("cycle", [2])

    def test_unknown_family(self):
        """Тест неизвестного семейства"""
        with pytest.raises(UnknownFamilyError):
            build_finite("hypercube", [3])

    def test_wrong_param_count(self):
        """Тест неверного числа параметров"""
        with pytest.raises(InvalidParameterError):
            build_finite("clique", [3, 4])

    def test_neighbors_of_foreign_vertex(self):
        """Тест запроса соседей вершины вне графа"""
        graph = build_finite("path", [3])

        with pytest.raises(InvalidVertexError):
            graph.neighbors(7)

    def test_connected_graph_counts(self):
        """Тест числа помеченных связных графов: 1 + 4 + 38"""
        graphs = list(connected_graphs(4))

        assert len(graphs) == 43
        assert all(g.name == "all-connected" for g in graphs)


class TestLazyFamilies:
    """Тесты ленивых бесконечных семейств"""

    def test_ray_neighbors(self):
        """Тест соседей луча"""
        ray = Ray()

        assert ray.neighbors(0) == (1,)
        assert ray.neighbors(3) == (2, 4)

    def test_zigzag_roundtrip(self):
        """Тест кодирования целых чисел на прямой"""
        assert [zigzag(z) for z in (0, -1, 1, -2, 2)] == [0, 1, 2, 3, 4]
        assert unzigzag(zigzag(-17)) == -17

    def test_line_neighbors(self):
        """Тест соседей прямой"""
        assert Line().neighbors(0) == (1, 2)

    def test_ball_sizes(self):
        """Тест объёмов шаров"""
        assert len(ball(Ray(), 0, 3)) == 4
        assert len(ball(Line(), 0, 3)) == 7
        assert len(ball(build_lazy("lattice", [2]), 0, 1)) == 5
        assert len(ball(RegularTree(), 0, 2)) == 10

    def test_tree_parent_children(self):
        """Тест нумерации дерева в ширину"""
        tree = RegularTree(3)

        assert tree.neighbors(0) == (1, 2, 3)
        assert tree.children(1) == (4, 5)
        assert tree.parent(5) == 1
        assert tree.parent(6) == 2

    def test_tree_degree_too_small(self):
        """Тест дерева степени 2"""
        with pytest.raises(InvalidParameterError):
            RegularTree(2)

    def test_infinite_lollipop(self):
        """Тест бесконечного леденца G_10"""
        graph = build_lazy("infinite-lollipop", [10])

        assert graph.neighbors(4) == (0, 1, 2, 3, 5)
        assert graph.neighbors(5) == (4, 6)
        assert graph.max_degree == 5

    def test_star_ray(self):
        """Тест звезды с лучом"""
        graph = build_lazy("star-ray", [3])

        assert graph.neighbors(0) == (1, 2, 3)
        assert graph.neighbors(1) == (0,)
        assert graph.neighbors(3) == (0, 4)

    def test_multiscale_bridge(self):
        """Тест ребра между блоками многомасштабного леденца"""
        graph = from_descriptor({"family": "dyadic"})
        end_of_first = graph.block_end(0)
        second_origin = graph.block_origin(1)

        assert isinstance(graph, MultiScaleLollipop)
        assert second_origin in graph.neighbors(end_of_first)
        assert end_of_first in graph.neighbors(second_origin)

    def test_multiscale_scales_extend(self):
        """Тест удвоения масштабов после явного списка"""
        spec = MultiScaleSpec((2, 4))

        assert spec.scale(3) == 16
        assert MultiScaleSpec.dyadic().block_boundaries(3) == [2, 6, 14]

    def test_multiscale_scales_must_grow(self):
        """Тест невозрастающих масштабов"""
        with pytest.raises(InvalidParameterError):
            MultiScaleSpec((4, 2))

    @pytest.mark.parametrize(
        "descriptor",
        [
            {"family": "ray"},
            {"family": "line"},
            {"family": "lattice", "params": [2]},
            {"family": "regular-tree", "params": [4]},
            {"family": "infinite-lollipop", "params": [11]},
            {"family": "star-ray", "params": [5]},
            {"family": "multiscale-lollipop", "scales": [3, 5, 9]},
        ],
    )
    def test_symmetric_adjacency(self, descriptor):
        """Тест симметричности оракула соседей"""
        assert symmetry_violations(from_descriptor(descriptor), 12) == []

    def test_descriptor_unknown_family(self):
        """Тест описания с неизвестным семейством"""
        with pytest.raises(UnknownFamilyError):
            from_descriptor({"family": "moebius"})

    def test_catalog_listing(self):
        """Тест записей каталога"""
        assert CATALOG["ray"].g_form == "g(r)=r+1"
        assert "see docs" in CATALOG["multiscale-lollipop"].g_form
        assert "infinite-lollipop" in CATALOG


class TestSetOperations:
    """Тесты шаров, усечений и расстояний до дополнения"""

    def test_distance_to_complement_on_ray(self):
        """Тест dist(0, S^c) для S = {0..3} на луче"""
        assert distance_to_complement(Ray(), {0, 1, 2, 3}, 0) == 4
        assert distance_to_complement(Ray(), {0, 1, 2, 3}, 9) == 0

    def test_no_exit(self):
        """Тест множества, совпадающего со всем графом"""
        graph = build_finite("path", [4])

        with pytest.raises(NoExitError):
            distance_to_complement(graph, set(graph.vertices), 0)

    def test_boundary_and_edges(self):
        """Тест границы и внутренних рёбер отрезка прямой"""
        inside = ball(Line(), 0, 2)

        assert len(outer_boundary(Line(), inside)) == 2
        assert induced_edge_count(Line(), inside) == 4

    def test_truncation_keeps_degrees(self):
        """Тест усечения прямой: краевые вершины сохраняют степень 2"""
        graph = truncate(Line(), 3)
        edge = zigzag(3)

        assert graph.order == 7
        assert graph.truncation_radius == 3
        assert graph.degree(edge) == 1
        assert graph.walk_degree(edge) == 2

    def test_truncation_boundary(self):
        """Тест края окна: вершины, часть рёбер которых ведёт наружу"""
        graph = truncate(Line(), 3)

        assert graph.boundary == {zigzag(3), zigzag(-3)}
        assert build_finite("path", [4]).boundary == frozenset()

    def test_standalone_window(self):
        """Тест окна как самостоятельного графа: степени индуцированные"""
        window = truncate(Ray(), 3)
        own = window.standalone()

        assert own.truncation_radius is None
        assert own.boundary == frozenset()
        assert own.walk_degree(3) == 1
        assert own.edges == window.edges

    def test_distance_through_window_edge(self):
        """Тест выхода через край окна: dist(0, S^c) = 4 для всего окна луча"""
        window = truncate(Ray(), 3)

        assert distance_to_complement(window, set(window.vertices), 0) == 4
