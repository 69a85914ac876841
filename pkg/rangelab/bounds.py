#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Подстановка и проверка неравенств о диапазоне блуждания: точные стороны
сравниваются напрямую, оценённые методом Монте-Карло - через 99%
доверительный интервал с удвоением числа повторов при неопределённости.
"""

import logging
import math
import time
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from rangelab.geometry import build_profile, harmonic_sum, volume_growth_g
from rangelab.graphs import (
    FiniteGraph,
    GraphHandle,
    Lattice,
    Line,
    MultiScaleLollipop,
    RegularTree,
    connected_graphs,
    distances,
    truncate,
)
from rangelab.markov import (
    BOUND_TOL,
    distribution_series,
    escape_time,
    expected_range_exact,
    local_times,
    max_neighbor_hitting,
)
from rangelab.models import (
    BoundId,
    BoundReport,
    BudgetExceededError,
    CoarseProfile,
    FlaggedProfileError,
    InvalidParameterError,
    MonteCarloSummary,
    OscillationProfile,
    SharpnessFit,
    Verdict,
)
from rangelab.walks import (
    chain_sum,
    default_step_cap,
    estimate_ER,
    estimate_ET,
    estimate_range_curve,
    make_generator,
    packing_sum_check,
    run_replicates,
)

VERDICT_LEVEL = 0.99
MAX_DOUBLINGS = 3
UNIVERSAL_R_CONSTANT = 3
LINEAR_RANGE_T_MAX = 10**4
EXACT_RANGE_LIMIT = 30  # точное E[R_t] по цепи множеств только при малых t
SLOPE_TOLERANCE = 0.05
UPPER, LOWER = "upper", "lower"


# ============ ВЕРДИКТЫ ============
def _z(level: float = VERDICT_LEVEL) -> float:
    return float(stats.norm.ppf(0.5 + level / 2))


def judge(lhs: float, lhs_err: float, rhs: float, direction: str) -> Verdict:
    """
    UPPER: проверяется lhs <= rhs, LOWER: lhs >= rhs. Нарушение - только
    если весь 99% интервал лежит по неверную сторону от границы
    """
    if lhs_err == 0:
        lo = hi = lhs
        slack = BOUND_TOL * max(1.0, abs(rhs))
    else:
        lo, hi = lhs - _z() * lhs_err, lhs + _z() * lhs_err
        slack = 0.0
    if direction == UPPER:
        if hi <= rhs + slack:
            return Verdict.HOLDS
        if lo > rhs + slack:
            return Verdict.VIOLATED
    else:
        if lo >= rhs - slack:
            return Verdict.HOLDS
        if hi < rhs - slack:
            return Verdict.VIOLATED
    return Verdict.INCONCLUSIVE


def _estimate_decided(
    estimator: Callable[[int], MonteCarloSummary],
    replicates: int,
    rhs: float,
    direction: str,
) -> Tuple[MonteCarloSummary, Verdict]:
    """Удваивает число повторов, пока вердикт не определится или не кончится бюджет"""
    summary = estimator(replicates)
    verdict = judge(summary.mean, summary.stderr, rhs, direction)
    doublings = 0
    while verdict == Verdict.INCONCLUSIVE and doublings < MAX_DOUBLINGS:
        replicates *= 2
        doublings += 1
        logging.info(f"Вердикт не определён, удваиваем повторы до {replicates}")
        summary = estimator(replicates)
        verdict = judge(summary.mean, summary.stderr, rhs, direction)
    if summary.censored and verdict == Verdict.VIOLATED and direction == LOWER:
        # цензурированное среднее - нижняя граница, нарушение не доказано
        verdict = Verdict.INCONCLUSIVE
    return summary, verdict


def _report(
    bound_id: BoundId, graph: GraphHandle, params: Dict[str, Any], **fields
) -> BoundReport:
    merged = {"graph_params": list(graph.params), **params}
    report = BoundReport(bound_id=bound_id, family=graph.name, params=merged, **fields)
    log = logging.error if report.violated else logging.info
    log(
        f"{bound_id} на {graph.name}: lhs={report.lhs:.6g} "
        f"rhs={report.rhs:.6g} -> {report.verdict}"
    )
    return report


# ============ ПРАВЫЕ ЧАСТИ ============
def thm_main_rhs(profile: CoarseProfile, n: int) -> Fraction:
    """
    4·n·f(n)·Σ_{r<n} 1/g(r); помеченные значения f и g недопустимы
    """
    if n not in profile.f:
        raise InvalidParameterError(n, f"Нет значения f({n}) в профиле")
    if profile.f[n].flagged:
        raise FlaggedProfileError(n, f"f({n}) - лишь оценка сверху {profile.f[n].value}")
    return 4 * n * profile.f[n].value * harmonic_sum(profile, n)


def universal_T_rhs(n: int) -> float:
    """
    4n^3 ln n при n >= 3; при n = 1, 2 - точные T_1 = 0 и T_2 = 1
    """
    if n < 1:
        raise InvalidParameterError(n, "n должно быть >= 1")
    if n <= 2:
        return float(n - 1)
    return 4 * n**3 * math.log(n)


def universal_R_level(t: int) -> int:
    """
    n = ⌊(t / (3 ln t))^{1/3}⌋. При таком n: n^3 <= t/(3 ln t) и
    ln n <= (ln t)/3, поэтому 4n^3 ln n <= 4t/9 < (t+1)/2 и по неравенству
    Маркова P(R_t < n) = P(T_n >= t+1) <= 1/2
    """
    if t < 2:
        raise InvalidParameterError(t, "Нужно t >= 2")
    n = int((t / (UNIVERSAL_R_CONSTANT * math.log(t))) ** (1 / 3))
    # защита от ошибки округления вещественного корня
    while (n + 1) ** 3 * UNIVERSAL_R_CONSTANT * math.log(t) <= t:
        n += 1
    while n > 0 and n**3 * UNIVERSAL_R_CONSTANT * math.log(t) > t:
        n -= 1
    return n


def universal_R_check(
    graph: GraphHandle,
    t: int,
    replicates: int,
    master_seed: int = 0,
    threads: int = 1,
    step_cap: Optional[int] = None,
) -> BoundReport:
    """
    Эмпирическая проверка P(R_t < n) <= 1/2 и E[R_t] >= n/2
    для n из доказательства универсальной оценки диапазона
    """
    n = universal_R_level(t)
    params = {"t": t, "n": n, "replicates": replicates}
    if n <= 1:
        return _report(
            BoundId.COR_UNIVERSAL_R,
            graph,
            params,
            lhs=1.0,
            lhs_err=0.0,
            rhs=n / 2,
            verdict=Verdict.HOLDS,
            notes="R_t >= 1 тривиально",
        )

    traces = run_replicates(
        graph,
        replicates,
        master_seed,
        threads,
        horizon=t,
        step_cap=step_cap or default_step_cap(),
        record_range=False,
        record_distances=False,
    )
    ranges = np.array([tr.final_range for tr in traces], dtype=float)
    mean = float(ranges.mean())
    mean_err = float(ranges.std(ddof=1) / math.sqrt(len(ranges)))
    below = float(np.mean(ranges < n))
    below_err = math.sqrt(max(below * (1 - below), 1e-12) / len(ranges))

    verdicts = {
        judge(mean, mean_err, n / 2, LOWER),
        judge(below, below_err, 0.5, UPPER),
    }
    if Verdict.VIOLATED in verdicts:
        verdict = Verdict.VIOLATED
    elif verdicts == {Verdict.HOLDS}:
        verdict = Verdict.HOLDS
    else:
        verdict = Verdict.INCONCLUSIVE
    return _report(
        BoundId.COR_UNIVERSAL_R,
        graph,
        params,
        lhs=mean,
        lhs_err=mean_err,
        rhs=n / 2,
        verdict=verdict,
        seed=master_seed,
        replicates=replicates,
        lhs_source="monte-carlo",
        notes=f"P(R_t<n)={below:.4g}±{below_err:.2g}",
    )


# ============ ОТДЕЛЬНЫЕ ПРОВЕРКИ ============
def _growth_profile(graph: GraphHandle, r_max: int) -> CoarseProfile:
    profile = CoarseProfile(family=graph.name)
    for r in range(r_max + 1):
        profile.g[r] = volume_growth_g(graph, r)
    return profile


def sample_escape_instances(
    graph: GraphHandle, count: int, seed: int, max_size: int = 8
) -> List[Tuple[frozenset, int]]:
    """
    Случайные пары (S, x): S растёт от случайной вершины через соседей,
    иногда с добавлением далёкой вершины (несвязные S тоже допустимы)
    """
    rng = make_generator(seed)
    if isinstance(graph, FiniteGraph):
        pool = graph.vertices
        max_size = min(max_size, graph.order - 1)
    else:
        pool = sorted(distances(graph, graph.origin, 10))
    if max_size < 1:
        raise InvalidParameterError(max_size, "Граф слишком мал для выборки S")

    instances = []
    while len(instances) < count:
        size = int(rng.integers(1, max_size + 1))
        inside = {pool[int(rng.integers(len(pool)))]}
        while len(inside) < size:
            if rng.random() < 0.2:
                inside.add(pool[int(rng.integers(len(pool)))])
                continue
            anchor = sorted(inside)[int(rng.integers(len(inside)))]
            nbrs = graph.neighbors(anchor)
            inside.add(nbrs[int(rng.integers(len(nbrs)))])
        members = sorted(inside)
        x = members[int(rng.integers(len(members)))]
        instances.append((frozenset(inside), x))
    return instances


def _verify_neighbor(graph: GraphHandle, params: Dict[str, Any]) -> BoundReport:
    if not isinstance(graph, FiniteGraph):
        graph = truncate(graph, int(params.get("radius", 6))).standalone()
    result = max_neighbor_hitting(graph)
    return _report(
        BoundId.LEM_NEIGHBOR,
        graph,
        {**params, "edge": list(result.edge)},
        lhs=result.value,
        lhs_err=0.0,
        rhs=float(result.bound),
        verdict=judge(result.value, 0.0, result.bound, UPPER),
    )


def verify_neighbor_sweep(max_order: int = 6) -> List[BoundReport]:
    """
    Лемма о соседях на всех помеченных связных графах порядка <= max_order;
    по одному отчёту на порядок, lhs - худшее отношение E_x[τ_y]/(2|F|-1)
    """
    worst: Dict[int, Tuple[float, int]] = {}
    counts: Dict[int, int] = {}
    for graph in connected_graphs(max_order):
        order, mask = graph.params
        result = max_neighbor_hitting(graph)
        ratio = result.value / result.bound
        counts[order] = counts.get(order, 0) + 1
        if order not in worst or ratio > worst[order][0]:
            worst[order] = (ratio, mask)

    reports = []
    for order in sorted(worst):
        ratio, mask = worst[order]
        reports.append(
            BoundReport(
                bound_id=BoundId.LEM_NEIGHBOR,
                family="all-connected",
                params={"order": order, "graphs": counts[order], "worst_mask": mask},
                lhs=ratio,
                lhs_err=0.0,
                rhs=1.0,
                verdict=judge(ratio, 0.0, 1.0, UPPER),
            )
        )
        logging.info(
            f"Лемма о соседях, порядок {order}: {counts[order]} графов, худшее {ratio:.6g}"
        )
    return reports


def _verify_escape(graph: GraphHandle, params: Dict[str, Any], seed: int) -> BoundReport:
    if "inside" in params:
        result = escape_time(graph, params["inside"], params["x"])
        return _report(
            BoundId.LEM_ESCAPE,
            graph,
            {**params, "inside": sorted(params["inside"])},
            lhs=result.value,
            lhs_err=0.0,
            rhs=float(result.bound),
            verdict=judge(result.value, 0.0, result.bound, UPPER),
        )

    samples = int(params.get("samples", 100))
    max_size = int(params.get("max_size", 8))
    worst, worst_case = 0.0, None
    for inside, x in sample_escape_instances(graph, samples, seed, max_size):
        result = escape_time(graph, inside, x)
        ratio = result.value / result.bound
        if ratio > worst:
            worst, worst_case = ratio, (sorted(inside), x)
    return _report(
        BoundId.LEM_ESCAPE,
        graph,
        {**params, "samples": samples},
        lhs=worst,
        lhs_err=0.0,
        rhs=1.0,
        verdict=judge(worst, 0.0, 1.0, UPPER),
        seed=seed,
        notes=f"худший случай {worst_case}",
    )


def _verify_packing(
    graph: GraphHandle, params: Dict[str, Any], seed: int, threads: int, step_cap: int
) -> BoundReport:
    n = int(params["n"])
    replicates = int(params.get("replicates", 100))
    profile = _growth_profile(graph, max(math.ceil(n / 2) - 1, 0))
    traces = run_replicates(
        graph,
        replicates,
        seed,
        threads,
        target_range=n,
        step_cap=step_cap,
        record_range=False,
    )
    checks = [packing_sum_check(tr, profile, n) for tr in traces if not tr.truncated]
    if not checks:
        raise BudgetExceededError(step_cap, "Все повторы цензурированы")
    worst = max(c.lhs for c in checks)
    rhs = checks[0].rhs
    failures = sum(1 for c in checks if not c.holds)
    return _report(
        BoundId.LEM_PACKING,
        graph,
        {"n": n, "replicates": replicates},
        lhs=float(worst),
        lhs_err=0.0,
        rhs=float(rhs),
        verdict=Verdict.VIOLATED if failures else Verdict.HOLDS,
        seed=seed,
        replicates=len(checks),
        lhs_source="monte-carlo",
        notes=f"нарушений: {failures}",
    )


def _verify_discovery_time(
    bound_id: BoundId,
    graph: GraphHandle,
    params: Dict[str, Any],
    seed: int,
    threads: int,
    step_cap: int,
) -> BoundReport:
    n = int(params["n"])
    replicates = int(params.get("replicates", 1000))
    if bound_id == BoundId.THM_MAIN:
        profile = build_profile(graph, n)
        rhs = float(thm_main_rhs(profile, n))
    else:
        rhs = universal_T_rhs(n)
    summary, verdict = _estimate_decided(
        lambda reps: estimate_ET(graph, n, reps, seed, step_cap, threads),
        replicates,
        rhs,
        UPPER,
    )
    return _report(
        bound_id,
        graph,
        {"n": n, "replicates": replicates},
        lhs=summary.mean,
        lhs_err=summary.stderr,
        rhs=rhs,
        verdict=verdict,
        seed=seed,
        replicates=summary.replicates,
        lhs_source="monte-carlo",
    )


def _core(graph: GraphHandle, params: Dict[str, Any]) -> List[int]:
    radius = int(params.get("core_radius", 5))
    return sorted(distances(graph, graph.origin, radius))


def _ell_star_scope(graph: GraphHandle, core: List[int], params: Dict[str, Any]) -> str:
    """
    Откуда взят ℓ*: на вершинно-транзитивных графах и при ядре, покрывающем
    конечный граф, это точный супремум; иначе максимум по ядру, оценка снизу
    """
    if isinstance(graph, (RegularTree, Line, Lattice)):
        return "vertex-transitive"
    if isinstance(graph, FiniteGraph) and len(core) == graph.order:
        return "all-vertices"
    return f"core-radius-{int(params.get('core_radius', 5))}"


def _verify_localtime(
    graph: GraphHandle, params: Dict[str, Any], seed: int, threads: int, step_cap: int
) -> BoundReport:
    t = int(params["t"])
    replicates = int(params.get("replicates", 500))
    core = _core(graph, params)
    scope = _ell_star_scope(graph, core, params)
    table = local_times(graph, t, core)
    rhs = (t + 1) / table.ell_star
    notes = f"ℓ*={table.ell_star:.6g} в вершине {table.argmax}"
    rigorous = not scope.startswith("core-radius")
    if not rigorous:
        notes += "; ℓ* по ядру - оценка снизу, правая часть может быть завышена"

    def settle(verdict: Verdict) -> Verdict:
        # нарушение завышенной правой части ничего не доказывает
        if verdict == Verdict.VIOLATED and not rigorous:
            return Verdict.INCONCLUSIVE
        return verdict

    if t <= EXACT_RANGE_LIMIT:
        try:
            exact = expected_range_exact(graph, t)
            return _report(
                BoundId.PROP_LOCALTIME,
                graph,
                {"t": t, "ell_star_scope": scope},
                lhs=exact,
                lhs_err=0.0,
                rhs=rhs,
                verdict=settle(judge(exact, 0.0, rhs, LOWER)),
                notes=notes,
            )
        except InvalidParameterError:
            logging.info(f"Точное E[R_{t}] недоступно, переходим к Монте-Карло")

    summary, verdict = _estimate_decided(
        lambda reps: estimate_ER(graph, t, reps, seed, step_cap, threads),
        replicates,
        rhs,
        LOWER,
    )
    return _report(
        BoundId.PROP_LOCALTIME,
        graph,
        {"t": t, "replicates": replicates, "ell_star_scope": scope},
        lhs=summary.mean,
        lhs_err=summary.stderr,
        rhs=rhs,
        verdict=settle(verdict),
        seed=seed,
        replicates=summary.replicates,
        lhs_source="monte-carlo",
        notes=notes,
    )


def _verify_return(graph: GraphHandle, params: Dict[str, Any]) -> BoundReport:
    if "x" in params:
        x, t = int(params["x"]), int(params["t"])
        returns, _ = distribution_series(graph, x, t)
        value = float(returns[t])
        bound = 4 * graph.degree(x) / math.sqrt(t + 1)
        return _report(
            BoundId.EQ_RETURN,
            graph,
            {"x": x, "t": t},
            lhs=value,
            lhs_err=0.0,
            rhs=bound,
            verdict=judge(value, 0.0, bound, UPPER),
        )

    t_max = int(params.get("t_max", 200))
    worst, where = 0.0, None
    scale = 4 / np.sqrt(np.arange(t_max + 1) + 1)
    for x in _core(graph, params):
        returns, _ = distribution_series(graph, x, t_max)
        ratios = returns / (graph.degree(x) * scale)
        s = int(np.argmax(ratios))
        if ratios[s] > worst:
            worst, where = float(ratios[s]), (x, s)
    return _report(
        BoundId.EQ_RETURN,
        graph,
        {"t_max": t_max, "core_radius": params.get("core_radius", 5)},
        lhs=worst,
        lhs_err=0.0,
        rhs=1.0,
        verdict=judge(worst, 0.0, 1.0, UPPER),
        notes=f"худшая пара (x, t) = {where}",
    )


def _verify_linear(
    graph: GraphHandle, params: Dict[str, Any], seed: int, threads: int, step_cap: int
) -> BoundReport:
    t = int(params["t"])
    t_max = int(params.get("t_max", LINEAR_RANGE_T_MAX))
    replicates = int(params.get("replicates", 200))
    ell = local_times(graph, t_max, _core(graph, params)).ell_star
    rhs = t / ell
    summary, verdict = _estimate_decided(
        lambda reps: estimate_ER(graph, t, reps, seed, step_cap, threads),
        replicates,
        rhs,
        LOWER,
    )
    # при t <= t_max граница следует из оценки через ℓ*(t) <= ℓ*(t_max)
    grade = "verdict" if t <= t_max else "asymptotic-indicative"
    if grade != "verdict" and verdict == Verdict.VIOLATED:
        verdict = Verdict.INCONCLUSIVE
    return _report(
        BoundId.LINEAR_RANGE,
        graph,
        {"t": t, "t_max": t_max, "replicates": replicates},
        lhs=summary.mean,
        lhs_err=summary.stderr,
        rhs=rhs,
        verdict=verdict,
        seed=seed,
        replicates=summary.replicates,
        lhs_source="monte-carlo",
        grade=grade,
        notes=f"c=1/ℓ*({t_max})={1 / ell:.6g}; R_t/t={summary.mean / max(t, 1):.4g}",
    )


def _verify_diffusive(
    graph: GraphHandle, params: Dict[str, Any], seed: int, threads: int, step_cap: int
) -> BoundReport:
    t = int(params["t"])
    replicates = int(params.get("replicates", 200))
    if graph.max_degree is None:
        raise InvalidParameterError(graph.name, "Степени графа не ограничены")
    rhs = math.sqrt(t + 1) / (8 * graph.max_degree)
    summary, verdict = _estimate_decided(
        lambda reps: estimate_ER(graph, t, reps, seed, step_cap, threads),
        replicates,
        rhs,
        LOWER,
    )
    return _report(
        BoundId.DIFFUSIVE_RANGE,
        graph,
        {"t": t, "replicates": replicates},
        lhs=summary.mean,
        lhs_err=summary.stderr,
        rhs=rhs,
        verdict=verdict,
        seed=seed,
        replicates=summary.replicates,
        lhs_source="monte-carlo",
    )


def _verify_chain(
    graph: GraphHandle, params: Dict[str, Any], seed: int, threads: int, step_cap: int
) -> BoundReport:
    n = int(params["n"])
    replicates = int(params.get("replicates", 500))
    traces = [
        tr
        for tr in run_replicates(
            graph,
            replicates,
            seed,
            threads,
            target_range=n,
            step_cap=step_cap,
            record_range=False,
        )
        if not tr.truncated
    ]
    if len(traces) < 2:
        raise BudgetExceededError(step_cap, "Недостаточно завершённых повторов")
    times = np.array([tr.discovery_time(n) for tr in traces], dtype=float)
    chains = np.array([chain_sum(tr, n) for tr in traces], dtype=float)
    diff = chains - times
    diff_err = float(diff.std(ddof=1) / math.sqrt(len(diff)))
    verdict = judge(float(diff.mean()), diff_err, 0.0, LOWER)
    return _report(
        BoundId.DISCOVERY_CHAIN,
        graph,
        {"n": n, "replicates": replicates},
        lhs=float(times.mean()),
        lhs_err=diff_err,
        rhs=float(chains.mean()),
        verdict=verdict,
        seed=seed,
        replicates=len(traces),
        lhs_source="monte-carlo",
    )


def _verify_sharpness(
    graph: GraphHandle, params: Dict[str, Any], seed: int, threads: int, step_cap: int
) -> BoundReport:
    grid = [int(n) for n in params.get("n_grid", [8, 16, 32, 64, 128])]
    low = float(params.get("min_exponent", 2.7))
    high = float(params.get("max_exponent", 3.3))
    fit = sharpness_fit(
        graph, grid, int(params.get("replicates", 100)), seed, threads, step_cap
    )
    inside = low <= fit.exponent <= high
    return _report(
        BoundId.PROP_SHARPNESS,
        graph,
        {"n_grid": grid, "window": [low, high]},
        lhs=fit.exponent,
        lhs_err=0.0,
        rhs=low,
        verdict=Verdict.HOLDS if inside else Verdict.INCONCLUSIVE,
        seed=seed,
        replicates=fit.summaries[0].replicates,
        lhs_source="fit",
        grade="empirical",
        notes=f"c={fit.constant:.4g}; min E[T_n]/n^3={fit.cubic_floor:.4g}",
    )


def verify_bound(
    bound_id: BoundId,
    graph: GraphHandle,
    params: Dict[str, Any],
    master_seed: int = 0,
    threads: int = 1,
    step_cap: Optional[int] = None,
) -> BoundReport:
    """
    Диспетчер проверок: возвращает BoundReport с указанием источника lhs
    """
    bound_id = BoundId(bound_id)
    cap = step_cap or default_step_cap()
    if bound_id == BoundId.LEM_NEIGHBOR:
        return _verify_neighbor(graph, params)
    if bound_id == BoundId.LEM_ESCAPE:
        return _verify_escape(graph, params, master_seed)
    if bound_id == BoundId.LEM_PACKING:
        return _verify_packing(graph, params, master_seed, threads, cap)
    if bound_id in (BoundId.THM_MAIN, BoundId.COR_UNIVERSAL_T):
        return _verify_discovery_time(bound_id, graph, params, master_seed, threads, cap)
    if bound_id == BoundId.COR_UNIVERSAL_R:
        return universal_R_check(
            graph,
            int(params["t"]),
            int(params.get("replicates", 200)),
            master_seed,
            threads,
            cap,
        )
    if bound_id == BoundId.PROP_LOCALTIME:
        return _verify_localtime(graph, params, master_seed, threads, cap)
    if bound_id == BoundId.EQ_RETURN:
        return _verify_return(graph, params)
    if bound_id == BoundId.LINEAR_RANGE:
        return _verify_linear(graph, params, master_seed, threads, cap)
    if bound_id == BoundId.DIFFUSIVE_RANGE:
        return _verify_diffusive(graph, params, master_seed, threads, cap)
    if bound_id == BoundId.DISCOVERY_CHAIN:
        return _verify_chain(graph, params, master_seed, threads, cap)
    return _verify_sharpness(graph, params, master_seed, threads, cap)


# ============ РЕЗКОСТЬ И ОСЦИЛЛЯЦИИ ============
def sharpness_fit(
    graph: GraphHandle,
    n_grid: Sequence[int],
    replicates: int,
    master_seed: int = 0,
    threads: int = 1,
    step_cap: Optional[int] = None,
) -> SharpnessFit:
    """
    Наклон МНК log Ê[T_n] против log n; константа c = exp(свободный член)
    """
    grid = sorted(set(int(n) for n in n_grid))
    if len(grid) < 2 or grid[0] < 2:
        raise InvalidParameterError(grid, "Нужны хотя бы две точки n >= 2")
    if replicates < 100:
        raise InvalidParameterError(replicates, "Для подгонки нужно >= 100 повторов")
    if isinstance(graph, MultiScaleLollipop):
        boundaries = set(graph.spec.block_boundaries(32))
        off_grid = [n for n in grid if n not in boundaries]
        if off_grid:
            logging.info(f"Точки {off_grid} не совпадают с границами блоков")

    summaries = tuple(
        estimate_ET(graph, n, replicates, master_seed, step_cap, threads) for n in grid
    )
    for n, s in zip(grid, summaries):
        if s.censored:
            logging.warning(f"E[T_{n}] цензурировано: подгонка смещена вниз")
    logs_n = np.log(np.array(grid, dtype=float))
    logs_t = np.log(np.array([s.mean for s in summaries]))
    exponent, intercept = np.polyfit(logs_n, logs_t, 1)
    floor = min(s.mean / n**3 for n, s in zip(grid, summaries))
    fit = SharpnessFit(
        family=graph.name,
        n_grid=tuple(grid),
        summaries=summaries,
        exponent=float(exponent),
        constant=float(math.exp(intercept)),
        cubic_floor=float(floor),
    )
    logging.info(f"Подгонка на {graph.name}: показатель {fit.exponent:.4f}, c={fit.constant:.4g}")
    return fit


def geometric_grid(t_min: int, t_max: int, points: int) -> List[int]:
    """Геометрическая сетка целых моментов"""
    if t_min < 1 or t_max <= t_min or points < 2:
        raise InvalidParameterError((t_min, t_max, points), "Некорректная сетка")
    return sorted(set(int(round(t)) for t in np.geomspace(t_min, t_max, points)))


def _check_geometric(grid: Sequence[int]) -> None:
    if len(grid) < 3 or grid[0] < 1 or any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidParameterError(list(grid), "Нужна возрастающая сетка t >= 1")
    ratios = np.log(np.array(grid[1:], dtype=float) / np.array(grid[:-1], dtype=float))
    if ratios.max() > 2 * ratios.min() + 0.1:
        raise InvalidParameterError(list(grid), "Сетка не геометрическая")


def oscillation_profile(
    graph: GraphHandle,
    t_grid: Sequence[int],
    replicates: int,
    window: int = 3,
    master_seed: int = 0,
    threads: int = 1,
    step_cap: Optional[int] = None,
) -> OscillationProfile:
    """
    Оконные наклоны log Ê[R_t] против log t; окно классифицируется как
    sub (< 1/2), super (> 1/2) или inconclusive по 99% интервалу наклона
    """
    grid = sorted(set(int(t) for t in t_grid))
    _check_geometric(grid)
    if window < 3 or window > len(grid):
        raise InvalidParameterError(window, "Окно должно содержать от 3 точек")

    summaries = estimate_range_curve(graph, grid, replicates, master_seed, step_cap, threads)
    logs_t = np.log(np.array(grid, dtype=float))
    means = np.array([s.mean for s in summaries])
    log_vars = np.array([(s.stderr / s.mean) ** 2 for s in summaries])
    logs_r = np.log(means)

    slopes, errors, classes = [], [], []
    for start in range(len(grid) - window + 1):
        x = logs_t[start:start + window]
        y = logs_r[start:start + window]
        weights = (x - x.mean()) / np.sum((x - x.mean()) ** 2)
        slope = float(np.sum(weights * y))
        error = float(math.sqrt(np.sum(weights**2 * log_vars[start:start + window])))
        if slope > 1 + SLOPE_TOLERANCE:
            logging.warning(f"Наклон {slope:.3f} > 1 на окне с t={grid[start]}")
        if slope + _z() * error < 0.5:
            classes.append("sub")
        elif slope - _z() * error > 0.5:
            classes.append("super")
        else:
            classes.append("inconclusive")
        slopes.append(slope)
        errors.append(error)

    profile = OscillationProfile(
        time_grid=tuple(grid),
        means=tuple(float(m) for m in means),
        stderrs=tuple(s.stderr for s in summaries),
        window=window,
        slopes=tuple(slopes),
        slope_errors=tuple(errors),
        classes=tuple(classes),
    )
    logging.info(
        f"Осцилляции на {graph.name}: alpha={profile.alpha_hat:.3f}, beta={profile.beta_hat:.3f}"
    )
    return profile


def cubic_stress(
    graphs: Iterable[GraphHandle],
    n_grid: Sequence[int],
    replicates: int,
    master_seed: int = 0,
    threads: int = 1,
    step_cap: Optional[int] = None,
) -> Dict[str, Any]:
    """
    Таблица Ê[T_n]/n^3 по каталогу и её максимум; выводов не делает
    """
    rows = []
    for graph in graphs:
        for n in n_grid:
            summary = estimate_ET(graph, n, replicates, master_seed, step_cap, threads)
            rows.append(
                {
                    "family": graph.name,
                    "graph_params": list(graph.params),
                    "n": n,
                    "ratio": summary.mean / n**3,
                    "censored": summary.censored,
                }
            )
    worst = max(rows, key=lambda row: row["ratio"])
    logging.info(f"Максимум E[T_n]/n^3 = {worst['ratio']:.4g} на {worst['family']}, n={worst['n']}")
    return {"rows": rows, "max_ratio": worst["ratio"], "argmax": worst}


# ============ НАБОР ПРОВЕРОК ============
def verify_suite(
    entries: Iterable[Tuple[BoundId, GraphHandle, Dict[str, Any]]],
    master_seed: int = 0,
    threads: int = 1,
    budget: Optional[float] = None,
    step_cap: Optional[int] = None,
) -> Tuple[List[BoundReport], bool]:
    """
    Последовательный прогон проверок в фиксированном порядке;
    возвращает отчёты и признак исчерпания бюджета
    """
    deadline = None if budget is None else time.monotonic() + budget
    reports: List[BoundReport] = []
    for bound_id, graph, params in entries:
        if deadline is not None and time.monotonic() >= deadline:
            logging.warning(f"Бюджет {budget} с исчерпан после {len(reports)} отчётов")
            return reports, True
        if bound_id == BoundId.LEM_NEIGHBOR and graph is None:
            reports.extend(verify_neighbor_sweep(int(params.get("max_order", 6))))
            continue
        reports.append(verify_bound(bound_id, graph, params, master_seed, threads, step_cap))
    return reports, False


__all__ = [
    "judge",
    "thm_main_rhs",
    "universal_T_rhs",
    "universal_R_check",
    "verify_bound",
    "verify_neighbor_sweep",
    "sharpness_fit",
    "oscillation_profile",
    "cubic_stress",
    "verify_suite",
]
