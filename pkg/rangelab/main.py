#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import argparse
import logging
import os
import sys
import time
from typing import Any, Callable, Dict, List, Optional, Tuple

from rangelab.bounds import (
    cubic_stress,
    geometric_grid,
    oscillation_profile,
    sharpness_fit,
    verify_suite,
)
from rangelab.geometry import (
    ball_boundary_profile,
    build_profile,
    chaining_holds,
)
from rangelab.graphs import (
    CATALOG,
    FiniteGraph,
    GraphHandle,
    distances,
    from_descriptor,
    truncate,
)
from rangelab.markov import (
    HittingProblem,
    discovery_time_exact,
    escape_time,
    expected_range_exact,
    expected_return_time,
    hitting_time,
    local_times,
    max_neighbor_hitting,
    return_probability,
)
from rangelab.models import (
    BoundId,
    BoundReport,
    BudgetExceededError,
    ConfigError,
    DataFormatError,
    InvalidParameterError,
    LabError,
    MonteCarloSummary,
    RunConfig,
    Task,
    UnknownFamilyError,
)
from rangelab.storage import (
    REPORT_COLUMNS,
    SIMULATION_COLUMNS,
    ResultStore,
    load_config,
)
from rangelab.walks import default_step_cap, estimate_ER, estimate_ET

EXIT_OK, EXIT_VIOLATED, EXIT_CONFIG, EXIT_BUDGET = 0, 1, 2, 3
SWEEP_FAMILY = "all-connected"

TaskResult = Tuple[Dict[str, Any], List[BoundReport]]


def setup_logging():
    """Настройка логирования"""
    logging.basicConfig(
        filename="range_lab.log",
        level=logging.INFO,
        format="%(asctime)s - %(levelname)s - %(message)s",
        encoding="utf-8",
    )
    logging.info("=" * 50)
    logging.info("Запуск лаборатории диапазона случайного блуждания")
    logging.info("=" * 50)


def print_help():
    """Вывод справки по командам"""
    print("\n🎲 ДОСТУПНЫЕ КОМАНДЫ:")
    print("=" * 60)
    print("run <config.json>  - выполнить задачу из файла конфигурации")
    print("    --threads N    - число рабочих процессов для повторов")
    print("    --output DIR   - каталог результатов")
    print("    --seed S       - заменить главное зерно")
    print("catalog            - показать каталог семейств графов")
    print("verify-all         - проверить все неравенства на каталоге")
    print("    --budget SEC   - ограничение времени в секундах")
    print("=" * 60)
    print("Переменная RANGE_LAB_STEP_CAP задаёт лимит шагов блуждания")


def list_catalog() -> str:
    """
    Каталог семейств с параметрами и известными формулами f и g
    """
    line = "+{}+{}+{}+{}+{}+".format("-" * 21, "-" * 15, "-" * 24, "-" * 38, "-" * 50)
    table = [line]
    table.append(
        "| {:^19} | {:^13} | {:^22} | {:^36} | {:^48} |".format(
            "Семейство", "Тип", "Параметры", "f(n)", "g(r)"
        )
    )
    table.append(line)
    for name in sorted(CATALOG):
        entry = CATALOG[name]
        table.append(
            "| {:<19} | {:<13} | {:<22} | {:<36} | {:<48} |".format(
                entry.family, entry.kind, entry.params, entry.f_form, entry.g_form
            )
        )
    table.append(line)
    table.append(f"\n📊 Всего семейств: {len(CATALOG)}")
    return "\n".join(table)


# ============ ВСПОМОГАТЕЛЬНОЕ ============
class Deadline:
    """Бюджет времени задачи"""

    def __init__(self, seconds: Optional[float]):
        self.seconds = seconds
        self.started = time.monotonic()

    @property
    def remaining(self) -> Optional[float]:
        if self.seconds is None:
            return None
        return self.seconds - (time.monotonic() - self.started)

    def check(self):
        if self.seconds is not None and self.remaining <= 0:
            raise BudgetExceededError(self.seconds)


def _build_graph(config: RunConfig) -> Optional[GraphHandle]:
    """Граф из описания; для перебора всех связных графов - None"""
    if config.graph.get("family") == SWEEP_FAMILY:
        return None
    graph = from_descriptor(config.graph)
    radius = config.task_params.get("radius")
    if radius is not None and not graph.is_finite:
        graph = truncate(graph, int(radius))
    return graph


def _require_graph(graph: Optional[GraphHandle], task: Task) -> GraphHandle:
    if graph is None:
        raise ConfigError("graph", f"Семейство {SWEEP_FAMILY} допустимо только для verify")
    return graph


def _own_finite(graph: GraphHandle) -> FiniteGraph:
    """Конечный граф или окно усечения как самостоятельный граф"""
    if not isinstance(graph, FiniteGraph):
        raise ConfigError("graph", "Нужен конечный граф или task_params.radius")
    return graph.standalone()


def _grid(params: Dict[str, Any], grid_key: str, point_key: str) -> List[int]:
    if grid_key in params:
        return [int(v) for v in params[grid_key]]
    if point_key in params:
        return [int(params[point_key])]
    return []


def _summary_rows(label: int, summary: MonteCarloSummary) -> List[Dict[str, Any]]:
    return [
        {
            "replicate": r,
            "seed": seed,
            "n_or_t": label,
            "value": repr(value),
            "censored": int(censored),
        }
        for r, (seed, value, censored) in enumerate(
            zip(summary.seeds, summary.values, summary.censored_mask)
        )
    ]


def _summary_json(label: int, summary: MonteCarloSummary) -> Dict[str, Any]:
    return {
        "n_or_t": label,
        "mean": summary.mean,
        "stderr": summary.stderr,
        "ci95": list(summary.ci95),
        "replicates": summary.replicates,
        "censored": summary.censored_count,
    }


# ============ ЗАДАЧИ ============
def run_simulate(
    config: RunConfig, graph: Optional[GraphHandle], store: ResultStore, deadline: Deadline
) -> TaskResult:
    """Оценки E[T_n] и E[R_t] по повторам"""
    graph = _require_graph(graph, config.task)
    params = config.task_params
    replicates = int(params.get("replicates", 200))
    n_grid = _grid(params, "n_grid", "n")
    t_grid = _grid(params, "t_grid", "t")
    if not n_grid and not t_grid:
        raise ConfigError("task_params", "Нужны n, n_grid, t или t_grid")

    summary: Dict[str, Any] = {"ET": [], "ER": []}
    for key, grid, estimator, filename in (
        ("ET", n_grid, estimate_ET, "ET_summary.csv"),
        ("ER", t_grid, estimate_ER, "ER_summary.csv"),
    ):
        if not grid:
            continue
        rows: List[Dict[str, Any]] = []
        for point in grid:
            deadline.check()
            result = estimator(
                graph, point, replicates, config.master_seed, config.step_cap, config.threads
            )
            rows.extend(_summary_rows(point, result))
            summary[key].append(_summary_json(point, result))
            print(f"✅ {key}({point}) = {result.mean:.6g} ± {result.stderr:.3g}")
        store.save_csv(filename, SIMULATION_COLUMNS, rows)
    return summary, []


def run_exact(
    config: RunConfig, graph: Optional[GraphHandle], store: ResultStore, deadline: Deadline
) -> TaskResult:
    """Точные величины по линейным системам и итерации распределения"""
    graph = _require_graph(graph, config.task)
    params = config.task_params
    values: List[Dict[str, Any]] = []

    def record(quantity: str, args: Dict[str, Any], value: float):
        values.append({"quantity": quantity, "params": args, "value": value})
        print(f"✅ {quantity} {args}: {value:.10g}")

    if "target" in params:
        start = int(params.get("start", graph.origin))
        problem = HittingProblem(graph, frozenset(params["target"]), start)
        result = hitting_time(problem, exact=bool(params.get("rational", False)))
        args = {"start": start, "target": sorted(problem.target)}
        record("hitting_time", args, result.value)
    if "return_vertex" in params:
        result = expected_return_time(_own_finite(graph), int(params["return_vertex"]))
        record("return_time", {"vertex": result.vertex}, result.linear)
    if params.get("neighbor"):
        result = max_neighbor_hitting(_own_finite(graph))
        args = {"edge": list(result.edge), "bound": result.bound}
        record("max_neighbor_hitting", args, result.value)
    if "escape" in params:
        spec = params["escape"]
        result = escape_time(graph, spec["inside"], int(spec["x"]))
        record("escape_time", {"x": spec["x"], "bound": result.bound}, result.value)
    if "local_time_t" in params:
        core = sorted(distances(graph, graph.origin, int(params.get("core_radius", 5))))
        table = local_times(graph, int(params["local_time_t"]), core)
        record("ell_star", {"t": table.horizon, "argmax": table.argmax}, table.ell_star)
    if "return_t" in params:
        x = int(params.get("x", graph.origin))
        record(
            "return_probability",
            {"x": x, "t": params["return_t"]},
            return_probability(graph, x, int(params["return_t"])),
        )
    if "discovery_n" in params:
        n = int(params["discovery_n"])
        record("discovery_time", {"n": n}, discovery_time_exact(graph, n))
    if "range_t" in params:
        t = int(params["range_t"])
        record("expected_range", {"t": t}, expected_range_exact(graph, t))
    deadline.check()

    if not values:
        raise ConfigError("task_params", "Не задано ни одной точной величины")
    store.save_csv(
        "exact.csv",
        ("quantity", "params", "value"),
        (
            {
                "quantity": v["quantity"],
                "params": str(v["params"]),
                "value": repr(float(v["value"])),
            }
            for v in values
        ),
    )
    return {"exact": values}, []


def run_coarse(
    config: RunConfig, graph: Optional[GraphHandle], store: ResultStore, deadline: Deadline
) -> TaskResult:
    """Профиль f, g, гармонические суммы и изопериметрия шаров"""
    graph = _require_graph(graph, config.task)
    params = config.task_params
    n_max = int(params.get("n_max", 16))
    profile = build_profile(graph, n_max, params.get("r_max"))
    deadline.check()
    boundary = ball_boundary_profile(graph, int(params.get("boundary_radius", 10)))

    rows = [
        {"kind": "f", "index": n, "value": v.value, "provenance": str(v.provenance)}
        for n, v in sorted(profile.f.items())
    ]
    rows += [
        {"kind": "g", "index": r, "value": v.value, "provenance": str(v.provenance)}
        for r, v in sorted(profile.g.items())
    ]
    rows += [
        {"kind": "harmonic", "index": n, "value": str(s), "provenance": "exact"}
        for n, s in sorted(profile.harmonic_sums.items())
    ]
    store.save_csv("coarse.csv", ("kind", "index", "value", "provenance"), rows)
    print(f"✅ Профиль {graph.name}: f до {n_max}, g до {max(profile.g)}")

    summary = profile.to_json()
    sums = sorted(profile.harmonic_sums.items())
    summary["harmonic_sums"] = {str(n): str(s) for n, s in sums}
    summary["chaining_holds"] = chaining_holds(profile)
    summary["ball_boundary"] = {
        str(r): [b.boundary, b.size] for r, b in sorted(boundary.items())
    }
    return summary, []


def run_verify(
    config: RunConfig, graph: Optional[GraphHandle], store: ResultStore, deadline: Deadline
) -> TaskResult:
    """Проверка одного или нескольких неравенств"""
    params = dict(config.task_params)
    entries = params.pop("bounds", None) or [params]
    suite = []
    for entry in entries:
        entry = dict(entry)
        try:
            bound_id = BoundId(entry.pop("bound_id"))
        except (KeyError, ValueError):
            raise ConfigError("bound_id", "Неизвестный или отсутствующий bound_id")
        entry.pop("radius", None)
        if graph is None and bound_id != BoundId.LEM_NEIGHBOR:
            raise ConfigError("graph", f"{SWEEP_FAMILY} поддерживает только lem-neighbor")
        if graph is None:
            entry.setdefault("max_order", (config.graph.get("params") or [6])[0])
        suite.append((bound_id, graph, entry))

    reports, exhausted = verify_suite(
        suite, config.master_seed, config.threads, deadline.remaining, config.step_cap
    )
    store.save_csv("reports.csv", REPORT_COLUMNS, (r.as_row() for r in reports))
    if exhausted:
        raise BudgetExceededError(config.budget_seconds, f"Готово {len(reports)} отчётов")
    return {"reports": [r.to_json() for r in reports]}, reports


def run_sharpness(
    config: RunConfig, graph: Optional[GraphHandle], store: ResultStore, deadline: Deadline
) -> TaskResult:
    """Подгонка показателя роста E[T_n]; при stress - таблица E[T_n]/n^3"""
    graph = _require_graph(graph, config.task)
    params = config.task_params
    grid = [int(n) for n in params.get("n_grid", [8, 16, 32, 64, 128])]
    replicates = int(params.get("replicates", 100))
    fit = sharpness_fit(
        graph, grid, replicates, config.master_seed, config.threads, config.step_cap
    )
    deadline.check()
    rows: List[Dict[str, Any]] = []
    for n, summary in zip(fit.n_grid, fit.summaries):
        rows.extend(_summary_rows(n, summary))
    store.save_csv("ET_summary.csv", SIMULATION_COLUMNS, rows)
    print(f"✅ Показатель {fit.exponent:.4f}, c = {fit.constant:.4g}")

    result = {
        "family": fit.family,
        "n_grid": list(fit.n_grid),
        "means": list(fit.means),
        "exponent": fit.exponent,
        "constant": fit.constant,
        "cubic_floor": fit.cubic_floor,
    }
    if params.get("stress"):
        stress = cubic_stress(
            [graph], grid, replicates, config.master_seed, config.threads, config.step_cap
        )
        result["cubic_stress_max"] = stress["max_ratio"]
    return result, []


def run_oscillation(
    config: RunConfig, graph: Optional[GraphHandle], store: ResultStore, deadline: Deadline
) -> TaskResult:
    """Оконные наклоны log E[R_t] на геометрической сетке"""
    graph = _require_graph(graph, config.task)
    params = config.task_params
    if "t_grid" in params:
        grid = [int(t) for t in params["t_grid"]]
    else:
        grid = geometric_grid(
            int(params.get("t_min", 10)),
            int(params.get("t_max", 10**5)),
            int(params.get("points", 13)),
        )
    profile = oscillation_profile(
        graph,
        grid,
        int(params.get("replicates", 100)),
        int(params.get("window", 3)),
        config.master_seed,
        config.threads,
        config.step_cap,
    )
    deadline.check()
    store.save_csv(
        "oscillation.csv",
        ("t", "mean", "stderr"),
        (
            {"t": t, "mean": repr(m), "stderr": repr(s)}
            for t, m, s in zip(profile.time_grid, profile.means, profile.stderrs)
        ),
    )
    print(f"✅ alpha = {profile.alpha_hat:.3f}, beta = {profile.beta_hat:.3f}")
    return {
        "time_grid": list(profile.time_grid),
        "slopes": list(profile.slopes),
        "slope_errors": list(profile.slope_errors),
        "classes": list(profile.classes),
        "alpha_hat": profile.alpha_hat,
        "beta_hat": profile.beta_hat,
        "alternates": profile.alternates,
    }, []


TASK_RUNNERS: Dict[Task, Callable[..., TaskResult]] = {
    Task.SIMULATE: run_simulate,
    Task.EXACT: run_exact,
    Task.COARSE: run_coarse,
    Task.VERIFY: run_verify,
    Task.SHARPNESS: run_sharpness,
    Task.OSCILLATION: run_oscillation,
}


# ============ КОМАНДЫ ============
def run(
    config_path: str,
    threads: Optional[int] = None,
    output: Optional[str] = None,
    seed: Optional[int] = None,
) -> int:
    """
    Выполнение задачи из конфигурации; возвращает код выхода
    """
    overrides = {"threads": threads, "output_dir": output, "master_seed": seed}
    if os.environ.get("RANGE_LAB_STEP_CAP") is not None:
        overrides["step_cap"] = default_step_cap()
    try:
        config = load_config(config_path, overrides)
        graph = _build_graph(config)
    except (ConfigError, DataFormatError, UnknownFamilyError, InvalidParameterError) as e:
        logging.error(f"Некорректная конфигурация: {e}")
        print(f"❌ Некорректная конфигурация: {e}")
        return EXIT_CONFIG

    store = ResultStore(config.output_dir)
    deadline = Deadline(config.budget_seconds)
    reports: List[BoundReport] = []
    try:
        summary, reports = TASK_RUNNERS[config.task](config, graph, store, deadline)
    except BudgetExceededError as e:
        logging.warning(f"Бюджет исчерпан: {e}")
        print(f"⏱️  Бюджет исчерпан: {e}")
        store.save_manifest(config, "budget-exceeded", partial=True)
        return EXIT_BUDGET
    except LabError as e:
        logging.error(f"Задача {config.task} завершилась ошибкой: {e}")
        print(f"❌ Ошибка: {e}")
        store.save_manifest(config, "error", partial=True)
        return EXIT_CONFIG

    violated = [r for r in reports if r.violated]
    summary["config"] = config.to_dict()
    store.save_json("summary.json", summary)
    store.save_manifest(config, "violated" if violated else "ok")
    if violated:
        for report in violated:
            print(f"🚨 НАРУШЕНИЕ {report.bound_id} на {report.family}: {report.lhs} > {report.rhs}")
        return EXIT_VIOLATED
    print(f"✅ Результаты сохранены в {config.output_dir}")
    return EXIT_OK


def default_suite() -> List[Tuple[BoundId, Optional[GraphHandle], Dict[str, Any]]]:
    """Проверки масштаба рабочего стола по каталогу"""
    line = from_descriptor({"family": "line"})
    ray = from_descriptor({"family": "ray"})
    tree = from_descriptor({"family": "regular-tree"})
    dyadic = from_descriptor({"family": "dyadic"})
    lollipops = [
        from_descriptor({"family": "infinite-lollipop", "params": [k]})
        for k in (10, 20, 40)
    ]
    star_ray = from_descriptor({"family": "star-ray", "params": [100]})
    finite = [
        from_descriptor({"family": name, "params": params})
        for name, params in (
            ("path", [5]),
            ("cycle", [6]),
            ("clique", [4]),
            ("star", [4]),
            ("lollipop", [10]),
        )
    ]

    suite: List[Tuple[BoundId, Optional[GraphHandle], Dict[str, Any]]] = [
        (BoundId.LEM_NEIGHBOR, None, {"max_order": 6})
    ]
    suite += [(BoundId.LEM_NEIGHBOR, g, {}) for g in finite]
    suite += [
        (BoundId.LEM_ESCAPE, g, {"samples": 100})
        for g in [ray, line, tree, dyadic, star_ray, *lollipops, *finite]
    ]
    suite += [
        (BoundId.LEM_PACKING, g, {"n": 32, "replicates": 200})
        for g in [ray, line, tree, dyadic, lollipops[0]]
    ]
    for graph in [ray, line, *lollipops, dyadic]:
        for n in (4, 8, 16):
            suite.append((BoundId.THM_MAIN, graph, {"n": n, "replicates": 1000}))
            suite.append((BoundId.COR_UNIVERSAL_T, graph, {"n": n, "replicates": 1000}))
    suite += [
        (BoundId.PROP_LOCALTIME, g, {"t": t, "replicates": 300})
        for g in [ray, line, tree, star_ray]
        for t in (1, 10, 100)
    ]
    suite += [
        (BoundId.EQ_RETURN, g, {"t_max": 200, "core_radius": 20})
        for g in [line, tree, lollipops[0]]
    ]
    suite += [
        (BoundId.COR_UNIVERSAL_R, line, {"t": 1000, "replicates": 300}),
        (BoundId.LINEAR_RANGE, tree, {"t": 1000, "replicates": 200}),
        (BoundId.DIFFUSIVE_RANGE, line, {"t": 1000, "replicates": 200}),
        (BoundId.DISCOVERY_CHAIN, lollipops[0], {"n": 16, "replicates": 500}),
    ]
    return suite


def verify_all(budget: Optional[float] = None, output: str = "range_lab_verify") -> int:
    """
    Прогон всех проверок каталога; код выхода как у run
    """
    store = ResultStore(output)
    reports, exhausted = verify_suite(default_suite(), budget=budget)
    store.save_csv("reports.csv", REPORT_COLUMNS, (r.as_row() for r in reports))
    violated = [r for r in reports if r.violated]
    holds = sum(1 for r in reports if r.verdict == "holds")
    print(f"\n📊 Отчётов: {len(reports)}, выполнено: {holds}, нарушений: {len(violated)}")
    if violated:
        for report in violated:
            print(f"🚨 НАРУШЕНИЕ {report.bound_id} на {report.family}")
        return EXIT_VIOLATED
    if exhausted:
        print("⏱️  Бюджет исчерпан, результаты неполные")
        return EXIT_BUDGET
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="range-lab", description="Лаборатория диапазона случайного блуждания"
    )
    commands = parser.add_subparsers(dest="command")
    run_parser = commands.add_parser("run", help="выполнить задачу из конфигурации")
    run_parser.add_argument("config")
    run_parser.add_argument("--threads", type=int)
    run_parser.add_argument("--output")
    run_parser.add_argument("--seed", type=int)
    commands.add_parser("catalog", help="каталог семейств графов")
    verify_parser = commands.add_parser("verify-all", help="проверить все неравенства")
    verify_parser.add_argument("--budget", type=float)
    verify_parser.add_argument("--output", default="range_lab_verify")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Главная функция программы"""
    setup_logging()
    args = build_parser().parse_args(argv)

    try:
        if args.command == "run":
            return run(args.config, args.threads, args.output, args.seed)
        if args.command == "catalog":
            print(list_catalog())
            return EXIT_OK
        if args.command == "verify-all":
            return verify_all(args.budget, args.output)
        print_help()
        return EXIT_CONFIG
    except KeyboardInterrupt:
        print("\n\n👋 Программа прервана пользователем")
        logging.info("Программа прервана пользователем")
        return 130
    except Exception as e:
        print(f"❌ Неожиданная ошибка: {e}")
        logging.error(f"Неожиданная ошибка: {e}")
        return EXIT_CONFIG
    finally:
        logging.info("Завершение работы программы")


if __name__ == "__main__":
    sys.exit(main())
