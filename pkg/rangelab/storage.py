#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import csv
import json
import logging
import os
import platform
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import metadata
from typing import Any, Dict, Iterable, List, Optional, Sequence

import networkx as nx
import numpy as np
import scipy

from rangelab.models import (
    CONFIG_SCHEMA_VERSION,
    GENERATOR_ID,
    ConfigError,
    DataFormatError,
    RunConfig,
    Task,
)

SIMULATION_COLUMNS = ("replicate", "seed", "n_or_t", "value", "censored")
REPORT_COLUMNS = (
    "bound_id",
    "family",
    "params",
    "lhs",
    "lhs_err",
    "rhs",
    "verdict",
    "seed",
    "replicates",
)
CONFIG_FIELDS = {
    "schema",
    "graph",
    "task",
    "task_params",
    "master_seed",
    "output_dir",
    "step_cap",
    "threads",
    "budget_seconds",
}


def load_config(filename: str, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Загрузка конфигурации запуска из JSON-файла; значения из overrides
    (флаги командной строки и окружение) заменяют значения из файла
    """
    try:
        with open(filename, encoding="utf-8") as handle:
            raw = json.load(handle)
    except FileNotFoundError:
        error_msg = f"Файл не найден: {filename}"
        logging.error(error_msg)
        raise DataFormatError(filename, error_msg)
    except json.JSONDecodeError as e:
        error_msg = f"Ошибка разбора JSON файла {filename}: {e}"
        logging.error(error_msg)
        raise DataFormatError(filename, error_msg)

    if not isinstance(raw, dict):
        raise DataFormatError(filename, "Конфигурация должна быть объектом JSON")
    unknown = set(raw) - CONFIG_FIELDS
    if unknown:
        raise ConfigError(", ".join(sorted(unknown)), "Неизвестные поля конфигурации")
    if raw.get("schema") != CONFIG_SCHEMA_VERSION:
        raise ConfigError("schema", f"Ожидается schema = {CONFIG_SCHEMA_VERSION}")
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value

    try:
        task = Task(raw.get("task"))
    except ValueError:
        raise ConfigError("task", f"Неизвестная задача {raw.get('task')}")
    try:
        config = RunConfig(**{**raw, "task": task})
    except TypeError as e:
        raise ConfigError("graph", f"Неполная конфигурация: {e}")

    logging.info(f"Загружена конфигурация {filename}: задача {config.task}, граф {config.graph}")
    return config


def library_versions() -> Dict[str, str]:
    """Версии интерпретатора и числовых библиотек для манифеста"""
    try:
        own = metadata.version("range-lab")
    except metadata.PackageNotFoundError:
        own = "unknown"
    return {
        "range-lab": own,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "networkx": nx.__version__,
    }


@dataclass
class ResultStore:
    """Каталог результатов одного запуска: JSON-сводка, CSV и манифест"""

    output_dir: str
    written: List[str] = field(default_factory=list)

    def _path(self, name: str) -> str:
        os.makedirs(self.output_dir, exist_ok=True)
        return os.path.join(self.output_dir, name)

    def save_json(self, name: str, data: Dict[str, Any]):
        """
        Сохранение сводки в JSON с упорядоченными ключами
        """
        filename = self._path(name)
        try:
            with open(filename, "w", encoding="utf-8") as handle:
                json.dump(data, handle, indent=2, sort_keys=True, ensure_ascii=False)
                handle.write("\n")
            self.written.append(filename)
            logging.info(f"Сводка сохранена в файл: {filename}")
        except (OSError, TypeError, ValueError) as e:
            error_msg = f"Ошибка при сохранении в файл {filename}: {e}"
            logging.error(error_msg)
            raise DataFormatError(filename, error_msg)

    def save_csv(
        self, name: str, columns: Sequence[str], rows: Iterable[Dict[str, Any]]
    ):
        """
        Сохранение строк в CSV; содержимое зависит только от конфигурации и зерна
        """
        filename = self._path(name)
        try:
            with open(filename, "w", encoding="utf-8", newline="") as handle:
                writer = csv.DictWriter(handle, fieldnames=list(columns), lineterminator="\n")
                writer.writeheader()
                count = 0
                for row in rows:
                    writer.writerow(row)
                    count += 1
            self.written.append(filename)
            logging.info(f"Сохранено {count} строк в файл: {filename}")
        except (OSError, ValueError) as e:
            error_msg = f"Ошибка при сохранении в файл {filename}: {e}"
            logging.error(error_msg)
            raise DataFormatError(filename, error_msg)

    def save_manifest(
        self, config: RunConfig, status: str, partial: bool = False
    ) -> Dict[str, Any]:
        """
        Манифест: хеш и текст конфигурации, зерно, генератор, версии и время.
        Отметка времени есть только здесь
        """
        manifest = {
            "config": config.to_dict(),
            "config_hash": config.config_hash,
            "master_seed": config.master_seed,
            "generator": GENERATOR_ID,
            "versions": library_versions(),
            "status": status,
            "partial": partial,
            "outputs": sorted(os.path.basename(path) for path in self.written),
            "created_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }
        self.save_json("manifest.json", manifest)
        return manifest


def load_csv(filename: str) -> List[Dict[str, str]]:
    """
    Чтение CSV обратно в список словарей
    """
    try:
        with open(filename, encoding="utf-8", newline="") as handle:
            return list(csv.DictReader(handle))
    except FileNotFoundError:
        error_msg = f"Файл не найден: {filename}"
        logging.error(error_msg)
        raise DataFormatError(filename, error_msg)
