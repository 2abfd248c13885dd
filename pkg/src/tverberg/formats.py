"""JSON instance and partition files.

Instance::

    {"k": 2, "r": 2, "dim": 2, "colors": [[[0, 0], [1, 0]], [[0, 1], [1, 1]]]}

Hyperboloid instances add ``"model": "hyperboloid"``; their points carry
``dim + 1`` coordinates ``(x0, x1, ..., x_dim)``.

Partition::

    {"assignment": [[0, 1], [1, 0]]}
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Union

import numpy as np

from .core import EUCLIDEAN, HYPERBOLOID, ColoredConfig, ConfigError, TransversalPartition, _jsonable

PathLike = Union[str, Path]


def config_to_dict(cfg: ColoredConfig) -> dict:
    out: dict[str, Any] = {}
    if cfg.model == HYPERBOLOID:
        out["model"] = HYPERBOLOID
    out.update(k=cfg.k, r=cfg.r, dim=cfg.dim, colors=cfg.points.tolist())
    return out


def config_from_dict(data: dict) -> ColoredConfig:
    try:
        model = data.get("model", EUCLIDEAN)
        if model == "euclidean":
            model = EUCLIDEAN
        cfg = ColoredConfig.from_colors(data["colors"], model=model)
    except KeyError as exc:
        raise ConfigError(f"instance is missing field {exc}") from exc
    for key, have in (("k", cfg.k), ("r", cfg.r), ("dim", cfg.dim)):
        if key in data and int(data[key]) != have:
            raise ConfigError(f"field {key}={data[key]} disagrees with the colors ({have})")
    return cfg


def partition_from_dict(data: dict) -> TransversalPartition:
    if "assignment" not in data:
        raise ConfigError("partition is missing field 'assignment'")
    return TransversalPartition(np.asarray(data["assignment"]))


def dumps(obj: Any) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True)


def read_json(path: PathLike) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON ({exc})") from exc


def write_json(path: PathLike, obj: Any) -> None:
    Path(path).write_text(dumps(obj) + "\n")


def load_config(path: PathLike) -> ColoredConfig:
    return config_from_dict(read_json(path))


def save_config(path: PathLike, cfg: ColoredConfig) -> None:
    write_json(path, config_to_dict(cfg))


def load_partition(path: PathLike) -> TransversalPartition:
    return partition_from_dict(read_json(path))
