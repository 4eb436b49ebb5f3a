"""Hierarchical register search engine (Python bindings)."""

import json
import os

from . import _core
from ._core import (
    ConfigError,
    DataError,
    Error,
    generate_planted,
    hierarchical_reward,
    network_call_count,
    recall_at_k,
    tokenize,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Engine",
    "Error",
    "build_index",
    "build_registers",
    "evaluate",
    "generate_planted",
    "hierarchical_reward",
    "network_call_count",
    "recall_at_k",
    "tokenize",
]


def _config_json(config):
    return json.dumps({k: os.fspath(v) if isinstance(v, os.PathLike) else v for k, v in config.items()})


def build_registers(**config):
    return json.loads(_core.build_registers(_config_json(config)))


def build_index(**config):
    return json.loads(_core.build_index(_config_json(config)))


def evaluate(dataset, systems=(), out_dir="", **config):
    return json.loads(_core.evaluate(_config_json(config), list(systems), os.fspath(dataset), os.fspath(out_dir)))


class Engine:
    """Loaded index plus recognizer; config keys match the CLI config file."""

    def __init__(self, **config):
        self._engine = _core.Engine(_config_json(config))

    def search(self, query, k=None, m=None, views=()):
        return json.loads(self._engine.search(query, k, m, list(views)))

    def identify(self, query, k=None):
        return self._engine.identify(query, k)
