"""Toolkit configuration: a versioned JSON document with strict fields."""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .errors import ConfigError, GraphProdError
from .graph import SimplicialGraph
from .groups import group_from_spec
from .morse import Thresholds
from .words import GraphProduct

SCHEMA_VERSION = 1
DEFAULT_OUTPUT = "gpg_out"

_TOP = {"schema", "graph", "vertex_groups", "budgets", "thresholds", "output"}
_BUDGETS = {"node_limit": 2_000_000, "quadruple_budget": 10**7, "seed": 0, "gauge_samples": 64,
            "subgraph_limit": 16}
_THRESHOLDS = {"cap": 2, "slope": "1/4", "factor": 10, "slacks": [0, 4]}
_OUTPUT = {"dir": DEFAULT_OUTPUT, "format": "json"}


def _strict(section: dict, allowed, where: str) -> None:
    if not isinstance(section, dict):
        raise ConfigError(f"{where} must be an object")
    extra = set(section) - set(allowed)
    if extra:
        raise ConfigError(f"unknown fields in {where}: {sorted(extra)}")


@dataclass
class ToolkitConfig:
    raw: dict
    graph: SimplicialGraph
    gp: GraphProduct
    budgets: dict = field(default_factory=dict)
    thresholds: Thresholds = field(default_factory=Thresholds)
    slacks: list = field(default_factory=lambda: [0, 4])
    output: dict = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return int(self.budgets["seed"])

    def sha256(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    def output_dir(self, override: Optional[str] = None) -> Path:
        if override:
            return Path(override)
        env = os.environ.get("GPG_OUTPUT_DIR")
        if env:
            return Path(env)
        return Path(self.output["dir"])


def parse_config(raw: dict) -> ToolkitConfig:
    _strict(raw, _TOP, "config")
    if raw.get("schema") != SCHEMA_VERSION:
        raise ConfigError(f"config needs \"schema\": {SCHEMA_VERSION}")
    if "graph" not in raw:
        raise ConfigError("config needs a graph")
    gspec = raw["graph"]
    _strict(gspec, {"vertices", "edges"}, "graph")
    try:
        graph = SimplicialGraph(gspec.get("vertices", []), [tuple(e) for e in gspec.get("edges", [])])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    vg = raw.get("vertex_groups", {})
    _strict(vg, graph.vertices, "vertex_groups")
    missing = [v for v in graph.vertices if v not in vg]
    if missing:
        raise ConfigError(f"no vertex group spec for {missing}")
    try:
        groups = {v: group_from_spec(vg[v]) for v in graph.vertices}
    except GraphProdError as exc:
        raise ConfigError(str(exc)) from None
    gp = GraphProduct(graph, groups)

    budgets = dict(_BUDGETS)
    b = raw.get("budgets", {})
    _strict(b, _BUDGETS, "budgets")
    budgets.update(b)
    for k, v in budgets.items():
        if not isinstance(v, int) or isinstance(v, bool) or (k != "seed" and v <= 0):
            raise ConfigError(f"budget {k} must be a positive integer")

    th = dict(_THRESHOLDS)
    t = raw.get("thresholds", {})
    _strict(t, _THRESHOLDS, "thresholds")
    th.update(t)
    try:
        thresholds = Thresholds(cap=int(th["cap"]), slope=Fraction(str(th["slope"])), factor=int(th["factor"]))
        slacks = [int(s) for s in th["slacks"]]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad thresholds: {exc}") from None

    out = dict(_OUTPUT)
    o = raw.get("output", {})
    _strict(o, _OUTPUT, "output")
    out.update(o)
    return ToolkitConfig(raw, graph, gp, budgets, thresholds, slacks, out)


def load_config(path) -> ToolkitConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return parse_config(raw)


def raag_config(vertices, edges, kinds: Optional[dict] = None) -> dict:
    """Config dict for a graph product (all vertex groups Z unless ``kinds``)."""
    kinds = kinds or {}
    return {"schema": SCHEMA_VERSION,
            "graph": {"vertices": list(vertices), "edges": [list(e) for e in edges]},
            "vertex_groups": {v: kinds.get(v, {"kind": "Z"}) for v in vertices}}
