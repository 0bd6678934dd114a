"""Graph products of groups: normal forms, parallelism classes, coned Cayley
metrics, finite relative-HHS checks and Morse/stability probes."""

__version__ = "0.1.0"

from .errors import GraphProdError
from .graph import SimplicialGraph, Subgraph, link, star
from .groups import CyclicGroup, FreeGroup, IntegerGroup, TableGroup, group_from_spec
from .words import GraphProduct, NormalForm, QGParams

__all__ = [
    "GraphProdError", "SimplicialGraph", "Subgraph", "link", "star",
    "IntegerGroup", "CyclicGroup", "FreeGroup", "TableGroup", "group_from_spec",
    "GraphProduct", "NormalForm", "QGParams",
]
