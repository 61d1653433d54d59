"""Solvers for the maximum weighted bimodal subgraph problem on plane digraphs."""

from .plane import (
    Instance,
    PlaneDigraph,
    Solution,
    decode_instance,
    encode_instance,
    make_solution,
)

__all__ = [
    "Instance",
    "PlaneDigraph",
    "Solution",
    "decode_instance",
    "encode_instance",
    "make_solution",
]
