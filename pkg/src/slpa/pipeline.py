"""One-call detection: evolve memories, then post-process them."""
from __future__ import annotations

from .core import DEFAULT_ITERATIONS, RunConfig, evolve
from .graph import Graph
from .postprocess import Detection, detect


def slpa(
    graph: Graph,
    T: int = DEFAULT_ITERATIONS,
    r=0.1,
    seed: int = 0,
    keep_subsets: bool = False,
    disjoint: bool = False,
) -> Detection:
    """Detect (possibly overlapping) communities with one seeded run."""
    memories = evolve(graph, RunConfig(T, seed))
    return detect(graph, memories, r, keep_subsets=keep_subsets, disjoint=disjoint)
