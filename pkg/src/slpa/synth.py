"""Seeded synthetic graphs with planted overlapping communities."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError
from .graph import Cover, Graph


@dataclass(frozen=True)
class PlantedConfig:
    """Planted-partition-with-overlap parameters.

    ``overlapping`` nodes join ``memberships`` communities each, every other
    node joins one, so ``sum(community_sizes)`` must equal
    ``n + overlapping * (memberships - 1)``. ``mu`` is the expected fraction
    of a node's edges that leave all of its communities.
    """

    n: int
    community_sizes: Sequence[int]
    overlapping: int = 0
    memberships: int = 2
    p_in: float = 0.3
    mu: float = 0.1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "community_sizes", tuple(int(s) for s in self.community_sizes))
        sizes = self.community_sizes
        if self.n < 1:
            raise ConfigurationError("n must be positive")
        if not 0 <= self.overlapping <= self.n:
            raise ConfigurationError("overlapping node count must lie in [0, n]")
        if self.memberships < 2:
            raise ConfigurationError("overlapping nodes need at least 2 memberships")
        if not sizes or min(sizes) < 1:
            raise ConfigurationError("community sizes must be positive")
        expected = self.n + self.overlapping * (self.memberships - 1)
        if sum(sizes) != expected:
            raise ConfigurationError(
                f"community sizes sum to {sum(sizes)}, expected n + O_n * (O_m - 1) = {expected}"
            )
        if self.overlapping:
            # an O_n x K 0/1 matrix with row sums O_m fits under column caps iff this holds
            room = sum(min(s, self.overlapping) for s in sizes)
            if len(sizes) < self.memberships or room < self.overlapping * self.memberships:
                raise ConfigurationError("community sizes cannot host the requested overlap")
        if not 0 <= self.mu < 1:
            raise ConfigurationError("mu must lie in [0, 1)")
        if not 0 < self.p_in <= 1:
            raise ConfigurationError("p_in must lie in (0, 1]")


def _assign(config: PlantedConfig, rng: np.random.Generator) -> list[list[int]]:
    sizes = config.community_sizes
    cap = np.array(sizes, dtype=np.int64)
    members: list[list[int]] = [[] for _ in sizes]
    nodes = rng.permutation(config.n)
    overlap, single = nodes[: config.overlapping], nodes[config.overlapping:]
    for v in overlap:
        # largest remaining capacity first keeps the assignment feasible
        jitter = rng.random(len(cap))
        chosen = np.lexsort((jitter, -cap))[: config.memberships]
        for k in chosen:
            members[k].append(int(v))
            cap[k] -= 1
    slots = np.repeat(np.arange(len(cap)), cap)
    rng.shuffle(slots)
    for v, k in zip(single, slots):
        members[k].append(int(v))
    return [sorted(m) for m in members]


def planted_cover_graph(config: PlantedConfig) -> tuple[Graph, Cover]:
    """Generate a graph and the exact planted cover it was built from.

    Within each community every pair is linked with probability ``p_in``.
    Then ``mu / (1 - mu)`` times as many edges as there are internal ones
    are added between pairs sharing no community, with endpoints drawn
    proportionally to internal degree so each node's expected outside
    fraction is ``mu``.
    """
    rng = np.random.default_rng(config.seed)
    n = config.n
    members = _assign(config, rng)

    edges: set[tuple[int, int]] = set()
    for comm in members:
        arr = np.asarray(comm)
        iu, ju = np.triu_indices(len(arr), k=1)
        hit = rng.random(len(iu)) < config.p_in
        edges.update(zip(arr[iu[hit]].tolist(), arr[ju[hit]].tolist()))

    groups: list[set[int]] = [set() for _ in range(n)]
    for k, comm in enumerate(members):
        for v in comm:
            groups[v].add(k)

    internal = len(edges)
    target = int(round(config.mu / (1.0 - config.mu) * internal))
    if target:
        kin = np.zeros(n)
        for u, v in edges:
            kin[u] += 1
            kin[v] += 1
        weights = kin / kin.sum()
        added, attempts = 0, 0
        limit = 200 * target + 10_000
        while added < target:
            if attempts > limit:
                raise ConfigurationError(f"could only place {added} of {target} inter-community edges")
            batch = max(2 * (target - added), 64)
            us = rng.choice(n, size=batch, p=weights)
            vs = rng.choice(n, size=batch, p=weights)
            for u, v in zip(us.tolist(), vs.tolist()):
                attempts += 1
                if u == v or groups[u] & groups[v]:
                    continue
                e = (u, v) if u < v else (v, u)
                if e in edges:
                    continue
                edges.add(e)
                added += 1
                if added == target:
                    break

    graph = Graph.from_edges(sorted(edges), n=n)
    return graph, Cover.from_sets(members)


def outside_fraction(graph: Graph, cover: Cover) -> np.ndarray:
    """Per node, the share of its edges to nodes sharing none of its communities.

    Isolated nodes get ``nan``.
    """
    groups: list[set[int]] = [set() for _ in range(graph.n)]
    for k, c in enumerate(cover):
        for v in c:
            groups[v].add(k)
    out = np.full(graph.n, np.nan)
    for u in range(graph.n):
        nbrs = graph.neighbors(u)
        if len(nbrs):
            out[u] = sum(1 for v in nbrs.tolist() if not groups[u] & groups[v]) / len(nbrs)
    return out


def homogeneous_random_graph(n: int, mean_degree: float, seed: int = 0) -> Graph:
    """Uniform simple graph with ``round(n * mean_degree / 2)`` distinct edges."""
    m = int(round(n * mean_degree / 2))
    total = n * (n - 1) // 2
    if m > total:
        raise ConfigurationError(f"{m} edges do not fit in a simple graph on {n} nodes")
    rng = np.random.default_rng(seed)
    if m > total // 2:
        iu, ju = np.triu_indices(n, k=1)
        pick = np.sort(rng.choice(total, size=m, replace=False))
        return Graph.from_edges(np.column_stack([iu[pick], ju[pick]]), n=n)
    keys = np.zeros(0, dtype=np.int64)
    while len(keys) < m:
        batch = int((m - len(keys)) * 1.1) + 16
        u = rng.integers(0, n, size=batch)
        v = rng.integers(0, n, size=batch)
        ok = u != v
        lo, hi = np.minimum(u, v)[ok], np.maximum(u, v)[ok]
        fresh = np.concatenate([keys, lo * n + hi])
        _, first = np.unique(fresh, return_index=True)
        keys = fresh[np.sort(first)]
    keys = keys[:m]
    return Graph.from_edges(np.column_stack([keys // n, keys % n]), n=n)


def power_law_sizes(
    total: int, low: int, high: int, exponent: float = 1.0, seed: int = 0
) -> list[int]:
    """Community sizes from a truncated power law ``P(s) ~ s^-exponent`` summing to ``total``.

    The last size is adjusted (and merged into a neighbor if too small) so
    the sum is exact.
    """
    if total < low or low < 1 or high < low:
        raise ConfigurationError("need 1 <= low <= high and total >= low")
    rng = np.random.default_rng(seed)
    support = np.arange(low, high + 1)
    p = support.astype(float) ** -exponent
    p /= p.sum()
    sizes: list[int] = []
    remaining = total
    while remaining > 0:
        s = int(rng.choice(support, p=p))
        if s >= remaining or remaining - s < low:
            s = remaining
        sizes.append(s)
        remaining -= s
    if sizes[-1] > high and len(sizes) > 1:
        extra = sizes.pop()
        for k in range(extra):
            sizes[k % len(sizes)] += 1
    return sizes
