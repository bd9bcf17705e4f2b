"""Graph data model, text loaders and bipartite projection.

Node names are arbitrary whitespace-free tokens. Internally every node has a
contiguous id in ``[0, n)`` assigned in order of first appearance, and the
adjacency is stored in CSR form (``indptr``/``indices``) with each neighbor
list sorted ascending.
"""
from __future__ import annotations

import contextlib
import csv
import io
import logging
import os
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence, TextIO, Union

import numpy as np
import scipy.sparse as sp

from .errors import ParseError, ResolutionError, StructuralError

logger = logging.getLogger(__name__)

TextSource = Union[str, os.PathLike, TextIO]


@contextlib.contextmanager
def open_text(source: TextSource, mode: str = "r"):
    """Yield a text stream for a path or pass an already open stream through."""
    if hasattr(source, "read") or hasattr(source, "write"):
        yield source
    else:
        with open(source, mode, encoding="utf-8", newline="" if "w" in mode else None) as fh:
            yield fh


@dataclass(frozen=True)
class LoadSummary:
    lines: int = 0
    edges: int = 0
    duplicate_edges: int = 0
    self_loops: int = 0


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph.

    Use :meth:`from_edges` or :func:`load_edge_list` rather than the raw
    constructor; they normalize the edge set and build the CSR arrays.
    """

    indptr: np.ndarray
    indices: np.ndarray
    names: tuple[str, ...]
    side: np.ndarray | None = None
    load_summary: LoadSummary | None = field(default=None, compare=False)

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple[int, int]],
        n: int | None = None,
        names: Sequence[str] | None = None,
        side: Sequence[int] | None = None,
    ) -> "Graph":
        """Build a graph from integer edge pairs.

        Self-loops and repeated edges are dropped. ``names`` defaults to the
        decimal ids. When ``side`` is given every edge must join side 1 to
        side 2.
        """
        edge_arr = np.asarray(edges if isinstance(edges, np.ndarray) else list(edges), dtype=np.int64)
        edge_arr = edge_arr.reshape(-1, 2)
        if n is None:
            n = len(names) if names is not None else (int(edge_arr.max()) + 1 if len(edge_arr) else 0)
        if names is None:
            names = [str(i) for i in range(n)]
        if len(names) != n:
            raise ValueError(f"expected {n} names, got {len(names)}")
        if len(edge_arr) and (edge_arr.min() < 0 or edge_arr.max() >= n):
            raise ValueError("edge endpoint out of range")

        loops = edge_arr[:, 0] == edge_arr[:, 1]
        n_loops = int(loops.sum())
        edge_arr = edge_arr[~loops]
        edge_arr = np.sort(edge_arr, axis=1)
        unique = np.unique(edge_arr, axis=0) if len(edge_arr) else edge_arr
        n_dup = len(edge_arr) - len(unique)

        side_arr = None
        if side is not None:
            side_arr = np.asarray(side, dtype=np.int8)
            if side_arr.shape != (n,) or not np.isin(side_arr, (1, 2)).all():
                raise ValueError("side must hold one tag in {1, 2} per node")
            bad = side_arr[unique[:, 0]] == side_arr[unique[:, 1]] if len(unique) else np.zeros(0, bool)
            if bad.any():
                u, v = unique[np.argmax(bad)]
                raise StructuralError(f"edge {names[u]} {names[v]} joins two nodes of the same side")
            side_arr.setflags(write=False)

        indptr, indices = _csr(n, unique)
        summary = LoadSummary(edges=len(unique), duplicate_edges=n_dup, self_loops=n_loops)
        return cls(indptr, indices, tuple(str(x) for x in names), side_arr, summary)

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def m(self) -> int:
        return len(self.indices) // 2

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.diff(self.indptr)
        deg.setflags(write=False)
        return deg

    @property
    def mean_degree(self) -> float:
        return 2.0 * self.m / self.n if self.n else 0.0

    @cached_property
    def ids(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.names)}

    def id_of(self, name: str) -> int:
        try:
            return self.ids[name]
        except KeyError:
            raise ResolutionError(f"unknown node name {name!r}") from None

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def edges(self) -> Iterator[tuple[int, int]]:
        """Yield each undirected edge once as ``(u, v)`` with ``u < v``."""
        for u in range(self.n):
            for v in self.neighbors(u):
                if u < v:
                    yield u, int(v)

    def edge_array(self) -> np.ndarray:
        src = np.repeat(np.arange(self.n), self.degrees)
        keep = src < self.indices
        return np.column_stack([src[keep], self.indices[keep]]).astype(np.int64)

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.neighbors(u)
        k = np.searchsorted(nbrs, v)
        return bool(k < len(nbrs) and nbrs[k] == v)

    def subgraph_nodes(self, tag: int) -> np.ndarray:
        if self.side is None:
            raise StructuralError("graph is not side-tagged")
        return np.flatnonzero(self.side == tag)

    def __repr__(self) -> str:
        kind = ", bipartite" if self.side is not None else ""
        return f"Graph(n={self.n}, m={self.m}{kind})"


def _csr(n: int, edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if len(edges):
        both = np.concatenate([edges, edges[:, ::-1]])
        order = np.lexsort((both[:, 1], both[:, 0]))
        both = both[order]
        counts = np.bincount(both[:, 0], minlength=n)
        indices = both[:, 1].astype(np.int32)
    else:
        counts = np.zeros(n, dtype=np.int64)
        indices = np.zeros(0, dtype=np.int32)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    indptr.setflags(write=False)
    indices.setflags(write=False)
    return indptr, indices


def two_color(n: int, indptr: np.ndarray, indices: np.ndarray, names: Sequence[str]) -> np.ndarray:
    """Return side tags (1/2) for a bipartite graph, or raise naming an odd-cycle edge."""
    side = np.zeros(n, dtype=np.int8)
    for root in range(n):
        if side[root]:
            continue
        side[root] = 1
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in indices[indptr[u]:indptr[u + 1]]:
                if not side[v]:
                    side[v] = 3 - side[u]
                    queue.append(v)
                elif side[v] == side[u]:
                    raise StructuralError(
                        f"graph is not bipartite: edge {names[u]} {names[v]} closes an odd cycle"
                    )
    return side


def load_edge_list(source: TextSource, bipartite: bool = False) -> Graph:
    """Read a whitespace separated edge list.

    Blank lines and lines starting with ``#`` are skipped. A line naming the
    same node twice declares that node (the self-loop itself is dropped),
    which is how isolated nodes survive a write/read round trip.
    """
    ids: dict[str, int] = {}
    pairs: list[tuple[int, int]] = []
    lines = 0
    with open_text(source) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(f"expected two node names, got {len(parts)} fields", lineno)
            lines += 1
            u = ids.setdefault(parts[0], len(ids))
            v = ids.setdefault(parts[1], len(ids))
            pairs.append((u, v))

    names = list(ids)
    g = Graph.from_edges(pairs, n=len(names), names=names)
    summary = LoadSummary(lines, g.m, g.load_summary.duplicate_edges, g.load_summary.self_loops)
    side = two_color(g.n, g.indptr, g.indices, g.names) if bipartite else None
    if side is not None:
        side.setflags(write=False)
    if summary.duplicate_edges or summary.self_loops:
        logger.info(
            "dropped %d duplicate edges and %d self-loops", summary.duplicate_edges, summary.self_loops
        )
    return Graph(g.indptr, g.indices, g.names, side, summary)


def write_edge_list(graph: Graph, dest: TextSource) -> None:
    """Write one ``name1 name2`` line per edge; isolated nodes as ``name name``."""
    with open_text(dest, "w") as fh:
        for u in range(graph.n):
            if graph.degrees[u] == 0:
                fh.write(f"{graph.names[u]} {graph.names[u]}\n")
        for u, v in graph.edges():
            fh.write(f"{graph.names[u]} {graph.names[v]}\n")


def project_bipartite(graph: Graph, side: int) -> Graph:
    """One-mode projection onto the nodes tagged ``side``.

    Two kept nodes are adjacent iff they share at least one neighbor. Node
    order and names follow the input graph; isolated nodes are kept.
    """
    if graph.side is None:
        raise StructuralError("projection requires a side-tagged bipartite graph")
    if side not in (1, 2):
        raise ValueError("side must be 1 or 2")
    keep = graph.subgraph_nodes(side)
    other = graph.subgraph_nodes(3 - side)
    adj = sp.csr_matrix(
        (np.ones(len(graph.indices), dtype=np.int32), graph.indices, graph.indptr),
        shape=(graph.n, graph.n),
    )
    bi = adj[keep][:, other]
    shared = sp.triu(bi @ bi.T, k=1).tocoo()
    edges = np.column_stack([shared.row, shared.col])
    names = [graph.names[i] for i in keep]
    return Graph.from_edges(edges, n=len(keep), names=names)


@dataclass(frozen=True)
class Cover:
    """A collection of distinct non-empty communities of node ids."""

    communities: tuple[frozenset[int], ...]

    def __post_init__(self):
        seen = set()
        for c in self.communities:
            if not c:
                raise ValueError("communities must be non-empty")
            if c in seen:
                raise ValueError("duplicate community; use Cover.from_sets to deduplicate")
            seen.add(c)

    @classmethod
    def from_sets(cls, sets: Iterable[Iterable[int]]) -> "Cover":
        """Build a cover keeping the first occurrence of each distinct set."""
        out: dict[frozenset[int], None] = {}
        for s in sets:
            fs = frozenset(int(x) for x in s)
            if not fs:
                raise ValueError("communities must be non-empty")
            out.setdefault(fs, None)
        return cls(tuple(out))

    def __len__(self) -> int:
        return len(self.communities)

    def __iter__(self) -> Iterator[frozenset[int]]:
        return iter(self.communities)

    def nodes(self) -> set[int]:
        return set().union(*self.communities) if self.communities else set()

    def membership_counts(self, n: int) -> np.ndarray:
        counts = np.zeros(n, dtype=np.int64)
        for c in self.communities:
            counts[list(c)] += 1
        return counts

    def overlapping_nodes(self, n: int) -> np.ndarray:
        return np.flatnonzero(self.membership_counts(n) > 1)

    def sizes(self) -> list[int]:
        return [len(c) for c in self.communities]

    def is_partition_of(self, n: int) -> bool:
        return bool((self.membership_counts(n) == 1).all())

    def restrict(self, nodes: Sequence[int]) -> "Cover":
        """Intersect each community with ``nodes`` and relabel to positions in ``nodes``."""
        pos = {int(v): k for k, v in enumerate(nodes)}
        parts = ([pos[v] for v in c if v in pos] for c in self.communities)
        return Cover.from_sets(p for p in parts if p)


def load_cover_file(source: TextSource, graph: Graph) -> Cover:
    sets = []
    with open_text(source) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if line.startswith("#"):
                continue
            if not line:
                raise ParseError("empty community line", lineno)
            try:
                sets.append([graph.id_of(name) for name in line.split()])
            except ResolutionError as exc:
                raise ResolutionError(f"line {lineno}: {exc}") from None
    return Cover.from_sets(sets)


def write_cover(cover: Cover, graph: Graph, dest: TextSource) -> None:
    with open_text(dest, "w") as fh:
        for c in cover:
            fh.write(" ".join(graph.names[i] for i in sorted(c)) + "\n")


@dataclass(frozen=True)
class AttributeTable:
    """Per-node categorical attributes; ``None`` marks a missing value."""

    attributes: tuple[str, ...]
    values: tuple[tuple[str | None, ...], ...]

    def __post_init__(self):
        k = len(self.attributes)
        for row in self.values:
            if len(row) != k:
                raise ValueError("every row needs one value per attribute")

    def column(self, name: str) -> tuple[str | None, ...]:
        j = self.attributes.index(name)
        return tuple(row[j] for row in self.values)


def load_attribute_table(source: TextSource, graph: Graph) -> AttributeTable:
    """Read ``node,attr1,attr2,...`` CSV rows aligned to the graph's ids.

    Empty cells and nodes absent from the file are missing. Rows naming nodes
    that are not in the graph are skipped with a warning.
    """
    with open_text(source) as fh:
        text = fh.read()
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if not header or len(header) < 2:
        raise ParseError("header must name the node column and at least one attribute", 1)
    attrs = tuple(h.strip() for h in header[1:])
    rows: list[list[str | None]] = [[None] * len(attrs) for _ in range(graph.n)]
    unknown = 0
    for rowno, row in enumerate(reader, 2):
        if not row or not any(cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", rowno)
        name = row[0].strip()
        if name not in graph.ids:
            unknown += 1
            continue
        rows[graph.ids[name]] = [cell.strip() or None for cell in row[1:]]
    if unknown:
        logger.warning("skipped %d attribute rows for nodes not in the graph", unknown)
    return AttributeTable(attrs, tuple(tuple(r) for r in rows))
