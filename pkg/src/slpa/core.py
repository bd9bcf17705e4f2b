"""Speaker-listener label propagation dynamics.

Each node keeps a memory of every label it has accepted. Memories are stored
as label sequences in a preallocated ``(n, T + 1)`` array, so a speaker draws
a label with probability proportional to its count by picking a uniformly
random position in its sequence.

Random stream
-------------
One ``numpy.random.Generator`` (PCG64 seeded with the 64-bit run seed) drives
everything. Per iteration it is consumed in this fixed order:

1. ``permutation(n)``: the listening order of the sweep;
2. ``random(2 * m)``: one uniform per CSR adjacency slot; the neighbor at
   slot ``indptr[i] + k`` speaks with uniform ``speak[indptr[i] + k]`` when
   ``i`` listens;
3. ``random(n)``: one uniform per node id, used to break ties among the most
   frequent received labels when that node listens.

Isolated nodes still consume their draws but never listen. The numba kernel
and the pure Python reference path follow this protocol exactly and produce
identical memories.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from numba import njit

from .errors import ParameterError, ParseError
from .graph import Graph, TextSource, open_text

LabelMemory = Counter  # label id -> positive count

DEFAULT_ITERATIONS = 100
# Outputs are empirically stable once T exceeds this.
STABLE_ITERATIONS = 20


@dataclass(frozen=True)
class RunConfig:
    T: int = DEFAULT_ITERATIONS
    seed: int = 0

    def __post_init__(self):
        if int(self.T) != self.T or self.T < 1:
            raise ParameterError(f"T must be a positive integer, got {self.T!r}")
        if not 0 <= self.seed < 2**64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")


class Memories:
    """Label memories of all nodes.

    ``labels[i, :sizes[i]]`` is the sequence of labels node ``i`` has accepted,
    starting with its own id. Indexing yields a :class:`collections.Counter`.
    """

    def __init__(self, labels: np.ndarray, sizes: np.ndarray):
        self.labels = labels
        self.sizes = sizes

    def __len__(self) -> int:
        return len(self.sizes)

    def __getitem__(self, i: int) -> LabelMemory:
        return Counter(self.labels[i, : self.sizes[i]].tolist())

    def __iter__(self) -> Iterator[LabelMemory]:
        return (self[i] for i in range(len(self)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Memories):
            return NotImplemented
        return list(self) == list(other)

    def total(self, i: int) -> int:
        return int(self.sizes[i])

    def counts(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(labels, counts)`` for node ``i`` with labels ascending."""
        return np.unique(self.labels[i, : self.sizes[i]], return_counts=True)

    @classmethod
    def from_counters(cls, counters: Sequence[LabelMemory]) -> "Memories":
        cap = max((sum(c.values()) for c in counters), default=1)
        labels = np.zeros((len(counters), max(cap, 1)), dtype=np.int32)
        sizes = np.zeros(len(counters), dtype=np.int32)
        for i, c in enumerate(counters):
            seq = [lab for lab in sorted(c) for _ in range(c[lab])]
            if not seq:
                raise ValueError(f"memory of node {i} is empty")
            labels[i, : len(seq)] = seq
            sizes[i] = len(seq)
        return cls(labels, sizes)


def initialize(graph: Graph, capacity: int = 1) -> Memories:
    """Give every node a memory holding only its own id."""
    labels = np.zeros((graph.n, capacity), dtype=np.int32)
    labels[:, 0] = np.arange(graph.n, dtype=np.int32)
    return Memories(labels, np.ones(graph.n, dtype=np.int32))


def speaker_choice(memory: LabelMemory, rng: np.random.Generator):
    """Draw a label with probability proportional to its count in ``memory``."""
    if not memory:
        raise AssertionError("speaker memory is empty")
    labels = sorted(memory)
    cum = np.cumsum([memory[lab] for lab in labels])
    k = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    return labels[min(k, len(labels) - 1)]


def _most_popular(received: Sequence, u: float):
    counts = Counter(received)
    top = max(counts.values())
    tied = sorted(lab for lab, c in counts.items() if c == top)
    return tied[min(int(u * len(tied)), len(tied) - 1)]


def listener_choice(received: Sequence, rng: np.random.Generator):
    """Return the most frequent label in ``received``; ties broken uniformly."""
    if len(received) == 0:
        raise ValueError("a listener needs at least one received label")
    return _most_popular(received, rng.random())


@njit(cache=True, nogil=True)
def _sweep(indptr, indices, labels, sizes, order, speak, ties, buf, tied):
    for pos in range(order.shape[0]):
        i = order[pos]
        start = indptr[i]
        deg = indptr[i + 1] - start
        if deg == 0:
            continue
        for k in range(deg):
            j = indices[start + k]
            s = sizes[j]
            idx = int(speak[start + k] * s)
            if idx >= s:
                idx = s - 1
            buf[k] = labels[j, idx]
        received = buf[:deg]
        received.sort()
        best = 0
        ntied = 0
        run = 1
        for k in range(1, deg + 1):
            if k < deg and received[k] == received[k - 1]:
                run += 1
                continue
            if run > best:
                best = run
                ntied = 0
            if run == best:
                tied[ntied] = received[k - 1]
                ntied += 1
            run = 1
        pick = int(ties[i] * ntied)
        if pick >= ntied:
            pick = ntied - 1
        labels[i, sizes[i]] = tied[pick]
        sizes[i] += 1


def _draws(rng: np.random.Generator, n: int, slots: int):
    order = rng.permutation(n)
    speak = rng.random(slots)
    ties = rng.random(n)
    return order, speak, ties


def evolve(graph: Graph, config: RunConfig, backend: str = "numba") -> Memories:
    """Run ``config.T`` listening sweeps and return the final memories.

    ``backend="python"`` runs the pure Python reference implementation of the
    same random-stream protocol; it is slow and meant for cross-checking.
    """
    T = config.T
    mem = initialize(graph, capacity=T + 1)
    rng = np.random.default_rng(config.seed)
    n, slots = graph.n, len(graph.indices)
    if backend == "numba":
        maxdeg = int(graph.degrees.max()) if n else 0
        buf = np.empty(max(maxdeg, 1), dtype=np.int32)
        tied = np.empty(max(maxdeg, 1), dtype=np.int32)
        for _ in range(T):
            order, speak, ties = _draws(rng, n, slots)
            _sweep(graph.indptr, graph.indices, mem.labels, mem.sizes, order, speak, ties, buf, tied)
    elif backend == "python":
        _evolve_python(graph, T, rng, mem)
    else:
        raise ParameterError(f"unknown backend {backend!r}")
    return mem


def _evolve_python(graph: Graph, T: int, rng: np.random.Generator, mem: Memories) -> None:
    seqs = [[i] for i in range(graph.n)]
    indptr = graph.indptr.tolist()
    indices = graph.indices.tolist()
    for _ in range(T):
        order, speak, ties = _draws(rng, graph.n, len(indices))
        for i in order.tolist():
            start, end = indptr[i], indptr[i + 1]
            if start == end:
                continue
            received = []
            for slot in range(start, end):
                seq = seqs[indices[slot]]
                received.append(seq[min(int(speak[slot] * len(seq)), len(seq) - 1)])
            seqs[i].append(_most_popular(received, ties[i]))
    for i, seq in enumerate(seqs):
        mem.labels[i, : len(seq)] = seq
        mem.sizes[i] = len(seq)


def write_memories(memories: Memories, graph: Graph, dest: TextSource) -> None:
    """Write ``node_name label:count ...`` lines; labels are origin node names."""
    with open_text(dest, "w") as fh:
        for i in range(len(memories)):
            labels, counts = memories.counts(i)
            pairs = " ".join(f"{graph.names[lab]}:{c}" for lab, c in zip(labels, counts))
            fh.write(f"{graph.names[i]} {pairs}\n")


def read_memories(source: TextSource, graph: Graph) -> Memories:
    counters: list[LabelMemory | None] = [None] * graph.n
    with open_text(source) as fh:
        for lineno, raw in enumerate(fh, 1):
            parts = raw.split()
            if not parts or parts[0].startswith("#"):
                continue
            if len(parts) < 2:
                raise ParseError("memory line needs at least one label:count pair", lineno)
            node = graph.id_of(parts[0])
            c: LabelMemory = Counter()
            for tok in parts[1:]:
                name, sep, count = tok.rpartition(":")
                if not sep or not count.isdigit() or int(count) < 1:
                    raise ParseError(f"bad label:count token {tok!r}", lineno)
                c[graph.id_of(name)] += int(count)
            counters[node] = c
    missing = [graph.names[i] for i, c in enumerate(counters) if c is None]
    if missing:
        raise ParseError(f"no memory for {len(missing)} nodes, e.g. {missing[0]!r}")
    return Memories.from_counters(counters)
