"""Turn label memories into crisp communities, and nested-hierarchy tools."""
from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import LabelMemory, Memories
from .errors import ParameterError
from .graph import AttributeTable, Cover, Graph, TextSource, open_text

# r sweep used in experiments: 0.01, 0.02, ..., 0.10
DEFAULT_R_SWEEP = tuple(round(0.01 * k, 2) for k in range(1, 11))
HALF = Fraction(1, 2)


@dataclass(frozen=True)
class Threshold:
    """Post-processing cutoff.

    ``r`` in ``[0, 1/2]``. At ``r == 1/2`` (or with ``disjoint=True``, which
    also admits ``r > 1/2``) exactly one label per node survives.
    """

    r: Fraction
    disjoint: bool = False

    def __init__(self, r, disjoint: bool = False):
        fr = _as_fraction(r)
        if fr < 0:
            raise ParameterError(f"threshold must be non-negative, got {r}")
        if fr > HALF and not disjoint:
            raise ParameterError(f"threshold {r} exceeds 0.5; pass disjoint=True for single-label output")
        object.__setattr__(self, "r", fr)
        object.__setattr__(self, "disjoint", disjoint or fr >= HALF)


def _as_fraction(r) -> Fraction:
    if isinstance(r, Threshold):
        return r.r
    if isinstance(r, float):
        # decimal intent: 0.3 means 3/10, not the nearest binary double
        return Fraction(repr(r))
    return Fraction(r)


def membership_distribution(memory: LabelMemory) -> dict[int, Fraction]:
    total = sum(memory.values())
    return {lab: Fraction(c, total) for lab, c in sorted(memory.items())}


def apply_threshold(memories: Memories, r, disjoint: bool = False) -> list[list[int]]:
    """Per node, the labels whose memory frequency is at least ``r``.

    A node whose labels all fall below ``r`` keeps its most frequent label
    (smallest id on ties); disjoint mode always keeps just that label.
    """
    th = r if isinstance(r, Threshold) else Threshold(r, disjoint)
    num, den = th.r.numerator, th.r.denominator
    out = []
    for i in range(len(memories)):
        labels, counts = memories.counts(i)
        top = [int(labels[np.argmax(counts)])]
        if th.disjoint:
            out.append(top)
            continue
        # smallest count with count / total >= r, in exact integers
        need = -(-num * int(memories.sizes[i]) // den)
        keep = labels[counts >= need]
        out.append(keep.tolist() if len(keep) else top)
    return out


def group_connected(
    graph: Graph, label_sets: Sequence[Sequence[int]], with_labels: bool = False
):
    """Split each label's carriers into connected components; one community each.

    Communities are ordered by label, then by smallest member. A node set
    produced by several labels is kept once, reported under the smallest
    label. With ``with_labels`` returns ``(cover, labels)``.
    """
    carriers: dict[int, list[int]] = defaultdict(list)
    for node, labs in enumerate(label_sets):
        if not len(labs):
            raise ValueError(f"node {node} has no label")
        for lab in labs:
            carriers[int(lab)].append(node)

    seen: dict[frozenset[int], int] = {}
    indptr, indices = graph.indptr, graph.indices
    for lab in sorted(carriers):
        members = set(carriers[lab])
        unvisited = set(members)
        for start in carriers[lab]:
            if start not in unvisited:
                continue
            unvisited.discard(start)
            comp = [start]
            queue = deque([start])
            while queue:
                u = queue.popleft()
                for v in indices[indptr[u]:indptr[u + 1]].tolist():
                    if v in unvisited:
                        unvisited.discard(v)
                        comp.append(v)
                        queue.append(v)
            seen.setdefault(frozenset(comp), lab)
    cover = Cover(tuple(seen))
    return (cover, tuple(seen.values())) if with_labels else cover


def prune_subsets(cover: Cover) -> Cover:
    """Drop every community contained in another one."""
    by_node: dict[int, list[int]] = defaultdict(list)
    for k, c in enumerate(cover):
        for v in c:
            by_node[v].append(k)
    comms = cover.communities
    keep = []
    for k, c in enumerate(comms):
        pivot = min(c, key=lambda v: len(by_node[v]))
        if not any(len(comms[j]) > len(c) and c < comms[j] for j in by_node[pivot]):
            keep.append(c)
    return Cover(tuple(keep))


@dataclass(frozen=True)
class Detection:
    cover: Cover
    labels: tuple[int, ...]

    def overlap_counts(self, n: int) -> dict[int, int]:
        counts = self.cover.membership_counts(n)
        return {int(i): int(counts[i]) for i in np.flatnonzero(counts > 1)}


def detect(
    graph: Graph, memories: Memories, r, keep_subsets: bool = False, disjoint: bool = False
) -> Detection:
    """Threshold, group and (unless ``keep_subsets``) prune subset communities."""
    cover, labels = group_connected(graph, apply_threshold(memories, r, disjoint), with_labels=True)
    if not keep_subsets:
        pruned = prune_subsets(cover)
        label_of = dict(zip(cover.communities, labels))
        cover, labels = pruned, tuple(label_of[c] for c in pruned)
    return Detection(cover, labels)


def write_overlap_report(cover: Cover, graph: Graph, dest: TextSource) -> None:
    counts = cover.membership_counts(graph.n)
    with open_text(dest, "w") as fh:
        for i in np.flatnonzero(counts >= 2):
            fh.write(f"{graph.names[i]} {counts[i]}\n")


@dataclass(frozen=True)
class ContainmentForest:
    """Communities linked to their minimal strict supersets.

    ``parent[k]`` is the index of community ``k``'s parent or ``None``;
    ``ambiguous`` lists communities that had more than one minimal superset.
    """

    cover: Cover
    parent: tuple[int | None, ...]
    ambiguous: tuple[int, ...] = ()

    def roots(self) -> list[int]:
        return [k for k, p in enumerate(self.parent) if p is None]

    def children(self, k: int) -> list[int]:
        return [j for j, p in enumerate(self.parent) if p == k]

    def depth(self, k: int) -> int:
        d = 0
        while self.parent[k] is not None:
            k = self.parent[k]
            d += 1
        return d

    def height(self) -> int:
        return 1 + max((self.depth(k) for k in range(len(self.parent))), default=-1)

    def path(self, k: int) -> list[int]:
        chain = [k]
        while self.parent[chain[-1]] is not None:
            chain.append(self.parent[chain[-1]])
        return chain[::-1]


def containment_forest(cover: Cover) -> ContainmentForest:
    comms = cover.communities
    parents: list[int | None] = []
    ambiguous = []
    for k, c in enumerate(comms):
        supers = [j for j, d in enumerate(comms) if c < d]
        minimal = [j for j in supers if not any(comms[i] < comms[j] for i in supers)]
        if not minimal:
            parents.append(None)
            continue
        if len(minimal) > 1:
            ambiguous.append(k)
        parents.append(min(minimal, key=lambda j: (-len(comms[j]), sorted(comms[j]))))
    return ContainmentForest(cover, tuple(parents), tuple(ambiguous))


def attribute_match(community, table: AttributeTable) -> tuple[str, float]:
    """Best-explaining attribute and its matching score.

    The score of an attribute is the largest share of members holding one
    value of it; missing values never match. Ties go to the earlier attribute.
    """
    members = list(community)
    if not members:
        raise ValueError("community must be non-empty")
    if not table.attributes:
        raise ValueError("attribute table has no attributes")
    best_name, best = table.attributes[0], Fraction(-1)
    for j, name in enumerate(table.attributes):
        tally: dict[str, int] = defaultdict(int)
        for v in members:
            value = table.values[v][j]
            if value is not None:
                tally[value] += 1
        score = Fraction(max(tally.values(), default=0), len(members))
        if score > best:
            best_name, best = name, score
    return best_name, float(best)


def format_hierarchy(forest: ContainmentForest, table: AttributeTable | None = None) -> str:
    """Indented tree, one community per line, named by its id path (``C1-25``).

    Ids are 1-based positions in the cover.
    """
    lines = []
    comms = forest.cover.communities
    kids: dict[int | None, list[int]] = defaultdict(list)
    for k, p in enumerate(forest.parent):
        kids[p].append(k)

    def emit(k: int, depth: int) -> None:
        name = "C" + "-".join(str(j + 1) for j in forest.path(k))
        line = f"{'  ' * depth}{name} size={len(comms[k])}"
        if table is not None:
            attr, score = attribute_match(comms[k], table)
            line += f" attr={attr} score={score:.2f}"
        if k in forest.ambiguous:
            line += " ambiguous-parent"
        lines.append(line)
        for j in kids[k]:
            emit(j, depth + 1)

    for root in kids[None]:
        emit(root, 0)
    return "\n".join(lines) + ("\n" if lines else "")
