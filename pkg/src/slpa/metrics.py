"""Cover comparison and quality measures.

* :func:`extended_nmi`: the overlapping NMI of Lancichinetti, Fortunato and
  Kertész (2009), built from per-community binary membership variables.
* :func:`omega_index`: Collins and Dent's chance-corrected pair agreement.
* :func:`overlap_fscore`: overlapping-node detection as binary classification.
* :func:`overlapping_modularity`: Nicosia et al.'s overlapping modularity.
* :func:`ranking_score`: weighted average rank across benchmark settings.
"""
from __future__ import annotations

import csv
import io
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ParameterError
from .graph import Cover, Graph

NMI_VARIANT = "lfk2009"
# Nicosia et al. use p = 30 for the logistic edge-belonging function.
DEFAULT_STEEPNESS = 30.0


def _pair_multiplicities(cover: Cover) -> Counter:
    pairs: Counter = Counter()
    for c in cover:
        pairs.update(combinations(sorted(c), 2))
    return pairs


def omega_index(a: Cover, b: Cover, n: int) -> float:
    """Omega index of two covers over ``n`` nodes.

    Pairs agree when both covers put them together in the same number of
    communities. Returns ``nan`` when the chance-expected agreement is 1
    (every pair has one and the same multiplicity in both covers).

    Cost is ``O(sum |c|^2)`` over both covers.
    """
    total = n * (n - 1) // 2
    pa, pb = _pair_multiplicities(a), _pair_multiplicities(b)
    union = pa.keys() | pb.keys()
    agree = total - len(union) + sum(1 for p in union if pa.get(p, 0) == pb.get(p, 0))
    dist_a = Counter(pa.values())
    dist_b = Counter(pb.values())
    dist_a[0] = total - len(pa)
    dist_b[0] = total - len(pb)
    chance = sum(cnt * dist_b.get(j, 0) for j, cnt in dist_a.items())
    denom = total * total - chance
    if denom == 0:
        return float("nan")
    return (agree * total - chance) / denom


def _membership_matrix(cover: Cover, n: int) -> sp.csr_matrix:
    rows = [v for c in cover for v in c]
    cols = [k for k, c in enumerate(cover) for _ in c]
    return sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, len(cover)))


def _h(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    nz = p > 0
    out[nz] = -p[nz] * np.log2(p[nz])
    return out


def _normalized_conditional(sx: np.ndarray, sy: np.ndarray, inter: np.ndarray, n: int) -> float:
    px, py = sx / n, sy / n
    p11 = inter / n
    p10 = (sx[:, None] - inter) / n
    p01 = (sy[None, :] - inter) / n
    p00 = (n - sx[:, None] - sy[None, :] + inter) / n
    hx = _h(px) + _h(1 - px)
    hy = _h(py) + _h(1 - py)
    h11, h10, h01, h00 = _h(p11), _h(p10), _h(p01), _h(p00)
    cond = h11 + h10 + h01 + h00 - hy[None, :]
    # only pairs closer to agreement than to anti-agreement may be matched
    admissible = h11 + h00 > h01 + h10
    best = np.where(admissible, cond, np.inf).min(axis=1, initial=np.inf)
    best = np.where(np.isfinite(best), best, hx)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(hx > 0, best / np.where(hx > 0, hx, 1.0), 0.0)
    return float(ratio.mean())


def extended_nmi(a: Cover, b: Cover, n: int) -> float:
    """Overlapping NMI (LFK 2009 variant).

    A community covering all ``n`` nodes has zero entropy and contributes a
    normalized conditional entropy of 0.
    """
    if not len(a) or not len(b):
        raise ValueError("extended NMI needs two non-empty covers")
    ma, mb = _membership_matrix(a, n), _membership_matrix(b, n)
    inter = (ma.T @ mb).toarray()
    sa = np.asarray(ma.sum(axis=0)).ravel()
    sb = np.asarray(mb.sum(axis=0)).ravel()
    h_ab = _normalized_conditional(sa, sb, inter, n)
    h_ba = _normalized_conditional(sb, sa, inter.T, n)
    return 1.0 - 0.5 * (h_ab + h_ba)


@dataclass(frozen=True)
class OverlapConfusion:
    true_positives: int
    false_positives: int
    false_negatives: int
    precision: Fraction
    recall: Fraction
    f_score: Fraction

    @property
    def detected(self) -> int:
        return self.true_positives + self.false_positives

    @property
    def actual(self) -> int:
        return self.true_positives + self.false_negatives


def confusion_from_counts(tp: int, fp: int, fn: int) -> OverlapConfusion:
    """Precision, recall and F-score from overlapping-node confusion counts.

    With no overlapping nodes on either side the detection is vacuously
    perfect (all scores 1). An empty denominator otherwise gives 0, and F is
    0 whenever precision and recall are both 0.
    """
    if min(tp, fp, fn) < 0:
        raise ParameterError("confusion counts must be non-negative")
    if tp + fp + fn == 0:
        one = Fraction(1)
        return OverlapConfusion(0, 0, 0, one, one, one)
    precision = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
    recall = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
    s = precision + recall
    f = 2 * precision * recall / s if s else Fraction(0)
    return OverlapConfusion(tp, fp, fn, precision, recall, f)


def overlap_fscore(detected: Cover, truth: Cover, n: int | None = None) -> OverlapConfusion:
    """Score detected overlapping nodes (membership > 1) against the truth."""
    if n is None:
        n = max(detected.nodes() | truth.nodes(), default=-1) + 1
    det = detected.membership_counts(n) > 1
    act = truth.membership_counts(n) > 1
    return confusion_from_counts(int((det & act).sum()), int((det & ~act).sum()), int((~det & act).sum()))


def belonging_coefficients(cover: Cover, n: int) -> sp.csr_matrix:
    """Uniform belonging: ``1 / memberships(i)`` for each community holding ``i``."""
    m = _membership_matrix(cover, n)
    counts = np.asarray(m.sum(axis=1)).ravel()
    inv = np.divide(1.0, counts, out=np.zeros_like(counts), where=counts > 0)
    return sp.csr_matrix(sp.diags(inv) @ m)


def edge_belonging_factor(alpha, steepness: float = DEFAULT_STEEPNESS):
    """Logistic factor g with F(a, b) = g(a) g(b)."""
    return 1.0 / (1.0 + np.exp(-(2.0 * steepness * np.asarray(alpha, dtype=float) - steepness)))


def overlapping_modularity(graph: Graph, cover: Cover, steepness: float = DEFAULT_STEEPNESS) -> float:
    """Nicosia's overlapping modularity of a cover on an undirected graph.

    Each undirected edge counts as two directed arcs. Returns ``nan`` for a
    graph without edges. Cost is linear in the summed volume of communities.
    """
    n, arcs = graph.n, 2 * graph.m
    if arcs == 0:
        return float("nan")
    alpha = belonging_coefficients(cover, n).tocsc()
    if (np.asarray(alpha.sum(axis=1)).ravel() == 0).any():
        raise ValueError("cover must assign every node to a community")
    deg = graph.degrees.astype(float)
    g0 = float(edge_belonging_factor(0.0, steepness))
    q = 0.0
    pos = np.full(n, -1)
    for k in range(alpha.shape[1]):
        lo, hi = alpha.indptr[k], alpha.indptr[k + 1]
        members = alpha.indices[lo:hi]
        d = edge_belonging_factor(alpha.data[lo:hi], steepness) - g0
        dk = float(d @ deg[members])
        pos[members] = np.arange(len(members))
        inner = 0.0
        for t, i in enumerate(members):
            nb = pos[graph.neighbors(i)]
            inner += d[t] * d[nb[nb >= 0]].sum()
        pos[members] = -1
        observed = g0 * g0 * arcs + 2.0 * g0 * dk + inner
        mean_g = g0 + d.sum() / n
        weighted_deg = g0 * arcs + dk
        q += observed - mean_g * mean_g * weighted_deg * weighted_deg / arcs
    return q / arcs


@dataclass(frozen=True)
class RankTable:
    """Ranks of each algorithm over benchmark settings, plus setting weights.

    ``weights`` defaults to equal weights.
    """

    ranks: Mapping[str, Sequence[int]]
    weights: Sequence[float] | None = None

    def __post_init__(self):
        lengths = {len(r) for r in self.ranks.values()}
        if len(lengths) > 1:
            raise ParameterError("every algorithm needs a rank for every setting")
        for alg, rs in self.ranks.items():
            if any(int(x) != x or x < 1 for x in rs):
                raise ParameterError(f"ranks of {alg!r} must be positive integers")
        if self.weights is not None:
            if lengths and len(self.weights) != lengths.pop():
                raise ParameterError("weight count must equal the number of settings")
            if not math.isclose(math.fsum(self.weights), 1.0, abs_tol=1e-9):
                raise ParameterError("weights must sum to 1")

    def resolved_weights(self) -> list:
        if self.weights is not None:
            return list(self.weights)
        k = len(next(iter(self.ranks.values()), ()))
        return [Fraction(1, k)] * k


def ranking_score(table: RankTable) -> dict[str, float]:
    """Weighted average rank per algorithm; lower is better."""
    w = table.resolved_weights()
    return {alg: float(sum(wj * rj for wj, rj in zip(w, rs))) for alg, rs in table.ranks.items()}


def final_ranking(scores: Mapping[str, float]) -> list[str]:
    return sorted(scores, key=lambda alg: (scores[alg], alg))


def ranks_from_scores(scores: Mapping[str, Sequence[float]], higher_is_better: bool = True) -> dict[str, list[int]]:
    """Convert per-setting metric values into competition ranks (1 = best)."""
    algs = list(scores)
    k = len(scores[algs[0]]) if algs else 0
    ranks: dict[str, list[int]] = {a: [] for a in algs}
    for j in range(k):
        vals = {a: scores[a][j] for a in algs}
        for a in algs:
            better = sum(1 for b in algs if (vals[b] > vals[a] if higher_is_better else vals[b] < vals[a]))
            ranks[a].append(better + 1)
    return ranks


def size_histogram(cover: Cover, edges: Sequence[float]) -> np.ndarray:
    """Count community sizes per bin; bins are right-open except the last."""
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or (np.diff(edges) <= 0).any():
        raise ParameterError("bin edges must be strictly increasing, at least two values")
    sizes = np.asarray(cover.sizes(), dtype=float)
    if len(sizes) and (sizes.min() < edges[0] or sizes.max() > edges[-1]):
        raise ParameterError(f"community sizes span [{sizes.min():g}, {sizes.max():g}] beyond the bins")
    counts, _ = np.histogram(sizes, bins=edges)
    return counts


def default_bins(cover: Cover) -> list[int]:
    """Bins 1, 2-5, 6-10, 11-20, 21-50, 51-100, then doubling past the largest size."""
    top = max(cover.sizes(), default=1)
    edges = [1, 2, 6, 11, 21, 51, 101]
    while edges[-1] <= top:
        edges.append(2 * edges[-1] - 1)
    cut = next(k for k, e in enumerate(edges) if e > top)
    return edges[: cut + 1]


@dataclass
class MetricReport:
    """Metric rows ``metric,value,run_id,r,T,seed`` plus free-form metadata."""

    rows: list[tuple] = field(default_factory=list)
    metadata: dict[str, str] = field(default_factory=dict)

    def add(self, metric: str, value: float, run_id="", r="", T="", seed="") -> None:
        self.rows.append((metric, float(value), run_id, r, T, seed))

    def add_summary(self) -> None:
        """Append ``mean`` and ``std`` rows per metric over the runs so far."""
        by_metric: dict[str, list[float]] = defaultdict(list)
        for metric, value, run_id, *_ in self.rows:
            if run_id not in ("mean", "std"):
                by_metric[metric].append(value)
        for metric, vals in by_metric.items():
            arr = np.asarray(vals, dtype=float)
            self.add(metric, np.nanmean(arr) if len(arr) else float("nan"), "mean")
            self.add(metric, np.nanstd(arr) if len(arr) else float("nan"), "std")

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, val in self.metadata.items():
            buf.write(f"# {key}={val}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["metric", "value", "run_id", "r", "T", "seed"])
        for metric, value, *rest in self.rows:
            w.writerow([metric, f"{value:.10g}", *rest])
        return buf.getvalue()

    def to_table(self) -> str:
        header = ("metric", "value", "run_id", "r", "T", "seed")
        body = [(m, f"{v:.4f}", *map(str, rest)) for m, v, *rest in self.rows]
        widths = [max(len(str(x)) for x in col) for col in zip(header, *body)]
        lines = ["  ".join(str(x).ljust(w) for x, w in zip(row, widths)).rstrip() for row in [header, *body]]
        meta = [f"{k}: {v}" for k, v in self.metadata.items()]
        return "\n".join(meta + lines) + "\n"
