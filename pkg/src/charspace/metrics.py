"""Centrality and global-structure measures for character networks.

Betweenness and closeness interpret edge weights as tie strength and run
shortest paths over lengths 1/w.  Eigenvector centrality symmetrizes
directed graphs.  Global measures that need an undirected simple graph
(centralization, assortativity, clustering, paths, delta) use the
undirected view of directed inputs.
"""

from __future__ import annotations

import heapq
import itertools
import math
from collections import defaultdict, deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError
from .networks import CharGraph

@dataclass(frozen=True)
class CentralityVector:
    measure: str
    values: dict[int, float]


@dataclass
class GlobalStats:
    gini_degree: float | None = None
    gini_strength: float | None = None
    gini_in_strength: float | None = None
    gini_out_strength: float | None = None
    centralization: float | None = None
    assortativity: float | None = None
    clustering: float | None = None
    avg_path_length: float | None = None
    delta_hyperbolicity: float | None = None
    reciprocity: float | None = None
    flags: list[str] = field(default_factory=list)


def _adjacency(graph: CharGraph) -> dict[int, dict[int, float]]:
    """Outgoing adjacency (symmetric for undirected graphs)."""
    adj: dict[int, dict[int, float]] = {v: {} for v in graph.nodes()}
    for u, v, w in graph.edges():
        adj[u][v] = adj[u].get(v, 0.0) + w
        if not graph.directed:
            adj[v][u] = adj[v].get(u, 0.0) + w
    return adj


def _undirected_adjacency(graph: CharGraph) -> dict[int, dict[int, float]]:
    return _adjacency(graph.undirected_view())


def degree_strength(graph: CharGraph) -> dict[str, CentralityVector]:
    """DEGREE (unique partners) and strength.  Directed graphs report
    IN_STRENGTH and OUT_STRENGTH; undirected graphs report STRENGTH."""
    partners: dict[int, set[int]] = {v: set() for v in graph.nodes()}
    for u, v, _w in graph.edges():
        partners[u].add(v)
        partners[v].add(u)
    degree = {v: float(len(p)) for v, p in partners.items()}
    out: dict[str, CentralityVector] = {"DEGREE": CentralityVector("DEGREE", degree)}
    if graph.directed:
        in_s = {v: 0.0 for v in graph.nodes()}
        out_s = {v: 0.0 for v in graph.nodes()}
        for u, v, w in graph.edges():
            out_s[u] += w
            in_s[v] += w
        out["IN_STRENGTH"] = CentralityVector("IN_STRENGTH", in_s)
        out["OUT_STRENGTH"] = CentralityVector("OUT_STRENGTH", out_s)
    else:
        strength = {v: 0.0 for v in graph.nodes()}
        for u, v, w in graph.edges():
            strength[u] += w
            strength[v] += w
        out["STRENGTH"] = CentralityVector("STRENGTH", strength)
    return out


def _dijkstra(adj: dict[int, dict[int, float]], source: int):
    """Shortest 1/w paths.  Returns (dist, sigma, predecessors, visit order)."""
    dist = {source: 0.0}
    sigma = {source: 1.0}
    preds: dict[int, list[int]] = defaultdict(list)
    order: list[int] = []
    seen: set[int] = set()
    heap = [(0.0, source)]
    while heap:
        d, v = heapq.heappop(heap)
        if v in seen:
            continue
        seen.add(v)
        order.append(v)
        for u, w in adj[v].items():
            if u in seen:
                continue
            nd = d + 1.0 / w
            old = dist.get(u)
            if old is None or nd < old - 1e-15:
                dist[u] = nd
                sigma[u] = sigma[v]
                preds[u] = [v]
                heapq.heappush(heap, (nd, u))
            elif abs(nd - old) <= 1e-15:
                sigma[u] += sigma[v]
                preds[u].append(v)
    return dist, sigma, preds, order


def betweenness(graph: CharGraph) -> CentralityVector:
    """Brandes accumulation over 1/w shortest paths, normalized by
    (n-1)(n-2), halved for undirected graphs."""
    nodes = graph.nodes()
    n = len(nodes)
    scores = {v: 0.0 for v in nodes}
    adj = _adjacency(graph)
    for s in nodes:
        _dist, sigma, preds, order = _dijkstra(adj, s)
        delta = {v: 0.0 for v in order}
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                scores[w] += delta[w]
    # Accumulation visits ordered pairs, so undirected graphs are counted
    # twice per pair; 1/((n-1)(n-2)) then matches the halved-denominator
    # convention for undirected betweenness.
    scale = 1.0 / ((n - 1) * (n - 2)) if n > 2 else 0.0
    return CentralityVector("BETWEENNESS", {v: scores[v] * scale for v in nodes})


def closeness(graph: CharGraph) -> CentralityVector:
    """(reached-1)/sum(d) within the reachable set, scaled by
    (reached-1)/(n-1) on disconnected graphs; singletons score 0."""
    nodes = graph.nodes()
    n = len(nodes)
    adj = _adjacency(graph)
    values = {}
    for v in nodes:
        dist, _sigma, _preds, order = _dijkstra(adj, v)
        reached = len(order)
        total = sum(dist[u] for u in order)
        if reached <= 1 or total <= 0:
            values[v] = 0.0
            continue
        score = (reached - 1) / total
        if n > 1:
            score *= (reached - 1) / (n - 1)
        values[v] = score
    return CentralityVector("CLOSENESS", values)


def eigenvector(graph: CharGraph, tol: float = 1e-8, max_iter: int = 1000) -> CentralityVector:
    """Power iteration with (A + I) on the symmetrized weighted adjacency;
    output is L2-normalized with non-negative entries."""
    nodes = graph.nodes()
    if graph.num_edges() == 0:
        raise ConvergenceError("eigenvector centrality undefined on an edgeless graph")
    adj = _undirected_adjacency(graph)
    index = {v: i for i, v in enumerate(nodes)}
    n = len(nodes)
    a = np.zeros((n, n))
    for u, nbrs in adj.items():
        for v, w in nbrs.items():
            a[index[u], index[v]] = w
    x = np.full(n, 1.0 / math.sqrt(n))
    for _ in range(max_iter):
        x_new = x + a @ x  # (A + I)x sidesteps bipartite oscillation
        norm = np.linalg.norm(x_new)
        if norm == 0:
            raise ConvergenceError("eigenvector iteration collapsed to zero", last_iterate=x)
        x_new /= norm
        if np.max(np.abs(x_new - x)) < tol:
            x = x_new
            return CentralityVector("EIGENVECTOR", {v: float(x[index[v]]) for v in nodes})
        x = x_new
    raise ConvergenceError(
        f"eigenvector centrality did not converge in {max_iter} iterations",
        last_iterate={v: float(x[index[v]]) for v in nodes},
    )


def pagerank(graph: CharGraph, damping: float = 0.85, tol: float = 1e-10,
             max_iter: int = 10000) -> CentralityVector:
    """Weighted PageRank with uniform redistribution of dangling mass;
    the result sums to 1."""
    nodes = graph.nodes()
    n = len(nodes)
    if n == 0:
        return CentralityVector("PAGERANK", {})
    index = {v: i for i, v in enumerate(nodes)}
    out_total = np.zeros(n)
    edges = []
    for u, v, w in graph.edges():
        edges.append((index[u], index[v], w))
        out_total[index[u]] += w
        if not graph.directed:
            edges.append((index[v], index[u], w))
            out_total[index[v]] += w
    pi = np.full(n, 1.0 / n)
    teleport = (1.0 - damping) / n
    dangling = out_total == 0
    for _ in range(max_iter):
        new = np.full(n, teleport)
        dangle_mass = pi[dangling].sum()
        new += damping * dangle_mass / n
        for ui, vi, w in edges:
            new[vi] += damping * pi[ui] * w / out_total[ui]
        if np.abs(new - pi).sum() < tol:
            pi = new
            break
        pi = new
    return CentralityVector("PAGERANK", {v: float(pi[index[v]]) for v in nodes})


def gini(values) -> float:
    """Mean absolute difference inequality: sum_ij |x_i - x_j| / (2n sum x)."""
    x = np.asarray(list(values), dtype=float)
    if x.size == 0:
        raise DomainError("gini of an empty value list")
    if np.any(x < 0):
        raise DomainError("gini requires non-negative values")
    total = x.sum()
    if total == 0:
        return 0.0
    diffs = np.abs(x[:, None] - x[None, :]).sum()
    return float(diffs / (2 * x.size * total))


def centralization(graph: CharGraph) -> float | None:
    """Freeman degree centralization on unweighted degree; exactly 1 for a
    star.  Undefined (None) below 3 nodes."""
    n = graph.num_nodes()
    if n < 3:
        return None
    degree = degree_strength(graph)["DEGREE"].values
    k_max = max(degree.values())
    return float(sum(k_max - k for k in degree.values()) / ((n - 1) * (n - 2)))


def assortativity(graph: CharGraph) -> float | None:
    """Pearson correlation of endpoint degrees over the edge list; each
    undirected edge contributes both orientations.  None on zero variance."""
    degree = degree_strength(graph)["DEGREE"].values
    xs, ys = [], []
    for u, v, _w in graph.edges():
        xs.extend((degree[u], degree[v]))
        ys.extend((degree[v], degree[u]))
    if len(xs) < 2:
        return None
    x = np.asarray(xs)
    y = np.asarray(ys)
    sx = x.std()
    sy = y.std()
    if sx == 0 or sy == 0:
        return None
    return float(((x - x.mean()) * (y - y.mean())).mean() / (sx * sy))


def clustering(graph: CharGraph) -> float:
    """Mean local clustering; nodes of degree < 2 contribute 0."""
    adj = {v: set(nbrs) for v, nbrs in _undirected_adjacency(graph).items()}
    total = 0.0
    n = len(adj)
    if n == 0:
        return 0.0
    for v, nbrs in adj.items():
        k = len(nbrs)
        if k < 2:
            continue
        links = 0
        ordered = sorted(nbrs)
        for i, a in enumerate(ordered):
            for b in ordered[i + 1 :]:
                if b in adj[a]:
                    links += 1
        total += links / (k * (k - 1) / 2)
    return float(total / n)


def _hop_distances(adj: dict[int, set[int]], source: int) -> dict[int, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for u in adj[v]:
            if u not in dist:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


def _largest_component(graph: CharGraph) -> tuple[list[int], dict[int, set[int]]]:
    adj = {v: set(nbrs) for v, nbrs in _undirected_adjacency(graph).items()}
    seen: set[int] = set()
    best: list[int] = []
    for v in sorted(adj):
        if v in seen:
            continue
        comp = sorted(_hop_distances(adj, v))
        seen.update(comp)
        if len(comp) > len(best):
            best = comp
    return best, adj


@dataclass(frozen=True)
class DeltaResult:
    value: float
    exact: bool


def delta_hyperbolicity(graph: CharGraph, exact_max_n: int = 80,
                        samples: int = 100_000, seed: int = 0) -> DeltaResult:
    """Four-point condition delta over hop distances in the largest
    component: exhaustive up to ``exact_max_n`` nodes, else a seeded sample
    of 4-tuples (a lower bound, flagged via ``exact=False``)."""
    comp, adj = _largest_component(graph)
    n = len(comp)
    if n < 4:
        return DeltaResult(0.0, True)
    dist = {v: _hop_distances(adj, v) for v in comp}

    def tuple_delta(a, b, c, d):
        s1 = dist[a][b] + dist[c][d]
        s2 = dist[a][c] + dist[b][d]
        s3 = dist[a][d] + dist[b][c]
        hi, mid, _lo = sorted((s1, s2, s3), reverse=True)
        return (hi - mid) / 2.0

    best = 0.0
    if n <= exact_max_n:
        for a, b, c, d in itertools.combinations(comp, 4):
            best = max(best, tuple_delta(a, b, c, d))
        return DeltaResult(best, True)
    rng = np.random.default_rng(seed)
    nodes = np.asarray(comp)
    for _ in range(samples):
        a, b, c, d = rng.choice(nodes, size=4, replace=False)
        best = max(best, tuple_delta(int(a), int(b), int(c), int(d)))
    return DeltaResult(best, False)


def reciprocity(graph: CharGraph) -> float | None:
    """Fraction of directed edges whose reverse also exists (weight-blind)."""
    if not graph.directed:
        raise ValueError("reciprocity is defined for directed graphs")
    edges = {(u, v) for u, v, _w in graph.edges()}
    if not edges:
        return None
    mutual = sum(1 for (u, v) in edges if (v, u) in edges)
    return mutual / len(edges)


def avg_path_length(graph: CharGraph) -> float | None:
    """Mean hop distance over connected pairs in the largest component."""
    comp, adj = _largest_component(graph)
    if len(comp) < 2:
        return None
    total = 0
    pairs = 0
    for v in comp:
        dist = _hop_distances(adj, v)
        for u in comp:
            if u != v:
                total += dist[u]
                pairs += 1
    return total / pairs


def rank_top(vector: CentralityVector | dict[int, float], k: int | None = None) -> list[int]:
    """Node ids by descending value; ties break toward the smaller id."""
    values = vector.values if isinstance(vector, CentralityVector) else vector
    ordered = sorted(values, key=lambda node: (-values[node], node))
    return ordered if k is None else ordered[:k]


def protagonist(vector: CentralityVector | dict[int, float]) -> int:
    return rank_top(vector, 1)[0]


def all_metrics(graph: CharGraph, delta_seed: int = 0,
                eigenvector_tol: float = 1e-12) -> dict:
    """Every per-node and global measure as a JSON-ready dict."""
    flags: list[str] = []
    per_node: dict[str, dict[str, float]] = {}
    vectors = degree_strength(graph)
    vectors["BETWEENNESS"] = betweenness(graph)
    vectors["CLOSENESS"] = closeness(graph)
    if graph.num_edges() > 0:
        try:
            vectors["EIGENVECTOR"] = eigenvector(graph, tol=eigenvector_tol)
        except ConvergenceError:
            flags.append("eigenvector_not_converged")
    else:
        flags.append("no_edges")
    vectors["PAGERANK"] = pagerank(graph)
    for name, vec in vectors.items():
        per_node[name] = {str(v): val for v, val in sorted(vec.values.items())}

    degree_vals = list(vectors["DEGREE"].values.values())
    stats = GlobalStats()
    stats.gini_degree = gini(degree_vals) if degree_vals else None
    if graph.directed:
        stats.gini_in_strength = gini(list(vectors["IN_STRENGTH"].values.values()))
        stats.gini_out_strength = gini(list(vectors["OUT_STRENGTH"].values.values()))
        stats.reciprocity = reciprocity(graph)
    else:
        stats.gini_strength = gini(list(vectors["STRENGTH"].values.values()))
    stats.centralization = centralization(graph)
    stats.assortativity = assortativity(graph)
    stats.clustering = clustering(graph)
    stats.avg_path_length = avg_path_length(graph)
    comp, _adj = _largest_component(graph)
    if len(comp) < graph.num_nodes():
        flags.append("metrics_on_largest_component")
    delta = delta_hyperbolicity(graph, seed=delta_seed)
    stats.delta_hyperbolicity = delta.value
    if not delta.exact:
        flags.append("delta_sampled_lower_bound")

    global_block = {
        "nodes": graph.num_nodes(),
        "edges": graph.num_edges(),
        "density": _density(graph),
        "gini_degree": stats.gini_degree,
        "gini_strength": stats.gini_strength,
        "gini_in_strength": stats.gini_in_strength,
        "gini_out_strength": stats.gini_out_strength,
        "centralization": stats.centralization,
        "assortativity": stats.assortativity,
        "clustering": stats.clustering,
        "avg_path_length": stats.avg_path_length,
        "delta_hyperbolicity": stats.delta_hyperbolicity,
        "reciprocity": stats.reciprocity,
    }
    return {"directed": graph.directed, "per_node": per_node,
            "global": global_block, "flags": flags}


def _density(graph: CharGraph) -> float | None:
    n = graph.num_nodes()
    if n < 2:
        return None
    possible = n * (n - 1)
    if not graph.directed:
        possible //= 2
    return graph.num_edges() / possible
