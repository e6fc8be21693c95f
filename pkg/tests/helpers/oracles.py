"""Exhaustive brute-force oracles for graphs of up to ~7 nodes.

Deliberately independent of charspace.metrics: shortest paths come from
explicit simple-path enumeration, eigenvector/PageRank from dense solves,
distances from Floyd-Warshall, and correlations from the stdlib.
"""

from __future__ import annotations

import itertools
import math
import statistics
from fractions import Fraction

import numpy as np

TOL = 1e-12


def out_adjacency(graph):
    adj = {v: {} for v in graph.nodes()}
    for u, v, w in graph.edges():
        adj[u][v] = adj[u].get(v, 0.0) + w
        if not graph.directed:
            adj[v][u] = adj[v].get(u, 0.0) + w
    return adj


def undirected_adjacency(graph):
    adj = {v: {} for v in graph.nodes()}
    for u, v, w in graph.edges():
        adj[u][v] = adj[u].get(v, 0.0) + w
        adj[v][u] = adj[v].get(u, 0.0) + w
    return adj


def all_simple_paths(adj, source, target):
    paths = []

    def walk(node, path):
        if node == target:
            paths.append(list(path))
            return
        for nxt in adj[node]:
            if nxt not in path:
                path.append(nxt)
                walk(nxt, path)
                path.pop()

    walk(source, [source])
    return paths


def shortest_path_census(adj, source, target):
    """(min_length, n_shortest, interior_counts) via full enumeration.

    Lengths are summed in exact rational arithmetic (floats are dyadic
    rationals), so tie detection needs no tolerance at all.
    """
    paths = all_simple_paths(adj, source, target)
    if not paths:
        return math.inf, 0, {}
    lengths = [
        sum((Fraction(1) / Fraction(adj[a][b]) for a, b in zip(p, p[1:])),
            start=Fraction(0))
        for p in paths
    ]
    best = min(lengths)
    counts = {}
    n_shortest = 0
    for path, length in zip(paths, lengths):
        if length == best:
            n_shortest += 1
            for v in path[1:-1]:
                counts[v] = counts.get(v, 0) + 1
    return float(best), n_shortest, counts


def brute_betweenness(graph):
    nodes = graph.nodes()
    n = len(nodes)
    adj = out_adjacency(graph)
    score = {v: 0.0 for v in nodes}
    if graph.directed:
        pairs = [(s, t) for s in nodes for t in nodes if s != t]
        denom = (n - 1) * (n - 2)
    else:
        pairs = [(s, t) for i, s in enumerate(nodes) for t in nodes[i + 1 :]]
        denom = (n - 1) * (n - 2) / 2
    for s, t in pairs:
        _best, sigma, counts = shortest_path_census(adj, s, t)
        if sigma == 0:
            continue
        for v, c in counts.items():
            score[v] += c / sigma
    if denom <= 0:
        return {v: 0.0 for v in nodes}
    return {v: score[v] / denom for v in nodes}


def brute_closeness(graph):
    nodes = graph.nodes()
    n = len(nodes)
    adj = out_adjacency(graph)
    values = {}
    for v in nodes:
        dists = {}
        for u in nodes:
            if u == v:
                continue
            best, _sigma, _counts = shortest_path_census(adj, v, u)
            if best < math.inf:
                dists[u] = best
        reached = len(dists) + 1
        if reached <= 1:
            values[v] = 0.0
            continue
        total = sum(dists.values())
        score = (reached - 1) / total
        score *= (reached - 1) / (n - 1)
        values[v] = score
    return values


def brute_eigenvector(graph):
    nodes = graph.nodes()
    index = {v: i for i, v in enumerate(nodes)}
    n = len(nodes)
    a = np.zeros((n, n))
    for u, v, w in graph.edges():
        a[index[u], index[v]] += w
        a[index[v], index[u]] += w
    eigvals, eigvecs = np.linalg.eigh(a)
    vec = eigvecs[:, int(np.argmax(eigvals))]
    if vec.sum() < 0:
        vec = -vec
    vec = np.abs(vec)  # dominant eigenvector of a nonnegative matrix
    vec = vec / np.linalg.norm(vec)
    return {v: float(vec[index[v]]) for v in nodes}


def brute_pagerank(graph, damping=0.85):
    nodes = graph.nodes()
    index = {v: i for i, v in enumerate(nodes)}
    n = len(nodes)
    out_total = np.zeros(n)
    weight = np.zeros((n, n))
    for u, v, w in graph.edges():
        weight[index[u], index[v]] += w
        out_total[index[u]] += w
        if not graph.directed:
            weight[index[v], index[u]] += w
            out_total[index[v]] += w
    m = np.zeros((n, n))  # m[i, j] = P(j -> i)
    for j in range(n):
        if out_total[j] == 0:
            m[:, j] = 1.0 / n
        else:
            m[:, j] = weight[j, :] / out_total[j]
    pi = np.linalg.solve(np.eye(n) - damping * m, np.full(n, (1 - damping) / n))
    return {v: float(pi[index[v]]) for v in nodes}


def brute_gini(values):
    values = list(values)
    n = len(values)
    total = sum(values)
    if total == 0:
        return 0.0
    acc = 0.0
    for a in values:
        for b in values:
            acc += abs(a - b)
    return acc / (2 * n * total)


def brute_degrees(graph):
    partners = {v: set() for v in graph.nodes()}
    for u, v, _w in graph.edges():
        partners[u].add(v)
        partners[v].add(u)
    return {v: len(p) for v, p in partners.items()}


def brute_centralization(graph):
    degrees = brute_degrees(graph)
    n = len(degrees)
    if n < 3:
        return None
    k_max = max(degrees.values())
    return sum(k_max - k for k in degrees.values()) / ((n - 1) * (n - 2))


def brute_assortativity(graph):
    degrees = brute_degrees(graph)
    xs, ys = [], []
    for u, v, _w in graph.edges():
        xs += [degrees[u], degrees[v]]
        ys += [degrees[v], degrees[u]]
    if len(xs) < 2 or len(set(xs)) == 1 or len(set(ys)) == 1:
        return None
    try:
        return statistics.correlation(xs, ys)
    except statistics.StatisticsError:
        return None


def brute_clustering(graph):
    adj = {v: set(nbrs) for v, nbrs in undirected_adjacency(graph).items()}
    nodes = sorted(adj)
    total = 0.0
    for v in nodes:
        k = len(adj[v])
        if k < 2:
            continue
        triangles = sum(
            1 for a, b in itertools.combinations(sorted(adj[v]), 2) if b in adj[a]
        )
        total += triangles / (k * (k - 1) / 2)
    return total / len(nodes) if nodes else 0.0


def floyd_warshall_hops(graph):
    adj = undirected_adjacency(graph)
    nodes = sorted(adj)
    dist = {u: {v: math.inf for v in nodes} for u in nodes}
    for u in nodes:
        dist[u][u] = 0
    for u, nbrs in adj.items():
        for v in nbrs:
            dist[u][v] = 1
    for k in nodes:
        for i in nodes:
            for j in nodes:
                nd = dist[i][k] + dist[k][j]
                if nd < dist[i][j]:
                    dist[i][j] = nd
    return dist


def largest_component_nodes(graph):
    dist = floyd_warshall_hops(graph)
    nodes = sorted(dist)
    seen = set()
    best = []
    for v in nodes:
        if v in seen:
            continue
        comp = [u for u in nodes if dist[v][u] < math.inf]
        seen.update(comp)
        if len(comp) > len(best):
            best = comp
    return best, dist


def brute_delta_hyperbolicity(graph):
    comp, dist = largest_component_nodes(graph)
    if len(comp) < 4:
        return 0.0
    best = 0.0
    for a, b, c, d in itertools.combinations(comp, 4):
        sums = sorted([
            dist[a][b] + dist[c][d],
            dist[a][c] + dist[b][d],
            dist[a][d] + dist[b][c],
        ])
        best = max(best, (sums[2] - sums[1]) / 2)
    return best


def brute_reciprocity(graph):
    edges = {(u, v) for u, v, _w in graph.edges()}
    if not edges:
        return None
    return sum(1 for (u, v) in edges if (v, u) in edges) / len(edges)


def brute_avg_path_length(graph):
    comp, dist = largest_component_nodes(graph)
    if len(comp) < 2:
        return None
    total = sum(dist[u][v] for u in comp for v in comp if u != v)
    return total / (len(comp) * (len(comp) - 1))
