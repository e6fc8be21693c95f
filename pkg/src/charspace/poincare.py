"""Poincare disk embeddings of character networks.

Training follows the standard ball-embedding recipe: positives are edges
sampled proportional to weight, each softmaxed against k uniform negative
samples, optimized with Riemannian SGD (Euclidean gradients rescaled by
(1 - |theta|^2)^2 / 4 and projected back inside the unit ball).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RenderError, StepError, TrainError
from .networks import CharGraph

BOUNDARY_EPS = 1e-5
INIT_RADIUS = 1e-3
_GRAD_CLAMP = 1e-12


@dataclass(frozen=True)
class EmbedConfig:
    dim: int = 2
    negatives: int = 10
    epochs: int = 100
    learning_rate: float = 0.01
    burn_in_epochs: int = 10  # run at learning_rate / 10
    seed: int = 0

    def __post_init__(self):
        if self.negatives < 1:
            raise ValueError("negatives must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


def _check_interior(point: np.ndarray, name: str) -> None:
    if float(np.dot(point, point)) >= 1.0:
        raise DomainError(f"{name} lies outside the open unit ball")


def poincare_distance(u, v) -> float:
    """arcosh(1 + 2|u-v|^2 / ((1-|u|^2)(1-|v|^2))); symmetric, 0 iff u == v."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_interior(u, "u")
    _check_interior(v, "v")
    alpha = 1.0 - float(np.dot(u, u))
    beta = 1.0 - float(np.dot(v, v))
    diff = u - v
    gamma = 1.0 + 2.0 * float(np.dot(diff, diff)) / (alpha * beta)
    return math.acosh(gamma)


def distance_gradients(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Euclidean gradients of poincare_distance with respect to u and v."""
    alpha = 1.0 - float(np.dot(u, u))
    beta = 1.0 - float(np.dot(v, v))
    diff = u - v
    sq = float(np.dot(diff, diff))
    gamma = 1.0 + 2.0 * sq / (alpha * beta)
    denom = math.sqrt(max(gamma * gamma - 1.0, _GRAD_CLAMP))
    dgamma_du = (4.0 / (alpha * beta)) * diff + (4.0 * sq / (beta * alpha * alpha)) * u
    dgamma_dv = (-4.0 / (alpha * beta)) * diff + (4.0 * sq / (alpha * beta * beta)) * v
    return dgamma_du / denom, dgamma_dv / denom


def project(point: np.ndarray) -> np.ndarray:
    """Pull a point with norm >= 1 back to norm 1 - BOUNDARY_EPS."""
    norm = float(np.linalg.norm(point))
    if norm >= 1.0:
        return point * ((1.0 - BOUNDARY_EPS) / norm)
    return point


def riemannian_step(point: np.ndarray, euclidean_grad: np.ndarray, lr: float) -> np.ndarray:
    """One rescaled gradient step kept inside the ball."""
    if not np.all(np.isfinite(euclidean_grad)):
        raise StepError("non-finite gradient")
    scale = (1.0 - float(np.dot(point, point))) ** 2 / 4.0
    return project(point - lr * scale * euclidean_grad)


@dataclass
class TrainedEmbedding:
    points: dict[int, np.ndarray]
    loss_trace: list[float]
    config: EmbedConfig

    def norms(self) -> dict[int, float]:
        return {node: float(np.linalg.norm(p)) for node, p in self.points.items()}


def _init_points(nodes: list[int], config: EmbedConfig, rng: np.random.Generator):
    points = {}
    for node in nodes:
        while True:
            candidate = rng.uniform(-INIT_RADIUS, INIT_RADIUS, size=config.dim)
            if float(np.linalg.norm(candidate)) < INIT_RADIUS:
                points[node] = candidate
                break
    return points


def _distances_and_grads(u_point: np.ndarray, candidates: np.ndarray):
    """Vectorized distance gradients from one point to m candidates."""
    alpha = 1.0 - float(np.dot(u_point, u_point))
    betas = 1.0 - np.einsum("ij,ij->i", candidates, candidates)
    diffs = u_point[None, :] - candidates
    sq = np.einsum("ij,ij->i", diffs, diffs)
    gammas = 1.0 + 2.0 * sq / (alpha * betas)
    dists = np.arccosh(gammas)
    denom = np.sqrt(np.maximum(gammas * gammas - 1.0, _GRAD_CLAMP))
    du = (4.0 / (alpha * betas))[:, None] * diffs \
        + (4.0 * sq / (betas * alpha * alpha))[:, None] * u_point[None, :]
    dc = (-4.0 / (alpha * betas))[:, None] * diffs \
        + (4.0 * sq / (alpha * betas * betas))[:, None] * candidates
    return dists, du / denom[:, None], dc / denom[:, None]


def train(graph: CharGraph, config: EmbedConfig | None = None) -> TrainedEmbedding:
    """Train an embedding of a character graph; deterministic per seed.

    Each epoch draws one positive pair per edge (chosen proportional to
    edge weight, random orientation) and k negatives per positive, uniform
    over the non-neighbors of the anchor (falling back to all other nodes
    for anchors adjacent to everything, as a star center is).
    """
    if config is None:
        config = EmbedConfig()
    nodes = graph.nodes()
    if len(nodes) < 2:
        raise TrainError("embedding needs at least 2 nodes")
    edges = graph.edges()
    if not edges:
        raise TrainError("embedding needs at least 1 edge")

    rng = np.random.default_rng(config.seed)
    points = _init_points(nodes, config, rng)

    node_arr = np.asarray(nodes)
    neighbor_sets: dict[int, set[int]] = {v: set() for v in nodes}
    for u, v, _w in edges:
        neighbor_sets[u].add(v)
        neighbor_sets[v].add(u)
    non_neighbors = {
        v: np.asarray([u for u in nodes if u != v and u not in neighbor_sets[v]])
        for v in nodes
    }
    weights = np.asarray([w for _u, _v, w in edges], dtype=float)
    cumulative = np.cumsum(weights / weights.sum())

    # One epoch draws one positive per edge, with a floor so the per-epoch
    # mean-loss estimate stays usable on very small graphs.
    epoch_samples = max(len(edges), 64)
    loss_trace: list[float] = []
    for epoch in range(config.epochs):
        lr = config.learning_rate
        if epoch < config.burn_in_epochs:
            lr /= 10.0
        losses = np.empty(epoch_samples)
        for step in range(epoch_samples):
            edge_idx = int(np.searchsorted(cumulative, rng.random(), side="right"))
            edge_idx = min(edge_idx, len(edges) - 1)
            u, v, _w = edges[edge_idx]
            if rng.integers(2):
                u, v = v, u
            pool = non_neighbors[u]
            if pool.size == 0:
                pool = node_arr[(node_arr != u) & (node_arr != v)]
            negs = pool[rng.integers(pool.size, size=config.negatives)]
            cand_ids = [v] + [int(x) for x in negs]
            cand = np.stack([points[c] for c in cand_ids])
            dists, grad_u, grad_c = _distances_and_grads(points[u], cand)

            # loss = d(u, v) + log sum_j exp(-d_j), stably
            shift = -dists.min()
            logsum = math.log(np.exp(-dists - shift).sum()) + shift
            losses[step] = dists[0] + logsum
            p = np.exp(-dists - logsum)
            coef = -p
            coef[0] += 1.0  # dL/dd_0 = 1 - p_0

            total_u = coef[:, None] * grad_u
            points[u] = riemannian_step(points[u], total_u.sum(axis=0), lr)
            per_candidate: dict[int, np.ndarray] = {}
            for j, c in enumerate(cand_ids):
                g = coef[j] * grad_c[j]
                per_candidate[c] = per_candidate.get(c, 0.0) + g
            for c, g in per_candidate.items():
                points[c] = riemannian_step(points[c], g, lr)
        loss_trace.append(float(losses.mean()))
    return TrainedEmbedding(points=points, loss_trace=loss_trace, config=config)


def write_embeddings_csv(path, embedding: TrainedEmbedding) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        dim = embedding.config.dim
        writer.writerow(["char_id"] + [f"x{i}" for i in range(dim)] + ["norm"])
        for node in sorted(embedding.points):
            point = embedding.points[node]
            writer.writerow([node] + [repr(float(c)) for c in point]
                            + [repr(float(np.linalg.norm(point)))])


def write_loss_trace_csv(path, embedding: TrainedEmbedding) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["epoch", "mean_loss"])
        for epoch, loss in enumerate(embedding.loss_trace, start=1):
            writer.writerow([epoch, repr(loss)])


def render_disk_svg(embedding: dict[int, np.ndarray], graph: CharGraph, path,
                    label_top: int = 8, size: int = 640) -> None:
    """Unit-disk scatter: dot area tracks strength, labels on the top-N
    strongest nodes, deterministic output."""
    for node, point in embedding.items():
        if len(point) != 2:
            raise RenderError(f"node {node} embedding has dimension {len(point)}, need 2")
    strength: dict[int, float] = {v: 0.0 for v in graph.nodes()}
    for u, v, w in graph.edges():
        strength[u] = strength.get(u, 0.0) + w
        strength[v] = strength.get(v, 0.0) + w
    max_strength = max(strength.values()) if strength else 1.0
    if max_strength <= 0:
        max_strength = 1.0

    half = size / 2.0
    radius = half - 10.0

    def to_px(coord: float) -> float:
        return half + coord * radius

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'  <circle cx="{half:.1f}" cy="{half:.1f}" r="{radius:.1f}" '
        'fill="none" stroke="#444444" stroke-width="1"/>',
    ]
    labelled = set(sorted(embedding, key=lambda n: (-strength.get(n, 0.0), n))[:label_top])
    for node in sorted(embedding):
        x, y = embedding[node]
        px, py = to_px(float(x)), to_px(float(y))
        r = 2.0 + 6.0 * math.sqrt(strength.get(node, 0.0) / max_strength)
        lines.append(
            f'  <circle cx="{px:.2f}" cy="{py:.2f}" r="{r:.2f}" '
            'fill="#1f77b4" fill-opacity="0.8"/>'
        )
    for node in sorted(labelled):
        x, y = embedding[node]
        px, py = to_px(float(x)), to_px(float(y))
        name = str(graph.node_attrs.get(node, {}).get("name", node))
        lines.append(
            f'  <text x="{px + 6.0:.2f}" y="{py - 4.0:.2f}" '
            f'font-size="11" font-family="sans-serif">{_escape(name)}</text>'
        )
    lines.append("</svg>")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
