"""Deterministic relation propagation over the scene graph.

Each entity starts from a unit vector built from its color and a hash of its
class and attributes. Every round mixes an entity's state with the mean of
its relation neighbours through a fixed 2x2 rotation on the (self, message)
pair, then renormalizes. An isolated node's message is itself, so it never
moves.
"""

from __future__ import annotations

import math

import numpy as np

from ..embedding import EMBED_DIM, color_embedding, hash_vector
from .graph import Entity, SceneGraph

MIX_ANGLE = math.pi / 6
_COLOR_WEIGHT = 0.8
_HASH_WEIGHT = 0.6


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.sqrt(np.dot(v, v))


def initial_embedding(entity: Entity) -> np.ndarray:
    key = entity.cls + "|" + "|".join(f"{a.kind}:{a.word}" for a in entity.attributes)
    color = _unit(color_embedding(entity.effective_color))
    return _unit(_COLOR_WEIGHT * color + _HASH_WEIGHT * _unit(hash_vector(key)))


def adjacency(graph: SceneGraph) -> dict[int, list[int]]:
    nbrs: dict[int, set[int]] = {e.id: set() for e in graph.objects}
    for r in graph.relations:
        nbrs[r.subject].add(r.object)
        nbrs[r.object].add(r.subject)
    return {k: sorted(v) for k, v in nbrs.items()}


def build_relations(graph: SceneGraph, rounds: int = 2) -> dict[int, np.ndarray]:
    """Map entity id to a ``EMBED_DIM``-dimensional relation-aware embedding."""
    if rounds < 0:
        raise ValueError("rounds must be >= 0")
    h = {e.id: initial_embedding(e) for e in graph.objects}
    nbrs = adjacency(graph)
    c, s = math.cos(MIX_ANGLE), math.sin(MIX_ANGLE)
    for _ in range(rounds):
        new = {}
        for eid in sorted(h):
            ns = nbrs[eid]
            if not ns:
                # message == self: the rotation is the identity after renormalizing
                new[eid] = h[eid]
                continue
            msg = np.zeros(EMBED_DIM)
            for j in ns:
                msg = msg + h[j]
            msg = msg / len(ns)
            new[eid] = _unit(c * h[eid] + s * msg)
        h = new
    return h


def embedding_matrix(graph: SceneGraph, rounds: int = 2) -> np.ndarray:
    """Entity embeddings stacked in object order (rows x ``EMBED_DIM``)."""
    emb = build_relations(graph, rounds)
    return np.stack([emb[e.id] for e in graph.objects])


def graph_embedding(graph: SceneGraph, rounds: int = 2) -> np.ndarray:
    return embedding_matrix(graph, rounds).mean(axis=0)
