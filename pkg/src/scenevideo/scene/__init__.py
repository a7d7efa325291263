"""Prompt text to annotated scene graph."""

from .grammar import Token, parse, parse_text, scan, tokenize
from .graph import (
    Action,
    Attribute,
    Entity,
    Relation,
    SceneGraph,
    TemporalAnnotation,
    deserialize,
    serialize,
)
from .layout import solve_layout
from .lexicon import Lexicon, load_lexicon, parse_lexicon
from .relations import build_relations, embedding_matrix, graph_embedding
from .temporal import annotate_temporal


def build_scene(text: str, lexicon: Lexicon, n: int = 8, fps: float = 8.0) -> SceneGraph:
    """Full parser pipeline: tokenize, parse, lay out, annotate."""
    graph = parse_text(text, lexicon)
    return annotate_temporal(graph, solve_layout(graph), n, fps)


__all__ = [
    "Action",
    "Attribute",
    "Entity",
    "Lexicon",
    "Relation",
    "SceneGraph",
    "TemporalAnnotation",
    "Token",
    "annotate_temporal",
    "build_relations",
    "build_scene",
    "deserialize",
    "embedding_matrix",
    "graph_embedding",
    "load_lexicon",
    "parse",
    "parse_lexicon",
    "parse_text",
    "scan",
    "serialize",
    "solve_layout",
    "tokenize",
]
