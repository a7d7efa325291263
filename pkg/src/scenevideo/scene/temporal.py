"""Per-frame trajectories from verb templates."""

from __future__ import annotations

import math

from ..errors import MissingVerb
from .graph import SceneGraph, TemporalAnnotation

ORBIT_RADIUS = 0.1


def _clamp01(v: float) -> float:
    return min(1.0, max(0.0, v))


def trajectory(template: str, speed: float, start: tuple[float, float], n: int) -> list[tuple[float, float]]:
    x0, y0 = start
    out = []
    for t in range(n):
        if template == "linear":
            x, y = x0 + speed * t, y0
        elif template == "fall":
            # speed doubles as the constant downward acceleration
            x, y = x0, y0 + 0.5 * speed * t * t
        elif template == "spin":
            angle = speed / ORBIT_RADIUS * t
            x, y = x0 + ORBIT_RADIUS * math.cos(angle), y0 + ORBIT_RADIUS * math.sin(angle)
        elif template == "static":
            x, y = x0, y0
        else:
            raise ValueError(f"unknown trajectory template {template!r}")
        out.append((_clamp01(x), _clamp01(y)))
    return out


def annotate_temporal(graph: SceneGraph, layout: dict, n: int, fps: float = 8.0) -> SceneGraph:
    if n < 1:
        raise ValueError("frame count must be >= 1")
    if not fps > 0:
        raise ValueError("fps must be > 0")
    annotations = []
    for e in graph.objects:
        start = layout[e.id]
        if e.role == "actor":
            if e.action is None:
                raise MissingVerb(e.id, e.cls)
            template, speed = e.action.template, e.action.effective_speed
        else:
            template, speed = "static", 0.0
        positions = tuple(trajectory(template, speed, start, n))
        annotations.append(TemporalAnnotation(e.id, template, speed, n, float(fps), positions))
    return graph.with_annotations(annotations)
