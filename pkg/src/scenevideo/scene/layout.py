"""Spatial layout by iterative constraint relaxation.

Scene coordinates run over [0, 1]^2 with y pointing down (image convention),
so "on" puts the subject at a smaller y than its object.
"""

from __future__ import annotations

import math

from ..errors import LayoutUnsatisfiable
from .graph import SceneGraph

GAP = 0.15
BAND = (0.1, 0.3)
LO, HI = 0.05, 0.95
MAX_ITERATIONS = 500
MOVE_TOL = 1e-4
RESIDUAL_TOL = 1e-3


def _clamp(v: float) -> float:
    return min(HI, max(LO, v))


def seed_positions(graph: SceneGraph) -> dict[int, tuple[float, float]]:
    k = len(graph.objects)
    return {e.id: ((i + 1) / (k + 1), 0.5) for i, e in enumerate(graph.objects)}


def residual(kind: str, s: tuple[float, float], o: tuple[float, float]) -> float:
    sx, sy = s
    ox, oy = o
    if kind == "on":
        return max(abs(sy - (oy - GAP)), abs(sx - ox))
    if kind == "under":
        return max(abs(sy - (oy + GAP)), abs(sx - ox))
    if kind == "left_of":
        return abs(sx - (ox - GAP))
    if kind == "right_of":
        return abs(sx - (ox + GAP))
    if kind in ("across", "in", "near"):
        d = math.hypot(sx - ox, sy - oy)
        return max(0.0, BAND[0] - d, d - BAND[1])
    raise ValueError(f"unknown constraint kind {kind!r}")


def _target_delta(kind: str, s, o) -> tuple[float, float]:
    """Displacement of subject relative to object that satisfies the constraint."""
    sx, sy = s
    ox, oy = o
    if kind == "on":
        return (ox - sx, (oy - GAP) - sy)
    if kind == "under":
        return (ox - sx, (oy + GAP) - sy)
    if kind == "left_of":
        return ((ox - GAP) - sx, 0.0)
    if kind == "right_of":
        return ((ox + GAP) - sx, 0.0)
    dx, dy = sx - ox, sy - oy
    d = math.hypot(dx, dy)
    if d == 0.0:
        # coincident points: separate along +x
        return (BAND[0], 0.0)
    goal = min(BAND[1], max(BAND[0], d))
    scale = goal / d - 1.0
    return (dx * scale, dy * scale)


def relax(graph: SceneGraph) -> tuple[dict[int, tuple[float, float]], int]:
    """Relax every relation in order until positions stop moving.

    Each violated constraint is corrected by moving subject and object half
    the required displacement each. Returns ``(positions, sweeps)``; raises
    ``LayoutUnsatisfiable`` when any residual still exceeds the tolerance
    after at most ``MAX_ITERATIONS`` sweeps.
    """
    pos = seed_positions(graph)
    relations = list(graph.relations)
    sweeps = 0
    if relations:
        for _ in range(MAX_ITERATIONS):
            sweeps += 1
            start = dict(pos)
            for r in relations:
                s, o = pos[r.subject], pos[r.object]
                ddx, ddy = _target_delta(r.kind, s, o)
                if ddx == 0.0 and ddy == 0.0:
                    continue
                pos[r.subject] = (_clamp(s[0] + 0.5 * ddx), _clamp(s[1] + 0.5 * ddy))
                pos[r.object] = (_clamp(o[0] - 0.5 * ddx), _clamp(o[1] - 0.5 * ddy))
            moved = max(math.hypot(pos[k][0] - start[k][0], pos[k][1] - start[k][1]) for k in pos)
            if moved < MOVE_TOL:
                break
    worst, worst_rel = 0.0, None
    for r in relations:
        res = residual(r.kind, pos[r.subject], pos[r.object])
        if res > worst:
            worst, worst_rel = res, r
    if worst > RESIDUAL_TOL:
        raise LayoutUnsatisfiable(worst, worst_rel)
    return pos, sweeps


def solve_layout(graph: SceneGraph) -> dict[int, tuple[float, float]]:
    return relax(graph)[0]
