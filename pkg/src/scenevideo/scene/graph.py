"""Scene-graph value types and their JSON document format.

Document layout (keys always emitted in this order)::

    {
      "prompt": str,
      "objects": [
        {"id", "class", "role", "shape", "size", "color",
         "attributes": [{"kind", "word", "value"}],
         "action": null | {"verb", "template", "speed",
                           "modifiers": [{"word", "multiplier"}]}}
      ],
      "relations": [{"subject", "predicate", "kind", "object"}],
      "annotations": [{"entity", "template", "speed", "duration", "fps",
                       "positions": [[x, y], ...]}]
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

from ..errors import FormatError

ROLES = ("actor", "ground")


@dataclass(frozen=True)
class Attribute:
    kind: str  # "color" | "size"
    word: str
    value: tuple[float, float, float] | float


@dataclass(frozen=True)
class Action:
    verb: str
    template: str
    speed: float
    modifiers: tuple[tuple[str, float], ...] = ()

    @property
    def effective_speed(self) -> float:
        speed = self.speed
        for _, mult in self.modifiers:
            speed *= mult
        return speed


@dataclass(frozen=True)
class Entity:
    id: int
    cls: str
    role: str
    shape: str
    size: float
    color: tuple[float, float, float]
    attributes: tuple[Attribute, ...] = ()
    action: Action | None = None

    @property
    def effective_size(self) -> float:
        size = self.size
        for attr in self.attributes:
            if attr.kind == "size":
                size *= attr.value
        return size

    @property
    def effective_color(self) -> tuple[float, float, float]:
        color = self.color
        for attr in self.attributes:
            if attr.kind == "color":
                color = attr.value
        return color


@dataclass(frozen=True)
class Relation:
    subject: int
    predicate: str
    kind: str
    object: int


@dataclass(frozen=True)
class TemporalAnnotation:
    entity: int
    template: str
    speed: float
    duration: int
    fps: float
    positions: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class SceneGraph:
    prompt: str
    objects: tuple[Entity, ...]
    relations: tuple[Relation, ...] = ()
    annotations: tuple[TemporalAnnotation, ...] = field(default=())

    def entity(self, entity_id: int) -> Entity:
        for e in self.objects:
            if e.id == entity_id:
                return e
        raise KeyError(entity_id)

    def annotation(self, entity_id: int) -> TemporalAnnotation | None:
        for a in self.annotations:
            if a.entity == entity_id:
                return a
        return None

    def with_annotations(self, annotations) -> SceneGraph:
        return replace(self, annotations=tuple(annotations))


def check_graph(graph: SceneGraph) -> None:
    """Raise ``ValueError`` describing the first violated graph invariant."""
    if not graph.objects:
        raise ValueError("graph must contain at least one entity")
    ids = [e.id for e in graph.objects]
    if len(set(ids)) != len(ids):
        raise ValueError("entity ids must be unique")
    for e in graph.objects:
        if e.id < 0:
            raise ValueError(f"entity id {e.id} is negative")
        if e.role not in ROLES:
            raise ValueError(f"entity {e.id} has unknown role {e.role!r}")
        if not (e.size > 0 and math.isfinite(e.size)):
            raise ValueError(f"entity {e.id} has invalid size")
    known = set(ids)
    for r in graph.relations:
        if r.subject not in known or r.object not in known:
            raise ValueError(f"relation {r.predicate!r} references unknown entity")
        if r.subject == r.object:
            raise ValueError(f"relation {r.predicate!r} relates entity {r.subject} to itself")
    seen = set()
    for a in graph.annotations:
        if a.entity not in known:
            raise ValueError(f"annotation references unknown entity {a.entity}")
        if a.entity in seen:
            raise ValueError(f"duplicate annotation for entity {a.entity}")
        seen.add(a.entity)
        if a.duration < 1 or len(a.positions) != a.duration:
            raise ValueError(f"annotation for entity {a.entity} has {len(a.positions)} positions, duration {a.duration}")
        for x, y in a.positions:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ValueError(f"annotation for entity {a.entity} has non-finite coordinates")


def _attr_to_json(a: Attribute) -> dict:
    value = list(a.value) if a.kind == "color" else a.value
    return {"kind": a.kind, "word": a.word, "value": value}


def _entity_to_json(e: Entity) -> dict:
    action = None
    if e.action is not None:
        action = {
            "verb": e.action.verb,
            "template": e.action.template,
            "speed": e.action.speed,
            "modifiers": [{"word": w, "multiplier": m} for w, m in e.action.modifiers],
        }
    return {
        "id": e.id,
        "class": e.cls,
        "role": e.role,
        "shape": e.shape,
        "size": e.size,
        "color": list(e.color),
        "attributes": [_attr_to_json(a) for a in e.attributes],
        "action": action,
    }


def to_dict(graph: SceneGraph) -> dict:
    return {
        "prompt": graph.prompt,
        "objects": [_entity_to_json(e) for e in graph.objects],
        "relations": [
            {"subject": r.subject, "predicate": r.predicate, "kind": r.kind, "object": r.object}
            for r in graph.relations
        ],
        "annotations": [
            {
                "entity": a.entity,
                "template": a.template,
                "speed": a.speed,
                "duration": a.duration,
                "fps": a.fps,
                "positions": [[x, y] for x, y in a.positions],
            }
            for a in graph.annotations
        ],
    }


def serialize(graph: SceneGraph) -> str:
    check_graph(graph)
    return json.dumps(to_dict(graph), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _num(v, what: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"{what} must be a number")
    return float(v)


def _int(v, what: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValueError(f"{what} must be an integer")
    return v


def _rgb(v, what: str) -> tuple[float, float, float]:
    if not isinstance(v, list) or len(v) != 3:
        raise ValueError(f"{what} must be a 3-element list")
    return tuple(_num(c, what) for c in v)


def _keys(d, required: tuple[str, ...], what: str) -> None:
    if not isinstance(d, dict):
        raise ValueError(f"{what} must be an object")
    missing = [k for k in required if k not in d]
    if missing:
        raise ValueError(f"{what} missing keys {missing}")


def from_dict(doc) -> SceneGraph:
    _keys(doc, ("prompt", "objects", "relations", "annotations"), "document")
    if not isinstance(doc["prompt"], str):
        raise ValueError("prompt must be a string")
    objects = []
    for i, o in enumerate(doc["objects"]):
        what = f"objects[{i}]"
        _keys(o, ("id", "class", "role", "shape", "size", "color", "attributes", "action"), what)
        attrs = []
        for j, a in enumerate(o["attributes"]):
            _keys(a, ("kind", "word", "value"), f"{what}.attributes[{j}]")
            if a["kind"] == "color":
                value = _rgb(a["value"], "color attribute")
            elif a["kind"] == "size":
                value = _num(a["value"], "size attribute")
            else:
                raise ValueError(f"unknown attribute kind {a['kind']!r}")
            attrs.append(Attribute(a["kind"], str(a["word"]), value))
        action = None
        if o["action"] is not None:
            act = o["action"]
            _keys(act, ("verb", "template", "speed", "modifiers"), f"{what}.action")
            mods = []
            for m in act["modifiers"]:
                _keys(m, ("word", "multiplier"), f"{what}.action.modifiers")
                mods.append((str(m["word"]), _num(m["multiplier"], "multiplier")))
            action = Action(str(act["verb"]), str(act["template"]), _num(act["speed"], "speed"), tuple(mods))
        objects.append(
            Entity(
                id=_int(o["id"], "id"),
                cls=str(o["class"]),
                role=o["role"],
                shape=str(o["shape"]),
                size=_num(o["size"], "size"),
                color=_rgb(o["color"], "color"),
                attributes=tuple(attrs),
                action=action,
            )
        )
    relations = []
    for i, r in enumerate(doc["relations"]):
        _keys(r, ("subject", "predicate", "kind", "object"), f"relations[{i}]")
        relations.append(Relation(_int(r["subject"], "subject"), str(r["predicate"]), str(r["kind"]), _int(r["object"], "object")))
    annotations = []
    for i, a in enumerate(doc["annotations"]):
        _keys(a, ("entity", "template", "speed", "duration", "fps", "positions"), f"annotations[{i}]")
        positions = []
        for p in a["positions"]:
            if not isinstance(p, list) or len(p) != 2:
                raise ValueError("positions must be [x, y] pairs")
            positions.append((_num(p[0], "x"), _num(p[1], "y")))
        annotations.append(
            TemporalAnnotation(
                entity=_int(a["entity"], "entity"),
                template=str(a["template"]),
                speed=_num(a["speed"], "speed"),
                duration=_int(a["duration"], "duration"),
                fps=_num(a["fps"], "fps"),
                positions=tuple(positions),
            )
        )
    graph = SceneGraph(doc["prompt"], tuple(objects), tuple(relations), tuple(annotations))
    check_graph(graph)
    return graph


def deserialize(text: str) -> SceneGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, line=exc.lineno) from None
    try:
        return from_dict(doc)
    except (ValueError, TypeError) as exc:
        raise FormatError(str(exc)) from None
