"""Closed-vocabulary lexicon and its line-oriented file format."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

from ..errors import LexiconError

SHAPES = ("circle", "rect")
TEMPLATES = ("linear", "fall", "spin")
CONSTRAINT_KINDS = ("on", "under", "left_of", "right_of", "across", "in", "near")
CONJUNCTION = "and"


@dataclass(frozen=True)
class NounEntry:
    shape: str
    size: float
    color: tuple[float, float, float]


@dataclass(frozen=True)
class VerbEntry:
    template: str
    speed: float


@dataclass(frozen=True)
class AdjectiveEntry:
    kind: str  # "color" or "size"
    value: tuple[float, float, float] | float


@dataclass(frozen=True)
class Lexicon:
    nouns: Mapping[str, NounEntry] = field(default_factory=dict)
    verbs: Mapping[str, VerbEntry] = field(default_factory=dict)
    adjectives: Mapping[str, AdjectiveEntry] = field(default_factory=dict)
    prepositions: Mapping[str, str] = field(default_factory=dict)
    modifiers: Mapping[str, float] = field(default_factory=dict)
    fillers: frozenset[str] = frozenset()

    def __post_init__(self):
        seen: dict[str, str] = {}
        for cat in ("nouns", "verbs", "adjectives", "prepositions", "modifiers", "fillers"):
            for word in getattr(self, cat):
                if word != word.lower() or not word:
                    raise LexiconError(0, f"word {word!r} must be lowercase")
                if word == CONJUNCTION:
                    raise LexiconError(0, f"{CONJUNCTION!r} is reserved")
                if word in seen:
                    raise LexiconError(0, f"{word!r} in both {seen[word]} and {cat}")
                seen[word] = cat
        for word, v in self.verbs.items():
            if v.speed <= 0 or v.template not in TEMPLATES:
                raise LexiconError(0, f"bad verb entry {word!r}")
        for word, a in self.adjectives.items():
            if a.kind == "size" and a.value <= 0:
                raise LexiconError(0, f"size multiplier for {word!r} must be > 0")
        for word, n in self.nouns.items():
            if n.size <= 0 or n.shape not in SHAPES:
                raise LexiconError(0, f"bad noun entry {word!r}")
        for word, kind in self.prepositions.items():
            if kind not in CONSTRAINT_KINDS:
                raise LexiconError(0, f"unknown constraint kind {kind!r} for {word!r}")

    def category(self, word: str) -> str | None:
        if word == CONJUNCTION:
            return "conjunction"
        for cat in ("nouns", "verbs", "adjectives", "prepositions", "modifiers", "fillers"):
            if word in getattr(self, cat):
                return cat
        return None

    def __contains__(self, word: str) -> bool:
        return self.category(word) is not None


def _floats(parts: list[str], lineno: int, count: int) -> list[float]:
    if len(parts) != count:
        raise LexiconError(lineno, f"expected {count} numbers, got {len(parts)}")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise LexiconError(lineno, str(exc)) from None


def default_color(word: str) -> tuple[float, float, float]:
    """Stable fallback class color for nouns declared without one."""
    import hashlib

    digest = hashlib.sha256(word.encode("utf-8")).digest()
    return tuple(round(0.2 + 0.75 * b / 255, 4) for b in digest[:3])


def parse_lexicon(text: str) -> Lexicon:
    nouns: dict = {}
    verbs: dict = {}
    adjectives: dict = {}
    prepositions: dict = {}
    modifiers: dict = {}
    fillers: set = set()
    seen: set = set()

    def claim(word, lineno):
        if word != word.lower():
            raise LexiconError(lineno, f"word {word!r} must be lowercase")
        if word in seen:
            raise LexiconError(lineno, f"duplicate word {word!r}")
        if word == CONJUNCTION:
            raise LexiconError(lineno, f"{CONJUNCTION!r} is reserved")
        seen.add(word)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        cat, *rest = line.split()
        if cat == "filler":
            for w in rest:
                claim(w, lineno)
                fillers.add(w)
            continue
        if not rest:
            raise LexiconError(lineno, "missing word")
        word, payload = rest[0], rest[1:]
        claim(word, lineno)
        if cat == "noun":
            if not payload or payload[0] not in SHAPES:
                raise LexiconError(lineno, f"noun shape must be one of {SHAPES}")
            if len(payload) == 2:
                (size,) = _floats(payload[1:], lineno, 1)
                color = default_color(word)
            else:
                size, *rgb = _floats(payload[1:], lineno, 4)
                color = tuple(rgb)
            if size <= 0:
                raise LexiconError(lineno, "noun size must be > 0")
            nouns[word] = NounEntry(payload[0], size, color)
        elif cat == "verb":
            if not payload or payload[0] not in TEMPLATES:
                raise LexiconError(lineno, f"verb template must be one of {TEMPLATES}")
            (speed,) = _floats(payload[1:], lineno, 1)
            if speed <= 0:
                raise LexiconError(lineno, "verb speed must be > 0")
            verbs[word] = VerbEntry(payload[0], speed)
        elif cat == "adjective":
            if payload[:1] == ["color"]:
                rgb = _floats(payload[1:], lineno, 3)
                if not all(0.0 <= c <= 1.0 for c in rgb):
                    raise LexiconError(lineno, "color channels must lie in [0, 1]")
                adjectives[word] = AdjectiveEntry("color", tuple(rgb))
            elif payload[:1] == ["size"]:
                (mult,) = _floats(payload[1:], lineno, 1)
                if mult <= 0:
                    raise LexiconError(lineno, "size multiplier must be > 0")
                adjectives[word] = AdjectiveEntry("size", mult)
            else:
                raise LexiconError(lineno, "adjective payload must be 'color r g b' or 'size m'")
        elif cat == "preposition":
            if len(payload) != 1 or payload[0] not in CONSTRAINT_KINDS:
                raise LexiconError(lineno, f"preposition kind must be one of {CONSTRAINT_KINDS}")
            prepositions[word] = payload[0]
        elif cat == "modifier":
            (mult,) = _floats(payload, lineno, 1)
            if mult <= 0:
                raise LexiconError(lineno, "modifier multiplier must be > 0")
            modifiers[word] = mult
        else:
            raise LexiconError(lineno, f"unknown category {cat!r}")

    return Lexicon(nouns, verbs, adjectives, prepositions, modifiers, frozenset(fillers))


def load_lexicon(path: str | Path | None = None) -> Lexicon:
    """Load a lexicon file; ``None`` loads the packaged default."""
    if path is None:
        text = resources.files("scenevideo.data").joinpath("lexicon.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_lexicon(text)
