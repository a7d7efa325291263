"""Tokenizer and recursive-descent parser for the constrained prompt grammar.

    prompt := clause ("and" clause)*
    clause := adjective* noun verb? modifier* (preposition adjective* noun)*
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import EmptyPrompt, GrammarError, UnknownWord
from .graph import Action, Attribute, Entity, Relation, SceneGraph
from .lexicon import CONJUNCTION, Lexicon

_WORD = re.compile(r"\S+")
_PUNCT = re.compile(r"[^\w'-]+|^['-]+|['-]+$")


@dataclass(frozen=True)
class Token:
    word: str
    index: int  # position among whitespace-separated input words
    line: int  # 1-based
    column: int  # 1-based


def _normalize(word: str, lexicon: Lexicon) -> str:
    if word in lexicon:
        return word
    candidates = []
    if word.endswith("ing") and len(word) > 4:
        stem = word[:-3]
        candidates += [stem, stem + "e"]
        if len(stem) > 2 and stem[-1] == stem[-2]:
            candidates.append(stem[:-1])
    if word.endswith("ies") and len(word) > 4:
        candidates.append(word[:-3] + "y")
    if word.endswith("es") and len(word) > 3:
        candidates.append(word[:-2])
    if word.endswith("s") and len(word) > 2:
        candidates.append(word[:-1])
    for cand in candidates:
        if cand in lexicon.verbs:
            return cand
    return word


def scan(text: str, lexicon: Lexicon) -> list[Token]:
    """Tokenize keeping source locations; fillers dropped, unknown words rejected."""
    if not text.strip():
        raise EmptyPrompt()
    line_starts = [0] + [m.end() for m in re.finditer("\n", text)]
    tokens = []
    index = 0
    for m in _WORD.finditer(text):
        word = _PUNCT.sub("", m.group().lower())
        if not word:
            continue
        line = max(i for i, s in enumerate(line_starts) if s <= m.start())
        column = m.start() - line_starts[line] + 1
        word = _normalize(word, lexicon)
        if word not in lexicon:
            raise UnknownWord(word, index, column, line + 1)
        if word not in lexicon.fillers:
            tokens.append(Token(word, index, line + 1, column))
        index += 1
    return tokens


def tokenize(text: str, lexicon: Lexicon) -> list[str]:
    return [t.word for t in scan(text, lexicon)]


class _Parser:
    def __init__(self, tokens: list[str], lexicon: Lexicon):
        self.tokens = tokens
        self.lex = lexicon
        self.pos = 0
        self.objects: list[Entity] = []
        self.relations: list[Relation] = []

    def peek_cat(self) -> str | None:
        if self.pos >= len(self.tokens):
            return None
        return self.lex.category(self.tokens[self.pos])

    def error(self, expected: str):
        found = self.tokens[self.pos] if self.pos < len(self.tokens) else None
        raise GrammarError(self.pos, expected, found)

    def noun_phrase(self, role: str) -> Entity:
        attrs = []
        while self.peek_cat() == "adjectives":
            word = self.tokens[self.pos]
            entry = self.lex.adjectives[word]
            attrs.append(Attribute(entry.kind, word, entry.value))
            self.pos += 1
        if self.peek_cat() != "nouns":
            self.error("noun" if attrs else "noun-or-adjective")
        word = self.tokens[self.pos]
        self.pos += 1
        entry = self.lex.nouns[word]
        ent = Entity(len(self.objects), word, role, entry.shape, entry.size, entry.color, tuple(attrs))
        self.objects.append(ent)
        return ent

    def clause(self):
        actor = self.noun_phrase("actor")
        verb = None
        if self.peek_cat() == "verbs":
            verb = self.tokens[self.pos]
            self.pos += 1
        mods = []
        while self.peek_cat() == "modifiers":
            word = self.tokens[self.pos]
            mods.append((word, self.lex.modifiers[word]))
            self.pos += 1
        if verb is not None or mods:
            if verb is None:
                # modifiers need a verb to scale
                self.pos -= len(mods)
                self.error("verb")
            entry = self.lex.verbs[verb]
            action = Action(verb, entry.template, entry.speed, tuple(mods))
            self.objects[actor.id] = actor = Entity(
                actor.id, actor.cls, actor.role, actor.shape, actor.size, actor.color, actor.attributes, action
            )
        while self.peek_cat() == "prepositions":
            word = self.tokens[self.pos]
            self.pos += 1
            ground = self.noun_phrase("ground")
            self.relations.append(Relation(actor.id, word, self.lex.prepositions[word], ground.id))
        cat = self.peek_cat()
        if cat not in (None, "conjunction"):
            self.error("preposition-or-and")

    def run(self) -> None:
        self.clause()
        while self.peek_cat() == "conjunction":
            self.pos += 1
            self.clause()
        if self.pos != len(self.tokens):
            self.error("end")


def parse(tokens: list[str], lexicon: Lexicon, prompt: str = "") -> SceneGraph:
    """Build entities and relations from a token list (no layout, no annotations)."""
    if not tokens:
        raise GrammarError(0, "noun-or-adjective")
    p = _Parser(list(tokens), lexicon)
    p.run()
    return SceneGraph(prompt=prompt, objects=tuple(p.objects), relations=tuple(p.relations))


def parse_text(text: str, lexicon: Lexicon) -> SceneGraph:
    return parse(tokenize(text, lexicon), lexicon, prompt=text.strip())
