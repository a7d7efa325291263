"""Exception hierarchy shared by every stage of the pipeline.

The CLI maps these onto exit codes: input/usage errors exit 2, I/O errors
exit 3, file-format errors exit 4.
"""


class SceneVideoError(Exception):
    """Base class for all pipeline errors."""


class InputError(SceneVideoError):
    """Bad user input (exit code 2)."""


class UnknownWord(InputError):
    def __init__(self, word: str, position: int, column: int | None = None, line: int | None = None):
        self.word = word
        self.position = position
        self.column = column
        self.line = line
        super().__init__(f"unknown word {word!r} at position {position}")


class GrammarError(InputError):
    def __init__(self, position: int, expected: str, found: str | None = None):
        self.position = position
        self.expected = expected
        self.found = found
        got = "end of input" if found is None else repr(found)
        super().__init__(f"grammar error at token {position}: expected {expected}, got {got}")


class EmptyPrompt(InputError):
    def __init__(self):
        super().__init__("empty prompt")


class LexiconError(InputError):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"lexicon line {line}: {reason}")


class LayoutUnsatisfiable(InputError):
    def __init__(self, residual: float, relation=None):
        self.residual = residual
        self.relation = relation
        super().__init__(f"layout constraints unsatisfiable (max residual {residual:.3g})")


class MissingVerb(InputError):
    def __init__(self, entity_id: int, cls: str):
        self.entity_id = entity_id
        self.cls = cls
        super().__init__(f"actor {cls!r} (id {entity_id}) has no action")


class MissingAnnotations(InputError):
    def __init__(self, detail: str = "scene graph has no temporal annotations"):
        super().__init__(detail)


class InsufficientSamples(InputError):
    def __init__(self, count: int, needed: int = 2):
        self.count = count
        super().__init__(f"need at least {needed} samples, got {count}")


class ConfigError(InputError):
    pass


class ShapeMismatch(SceneVideoError, ValueError):
    pass


class DimensionMismatch(ShapeMismatch):
    pass


class EmptyConditioning(SceneVideoError, ValueError):
    def __init__(self):
        super().__init__("conditioning matrix has zero rows")


class ZeroVector(SceneVideoError, ValueError):
    def __init__(self, which: str = "vector"):
        super().__init__(f"{which} has zero norm")


class FormatError(SceneVideoError):
    """Malformed file. Binary formats report a byte ``offset``, text formats a ``line``."""

    def __init__(self, reason: str, *, offset: int | None = None, line: int | None = None):
        self.reason = reason
        self.offset = offset
        self.line = line
        if offset is not None:
            where = f"offset {offset}"
        elif line is not None:
            where = f"line {line}"
        else:
            where = "input"
        super().__init__(f"format error at {where}: {reason}")
