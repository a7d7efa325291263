import pytest

from scenevideo.errors import LexiconError
from scenevideo.scene import load_lexicon, parse_lexicon


def test_packaged_lexicon_loads():
    lex = load_lexicon()
    assert lex.verbs["walk"].template == "linear"
    assert lex.verbs["walk"].speed == 0.01
    assert lex.modifiers["quickly"] == 2.0
    assert lex.prepositions["across"] == "across"
    assert "the" in lex.fillers


def test_file_format_comments_and_payloads():
    lex = parse_lexicon(
        "# comment\n"
        "noun cat circle 0.07 1 0.5 0  # trailing\n"
        "verb walk linear 0.01\n"
        "adjective big size 1.5\n"
        "adjective red color 1 0 0\n"
        "preposition on on\n"
        "modifier quickly 2\n"
        "filler a the\n"
    )
    assert lex.nouns["cat"].color == (1.0, 0.5, 0.0)
    assert lex.adjectives["big"].value == 1.5
    assert lex.fillers == frozenset({"a", "the"})


@pytest.mark.parametrize(
    "text",
    [
        "noun Cat circle 0.1",
        "noun cat circle 0.1\nverb cat linear 0.01",
        "verb walk linear 0",
        "verb walk teleport 0.1",
        "adjective big size -1",
        "preposition atop stacked",
        "modifier quickly 0",
        "noun cat hexagon 0.1",
        "pronoun it",
        "filler and",
    ],
)
def test_invalid_entries(text):
    with pytest.raises(LexiconError):
        parse_lexicon(text)
