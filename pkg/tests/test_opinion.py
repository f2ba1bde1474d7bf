import pytest
from hypothesis import given
from hypothesis import strategies as st

from fuzzyrank.opinion import (
    Lexicon,
    LexiconEntry,
    MalformedRow,
    PolarityOutOfRange,
    associate_opinions,
    load_lexicon,
    parse_dependencies,
)
from fuzzyrank.tagger import AspectMention, PosClass, pos_tag, read_pos_lexicon

EXAMPLE = "The car is good having very stable handling".split()
HANDLING = AspectMention("handling", (7, 8))


@pytest.fixture(scope="module")
def poslex():
    return read_pos_lexicon()


def _assoc(words, aspects, lexicon, poslex, **kw):
    return associate_opinions(words, pos_tag(words, poslex), aspects, lexicon, **kw)


# -- lexicon ----------------------------------------------------------------------


def test_load_lexicon_row(tmp_path):
    p = tmp_path / "lex.tsv"
    p.write_text("# word\tpos\tpolarity\nstable\tADJ\t0.7\nvery\tr\t0.9\n")
    lex = load_lexicon(p)
    assert lex.polarity("stable", PosClass.ADJ) == 0.7
    assert lex.polarity("very", PosClass.ADV) == 0.9
    assert lex.polarity("stable", PosClass.NOUN) is None
    assert LexiconEntry("stable", PosClass.ADJ, 0.7) in lex.entries()


def test_load_lexicon_out_of_range(tmp_path):
    p = tmp_path / "lex.tsv"
    p.write_text("good\tADJ\t1.5\n")
    with pytest.raises(PolarityOutOfRange):
        load_lexicon(p)


@pytest.mark.parametrize("row", ["good\tADJ\n", "good\tADJ\tabc\n", "good\tXYZ\t0.5\n", "good\tADJ\t0.5\ngood\tADJ\t0.4\n"])
def test_load_lexicon_malformed(tmp_path, row):
    p = tmp_path / "lex.tsv"
    p.write_text(row)
    with pytest.raises(MalformedRow):
        load_lexicon(p)


def test_load_lexicon_empty(tmp_path):
    p = tmp_path / "lex.tsv"
    p.write_text("")
    assert len(load_lexicon(p)) == 0


def test_fixture_lexicon_values(lexicon):
    assert lexicon.polarity("very", PosClass.ADV) == 0.9
    assert lexicon.polarity("stable", PosClass.ADJ) == 0.7
    assert all(-1 <= e.polarity <= 1 for e in lexicon.entries())


# -- association -------------------------------------------------------------------


def test_paper_example_window(lexicon, poslex):
    (op,) = _assoc(EXAMPLE, [HANDLING], lexicon, poslex)
    assert op.adv == 0.9 and op.adj == 0.7
    assert op.verb is None and op.noun is None
    assert not op.negated
    assert op.words == {"adv": ("very", 5), "adj": ("stable", 6)}


def test_paper_example_dependency_path_agrees(lexicon, poslex):
    # the only arcs: stable -> handling, very -> stable
    heads = [-1, -1, -1, -1, -1, 6, 7, -1]
    (op,) = _assoc(EXAMPLE, [HANDLING], lexicon, poslex, deps=heads)
    (win,) = _assoc(EXAMPLE, [HANDLING], lexicon, poslex)
    assert op.words == win.words
    assert (op.adv, op.adj, op.negated) == (win.adv, win.adj, win.negated)


def test_dependency_path_respects_hops(lexicon, poslex):
    words = "The car is good having handling".split()
    aspect = [AspectMention("handling", (5, 6))]
    # handling -> having -> is <- good: three arcs, though within the window
    far = [1, 2, -1, 2, 2, 4]
    (op,) = _assoc(words, aspect, lexicon, poslex, deps=far)
    assert op.adj is None
    (win,) = _assoc(words, aspect, lexicon, poslex)
    assert win.words["adj"] == ("good", 3)
    near = [1, 2, -1, 5, 2, 4]  # good -> handling
    (op,) = _assoc(words, aspect, lexicon, poslex, deps=near)
    assert op.words["adj"] == ("good", 3)


def test_no_lexicon_hits(lexicon, poslex):
    (op,) = _assoc("the handling".split(), [AspectMention("handling", (1, 2))], lexicon, poslex)
    assert op.empty
    assert op.polarities() == {}


def test_negation(lexicon, poslex):
    words = "not very stable handling".split()
    (op,) = _assoc(words, [AspectMention("handling", (3, 4))], lexicon, poslex)
    assert op.negated
    (off,) = _assoc(words, [AspectMention("handling", (3, 4))], lexicon, poslex, negation=False)
    assert not off.negated


def test_negation_out_of_reach(lexicon, poslex):
    # "not" is four tokens before "stable"
    words = "not the car seats stable handling".split()
    (op,) = _assoc(words, [AspectMention("handling", (5, 6))], lexicon, poslex)
    assert op.adj == 0.7 and not op.negated


def test_nearest_word_per_class_and_leftmost_tie(lexicon, poslex):
    words = "good handling bad".split()
    (op,) = _assoc(words, [AspectMention("handling", (1, 2))], lexicon, poslex)
    assert op.words["adj"] == ("good", 0)
    words = "bad good handling".split()
    (op,) = _assoc(words, [AspectMention("handling", (2, 3))], lexicon, poslex)
    assert op.words["adj"] == ("good", 1)


def test_window_limit(lexicon, poslex):
    words = ["good"] + ["the"] * 5 + ["handling"]
    (op,) = _assoc(words, [AspectMention("handling", (6, 7))], lexicon, poslex)
    assert op.adj is None
    (op,) = _assoc(words, [AspectMention("handling", (6, 7))], lexicon, poslex, window=6)
    assert op.adj == lexicon.polarity("good", PosClass.ADJ)


def test_other_aspect_span_excluded(poslex):
    # "comfort" is a scored noun but also a tagged aspect
    lex = Lexicon([LexiconEntry("comfort", PosClass.NOUN, 0.5), LexiconEntry("great", PosClass.ADJ, 0.8)])
    words = ["great", "comfort", "and", "handling"]
    pos = [PosClass.ADJ, PosClass.NOUN, PosClass.OTHER, PosClass.NOUN]
    aspects = [AspectMention("comfort", (1, 2)), AspectMention("handling", (3, 4))]
    ops = associate_opinions(words, pos, aspects, lex)
    assert ops[1].noun is None and ops[1].adj == 0.8


def test_association_deterministic(lexicon, poslex):
    assert _assoc(EXAMPLE, [HANDLING], lexicon, poslex) == _assoc(EXAMPLE, [HANDLING], lexicon, poslex)


_vocab = ["very", "stable", "good", "bad", "not", "the", "handling", "love", "is", "problem", "extremely"]


@given(st.lists(st.sampled_from(_vocab), min_size=1, max_size=12), st.data())
def test_polarities_in_range(lexicon, poslex, words, data):
    i = data.draw(st.integers(0, len(words) - 1))
    for op in _assoc(words, [AspectMention(words[i], (i, i + 1))], lexicon, poslex):
        assert all(-1 <= v <= 1 for v in op.polarities().values())


# -- dependency files ----------------------------------------------------------------


def test_parse_dependencies():
    text = "# review_id = r1\n# sentence = 0\n1\tVery\t2\n2\tstable\t3\n3\thandling\t0\n\n" \
           "# review_id = r1\n# sentence = 1\n1\tGood\t0\n"
    deps = parse_dependencies(text)
    assert deps == {("r1", 0): [1, 2, -1], ("r1", 1): [-1]}


def test_parse_dependencies_errors():
    with pytest.raises(ValueError):
        parse_dependencies("1\tx\t0\n")
    with pytest.raises(ValueError):
        parse_dependencies("# review_id = r\n# sentence = 0\n2\tx\t0\n")
