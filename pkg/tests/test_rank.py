import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from fuzzyrank.rank import (
    Bm25Index,
    EmptyCorpus,
    EntityAspectScore,
    EntitySetMismatch,
    NoAspectFound,
    ParsedQuery,
    QueryAspect,
    RankedList,
    RankError,
    UnknownEntity,
    aggregate_entity_scores,
    bm25_build,
    bm25_rank,
    bm25_score,
    compare_rankings,
    kendall_tau,
    load_score_table,
    parse_query,
    rank_entities,
    save_score_table,
    spearman_rho,
)

TABLE1_BM25 = [8, 7, 5, 2, 4, 1, 6, 3]


# -- aggregation ---------------------------------------------------------------------


def test_aggregate_mean():
    (row,) = aggregate_entity_scores([("e1", "handling", 0.8), ("e1", "handling", 0.4)])
    assert row == EntityAspectScore("e1", "handling", pytest.approx(0.6), 2)


def test_aggregate_single_and_cancel():
    rows = aggregate_entity_scores([("e1", "mileage", -0.5), ("e2", "x", 0.9), ("e2", "x", -0.9)])
    assert rows == [EntityAspectScore("e1", "mileage", -0.5, 1), EntityAspectScore("e2", "x", 0.0, 2)]


def test_aggregate_empty_and_sum():
    assert aggregate_entity_scores([]) == []
    (row,) = aggregate_entity_scores([("e", "a", 0.7), ("e", "a", 0.9)], mode="sum")
    assert row.score == pytest.approx(1.6) and row.support == 2
    with pytest.raises(ValueError):
        aggregate_entity_scores([], mode="median")


@given(st.lists(st.tuples(st.sampled_from("abc"), st.sampled_from(["x", "y"]), st.floats(-1, 1)), max_size=30))
def test_aggregate_invariants(rows):
    out = aggregate_entity_scores(rows)
    assert all(r.support >= 1 and -1 <= r.score <= 1 for r in out)
    assert sum(r.support for r in out) == len(rows)
    assert [(r.entity_id, r.aspect) for r in out] == sorted({(e, a) for e, a, _ in rows})


def test_score_table_round_trip(tmp_path):
    rows = [EntityAspectScore("e1", "sound system", 0.1 + 0.2, 3), EntityAspectScore("e2", "mileage", -1 / 3, 1)]
    save_score_table(rows, tmp_path / "s.tsv")
    assert load_score_table(tmp_path / "s.tsv") == rows


def test_score_table_bad_header(tmp_path):
    (tmp_path / "s.tsv").write_text("a\tb\n")
    with pytest.raises(RankError):
        load_score_table(tmp_path / "s.tsv")


# -- ranking -----------------------------------------------------------------------


def _query(*aspects):
    return ParsedQuery("q", tuple(QueryAspect(t, o, s) for t, o, s in aspects))


def test_rank_eight_entities():
    scores = [EntityAspectScore(f"car{i}", "handling", s, 1) for i, s in enumerate([0.1, 0.9, -0.3, 0.5, 0.7, 0.2, -0.8, 0.4])]
    ranked = rank_entities(_query(("handling", 1, 1.0)), scores)
    assert [e.rank for e in ranked] == list(range(1, 9))
    assert ranked.entity_ids == ["car1", "car4", "car3", "car7", "car5", "car0", "car2", "car6"]
    assert ranked.format_table().splitlines()[1].split() == ["1", "car1", "0.9000"]


def test_rank_ties_by_entity_id():
    scores = [EntityAspectScore("zeta", "a", 0.5, 1), EntityAspectScore("alpha", "a", 0.5, 1)]
    assert rank_entities(_query(("a", 1, 1.0)), scores).entity_ids == ["alpha", "zeta"]


def test_rank_negative_query_inverts():
    scores = [EntityAspectScore(e, "mileage", s, 1) for e, s in [("a", 0.6), ("b", -0.2), ("c", 0.1)]]
    pos = rank_entities(_query(("mileage", 1, 0.5)), scores).entity_ids
    neg = rank_entities(_query(("mileage", -1, 0.5)), scores).entity_ids
    assert neg == pos[::-1]


def test_rank_sums_aspects_and_excludes_missing():
    scores = [EntityAspectScore("a", "x", 0.5, 1), EntityAspectScore("a", "y", 0.5, 1),
              EntityAspectScore("b", "x", 0.8, 1), EntityAspectScore("c", "z", 1.0, 1)]
    ranked = rank_entities(_query(("x", 1, 1.0), ("y", 1, 0.5)), scores)
    assert ranked.scores() == pytest.approx({"a": 0.75, "b": 0.8})
    assert rank_entities(_query(("w", 1, 1.0)), scores).entries == ()


scores_st = st.dictionaries(st.text("abcdef", min_size=1, max_size=3), st.floats(-1, 1), min_size=1, max_size=10)


@given(scores_st)
def test_ranked_list_invariants(scores):
    r = RankedList.from_scores(scores)
    vals = [e.score for e in r]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert [e.rank for e in r] == list(range(1, len(scores) + 1))
    assert r.rerank() == r


@given(scores_st, st.floats(0.01, 100))
def test_ranking_scale_invariant(scores, c):
    rows = [EntityAspectScore(e, "a", s, 1) for e, s in scores.items()]
    scaled = [EntityAspectScore(e, "a", s * c, 1) for e, s in scores.items()]
    q = _query(("a", 1, 1.0))
    # exact float ties can split under scaling, so compare on distinct-score inputs
    if len(set(scores.values())) == len(scores):
        assert rank_entities(q, rows).entity_ids == rank_entities(q, scaled).entity_ids


def test_rank_of_unknown():
    with pytest.raises(UnknownEntity):
        RankedList.from_scores({"a": 1.0}).rank_of("b")


# -- BM25 --------------------------------------------------------------------------


def reference_bm25(docs, query, doc_id, k1=1.2, b=0.75):
    """Direct evaluation of the scoring formula from raw token lists."""
    toks = {d: t.lower().split() for d, t in docs}
    N = len(toks)
    avgdl = sum(len(t) for t in toks.values()) / N
    dl = len(toks[doc_id])
    total = 0.0
    for q in query:
        df = sum(q in t for t in toks.values())
        tf = toks[doc_id].count(q)
        idf = math.log((N - df + 0.5) / (df + 0.5) + 1)
        total += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl))
    return total


def test_bm25_build_counts():
    idx = bm25_build([("d1", "good handling"), ("d2", "bad brakes")])
    assert idx.doc_freq["handling"] == 1
    assert idx.avgdl == 2.0
    idx = bm25_build([("d1", "handling handling good")])
    assert idx.term_freqs[0]["handling"] == 2


def test_bm25_empty():
    with pytest.raises(EmptyCorpus):
        bm25_build([])


def test_bm25_parameter_ranges():
    with pytest.raises(ValueError):
        bm25_build([("d", "x")], k1=-1)
    with pytest.raises(ValueError):
        bm25_build([("d", "x")], b=1.5)


def test_bm25_two_document_example():
    docs = [("d1", "good handling handling"), ("d2", "bad brakes")]
    idx = bm25_build(docs)
    # avgdl is (3 + 2) / 2 = 2.5; value of ln(2) * 4.4 / (2 + 1.2 * (0.25 + 0.75 * 3 / 2.5))
    assert bm25_score(idx, ["handling"], "d1") == pytest.approx(0.902321773509988, abs=1e-12)
    assert bm25_score(idx, ["handling"], "d1") == pytest.approx(reference_bm25(docs, ["handling"], "d1"), abs=1e-12)
    assert bm25_score(idx, ["handling"], "d2") == 0.0
    assert bm25_score(idx, ["sunroof"], "d1") == 0.0


def test_bm25_unknown_entity():
    with pytest.raises(UnknownEntity):
        bm25_score(bm25_build([("d", "x")]), ["x"], "zz")


words = st.sampled_from(["good", "handling", "bad", "brakes", "seats", "the", "mileage"])
docs_st = st.lists(st.lists(words, max_size=8).map(" ".join), min_size=1, max_size=5)


@given(docs_st, st.lists(words, min_size=1, max_size=3))
def test_bm25_matches_reference_and_nonnegative(texts, query):
    docs = [(f"d{i}", t) for i, t in enumerate(texts)]
    if not any(t for t in texts):
        return
    idx = bm25_build(docs)
    for d, _ in docs:
        s = bm25_score(idx, query, d)
        assert s >= 0
        assert s == pytest.approx(reference_bm25(docs, query, d), abs=1e-12)


@given(docs_st, st.lists(words, max_size=6).map(" ".join))
def test_bm25_irrelevant_document_keeps_tf(texts, extra):
    docs = [(f"d{i}", t) for i, t in enumerate(texts)]
    if not any(texts):
        return
    before = bm25_build(docs)
    after = bm25_build(docs + [("new", extra)])
    assert after.term_freqs[:len(docs)] == before.term_freqs


def test_bm25_round_trip(tmp_path):
    idx = bm25_build([("d1", "good handling handling"), ("d2", "bad brakes")], k1=1.5, b=0.5)
    idx.save(tmp_path / "b.json")
    loaded = Bm25Index.load(tmp_path / "b.json")
    assert loaded == idx
    assert bm25_score(loaded, ["handling"], "d1") == bm25_score(idx, ["handling"], "d1")


def test_bm25_rank_subset():
    idx = bm25_build([("a", "handling"), ("b", "handling handling x"), ("c", "y")])
    assert bm25_rank(idx, ["handling"], ["c", "a"]).entity_ids == ["a", "c"]


# -- rank comparison -------------------------------------------------------------------


def brute_tau(a, b):
    pairs = list(itertools.combinations(range(len(a)), 2))
    c = sum((a[i] - a[j]) * (b[i] - b[j]) > 0 for i, j in pairs)
    d = sum((a[i] - a[j]) * (b[i] - b[j]) < 0 for i, j in pairs)
    return (c - d) / len(pairs)


def test_kendall_table1():
    assert kendall_tau(list(range(1, 9)), TABLE1_BM25) == -0.5
    assert brute_tau(list(range(1, 9)), TABLE1_BM25) == -0.5


def test_kendall_extremes():
    assert kendall_tau([1, 2, 3], [1, 2, 3]) == 1.0
    assert kendall_tau([1, 2, 3], [3, 2, 1]) == -1.0
    assert kendall_tau([1], [1]) is None
    assert spearman_rho([1], [1]) is None


@given(st.permutations(list(range(1, 8))))
def test_correlations_match_scipy(perm):
    ident = list(range(1, 8))
    assert kendall_tau(ident, perm) == pytest.approx(stats.kendalltau(ident, perm).statistic, abs=1e-12)
    assert spearman_rho(ident, perm) == pytest.approx(stats.spearmanr(ident, perm).statistic, abs=1e-12)


def test_compare_rankings_table():
    a = RankedList.from_scores({f"e{i}": 9 - i for i in range(1, 9)})
    b = RankedList.from_scores({f"e{i}": 9 - r for i, r in zip(range(1, 9), TABLE1_BM25)})
    cmp = compare_rankings(a, b)
    assert cmp.kendall_tau == -0.5
    assert [r[3] for r in cmp.rows] == TABLE1_BM25
    lines = cmp.format_tsv().splitlines()
    assert lines[0] == "entity_id\tproposed_rank\tproposed_score\tbm25_rank\tbm25_score"
    assert lines[-2] == "# kendall_tau\t-0.5000"


@given(scores_st)
def test_compare_with_itself(scores):
    r = RankedList.from_scores(scores)
    cmp = compare_rankings(r, r)
    if len(scores) >= 2:
        assert cmp.kendall_tau == 1.0 and cmp.spearman_rho == 1.0


def test_compare_single_entity():
    r = RankedList.from_scores({"only": 0.3})
    cmp = compare_rankings(r, r)
    assert cmp.kendall_tau is None
    assert "# kendall_tau\tn/a" in cmp.format_tsv()
    assert cmp.rows[0][1] == cmp.rows[0][3] == 1


def test_compare_mismatch():
    with pytest.raises(EntitySetMismatch):
        compare_rankings(RankedList.from_scores({"a": 1}), RankedList.from_scores({"b": 1}))


# -- queries -----------------------------------------------------------------------------


def test_parse_query_good_handling(pipeline):
    q = parse_query("good handling", pipeline)
    assert q.terms == ["handling"]
    assert q.aspects[0].orientation == 1
    assert 0 < q.aspects[0].strength <= 1


def test_parse_query_bare_aspect(pipeline):
    q = parse_query("handling", pipeline)
    assert q.aspects == (QueryAspect("handling", 1, 1.0, "bare aspect"),)


def test_parse_query_negative(pipeline):
    assert parse_query("bad mileage", pipeline).aspects[0].orientation == -1


@pytest.mark.parametrize("text", ["gibberish xyzzy", "", "!!!"])
def test_parse_query_no_aspect(pipeline, text):
    with pytest.raises(NoAspectFound):
        parse_query(text, pipeline)
