from __future__ import annotations

import pytest

import querysketch.lang as L
from querysketch.errors import EmptyCandidateList, NoCandidates
from querysketch.questions import (
    candidate_questions,
    estimate_scores,
    select_question,
)
from querysketch.sampler import SampleSet


def _table_fills(questions, hole):
    return {q.refinement.steps[0].fill for q in questions
            if q.refinement.steps[0].hole == hole and len(q.refinement.steps) == 1
            and q.refinement.steps[0].kind == L.TABLE}


def test_candidates_for_pubs_sketch(pubs_sketch, pubs_catalog):
    questions = candidate_questions(pubs_sketch, pubs_catalog, ())

    # expected members: the merged authors-join continuation and the linked c_name fill
    continuation = L.Join(
        "authors", L.ColumnName("authors", "aid"), L.ColumnName("writes", "aid"),
        L.Join("writes", L.ColumnHole("c_new0"), L.ColumnHole("c_new1"),
               L.TableHole("t_new0")))
    assert continuation in _table_fills(questions, "t")

    name_fills = [q for q in questions
                  if q.refinement.steps == (L.HoleFill("c_name", L.COLUMN,
                                                       L.ColumnName("authors", "name")),)]
    assert len(name_fills) == 1
    filled = name_fills[0].sketch
    assert filled.columns == (L.ColumnName("authors", "name"),)
    assert L.soft_primitives(filled.source.source.soft)[0].column == \
        L.ColumnName("authors", "name")


def brute_force_table_fills(catalog, sketch):
    """Independent enumeration of every fill form offered for a fresh table hole."""
    fills = set()
    for t in catalog.table_names():
        fills.add(L.BaseTable(t))
    for t in catalog.table_names():
        for lc, rc, rt in catalog.join_candidates(t):
            left = L.ColumnName(lc.table_name, lc.column_name)
            right = L.ColumnName(rc.table_name, rc.column_name)
            fills.add(L.Join(t, left, right, L.BaseTable(rt)))
            fills.add(L.Join(t, left, right,
                             L.Join(rt, L.ColumnHole("c_new0"), L.ColumnHole("c_new1"),
                                    L.TableHole("t_new0"))))
    return fills


def test_candidate_count_matches_brute_force(pubs_sketch, pubs_catalog):
    questions = candidate_questions(pubs_sketch, pubs_catalog, ())
    got = _table_fills(questions, "t")
    expected = brute_force_table_fills(pubs_catalog, pubs_sketch)
    assert got == expected
    # 3 terminals + 2 edges x 2 orientations for each join form
    assert len(expected) == 3 + 4 + 4

    column_questions = [q for q in questions if q.refinement.steps[0].kind == L.COLUMN]
    assert len(column_questions) == 2 + 5        # c_name strings + c_year ints
    assert len(questions) == 11 + 7


def test_candidates_exclude_rejected(pubs_sketch, pubs_catalog):
    questions = candidate_questions(pubs_sketch, pubs_catalog, ())
    rejected = questions[0].sketch
    remaining = candidate_questions(pubs_sketch, pubs_catalog, (rejected,))
    assert {q.sketch for q in remaining} == {q.sketch for q in questions} - {rejected}


def test_candidate_polynomial_bound(pubs_sketch, pubs_catalog):
    questions = candidate_questions(pubs_sketch, pubs_catalog, ())
    n = len(pubs_catalog.table_names())
    m = len(pubs_catalog.all_columns())
    holes = len(L.hole_kinds(pubs_sketch))
    assert len(questions) <= 3 * (n + m) * holes


def test_every_candidate_is_a_refinement(pubs_sketch, pubs_catalog):
    for q in candidate_questions(pubs_sketch, pubs_catalog, ()):
        assert L.matches(pubs_sketch, q.sketch)
        assert q.sketch != pubs_sketch


def test_group_questions_fill_the_join_triple(pubs_sketch, pubs_catalog):
    refined = L.apply_refinement(pubs_sketch, L.Refinement((
        L.HoleFill("t", L.TABLE,
                   L.Join("authors", L.ColumnHole("c_new0"), L.ColumnHole("c_new1"),
                          L.TableHole("t_new0"))),)))
    questions = candidate_questions(refined, pubs_catalog, ())
    group = [q for q in questions if len(q.refinement.steps) == 3]
    # one edge from authors, two forms (terminal and continuation)
    assert len(group) == 2
    for q in group:
        holes_filled = {s.hole for s in q.refinement.steps}
        assert holes_filled == {"c_new0", "c_new1", "t_new0"}
        assert q.refinement.steps[0].fill == L.ColumnName("authors", "aid")
        assert q.refinement.steps[1].fill == L.ColumnName("writes", "aid")
    # no lone column questions remain for grouped join holes
    assert not any(q.refinement.steps[0].hole in ("c_new0", "c_new1")
                   for q in questions if len(q.refinement.steps) == 1)


def test_no_candidates_error(pubs_catalog):
    sketch = L.parse_sketch("SELECT ??c:column FROM (authors)", pubs_catalog)
    questions = candidate_questions(sketch, pubs_catalog, ())
    with pytest.raises(NoCandidates):
        candidate_questions(sketch, pubs_catalog, tuple(q.sketch for q in questions))


def _sample_set(sketch, fills):
    completions = tuple(
        L.substitute(sketch, {"c": col}, {}) for col in fills
    )
    return SampleSet(completions)


def test_estimate_scores_formula(pubs_catalog):
    sketch = L.parse_sketch("SELECT ??c:column FROM (publications)", pubs_catalog)
    questions = candidate_questions(sketch, pubs_catalog, ())
    pid = L.ColumnName("publications", "pid")
    year = L.ColumnName("publications", "year")
    title = L.ColumnName("publications", "title")

    samples = _sample_set(sketch, [pid, pid, year, title])
    scored = {s.question.refinement.steps[0].fill: s
              for s in estimate_scores(questions, samples)}

    assert scored[pid].pi_plus_hat == 0.5
    assert scored[pid].score_hat == 0.5
    assert scored[year].pi_plus_hat == 0.25
    assert scored[year].score_hat == 2 * 0.25 * 0.75

    samples = _sample_set(sketch, [pid, pid, pid, year])
    scored = {s.question.refinement.steps[0].fill: s
              for s in estimate_scores(questions, samples)}
    assert scored[pid].score_hat == 2 * 0.75 * 0.25


def test_fast_hole_wise_scoring_equals_tree_matching(pubs_sketch, pubs_catalog, pubs_theta):
    """The assignment-based scorer must agree with full-tree matching."""
    from querysketch.sampler import SamplerConfig, mh_sample

    samples = mh_sample(pubs_sketch, pubs_theta, pubs_catalog, (),
                        SamplerConfig(sample_count=80, mh_steps=60, max_join_depth=3, seed=2))
    candidates = candidate_questions(pubs_sketch, pubs_catalog, ())
    fast = estimate_scores(candidates, samples)
    slow = estimate_scores(candidates, SampleSet(samples.completions))
    assert [(s.question.sketch, s.pi_plus_hat) for s in fast] == \
        [(s.question.sketch, s.pi_plus_hat) for s in slow]

    # a foreign base sketch disables the hole-wise path instead of misusing it
    other_base = L.parse_sketch("SELECT ??c:column FROM (authors)", pubs_catalog)
    other_candidates = candidate_questions(other_base, pubs_catalog, ())
    mixed = estimate_scores(other_candidates, samples)
    reference = estimate_scores(other_candidates, SampleSet(samples.completions))
    assert [(s.question.sketch, s.pi_plus_hat) for s in mixed] == \
        [(s.question.sketch, s.pi_plus_hat) for s in reference]


def test_zero_support_questions_dropped(pubs_catalog):
    sketch = L.parse_sketch("SELECT ??c:column FROM (publications)", pubs_catalog)
    questions = candidate_questions(sketch, pubs_catalog, ())
    pid = L.ColumnName("publications", "pid")
    samples = _sample_set(sketch, [pid, pid])
    scored = estimate_scores(questions, samples)
    assert {s.question.refinement.steps[0].fill for s in scored} == {pid}


def test_score_law_and_argmax(pubs_sketch, pubs_catalog, pubs_theta):
    from querysketch.sampler import SamplerConfig, mh_sample

    samples = mh_sample(pubs_sketch, pubs_theta, pubs_catalog, (),
                        SamplerConfig(sample_count=60, mh_steps=60, max_join_depth=3, seed=4))
    scored = estimate_scores(candidate_questions(pubs_sketch, pubs_catalog, ()), samples)
    assert scored
    for s in scored:
        assert s.score_hat == 2 * s.pi_plus_hat * (1 - s.pi_plus_hat)
        assert 0.0 <= s.score_hat <= 0.5
        assert s.pi_plus_hat > 0
    best = select_question(scored)
    assert best.score_hat == max(s.score_hat for s in scored)


def test_select_question_tiebreak():
    from querysketch import load_database_from
    from querysketch.questions import ScoredQuestion

    catalog = load_database_from(
        {"tables": [{"name": "m", "columns": [
            {"name": "a", "type": "int"}, {"name": "b", "type": "int"}]}]},
        ".", inline_csv={"m": "a,b\n1,2\n"})
    sketch = L.parse_sketch("SELECT ??c:column FROM (m)", catalog)
    questions = candidate_questions(sketch, catalog, ())
    scored = [ScoredQuestion(q, 0.5, 0.5) for q in questions]
    best = select_question(scored)
    # equal score and size: lexicographically first summary wins
    assert best.question.summary() == min(q.summary() for q in questions)

    with pytest.raises(EmptyCandidateList):
        select_question([])


def test_single_candidate_selected(pubs_catalog):
    sketch = L.parse_sketch('SELECT ??c:column FROM (authors) WHERE ??c:column = "x"',
                            pubs_catalog)
    questions = candidate_questions(sketch, pubs_catalog, ())
    # both string columns are type-compatible candidates catalog-wide
    assert {q.refinement.steps[0].fill for q in questions} == {
        L.ColumnName("authors", "name"), L.ColumnName("publications", "title")}
    # but only the one with sample support survives, and it gets selected
    samples = _sample_set(sketch, [L.ColumnName("authors", "name")])
    scored = estimate_scores(questions, samples)
    assert len(scored) == 1
    assert select_question(scored).question.refinement.steps[0].fill == \
        L.ColumnName("authors", "name")
