from __future__ import annotations

import math
import random
from collections import Counter

import pytest

import querysketch.lang as L
from oracles import exact_distribution, total_variation
from querysketch import load_database_from
from querysketch.errors import NoValidExpansion, RejectionExhausted
from querysketch.sampler import (
    HoleContext,
    SamplerConfig,
    analyze_units,
    compatible_columns,
    mh_sample,
    sample_hole_expression,
)
from querysketch.scoring import precompute_theta, unnormalized_weight


def test_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(sample_count=0)
    with pytest.raises(ValueError):
        SamplerConfig(mh_steps=-1)


def test_compatible_columns_respects_predicates(pubs_sketch, pubs_catalog):
    # c_year appears in `= 1948` and both integer range bounds
    cols = compatible_columns(pubs_sketch, "c_year", pubs_catalog)
    assert {c.qualified for c in cols} == {
        "authors.aid", "writes.aid", "writes.pid", "publications.pid", "publications.year"}
    # c_name appears in the projection and the contains primitive
    cols = compatible_columns(pubs_sketch, "c_name", pubs_catalog)
    assert {c.qualified for c in cols} == {"authors.name", "publications.title"}


def test_sample_column_hole_uniform(pubs_sketch, pubs_catalog):
    choices = compatible_columns(pubs_sketch, "c_year", pubs_catalog)
    rng = random.Random(1)
    counts = Counter(
        sample_hole_expression(L.COLUMN, HoleContext(column_choices=choices),
                               pubs_catalog, rng)
        for _ in range(2500)
    )
    assert set(counts) == set(choices)
    for c in choices:
        assert abs(counts[c] / 2500 - 1 / len(choices)) < 0.05


def test_sample_table_hole_depth_one_uniform(pubs_catalog):
    rng = random.Random(2)
    counts = Counter(
        sample_hole_expression(L.TABLE, HoleContext(depth_budget=1), pubs_catalog, rng)
        for _ in range(1500)
    )
    assert set(counts) == {L.BaseTable(t) for t in pubs_catalog.table_names()}
    for count in counts.values():
        assert abs(count / 1500 - 1 / 3) < 0.05


def test_sample_table_hole_respects_key_edges_and_budget(pubs_catalog):
    rng = random.Random(3)
    for _ in range(400):
        chain = sample_hole_expression(L.TABLE, HoleContext(depth_budget=3),
                                       pubs_catalog, rng)
        tables = L.chain_tables(chain)
        assert 1 <= len(tables) <= 3
        node = chain
        while isinstance(node, L.Join):
            edges = {(l.qualified, r.qualified)
                     for l, r, _ in pubs_catalog.join_candidates(node.table)}
            assert (node.left_col.qualified, node.right_col.qualified) in edges
            assert node.rest.table == node.right_col.table
            node = node.rest


def test_no_valid_expansion_for_contains_without_string_columns():
    catalog = load_database_from(
        {"tables": [{"name": "m", "columns": [
            {"name": "a", "type": "int"}, {"name": "b", "type": "int"}]}]},
        ".", inline_csv={"m": "a,b\n1,2\n"})
    sketch = L.parse_sketch(
        'SELECT ??c:column FROM (m {(contains ??c:column ".*x.*")})', catalog)
    theta = precompute_theta(sketch, catalog)
    with pytest.raises(NoValidExpansion):
        mh_sample(sketch, theta, catalog, (), SamplerConfig(sample_count=2, mh_steps=5))


def test_hole_free_sketch_samples_itself(pubs_catalog):
    q = L.parse_sketch("SELECT name FROM (authors)", pubs_catalog)
    theta = precompute_theta(q, pubs_catalog)
    out = mh_sample(q, theta, pubs_catalog, (), SamplerConfig(sample_count=9, mh_steps=5))
    assert out.completions == (q,)


def test_sample_set_invariants(pubs_sketch, pubs_catalog, pubs_theta, pubs_gt):
    cfg = SamplerConfig(sample_count=40, mh_steps=60, max_join_depth=3, seed=13)
    reject = L.apply_refinement(pubs_sketch, L.Refinement((
        L.HoleFill("t", L.TABLE, L.BaseTable("publications")),)))
    samples = mh_sample(pubs_sketch, pubs_theta, pubs_catalog, (reject,), cfg)
    assert len(samples) == 40
    for s, asg in zip(samples.completions, samples.assignments):
        assert L.is_complete(s)
        assert L.matches(pubs_sketch, s)
        assert not L.matches(reject, s)
        assert unnormalized_weight(s, pubs_theta, pubs_catalog) > 0
        # name linkage: all occurrences of c_year were filled identically
        years = {node.column for node in L.walk(s) if isinstance(node, L.SoftCmp)}
        assert years == {asg["c_year"]}


def test_rejected_join_continuation_excludes_matching_chains(
        pubs_sketch, pubs_catalog, pubs_theta):
    # reject "t starts with authors joined onward": no sample's chain may match it
    reject = L.apply_refinement(pubs_sketch, L.Refinement((
        L.HoleFill("t", L.TABLE,
                   L.Join("authors", L.ColumnName("authors", "aid"),
                          L.ColumnName("writes", "aid"),
                          L.Join("writes", L.ColumnHole("c_new0"), L.ColumnHole("c_new1"),
                                 L.TableHole("t_new0")))),)))
    cfg = SamplerConfig(sample_count=40, mh_steps=60, max_join_depth=3, seed=21)
    samples = mh_sample(pubs_sketch, pubs_theta, pubs_catalog, (reject,), cfg)
    for s in samples:
        assert not L.matches(reject, s)
        chain = s.source.source
        tables = L.chain_tables(chain)
        # authors-headed chains of three or more tables are exactly what was rejected
        assert not (tables[0] == "authors" and len(tables) >= 3)


def test_determinism(pubs_sketch, pubs_catalog, pubs_theta):
    cfg = SamplerConfig(sample_count=25, mh_steps=40, max_join_depth=3, seed=99)
    a = mh_sample(pubs_sketch, pubs_theta, pubs_catalog, (), cfg)
    b = mh_sample(pubs_sketch, pubs_theta, pubs_catalog, (), cfg)
    assert a.completions == b.completions
    c = mh_sample(pubs_sketch, pubs_theta, pubs_catalog, (), cfg, salt="other")
    assert a.completions != c.completions


def test_detailed_balance_two_state_space():
    catalog = load_database_from(
        {"tables": [{"name": "m", "columns": [
            {"name": "a", "type": "int"}, {"name": "b", "type": "int"}]}]},
        ".", inline_csv={"m": "a,b\n12,1\n15,2\n30,3\n"})
    sketch = L.parse_sketch("SELECT ??c:column FROM (m {10 <= ??c:column})", catalog)
    theta = precompute_theta(sketch, catalog)
    assert theta.lookup(("cmp", "gsim", "int", 10), "m.a") == 1.0
    assert theta.lookup(("cmp", "gsim", "int", 10), "m.b") == 0.0

    cfg = SamplerConfig(sample_count=1200, mh_steps=25, seed=5)
    samples = mh_sample(sketch, theta, catalog, (), cfg)
    heavy = sum(1 for s in samples if s.columns[0] == L.ColumnName("m", "a"))
    expected = math.exp(1.0) / (math.exp(1.0) + 1.0)
    assert abs(heavy / len(samples) - expected) < 0.05


def test_mh_marginal_close_to_exact_distribution(pubs_sketch, pubs_catalog, pubs_theta):
    cfg = SamplerConfig(sample_count=500, mh_steps=120, max_join_depth=3, seed=23)
    samples = mh_sample(pubs_sketch, pubs_theta, pubs_catalog, (), cfg)
    empirical = Counter(samples.completions)
    emp = {k: v / len(samples) for k, v in empirical.items()}
    exact = exact_distribution(pubs_sketch, pubs_catalog, pubs_theta, budget=3)
    assert set(emp) <= set(exact)
    assert total_variation(emp, exact) < 0.15


def test_rejection_exhausted_when_negatives_cover_space():
    catalog = load_database_from(
        {"tables": [{"name": "m", "columns": [
            {"name": "a", "type": "int"}, {"name": "b", "type": "int"}]}]},
        ".", inline_csv={"m": "a,b\n1,2\n"})
    sketch = L.parse_sketch("SELECT ??c:column FROM (m)", catalog)
    theta = precompute_theta(sketch, catalog)
    negatives = tuple(
        L.apply_refinement(sketch, L.Refinement((
            L.HoleFill("c", L.COLUMN, L.ColumnName("m", col)),)))
        for col in ("a", "b")
    )
    with pytest.raises(RejectionExhausted):
        mh_sample(sketch, theta, catalog, negatives,
                  SamplerConfig(sample_count=2, mh_steps=5, rejection_retry_limit=8))


def test_group_unit_analysis(pubs_sketch, pubs_catalog):
    refined = L.apply_refinement(pubs_sketch, L.Refinement((
        L.HoleFill("t", L.TABLE,
                   L.Join("authors", L.ColumnHole("c_new0"), L.ColumnHole("c_new1"),
                          L.TableHole("t_new"))),)))
    units = analyze_units(refined, pubs_catalog, SamplerConfig(max_join_depth=4))
    names = {frozenset(u.names) for u in units}
    assert frozenset({"c_new0", "c_new1", "t_new"}) in names

    theta = precompute_theta(refined, pubs_catalog)
    samples = mh_sample(refined, theta, pubs_catalog, (),
                        SamplerConfig(sample_count=30, mh_steps=40, max_join_depth=3, seed=3))
    for s in samples:
        chain = s.source.source
        assert chain.table == "authors"
        # the group filled along the single key edge available from authors
        assert chain.left_col == L.ColumnName("authors", "aid")
        assert chain.right_col == L.ColumnName("writes", "aid")
        assert L.chain_tables(chain.rest)[0] == "writes"
