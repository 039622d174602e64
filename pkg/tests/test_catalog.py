from __future__ import annotations

import json

import pytest

from querysketch import load_database, load_database_from
from querysketch.errors import (
    DanglingKeyReference,
    DuplicateQualifiedColumn,
    HeaderMismatch,
    MissingTableFile,
    TypeMismatch,
    UnknownTable,
)


def write_catalog(tmp_path, schema_doc, files):
    (tmp_path / "schema.json").write_text(json.dumps(schema_doc), encoding="utf-8")
    for name, text in files.items():
        (tmp_path / name).write_text(text, encoding="utf-8")
    return tmp_path / "schema.json"


def test_pubs_catalog_shape(pubs_catalog):
    assert pubs_catalog.table_names() == ["authors", "writes", "publications"]
    edges = sorted((e.a.qualified, e.b.qualified) for e in pubs_catalog.join_edges)
    assert edges == [("authors.aid", "writes.aid"), ("publications.pid", "writes.pid")]


def test_pubs_row_data(pubs_catalog):
    authors = pubs_catalog.table("authors")
    assert authors.rows == ((0, "Alan M. Turing"), (1, "Alonzo Church"))
    pubs = pubs_catalog.table("publications")
    assert pubs.column_values("year") == [1937, 1948, 1932]
    assert pubs.rows[0][1] == "Computability and λ-definability"


def test_empty_schema(tmp_path):
    schema = write_catalog(tmp_path, {"tables": []}, {})
    catalog = load_database(schema, tmp_path)
    assert catalog.table_names() == []
    assert catalog.join_edges == frozenset()


def test_dangling_key_reference(tmp_path):
    schema = write_catalog(
        tmp_path,
        {"tables": [
            {"name": "authors", "columns": [{"name": "aid", "type": "int", "key": "primary"}]},
            {"name": "writes", "columns": [
                {"name": "aid", "type": "int", "key": {"foreign": "authors.bogus"}}]},
        ]},
        {"authors.csv": "aid\n0\n", "writes.csv": "aid\n0\n"},
    )
    with pytest.raises(DanglingKeyReference):
        load_database(schema, tmp_path)


def test_foreign_key_must_target_a_key_column(tmp_path):
    schema = write_catalog(
        tmp_path,
        {"tables": [
            {"name": "authors", "columns": [
                {"name": "aid", "type": "int"},   # declared keyless
                {"name": "name", "type": "string"}]},
            {"name": "writes", "columns": [
                {"name": "aid", "type": "int", "key": {"foreign": "authors.aid"}}]},
        ]},
        {"authors.csv": "aid,name\n0,x\n", "writes.csv": "aid\n0\n"},
    )
    with pytest.raises(DanglingKeyReference):
        load_database(schema, tmp_path)


def test_missing_table_file(tmp_path):
    schema = write_catalog(
        tmp_path,
        {"tables": [{"name": "t", "columns": [{"name": "x", "type": "int"}]}]},
        {},
    )
    with pytest.raises(MissingTableFile):
        load_database(schema, tmp_path)


def test_type_mismatch_reports_location(tmp_path):
    schema = write_catalog(
        tmp_path,
        {"tables": [{"name": "t", "columns": [{"name": "x", "type": "int"}]}]},
        {"t.csv": "x\n1\noops\n"},
    )
    with pytest.raises(TypeMismatch) as err:
        load_database(schema, tmp_path)
    assert err.value.table == "t"
    assert err.value.row == 1
    assert err.value.column == "x"


def test_nulls_rejected(tmp_path):
    schema = write_catalog(
        tmp_path,
        {"tables": [{"name": "t", "columns": [
            {"name": "x", "type": "int"}, {"name": "y", "type": "string"}]}]},
        {"t.csv": "x,y\n1,\n"},
    )
    with pytest.raises(TypeMismatch):
        load_database(schema, tmp_path)


def test_duplicate_qualified_column(tmp_path):
    schema = write_catalog(
        tmp_path,
        {"tables": [{"name": "t", "columns": [
            {"name": "x", "type": "int"}, {"name": "x", "type": "int"}]}]},
        {"t.csv": "x,x\n1,2\n"},
    )
    with pytest.raises(DuplicateQualifiedColumn):
        load_database(schema, tmp_path)


def test_header_mismatch(tmp_path):
    schema = write_catalog(
        tmp_path,
        {"tables": [{"name": "t", "columns": [
            {"name": "x", "type": "int"}, {"name": "y", "type": "int"}]}]},
        {"t.csv": "y,x\n1,2\n"},
    )
    with pytest.raises(HeaderMismatch):
        load_database(schema, tmp_path)


def test_preview(pubs_catalog):
    headers, rows = pubs_catalog.preview("authors", 2)
    assert headers == ["aid", "name"]
    assert rows == [(0, "Alan M. Turing"), (1, "Alonzo Church")]

    headers, rows = pubs_catalog.preview("authors", 0)
    assert headers == ["aid", "name"] and rows == []

    _, rows = pubs_catalog.preview("publications", 10)
    assert len(rows) == 3

    with pytest.raises(UnknownTable):
        pubs_catalog.preview("nope", 1)


def test_preview_prefix_property(pubs_catalog):
    for table in pubs_catalog.table_names():
        for k in range(4):
            _, shorter = pubs_catalog.preview(table, k)
            _, longer = pubs_catalog.preview(table, k + 1)
            assert longer[: len(shorter)] == shorter


def test_join_candidates(pubs_catalog):
    def oracle(left):
        out = set()
        for edge in pubs_catalog.join_edges:
            if edge.a.table_name == left:
                out.add((edge.a.qualified, edge.b.qualified, edge.b.table_name))
            if edge.b.table_name == left:
                out.add((edge.b.qualified, edge.a.qualified, edge.a.table_name))
        return out

    for table in pubs_catalog.table_names():
        got = {(l.qualified, r.qualified, t) for l, r, t in pubs_catalog.join_candidates(table)}
        assert got == oracle(table)

    assert [(l.qualified, r.qualified, t) for l, r, t in pubs_catalog.join_candidates("authors")] \
        == [("authors.aid", "writes.aid", "writes")]
    assert [(l.qualified, r.qualified, t) for l, r, t in pubs_catalog.join_candidates("publications")] \
        == [("publications.pid", "writes.pid", "writes")]

    with pytest.raises(UnknownTable):
        pubs_catalog.join_candidates("nope")


def test_keyless_table_has_no_candidates(tmp_path):
    schema = write_catalog(
        tmp_path,
        {"tables": [{"name": "lonely", "columns": [{"name": "x", "type": "int"}]}]},
        {"lonely.csv": "x\n5\n"},
    )
    catalog = load_database(schema, tmp_path)
    assert catalog.join_candidates("lonely") == []


def test_fk_fk_edges_connect_distinct_tables(tmp_path):
    schema = write_catalog(
        tmp_path,
        {"tables": [
            {"name": "parent", "columns": [{"name": "id", "type": "int", "key": "primary"}]},
            {"name": "a", "columns": [
                {"name": "pid", "type": "int", "key": {"foreign": "parent.id"}}]},
            {"name": "b", "columns": [
                {"name": "pid", "type": "int", "key": {"foreign": "parent.id"}}]},
        ]},
        {"parent.csv": "id\n0\n", "a.csv": "pid\n0\n", "b.csv": "pid\n0\n"},
    )
    catalog = load_database(schema, tmp_path)
    edges = sorted((e.a.qualified, e.b.qualified) for e in catalog.join_edges)
    assert ("a.pid", "b.pid") in edges            # FK-FK across tables
    assert ("a.pid", "parent.id") in edges
    assert ("b.pid", "parent.id") in edges
    assert len(edges) == 3


def test_schema_round_trip(pubs_catalog):
    from conftest import DATA_DIR

    doc = pubs_catalog.schema_document()
    reloaded = load_database_from(doc, DATA_DIR)
    assert reloaded.tables == pubs_catalog.tables
    assert reloaded.join_edges == pubs_catalog.join_edges
