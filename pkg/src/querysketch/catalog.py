"""Database catalog: schema + CSV row data + derived join graph.

A catalog is loaded once from a JSON schema descriptor and a directory of
RFC-4180 CSV files, then shared read-only. Inner joins are restricted to
declared key pairs: every primary-key/foreign-key pair, plus any pair of
foreign-key columns of equal value type.

Schema descriptor format::

    {"tables": [{"name": "authors",
                 "file": "authors.csv",
                 "columns": [{"name": "aid", "type": "int", "key": "primary"},
                             {"name": "name", "type": "string", "key": "none"}]}]}

A foreign key is declared as ``{"key": {"foreign": "table.column"}}``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    DanglingKeyReference,
    DuplicateQualifiedColumn,
    HeaderMismatch,
    MissingTableFile,
    SchemaFormatError,
    TypeMismatch,
    UnknownTable,
)

VALUE_TYPES = ("int", "float", "string")

Cell = int | float | str
Row = tuple[Cell, ...]


@dataclass(frozen=True)
class ColumnDef:
    table_name: str
    column_name: str
    value_type: str                      # "int" | "float" | "string"
    key_role: str = "none"               # "none" | "primary" | "foreign"
    foreign_target: str | None = None    # "table.column" when key_role == "foreign"

    @property
    def qualified(self) -> str:
        return f"{self.table_name}.{self.column_name}"


@dataclass(frozen=True)
class TableData:
    name: str
    columns: tuple[ColumnDef, ...]
    rows: tuple[Row, ...]

    def column(self, name: str) -> ColumnDef:
        for col in self.columns:
            if col.column_name == name:
                return col
        raise KeyError(name)

    def column_values(self, name: str) -> list[Cell]:
        idx = [c.column_name for c in self.columns].index(name)
        return [row[idx] for row in self.rows]


@dataclass(frozen=True)
class JoinEdge:
    """Unordered key pair eligible for an inner join; a, b sorted by qualified name."""

    a: ColumnDef
    b: ColumnDef


@dataclass
class Catalog:
    tables: dict[str, TableData] = field(default_factory=dict)
    join_edges: frozenset[JoinEdge] = frozenset()

    # -- lookup ---------------------------------------------------------

    def table(self, name: str) -> TableData:
        try:
            return self.tables[name]
        except KeyError:
            raise UnknownTable(f"unknown table '{name}'") from None

    def table_names(self) -> list[str]:
        return list(self.tables.keys())

    def has_table(self, name: str) -> bool:
        return name in self.tables

    def all_columns(self) -> list[ColumnDef]:
        return [col for t in self.tables.values() for col in t.columns]

    def resolve_column(self, table: str, column: str) -> ColumnDef:
        t = self.table(table)
        try:
            return t.column(column)
        except KeyError:
            raise UnknownTable(f"table '{table}' has no column '{column}'") from None

    def find_column(self, bare_name: str) -> list[ColumnDef]:
        """All catalog columns with the given unqualified name."""
        return [c for c in self.all_columns() if c.column_name == bare_name]

    # -- operations -----------------------------------------------------

    def preview(self, table: str, k: int) -> tuple[list[str], list[Row]]:
        """First min(k, row_count) rows of `table` plus its column headers."""
        t = self.table(table)
        headers = [c.column_name for c in t.columns]
        return headers, list(t.rows[: max(k, 0)])

    def join_candidates(self, left: str) -> list[tuple[ColumnDef, ColumnDef, str]]:
        """Join edges incident to `left`, oriented as (left column, right column,
        right table). The returned list is cached; treat it as read-only."""
        self.table(left)
        cache = self.__dict__.setdefault("_join_candidates_cache", {})
        hit = cache.get(left)
        if hit is not None:
            return hit
        out = []
        for edge in sorted(self.join_edges, key=lambda e: (e.a.qualified, e.b.qualified)):
            if edge.a.table_name == left:
                out.append((edge.a, edge.b, edge.b.table_name))
            if edge.b.table_name == left:
                out.append((edge.b, edge.a, edge.a.table_name))
        cache[left] = out
        return out

    # -- serialization --------------------------------------------------

    def schema_document(self) -> dict:
        """Schema descriptor that reloads to an identical catalog (modulo file names)."""
        tables = []
        for t in self.tables.values():
            cols = []
            for c in t.columns:
                if c.key_role == "foreign":
                    key: object = {"foreign": c.foreign_target}
                else:
                    key = c.key_role
                cols.append({"name": c.column_name, "type": c.value_type, "key": key})
            tables.append({"name": t.name, "file": f"{t.name}.csv", "columns": cols})
        return {"tables": tables}

    def content_digest(self) -> str:
        import hashlib

        h = hashlib.sha256()
        h.update(json.dumps(self.schema_document(), sort_keys=True).encode())
        for t in self.tables.values():
            for row in t.rows:
                h.update(repr(row).encode())
        return h.hexdigest()


# -- loading ------------------------------------------------------------


def _parse_cell(raw: str, col: ColumnDef, table: str, row_idx: int) -> Cell:
    if raw == "":
        raise TypeMismatch(
            f"empty cell in {table}.{col.column_name} at data row {row_idx} (nulls are rejected)",
            table=table, row=row_idx, column=col.column_name,
        )
    try:
        if col.value_type == "int":
            return int(raw)
        if col.value_type == "float":
            return float(raw)
        return raw
    except ValueError:
        raise TypeMismatch(
            f"cell '{raw}' in {table}.{col.column_name} at data row {row_idx} "
            f"does not parse as {col.value_type}",
            table=table, row=row_idx, column=col.column_name,
        ) from None


def _column_from_spec(table_name: str, spec: dict) -> ColumnDef:
    try:
        name = spec["name"]
        vtype = spec["type"]
    except (KeyError, TypeError):
        raise SchemaFormatError(f"malformed column spec in table '{table_name}': {spec!r}") from None
    if vtype not in VALUE_TYPES:
        raise SchemaFormatError(f"column {table_name}.{name}: unknown type '{vtype}'")
    key = spec.get("key", "none")
    if key == "none" or key == "primary":
        return ColumnDef(table_name, name, vtype, key_role=key)
    if isinstance(key, dict) and set(key) == {"foreign"}:
        return ColumnDef(table_name, name, vtype, key_role="foreign", foreign_target=key["foreign"])
    raise SchemaFormatError(f"column {table_name}.{name}: malformed key spec {key!r}")


def _build_join_graph(catalog_tables: dict[str, TableData]) -> frozenset[JoinEdge]:
    by_qualified = {c.qualified: c for t in catalog_tables.values() for c in t.columns}
    foreign = [c for t in catalog_tables.values() for c in t.columns if c.key_role == "foreign"]

    edges: set[JoinEdge] = set()

    def add(a: ColumnDef, b: ColumnDef) -> None:
        if a.qualified == b.qualified:
            return
        lo, hi = sorted((a, b), key=lambda c: c.qualified)
        edges.add(JoinEdge(lo, hi))

    for fk in foreign:
        target = by_qualified.get(fk.foreign_target or "")
        if target is None:
            raise DanglingKeyReference(
                f"{fk.qualified} declares foreign key to missing column '{fk.foreign_target}'"
            )
        if target.key_role not in ("primary", "foreign"):
            raise DanglingKeyReference(
                f"{fk.qualified} targets {target.qualified}, which is not a key column"
            )
        add(fk, target)

    # FK-FK pairs join on shared value semantics; require equal value types
    # and distinct tables (two FKs of one table reference unrelated domains).
    for i, f1 in enumerate(foreign):
        for f2 in foreign[i + 1:]:
            if f1.value_type == f2.value_type and f1.table_name != f2.table_name:
                add(f1, f2)

    return frozenset(edges)


def load_schema(schema_doc: dict) -> list[tuple[str, str, tuple[ColumnDef, ...]]]:
    """Validate a schema document; returns (table name, file name, columns) triples."""
    if not isinstance(schema_doc, dict) or not isinstance(schema_doc.get("tables"), list):
        raise SchemaFormatError("schema descriptor must be an object with a 'tables' list")
    out = []
    for tspec in schema_doc["tables"]:
        if not isinstance(tspec, dict) or "name" not in tspec:
            raise SchemaFormatError(f"malformed table spec: {tspec!r}")
        name = tspec["name"]
        file_name = tspec.get("file", f"{name}.csv")
        cols = tuple(_column_from_spec(name, c) for c in tspec.get("columns", []))
        out.append((name, file_name, cols))
    return out


def load_database(schema_path: str | Path, data_dir: str | Path) -> Catalog:
    """Load schema descriptor + CSV files into an immutable Catalog."""
    schema_path = Path(schema_path)
    data_dir = Path(data_dir)
    try:
        schema_doc = json.loads(schema_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise MissingTableFile(f"schema descriptor not found: {schema_path}") from None
    except json.JSONDecodeError as exc:
        raise SchemaFormatError(f"schema descriptor is not valid JSON: {exc}") from None
    return load_database_from(schema_doc, data_dir)


def load_database_from(schema_doc: dict, data_dir: str | Path,
                       inline_csv: dict[str, str] | None = None) -> Catalog:
    """Load a catalog from an in-memory schema document.

    Row data comes from `inline_csv` (table name -> CSV text) when given,
    otherwise from per-table files under `data_dir`.
    """
    data_dir = Path(data_dir)
    specs = load_schema(schema_doc)

    seen_qualified: set[str] = set()
    tables: dict[str, TableData] = {}
    for name, file_name, cols in specs:
        if name in tables:
            raise SchemaFormatError(f"table '{name}' declared twice")
        for c in cols:
            if c.qualified in seen_qualified:
                raise DuplicateQualifiedColumn(f"duplicate qualified column {c.qualified}")
            seen_qualified.add(c.qualified)

        if inline_csv is not None and name in inline_csv:
            reader = csv.reader(inline_csv[name].splitlines())
        else:
            path = data_dir / file_name
            if not path.is_file():
                raise MissingTableFile(f"no data file for table '{name}': {path}")
            reader = csv.reader(path.read_text(encoding="utf-8").splitlines())

        try:
            header = next(reader)
        except StopIteration:
            raise HeaderMismatch(f"table '{name}': data file has no header row") from None
        expected = [c.column_name for c in cols]
        if header != expected:
            raise HeaderMismatch(
                f"table '{name}': header {header!r} does not match declared columns {expected!r}"
            )

        rows = []
        for row_idx, raw_row in enumerate(reader):
            if len(raw_row) != len(cols):
                raise TypeMismatch(
                    f"table '{name}' data row {row_idx} has {len(raw_row)} cells, expected {len(cols)}",
                    table=name, row=row_idx,
                )
            rows.append(tuple(_parse_cell(raw, col, name, row_idx)
                              for raw, col in zip(raw_row, cols)))
        tables[name] = TableData(name, cols, tuple(rows))

    return Catalog(tables=tables, join_edges=_build_join_graph(tables))
