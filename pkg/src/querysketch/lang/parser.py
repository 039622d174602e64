"""Parser for the concrete sketch syntax.

Surface form (keywords are case-sensitive)::

    SELECT name, ??c:column
    FROM (authors INNER-JOIN ??t:table ON authors.aid = ??c2:column
          {(contains name ".*Church.*") AND (1900 <= year <= 2020)})
    WHERE publications.year = 1948

Holes are written ``??name:column`` / ``??name:table``. Soft blocks ``{...}``
attach to the table expression they follow; inside a block, ``<=`` and ``>=``
are the soft comparisons, ``~=`` is soft equality, ``x in c`` is membership,
and ``lo <= c <= hi`` desugars to the conjunction of the two bounds. A block
after the WHERE clause (or after the FROM group when WHERE is absent)
attaches to the select expression; a second trailing block attaches to the
whole query. Regex literals are written ``r"..."``; the pattern argument of
``contains`` is always a regex.

Column constants resolve against the catalog: ``table.column`` directly,
bare names only when unique catalog-wide.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..catalog import Catalog
from ..errors import (
    HoleAtForbiddenPosition,
    SketchSyntaxError,
    UnknownColumnConstant,
    UnresolvedTable,
)
from . import nodes as n

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<innerjoin>INNER-JOIN)
  | (?P<regex>r"(?:\\.|[^"\\])*")
  | (?P<string>"(?:\\.|[^"\\])*")
  | (?P<number>-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<hole>\?\?)
  | (?P<op><=|>=|~=|[(){},.:=<>])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)

_KEYWORDS = {"SELECT", "FROM", "WHERE", "ON", "AND", "OR", "true", "contains", "in"}


@dataclass(frozen=True)
class Token:
    type: str      # "innerjoin" | "regex" | "string" | "number" | "hole" | "op" | "ident" | "kw" | "eof"
    text: str
    line: int
    col: int


def _unescape(body: str) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body) and body[i + 1] in ('"', "\\"):
            out.append(body[i + 1])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise SketchSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup or ""
        lexeme = m.group()
        if kind != "ws":
            if kind == "ident" and lexeme in _KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str, catalog: Catalog):
        self.tokens = tokenize(text)
        self.pos = 0
        self.catalog = catalog

    # -- token helpers ----------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.type != "eof":
            self.pos += 1
        return tok

    def error(self, message: str, tok: Token | None = None) -> SketchSyntaxError:
        tok = tok or self.peek()
        return SketchSyntaxError(message, tok.line, tok.col)

    def expect(self, type_: str, text: str | None = None) -> Token:
        tok = self.peek()
        if tok.type != type_ or (text is not None and tok.text != text):
            want = text or type_
            raise self.error(f"expected {want!r}, found {tok.text or 'end of input'!r}")
        return self.next()

    def at(self, type_: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.type == type_ and (text is None or tok.text == text)

    # -- terminals ---------------------------------------------------------

    def parse_const(self) -> n.Const:
        tok = self.peek()
        if tok.type == "number":
            self.next()
            if "." in tok.text or "e" in tok.text or "E" in tok.text:
                return n.Const("float", float(tok.text))
            return n.Const("int", int(tok.text))
        if tok.type == "string":
            self.next()
            return n.Const("string", _unescape(tok.text[1:-1]))
        if tok.type == "regex":
            self.next()
            return n.Const("regex", _unescape(tok.text[2:-1]))
        raise self.error(f"expected a constant, found {tok.text!r}")

    def parse_hole(self, expected_kind: str, position: str) -> tuple[str, str]:
        self.expect("hole")
        name = self.expect("ident").text
        self.expect("op", ":")
        kind_tok = self.next()
        if kind_tok.text not in (n.TABLE, n.COLUMN):
            raise self.error(f"hole kind must be 'column' or 'table', found {kind_tok.text!r}", kind_tok)
        if kind_tok.text != expected_kind:
            raise HoleAtForbiddenPosition(
                f"hole '??{name}:{kind_tok.text}' cannot appear in a {position} position"
            )
        return name, kind_tok.text

    def parse_colref(self) -> n.ColumnRef:
        if self.at("hole"):
            name, _ = self.parse_hole(n.COLUMN, "column")
            return n.ColumnHole(name)
        first = self.expect("ident").text
        if self.at("op", "."):
            self.next()
            second = self.expect("ident").text
            if not self.catalog.has_table(first):
                raise UnknownColumnConstant(f"unknown table in column reference '{first}.{second}'")
            try:
                self.catalog.resolve_column(first, second)
            except Exception:
                raise UnknownColumnConstant(f"unknown column '{first}.{second}'") from None
            return n.ColumnName(first, second)
        hits = self.catalog.find_column(first)
        if not hits:
            raise UnknownColumnConstant(f"unknown column '{first}'")
        if len(hits) > 1:
            options = ", ".join(c.qualified for c in hits)
            raise UnknownColumnConstant(f"ambiguous column '{first}' (one of: {options})")
        return n.ColumnName(hits[0].table_name, hits[0].column_name)

    # -- soft constraints ----------------------------------------------------

    def parse_soft_block(self) -> n.Soft:
        self.expect("op", "{")
        soft = self.parse_soft()
        self.expect("op", "}")
        return soft

    def parse_soft(self) -> n.Soft:
        left = self.parse_soft_term()
        while self.at("kw", "AND"):
            self.next()
            left = n.SoftAnd(left, self.parse_soft_term())
        return left

    def parse_soft_term(self) -> n.Soft:
        if self.at("kw", "true"):
            self.next()
            return n.SoftTrue()
        if self.at("op", "("):
            if self.peek(1).type == "kw" and self.peek(1).text == "contains":
                self.next()
                self.next()
                col = self.parse_colref()
                pattern = self.parse_const()
                self.expect("op", ")")
                return n.SoftContains(col, self._as_regex(pattern))
            self.next()
            inner = self.parse_soft()
            self.expect("op", ")")
            return inner
        if self.at("kw", "contains"):
            self.next()
            self.expect("op", "(")
            col = self.parse_colref()
            if self.at("op", ","):
                self.next()
            pattern = self.parse_const()
            self.expect("op", ")")
            return n.SoftContains(col, self._as_regex(pattern))
        if self.peek().type in ("number", "string", "regex"):
            value = self.parse_const()
            tok = self.next()
            if tok.type == "kw" and tok.text == "in":
                if value.kind == "regex":
                    raise self.error("regex constants are only allowed with contains or '~='", tok)
                return n.SoftIn(value, self.parse_colref())
            if tok.type == "op" and tok.text in ("<=", ">="):
                col = self.parse_colref()
                first_op = "gsim" if tok.text == "<=" else "lsim"
                first = self._soft_cmp(col, first_op, value)
                if self.at("op", tok.text):
                    self.next()
                    second = self.parse_const()
                    second_op = "lsim" if tok.text == "<=" else "gsim"
                    return n.SoftAnd(first, self._soft_cmp(col, second_op, second))
                return first
            raise self.error(f"expected 'in', '<=' or '>=' after constant, found {tok.text!r}", tok)
        col = self.parse_colref()
        tok = self.next()
        ops = {"<=": "lsim", ">=": "gsim", "~=": "eqsim"}
        if tok.type != "op" or tok.text not in ops:
            raise self.error(f"expected a soft comparison after column, found {tok.text!r}", tok)
        return self._soft_cmp(col, ops[tok.text], self.parse_const())

    def _as_regex(self, const: n.Const) -> n.Const:
        if const.kind not in ("string", "regex"):
            raise self.error("the pattern argument of contains must be a string or regex literal")
        return n.Const("regex", const.value)

    def _soft_cmp(self, col: n.ColumnRef, op: str, value: n.Const) -> n.SoftCmp:
        if value.kind == "regex" and op != "eqsim":
            raise self.error("regex constants are only allowed with contains or '~='")
        return n.SoftCmp(col, op, value)

    # -- hard predicates -------------------------------------------------------

    def parse_pred(self) -> n.Pred:
        left = self.parse_pred_conj()
        while self.at("kw", "OR"):
            self.next()
            left = n.PredOr(left, self.parse_pred_conj())
        return left

    def parse_pred_conj(self) -> n.Pred:
        left = self.parse_pred_atom()
        while self.at("kw", "AND"):
            self.next()
            left = n.PredAnd(left, self.parse_pred_atom())
        return left

    def parse_pred_atom(self) -> n.Pred:
        if self.at("kw", "true"):
            self.next()
            return n.PredTrue()
        if self.at("op", "("):
            self.next()
            inner = self.parse_pred()
            self.expect("op", ")")
            return inner
        col = self.parse_colref()
        tok = self.next()
        ops = {"<=": "le", "<": "lt", "=": "eq", ">": "gt", ">=": "ge"}
        if tok.type != "op" or tok.text not in ops:
            raise self.error(f"expected a relational operator, found {tok.text!r}", tok)
        value = self.parse_const()
        if value.kind == "regex":
            raise self.error("regex constants cannot appear in WHERE predicates")
        return n.PredCmp(col, ops[tok.text], value)

    # -- table expressions --------------------------------------------------------

    def parse_table_expr(self) -> n.TableExpr:
        node = self.parse_table_atom()
        if self.at("innerjoin"):
            if not (isinstance(node, n.BaseTable) and node.soft == n.SoftTrue()):
                raise self.error("the left operand of INNER-JOIN must be a bare table name")
            self.next()
            rest = self.parse_table_expr()
            self.expect("kw", "ON")
            left_col = self.parse_colref()
            self.expect("op", "=")
            right_col = self.parse_colref()
            node = n.Join(node.table, left_col, right_col, rest)
        while self.at("op", "{"):
            node = self._attach_soft(node, self.parse_soft_block())
        return node

    def parse_table_atom(self) -> n.TableExpr:
        if self.at("op", "("):
            self.next()
            inner = self.parse_table_expr()
            self.expect("op", ")")
            while self.at("op", "{"):
                inner = self._attach_soft(inner, self.parse_soft_block())
            return inner
        if self.at("hole"):
            name, _ = self.parse_hole(n.TABLE, "table")
            return n.TableHole(name)
        tok = self.expect("ident")
        if not self.catalog.has_table(tok.text):
            raise UnresolvedTable(f"unknown table '{tok.text}'")
        return n.BaseTable(tok.text)

    @staticmethod
    def _attach_soft(expr: n.TableExpr, soft: n.Soft) -> n.TableExpr:
        if expr.soft == n.SoftTrue():
            return n.with_soft(expr, soft)
        return n.with_soft(expr, n.SoftAnd(expr.soft, soft))

    # -- top level ---------------------------------------------------------------

    def parse_query(self) -> n.Query:
        self.expect("kw", "SELECT")
        columns = [self.parse_projection_ref()]
        while self.at("op", ","):
            self.next()
            columns.append(self.parse_projection_ref())
        self.expect("kw", "FROM")
        self.expect("op", "(")
        source = self.parse_table_expr()
        self.expect("op", ")")
        predicate: n.Pred = n.PredTrue()
        if self.at("kw", "WHERE"):
            self.next()
            predicate = self.parse_pred()
        select_soft: n.Soft = n.SoftTrue()
        query_soft: n.Soft = n.SoftTrue()
        if self.at("op", "{"):
            select_soft = self.parse_soft_block()
        if self.at("op", "{"):
            query_soft = self.parse_soft_block()
        self.expect("eof")
        return n.Query(tuple(columns), n.Select(predicate, source, select_soft), query_soft)

    def parse_projection_ref(self) -> n.ColumnRef:
        if self.at("hole") or self.at("ident"):
            return self.parse_colref()
        raise self.error(f"expected a column in the SELECT list, found {self.peek().text!r}")


def parse_sketch(text: str, catalog: Catalog) -> n.Query:
    """Parse sketch text into an AST, resolving column constants against `catalog`."""
    query = _Parser(text, catalog).parse_query()
    n.hole_kinds(query)   # raises HoleKindConflict on inconsistent reuse of a name
    return query
