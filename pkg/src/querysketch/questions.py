"""Candidate question generation, sample-based scoring, and selection.

A question is a refinement of the current sketch that the user can judge
from table previews alone. Column holes offer one question per
type-compatible column. A table hole offers: each base table as a terminal
fill; each key edge as a two-table join; and each key edge extended with a
dangling continuation (fresh join-column holes plus a fresh table hole).
A dangling continuation left by an earlier answer is refined as one unit:
its join columns and the next table are chosen together along a key edge of
the concrete table to its left.

Questions are scored by 2 * p * (1 - p), where p estimates the probability
mass of sampled completions the question matches; a question matching no
sample can only be answered negatively, so it is dropped outright.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from . import lang as L
from .catalog import Catalog
from .errors import EmptyCandidateList, NoCandidates
from .sampler import SampleSet, compatible_columns


@dataclass(frozen=True)
class Question:
    base: L.Query
    refinement: L.Refinement
    sketch: L.Query      # result of applying the refinement to base

    def summary(self) -> str:
        return self.refinement.summary()

    def display_tables(self) -> list[str]:
        return self.refinement.display_tables()

    def target_holes(self) -> tuple[str, ...]:
        return tuple(step.hole for step in self.refinement.steps)


@dataclass(frozen=True)
class ScoredQuestion:
    question: Question
    pi_plus_hat: float
    score_hat: float


def _question(base: L.Query, steps: tuple[L.HoleFill, ...]) -> Question:
    refinement = L.Refinement(steps)
    return Question(base, refinement, L.apply_refinement(base, refinement))


def _continuation(catalog: Catalog, sketch: L.Query, head: str,
                  reserved: set[str]) -> L.TableExpr:
    """`head` joined with a dangling continuation: fresh column holes + table hole."""
    c0, c1 = L.fresh_hole_names(sketch, "c", 2, reserved)
    (t0,) = L.fresh_hole_names(sketch, "t", 1, reserved)
    return L.Join(head, L.ColumnHole(c0), L.ColumnHole(c1), L.TableHole(t0))


def _table_hole_fills(catalog: Catalog, sketch: L.Query) -> list[L.TableExpr]:
    fills: list[L.TableExpr] = []
    for name in sorted(catalog.table_names()):
        fills.append(L.BaseTable(name))
    for anchor in sorted(catalog.table_names()):
        for left_col, right_col, right_table in catalog.join_candidates(anchor):
            lc = L.ColumnName(left_col.table_name, left_col.column_name)
            rc = L.ColumnName(right_col.table_name, right_col.column_name)
            fills.append(L.Join(anchor, lc, rc, L.BaseTable(right_table)))
            fills.append(L.Join(anchor, lc, rc,
                                _continuation(catalog, sketch, right_table, set())))
    return fills


def _group_fills(catalog: Catalog, sketch: L.Query, parent_table: str,
                 names: tuple[str, str, str]) -> list[tuple[L.HoleFill, ...]]:
    left_name, right_name, table_name = names
    out = []
    for left_col, right_col, right_table in catalog.join_candidates(parent_table):
        lc = L.ColumnName(left_col.table_name, left_col.column_name)
        rc = L.ColumnName(right_col.table_name, right_col.column_name)
        for rest in (L.BaseTable(right_table),
                     _continuation(catalog, sketch, right_table, set())):
            out.append((
                L.HoleFill(left_name, L.COLUMN, lc),
                L.HoleFill(right_name, L.COLUMN, rc),
                L.HoleFill(table_name, L.TABLE, rest),
            ))
    return out


def candidate_questions(sketch: L.Query, catalog: Catalog,
                        negatives: tuple[L.Query, ...] = ()) -> list[Question]:
    """All candidate questions for the sketch, minus already-rejected ones."""
    questions: list[Question] = []
    seen: set[L.Query] = set()
    rejected = set(negatives)

    def add(steps: tuple[L.HoleFill, ...]) -> None:
        q = _question(sketch, steps)
        if q.sketch in seen or q.sketch in rejected:
            return
        seen.add(q.sketch)
        questions.append(q)

    chain = sketch.source.source
    grouped: set[str] = set()

    node: L.TableExpr = chain
    while isinstance(node, L.Join):
        if (isinstance(node.left_col, L.ColumnHole) and isinstance(node.right_col, L.ColumnHole)
                and isinstance(node.rest, L.TableHole)):
            names = (node.left_col.name, node.right_col.name, node.rest.name)
            grouped.update(names)
            for steps in _group_fills(catalog, sketch, node.table, names):
                add(steps)
        node = node.rest

    if isinstance(node, L.TableHole) and node.name not in grouped:
        for fill in _table_hole_fills(catalog, sketch):
            add((L.HoleFill(node.name, L.TABLE, fill),))

    for name, kind in L.hole_kinds(sketch).items():
        if kind != L.COLUMN or name in grouped:
            continue
        for col in compatible_columns(sketch, name, catalog):
            add((L.HoleFill(name, L.COLUMN, col),))

    if not questions:
        raise NoCandidates(
            "no candidate questions remain for this sketch "
            f"({len(rejected)} rejected)"
        )
    return questions


def _refinement_covers(refinement: L.Refinement, assignment: dict) -> bool:
    """Whether a sample's hole assignment is reachable through this refinement.

    Equivalent to matching the refined sketch against the sample when both
    share the base sketch: every step's fill must align with the sample's
    fill for that hole, with fresh holes bound consistently across steps.
    """
    from .lang.refine import _align

    tbind: dict = {}
    cbind: dict = {}
    for step in refinement.steps:
        actual = assignment.get(step.hole)
        if actual is None:
            return False
        if step.kind == L.COLUMN:
            if step.fill != actual:
                return False
        elif not _align(step.fill, actual, tbind, cbind):
            return False
    return True


def estimate_scores(candidates: list[Question], samples: SampleSet) -> list[ScoredQuestion]:
    """Estimate each question's split of the sampled completion mass.

    Questions matched by no sample are dropped: every sampled completion
    would make the user reject them.
    """
    total = len(samples)
    out: list[ScoredQuestion] = []
    if samples.assignments is not None and samples.sketch is not None and all(
            q.base == samples.sketch for q in candidates):
        unique: dict[tuple, tuple[dict, int]] = {}
        names = sorted({n for a in samples.assignments for n in a})
        for asg in samples.assignments:
            key = tuple(asg.get(n) for n in names)
            entry = unique.get(key)
            unique[key] = (asg, (entry[1] if entry else 0) + 1)
        for q in candidates:
            hits = sum(count for asg, count in unique.values()
                       if _refinement_covers(q.refinement, asg))
            if hits == 0:
                continue
            p = hits / total
            out.append(ScoredQuestion(q, p, 2 * p * (1 - p)))
        return out

    weighted = Counter(samples.completions)
    for q in candidates:
        hits = sum(count for completion, count in weighted.items()
                   if L.matches(q.sketch, completion))
        if hits == 0:
            continue
        p = hits / total
        out.append(ScoredQuestion(q, p, 2 * p * (1 - p)))
    return out


def select_question(scored: list[ScoredQuestion]) -> ScoredQuestion:
    """Argmax by score; ties break toward smaller sketches, then summary text."""
    if not scored:
        raise EmptyCandidateList("no scored questions to select from")
    return min(scored, key=lambda s: (-s.score_hat, L.size(s.question.sketch),
                                      s.question.summary()))
