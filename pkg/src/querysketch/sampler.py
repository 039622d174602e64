"""Sampling completions of a sketch from the soft-constraint-weighted
distribution, via Metropolis-Hastings over hole assignments.

The search space is the canonical one used throughout the package: table
holes fill with right-nested join chains whose consecutive tables are linked
by declared key edges (each join's right column lives in the head table of
the remaining chain), bounded by the configured join depth; column holes
fill with columns type-compatible with every predicate and primitive that
mentions them.

Proposals come from a uniform generative grammar: chains pick uniformly
between stopping and each available key edge at every step, columns pick
uniformly from their candidate set. Chain proposals are not symmetric, so
acceptance uses the full Hastings ratio with replayed proposal densities.
Holes forming a dangling join group (both join columns and the joined table
of one join) are proposed together, since a key edge fixes them jointly.

Negative responses are handled by rejection: a finished chain whose final
state matches a rejected question (or has weight zero) is discarded and
rerun, up to the configured retry limit.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from . import lang as L
from .catalog import Catalog
from .errors import NoValidExpansion, RejectionExhausted
from .scoring import NEG_INF, ThetaTable, compatible_value_types, score_completion


@dataclass(frozen=True)
class SamplerConfig:
    sample_count: int = 100
    mh_steps: int = 1000
    max_join_depth: int = 6
    rejection_retry_limit: int = 10000
    seed: int = 0
    lambda_size: float = 0.0

    def __post_init__(self):
        for name in ("sample_count", "mh_steps", "max_join_depth", "rejection_retry_limit"):
            if getattr(self, name) < 1:
                raise ValueError(f"SamplerConfig.{name} must be positive")


@dataclass(frozen=True)
class SampleSet:
    completions: tuple[L.Query, ...]
    # per-completion hole assignments (name -> bare fill), parallel to
    # `completions`; lets question scoring match per hole instead of
    # realigning whole trees. None when samples were built another way.
    assignments: tuple[dict, ...] | None = None
    # the sketch the assignments refer to; hole-wise matching is only valid
    # against questions refining this exact sketch
    sketch: L.Query | None = None

    def __len__(self) -> int:
        return len(self.completions)

    def __iter__(self):
        return iter(self.completions)


# --- static analysis of a sketch ------------------------------------------------


def column_type_constraints(sketch: L.Query, name: str) -> set[str]:
    """Value types a column hole may take, intersected over all its mentions."""
    allowed = {"int", "float", "string"}
    for node in L.walk(sketch):
        if isinstance(node, L.PredCmp) and node.column == L.ColumnHole(name):
            allowed &= {node.value.kind}
        elif isinstance(node, (L.SoftIn, L.SoftContains, L.SoftCmp)):
            if node.column == L.ColumnHole(name):
                allowed &= compatible_value_types(node)
    return allowed


def compatible_columns(sketch: L.Query, name: str, catalog: Catalog) -> tuple[L.ColumnName, ...]:
    """Type-compatible catalog columns for a column hole, sorted by qualified name."""
    allowed = column_type_constraints(sketch, name)
    cols = [L.ColumnName(c.table_name, c.column_name)
            for c in catalog.all_columns() if c.value_type in allowed]
    return tuple(sorted(cols, key=lambda c: c.qualified))


def _oriented_edges(catalog: Catalog, table: str) -> list[tuple[L.ColumnName, L.ColumnName]]:
    cache = catalog.__dict__.setdefault("_oriented_edges_cache", {})
    hit = cache.get(table)
    if hit is None:
        hit = [
            (L.ColumnName(lc.table_name, lc.column_name),
             L.ColumnName(rc.table_name, rc.column_name))
            for lc, rc, _ in catalog.join_candidates(table)
        ]
        cache[table] = hit
    return hit


# --- chain proposals --------------------------------------------------------------


def _sample_chain(catalog: Catalog, rng: random.Random, head: str | None, budget: int) -> L.TableExpr:
    if head is None:
        tables = sorted(catalog.table_names())
        if not tables:
            raise NoValidExpansion("catalog has no tables")
        head = tables[rng.randrange(len(tables))]
    edges = _oriented_edges(catalog, head)
    if budget <= 1 or not edges:
        return L.BaseTable(head)
    k = rng.randrange(1 + len(edges))
    if k == 0:
        return L.BaseTable(head)
    left_col, right_col = edges[k - 1]
    rest = _sample_chain(catalog, rng, right_col.table, budget - 1)
    return L.Join(head, left_col, right_col, rest)


def _chain_density(catalog: Catalog, expr: L.TableExpr, head: str | None, budget: int) -> float:
    density = 1.0
    if head is None:
        n = len(catalog.table_names())
        if n == 0:
            return 0.0
        density /= n
    else:
        first = expr.table if isinstance(expr, (L.BaseTable, L.Join)) else None
        if first != head:
            return 0.0
    node: L.TableExpr = expr
    while True:
        if isinstance(node, L.TableHole):
            return 0.0
        edges = _oriented_edges(catalog, node.table)
        if isinstance(node, L.BaseTable):
            if budget > 1 and edges:
                density /= 1 + len(edges)   # stopping was one choice among 1+|edges|
            return density
        if budget <= 1 or (node.left_col, node.right_col) not in edges:
            return 0.0
        density /= 1 + len(edges)
        if not isinstance(node.rest, (L.BaseTable, L.Join)):
            return 0.0
        if node.rest.table != node.right_col.table:
            return 0.0
        node = node.rest
        budget -= 1


# --- sampling units ----------------------------------------------------------------


class _ColumnUnit:
    """A lone column hole; candidates are type-compatible columns, preferring
    columns of the currently assigned flat table."""

    def __init__(self, name: str, static_choices: tuple[L.ColumnName, ...],
                 flat_fn, dynamic: bool):
        self.names = (name,)
        self.name = name
        self.static_choices = static_choices
        self.flat_fn = flat_fn
        self.dynamic = dynamic
        if not static_choices:
            raise NoValidExpansion(f"no catalog column can fill hole '??{name}:column'")

    def _choices(self, asg: dict) -> tuple[L.ColumnName, ...]:
        if not self.dynamic:
            return self.static_choices
        flat = self.flat_fn(asg)
        narrowed = tuple(c for c in self.static_choices if c in flat)
        return narrowed or self.static_choices

    def sample(self, rng: random.Random, asg: dict) -> dict:
        choices = self._choices(asg)
        return {self.name: choices[rng.randrange(len(choices))]}

    def density(self, values: dict, asg: dict) -> float:
        choices = self._choices(asg)
        return (1.0 / len(choices)) if values[self.name] in choices else 0.0


class _TableUnit:
    """A lone table hole, optionally with its chain head pinned by context."""

    def __init__(self, name: str, catalog: Catalog, head: str | None, budget: int):
        self.names = (name,)
        self.name = name
        self.catalog = catalog
        self.head = head
        self.budget = budget
        if head is None and not catalog.table_names():
            raise NoValidExpansion(f"no table can fill hole '??{name}:table'")

    def sample(self, rng: random.Random, asg: dict) -> dict:
        return {self.name: _sample_chain(self.catalog, rng, self.head, self.budget)}

    def density(self, values: dict, asg: dict) -> float:
        return _chain_density(self.catalog, values[self.name], self.head, self.budget)


class _GroupUnit:
    """A dangling join group: both join-column holes plus the joined table hole
    of one join, filled together along one key edge of the concrete left table."""

    def __init__(self, left_name: str, right_name: str, table_name: str,
                 parent_table: str, catalog: Catalog, budget: int):
        self.names = (left_name, right_name, table_name)
        self.left_name = left_name
        self.right_name = right_name
        self.table_name = table_name
        self.parent_table = parent_table
        self.catalog = catalog
        self.budget = budget
        self.edges = _oriented_edges(catalog, parent_table)
        if not self.edges:
            raise NoValidExpansion(
                f"table '{parent_table}' has no key edges to fill join holes "
                f"'??{left_name}', '??{right_name}', '??{table_name}'"
            )

    def sample(self, rng: random.Random, asg: dict) -> dict:
        left_col, right_col = self.edges[rng.randrange(len(self.edges))]
        chain = _sample_chain(self.catalog, rng, right_col.table, self.budget)
        return {self.left_name: left_col, self.right_name: right_col, self.table_name: chain}

    def density(self, values: dict, asg: dict) -> float:
        left_col = values[self.left_name]
        right_col = values[self.right_name]
        if (left_col, right_col) not in self.edges:
            return 0.0
        return (1.0 / len(self.edges)) * _chain_density(
            self.catalog, values[self.table_name], right_col.table, self.budget)


class _PairUnit:
    """Two join-column holes whose joined table is already concrete."""

    def __init__(self, left_name: str, right_name: str, left_table: str,
                 rest_tables: list[str], catalog: Catalog):
        self.names = (left_name, right_name)
        self.left_name = left_name
        self.right_name = right_name
        self.choices = [
            (lc, rc) for lc, rc in _oriented_edges(catalog, left_table)
            if rc.table in rest_tables
        ]
        if not self.choices:
            raise NoValidExpansion(
                f"no key edge links '{left_table}' with {rest_tables} for join holes "
                f"'??{left_name}', '??{right_name}'"
            )

    def sample(self, rng: random.Random, asg: dict) -> dict:
        lc, rc = self.choices[rng.randrange(len(self.choices))]
        return {self.left_name: lc, self.right_name: rc}

    def density(self, values: dict, asg: dict) -> float:
        pair = (values[self.left_name], values[self.right_name])
        return (1.0 / len(self.choices)) if pair in self.choices else 0.0


class _SingleJoinColumnUnit:
    """One join-column hole whose partner column is concrete."""

    def __init__(self, name: str, choices: list[L.ColumnName]):
        self.names = (name,)
        self.name = name
        self.choices = choices
        if not choices:
            raise NoValidExpansion(f"no key edge admits join-column hole '??{name}:column'")

    def sample(self, rng: random.Random, asg: dict) -> dict:
        return {self.name: self.choices[rng.randrange(len(self.choices))]}

    def density(self, values: dict, asg: dict) -> float:
        return (1.0 / len(self.choices)) if values[self.name] in self.choices else 0.0


def _chain_nodes(expr: L.TableExpr) -> list[L.TableExpr]:
    out = [expr]
    while isinstance(expr, L.Join):
        expr = expr.rest
        out.append(expr)
    return out


def analyze_units(sketch: L.Query, catalog: Catalog, cfg: SamplerConfig) -> list:
    """Decompose the sketch's holes into independent sampling units."""
    chain = sketch.source.source
    nodes = _chain_nodes(chain)
    concrete = len(L.chain_tables(chain))
    budget = max(1, cfg.max_join_depth - concrete)

    units: list = []
    claimed: set[str] = set()

    def claim(*names: str, context: str) -> None:
        for name in names:
            if name in claimed:
                raise NoValidExpansion(
                    f"hole '??{name}' is linked across join contexts ({context}); "
                    "such sketches are not supported"
                )
            claimed.add(name)

    for node in nodes:
        if not isinstance(node, L.Join):
            continue
        left_hole = isinstance(node.left_col, L.ColumnHole)
        right_hole = isinstance(node.right_col, L.ColumnHole)
        rest_hole = isinstance(node.rest, L.TableHole)
        if left_hole and right_hole and rest_hole:
            claim(node.left_col.name, node.right_col.name, node.rest.name, context=node.table)
            units.append(_GroupUnit(node.left_col.name, node.right_col.name, node.rest.name,
                                    node.table, catalog, budget))
        elif left_hole and right_hole:
            rest_tables = L.chain_tables(node.rest)
            claim(node.left_col.name, node.right_col.name, context=node.table)
            units.append(_PairUnit(node.left_col.name, node.right_col.name,
                                   node.table, rest_tables, catalog))
        else:
            if left_hole:
                claim(node.left_col.name, context=node.table)
                partner = node.right_col
                choices = sorted(
                    {lc for lc, rc in _oriented_edges(catalog, node.table) if rc == partner},
                    key=lambda c: c.qualified,
                ) if isinstance(partner, L.ColumnName) else []
                units.append(_SingleJoinColumnUnit(node.left_col.name, list(choices)))
            if right_hole:
                claim(node.right_col.name, context=node.table)
                partner = node.left_col
                rest_tables = set(L.chain_tables(node.rest))
                choices = sorted(
                    {rc for lc, rc in _oriented_edges(catalog, node.table)
                     if lc == partner and rc.table in rest_tables},
                    key=lambda c: c.qualified,
                ) if isinstance(partner, L.ColumnName) else []
                units.append(_SingleJoinColumnUnit(node.right_col.name, list(choices)))
            if rest_hole:
                head = None
                if isinstance(node.right_col, L.ColumnName):
                    head = node.right_col.table
                claim(node.rest.name, context=node.table)
                units.append(_TableUnit(node.rest.name, catalog, head, budget))

    if isinstance(chain, L.TableHole):
        claim(chain.name, context="FROM")
        units.append(_TableUnit(chain.name, catalog, None, budget))

    # every remaining column hole is a free column unit with dynamic narrowing
    def flat_fn(asg: dict) -> frozenset[L.ColumnName]:
        cols: set[L.ColumnName] = set()
        tables = list(L.chain_tables(chain))
        for node in _chain_nodes(chain):
            if isinstance(node, L.TableHole) and node.name in asg:
                tables.extend(L.chain_tables(asg[node.name]))
        for tname in tables:
            t = catalog.table(tname)
            cols.update(L.ColumnName(t.name, c.column_name) for c in t.columns)
        return frozenset(cols)

    for name, kind in L.hole_kinds(sketch).items():
        if name in claimed:
            continue
        if kind == L.TABLE:
            # table holes outside the FROM chain cannot occur in a well-formed query
            raise NoValidExpansion(f"table hole '??{name}' is not part of the FROM chain")
        claimed.add(name)
        units.append(_ColumnUnit(name, compatible_columns(sketch, name, catalog),
                                 flat_fn, dynamic=True))
    return units


# --- public single-hole sampling -------------------------------------------------


@dataclass(frozen=True)
class HoleContext:
    """Type/key context for sampling one hole expression."""

    column_choices: tuple[L.ColumnName, ...] = ()
    head_table: str | None = None
    depth_budget: int = 6


def sample_hole_expression(kind: str, context: HoleContext, catalog: Catalog,
                           rng: random.Random):
    """One uniform draw for a single hole under the given context."""
    if kind == L.COLUMN:
        if not context.column_choices:
            raise NoValidExpansion("no compatible column for this hole")
        return context.column_choices[rng.randrange(len(context.column_choices))]
    return _sample_chain(catalog, rng, context.head_table, context.depth_budget)


# --- the MH loop -------------------------------------------------------------------


class _Scorer:
    """Memoized completion scores keyed by the full hole assignment."""

    def __init__(self, sketch: L.Query, names: list[str], theta: ThetaTable,
                 catalog: Catalog, lambda_size: float):
        self.sketch = sketch
        self.names = names
        self.theta = theta
        self.catalog = catalog
        self.lambda_size = lambda_size
        self.cache: dict[tuple, float] = {}

    def materialize(self, asg: dict) -> L.Query:
        cmap = {k: v for k, v in asg.items() if isinstance(v, (L.ColumnName, L.ColumnHole))}
        tmap = {k: v for k, v in asg.items() if not isinstance(v, (L.ColumnName, L.ColumnHole))}
        return L.substitute(self.sketch, cmap, tmap)

    def score(self, asg: dict) -> float:
        key = tuple(asg[name] for name in self.names)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        value = score_completion(self.materialize(asg), self.theta, self.catalog,
                                 self.lambda_size)
        self.cache[key] = value
        return value


def _run_chain(sketch: L.Query, units: list, scorer: _Scorer, rng: random.Random,
               steps: int) -> dict:
    asg: dict = {}
    for unit in units:
        asg.update(unit.sample(rng, asg))
    score = scorer.score(asg)

    for _ in range(steps):
        unit = units[rng.randrange(len(units))]
        proposal = dict(asg)
        proposal.update(unit.sample(rng, proposal))
        new_score = scorer.score(proposal)
        if new_score == NEG_INF:
            continue
        q_fwd = unit.density({k: proposal[k] for k in unit.names}, asg)
        q_rev = unit.density({k: asg[k] for k in unit.names}, proposal)
        if score == NEG_INF:
            accept = True
        else:
            if q_fwd <= 0.0:
                continue
            ratio = math.exp(min(700.0, new_score - score)) * (q_rev / q_fwd)
            accept = rng.random() < min(1.0, ratio)
        if accept:
            asg = proposal
            score = new_score
    return asg


def mh_sample(sketch: L.Query, theta: ThetaTable, catalog: Catalog,
              negatives: tuple[L.Query, ...], cfg: SamplerConfig,
              salt: str = "0") -> SampleSet:
    """Draw cfg.sample_count approximate samples from the weighted completion
    distribution of `sketch`, conditioned on matching no rejected question.

    Each sample is the final state of an independent MH chain; chains whose
    final state has weight zero or matches a member of `negatives` are rerun,
    up to cfg.rejection_retry_limit attempts per sample.
    """
    if L.is_complete(sketch):
        return SampleSet((sketch,))

    units = analyze_units(sketch, catalog, cfg)
    names = sorted(L.hole_kinds(sketch))
    scorer = _Scorer(sketch, names, theta, catalog, cfg.lambda_size)

    completions: list[L.Query] = []
    assignments: list[dict] = []
    for chain_index in range(cfg.sample_count):
        found = None
        for attempt in range(cfg.rejection_retry_limit):
            rng = random.Random(f"{cfg.seed}|{salt}|{chain_index}|{attempt}")
            asg = _run_chain(sketch, units, scorer, rng, cfg.mh_steps)
            if scorer.score(asg) == NEG_INF:
                continue
            candidate = scorer.materialize(asg)
            if any(L.matches(neg, candidate) for neg in negatives):
                continue
            found = (candidate, asg)
            break
        if found is None:
            raise RejectionExhausted(
                f"no admissible completion found in {cfg.rejection_retry_limit} attempts; "
                f"the rejected questions may rule out the whole space",
                negatives=tuple(negatives),
            )
        completions.append(found[0])
        assignments.append(found[1])
    return SampleSet(tuple(completions), tuple(assignments), sketch)
