"""The interactive synthesis loop.

A session tracks the current sketch, the rejected-question set, and the
interaction history. Each round it samples completions of the current
sketch, scores the candidate questions against them, and proposes the
highest-scoring one. An accepted question becomes the new sketch; a
rejected one joins the negative set, which both excludes it from future
candidates and filters it out of future samples. The loop ends when the
sketch has no holes.

Rejected questions whose target holes were filled by a later accepted
answer are dropped from the negative set: any two distinct fills of the
same hole are structurally incompatible, so such questions can no longer
match any completion of the refined sketch.

`run_batch` drives a session from a ground-truth oracle and collects the
metrics used by the benchmark CLI.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from . import lang as L
from .catalog import Catalog
from .errors import (
    EmptyHistory,
    GroundTruthNotDerivable,
    NoCandidates,
    NoValidExpansion,
    QuerySketchError,
    RejectionExhausted,
    SessionComplete,
)
from .questions import Question, ScoredQuestion, candidate_questions, estimate_scores, select_question
from .sampler import SampleSet, SamplerConfig, mh_sample
from .scoring import ThetaTable, precompute_theta

AWAITING = "awaiting_answer"
COMPLETE = "complete"
FAILED = "failed"


@dataclass
class _Snapshot:
    sketch: L.Query
    negatives: tuple[Question, ...]
    iteration: int
    pending: ScoredQuestion | None
    samples: SampleSet | None
    status: str
    failure: str | None


@dataclass
class HistoryEntry:
    question: ScoredQuestion
    answer: bool
    prior: _Snapshot


@dataclass
class SessionState:
    catalog: Catalog
    cfg: SamplerConfig
    sketch: L.Query
    theta: ThetaTable
    initial_sketch: L.Query = None  # type: ignore[assignment]
    negatives: tuple[Question, ...] = ()
    history: list[HistoryEntry] = field(default_factory=list)
    iteration: int = 0
    pending: ScoredQuestion | None = None
    samples: SampleSet | None = None
    status: str = AWAITING
    failure: str | None = None

    def __post_init__(self):
        if self.initial_sketch is None:
            self.initial_sketch = self.sketch

    def negative_sketches(self) -> tuple[L.Query, ...]:
        return tuple(q.sketch for q in self.negatives)

    def snapshot(self) -> _Snapshot:
        return _Snapshot(self.sketch, self.negatives, self.iteration,
                         self.pending, self.samples, self.status, self.failure)

    def restore(self, snap: _Snapshot) -> None:
        self.sketch = snap.sketch
        self.negatives = snap.negatives
        self.iteration = snap.iteration
        self.pending = snap.pending
        self.samples = snap.samples
        self.status = snap.status
        self.failure = snap.failure

    def to_document(self) -> dict:
        return {
            "v": 1,
            "initial_sketch": L.print_sketch(self.initial_sketch),
            "sketch": L.print_sketch(self.sketch),
            "negatives": [L.print_sketch(q.sketch) for q in self.negatives],
            "iteration": self.iteration,
            "status": self.status,
            "failure": self.failure,
            "pending": self.pending.question.summary() if self.pending else None,
            "history": [
                {"question": h.question.question.summary(), "answer": h.answer}
                for h in self.history
            ],
            "config": {
                "sample_count": self.cfg.sample_count,
                "mh_steps": self.cfg.mh_steps,
                "max_join_depth": self.cfg.max_join_depth,
                "rejection_retry_limit": self.cfg.rejection_retry_limit,
                "seed": self.cfg.seed,
                "lambda_size": self.cfg.lambda_size,
            },
        }


def resume_session(document: dict, catalog: Catalog) -> SessionState:
    """Rebuild a session from its JSON document by replaying the answers.

    Sampler seeds derive from the iteration index, so replaying the recorded
    answers reproduces the questions, negatives, and pending state exactly.
    """
    cfg = SamplerConfig(**document["config"])
    state = start_session(document["initial_sketch"], catalog, cfg)
    for entry in document["history"]:
        answer(state, entry["answer"])
    return state


def trace_jsonl(result: "BatchResult") -> str:
    """One JSON line per question asked during a batch run."""
    import json

    return "".join(json.dumps(step, sort_keys=True) + "\n" for step in result.trace)


def _advance(state: SessionState) -> None:
    """Recompute samples, candidates, and the pending question for the current sketch."""
    if L.is_complete(state.sketch):
        state.status = COMPLETE
        state.pending = None
        return
    try:
        samples = mh_sample(state.sketch, state.theta, state.catalog,
                            state.negative_sketches(), state.cfg, salt=str(state.iteration))
        candidates = candidate_questions(state.sketch, state.catalog,
                                         state.negative_sketches())
        scored = estimate_scores(candidates, samples)
        if not scored:
            raise NoCandidates("every candidate question is unsupported by the samples")
        state.samples = samples
        state.pending = select_question(scored)
        state.status = AWAITING
    except (NoValidExpansion, RejectionExhausted, NoCandidates) as exc:
        state.status = FAILED
        state.failure = f"{type(exc).__name__}: {exc}"
        state.pending = None


def start_session(sketch_text: str, catalog: Catalog, cfg: SamplerConfig) -> SessionState:
    """Parse the sketch, precompute constraint scores, and pose the first question."""
    sketch = L.parse_sketch(sketch_text, catalog)
    theta = precompute_theta(sketch, catalog)
    state = SessionState(catalog=catalog, cfg=cfg, sketch=sketch, theta=theta)
    _advance(state)
    return state


def answer(state: SessionState, accept: bool) -> SessionState:
    """Apply the user's verdict on the pending question and pose the next one."""
    if state.status == COMPLETE:
        raise SessionComplete("the session is already complete")
    if state.status != AWAITING or state.pending is None:
        raise SessionComplete(f"session is not awaiting an answer (status: {state.status})")

    pending = state.pending
    state.history.append(HistoryEntry(pending, accept, state.snapshot()))
    if accept:
        state.sketch = pending.question.sketch
        remaining = set(L.hole_kinds(state.sketch))
        state.negatives = tuple(
            q for q in state.negatives
            if set(q.target_holes()) <= remaining
        )
    else:
        state.negatives = state.negatives + (pending.question,)
    state.iteration += 1
    _advance(state)
    return state


def undo(state: SessionState) -> SessionState:
    """Pop the last answer and restore the prior sketch, negatives, and question."""
    if not state.history:
        raise EmptyHistory("nothing to undo")
    entry = state.history.pop()
    state.restore(entry.prior)
    return state


def final_query(state: SessionState) -> L.Query:
    if state.status != COMPLETE:
        raise SessionComplete(f"session is not complete (status: {state.status})")
    return state.sketch


# --- batch driving -----------------------------------------------------------


@dataclass
class BatchResult:
    final: L.Query | None
    iterations: int
    accepts: int
    rejects: int
    status: str                  # "ok" | "failed" | "timeout"
    trace: list[dict]
    seconds: float
    failure: str | None = None


def _oracle_answer(question: Question, ground_truth: L.Query) -> bool:
    return L.matches(question.sketch, ground_truth)


def run_batch(sketch: str | L.Query, catalog: Catalog, ground_truth: L.Query,
              cfg: SamplerConfig, mode: str = "full",
              max_iterations: int | None = None,
              max_seconds: float | None = None) -> BatchResult:
    """Drive a session with a truthful ground-truth oracle until completion.

    mode "full" runs the normal question-selection loop; mode "perfect"
    asks only questions the oracle accepts, measuring the minimum number of
    refinements the true derivation needs (no sampling involved).
    """
    if isinstance(sketch, str):
        sketch_ast = L.parse_sketch(sketch, catalog)
    else:
        sketch_ast = sketch
    if not L.matches(sketch_ast, ground_truth):
        raise GroundTruthNotDerivable("the ground truth is not a completion of the sketch")

    started = time.monotonic()
    trace: list[dict] = []
    accepts = rejects = 0

    def timed_out(iterations: int) -> bool:
        if max_iterations is not None and iterations >= max_iterations:
            return True
        return max_seconds is not None and (time.monotonic() - started) > max_seconds

    if mode == "perfect":
        current = sketch_ast
        iterations = 0
        while not L.is_complete(current):
            if timed_out(iterations):
                return BatchResult(None, iterations, accepts, rejects, "timeout",
                                   trace, time.monotonic() - started)
            compatible = [q for q in candidate_questions(current, catalog, ())
                          if _oracle_answer(q, ground_truth)]
            if not compatible:
                return BatchResult(None, iterations, accepts, rejects, "failed", trace,
                                   time.monotonic() - started,
                                   failure="no ground-truth-compatible candidate")
            chosen = min(compatible, key=lambda q: (L.size(q.sketch), q.summary()))
            trace.append({"iteration": iterations, "question": chosen.summary(),
                          "sketch": L.print_sketch(chosen.sketch), "answer": True,
                          "pi_plus_hat": None, "score_hat": None})
            current = chosen.sketch
            iterations += 1
            accepts += 1
        return BatchResult(current, iterations, accepts, rejects, "ok", trace,
                           time.monotonic() - started)

    theta = precompute_theta(sketch_ast, catalog)
    state = SessionState(catalog=catalog, cfg=cfg, sketch=sketch_ast, theta=theta)
    _advance(state)
    iterations = 0
    while state.status == AWAITING:
        if timed_out(iterations):
            return BatchResult(None, iterations, accepts, rejects, "timeout",
                               trace, time.monotonic() - started)
        pending = state.pending
        verdict = _oracle_answer(pending.question, ground_truth)
        trace.append({
            "iteration": iterations,
            "question": pending.question.summary(),
            "sketch": L.print_sketch(pending.question.sketch),
            "answer": verdict,
            "pi_plus_hat": pending.pi_plus_hat,
            "score_hat": pending.score_hat,
        })
        answer(state, verdict)
        iterations += 1
        if verdict:
            accepts += 1
        else:
            rejects += 1

    elapsed = time.monotonic() - started
    if state.status == COMPLETE:
        return BatchResult(state.sketch, iterations, accepts, rejects, "ok", trace, elapsed)
    return BatchResult(None, iterations, accepts, rejects, "failed", trace, elapsed,
                       failure=state.failure)
