"""querysketch: interactive completion of SQL-fragment sketches.

The user writes a query skeleton with named holes for unknown tables and
columns plus soft constraints describing the data they expect; the engine
iteratively proposes single refinements, using accepted and rejected answers
to steer a weight-aware sampler over the remaining completions.
"""

from .catalog import Catalog, ColumnDef, JoinEdge, TableData, load_database, load_database_from
from .engine import (
    BatchResult,
    SessionState,
    answer,
    final_query,
    resume_session,
    run_batch,
    start_session,
    trace_jsonl,
    undo,
)
from .interp import ResultTable, approx_columns, evaluate
from .questions import Question, ScoredQuestion, candidate_questions, estimate_scores, select_question
from .sampler import HoleContext, SampleSet, SamplerConfig, mh_sample, sample_hole_expression
from .scoring import (
    ThetaTable,
    precompute_theta,
    score_completion,
    score_primitive,
    score_soft,
    unnormalized_weight,
)

__version__ = "0.1.0"

__all__ = [
    "Catalog", "ColumnDef", "JoinEdge", "TableData", "load_database", "load_database_from",
    "BatchResult", "SessionState", "answer", "final_query", "resume_session",
    "run_batch", "start_session", "trace_jsonl", "undo",
    "ResultTable", "approx_columns", "evaluate",
    "Question", "ScoredQuestion", "candidate_questions", "estimate_scores", "select_question",
    "HoleContext", "SampleSet", "SamplerConfig", "mh_sample", "sample_hole_expression",
    "ThetaTable", "precompute_theta", "score_completion", "score_primitive",
    "score_soft", "unnormalized_weight",
    "__version__",
]
