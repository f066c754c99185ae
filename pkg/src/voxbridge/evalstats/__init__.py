"""Listening-test statistics and desk-scale objective evaluation."""

from .ctg import CtgCheck, CtgCheckRow, CtgInput, ctg, dctg, recompute_ctg_table
from .report import (
    AnalysisReport,
    AspectReport,
    ObjectiveReport,
    PairTest,
    analyze,
    objective_report,
    render_report,
)
from .responses import (
    ASPECTS,
    CSV_COLUMNS,
    Response,
    filter_cheaters,
    load_responses_csv,
    paired_scores,
    save_responses_csv,
    system_means,
    system_roles,
)
from .stats import HolmResult, WilcoxonResult, holm_bonferroni, wilcoxon_signed_rank

__all__ = [
    "ASPECTS",
    "AnalysisReport",
    "AspectReport",
    "CSV_COLUMNS",
    "CtgCheck",
    "CtgCheckRow",
    "CtgInput",
    "HolmResult",
    "ObjectiveReport",
    "PairTest",
    "Response",
    "WilcoxonResult",
    "analyze",
    "ctg",
    "dctg",
    "filter_cheaters",
    "holm_bonferroni",
    "load_responses_csv",
    "objective_report",
    "paired_scores",
    "recompute_ctg_table",
    "render_report",
    "save_responses_csv",
    "system_means",
    "system_roles",
    "wilcoxon_signed_rank",
]
