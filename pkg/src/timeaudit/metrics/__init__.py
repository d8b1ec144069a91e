"""Leakage and performance metrics plus dataset-level reporting."""
from timeaudit.metrics.flags import FlaggedFloat
from timeaudit.metrics.leakage_metrics import (
    DEFAULT_TOP_KS,
    InstanceAudit,
    audit_instance,
    olr,
    shapley_dclr,
    topk_leakage,
)
from timeaudit.metrics.performance import (
    brier,
    kendall_relative,
    mre,
    relative_error,
    spearman,
)
from timeaudit.metrics.report import (
    AgentSummary,
    DatasetReport,
    build_report,
    render_report_text,
    reports_to_json,
    tradeoff_csv,
    tradeoff_rows,
    transform_performance,
)

__all__ = [
    "DEFAULT_TOP_KS",
    "AgentSummary",
    "DatasetReport",
    "FlaggedFloat",
    "InstanceAudit",
    "audit_instance",
    "brier",
    "build_report",
    "kendall_relative",
    "mre",
    "olr",
    "relative_error",
    "render_report_text",
    "reports_to_json",
    "shapley_dclr",
    "spearman",
    "topk_leakage",
    "tradeoff_csv",
    "tradeoff_rows",
    "transform_performance",
]
