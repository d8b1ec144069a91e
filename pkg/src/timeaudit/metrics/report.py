"""Dataset-level aggregation of instance audits into report artifacts."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from timeaudit.claims.models import TaskType
from timeaudit.errors import EmptyAuditSet
from timeaudit.metrics.leakage_metrics import DEFAULT_TOP_KS, InstanceAudit


def transform_performance(task_type: TaskType, raw_score: float) -> float:
    """Map a raw task score onto a higher-is-better [.., 1] scale.

    Classification reports 1 - Brier score, regression reports
    1 - relative error, ranking reports the rank correlation as-is.
    """
    if task_type in (TaskType.CLASSIFICATION, TaskType.REGRESSION):
        return 1.0 - raw_score
    return raw_score


@dataclass
class AgentSummary:
    agent: str
    instances: int
    raw_performance: Optional[float]
    performance: Optional[float]
    mean_olr: float
    mean_dclr: float
    mean_topk: Mapping[int, float]
    failed: int = 0
    flagged_instances: int = 0

    def to_json_dict(self) -> dict:
        return {
            "agent": self.agent,
            "instances": self.instances,
            "raw_performance": self.raw_performance,
            "performance": self.performance,
            "mean_olr": self.mean_olr,
            "mean_dclr": self.mean_dclr,
            "mean_topk": {str(k): v for k, v in self.mean_topk.items()},
            "failed": self.failed,
            "flagged_instances": self.flagged_instances,
        }


@dataclass
class DatasetReport:
    task_type: TaskType
    task_label: str
    rows: list[AgentSummary]
    metadata: dict = field(default_factory=dict)

    def row(self, agent: str) -> AgentSummary:
        for summary in self.rows:
            if summary.agent == agent:
                return summary
        raise KeyError(agent)

    def to_json_dict(self) -> dict:
        return {
            "task_type": self.task_type.value,
            "task_label": self.task_label,
            "rows": [row.to_json_dict() for row in self.rows],
            "metadata": self.metadata,
        }


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values)


def build_report(
    task_type: TaskType,
    audits_by_agent: Mapping[str, Sequence[InstanceAudit]],
    performance_by_agent: Mapping[str, float] | None = None,
    *,
    task_label: str | None = None,
    failed_by_agent: Mapping[str, int] | None = None,
    metadata: Mapping[str, object] | None = None,
) -> DatasetReport:
    """Aggregate instance audits into one per-agent table.

    Means are unweighted across instances; every instance counts the
    same regardless of how many claims it produced.
    """
    performance_by_agent = performance_by_agent or {}
    failed_by_agent = failed_by_agent or {}
    if not audits_by_agent:
        raise EmptyAuditSet("no agents to report on")

    rows = []
    for agent in sorted(audits_by_agent):
        audits = list(audits_by_agent[agent])
        if not audits:
            raise EmptyAuditSet(f"agent {agent!r} has no instance audits")
        ks = sorted({k for audit in audits for k in audit.topk_leakage}) or list(
            DEFAULT_TOP_KS
        )
        raw = performance_by_agent.get(agent)
        rows.append(
            AgentSummary(
                agent=agent,
                instances=len(audits),
                raw_performance=raw,
                performance=None if raw is None else transform_performance(task_type, raw),
                mean_olr=_mean([float(a.olr) for a in audits]),
                mean_dclr=_mean([float(a.shapley_dclr) for a in audits]),
                mean_topk={
                    k: _mean([float(a.topk_leakage[k]) for a in audits]) for k in ks
                },
                failed=failed_by_agent.get(agent, 0),
                flagged_instances=sum(1 for a in audits if a.flags),
            )
        )
    base_metadata = {"weighting": "unweighted_instance_mean"}
    if metadata:
        base_metadata.update(metadata)
    return DatasetReport(
        task_type=task_type,
        task_label=task_label or task_type.value,
        rows=rows,
        metadata=base_metadata,
    )


def render_report_text(reports: Sequence[DatasetReport]) -> str:
    """Fixed-width text tables, one block per task."""
    blocks = []
    for report in reports:
        ks = sorted({k for row in report.rows for k in row.mean_topk})
        headers = ["agent", "perf", "olr", "dclr"] + [f"top{k}" for k in ks] + ["n"]
        table = [headers]
        for row in report.rows:
            table.append(
                [
                    row.agent,
                    "-" if row.performance is None else f"{row.performance:.4f}",
                    f"{row.mean_olr:.4f}",
                    f"{row.mean_dclr:.4f}",
                ]
                + [f"{row.mean_topk.get(k, 0.0):.4f}" for k in ks]
                + [str(row.instances) if not row.failed else f"{row.instances} (+{row.failed} failed)"]
            )
        widths = [max(len(line[col]) for line in table) for col in range(len(headers))]
        lines = [f"== {report.task_label} ({report.task_type.value}) =="]
        for line_no, line in enumerate(table):
            lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(line)).rstrip())
            if line_no == 0:
                lines.append("  ".join("-" * widths[i] for i in range(len(headers))))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def tradeoff_rows(reports: Sequence[DatasetReport]) -> list[dict]:
    """Performance-vs-leakage points, one per agent and task."""
    rows = []
    for report in reports:
        for summary in report.rows:
            rows.append(
                {
                    "agent": summary.agent,
                    "task": report.task_label,
                    "performance": summary.performance,
                    "dclr": summary.mean_dclr,
                }
            )
    return rows


def tradeoff_csv(reports: Sequence[DatasetReport]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=["agent", "task", "performance", "dclr"])
    writer.writeheader()
    for row in tradeoff_rows(reports):
        writer.writerow(row)
    return buffer.getvalue()


def reports_to_json(reports: Sequence[DatasetReport]) -> str:
    return json.dumps([r.to_json_dict() for r in reports], indent=2, sort_keys=True)
