"""End-to-end orchestration: predict, audit, attribute, aggregate, write.

One run covers a set of agents on a set of instances. Predictions are
collected sequentially per agent (tool loops are multi-call), then the
audit work (claim extraction, verification, attribution) runs in a small
thread pool. Every (agent, instance) pair leaves one JSON envelope under
``out/audits``; a resumed run skips pairs whose envelope already exists,
so partial runs are cheap to finish.
"""
from __future__ import annotations

import json
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

from timeaudit.agents import run_agent
from timeaudit.agents.tasks import build_task_context, profile_for
from timeaudit.agents.types import Prediction, TaskInstance, TimeSPECTrace
from timeaudit.backends.audit_log import AuditLog
from timeaudit.backends.caching import NamespacedCache
from timeaudit.backends.llm import LMClient
from timeaudit.backends.search import SearchClient
from timeaudit.claims.extraction import extract_claims
from timeaudit.errors import AuditError
from timeaudit.leakage.detector import detect_leakage
from timeaudit.leakage.verification import VerificationPolicy
from timeaudit.metrics.leakage_metrics import InstanceAudit, audit_instance
from timeaudit.metrics.performance import brier, relative_error, spearman
from timeaudit.metrics.report import (
    DatasetReport,
    build_report,
    render_report_text,
    reports_to_json,
    tradeoff_csv,
)
from timeaudit.shapley.batched import batched_coalition_eval
from timeaudit.shapley.characteristic import make_characteristic, ranking_to_ranks
from timeaudit.shapley.coalition import SamplerConfig
from timeaudit.shapley.engine import compute_shapley
from timeaudit.claims.models import TaskType


@dataclass(frozen=True)
class RunConfig:
    out_dir: Path
    agents: tuple[str, ...] = ("superforecast", "temporal-hint", "timespec")
    seed: int = 42
    samples: int = 100
    batch_size: int = 256
    top_ks: tuple[int, ...] = (1, 3, 5)
    resume: bool = True
    audit_workers: int = 4
    state_date_policy: str = "prompt"

    def sampler_for(self, agent: str, instance_id: str) -> SamplerConfig:
        # Stable per-pair seed offset: repeated runs sample identically,
        # different pairs do not share permutation patterns.
        offset = zlib.crc32(f"{agent}:{instance_id}".encode()) & 0xFFFF
        return SamplerConfig(
            max_samples=self.samples,
            random_seed=self.seed + offset,
            batch_size=self.batch_size,
        )


@dataclass
class PairOutcome:
    """Everything one (agent, instance) pair produced."""

    agent: str
    instance_id: str
    task_label: str
    task_type: TaskType
    status: str = "ok"
    error: Optional[str] = None
    prediction: Optional[Prediction] = None
    performance_raw: Optional[float] = None
    audit: Optional[Any] = None  # InstanceAudit or resumed view
    trace: Optional[TimeSPECTrace] = None

    def to_json_dict(self) -> dict:
        payload = {
            "agent": self.agent,
            "instance_id": self.instance_id,
            "task": self.task_label,
            "task_type": self.task_type.value,
            "status": self.status,
            "error": self.error,
            "prediction": self.prediction.to_json_dict() if self.prediction else None,
            "performance_raw": self.performance_raw,
            "audit": self.audit.to_json_dict() if self.audit is not None else None,
        }
        return payload


@dataclass
class _ResumedAudit:
    """Read-back view of a stored instance audit; metric fields only."""

    instance_id: str
    olr: float
    shapley_dclr: float
    topk_leakage: Mapping[int, float]
    flags: tuple[str, ...] = ()

    @classmethod
    def from_json_dict(cls, payload: Mapping[str, Any]) -> "_ResumedAudit":
        return cls(
            instance_id=payload["instance_id"],
            olr=float(payload["olr"]),
            shapley_dclr=float(payload["shapley_dclr"]),
            topk_leakage={int(k): float(v) for k, v in payload["topk_leakage"].items()},
            flags=tuple(payload.get("flags", ())),
        )

    def to_json_dict(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "olr": self.olr,
            "shapley_dclr": self.shapley_dclr,
            "topk_leakage": {str(k): v for k, v in self.topk_leakage.items()},
            "flags": list(self.flags),
        }


def raw_performance(instance: TaskInstance, prediction: Prediction) -> float:
    """Task-native score against the quarantined ground truth."""
    truth = instance.ground_truth
    if instance.task_type is TaskType.CLASSIFICATION:
        outcome = 1 if truth["winner"] == "petitioner" else 0
        return brier(float(prediction.value), outcome)
    if instance.task_type is TaskType.REGRESSION:
        return relative_error(float(prediction.value), float(truth["salary"]))
    tickers = tuple(instance.input_payload["tickers"])
    return float(
        spearman(
            ranking_to_ranks(prediction.value, tickers),
            ranking_to_ranks(truth["ranking"], tickers),
        )
    )


def audit_prediction(
    instance: TaskInstance,
    prediction: Prediction,
    llm: LMClient,
    search_client: SearchClient,
    *,
    sampler: SamplerConfig = SamplerConfig(),
    policy: VerificationPolicy = VerificationPolicy(),
    top_ks: Sequence[int] = (1, 3, 5),
    cache: Optional[NamespacedCache] = None,
    audit_log: Optional[AuditLog] = None,
) -> InstanceAudit:
    """Full leakage audit of one prediction's rationale."""
    ctx = build_task_context(instance)
    claims = extract_claims(prediction.rationale, ctx, llm, audit=audit_log)
    verdicts = detect_leakage(
        claims, ctx, search_client, llm, policy=policy, cache=cache, audit=audit_log
    )
    estimates = []
    if claims:
        eval_cache: dict = {}

        def bulk_backend(coalitions, *, payload_to_value, empty_default):
            return batched_coalition_eval(
                claims,
                coalitions,
                ctx,
                llm,
                sampler,
                empty_default=empty_default,
                payload_to_value=payload_to_value,
                cache=eval_cache,
                audit=audit_log,
            )

        game = make_characteristic(
            instance.task_type,
            ctx,
            prediction.value,
            bulk_backend=bulk_backend,
            offline=False,
        )
        estimates = compute_shapley(game, [c.claim_id for c in claims], sampler)
    return audit_instance(
        instance.instance_id, claims, estimates, verdicts, top_ks=tuple(top_ks)
    )


class AuditRunner:
    def __init__(
        self,
        config: RunConfig,
        llm: LMClient,
        search_client: SearchClient,
        *,
        audit_log: Optional[AuditLog] = None,
    ):
        self.config = config
        self.llm = llm
        self.search_client = search_client
        self.cache = NamespacedCache()
        self.out_dir = Path(config.out_dir)
        self.audits_dir = self.out_dir / "audits"
        self.traces_dir = self.out_dir / "traces"
        self.audit_log = audit_log
        self.policy = VerificationPolicy(state_date_policy=config.state_date_policy)

    # -- storage ----------------------------------------------------------

    def _envelope_path(self, agent: str, instance_id: str) -> Path:
        return self.audits_dir / f"{agent}__{instance_id}.json"

    def _load_resumed(self, agent: str, instance: TaskInstance) -> Optional[PairOutcome]:
        path = self._envelope_path(agent, instance.instance_id)
        if not (self.config.resume and path.exists()):
            return None
        payload = json.loads(path.read_text(encoding="utf-8"))
        outcome = PairOutcome(
            agent=agent,
            instance_id=instance.instance_id,
            task_label=payload.get("task", profile_for(instance.task_type).domain_label),
            task_type=instance.task_type,
            status=payload["status"],
            error=payload.get("error"),
            performance_raw=payload.get("performance_raw"),
        )
        if payload.get("prediction"):
            outcome.prediction = Prediction.from_json_dict(payload["prediction"])
        if payload.get("audit"):
            outcome.audit = _ResumedAudit.from_json_dict(payload["audit"])
        return outcome

    def _store(self, outcome: PairOutcome) -> None:
        path = self._envelope_path(outcome.agent, outcome.instance_id)
        path.write_text(
            json.dumps(outcome.to_json_dict(), indent=2, sort_keys=True, default=str),
            encoding="utf-8",
        )
        if outcome.trace is not None:
            trace_path = self.traces_dir / f"{outcome.instance_id}.json"
            trace_path.write_text(
                json.dumps(outcome.trace.to_json_dict(), indent=2, default=str),
                encoding="utf-8",
            )

    # -- phases -----------------------------------------------------------

    def _predict(self, agent: str, instance: TaskInstance) -> PairOutcome:
        outcome = PairOutcome(
            agent=agent,
            instance_id=instance.instance_id,
            task_label=profile_for(instance.task_type).domain_label,
            task_type=instance.task_type,
        )
        try:
            prediction, trace = run_agent(
                agent,
                instance,
                self.llm,
                self.search_client,
                policy=self.policy,
                cache=self.cache,
                audit=self.audit_log,
            )
            outcome.prediction = prediction
            outcome.trace = trace
            outcome.performance_raw = raw_performance(instance, prediction)
        except AuditError as exc:
            outcome.status = "failed"
            outcome.error = f"{type(exc).__name__}: {exc}"
        return outcome

    def _audit(self, instance: TaskInstance, outcome: PairOutcome) -> PairOutcome:
        if outcome.status != "ok" or outcome.prediction is None:
            return outcome
        try:
            outcome.audit = audit_prediction(
                instance,
                outcome.prediction,
                self.llm,
                self.search_client,
                sampler=self.config.sampler_for(outcome.agent, instance.instance_id),
                policy=self.policy,
                top_ks=self.config.top_ks,
                cache=self.cache,
                audit_log=self.audit_log,
            )
        except AuditError as exc:
            outcome.status = "failed"
            outcome.error = f"{type(exc).__name__}: {exc}"
        return outcome

    def run(self, instances: Sequence[TaskInstance]) -> tuple[list[DatasetReport], list[PairOutcome]]:
        self.audits_dir.mkdir(parents=True, exist_ok=True)
        self.traces_dir.mkdir(parents=True, exist_ok=True)

        pending: list[tuple[TaskInstance, PairOutcome]] = []
        outcomes: list[PairOutcome] = []
        for agent in self.config.agents:
            for instance in instances:
                resumed = self._load_resumed(agent, instance)
                if resumed is not None:
                    outcomes.append(resumed)
                    continue
                pending.append((instance, self._predict(agent, instance)))

        if pending:
            with ThreadPoolExecutor(max_workers=self.config.audit_workers) as pool:
                audited = list(
                    pool.map(lambda pair: self._audit(pair[0], pair[1]), pending)
                )
            for outcome in audited:
                self._store(outcome)
                outcomes.append(outcome)

        reports = self.build_reports(outcomes)
        self.write_reports(reports)
        return reports, outcomes

    # -- aggregation --------------------------------------------------------

    def build_reports(self, outcomes: Sequence[PairOutcome]) -> list[DatasetReport]:
        by_task: dict[str, list[PairOutcome]] = {}
        for outcome in outcomes:
            by_task.setdefault(outcome.task_label, []).append(outcome)

        reports = []
        for task_label in sorted(by_task):
            group = by_task[task_label]
            task_type = group[0].task_type
            audits_by_agent: dict[str, list] = {}
            perf_by_agent: dict[str, float] = {}
            failed_by_agent: dict[str, int] = {}
            for agent in self.config.agents:
                rows = [o for o in group if o.agent == agent]
                good = [o for o in rows if o.status == "ok" and o.audit is not None]
                failed_by_agent[agent] = sum(1 for o in rows if o.status != "ok")
                if good:
                    audits_by_agent[agent] = [o.audit for o in good]
                    perfs = [o.performance_raw for o in good if o.performance_raw is not None]
                    if perfs:
                        perf_by_agent[agent] = sum(perfs) / len(perfs)
            if not audits_by_agent:
                continue
            reports.append(
                build_report(
                    task_type,
                    audits_by_agent,
                    perf_by_agent,
                    task_label=task_label,
                    failed_by_agent=failed_by_agent,
                    metadata={
                        "seed": self.config.seed,
                        "samples": self.config.samples,
                        "state_date_policy": self.config.state_date_policy,
                    },
                )
            )
        return reports

    def write_reports(self, reports: Sequence[DatasetReport]) -> None:
        (self.out_dir / "report.json").write_text(
            reports_to_json(reports), encoding="utf-8"
        )
        (self.out_dir / "report.txt").write_text(
            render_report_text(reports), encoding="utf-8"
        )
        (self.out_dir / "tradeoff.csv").write_text(tradeoff_csv(reports), encoding="utf-8")


def load_outcomes(out_dir: Path) -> list[PairOutcome]:
    """Rehydrate stored envelopes, e.g. for re-reporting."""
    outcomes = []
    for path in sorted((Path(out_dir) / "audits").glob("*.json")):
        payload = json.loads(path.read_text(encoding="utf-8"))
        outcome = PairOutcome(
            agent=payload["agent"],
            instance_id=payload["instance_id"],
            task_label=payload["task"],
            task_type=TaskType.parse(payload["task_type"]),
            status=payload["status"],
            error=payload.get("error"),
            performance_raw=payload.get("performance_raw"),
        )
        if payload.get("prediction"):
            outcome.prediction = Prediction.from_json_dict(payload["prediction"])
        if payload.get("audit"):
            outcome.audit = _ResumedAudit.from_json_dict(payload["audit"])
        outcomes.append(outcome)
    return outcomes
