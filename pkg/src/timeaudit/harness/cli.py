"""Command-line interface.

Every subcommand can run fully offline with ``--mock``, which builds all
model and search behavior from the ``mock`` blocks in the dataset. With
a ``--config`` file the same commands talk to HTTP providers instead
(sections ``lm`` and ``search``; API keys come only from the environment
variables the config names).

Exit codes: 0 success, 1 at least one instance failed, 2 usage errors.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import click

from timeaudit.agents import AGENT_KINDS, run_agent
from timeaudit.agents.tasks import build_task_context
from timeaudit.agents.types import TaskInstance
from timeaudit.backends.audit_log import AuditLog
from timeaudit.backends.caching import NamespacedCache
from timeaudit.backends.http import ChatCompletionsLM, HTTPSearchClient, load_provider_config
from timeaudit.claims.extraction import extract_claims
from timeaudit.claims.models import claims_from_json, claims_to_json
from timeaudit.errors import AuditError, ConfigError
from timeaudit.harness.dataset import load_datasets
from timeaudit.harness.faithfulness import audit_faithfulness, summarize_gaps
from timeaudit.harness.mocks import build_mock_backends
from timeaudit.harness.runner import AuditRunner, RunConfig, load_outcomes
from timeaudit.leakage.detector import detect_leakage
from timeaudit.shapley.coalition import SamplerConfig

_AGENT_CHOICES = click.Choice(list(AGENT_KINDS) + ["all"])


def _instances_from(datasets: Sequence[str]) -> list[TaskInstance]:
    if not datasets:
        raise click.UsageError("at least one --dataset is required")
    try:
        return load_datasets(datasets)
    except AuditError as exc:
        raise click.UsageError(str(exc)) from exc


def _backends(instances: Sequence[TaskInstance], mock: bool, config: Optional[str]):
    if mock:
        return build_mock_backends(instances)
    if not config:
        raise click.UsageError("either --mock or --config is required")
    try:
        lm_config = load_provider_config(Path(config), "lm")
        search_config = load_provider_config(Path(config), "search")
    except ConfigError as exc:
        raise click.UsageError(str(exc)) from exc
    return ChatCompletionsLM(lm_config), HTTPSearchClient(search_config)


def _pick_instance(instances: Sequence[TaskInstance], instance_id: str) -> TaskInstance:
    for instance in instances:
        if instance.instance_id == instance_id:
            return instance
    raise click.UsageError(f"instance {instance_id!r} not found in the dataset(s)")


def _agent_list(agent: str) -> tuple[str, ...]:
    return tuple(AGENT_KINDS) if agent == "all" else (agent,)


dataset_option = click.option(
    "--dataset",
    "datasets",
    multiple=True,
    type=click.Path(exists=True, dir_okay=False),
    help="JSONL dataset file; may be repeated.",
)
mock_option = click.option(
    "--mock", is_flag=True, help="Use the scripted offline backends from the dataset."
)
config_option = click.option(
    "--config", type=click.Path(exists=True, dir_okay=False), help="Provider config JSON."
)


@click.group()
@click.version_option(package_name="timeaudit")
def main() -> None:
    """Audit model prediction rationales for temporal knowledge leakage."""


@main.command()
@dataset_option
@mock_option
@config_option
@click.option("--agent", default="all", type=_AGENT_CHOICES, show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Output directory.")
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--samples", default=100, show_default=True, type=int)
@click.option("--resume/--no-resume", default=True, show_default=True)
@click.option(
    "--state-date-policy",
    default="prompt",
    type=click.Choice(["prompt", "strict"]),
    show_default=True,
)
def evaluate(
    datasets, mock, config, agent, out, seed, samples, resume, state_date_policy
) -> None:
    """Predict with each agent, audit every rationale, write reports."""
    instances = _instances_from(datasets)
    llm, search_client = _backends(instances, mock, config)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    run_config = RunConfig(
        out_dir=out_dir,
        agents=_agent_list(agent),
        seed=seed,
        samples=samples,
        resume=resume,
        state_date_policy=state_date_policy,
    )
    audit_log = AuditLog(out_dir / "prompt_log.jsonl")
    runner = AuditRunner(run_config, llm, search_client, audit_log=audit_log)
    reports, outcomes = runner.run(instances)

    click.echo((out_dir / "report.txt").read_text(encoding="utf-8"))
    failed = [o for o in outcomes if o.status != "ok"]
    for outcome in failed:
        click.echo(
            f"FAILED {outcome.agent}/{outcome.instance_id}: {outcome.error}", err=True
        )
    if failed:
        sys.exit(1)


@main.command("agent-run")
@dataset_option
@mock_option
@config_option
@click.option("--instance", "instance_id", required=True)
@click.option("--agent", required=True, type=click.Choice(list(AGENT_KINDS)))
@click.option("--trace-out", type=click.Path(dir_okay=False), help="Write the run trace here.")
def agent_run(datasets, mock, config, instance_id, agent, trace_out) -> None:
    """Run one agent on one instance and print its prediction."""
    instances = _instances_from(datasets)
    instance = _pick_instance(instances, instance_id)
    llm, search_client = _backends(instances, mock, config)
    try:
        prediction, trace = run_agent(agent, instance, llm, search_client, cache=NamespacedCache())
    except AuditError as exc:
        click.echo(f"FAILED: {type(exc).__name__}: {exc}", err=True)
        sys.exit(1)
    click.echo(json.dumps(prediction.to_json_dict(), indent=2))
    if trace_out and trace is not None:
        Path(trace_out).write_text(
            json.dumps(trace.to_json_dict(), indent=2, default=str), encoding="utf-8"
        )


@main.command()
@dataset_option
@mock_option
@config_option
@click.option("--instance", "instance_id", required=True)
@click.option(
    "--rationale-file",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="Plain-text rationale to decompose.",
)
def extract(datasets, mock, config, instance_id, rationale_file) -> None:
    """Decompose a rationale into categorized atomic claims."""
    instances = _instances_from(datasets)
    instance = _pick_instance(instances, instance_id)
    llm, _ = _backends(instances, mock, config)
    ctx = build_task_context(instance)
    rationale = Path(rationale_file).read_text(encoding="utf-8")
    try:
        claims = extract_claims(rationale, ctx, llm)
    except AuditError as exc:
        click.echo(f"FAILED: {type(exc).__name__}: {exc}", err=True)
        sys.exit(1)
    click.echo(json.dumps(claims_to_json(claims), indent=2))


@main.command()
@dataset_option
@mock_option
@config_option
@click.option("--instance", "instance_id", required=True)
@click.option(
    "--claims-file",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="Claims JSON produced by `extract`.",
)
@click.option(
    "--state-date-policy",
    default="prompt",
    type=click.Choice(["prompt", "strict"]),
    show_default=True,
)
def detect(datasets, mock, config, instance_id, claims_file, state_date_policy) -> None:
    """Verify determination dates and print leakage verdicts."""
    from timeaudit.leakage.verification import VerificationPolicy

    instances = _instances_from(datasets)
    instance = _pick_instance(instances, instance_id)
    llm, search_client = _backends(instances, mock, config)
    ctx = build_task_context(instance)
    claims = claims_from_json(json.loads(Path(claims_file).read_text(encoding="utf-8")))
    try:
        verdicts = detect_leakage(
            claims,
            ctx,
            search_client,
            llm,
            policy=VerificationPolicy(state_date_policy=state_date_policy),
            cache=NamespacedCache(),
        )
    except AuditError as exc:
        click.echo(f"FAILED: {type(exc).__name__}: {exc}", err=True)
        sys.exit(1)
    click.echo(json.dumps([v.to_json_dict() for v in verdicts], indent=2))


@main.command()
@dataset_option
@mock_option
@config_option
@click.option("--instance", "instance_id", required=True)
@click.option(
    "--claims-file",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
)
@click.option(
    "--prediction",
    "prediction_json",
    required=True,
    help='Full-rationale prediction value as JSON, e.g. 0.78 or ["NVDA","AMD"].',
)
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--samples", default=100, show_default=True, type=int)
def attribute(
    datasets, mock, config, instance_id, claims_file, prediction_json, seed, samples
) -> None:
    """Estimate each claim's influence on the prediction."""
    from timeaudit.shapley.batched import batched_coalition_eval
    from timeaudit.shapley.characteristic import make_characteristic
    from timeaudit.shapley.engine import compute_shapley

    instances = _instances_from(datasets)
    instance = _pick_instance(instances, instance_id)
    llm, _ = _backends(instances, mock, config)
    ctx = build_task_context(instance)
    claims = claims_from_json(json.loads(Path(claims_file).read_text(encoding="utf-8")))
    value = json.loads(prediction_json)
    if isinstance(value, list):
        value = tuple(value)
    sampler = SamplerConfig(max_samples=samples, random_seed=seed)

    def bulk_backend(coalitions, *, payload_to_value, empty_default):
        return batched_coalition_eval(
            claims,
            coalitions,
            ctx,
            llm,
            sampler,
            empty_default=empty_default,
            payload_to_value=payload_to_value,
            cache={},
        )

    try:
        game = make_characteristic(
            instance.task_type, ctx, value, bulk_backend=bulk_backend
        )
        estimates = compute_shapley(game, [c.claim_id for c in claims], sampler)
    except AuditError as exc:
        click.echo(f"FAILED: {type(exc).__name__}: {exc}", err=True)
        sys.exit(1)
    click.echo(json.dumps([e.to_json_dict() for e in estimates], indent=2))


@main.command()
@dataset_option
@mock_option
@config_option
@click.option("--agent", default="all", type=_AGENT_CHOICES, show_default=True)
def faithfulness(datasets, mock, config, agent) -> None:
    """Re-predict from cleaned rationales and report the gaps."""
    instances = _instances_from(datasets)
    llm, search_client = _backends(instances, mock, config)
    cache = NamespacedCache()
    results = []
    failures = 0
    for kind in _agent_list(agent):
        for instance in instances:
            try:
                prediction, _ = run_agent(
                    kind, instance, llm, search_client, cache=cache
                )
                results.append(
                    audit_faithfulness(instance, prediction, llm, agent=kind)
                )
            except AuditError as exc:
                failures += 1
                click.echo(
                    f"FAILED {kind}/{instance.instance_id}: {exc}", err=True
                )
    payload = summarize_gaps(results)
    payload["results"] = [r.to_json_dict() for r in results]
    click.echo(json.dumps(payload, indent=2))
    if failures:
        sys.exit(1)


@main.command()
@click.option("--out", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--agent", "agents", multiple=True, help="Restrict to these agents.")
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--samples", default=100, show_default=True, type=int)
def report(out, agents, seed, samples) -> None:
    """Rebuild report files from stored audit envelopes."""
    out_dir = Path(out)
    outcomes = load_outcomes(out_dir)
    if not outcomes:
        raise click.UsageError(f"no audit envelopes under {out_dir}/audits")
    agent_list = tuple(agents) if agents else tuple(
        sorted({o.agent for o in outcomes})
    )
    config = RunConfig(out_dir=out_dir, agents=agent_list, seed=seed, samples=samples)
    runner = AuditRunner(config, llm=None, search_client=None)  # type: ignore[arg-type]
    reports = runner.build_reports([o for o in outcomes if o.agent in agent_list])
    runner.write_reports(reports)
    click.echo((out_dir / "report.txt").read_text(encoding="utf-8"))


__all__ = ["main"]
