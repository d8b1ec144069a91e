"""Deterministic rule-based model and search backends for offline runs.

``DeskLM`` plays every model role in the pipeline (forecaster, claim
extractor, verifier, coalition evaluator, synthesizer) by routing each
prompt on structural markers and answering from a per-dataset playbook.
The playbook is assembled from the ``mock`` block of each dataset
instance and is keyed by claim text, which therefore must be globally
unique across a dataset.

Predictions are pure functions of the claim weights that appear in a
rationale:

* classification  p = 0.5 + sum(weights)         (weights small enough
  that no clipping occurs, so attribution is exactly additive)
* regression      y = position_median * (1 + sum(weights))
* ranking         start from the canonical ticker order and apply each
  claim's swaps in authoring order

Because the same function answers drafts, coalition subsets, syntheses
and repredictions, downstream identities (additivity of attribution,
reprediction equality on identical rationales) hold exactly.

Authoring rules enforced at build time: claim texts are unique, are
never substrings of one another, avoid the prediction-statement cues
that rationale cleaning strips, and per-script weights stay within the
no-clipping budget.
"""
from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass
from datetime import date, timedelta
from typing import Any, Mapping, Optional, Sequence

from timeaudit.agents.tasks import profile_for
from timeaudit.agents.types import TaskInstance
from timeaudit.backends.fixture_corpus import (
    FixtureCorpus,
    FixtureDocument,
    FixtureSearchClient,
)
from timeaudit.backends.llm import LMRequest, LMResponse, ToolCall
from timeaudit.claims.models import TaskType
from timeaudit.errors import ScriptError
from timeaudit.harness.faithfulness import PREDICTION_CUE_RE, TASK_VALUE_RES

_WEIGHT_BUDGET = 0.45  # keeps 0.5 + any subset sum inside (0, 1): no clipping

_INSTANCE_ID_RE = re.compile(r'"instance_id":\s*"([^"]+)"')
_CLAIM_LINE_RE = re.compile(r"^\[(\d+)\]\s+(.*)$")
_SET_LINE_RE = re.compile(r"^SET\s+(\d+):\s*\[([\d,\s]*)\]$")
_VALIDATED_LINE_RE = re.compile(
    r"^\[(A[1-5]|B[12])\]\s+(.*?)(?:\s+\(verified:\s*\d{4}-\d{2}-\d{2}\))?$"
)


@dataclass(frozen=True)
class MockClaimSpec:
    """One scripted claim: its wording, audit outcome, and influence."""

    text: str
    category: str
    temporal: Optional[str] = None
    det: Optional[str] = None
    det_confidence: str = "none"
    weight: float = 0.0
    swaps: tuple[tuple[str, str], ...] = ()

    @classmethod
    def from_json_dict(cls, payload: Mapping[str, Any]) -> "MockClaimSpec":
        det = payload.get("det")
        return cls(
            text=str(payload["text"]),
            category=str(payload["category"]),
            temporal=payload.get("temporal"),
            det=det,
            det_confidence=str(
                payload.get("det_confidence", "high" if det else "none")
            ),
            weight=float(payload.get("weight", 0.0)),
            swaps=tuple(
                (str(a), str(b)) for a, b in payload.get("swaps", ())
            ),
        )


@dataclass(frozen=True)
class MockSearchSpec:
    query: str
    purpose: str = "gather evidence"
    num_results: int = 5

    @classmethod
    def from_json_dict(cls, payload: Mapping[str, Any]) -> "MockSearchSpec":
        return cls(
            query=str(payload["query"]),
            purpose=str(payload.get("purpose", "gather evidence")),
            num_results=int(payload.get("results", 5)),
        )


@dataclass(frozen=True)
class MockAgentScript:
    claims: tuple[MockClaimSpec, ...] = ()
    searches: tuple[MockSearchSpec, ...] = ()
    regen_claims: tuple[MockClaimSpec, ...] = ()
    regen_searches: tuple[MockSearchSpec, ...] = ()


@dataclass(frozen=True)
class InstanceProfile:
    instance_id: str
    task_type: TaskType
    cutoff: date
    tickers: tuple[str, ...] = ()
    position_median: float = 0.0


@dataclass
class _RegisteredClaim:
    spec: MockClaimSpec
    instance_id: str
    ordinal: int  # authoring order; fixes swap application order


class MockPlaybook:
    """Claim registry plus per-(instance, agent) scripts."""

    def __init__(self) -> None:
        self.instances: dict[str, InstanceProfile] = {}
        self.scripts: dict[tuple[str, str], MockAgentScript] = {}
        self.claims: dict[str, _RegisteredClaim] = {}
        self._next_ordinal = 0

    # -- construction ---------------------------------------------------

    @classmethod
    def from_instances(cls, instances: Sequence[TaskInstance]) -> "MockPlaybook":
        book = cls()
        for instance in instances:
            mock = instance.meta.get("mock")
            if not mock:
                continue
            book._add_instance(instance, mock)
        return book

    def _add_instance(self, instance: TaskInstance, mock: Mapping[str, Any]) -> None:
        payload = instance.input_payload
        profile = InstanceProfile(
            instance_id=instance.instance_id,
            task_type=instance.task_type,
            cutoff=instance.cutoff_date,
            tickers=tuple(payload.get("tickers", ())),
            position_median=float(payload.get("position_median", 0.0)),
        )
        self.instances[instance.instance_id] = profile
        for agent, script_payload in mock.get("agents", {}).items():
            script = MockAgentScript(
                claims=self._register_all(
                    instance, script_payload.get("claims", ())
                ),
                searches=tuple(
                    MockSearchSpec.from_json_dict(s)
                    for s in script_payload.get("searches", ())
                ),
                regen_claims=self._register_all(
                    instance, script_payload.get("regen_claims", ())
                ),
                regen_searches=tuple(
                    MockSearchSpec.from_json_dict(s)
                    for s in script_payload.get("regen_searches", ())
                ),
            )
            self._check_budget(instance.instance_id, agent, script)
            self.scripts[(instance.instance_id, agent)] = script

    def _register_all(
        self, instance: TaskInstance, payloads: Sequence[Mapping[str, Any]]
    ) -> tuple[MockClaimSpec, ...]:
        specs = []
        for payload in payloads:
            spec = MockClaimSpec.from_json_dict(payload)
            self._register(instance, spec)
            specs.append(spec)
        return tuple(specs)

    def _register(self, instance: TaskInstance, spec: MockClaimSpec) -> None:
        existing = self.claims.get(spec.text)
        if existing is not None:
            if existing.spec != spec or existing.instance_id != instance.instance_id:
                raise ValueError(
                    f"claim text reused with different content: {spec.text!r}"
                )
            return  # verbatim re-listing (e.g. kept across regeneration)
        cue = PREDICTION_CUE_RE.search(spec.text) or TASK_VALUE_RES[
            instance.task_type
        ].search(spec.text)
        if cue:
            raise ValueError(
                f"claim text would be stripped by rationale cleaning: {spec.text!r} "
                f"(matched {cue.group(0)!r})"
            )
        for other in self.claims:
            if spec.text in other or other in spec.text:
                raise ValueError(
                    f"claim texts must not nest: {spec.text!r} vs {other!r}"
                )
        self.claims[spec.text] = _RegisteredClaim(
            spec=spec, instance_id=instance.instance_id, ordinal=self._next_ordinal
        )
        self._next_ordinal += 1

    def _check_budget(self, instance_id: str, agent: str, script: MockAgentScript) -> None:
        total = sum(abs(c.weight) for c in script.claims) + sum(
            abs(c.weight) for c in script.regen_claims if c not in script.claims
        )
        if total > _WEIGHT_BUDGET:
            raise ValueError(
                f"{instance_id}/{agent}: |weight| sum {total:.3f} exceeds "
                f"{_WEIGHT_BUDGET} and could clip subset values"
            )

    # -- value model ----------------------------------------------------

    def _sorted(self, specs: Sequence[MockClaimSpec]) -> list[MockClaimSpec]:
        return sorted(specs, key=lambda s: self.claims[s.text].ordinal)

    def subset_prediction(
        self, instance_id: str, specs: Sequence[MockClaimSpec]
    ) -> Any:
        """Prediction implied by exactly this set of claims."""
        info = self.instances[instance_id]
        ordered = self._sorted(specs)
        if info.task_type is TaskType.CLASSIFICATION:
            p = 0.5 + sum(s.weight for s in ordered)
            return min(max(p, 0.02), 0.98)
        if info.task_type is TaskType.REGRESSION:
            return info.position_median * (1.0 + sum(s.weight for s in ordered))
        order = list(info.tickers)
        for spec in ordered:
            for a, b in spec.swaps:
                i, j = order.index(a), order.index(b)
                order[i], order[j] = order[j], order[i]
        return order

    def specs_in_text(self, text: str) -> list[MockClaimSpec]:
        """Registered claims appearing verbatim, in order of appearance."""
        found = [
            (text.index(claim_text), reg.spec)
            for claim_text, reg in self.claims.items()
            if claim_text in text
        ]
        found.sort(key=lambda pair: pair[0])
        return [spec for _, spec in found]

    def instance_for_specs(self, specs: Sequence[MockClaimSpec]) -> str:
        ids = {self.claims[s.text].instance_id for s in specs}
        if len(ids) != 1:
            raise ScriptError(f"claims span {len(ids)} instances; expected exactly 1")
        return next(iter(ids))

    def build_rationale(
        self, instance_id: str, specs: Sequence[MockClaimSpec]
    ) -> str:
        info = self.instances[instance_id]
        value = self.subset_prediction(instance_id, specs)
        lines = [s.text for s in self._sorted(specs)]
        if info.task_type is TaskType.CLASSIFICATION:
            lines.append(f"Therefore I estimate the probability at {value:.4f}.")
        elif info.task_type is TaskType.REGRESSION:
            lines.append(f"Therefore my salary prediction is ${value:,.0f}.")
        else:
            lines.append("Therefore my final ranking is: " + " > ".join(value) + ".")
        filler = (
            "The evidence assembled above was weighed for relevance and for "
            "internal consistency against the available record."
        )
        min_chars = profile_for(info.task_type).min_chars
        counter = 1
        text = "\n".join(lines + [filler])
        while len(text) < min_chars:
            text += (
                f"\nReview pass {counter} re-checked the evidence set for "
                "internal consistency without altering the weighting."
            )
            counter += 1
        return text


class DeskLM:
    """Stateless marker-routed mock model; thread-safe after construction."""

    def __init__(self, playbook: MockPlaybook):
        self.playbook = playbook
        self._lock = threading.Lock()
        self.num_calls = 0
        self.calls_by_route: dict[str, int] = {}

    # -- plumbing --------------------------------------------------------

    def complete(self, request: LMRequest) -> LMResponse:
        route, response = self._route(request)
        with self._lock:
            self.num_calls += 1
            self.calls_by_route[route] = self.calls_by_route.get(route, 0) + 1
        return response

    def _route(self, request: LMRequest) -> tuple[str, LMResponse]:
        user = request.user
        if "RATIONALE TO ANALYZE:" in user:
            return "extraction", self._extract(user)
        if "CLAIMS TO VERIFY:" in user:
            return "query_generation", self._generate_queries(user)
        if "CLAIMS WITH SEARCH RESULTS:" in user:
            return "date_extraction", self._extract_dates(user)
        if "CLAIMS (reference by ID):" in user:
            return "shapley_batch", self._evaluate_sets(user)
        if "# REPREDICTION TASK" in user:
            return "reprediction", self._repredict(user)
        if "# FINAL SYNTHESIS TASK" in user:
            return "aggregator", self._aggregate(user)
        if "# REGENERATION TASK" in user:
            return "regenerator", self._tool_loop(user, regen=True)
        tool_names = {t.name for t in request.tools}
        if "submit_draft_prediction" in tool_names:
            return "generator", self._tool_loop(user, regen=False)
        if "submit_prediction" in tool_names:
            agent = (
                "temporal-hint"
                if "CRITICAL TEMPORAL CONSTRAINT" in request.system
                else "superforecast"
            )
            return f"baseline_{agent}", self._baseline(user, agent)
        raise ScriptError("mock model cannot route this prompt")

    def _instance_id(self, text: str) -> str:
        match = _INSTANCE_ID_RE.search(text)
        if not match:
            raise ScriptError("prompt carries no instance_id marker")
        return match.group(1)

    def _script(self, instance_id: str, agent: str) -> MockAgentScript:
        try:
            return self.playbook.scripts[(instance_id, agent)]
        except KeyError:
            raise ScriptError(f"no mock script for {instance_id}/{agent}") from None

    @staticmethod
    def _embedded_json(text: str, marker: str) -> Any:
        start = text.index(marker) + len(marker)
        open_idx = min(
            i for i in (text.find("[", start), text.find("{", start)) if i != -1
        )
        value, _ = json.JSONDecoder().raw_decode(text, open_idx)
        return value

    # -- prediction-side routes -------------------------------------------

    def _baseline(self, user: str, agent: str) -> LMResponse:
        instance_id = self._instance_id(user)
        script = self._script(instance_id, agent)
        info = self.playbook.instances[instance_id]
        profile = profile_for(info.task_type)
        value = self.playbook.subset_prediction(instance_id, script.claims)
        return LMResponse(
            tool_call=ToolCall(
                name="submit_prediction",
                arguments={
                    profile.value_field: value,
                    profile.rationale_field: self.playbook.build_rationale(
                        instance_id, script.claims
                    ),
                },
            )
        )

    def _tool_loop(self, user: str, *, regen: bool) -> LMResponse:
        instance_id = self._instance_id(user)
        script = self._script(instance_id, "timespec")
        searches = script.regen_searches if regen else script.searches
        claims = script.regen_claims if regen else script.claims
        attempts = user.count("[tool_result search_information]") + user.count(
            "[tool_error search_information]"
        )
        draft_errors = user.count("[tool_error submit_draft_prediction]")
        if attempts < len(searches):
            spec = searches[attempts]
            return LMResponse(
                tool_call=ToolCall(
                    name="search_information",
                    arguments={"query": spec.query, "purpose": spec.purpose},
                )
            )
        if draft_errors > attempts - len(searches):
            # Evidence floor still unmet after the scripted searches: one
            # fresh probe per rejection so the loop cannot stall on duplicates.
            return LMResponse(
                tool_call=ToolCall(
                    name="search_information",
                    arguments={
                        "query": f"{instance_id} supplementary evidence {attempts}",
                        "purpose": "meet the evidence floor",
                    },
                )
            )
        value = self.playbook.subset_prediction(instance_id, claims)
        return LMResponse(
            tool_call=ToolCall(
                name="submit_draft_prediction",
                arguments={
                    "prediction": value,
                    "rationale": self.playbook.build_rationale(instance_id, claims),
                },
            )
        )

    def _aggregate(self, user: str) -> LMResponse:
        instance_id = self._instance_id(user)
        specs = []
        for line in user.splitlines():
            match = _VALIDATED_LINE_RE.match(line.strip())
            if not match:
                continue
            reg = self.playbook.claims.get(match.group(2))
            if reg is not None:
                specs.append(reg.spec)
        value = self.playbook.subset_prediction(instance_id, specs)
        return LMResponse(
            tool_call=ToolCall(
                name="submit_final_prediction",
                arguments={
                    "prediction": value,
                    "rationale": self.playbook.build_rationale(instance_id, specs),
                },
            )
        )

    def _repredict(self, user: str) -> LMResponse:
        rationale = user.split("ANALYSIS:", 1)[1]
        specs = self.playbook.specs_in_text(rationale)
        if specs:
            instance_id = self.playbook.instance_for_specs(specs)
        else:
            instance_id = self._instance_id(user)
        value = self.playbook.subset_prediction(instance_id, specs)
        return LMResponse(
            tool_call=ToolCall(
                name="submit_reprediction", arguments={"prediction": value}
            )
        )

    # -- audit-side routes -------------------------------------------------

    def _extract(self, user: str) -> LMResponse:
        rationale = user.split("RATIONALE TO ANALYZE:", 1)[1]
        claims = []
        for claim_id, spec in enumerate(self.playbook.specs_in_text(rationale), start=1):
            claims.append(
                {
                    "claim_id": claim_id,
                    "claim_text": spec.text,
                    "original_text": spec.text,
                    "temporal_reference": spec.temporal,
                    "claim_category": spec.category,
                    "category_reasoning": "scripted fixture category",
                }
            )
        return LMResponse(structured={"claims": claims})

    def _spec_for_text(self, claim_text: str) -> Optional[MockClaimSpec]:
        reg = self.playbook.claims.get(claim_text)
        return reg.spec if reg else None

    def _generate_queries(self, user: str) -> LMResponse:
        payload = self._embedded_json(user, "CLAIMS TO VERIFY:")
        out = [
            {"index": entry["index"], "query": f"{entry['claim_text']} event date"}
            for entry in payload
        ]
        return LMResponse(structured=out)

    def _extract_dates(self, user: str) -> LMResponse:
        payload = self._embedded_json(user, "CLAIMS WITH SEARCH RESULTS:")
        out = []
        for entry in payload:
            spec = self._spec_for_text(entry["claim_text"])
            if spec is None or spec.det is None:
                out.append(
                    {
                        "index": entry["index"],
                        "event_date": None,
                        "confidence": "none" if spec is None else spec.det_confidence,
                        "reasoning": "no dated record found",
                    }
                )
            else:
                out.append(
                    {
                        "index": entry["index"],
                        "event_date": spec.det,
                        "confidence": spec.det_confidence,
                        "reasoning": "dated record located in archive",
                    }
                )
        return LMResponse(structured=out)

    def _evaluate_sets(self, user: str) -> LMResponse:
        by_id: dict[int, MockClaimSpec] = {}
        sets: list[tuple[int, tuple[int, ...]]] = []
        in_claims = False
        for line in user.splitlines():
            stripped = line.strip()
            if stripped == "CLAIMS (reference by ID):":
                in_claims = True
                continue
            if in_claims:
                match = _CLAIM_LINE_RE.match(stripped)
                if match:
                    spec = self._spec_for_text(match.group(2))
                    if spec is None:
                        raise ScriptError(
                            f"unregistered claim in coalition prompt: {match.group(2)!r}"
                        )
                    by_id[int(match.group(1))] = spec
                    continue
                in_claims = False
            match = _SET_LINE_RE.match(stripped)
            if match:
                ids = tuple(
                    int(x) for x in match.group(2).replace(",", " ").split()
                )
                sets.append((int(match.group(1)), ids))
        if not by_id:
            raise ScriptError("coalition prompt lists no known claims")
        instance_id = self.playbook.instance_for_specs(list(by_id.values()))
        out = []
        for set_index, ids in sets:
            specs = [by_id[i] for i in ids]
            out.append(
                {
                    "set": set_index,
                    "p": self.playbook.subset_prediction(instance_id, specs),
                }
            )
        return LMResponse(structured=out)


def synthesize_corpus(instances: Sequence[TaskInstance]) -> FixtureCorpus:
    """Searchable documents implied by the mock scripts.

    Each scripted search query gets dated pre-cutoff evidence documents;
    each dated claim gets one archive document carrying its determination
    date (dated at that determination, which may postdate the cutoff).
    """
    corpus = FixtureCorpus()
    for instance in instances:
        mock = instance.meta.get("mock")
        if not mock:
            continue
        for agent, script in mock.get("agents", {}).items():
            for kind in ("searches", "regen_searches"):
                for s_index, payload in enumerate(script.get(kind, ())):
                    spec = MockSearchSpec.from_json_dict(payload)
                    for d in range(spec.num_results):
                        corpus.add(
                            FixtureDocument(
                                doc_id=f"ev-{instance.instance_id}-{agent}-{kind}-{s_index}-{d}",
                                text=(
                                    f"Evidence item {d + 1} for query {spec.query!r}: "
                                    "contemporaneous reporting available before the cutoff."
                                ),
                                publication_date=instance.cutoff_date
                                - timedelta(days=7 + d),
                                keywords=(spec.query.casefold(),),
                            )
                        )
            for kind in ("claims", "regen_claims"):
                for c_index, payload in enumerate(script.get(kind, ())):
                    spec = MockClaimSpec.from_json_dict(payload)
                    if spec.det is None:
                        continue
                    corpus.add(
                        FixtureDocument(
                            doc_id=f"det-{instance.instance_id}-{agent}-{kind}-{c_index}",
                            text=(
                                f"Archive record: {spec.text} "
                                f"Recorded determination {spec.det}."
                            ),
                            publication_date=date.fromisoformat(spec.det),
                            keywords=(spec.text.casefold(),),
                        )
                    )
    return corpus


def build_mock_backends(
    instances: Sequence[TaskInstance],
) -> tuple[DeskLM, FixtureSearchClient]:
    """Model and search clients fully determined by the dataset."""
    playbook = MockPlaybook.from_instances(instances)
    if not playbook.scripts:
        raise ScriptError(
            "no instance carries a mock block; offline mode needs scripted behavior"
        )
    return DeskLM(playbook), FixtureSearchClient(synthesize_corpus(instances))
