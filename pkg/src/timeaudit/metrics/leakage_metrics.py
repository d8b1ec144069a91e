"""Leakage scores over one audited instance.

Three views of the same verdicts:

* OLR: unweighted fraction of leaked claims
* Shapley-weighted leakage: leaked fraction of absolute attribution
  mass, sum(|phi_i| * l_i) / sum(|phi_i|)
* Top-K leakage: leaked fraction among the K most influential claims

Degenerate inputs never raise; they fall back as documented and carry a
flag naming the fallback.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

from timeaudit.errors import ClaimSetMismatch
from timeaudit.metrics.flags import FlaggedFloat

if TYPE_CHECKING:  # structural types only; no runtime dependency
    from timeaudit.claims.models import ExtractedClaim
    from timeaudit.leakage.types import LeakageVerdict
    from timeaudit.shapley.coalition import ShapleyEstimate

_EPSILON = 1e-12

DEFAULT_TOP_KS = (1, 3, 5)


def _leak_indicator(item: object) -> int:
    leaked = getattr(item, "leaked", item)
    return 1 if leaked else 0


def olr(verdicts: Iterable[object]) -> FlaggedFloat:
    """Overall leakage rate; an empty claim set scores 0 and is flagged."""
    indicators = [_leak_indicator(v) for v in verdicts]
    if not indicators:
        return FlaggedFloat(0.0, ("empty_claim_set",))
    return FlaggedFloat(sum(indicators) / len(indicators))


def _verdicts_by_id(verdicts: Sequence["LeakageVerdict"]) -> dict[int, int]:
    return {v.claim_id: _leak_indicator(v) for v in verdicts}


def _matched(
    estimates: Sequence["ShapleyEstimate"], verdicts: Sequence["LeakageVerdict"]
) -> tuple[Sequence["ShapleyEstimate"], dict[int, int]]:
    leaks = _verdicts_by_id(verdicts)
    estimate_ids = {e.claim_id for e in estimates}
    if estimate_ids != set(leaks):
        raise ClaimSetMismatch(
            f"attribution covers {sorted(estimate_ids)} but verdicts cover {sorted(leaks)}"
        )
    return estimates, leaks


def shapley_dclr(
    estimates: Sequence["ShapleyEstimate"], verdicts: Sequence["LeakageVerdict"]
) -> FlaggedFloat:
    """Attribution-weighted leakage rate.

    When total absolute attribution mass is below 1e-12 the weighting is
    meaningless; the value falls back to OLR with a flag.
    """
    estimates, leaks = _matched(estimates, verdicts)
    if not estimates:
        return FlaggedFloat(0.0, ("empty_claim_set",))
    total = sum(abs(e.phi) for e in estimates)
    if total < _EPSILON:
        fallback = olr(verdicts)
        return FlaggedFloat(float(fallback), ("degenerate_weights",) + fallback.flags)
    weighted = sum(abs(e.phi) * leaks[e.claim_id] for e in estimates)
    return FlaggedFloat(weighted / total)


def topk_leakage(
    estimates: Sequence["ShapleyEstimate"],
    verdicts: Sequence["LeakageVerdict"],
    k: int,
) -> FlaggedFloat:
    """Leaked fraction among the top-K claims by |phi|.

    Ordering ties break toward the lower claim id; a tie that straddles
    the K boundary is flagged because the cut is then convention, not
    attribution.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    estimates, leaks = _matched(estimates, verdicts)
    if not estimates:
        return FlaggedFloat(0.0, ("empty_claim_set",))
    ranked = sorted(estimates, key=lambda e: (-abs(e.phi), e.claim_id))
    top = ranked[: min(k, len(ranked))]
    flags: tuple[str, ...] = ()
    if len(ranked) > k and abs(ranked[k - 1].phi) == abs(ranked[k].phi):
        flags = ("topk_tiebreak",)
    return FlaggedFloat(sum(leaks[e.claim_id] for e in top) / len(top), flags)


@dataclass
class InstanceAudit:
    """Everything the audit produced for one prediction instance."""

    instance_id: str
    claims: tuple = ()
    shapley_estimates: tuple = ()
    verdicts: tuple = ()
    olr: FlaggedFloat = FlaggedFloat(0.0)
    shapley_dclr: FlaggedFloat = FlaggedFloat(0.0)
    topk_leakage: Mapping[int, FlaggedFloat] = field(default_factory=dict)

    @property
    def flags(self) -> tuple[str, ...]:
        collected: list[str] = []
        for value in (self.olr, self.shapley_dclr, *self.topk_leakage.values()):
            for flag in getattr(value, "flags", ()):
                if flag not in collected:
                    collected.append(flag)
        return tuple(collected)

    def to_json_dict(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "claims": [c.to_json_dict() for c in self.claims],
            "shapley_estimates": [e.to_json_dict() for e in self.shapley_estimates],
            "verdicts": [v.to_json_dict() for v in self.verdicts],
            "olr": float(self.olr),
            "shapley_dclr": float(self.shapley_dclr),
            "topk_leakage": {str(k): float(v) for k, v in self.topk_leakage.items()},
            "flags": list(self.flags),
        }


def audit_instance(
    instance_id: str,
    claims: Sequence["ExtractedClaim"],
    estimates: Sequence["ShapleyEstimate"],
    verdicts: Sequence["LeakageVerdict"],
    top_ks: Sequence[int] = DEFAULT_TOP_KS,
) -> InstanceAudit:
    """Assemble the per-instance metric bundle."""
    return InstanceAudit(
        instance_id=instance_id,
        claims=tuple(claims),
        shapley_estimates=tuple(estimates),
        verdicts=tuple(verdicts),
        olr=olr(verdicts),
        shapley_dclr=shapley_dclr(estimates, verdicts),
        topk_leakage={k: topk_leakage(estimates, verdicts, k) for k in top_ks},
    )
