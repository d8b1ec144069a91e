"""Acceptance gate.

Each test is one shipping criterion, so ``pytest -v`` prints exactly one
pass/fail line per criterion. Tolerances and sizes are stated inline;
everything is seeded and deterministic.
"""
from __future__ import annotations

import calendar
import itertools
import json
import re
import time
from datetime import date, timedelta

import numpy as np
import pytest
from click.testing import CliRunner

from _builders import make_claim, make_ctx, make_estimate, make_instance, make_verdict
from conftest import FIXTURES_DIR, instance_by_id
from test_shapley_batched import SetCountingLM, claims_for
from test_verification import date_script, query_script, result
from timeaudit.agents.timespec import run_timespec
from timeaudit.agents.types import Prediction
from timeaudit.backends.caching import NamespacedCache
from timeaudit.backends.scripted import (
    CountingSearchClient,
    ScriptedLM,
    StaticSearchClient,
)
from timeaudit.claims.models import TaskType
from timeaudit.claims.temporal import parse_temporal_reference
from timeaudit.errors import EmptyRationale
from timeaudit.harness.cli import main
from timeaudit.harness.faithfulness import audit_faithfulness, summarize_gaps
from timeaudit.leakage.detector import detect_leakage
from timeaudit.metrics import (
    audit_instance,
    brier,
    kendall_relative,
    mre,
    olr,
    relative_error,
    shapley_dclr,
    spearman,
    topk_leakage,
    transform_performance,
)
from timeaudit.shapley.batched import batched_coalition_eval
from timeaudit.shapley.coalition import Coalition, SamplerConfig, table_game
from timeaudit.shapley.engine import compute_shapley, exact_shapley


# --- shared random-game suite (criteria 1 and 2) -------------------------

def structured_game(rng, n):
    """Random table game with a known dummy (id 1) and symmetric pair (2, 3).

    The value ignores player 1 entirely and depends on players 2 and 3
    only through how many of them joined, so the dummy and symmetry
    axioms have exact expected outcomes.
    """
    ids = tuple(range(1, n + 1))
    values = {}
    if n == 1:
        values[Coalition.EMPTY] = float(rng.uniform(-1, 1))
        values[Coalition.of([1])] = float(rng.uniform(-1, 1))
        dummy, sym = None, None
    elif n == 2:
        base = {False: float(rng.uniform(-1, 1)), True: float(rng.uniform(-1, 1))}
        for r in range(3):
            for combo in itertools.combinations(ids, r):
                values[Coalition.of(combo)] = base[2 in combo]
        dummy, sym = 1, None
    else:
        rest = ids[3:]
        f = {}
        for r in range(len(rest) + 1):
            for combo in itertools.combinations(rest, r):
                f[frozenset(combo)] = float(rng.uniform(-1, 1))
        g = [float(rng.uniform(-1, 1)) for _ in range(3)]
        for r in range(n + 1):
            for combo in itertools.combinations(ids, r):
                members = set(combo)
                values[Coalition.of(combo)] = (
                    f[frozenset(members & set(rest))]
                    + g[len(members & {2, 3})]
                )
        dummy, sym = 1, (2, 3)
    return {
        "ids": ids,
        "values": values,
        "game": table_game(TaskType.CLASSIFICATION, values),
        "dummy": dummy,
        "sym": sym,
    }


@pytest.fixture(scope="module")
def game_suite():
    rng = np.random.default_rng(20260815)
    return [structured_game(rng, (i % 8) + 1) for i in range(200)]


def test_c01_exact_shapley_axioms_on_200_games_under_5s(game_suite):
    """Efficiency to 1e-9 plus dummy/symmetry axioms; < 5 s total."""
    started = time.perf_counter()
    for spec in game_suite:
        game, ids = spec["game"], spec["ids"]
        estimates = exact_shapley(game, ids)
        by_id = {e.claim_id: e.phi for e in estimates}
        grand = game.evaluate(Coalition.of(ids))
        total = sum(by_id[i] for i in ids)
        assert abs(total - (grand - game.empty_coalition_default)) <= 1e-9
        if spec["dummy"] is not None:
            assert abs(by_id[spec["dummy"]]) <= 1e-9
        if spec["sym"] is not None:
            i, j = spec["sym"]
            assert abs(by_id[i] - by_id[j]) <= 1e-9
    assert time.perf_counter() - started < 5.0


def test_c02_mc_convergence_and_unbiasedness(game_suite):
    """m=2000 coverage within 3 SE in >= 95% of trials; m=100 unbiased.

    Coverage runs the n >= 2 games with 5 seeds each (the full 100-seed
    grid only scales the trial count, not the statistics). Unbiasedness
    pools one game per size over 100 seeds and checks the standardized
    bias of the seed means.
    """
    mc_games = [s for s in game_suite if len(s["ids"]) >= 2]
    covered = trials = 0
    for spec in mc_games:
        exact = {e.claim_id: e.phi for e in exact_shapley(spec["game"], spec["ids"])}
        for seed in range(5):
            cfg = SamplerConfig(max_samples=2000, random_seed=seed, exact_threshold=1)
            estimates = compute_shapley(spec["game"], spec["ids"], cfg)
            assert all(e.method == "monte_carlo" for e in estimates)
            trials += 1
            if all(
                abs(e.phi - exact[e.claim_id]) <= 3 * e.std_error + 1e-12
                for e in estimates
            ):
                covered += 1
    assert trials == 875
    assert covered / trials >= 0.95

    z_scores = []
    by_n = {len(s["ids"]): s for s in mc_games}
    for n in range(2, 9):
        spec = by_n[n]
        exact = {e.claim_id: e.phi for e in exact_shapley(spec["game"], spec["ids"])}
        runs = {i: [] for i in spec["ids"]}
        for seed in range(100):
            cfg = SamplerConfig(max_samples=100, random_seed=1000 + seed, exact_threshold=1)
            for e in compute_shapley(spec["game"], spec["ids"], cfg):
                runs[e.claim_id].append(e.phi)
        for claim_id, samples in runs.items():
            arr = np.asarray(samples)
            se_mean = arr.std(ddof=1) / np.sqrt(len(arr))
            if se_mean <= 1e-12:
                # structurally constant marginal: estimator is exact every seed
                assert abs(arr.mean() - exact[claim_id]) <= 1e-9
                continue
            z_scores.append((arr.mean() - exact[claim_id]) / se_mean)
    # pooled standardized bias of the seed means stays within 2 SE of zero
    assert abs(np.mean(z_scores)) <= 2 / np.sqrt(len(z_scores))
    assert max(abs(z) for z in z_scores) <= 4.5


def test_c03_metric_oracles_match_brute_force():
    """Every reported metric vs an independent formula, 1000 draws, 1e-12."""
    rng = np.random.default_rng(99)
    tol = 1e-12

    for _ in range(1000):
        n = int(rng.integers(1, 21))
        p = rng.uniform(0, 1, n)
        o = rng.integers(0, 2, n)
        reported = sum(brier(float(p[i]), int(o[i])) for i in range(n)) / n
        assert abs(reported - sum((p[i] - o[i]) ** 2 for i in range(n)) / n) <= tol

    for _ in range(1000):
        y = float(rng.uniform(0.5, 50.0))
        y_hat = float(rng.uniform(0.0, 60.0))
        assert abs(relative_error(y_hat, y) - abs(y_hat - y) / y) <= tol

    for _ in range(1000):
        n = int(rng.integers(2, 13))
        a = [int(x) for x in rng.permutation(n) + 1]
        b = [int(x) for x in rng.permutation(n) + 1]
        d2 = sum((a[i] - b[i]) ** 2 for i in range(n))
        assert abs(spearman(a, b) - (1 - 6 * d2 / (n * (n * n - 1)))) <= tol

    for _ in range(1000):
        n = int(rng.integers(1, 13))
        leaked = [bool(rng.integers(0, 2)) for _ in range(n)]
        verdicts = [make_verdict(i + 1, leaked[i]) for i in range(n)]
        assert abs(float(olr(verdicts)) - sum(leaked) / n) <= tol

    for _ in range(1000):
        n = int(rng.integers(1, 13))
        phis = [float(rng.uniform(0.1, 1.0)) * (1 if rng.integers(0, 2) else -1)
                for _ in range(n)]
        leaked = [bool(rng.integers(0, 2)) for _ in range(n)]
        estimates = [make_estimate(i + 1, phis[i]) for i in range(n)]
        verdicts = [make_verdict(i + 1, leaked[i]) for i in range(n)]
        expected = (
            sum(abs(phis[i]) * leaked[i] for i in range(n))
            / sum(abs(x) for x in phis)
        )
        assert abs(float(shapley_dclr(estimates, verdicts)) - expected) <= tol

    for _ in range(1000):
        n = int(rng.integers(1, 13))
        # distinct magnitudes keep the ordering unambiguous for the oracle
        mags = rng.permutation(n) + 1
        phis = [float(mags[i]) * (1 if rng.integers(0, 2) else -1) for i in range(n)]
        leaked = [bool(rng.integers(0, 2)) for _ in range(n)]
        k = int(rng.integers(1, n + 1))
        estimates = [make_estimate(i + 1, phis[i]) for i in range(n)]
        verdicts = [make_verdict(i + 1, leaked[i]) for i in range(n)]
        order = sorted(range(n), key=lambda i: (-abs(phis[i]), i + 1))[:k]
        expected = sum(leaked[i] for i in order) / k
        assert abs(float(topk_leakage(estimates, verdicts, k)) - expected) <= tol

    for _ in range(1000):
        n = int(rng.integers(1, 11))
        orig = [float(rng.uniform(0.5, 30.0)) for _ in range(n)]
        rep = [float(rng.uniform(0.0, 35.0)) for _ in range(n)]
        expected = sum(abs(orig[i] - rep[i]) / abs(orig[i]) for i in range(n)) / n
        assert abs(mre(orig, rep) - expected) <= tol

    for _ in range(1000):
        n = int(rng.integers(2, 11))
        a = [int(x) for x in rng.permutation(n) + 1]
        b = [int(x) for x in rng.permutation(n) + 1]
        discordant = sum(
            1
            for i in range(n)
            for j in range(i + 1, n)
            if np.sign(a[i] - a[j]) != np.sign(b[i] - b[j])
        )
        expected = discordant / (n * (n - 1) / 2)
        assert abs(kendall_relative(a, b) - expected) <= tol

    # worked salary example: 21.0M predicted vs 21.25M actual
    assert abs(relative_error(21.0e6, 21.25e6) - 0.0118) <= 0.001
    # trade-off plot axes: 1-BS, 1-RE, rank correlation as-is
    assert transform_performance(TaskType.CLASSIFICATION, 0.22) == pytest.approx(0.78)
    assert transform_performance(TaskType.REGRESSION, 0.05) == pytest.approx(0.95)
    assert transform_performance(TaskType.RANKING, 0.543) == pytest.approx(0.543)


def test_c04_search_calls_equal_needs_search_claim_count():
    """On 100 mixed claims, exactly one search per A1-A3 claim, none else."""
    categories = (
        ["A1"] * 15 + ["A2"] * 15 + ["A3"] * 12
        + ["A4"] * 10 + ["A5"] * 10 + ["B1"] * 19 + ["B2"] * 19
    )
    rng = np.random.default_rng(4)
    rng.shuffle(categories)
    claims = [
        make_claim(i + 1, category=cat, text=f"Mixed fixture claim number {i + 1}.")
        for i, cat in enumerate(categories)
    ]
    needs_search = sum(1 for c in categories if c in ("A1", "A2", "A3"))
    assert needs_search == 42

    llm = ScriptedLM([
        query_script([f"when did event {i} occur" for i in range(needs_search)]),
        date_script([("2018-12-01", "high")] * needs_search),
    ])
    search = CountingSearchClient(StaticSearchClient({}, default=[result("2018-12-01")]))
    verdicts = detect_leakage(claims, make_ctx(), search, llm, cache=NamespacedCache())

    assert search.num_calls == needs_search
    assert llm.num_calls == 2
    by_id = {v.claim_id: v for v in verdicts}
    for claim, cat in zip(claims, categories):
        verdict = by_id[claim.claim_id]
        if cat in ("A4", "A5"):
            assert verdict.leaked is True
        elif cat in ("B1", "B2"):
            assert verdict.leaked is False
        else:  # dated 2018-12-01, before the 2019-01-15 reference
            assert verdict.leaked is False


def test_c05_period_references_resolve_to_period_end():
    """Frozen table bit-exact plus 500 generated period references."""
    table = {
        "2023": date(2023, 12, 31),
        "Q3 2023": date(2023, 9, 30),
        "March 2023": date(2023, 3, 31),
    }
    for raw, expected in table.items():
        assert parse_temporal_reference(raw).resolved_date == expected

    rng = np.random.default_rng(5)
    for _ in range(500):
        year = int(rng.integers(1990, 2031))
        form = int(rng.integers(0, 3))
        if form == 0:
            month = int(rng.integers(1, 13))
            raw = f"{calendar.month_name[month]} {year}"
            expected = date(year, month, calendar.monthrange(year, month)[1])
            granularity = "month"
        elif form == 1:
            q = int(rng.integers(1, 5))
            raw = f"Q{q} {year}"
            month = 3 * q
            expected = date(year, month, calendar.monthrange(year, month)[1])
            granularity = "quarter"
        else:
            raw = str(year)
            expected = date(year, 12, 31)
            granularity = "year"
        ref = parse_temporal_reference(raw)
        assert ref.resolved_date == expected
        assert ref.granularity == granularity


def test_c06_leakage_boundary_is_strict():
    """Determination at t_ref-1d, t_ref, t_ref+1d -> leaked 0, 0, 1."""
    ctx = make_ctx()  # reference date 2019-01-15
    t_ref = ctx.reference_date
    days = [t_ref - timedelta(days=1), t_ref, t_ref + timedelta(days=1)]
    claims = [make_claim(i + 1, category="A1") for i in range(3)]
    llm = ScriptedLM([
        query_script([f"boundary query {i}" for i in range(3)]),
        date_script([(d.isoformat(), "high") for d in days]),
    ])
    search = StaticSearchClient({}, default=[result("2019-01-10")])
    verdicts = detect_leakage(claims, ctx, search, llm, cache=NamespacedCache())
    by_id = {v.claim_id: v for v in verdicts}
    assert [by_id[i].leaked for i in (1, 2, 3)] == [False, False, True]
    assert all(by_id[i].basis == "date_comparison" for i in (1, 2, 3))


def test_c07_timespec_state_machine_and_closed_world(instances, mock_backends):
    """Clean draft, one-regeneration, and persistent-violation paths."""
    llm, search = mock_backends

    clean = instance_by_id(instances, "salary-003")
    _, clean_trace = run_timespec(clean, llm, search, cache=NamespacedCache())
    assert clean_trace.regenerations == 0
    assert clean_trace.violated_1 == ()
    assert clean_trace.regenerated is None

    leaky = instance_by_id(instances, "legal-001")
    _, leaky_trace = run_timespec(leaky, llm, search, cache=NamespacedCache())
    assert leaky_trace.regenerations == 1
    assert len(leaky_trace.violated_1) >= 1
    assert leaky_trace.regenerated is not None  # second generation cycle ran
    assert leaky_trace.persistent_violations == ()

    persistent = instance_by_id(instances, "legal-003")
    _, persistent_trace = run_timespec(persistent, llm, search, cache=NamespacedCache())
    assert persistent_trace.regenerations == 1
    assert len(persistent_trace.persistent_violations) == 1

    for trace in (clean_trace, leaky_trace, persistent_trace):
        violated = tuple(trace.violated_1) + tuple(trace.violated_2)
        assert trace.aggregator_prompt
        for claim in violated:
            assert claim.claim_text not in trace.aggregator_prompt


def test_c08_batching_exactly_two_calls_and_dedupe():
    """300 coalitions at batch_size 256 -> 2 calls; duplicates collapse."""
    ids = list(range(1, 26))
    claims = claims_for(ids)
    # binary encoding of 1..300 gives 300 distinct non-empty coalitions
    coalitions = [
        Coalition.of([ids[bit] for bit in range(25) if k >> bit & 1])
        for k in range(1, 301)
    ]
    llm = SetCountingLM()
    values = batched_coalition_eval(
        claims, coalitions, make_ctx(), llm, SamplerConfig(batch_size=256)
    )
    assert llm.num_calls == 2
    assert all(values[c] == float(len(c)) for c in coalitions)

    repeated = [Coalition.of([1, 2]), Coalition.of([3])] * 15
    dedupe_llm = SetCountingLM()
    cache: dict = {}
    batched_coalition_eval(
        claims, repeated, make_ctx(), dedupe_llm,
        SamplerConfig(batch_size=256), cache=cache,
    )
    assert dedupe_llm.num_calls == 1
    assert len(re.findall(r"^SET \d+:", dedupe_llm.users[0], re.MULTILINE)) == 2
    # a warm cache answers repeats without any further model calls
    batched_coalition_eval(
        claims, repeated, make_ctx(), dedupe_llm,
        SamplerConfig(batch_size=256), cache=cache,
    )
    assert dedupe_llm.num_calls == 1


def test_c09_degenerate_inputs_yield_flagged_finite_metrics():
    """Documented fallbacks: flagged, finite, never raising."""
    # empty rationale refuses extraction; an empty claim set still audits
    llm = ScriptedLM([("RATIONALE TO ANALYZE", {"claims": []})])
    with pytest.raises(EmptyRationale):
        from timeaudit.claims.extraction import extract_claims

        extract_claims("   ", make_ctx(), llm)
    empty_audit = audit_instance("empty", [], [], [], top_ks=(1, 3, 5))
    assert float(empty_audit.olr) == 0.0
    assert "empty_claim_set" in empty_audit.flags

    # all-zero influence falls back to the unweighted rate
    estimates = [make_estimate(i, 0.0) for i in (1, 2, 3)]
    verdicts = [make_verdict(1, True), make_verdict(2, False), make_verdict(3, True)]
    degenerate = shapley_dclr(estimates, verdicts)
    assert degenerate.flags == ("degenerate_weights",)
    assert float(degenerate) == pytest.approx(2 / 3)

    # a single claim truncates top-k instead of erroring
    single = topk_leakage([make_estimate(1, 0.4)], [make_verdict(1, True)], 5)
    assert float(single) == 1.0

    # ties break deterministically and are flagged
    tied = topk_leakage(
        [make_estimate(1, 0.4), make_estimate(2, -0.4)],
        [make_verdict(1, True), make_verdict(2, False)],
        1,
    )
    assert tied.flags == ("topk_tiebreak",)
    assert float(tied) == 1.0

    for value in (float(empty_audit.olr), float(degenerate), float(single), float(tied)):
        assert np.isfinite(value)


def test_c10_end_to_end_mock_run_ordering_under_60s(tmp_path):
    """Full offline evaluate over 9 instances; leakier baselines rank worse."""
    datasets = []
    for name in ("legal.jsonl", "salary.jsonl", "stock.jsonl"):
        datasets += ["--dataset", str(FIXTURES_DIR / name)]
    out = tmp_path / "run"
    started = time.perf_counter()
    result_ = CliRunner().invoke(
        main, ["evaluate", "--mock", *datasets, "--out", str(out)],
        catch_exceptions=False,
    )
    elapsed = time.perf_counter() - started
    assert result_.exit_code == 0, result_.output
    assert elapsed < 60.0
    assert len(list((out / "audits").glob("*.json"))) == 27

    report = json.loads((out / "report.json").read_text())
    assert {group["task_label"] for group in report} == {"legal", "salary", "stock"}
    for group in report:
        dclr = {row["agent"]: row["mean_dclr"] for row in group["rows"]}
        assert dclr["superforecast"] >= dclr["temporal-hint"] >= dclr["timespec"]
        assert dclr["superforecast"] > dclr["timespec"]


def test_c11_faithfulness_arithmetic_is_exact():
    """Identity -> zero gaps; 1%-off salary -> 0.01; one swap of 5 -> 0.1."""
    repredict = "# REPREDICTION TASK"

    legal = make_instance()
    same = Prediction(
        TaskType.CLASSIFICATION, 0.7,
        "The precedent favors petitioners.\nI predict 70% probability.",
    )
    llm = ScriptedLM([(repredict, ("submit_reprediction", {"prediction": 0.7}))])
    identical = audit_faithfulness(legal, same, llm, agent="baseline")
    assert identical.gap == 0.0

    salary = make_instance(TaskType.REGRESSION)
    offer = Prediction(
        TaskType.REGRESSION, 10_000_000.0,
        "Veteran guards at this level cleared eight figures.\n"
        "I predict a $10,000,000 average salary.",
    )
    llm = ScriptedLM([(repredict, ("submit_reprediction", {"prediction": 10_100_000.0}))])
    one_percent = audit_faithfulness(salary, offer, llm, agent="baseline")
    assert one_percent.gap == 0.01

    tickers = ["T1", "T2", "T3", "T4", "T5"]
    stock = make_instance(
        TaskType.RANKING,
        instance_id="stock-t5",
        input_payload={"instance_id": "stock-t5", "tickers": tickers,
                       "horizon": "next quarter"},
        ground_truth={"ranking": tickers},
    )
    ordered = Prediction(
        TaskType.RANKING, tuple(tickers),
        "Alpha had the strongest quarter on fundamentals.\n"
        "T1 > T2 > T3 > T4 > T5.",
    )
    swapped = ["T2", "T1", "T3", "T4", "T5"]
    llm = ScriptedLM([(repredict, ("submit_reprediction", {"prediction": swapped}))])
    one_swap = audit_faithfulness(stock, ordered, llm, agent="baseline")
    assert one_swap.gap == 0.1  # 1 discordant pair / C(5,2)

    llm = ScriptedLM([(repredict, ("submit_reprediction", {"prediction": tickers}))])
    rank_identical = audit_faithfulness(stock, ordered, llm, agent="baseline")
    assert rank_identical.gap == 0.0

    summary = summarize_gaps([identical, rank_identical])
    assert summary["overall"] == 0.0
