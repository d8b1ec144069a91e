"""Shared fixtures: the bundled dataset and fresh mock backends."""
from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from timeaudit.harness.dataset import load_datasets
from timeaudit.harness.mocks import MockPlaybook, build_mock_backends

FIXTURES_DIR = Path(__file__).parent.parent / "fixtures"
FIXTURE_FILES = ("legal.jsonl", "salary.jsonl", "stock.jsonl")


@pytest.fixture(scope="session")
def fixture_paths() -> list[Path]:
    return [FIXTURES_DIR / name for name in FIXTURE_FILES]


@pytest.fixture(scope="session")
def instances(fixture_paths):
    return load_datasets(fixture_paths)


@pytest.fixture()
def mock_backends(instances):
    """Fresh DeskLM + fixture search pair (call counters start at zero)."""
    return build_mock_backends(instances)


@pytest.fixture()
def playbook(instances) -> MockPlaybook:
    return MockPlaybook.from_instances(instances)


def instance_by_id(instances, instance_id: str):
    matches = [i for i in instances if i.instance_id == instance_id]
    assert len(matches) == 1, f"unknown instance {instance_id}"
    return matches[0]
