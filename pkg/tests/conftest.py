from __future__ import annotations

import json
from pathlib import Path as FsPath

import pytest

from pathmetrics.hierarchy import HierarchyTree
from pathmetrics.model import Path, PathRecord, PathSet, WeightScheme, build_routing_matrix

DATA = FsPath(__file__).parent / "data"

# Lincroft/Basking Ridge routes with observation counts.
NJ_ROUTES = [
    (("Lin", "B", "C", "F", "H", "I", "BR"), 552),
    (("Lin", "B", "D", "F", "H", "I", "BR"), 1336),
    (("BR", "I", "G", "E", "C", "A", "Lin"), 1889),
]

# Table row order and the similarity-to-Lin-B column, as printed.
NJ_TABLE = [
    ("Lin", "B", 1.0), ("B", "C", 0.29), ("C", "F", 0.29), ("F", "H", 1.0),
    ("H", "I", 1.0), ("I", "BR", 1.0), ("B", "D", 0.71), ("D", "F", 0.71),
    ("BR", "I", 0.0), ("I", "G", 0.0), ("G", "E", 0.0), ("E", "C", 0.0),
    ("C", "A", 0.0), ("A", "Lin", 0.0),
]


def pathset(routes) -> PathSet:
    return PathSet(PathRecord(Path.from_nodes(list(nodes)), freq) for nodes, freq in routes)


@pytest.fixture
def nj_paths() -> PathSet:
    return pathset(NJ_ROUTES)


@pytest.fixture
def nj_matrix(nj_paths):
    return build_routing_matrix(nj_paths, WeightScheme.frequency())


@pytest.fixture
def regional_tree() -> HierarchyTree:
    return HierarchyTree.from_dict(json.loads((DATA / "regional_tree.json").read_text()))


_acceptance: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))
    elif report.when == "setup" and report.outcome != "passed" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{mark}  {name}")
