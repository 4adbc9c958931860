from __future__ import annotations

import pytest

from schedgraph import parse_instance
from support import INSTANCE_DIR


def load_instance(name: str):
    return parse_instance((INSTANCE_DIR / name).read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def anomaly():
    """Task set whose worst case passes but another scenario misses (EDF)."""
    return load_instance("anomaly.txt")


@pytest.fixture(scope="session")
def jitter3():
    """Three-task EDF example with one jittery task; schedulable."""
    return load_instance("edf_jitter.txt")


@pytest.fixture(scope="session")
def idle4():
    """Four-task precautious example: schedulable only with multiple eligibility."""
    return load_instance("precautious_idle.txt")
