# tests/conftest.py
"""Shared fixtures: formats, semantics, a seeded generator and the corpus."""

import sys
from pathlib import Path

import numpy as np
import pytest

from models.numerics import FloatFormat
from models.semantics import Semantics
from models.wp import raise_recursion_limit

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


@pytest.fixture(scope="session", autouse=True)
def recursion_limit():
    previous = raise_recursion_limit()
    yield
    sys.setrecursionlimit(previous)


@pytest.fixture
def tiny() -> FloatFormat:
    """p=3, exponents -1..1: 25 values, largest 3.5."""
    return FloatFormat.tiny(3, -1, 1)


@pytest.fixture
def real() -> Semantics:
    return Semantics()


@pytest.fixture
def tiny_semantics(tiny) -> Semantics:
    return Semantics(tiny)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def corpus() -> Path:
    return CORPUS
