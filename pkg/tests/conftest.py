from __future__ import annotations

import pathlib

import pytest

DATA = pathlib.Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def solution_trace_text() -> str:
    """Reference solution-only trace for 18:[74, 24, 36, 44] (no trailing
    newline; the file keeps one for editor hygiene)."""
    return DATA.joinpath("solution_trace_example.txt").read_text().rstrip("\n")


@pytest.fixture(scope="session")
def search_trace_text() -> str:
    """Reference search-stream trace for the same problem (breadth-5 shape,
    30 generated nodes)."""
    return DATA.joinpath("search_trace_example.txt").read_text().rstrip("\n")
