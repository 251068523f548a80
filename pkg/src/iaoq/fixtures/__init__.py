"""Committed data fixtures: H2 bundle grids and the ammonia 2-qubit
Hamiltonians, regenerated by tools/make_fixtures.py."""

import os


def fixture_path(*parts: str) -> str:
    return os.path.join(os.path.dirname(__file__), *parts)
