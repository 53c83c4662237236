"""Bundled example datasets.

Ships the drill feed-rate selection model: 10 axial-force states with 5
feed-rate actions each, rewards in units of 0.01 mm of drilled hole length,
plus the reference value/decision tables for its 10-stage horizon.
"""

from __future__ import annotations

from importlib import resources

from .formats import ExpectedResults, load_expected_results, load_model
from .model import FiniteHorizonMdp

DRILLING = "drilling"

_FILES = {
    DRILLING: {"model": "drilling.json", "expected": "drilling_expected.json"},
}


def available_datasets() -> tuple[str, ...]:
    return tuple(sorted(_FILES))


def dataset_text(name: str, kind: str = "model") -> str:
    """Raw text of a bundled dataset file; ``kind`` is "model" or "expected"."""
    try:
        files = _FILES[name]
    except KeyError:
        raise KeyError(
            f"unknown dataset {name!r}; available: {', '.join(available_datasets())}"
        ) from None
    try:
        filename = files[kind]
    except KeyError:
        raise KeyError(f"dataset {name!r} has no {kind!r} file") from None
    return resources.files("fhmdp").joinpath("data").joinpath(filename).read_text("utf-8")


def load_drilling_model() -> FiniteHorizonMdp:
    """The bundled drilling model, validated."""
    return load_model(dataset_text(DRILLING, "model"))


def load_drilling_expected_results() -> ExpectedResults:
    """Reference tables for the drilling model over its 10-stage horizon."""
    return load_expected_results(dataset_text(DRILLING, "expected"))
