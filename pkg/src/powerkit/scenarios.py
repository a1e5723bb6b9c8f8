"""Scenario corpus: line-delimited JSON records pairing a prose study
description with its structured descriptor, the expected test, and the
expected solver output.

Format (one JSON object per line, blank lines and #-comments allowed):

    {"id": "s1", "prose": "...", "descriptor": {...}, "expected_test": "...",
     "params": {...}, "alpha": 0.05, "power": 0.8,
     "expected": {"n_per_arm": [..], "n_total": .., "events_required": ..?}}

The bundled corpus is a reconstruction covering the eight-test battery; its
expected values were computed with this engine and cross-checked against
independent references before being frozen.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources as importlib_resources

from .selector import StudyDescriptor

REQUIRED_KEYS = ("id", "prose", "descriptor", "expected_test", "params",
                 "power", "expected")


class CorpusError(ValueError):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


@dataclass(frozen=True)
class ScenarioRecord:
    id: str
    prose: str
    descriptor: StudyDescriptor
    expected_test: str
    params: dict
    power: float
    expected: dict
    alpha: float = 0.05

    @staticmethod
    def from_json(raw: dict, line: int) -> "ScenarioRecord":
        missing = [k for k in REQUIRED_KEYS if k not in raw]
        if missing:
            raise CorpusError(f"missing keys {missing}", line)
        try:
            descriptor = StudyDescriptor(**raw["descriptor"])
        except (TypeError, ValueError) as exc:
            raise CorpusError(f"bad descriptor: {exc}", line) from None
        return ScenarioRecord(
            id=str(raw["id"]), prose=raw["prose"], descriptor=descriptor,
            expected_test=raw["expected_test"], params=raw["params"],
            power=float(raw["power"]), expected=raw["expected"],
            alpha=float(raw.get("alpha", 0.05)))


def parse_corpus(text: str) -> list[ScenarioRecord]:
    records = []
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            raw = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"invalid JSON ({exc.msg})", lineno) from None
        if not isinstance(raw, dict):
            raise CorpusError("record must be a JSON object", lineno)
        records.append(ScenarioRecord.from_json(raw, lineno))
    if not records:
        raise CorpusError("corpus is empty", 1)
    return records


def load_corpus(path: str | None = None) -> list[ScenarioRecord]:
    """Load the corpus from a path, or the bundled one when path is None."""
    if path is None:
        text = (importlib_resources.files("powerkit") / "data" / "scenarios.ndjson"
                ).read_text(encoding="utf-8")
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    return parse_corpus(text)
