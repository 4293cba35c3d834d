"""Rule-based named entity recognition.

A gazetteer (surface form -> label) plus a capitalized-span heuristic with
suffix cues stands in for a learned NER model; results are deterministic.
"""
from __future__ import annotations

import json
import re
from typing import Protocol

from ..corpus import NER_LABELS

_ORG_SUFFIXES = (
    "university",
    "laboratory",
    "institute",
    "corporation",
    "inc",
    "ltd",
    "agency",
    "foundation",
)


class EntityRecognizer(Protocol):
    def entities(self, text: str) -> list[tuple[str, str]]: ...


class GazetteerRecognizer:
    """Longest-first gazetteer matching, optional capitalized-span heuristic."""

    def __init__(self, gazetteer: dict[str, str] | None = None, use_heuristic: bool = False):
        self.gazetteer = {}
        for surface, label in (gazetteer or {}).items():
            if label not in NER_LABELS:
                raise ValueError(f"unknown ner label {label!r} for {surface!r}")
            self.gazetteer[surface.lower()] = label
        self.use_heuristic = use_heuristic
        self._pattern = None
        if self.gazetteer:
            ordered = sorted(self.gazetteer, key=len, reverse=True)
            self._pattern = re.compile(
                r"\b(?:" + "|".join(re.escape(s) for s in ordered) + r")\b",
                re.IGNORECASE,
            )

    @classmethod
    def from_file(cls, path, use_heuristic: bool = False) -> "GazetteerRecognizer":
        """Load a {"surface": "label", ...} JSON mapping."""
        with open(path, "r", encoding="utf-8") as fh:
            return cls(json.load(fh), use_heuristic=use_heuristic)

    def entities(self, text: str) -> list[tuple[str, str]]:
        found: list[tuple[str, str]] = []
        seen: set[tuple[str, str]] = set()
        spans: list[tuple[int, int]] = []
        if self._pattern:
            for match in self._pattern.finditer(text):
                surface = match.group(0)
                label = self.gazetteer[surface.lower()]
                entry = (label, surface)
                if entry not in seen:
                    seen.add(entry)
                    found.append(entry)
                spans.append(match.span())
        if self.use_heuristic:
            for match in re.finditer(r"(?:[A-Z][a-z]+)(?:\s+[A-Z][a-z]+)+", text):
                if any(s <= match.start() < e for s, e in spans):
                    continue
                surface = match.group(0)
                last = surface.split()[-1].lower()
                label = "organization" if last in _ORG_SUFFIXES else "person"
                entry = (label, surface)
                if entry not in seen:
                    seen.add(entry)
                    found.append(entry)
        return found
