"""Chat model interface plus a deterministic scripted mock.

The mock replays a recorded script of (pattern -> response) entries; the
first matching entry wins, and an unmatched prompt gets a fixed refusal.
This keeps every agent test reproducible without a live model.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Optional, Protocol, Sequence

DEFAULT_REFUSAL = "I cannot answer that from the available sources."


class LlmClient(Protocol):
    def complete(self, prompt: str, stop: Optional[Sequence[str]] = None) -> str: ...


@dataclass
class ScriptEntry:
    match: str
    response: str
    is_regex: bool = False
    once: bool = False
    used: bool = field(default=False, compare=False)

    def matches(self, prompt: str) -> bool:
        if self.once and self.used:
            return False
        if self.is_regex:
            return re.search(self.match, prompt, re.DOTALL) is not None
        return self.match in prompt


class MockLlmClient:
    def __init__(self, entries: Sequence[ScriptEntry] = (), refusal: str = DEFAULT_REFUSAL):
        self.entries = list(entries)
        self.refusal = refusal
        self.calls: list[str] = []

    def add(self, match: str, response: str, is_regex: bool = False, once: bool = False):
        self.entries.append(ScriptEntry(match, response, is_regex=is_regex, once=once))
        return self

    def complete(self, prompt: str, stop: Optional[Sequence[str]] = None) -> str:
        self.calls.append(prompt)
        for entry in self.entries:
            if entry.matches(prompt):
                entry.used = True
                return _apply_stop(entry.response, stop)
        return _apply_stop(self.refusal, stop)


def _apply_stop(text: str, stop: Optional[Sequence[str]]) -> str:
    if not stop:
        return text
    cut = len(text)
    for marker in stop:
        idx = text.find(marker)
        if idx != -1:
            cut = min(cut, idx)
    return text[:cut]


def load_mock_script(path, refusal: str = DEFAULT_REFUSAL) -> MockLlmClient:
    """Line-delimited JSON of {match, response, is_regex?, once?}."""
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            entries.append(
                ScriptEntry(
                    match=d["match"],
                    response=d["response"],
                    is_regex=d.get("is_regex", False),
                    once=d.get("once", False),
                )
            )
    return MockLlmClient(entries, refusal=refusal)

