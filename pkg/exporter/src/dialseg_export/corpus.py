"""Minimal reader for the canonical dialogue corpus format.

Deliberately self-contained: this package talks to the segmentation core
only through files, so it carries its own copy of the format contract.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class CorpusError(Exception):
    pass


@dataclass(frozen=True)
class Dialogue:
    id: str
    utterances: tuple[str, ...]


def load_corpus(path: str | Path) -> list[Dialogue]:
    """Load ``{"id", "utterances", ...}`` JSON lines; ids must be unique."""
    path = Path(path)
    out: list[Dialogue] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                did = str(obj["id"])
                utterances = tuple(str(u) for u in obj["utterances"])
            except (ValueError, KeyError, TypeError) as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from exc
            if not utterances or any(not u.strip() for u in utterances):
                raise CorpusError(f"{path}:{lineno}: dialogue {did!r} has blank utterances")
            if did in seen:
                raise CorpusError(f"{path}:{lineno}: duplicate dialogue id {did!r}")
            seen.add(did)
            out.append(Dialogue(id=did, utterances=utterances))
    return out
