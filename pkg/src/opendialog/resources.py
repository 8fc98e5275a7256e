"""Loading of bundled resource files (lexicons, rule files, content packs)."""

from __future__ import annotations

import json
from pathlib import Path

from opendialog.errors import LoadError

_PACKAGE_DATA = Path(__file__).parent / "data"


def default_data_dir() -> Path:
    """Directory holding the bundled lexicons, packs, graph and flows."""
    return _PACKAGE_DATA


def load_wordlist(path: Path) -> set[str]:
    """One lowercased word (or phrase) per line; blank lines and # comments skipped."""
    words: set[str] = set()
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip().lower()
        if line and not line.startswith("#"):
            words.add(line)
    return words


def load_sentiment_lexicon(path: Path) -> dict[str, float]:
    """word<TAB>score lines; scores must sit in [-1, 1]."""
    scores: dict[str, float] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            word, raw = line.split("\t")
            score = float(raw)
        except ValueError as exc:
            raise LoadError(f"{path.name}:{lineno}: expected 'word<TAB>score'") from exc
        if not -1.0 <= score <= 1.0:
            raise LoadError(f"{path.name}:{lineno}: score {score} outside [-1, 1]")
        scores[word.lower()] = score
    return scores


def load_json(path: Path):
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise LoadError(f"{path}: invalid JSON: {exc}") from exc


def iter_jsonl(path: Path):
    """Yield (lineno, record) pairs from a JSON-lines file, skipping blanks."""
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            yield lineno, json.loads(line)
        except json.JSONDecodeError as exc:
            raise LoadError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
