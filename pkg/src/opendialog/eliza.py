"""Pattern-reflection probe used by question answering on low-content turns."""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from pathlib import Path

from opendialog.errors import LoadError
from opendialog.resources import load_json

# Swaps applied to captured text so it reads naturally from the agent's side.
REFLECTIONS = {
    "i": "you", "me": "you", "my": "your", "mine": "yours", "myself": "yourself",
    "you": "i", "your": "my", "yours": "mine", "yourself": "myself",
    "am": "are", "was": "were", "i'm": "you're", "i'd": "you'd", "i've": "you've",
    "i'll": "you'll", "you're": "i'm", "you've": "i've", "you'll": "i'll",
}


def reflect(fragment: str) -> str:
    words = fragment.lower().split()
    return " ".join(REFLECTIONS.get(w, w) for w in words)


@dataclass(frozen=True)
class ElizaRule:
    pattern: re.Pattern
    responses: tuple[str, ...]


class Eliza:
    """Ordered reflection rules; first matching pattern supplies the probe."""

    def __init__(self, rules: list[ElizaRule], fallbacks: tuple[str, ...]):
        self.rules = rules
        self.fallbacks = fallbacks

    @classmethod
    def from_file(cls, path: Path) -> "Eliza":
        raw = load_json(path)
        rules = []
        for record in raw.get("rules", []):
            try:
                rules.append(ElizaRule(re.compile(record["pattern"], re.IGNORECASE),
                                       tuple(record["responses"])))
            except (KeyError, re.error) as exc:
                raise LoadError(f"{path.name}: bad rule {record!r}: {exc}") from exc
        fallbacks = tuple(raw.get("fallbacks", ["Could you tell me a little more?"]))
        return cls(rules, fallbacks)

    def probe(self, text: str, rng: random.Random) -> str:
        cleaned = text.strip().rstrip(".?!")
        for rule in self.rules:
            match = rule.pattern.search(cleaned)
            if match:
                template = rng.choice(rule.responses)
                groups = [reflect(g or "") for g in match.groups()]
                return template.format(*groups)
        return rng.choice(self.fallbacks)
