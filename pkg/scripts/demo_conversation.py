#!/usr/bin/env python3
"""Run a short showcase conversation and print the winning candidates.

Usage: python scripts/demo_conversation.py [seed]
"""

from __future__ import annotations

import sys

from opendialog.engine import Engine

SCRIPT = [
    "hello",
    "we are planning to go to paris",
    "i am going to see the eiffel tower",
    "i don't know",
    "tell me a story",
    "yes",
    "what kind of pet is it?",
    "do you like watchmen",
    "why do you like watchmen",
    "would you rather questions please",
    "okay",
    "nonfiction",
    "can we stop talking right now",
]


def main() -> int:
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 7
    engine = Engine()
    session = engine.create_session(seed=seed)
    for text in SCRIPT:
        result = engine.handle_turn(session, text=text)
        winner = next(c for c in result.debug["pool"]
                      if c["id"] == result.debug["winner_id"])
        print(f"you> {text}")
        print(f"bot> {result.reply.display_text}")
        print(f"     [{winner['source_module']}  conf={winner['final_confidence']:.2f}"
              f"  relation={result.debug['discourse_relation']}]")
        if result.ended:
            break
    return 0


if __name__ == "__main__":
    sys.exit(main())
