#!/usr/bin/env python3
"""Regenerate the bundled topic flow files.

Every topic gets the shared skeleton (affirmation branch, trivia subroot
delegating to the recursive module, preference subroot, decline exit); the
nutrition flow instead walks the bundled argument graph. Output is stable,
so rerunning the script produces no diff unless the templates change.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

OUT_DIR = Path(__file__).resolve().parent.parent / "src" / "opendialog" / "data" / "flows"

TOPICS: dict[str, list[str]] = {
    "music": ["music", "songs", "bands"],
    "technology": ["technology", "tech", "gadgets", "computers"],
    "news headlines": ["news", "headlines", "current events"],
    "box office": ["box office", "new movies", "movie releases"],
    "sports": ["sports", "football", "basketball", "soccer"],
    "fashion": ["fashion", "clothes", "style"],
    "shopping": ["shopping", "shop", "buying"],
    "travel": ["travel", "traveling", "vacation", "trip"],
    "nutrition": ["nutrition", "diet", "healthy eating"],
    "health": ["health", "fitness", "exercise"],
    "favorite food": ["food", "pizza", "favorite food", "cooking", "eat"],
    "recipe": ["recipe", "recipes", "baking"],
    "gossip": ["gossip", "celebrities", "celebrity"],
    "tv": ["tv", "television", "tv shows", "series"],
    "fun facts": ["fun facts", "fun fact"],
    "trivia": ["trivia"],
    "hobbies": ["hobbies", "hobby", "pastime"],
    "holidays": ["holidays", "holiday", "christmas", "halloween"],
    "astronomy": ["astronomy", "space", "planets", "stars"],
    "animals": ["animals", "animal", "pets", "wildlife"],
    "history": ["history", "historical"],
    "board games": ["board games", "board game", "chess", "monopoly"],
    "books": ["books", "book", "reading", "novels"],
    "language": ["language", "languages", "words", "grammar"],
    "famous quotes": ["famous quotes", "quotes", "quote"],
    "poems": ["poems", "poetry", "poem"],
    "weather": ["weather", "forecast", "rain", "snow"],
    "horoscope": ["horoscope", "zodiac", "astrology"],
    "harry potter": ["harry potter", "hogwarts", "wizarding world"],
    "star wars": ["star wars", "jedi", "skywalker"],
    "star trek": ["star trek", "starfleet", "enterprise"],
    "monsters": ["monsters", "monster", "bigfoot", "loch ness"],
    "marvel cinematic universe": ["marvel", "avengers", "marvel cinematic universe"],
    "pokemon": ["pokemon", "pikachu"],
    "cartoons": ["cartoons", "cartoon", "animation"],
    "fictional characters": ["fictional characters", "fictional character"],
    "tolkien": ["tolkien", "hobbit", "middle earth", "lord of the rings"],
    "science fiction": ["science fiction", "sci fi", "scifi"],
    "comic books": ["comic books", "comics", "comic"],
    "pirates": ["pirates", "pirate"],
    "video games": ["video games", "video game", "gaming", "gamer"],
    "dinosaurs": ["dinosaurs", "dinosaur", "t rex", "fossils"],
}

STARTERS = [
    "{cap} is one of my favorite subjects. Are you into {topic}?",
    "You know, I collect odd facts about {topic}. Should we dig into {topic} for a bit?",
    "I could talk about {topic} all day. Want to?",
]


def slugify(topic: str) -> str:
    return topic.replace(" ", "_")


def generic_flow(topic: str, triggers: list[str]) -> dict:
    slug = slugify(topic)
    starter = STARTERS[sum(ord(c) for c in slug) % len(STARTERS)].format(
        topic=topic, cap=topic.capitalize())
    n = lambda name: f"{slug}_{name}"
    return {
        "id": slug,
        "topic": topic,
        "triggers": triggers,
        "starter": starter,
        "entry_expects": [n("yes"), n("trivia"), n("pref"), n("no")],
        "subroots": [n("trivia"), n("pref")],
        "nodes": {
            n("yes"): {
                "preconditions": [{"kind": "intent", "value": "affirm"}],
                "action": {"type": "template",
                           "text": f"Great. What do you like most about {topic}?"},
                "postconditions": [{"type": "set_state_var",
                                    "name": f"{slug}_engaged", "value": True}],
                "expects": [n("trivia"), n("no"), n("share")],
            },
            n("trivia"): {
                "preconditions": [{"kind": "keyword", "value": ["trivia", "fact", "facts"]}],
                "action": {"type": "delegate", "module": "recursive",
                           "payload": {"topic": topic}},
                "postconditions": [],
                "expects": [],
            },
            n("pref"): {
                "preconditions": [{"kind": "keyword",
                                   "value": ["favorite", "favourite", "best"]}],
                "action": {"type": "template",
                           "text": f"Tough call, my tastes change by the hour. "
                                   f"What's your favorite thing about {topic}?"},
                "postconditions": [],
                "expects": [n("no"), n("share")],
            },
            n("no"): {
                "preconditions": [{"kind": "intent", "value": "deny"}],
                "action": {"type": "exit",
                           "text": "No problem, we can talk about something else. "
                                   "What would you like?"},
                "postconditions": [],
                "expects": [],
            },
            n("trivia_yes"): {
                "preconditions": [{"kind": "intent", "value": "affirm"}],
                "action": {"type": "delegate", "module": "recursive",
                           "payload": {"topic": topic}},
                "postconditions": [],
                "expects": [],
            },
            n("share"): {
                "preconditions": [{"kind": "function_ref", "value": "is_declarative"}],
                "action": {"type": "template",
                           "text": f"That makes sense to me. "
                                   f"Want a couple of {topic} facts?"},
                "postconditions": [],
                "expects": [n("trivia_yes"), n("trivia"), n("no")],
            },
        },
    }


def travel_flow() -> dict:
    """Deeper flow: named-entity turns hand off to the graph-walk recommender."""
    return {
        "id": "travel",
        "topic": "travel",
        "triggers": TOPICS["travel"],
        "starter": "I love hearing about travel. Are you planning any trips?",
        "entry_expects": ["tr_yes", "tr_paris", "tr_city", "tr_trivia", "tr_pref", "tr_no"],
        "subroots": ["tr_trivia", "tr_pref"],
        "nodes": {
            "tr_yes": {
                "preconditions": [{"kind": "intent", "value": "affirm"}],
                "action": {"type": "template",
                           "text": "Lucky you. Where are you headed?"},
                "postconditions": [
                    {"type": "set_state_var", "name": "travel_engaged", "value": True},
                    {"type": "mark_explored", "topic": "travel"},
                ],
                "expects": ["tr_paris", "tr_city", "tr_anywhere", "tr_share", "tr_no"],
            },
            "tr_paris": {
                "preconditions": [{"kind": "keyword", "value": ["paris"]}],
                "action": {"type": "template",
                           "text": "Paris! If you make it to the Louvre, "
                                   "say hello to the Mona Lisa for me. "
                                   "What's first on your list?"},
                "postconditions": [{"type": "push_focus", "entity": "paris"}],
                "expects": ["tr_city", "tr_share", "tr_no"],
            },
            "tr_city": {
                "preconditions": [{"kind": "entity_present", "value": "*"}],
                "action": {"type": "delegate", "module": "recommendation"},
                "postconditions": [],
                "expects": [],
            },
            "tr_anywhere": {
                "preconditions": [
                    {"kind": "state_var_equals", "name": "travel_engaged", "value": True},
                    {"kind": "keyword", "value": ["anywhere", "nowhere", "not sure"]},
                ],
                "action": {"type": "template",
                           "text": "Even a walk somewhere new counts as a trip in my "
                                   "book. Want a couple of travel facts instead?"},
                "postconditions": [],
                "expects": ["tr_trivia_yes", "tr_trivia", "tr_no"],
            },
            "tr_trivia": {
                "preconditions": [{"kind": "keyword", "value": ["trivia", "fact", "facts"]}],
                "action": {"type": "delegate", "module": "recursive",
                           "payload": {"topic": "travel"}},
                "postconditions": [],
                "expects": [],
            },
            "tr_pref": {
                "preconditions": [{"kind": "keyword",
                                   "value": ["favorite", "favourite", "best"]}],
                "action": {"type": "template",
                           "text": "Hard to pick a favorite place. What's yours?"},
                "postconditions": [],
                "expects": ["tr_paris", "tr_city", "tr_share", "tr_no"],
            },
            "tr_no": {
                "preconditions": [{"kind": "intent", "value": "deny"}],
                "action": {"type": "exit",
                           "text": "No travel plans is a valid travel plan. "
                                   "What should we talk about instead?"},
                "postconditions": [],
                "expects": [],
            },
            "tr_trivia_yes": {
                "preconditions": [{"kind": "intent", "value": "affirm"}],
                "action": {"type": "delegate", "module": "recursive",
                           "payload": {"topic": "travel"}},
                "postconditions": [],
                "expects": [],
            },
            "tr_share": {
                "preconditions": [{"kind": "function_ref", "value": "is_declarative"}],
                "action": {"type": "template",
                           "text": "That sounds like a good trip. "
                                   "Want a couple of travel facts?"},
                "postconditions": [],
                "expects": ["tr_trivia_yes", "tr_trivia", "tr_no"],
            },
        },
    }


def nutrition_flow() -> dict:
    ask_more = "Want another one?"
    return {
        "id": "nutrition",
        "topic": "nutrition",
        "triggers": TOPICS["nutrition"],
        "starter": "I've been reading a lot about nutrition. "
                   "Want to hear a fact that surprised me?",
        "entry_expects": ["nut_fact", "nut_no", "nut_trivia", "nut_pref"],
        "subroots": ["nut_trivia", "nut_pref"],
        "nodes": {
            "nut_fact": {
                "preconditions": [{"kind": "intent", "value": "affirm"},
                                  {"kind": "function_ref", "value": "nutrition_has_more"}],
                "action": {"type": "template",
                           "text": "Here's one. {nutrition_fact} What's your gut reaction?"},
                "postconditions": [],
                "expects": ["nut_no", "nut_support", "nut_counter", "nut_counter2",
                            "nut_related", "nut_neutral"],
            },
            "nut_no": {
                "preconditions": [{"kind": "intent", "value": "deny"}],
                "action": {"type": "exit",
                           "text": "Fair enough. Food for thought, literally. "
                                   "What should we talk about instead?"},
                "postconditions": [],
                "expects": [],
            },
            "nut_support": {
                "preconditions": [{"kind": "sentiment_range", "value": [0.05, 1.0]}],
                "action": {"type": "template",
                           "text": "{nutrition_support} " + ask_more},
                "postconditions": [{"type": "call_function", "name": "nutrition_advance"}],
                "expects": ["nut_fact", "nut_no"],
            },
            "nut_counter": {
                "preconditions": [{"kind": "dialogue_act", "value": "open_question"}],
                "action": {"type": "template",
                           "text": "{nutrition_counter} " + ask_more},
                "postconditions": [{"type": "call_function", "name": "nutrition_advance"}],
                "expects": ["nut_fact", "nut_no"],
            },
            "nut_counter2": {
                "preconditions": [{"kind": "dialogue_act", "value": "yes_no_question"}],
                "action": {"type": "template",
                           "text": "{nutrition_counter} " + ask_more},
                "postconditions": [{"type": "call_function", "name": "nutrition_advance"}],
                "expects": ["nut_fact", "nut_no"],
            },
            "nut_related": {
                "preconditions": [{"kind": "sentiment_range", "value": [-1.0, -0.05]}],
                "action": {"type": "template",
                           "text": "{nutrition_related} " + ask_more},
                "postconditions": [{"type": "call_function", "name": "nutrition_advance"}],
                "expects": ["nut_fact", "nut_no"],
            },
            "nut_neutral": {
                "preconditions": [{"kind": "function_ref", "value": "is_declarative"}],
                "action": {"type": "template",
                           "text": "{nutrition_related} Want to keep going?"},
                "postconditions": [{"type": "call_function", "name": "nutrition_advance"}],
                "expects": ["nut_fact", "nut_no"],
            },
            "nut_trivia": {
                "preconditions": [{"kind": "keyword", "value": ["trivia", "fact", "facts"]}],
                "action": {"type": "delegate", "module": "recursive",
                           "payload": {"topic": "nutrition"}},
                "postconditions": [],
                "expects": [],
            },
            "nut_pref": {
                "preconditions": [{"kind": "keyword",
                                   "value": ["favorite", "favourite", "best"]}],
                "action": {"type": "template",
                           "text": "I'm partial to anything with a crunch, acoustically "
                                   "speaking. What's your favorite meal?"},
                "postconditions": [],
                "expects": ["nut_no", "nut_neutral"],
            },
        },
    }


def main() -> int:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    written = 0
    special = {"nutrition": nutrition_flow, "travel": travel_flow}
    for topic, triggers in TOPICS.items():
        flow = special[topic]() if topic in special else generic_flow(topic, triggers)
        path = OUT_DIR / f"{flow['id']}.json"
        path.write_text(json.dumps(flow, indent=2) + "\n", encoding="utf-8")
        written += 1
    print(f"wrote {written} flow file(s) to {OUT_DIR}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
