"""Declarative dialogue flows: load-time validation and runtime stepping.

A flow is a graph of nodes, each with conjunctive preconditions, one action
(template, delegate, or exit), postconditions, and an expectation set naming
the nodes considered on the next user turn. Everything that can dangle is
checked at load, so a flow that loads can never raise a reference error at
runtime.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

from opendialog.errors import FlowLoadError
from opendialog.memory import SessionState, push_focus
from opendialog.nlu import AnnotatedUtterance, tokenize

logger = logging.getLogger(__name__)

PRECONDITION_KINDS = {
    "keyword", "intent", "dialogue_act", "sentiment_range",
    "state_var_equals", "entity_present", "function_ref",
}

ACTION_TEMPLATE = "template"
ACTION_DELEGATE = "delegate"
ACTION_EXIT = "exit"


@dataclass(frozen=True)
class Precondition:
    kind: str
    payload: Any


@dataclass(frozen=True)
class FlowAction:
    type: str
    text: str | None = None
    module: str | None = None
    payload: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Postcondition:
    type: str
    payload: dict


@dataclass(frozen=True)
class FlowNode:
    id: str
    preconditions: tuple[Precondition, ...]
    action: FlowAction
    postconditions: tuple[Postcondition, ...]
    expects: tuple[str, ...]


@dataclass(frozen=True)
class FlowGraph:
    id: str
    topic: str
    triggers: tuple[str, ...]
    starter: str
    entry_expects: tuple[str, ...]
    subroots: tuple[str, ...]
    nodes: dict[str, FlowNode]  # insertion order = file declaration order

    def declared_order(self, node_ids: Sequence[str]) -> list[str]:
        wanted = set(node_ids)
        return [nid for nid in self.nodes if nid in wanted]


class FunctionRegistry:
    """Named predicates, template slot providers and postcondition functions."""

    def __init__(self):
        self.predicates: dict[str, Callable[[SessionState, AnnotatedUtterance], bool]] = {}
        self.providers: dict[str, Callable[[SessionState], str]] = {}
        self.postfns: dict[str, Callable[[SessionState], None]] = {}

    def known(self) -> set[str]:
        return set(self.predicates) | set(self.providers) | set(self.postfns)


def _object_pairs_guard(path: Path):
    def hook(pairs):
        keys = [k for k, _ in pairs]
        dupes = {k for k in keys if keys.count(k) > 1}
        if dupes:
            raise FlowLoadError(
                f"{path.name}: duplicate node id {sorted(dupes)[0]!r}",
                rule="duplicate-id", node_id=sorted(dupes)[0])
        return dict(pairs)
    return hook


def load_flow(path: Path, registry: FunctionRegistry) -> FlowGraph:
    """Parse and fully validate one flow file."""
    try:
        raw = json.loads(path.read_text(encoding="utf-8"),
                         object_pairs_hook=_object_pairs_guard(path))
    except json.JSONDecodeError as exc:
        raise FlowLoadError(f"{path.name}: invalid JSON: {exc}", rule="bad-json") from exc

    flow_id = raw.get("id") or path.stem
    nodes: dict[str, FlowNode] = {}
    for node_id, node_raw in raw.get("nodes", {}).items():
        nodes[node_id] = _parse_node(path, flow_id, node_id, node_raw)

    flow = FlowGraph(
        id=flow_id,
        topic=raw.get("topic", flow_id),
        triggers=tuple(raw.get("triggers", [])),
        starter=raw.get("starter", f"Let's talk about {raw.get('topic', flow_id)}."),
        entry_expects=tuple(raw.get("entry_expects", [])),
        subroots=tuple(raw.get("subroots", [])),
        nodes=nodes,
    )
    _validate(path, flow, registry)
    return flow


def _parse_node(path: Path, flow_id: str, node_id: str, raw: dict) -> FlowNode:
    preconditions = []
    for pre in raw.get("preconditions", []):
        kind = pre.get("kind")
        if kind not in PRECONDITION_KINDS:
            raise FlowLoadError(
                f"{path.name}: node {node_id!r} has unknown precondition kind {kind!r}",
                rule="unknown-precondition-kind", node_id=node_id)
        if kind == "sentiment_range":
            lo, hi = pre["value"]
            if not (-1.0 <= lo <= hi <= 1.0):
                raise FlowLoadError(
                    f"{path.name}: node {node_id!r} sentiment_range outside [-1, 1]",
                    rule="bad-precondition", node_id=node_id)
        payload = pre.get("value") if kind != "state_var_equals" else (pre["name"], pre["value"])
        preconditions.append(Precondition(kind, payload))

    action_raw = raw.get("action", {})
    action_type = action_raw.get("type")
    if action_type not in (ACTION_TEMPLATE, ACTION_DELEGATE, ACTION_EXIT):
        raise FlowLoadError(
            f"{path.name}: node {node_id!r} has unknown action type {action_type!r}",
            rule="unknown-action", node_id=node_id)
    action = FlowAction(
        type=action_type,
        text=action_raw.get("text"),
        module=action_raw.get("module"),
        payload=action_raw.get("payload", {}),
    )

    postconditions = tuple(
        Postcondition(pc["type"], {k: v for k, v in pc.items() if k != "type"})
        for pc in raw.get("postconditions", [])
    )
    return FlowNode(
        id=node_id,
        preconditions=tuple(preconditions),
        action=action,
        postconditions=postconditions,
        expects=tuple(raw.get("expects", [])),
    )


def _validate(path: Path, flow: FlowGraph, registry: FunctionRegistry) -> None:
    if not flow.nodes or not flow.entry_expects:
        raise FlowLoadError(f"{path.name}: flow has no entry (empty nodes or entry_expects)",
                            rule="missing-entry")

    for subroot in flow.subroots:
        if subroot not in flow.nodes:
            raise FlowLoadError(f"{path.name}: subroot {subroot!r} does not exist",
                                rule="dangling-subroot", node_id=subroot)

    for owner, expected in [("entry", flow.entry_expects)] + [
            (node.id, node.expects) for node in flow.nodes.values()]:
        for target in expected:
            if target not in flow.nodes:
                raise FlowLoadError(
                    f"{path.name}: {owner!r} expects unknown node {target!r}",
                    rule="dangling-expects", node_id=target)

    known = registry.known()
    for node in flow.nodes.values():
        for pre in node.preconditions:
            if pre.kind == "function_ref" and pre.payload not in known:
                raise FlowLoadError(
                    f"{path.name}: node {node.id!r} references unknown function "
                    f"{pre.payload!r}", rule="unknown-function", node_id=node.id)
        for post in node.postconditions:
            if post.type == "call_function" and post.payload.get("name") not in known:
                raise FlowLoadError(
                    f"{path.name}: node {node.id!r} calls unknown function "
                    f"{post.payload.get('name')!r}", rule="unknown-function", node_id=node.id)

    reachable: set[str] = set()
    frontier = list(flow.entry_expects) + list(flow.subroots)
    while frontier:
        node_id = frontier.pop()
        if node_id in reachable:
            continue
        reachable.add(node_id)
        frontier.extend(flow.nodes[node_id].expects)
    unreachable = sorted(set(flow.nodes) - reachable)
    if unreachable:
        raise FlowLoadError(
            f"{path.name}: node {unreachable[0]!r} is unreachable from entry or subroots",
            rule="unreachable-node", node_id=unreachable[0])


def load_flows(directory: Path, registry: FunctionRegistry) -> dict[str, FlowGraph]:
    flows: dict[str, FlowGraph] = {}
    for path in sorted(directory.glob("*.json")):
        flow = load_flow(path, registry)
        if flow.id in flows:
            raise FlowLoadError(f"{path.name}: duplicate flow id {flow.id!r}",
                                rule="duplicate-id")
        flows[flow.id] = flow
    return flows


def keyword_hit(phrases: Sequence[str], utterance: AnnotatedUtterance) -> bool:
    text = " ".join(utterance.tokens)
    for phrase in phrases if isinstance(phrases, (list, tuple)) else [phrases]:
        normalized = " ".join(tokenize(str(phrase)))
        if normalized and re.search(rf"\b{re.escape(normalized)}\b", text):
            return True
    return False


def evaluate_precondition(pre: Precondition, state: SessionState,
                          utterance: AnnotatedUtterance,
                          registry: FunctionRegistry) -> bool:
    if pre.kind == "keyword":
        return keyword_hit(pre.payload, utterance)
    if pre.kind == "intent":
        return utterance.intent == pre.payload
    if pre.kind == "dialogue_act":
        return utterance.dialogue_act.value == pre.payload
    if pre.kind == "sentiment_range":
        lo, hi = pre.payload
        return lo <= utterance.sentiment <= hi
    if pre.kind == "state_var_equals":
        name, value = pre.payload
        return state.state_vars.get(name) == value
    if pre.kind == "entity_present":
        if pre.payload == "*":
            return bool(utterance.entities)
        return pre.payload in utterance.entity_ids
    if pre.kind == "function_ref":
        try:
            return bool(registry.predicates[pre.payload](state, utterance))
        except Exception:
            logger.warning("flow predicate %s failed; treated as non-match",
                           pre.payload, exc_info=True)
            return False
    return False


def match(flow: FlowGraph, expectations: Sequence[str], state: SessionState,
          utterance: AnnotatedUtterance, registry: FunctionRegistry) -> str | None:
    """First node (in file declaration order) whose preconditions all hold."""
    for node_id in flow.declared_order(expectations):
        node = flow.nodes[node_id]
        if all(evaluate_precondition(p, state, utterance, registry)
               for p in node.preconditions):
            return node_id
    return None


_SLOT_RE = re.compile(r"\{([a-z0-9_]+)\}")


def render_template(text: str, state: SessionState, flow: FlowGraph,
                    registry: FunctionRegistry) -> str:
    """Fill {slot} markers from state_vars, then provider functions.

    ``topic`` is always available. Rendering is read-only; cursor movement
    belongs in call_function postconditions.
    """
    def fill(match_: re.Match) -> str:
        slot = match_.group(1)
        if slot == "topic":
            return flow.topic
        if slot in state.state_vars:
            return str(state.state_vars[slot])
        if slot in registry.providers:
            return str(registry.providers[slot](state))
        raise FlowLoadError(f"flow {flow.id!r}: unresolvable template slot {slot!r}",
                            rule="unresolvable-slot")

    return _SLOT_RE.sub(fill, text)


@dataclass
class StepResult:
    output: str | None  # rendered template text (None for delegate/exit)
    delegate: tuple[str, dict] | None  # (module id, payload)
    exited: bool
    node_id: str | None
    expectations: tuple[str, ...]


def apply_postconditions(node: FlowNode, state: SessionState,
                         registry: FunctionRegistry) -> None:
    """Apply in order; a failing call_function is logged and the rest continue."""
    for post in node.postconditions:
        try:
            if post.type == "set_state_var":
                state.state_vars[post.payload["name"]] = post.payload["value"]
            elif post.type == "mark_explored":
                state.explored_topics.add(post.payload["topic"])
            elif post.type == "push_focus":
                push_focus(state, post.payload["entity"])
            elif post.type == "call_function":
                registry.postfns[post.payload["name"]](state)
            else:
                logger.warning("unknown postcondition type %s ignored", post.type)
        except Exception:
            logger.warning("postcondition %s on node %s failed; flow continues",
                           post.type, node.id, exc_info=True)


def step(flow: FlowGraph, state: SessionState, matched: str | None,
         registry: FunctionRegistry) -> StepResult:
    """Execute the matched node (or exit the flow when nothing matched).

    On a match: run the action, apply postconditions in order, and set the
    cursor's expectation set to the node's ``expects`` verbatim. On no
    match: drop the cursor and release initiative.
    """
    if matched is None:
        state.flow_state.pop(flow.id, None)
        return StepResult(output=None, delegate=None, exited=True,
                          node_id=None, expectations=())

    node = flow.nodes[matched]
    output: str | None = None
    delegate: tuple[str, dict] | None = None
    exited = False
    if node.action.type == ACTION_TEMPLATE:
        output = render_template(node.action.text or "", state, flow, registry)
    elif node.action.type == ACTION_DELEGATE:
        delegate = (node.action.module or "", dict(node.action.payload))
    elif node.action.type == ACTION_EXIT:
        output = node.action.text
        exited = True

    apply_postconditions(node, state, registry)
    if exited or node.action.type == ACTION_DELEGATE:
        state.flow_state.pop(flow.id, None)
    else:
        state.flow_state[flow.id] = list(node.expects)
    return StepResult(output=output, delegate=delegate, exited=exited,
                      node_id=matched, expectations=node.expects)


def trigger(flows: dict[str, FlowGraph], state: SessionState,
            utterance: AnnotatedUtterance) -> str | None:
    """Pick a flow to start: trigger keywords first (unexplored preferred),
    then an affirmative answer to a standing offer."""
    hits = [flow for flow in flows.values() if keyword_hit(flow.triggers, utterance)]
    if hits:
        unexplored = [f for f in hits if f.topic not in state.explored_topics]
        pool = unexplored or hits
        return sorted(pool, key=lambda f: f.id)[0].id
    offered = state.state_vars.get("standing_offer")
    if offered in flows and utterance.intent == "affirm":
        return offered
    return None


def build_default_registry(nutrition_arguments: list[dict]) -> FunctionRegistry:
    """Registry with the bundled argument-graph navigation functions.

    The nutrition flow walks the argument list recursively: each record has
    a fact plus supporting/counter/related replies keyed off the user's
    reaction; a cursor in state_vars tracks position per session.
    """
    registry = FunctionRegistry()
    arguments = nutrition_arguments

    def is_declarative(state: SessionState, utterance: AnnotatedUtterance) -> bool:
        return utterance.dialogue_act.value in ("statement", "provide_opinion")

    registry.predicates["is_declarative"] = is_declarative

    def current(state: SessionState) -> dict:
        idx = int(state.state_vars.get("nutrition_idx", 0))
        return arguments[idx % len(arguments)] if arguments else {}

    def has_more(state: SessionState, _utt: AnnotatedUtterance) -> bool:
        return int(state.state_vars.get("nutrition_idx", 0)) < len(arguments)

    registry.predicates["nutrition_has_more"] = has_more
    registry.providers["nutrition_fact"] = lambda s: current(s).get("fact", "")
    registry.providers["nutrition_support"] = lambda s: current(s).get("support", "")
    registry.providers["nutrition_counter"] = lambda s: current(s).get("counter", "")
    registry.providers["nutrition_related"] = lambda s: current(s).get("related", "")

    def advance(state: SessionState) -> None:
        state.state_vars["nutrition_idx"] = int(state.state_vars.get("nutrition_idx", 0)) + 1

    registry.postfns["nutrition_advance"] = advance
    return registry
