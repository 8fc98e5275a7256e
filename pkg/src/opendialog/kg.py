"""Typed entity graph with discourse-relation-parameterized traversal.

The graph drives two things: gazetteer entity linking in the NLU pipeline
and relation instantiation for the recommendation/opinion modules. A
discourse relation (expansion, comparison, contingency, temporal) is
instantiated by walking the graph from a focus entity; the returned path is
the justification for proposing the result in the next turn.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from opendialog.errors import GraphLookupError, LoadError
from opendialog.nlu import tokenize
from opendialog.resources import iter_jsonl

# Relations that move up/down the type hierarchy rather than across attributes.
TAXONOMIC_RELATIONS = {"subclass_of", "instance_of", "located_in"}
CONTINGENCY_RELATIONS = {"because_of", "causes"}
TEMPORAL_RELATIONS = {"next_event", "precedes"}


class DiscourseRelation(str, Enum):
    EXPANSION = "expansion"
    COMPARISON = "comparison"
    CONTINGENCY = "contingency"
    TEMPORAL = "temporal"


@dataclass(frozen=True)
class Entity:
    id: str
    name: str
    aliases: tuple[str, ...] = ()
    types: tuple[str, ...] = ()  # most specific first


@dataclass(frozen=True)
class Edge:
    src: str
    rel: str
    dst: str


@dataclass(frozen=True)
class RelationInstantiation:
    relation: DiscourseRelation
    focus: str
    result: str
    path: tuple[Edge, ...]


@dataclass
class KnowledgeGraph:
    entities: dict[str, Entity] = field(default_factory=dict)
    edges: list[Edge] = field(default_factory=list)
    adjacency: dict[tuple[str, str], list[str]] = field(default_factory=dict)
    reverse: dict[tuple[str, str], list[str]] = field(default_factory=dict)
    gazetteer: dict[str, str] = field(default_factory=dict)
    gazetteer_max_len: int = 1
    types: set[str] = field(default_factory=set)

    def __len__(self) -> int:
        return len(self.entities)

    def entity(self, entity_id: str) -> Entity:
        try:
            return self.entities[entity_id]
        except KeyError:
            raise GraphLookupError(f"unknown entity {entity_id!r}") from None

    def name(self, entity_id: str) -> str:
        return self.entity(entity_id).name

    def primary_type(self, entity_id: str) -> str | None:
        types = self.entity(entity_id).types
        return types[0] if types else None

    def relations_of(self, entity_id: str) -> list[str]:
        self.entity(entity_id)
        return sorted({rel for (src, rel) in self.adjacency if src == entity_id})

    def neighbors(self, entity_id: str, rel: str) -> list[str]:
        """All dst with an (entity, rel, dst) edge, sorted by id."""
        self.entity(entity_id)
        return list(self.adjacency.get((entity_id, rel), []))

    def reverse_neighbors(self, entity_id: str, rel: str) -> list[str]:
        """All src with an (src, rel, entity) edge, sorted by id."""
        self.entity(entity_id)
        return list(self.reverse.get((entity_id, rel), []))


def load_graph(nodes_files: Path | Sequence[Path],
               edges_files: Path | Sequence[Path]) -> KnowledgeGraph:
    """Load and validate one or more node/edge pack pairs into a single graph.

    All node files are read before any edge is validated, so packs may
    reference each other's entities. Errors name the offending file line.
    """
    nodes_files = [nodes_files] if isinstance(nodes_files, Path) else list(nodes_files)
    edges_files = [edges_files] if isinstance(edges_files, Path) else list(edges_files)

    graph = KnowledgeGraph()
    for path in nodes_files:
        for lineno, record in iter_jsonl(path):
            try:
                entity = Entity(
                    id=record["id"],
                    name=record["name"],
                    aliases=tuple(record.get("aliases", [])),
                    types=tuple(record.get("types", [])),
                )
            except (KeyError, TypeError) as exc:
                raise LoadError(f"{path}:{lineno}: bad entity record: {exc}") from exc
            if entity.id in graph.entities:
                raise LoadError(f"{path}:{lineno}: duplicate entity id {entity.id!r}")
            graph.entities[entity.id] = entity
            graph.types.update(entity.types)

    seen_edges: set[tuple[str, str, str]] = set()
    for path in edges_files:
        for lineno, record in iter_jsonl(path):
            try:
                edge = Edge(record["src"], record["rel"], record["dst"])
            except (KeyError, TypeError) as exc:
                raise LoadError(f"{path}:{lineno}: bad edge record: {exc}") from exc
            for endpoint in (edge.src, edge.dst):
                if endpoint not in graph.entities:
                    raise LoadError(
                        f"{path}:{lineno}: edge references unknown entity {endpoint!r}")
            key = (edge.src, edge.rel, edge.dst)
            if key in seen_edges:
                raise LoadError(f"{path}:{lineno}: duplicate edge {key}")
            seen_edges.add(key)
            graph.edges.append(edge)

    for edge in graph.edges:
        graph.adjacency.setdefault((edge.src, edge.rel), []).append(edge.dst)
        graph.reverse.setdefault((edge.dst, edge.rel), []).append(edge.src)
    for index in (graph.adjacency, graph.reverse):
        for key in index:
            index[key].sort()

    _check_subclass_acyclic(graph)
    _build_gazetteer(graph)
    return graph


def _check_subclass_acyclic(graph: KnowledgeGraph) -> None:
    state: dict[str, int] = {}  # 1 = on stack, 2 = done

    def visit(node: str, trail: list[str]) -> None:
        state[node] = 1
        trail.append(node)
        for nxt in graph.adjacency.get((node, "subclass_of"), []):
            if state.get(nxt) == 1:
                cycle = " -> ".join(trail + [nxt])
                raise LoadError(f"subclass_of cycle: {cycle}")
            if state.get(nxt) != 2:
                visit(nxt, trail)
        trail.pop()
        state[node] = 2

    for entity_id in graph.entities:
        if state.get(entity_id) != 2:
            visit(entity_id, [])


def _build_gazetteer(graph: KnowledgeGraph) -> None:
    for entity_id in sorted(graph.entities):
        entity = graph.entities[entity_id]
        for surface in (entity.name, *entity.aliases):
            phrase = " ".join(tokenize(surface))
            if phrase and phrase not in graph.gazetteer:
                graph.gazetteer[phrase] = entity_id
                graph.gazetteer_max_len = max(
                    graph.gazetteer_max_len, phrase.count(" ") + 1)


def instantiate_relation(graph: KnowledgeGraph, relation: DiscourseRelation,
                         focus: str, exclude: Iterable[str] = ()) -> list[RelationInstantiation]:
    """Instantiate a discourse relation from ``focus``, skipping ``exclude``.

    comparison: siblings under a shared taxonomic parent, plus entities
    sharing an attribute value (same artist, same genre, ...). expansion:
    attribute neighbors over any non-taxonomic outgoing edge. contingency
    and temporal: dedicated edge labels. Results are ordered by path length
    then id, deduplicated on the first (shortest) path found.
    """
    graph.entity(focus)
    excluded = set(exclude) | {focus}
    found: list[RelationInstantiation] = []

    def add(result: str, path: list[Edge]):
        found.append(RelationInstantiation(relation, focus, result, tuple(path)))

    if relation is DiscourseRelation.COMPARISON:
        for rel in sorted(TAXONOMIC_RELATIONS):
            for parent in graph.neighbors(focus, rel):
                for sibling in graph.reverse_neighbors(parent, rel):
                    if sibling not in excluded:
                        add(sibling, [Edge(focus, rel, parent), Edge(sibling, rel, parent)])
        for rel in graph.relations_of(focus):
            if rel in TAXONOMIC_RELATIONS:
                continue
            for value in graph.neighbors(focus, rel):
                for other in graph.reverse_neighbors(value, rel):
                    if other not in excluded:
                        add(other, [Edge(focus, rel, value), Edge(other, rel, value)])
    elif relation is DiscourseRelation.EXPANSION:
        for rel in graph.relations_of(focus):
            if rel in TAXONOMIC_RELATIONS:
                continue
            for dst in graph.neighbors(focus, rel):
                if dst not in excluded:
                    add(dst, [Edge(focus, rel, dst)])
    elif relation is DiscourseRelation.CONTINGENCY:
        for rel in sorted(CONTINGENCY_RELATIONS):
            for dst in graph.neighbors(focus, rel):
                if dst not in excluded:
                    add(dst, [Edge(focus, rel, dst)])
    elif relation is DiscourseRelation.TEMPORAL:
        for rel in sorted(TEMPORAL_RELATIONS):
            for dst in graph.neighbors(focus, rel):
                if dst not in excluded:
                    add(dst, [Edge(focus, rel, dst)])

    found.sort(key=lambda inst: (len(inst.path), inst.result))
    deduped: list[RelationInstantiation] = []
    seen: set[str] = set()
    for inst in found:
        if inst.result not in seen:
            seen.add(inst.result)
            deduped.append(inst)
    return deduped
