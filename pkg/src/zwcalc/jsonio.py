"""JSON serialization: diagrams, rules, normal forms and rewrite traces.

Graph documents use the exchange schema: ``vertices`` as a list of
``{"id", "kind": "W"|"Z"|"X", "arity"|"strands"}`` records, ``edges`` as
pairs of port references (``[vertexId, portIndex]`` or
``["boundary", position]``), ``boundary`` as ``{"dir"}`` records, and an
optional ``circles`` count (omitted when zero).  Kind "W" is the Black
vertex and "Z" the White one, matching the term syntax.  Round trips are
bit-exact: parsing a serialized diagram reproduces it field for field.
"""

from __future__ import annotations

import json
from typing import Any

from .diagram import BOUNDARY, Black, Crossing, Diagram, Port, White
from .errors import DiagramError
from .normalform import NFTerm, NormalForm, RewriteTrace, TraceStep
from .rules import Rule

# -- diagrams ------------------------------------------------------------------


def diagram_to_obj(g: Diagram) -> dict[str, Any]:
    """The JSON-ready object form of a diagram."""
    vertices: list[dict[str, Any]] = []
    for vid in sorted(g.vertices):
        kind = g.vertices[vid]
        if isinstance(kind, Black):
            vertices.append({"id": vid, "kind": "W", "arity": kind.arity})
        elif isinstance(kind, White):
            vertices.append({"id": vid, "kind": "Z", "arity": kind.arity})
        else:
            vertices.append(
                {
                    "id": vid,
                    "kind": "X",
                    "strands": [list(kind.strands[0]), list(kind.strands[1])],
                }
            )

    def ref(p: Port) -> list[Any]:
        return ["boundary", p[1]] if p[0] == BOUNDARY else [p[0], p[1]]

    obj: dict[str, Any] = {
        "vertices": vertices,
        "edges": [[ref(p), ref(q)] for p, q in g.edges],
        "boundary": [{"dir": d} for d in g.boundary],
    }
    if g.circles:
        obj["circles"] = g.circles
    return obj


def diagram_from_obj(obj: Any) -> Diagram:
    """Parse the object form back into a validated diagram."""
    if not isinstance(obj, dict):
        raise DiagramError("graph document must be a JSON object")
    vertices: dict[int, Any] = {}
    for record in obj.get("vertices", ()):
        try:
            vid, kind = record["id"], record["kind"]
        except (TypeError, KeyError) as err:
            raise DiagramError(f"vertex record {record!r} lacks id/kind") from err
        if not isinstance(vid, int) or vid in vertices:
            raise DiagramError(f"bad or duplicate vertex id {vid!r}")
        if kind == "W":
            vertices[vid] = Black(_arity(record))
        elif kind == "Z":
            vertices[vid] = White(_arity(record))
        elif kind == "X":
            strands = record.get("strands", [[0, 3], [1, 2]])
            try:
                a, b = strands
                vertices[vid] = Crossing((tuple(a), tuple(b)))
            except (TypeError, ValueError) as err:
                raise DiagramError(f"bad strands {strands!r} on vertex {vid}") from err
        else:
            raise DiagramError(f"unknown vertex kind {kind!r}")

    def port(ref: Any) -> Port:
        try:
            owner, index = ref
        except (TypeError, ValueError) as err:
            raise DiagramError(f"bad port reference {ref!r}") from err
        if owner == "boundary":
            owner = BOUNDARY
        if not isinstance(owner, int) or not isinstance(index, int):
            raise DiagramError(f"bad port reference {ref!r}")
        return (owner, index)

    edges = tuple((port(p), port(q)) for p, q in obj.get("edges", ()))
    boundary = []
    for record in obj.get("boundary", ()):
        if not isinstance(record, dict) or "dir" not in record:
            raise DiagramError(f"boundary record {record!r} lacks a dir")
        boundary.append(record["dir"])
    circles = obj.get("circles", 0)
    if not isinstance(circles, int):
        raise DiagramError(f"bad circle count {circles!r}")
    g = Diagram(vertices, edges, tuple(boundary), circles)
    problems = g.validate()
    if problems:
        raise DiagramError("; ".join(problems))
    return g


def diagram_to_json(g: Diagram) -> str:
    return dumps(diagram_to_obj(g))


def diagram_from_json(text: str) -> Diagram:
    return diagram_from_obj(loads(text))


def _arity(record: dict[str, Any]) -> int:
    arity = record.get("arity")
    if not isinstance(arity, int) or arity < 0:
        raise DiagramError(f"bad arity on vertex record {record!r}")
    return arity


# -- normal forms ---------------------------------------------------------------


def nf_to_obj(nf: NormalForm) -> dict[str, Any]:
    return {
        "legs": nf.legs,
        "terms": [{"p": t.p, "m": t.m, "b": t.b} for t in nf.terms],
    }


def nf_from_obj(obj: Any) -> NormalForm:
    if not isinstance(obj, dict) or "legs" not in obj:
        raise DiagramError("normal-form document must be an object with legs")
    try:
        terms = tuple(
            NFTerm(int(t["p"]), int(t["m"]), str(t["b"])) for t in obj.get("terms", ())
        )
        return NormalForm(int(obj["legs"]), terms)
    except (TypeError, KeyError, ValueError) as err:
        raise DiagramError(f"bad normal-form document: {err}") from err


def nf_to_json(nf: NormalForm) -> str:
    return dumps(nf_to_obj(nf))


def nf_from_json(text: str) -> NormalForm:
    return nf_from_obj(loads(text))


# -- rules -----------------------------------------------------------------------


def rule_to_obj(rule: Rule) -> dict[str, Any]:
    return {
        "name": rule.name,
        "lhs": diagram_to_obj(rule.lhs),
        "rhs": diagram_to_obj(rule.rhs),
        "boundaryMap": list(rule.boundary_map),
        "params": list(rule.params),
        "derived": rule.derived,
    }


def rule_from_obj(obj: Any) -> Rule:
    if not isinstance(obj, dict):
        raise DiagramError("rule document must be a JSON object")
    try:
        return Rule(
            name=str(obj["name"]),
            lhs=diagram_from_obj(obj["lhs"]),
            rhs=diagram_from_obj(obj["rhs"]),
            boundary_map=tuple(int(i) for i in obj["boundaryMap"]),
            params=tuple(int(i) for i in obj.get("params", ())),
            derived=bool(obj.get("derived", False)),
        )
    except (KeyError, TypeError, ValueError) as err:
        raise DiagramError(f"bad rule document: {err}") from err


def rule_to_json(rule: Rule) -> str:
    return dumps(rule_to_obj(rule))


def rule_from_json(text: str) -> Rule:
    return rule_from_obj(loads(text))


# -- traces ----------------------------------------------------------------------


def trace_to_lines(trace: RewriteTrace) -> list[str]:
    """One compact JSON document per step, ready for a JSON-lines file."""
    return [
        json.dumps(
            {
                "step": s.step,
                "before": diagram_to_obj(s.before),
                "after": diagram_to_obj(s.after),
            },
            separators=(",", ":"),
            sort_keys=True,
        )
        for s in trace.steps
    ]


def trace_from_lines(lines: list[str]) -> RewriteTrace:
    steps = []
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        obj = loads(line)
        try:
            steps.append(
                TraceStep(
                    str(obj["step"]),
                    diagram_from_obj(obj["before"]),
                    diagram_from_obj(obj["after"]),
                )
            )
        except (KeyError, TypeError) as err:
            raise DiagramError(f"bad trace step on line {number}: {err}") from err
    return RewriteTrace(tuple(steps))


# -- shared plumbing -------------------------------------------------------------


def dumps(obj: Any) -> str:
    """Deterministic pretty serialization used for every document kind."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise DiagramError(f"invalid JSON: {err}") from err
