"""Undirected open port-graphs over the GHZ/W generator set.

A diagram is a finite set of generator vertices, each owning a fixed number of
ports, together with a perfect matching of ports into wires (edges) and an
ordered boundary of open wire ends.  Three generator families exist:

* ``Black(n)`` vertices, the W-type family (one-hot states);
* ``White(n)`` vertices, the GHZ-type family (all-zeros minus all-ones);
* ``Crossing`` vertices, the fermionic wire crossing, whose four ports are
  partitioned into two transversal strands.

Cups, caps and symmetric swaps carry no vertex: they are absorbed into the
wiring, so a bent or re-routed wire is just an edge.  Closed circles (wires
with no ports at all) cannot be expressed as edges and are tracked by a
counter on the diagram.

Diagrams are treated as immutable values: every operation returns a fresh
diagram and never mutates its arguments.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import DiagramError

#: Pseudo vertex identifier owning the boundary ports.
BOUNDARY = -1

#: A port reference: ``(owner, index)`` where ``owner`` is a vertex id or
#: :data:`BOUNDARY` and ``index`` is the port index (for vertices) or the
#: boundary position.
Port = tuple[int, int]

#: An edge: an unordered pair of ports, stored sorted.
Edge = tuple[Port, Port]


@dataclass(frozen=True)
class Black:
    """W-type vertex with ``arity`` ports."""

    arity: int


@dataclass(frozen=True)
class White:
    """GHZ-type vertex with ``arity`` ports."""

    arity: int


@dataclass(frozen=True)
class Crossing:
    """Fermionic crossing: 4 ports split into two transversal strands.

    ``strands`` is the partition of the port indices {0, 1, 2, 3} into the two
    pairs that carry a single wire each.  The default pairing matches the term
    generator ``x``: ports 0 and 1 enter at the bottom, ports 2 and 3 leave at
    the top, and the wires cross (0 continues as 3, 1 continues as 2).
    """

    strands: tuple[tuple[int, int], tuple[int, int]] = ((0, 3), (1, 2))

    def __post_init__(self) -> None:
        pairs = tuple(sorted(tuple(sorted(pair)) for pair in self.strands))
        object.__setattr__(self, "strands", pairs)

    def strand_of(self, port: int) -> int:
        """Return 0 or 1: which strand the given port index belongs to."""
        for which, pair in enumerate(self.strands):
            if port in pair:
                return which
        raise DiagramError(f"crossing has no port {port}")


VertexKind = Black | White | Crossing


def port_count(kind: VertexKind) -> int:
    """Number of ports a vertex of this kind owns."""
    if isinstance(kind, Crossing):
        return 4
    return kind.arity


def _sorted_edge(p: Port, q: Port) -> Edge:
    return (p, q) if p <= q else (q, p)


@dataclass(frozen=True)
class Diagram:
    """An undirected open port-graph.

    ``vertices`` maps integer identifiers to vertex kinds.  ``edges`` is the
    wiring: unordered pairs of ports, where a port is ``(vertex_id, index)``
    or ``(BOUNDARY, position)``.  ``boundary`` lists the open legs in order,
    each flagged ``"in"`` or ``"out"``.  ``circles`` counts closed circular
    wires, which have no ports to hang an edge on.
    """

    vertices: dict[int, VertexKind]
    edges: tuple[Edge, ...]
    boundary: tuple[str, ...]
    circles: int = 0

    def __post_init__(self) -> None:
        canon = tuple(sorted(_sorted_edge(p, q) for p, q in self.edges))
        object.__setattr__(self, "edges", canon)
        object.__setattr__(self, "boundary", tuple(self.boundary))

    # -- inspection ---------------------------------------------------------

    def ports(self) -> Iterator[Port]:
        """All vertex ports, in (vertex id, port index) order."""
        for vid in sorted(self.vertices):
            for k in range(port_count(self.vertices[vid])):
                yield (vid, k)

    def boundary_port(self, position: int) -> Port:
        return (BOUNDARY, position)

    def port_partner(self) -> dict[Port, Port]:
        """Map each wired port to the port at the other end of its edge."""
        partner: dict[Port, Port] = {}
        for p, q in self.edges:
            partner[p] = q
            partner[q] = p
        return partner

    def vertex_ids(self) -> list[int]:
        return sorted(self.vertices)

    def has_crossings(self) -> bool:
        return any(isinstance(k, Crossing) for k in self.vertices.values())

    # -- validation ---------------------------------------------------------

    def validate(self) -> list[str]:
        """Return a list of invariant violations; empty means well-formed."""
        problems: list[str] = []
        seen: dict[Port, int] = {}
        for p, q in self.edges:
            if p == q:
                problems.append(f"edge joins port {p} to itself")
            for end in (p, q):
                seen[end] = seen.get(end, 0) + 1
        for port, count in sorted(seen.items()):
            if count > 1:
                problems.append(f"port {port} appears in {count} edges")
            owner, index = port
            if owner == BOUNDARY:
                if not 0 <= index < len(self.boundary):
                    problems.append(f"edge references unknown boundary position {index}")
            elif owner not in self.vertices:
                problems.append(f"edge references unknown vertex {owner}")
            elif not 0 <= index < port_count(self.vertices[owner]):
                problems.append(f"vertex {owner} has no port {index}")
        for vid in sorted(self.vertices):
            kind = self.vertices[vid]
            if isinstance(kind, Crossing):
                flat = sorted(kind.strands[0] + kind.strands[1])
                if flat != [0, 1, 2, 3]:
                    problems.append(
                        f"crossing {vid} strands {kind.strands} do not partition its 4 ports"
                    )
            elif kind.arity < 0:
                problems.append(f"vertex {vid} has negative arity")
            for k in range(port_count(kind)):
                if (vid, k) not in seen:
                    problems.append(f"dangling port ({vid}, {k})")
        for dir_ in self.boundary:
            if dir_ not in ("in", "out"):
                problems.append(f"boundary direction {dir_!r} is not 'in' or 'out'")
        if self.circles < 0:
            problems.append("negative circle count")
        return problems

    def is_fully_wired(self) -> bool:
        """True when every boundary position is attached to an edge."""
        wired = {p for edge in self.edges for p in edge if p[0] == BOUNDARY}
        return all((BOUNDARY, i) in wired for i in range(len(self.boundary)))


def validate(g: Diagram) -> list[str]:
    """Module-level alias for :meth:`Diagram.validate`."""
    return g.validate()


# -- wiring resolution -------------------------------------------------------


def _resolve_wires(
    segments: Iterable[tuple[object, object]],
    junctions: set,
) -> tuple[list[tuple[object, object]], int]:
    """Collapse wire chains passing through junction points.

    ``segments`` are wire pieces between arbitrary hashable points; the points
    in ``junctions`` are interior (being fused away) and must each touch one
    or two segments.  Returns the list of surviving wires, each joining two
    non-junction points, and the number of closed loops that ran entirely
    through junctions.
    """
    adjacency: dict[object, list[int]] = {}
    seg_list = list(segments)
    for i, (p, q) in enumerate(seg_list):
        adjacency.setdefault(p, []).append(i)
        adjacency.setdefault(q, []).append(i)
    for point in junctions:
        degree = len(adjacency.get(point, []))
        if degree == 1:
            raise DiagramError(f"wire chain dead-ends at fused point {point}")
        if degree > 2:
            raise DiagramError(f"fused point {point} touches {degree} wires")

    used = [False] * len(seg_list)
    wires: list[tuple[object, object]] = []
    ends = sorted(
        (point for point in adjacency if point not in junctions),
        key=repr,
    )
    for start in ends:
        for seg in adjacency[start]:
            if used[seg]:
                continue
            used[seg] = True
            p, q = seg_list[seg]
            current = q if p == start else p
            while current in junctions:
                nxt = [s for s in adjacency[current] if not used[s]]
                if not nxt:
                    raise DiagramError(f"wire chain dead-ends at fused point {current}")
                used[nxt[0]] = True
                p, q = seg_list[nxt[0]]
                current = q if p == current else p
            wires.append((start, current))
    # Whatever remains is a set of cycles running only through junctions.
    circles = 0
    for i, (p, q) in enumerate(seg_list):
        if used[i]:
            continue
        used[i] = True
        current = q
        while current != p:
            nxt = [s for s in adjacency[current] if not used[s]]
            used[nxt[0]] = True
            a, b = seg_list[nxt[0]]
            current = b if a == current else a
        circles += 1
    # Non-junction points touch at most one segment, so each surviving wire
    # was traced exactly once (from whichever open end sorted first).
    if not all(used):
        raise DiagramError("inconsistent wiring resolution")
    return wires, circles


# -- structural operations ---------------------------------------------------


def plug(
    g: Diagram,
    h: Diagram,
    pairing: Sequence[tuple[int, int]],
) -> Diagram:
    """Fuse boundary legs of ``g`` with boundary legs of ``h``.

    ``pairing`` lists (g leg position, h leg position) pairs; each position
    may appear at most once.  The result is the disjoint union of the two
    diagrams with every paired leg fused into a wire.  The surviving boundary
    is g's remaining legs in order, followed by h's remaining legs in order.
    An empty pairing is plain juxtaposition.
    """
    g_used = [i for i, _ in pairing]
    h_used = [j for _, j in pairing]
    for pos, size, name in ((g_used, len(g.boundary), "first"), (h_used, len(h.boundary), "second")):
        for i in pos:
            if not 0 <= i < size:
                raise DiagramError(f"{name} diagram has no boundary leg {i}")
        if len(set(pos)) != len(pos):
            raise DiagramError(f"duplicated boundary leg in pairing for {name} diagram")

    offset = max(g.vertices, default=-1) + 1
    vertices: dict[int, VertexKind] = dict(g.vertices)
    for vid, kind in h.vertices.items():
        vertices[vid + offset] = kind

    def g_point(p: Port) -> object:
        return ("gb", p[1]) if p[0] == BOUNDARY else p

    def h_point(p: Port) -> object:
        return ("hb", p[1]) if p[0] == BOUNDARY else (p[0] + offset, p[1])

    segments: list[tuple[object, object]] = []
    segments.extend((g_point(p), g_point(q)) for p, q in g.edges)
    segments.extend((h_point(p), h_point(q)) for p, q in h.edges)
    junctions: set = set()
    for i, j in pairing:
        segments.append((("gb", i), ("hb", j)))
        junctions.add(("gb", i))
        junctions.add(("hb", j))

    wires, circles = _resolve_wires(segments, junctions)

    new_boundary: list[str] = []
    remap: dict[object, Port] = {}
    for i, dir_ in enumerate(g.boundary):
        if i not in g_used:
            remap[("gb", i)] = (BOUNDARY, len(new_boundary))
            new_boundary.append(dir_)
    for j, dir_ in enumerate(h.boundary):
        if j not in h_used:
            remap[("hb", j)] = (BOUNDARY, len(new_boundary))
            new_boundary.append(dir_)

    def back(point: object) -> Port:
        if point in remap:
            return remap[point]
        if isinstance(point, tuple) and len(point) == 2 and isinstance(point[0], int):
            return point  # a vertex port
        raise DiagramError(f"unpaired dangling wire end {point}")

    edges = tuple(_sorted_edge(back(p), back(q)) for p, q in wires)
    return Diagram(vertices, edges, tuple(new_boundary), g.circles + h.circles + circles)


def permute_boundary(g: Diagram, order: Sequence[int]) -> Diagram:
    """Reorder the boundary: new position ``k`` takes old position ``order[k]``."""
    if sorted(order) != list(range(len(g.boundary))):
        raise DiagramError(f"{list(order)} is not a permutation of the boundary")
    new_of_old = {old: new for new, old in enumerate(order)}

    def move(p: Port) -> Port:
        return (BOUNDARY, new_of_old[p[1]]) if p[0] == BOUNDARY else p

    edges = tuple(_sorted_edge(move(p), move(q)) for p, q in g.edges)
    boundary = tuple(g.boundary[old] for old in order)
    return Diagram(dict(g.vertices), edges, boundary, g.circles)


def with_boundary_dirs(g: Diagram, dirs: Sequence[str]) -> Diagram:
    """Return ``g`` with its boundary direction flags replaced."""
    if len(dirs) != len(g.boundary):
        raise DiagramError("direction list does not match boundary size")
    return Diagram(dict(g.vertices), g.edges, tuple(dirs), g.circles)


# -- isomorphism (test-scale canonical labeling) ------------------------------

_MAX_ISO_VERTICES = 4096


def _connection_point(g: Diagram, p: Port) -> tuple:
    """Collapse a port to the symmetry class it belongs to.

    Black/White ports are fully interchangeable, so they collapse to the
    vertex.  Crossing ports are interchangeable only within a strand.
    Boundary positions are rigid.
    """
    owner, index = p
    if owner == BOUNDARY:
        return ("b", index)
    kind = g.vertices[owner]
    if isinstance(kind, Crossing):
        return ("x", owner, kind.strand_of(index))
    return ("v", owner)


def canonical_form(g: Diagram) -> str:
    """A string equal for two diagrams iff they are isomorphic.

    Isomorphism fixes the boundary pointwise (same positions, same flags),
    maps vertices to vertices of the same kind, and may permute the ports of
    Black/White vertices freely and the ports of a crossing by strand
    symmetry.  Intended for test-scale diagrams (including normal-form
    templates, whose rigid boundary anchors keep refinement cheap).
    """
    if len(g.vertices) > _MAX_ISO_VERTICES:
        raise DiagramError(
            f"canonical labeling supports at most {_MAX_ISO_VERTICES} vertices"
        )

    vids = sorted(g.vertices)
    neighbors: dict[tuple, list[tuple]] = {}
    for p, q in g.edges:
        cp, cq = _connection_point(g, p), _connection_point(g, q)
        neighbors.setdefault(cp, []).append(cq)
        neighbors.setdefault(cq, []).append(cp)

    def kind_tag(vid: int) -> tuple:
        kind = g.vertices[vid]
        if isinstance(kind, Black):
            return ("B", kind.arity)
        if isinstance(kind, White):
            return ("W", kind.arity)
        return ("X",)

    def point_color(point: tuple, colors: dict[int, int]) -> tuple:
        # Strand labels inside a crossing are arbitrary storage order, so a
        # neighbor's color may not leak them; only the owning vertex counts.
        if point[0] == "b":
            return ("b", point[1])
        return (point[0], colors[point[1]])

    def refine(colors: dict[int, int]) -> dict[int, int]:
        while True:
            signatures: dict[int, tuple] = {}
            for vid in vids:
                kind = g.vertices[vid]
                if isinstance(kind, Crossing):
                    per_strand = []
                    for s in (0, 1):
                        near = neighbors.get(("x", vid, s), [])
                        per_strand.append(tuple(sorted(point_color(n, colors) for n in near)))
                    sig = (colors[vid], tuple(sorted(per_strand)))
                else:
                    near = neighbors.get(("v", vid), [])
                    sig = (colors[vid], tuple(sorted(point_color(n, colors) for n in near)))
                signatures[vid] = sig
            ranking = {s: i for i, s in enumerate(sorted(set(signatures.values())))}
            new = {vid: ranking[signatures[vid]] for vid in vids}
            if new == colors:
                return colors
            colors = new

    def emit(colors: dict[int, int]) -> str | None:
        """Serialize if the coloring is discrete, else None."""
        if len(set(colors.values())) != len(vids):
            return None
        rank = {vid: colors[vid] for vid in vids}
        parts = [f"legs:{','.join(g.boundary)}", f"circles:{g.circles}"]
        parts.extend(
            f"v{rank[vid]}:{kind_tag(vid)}" for vid in sorted(vids, key=lambda v: rank[v])
        )
        crossings = [vid for vid in vids if isinstance(g.vertices[vid], Crossing)]
        if len(crossings) > 12:
            raise DiagramError("canonical labeling supports at most 12 crossings")

        def entry_list(flips: dict[int, int]) -> list[tuple]:
            entries = []
            for p, q in g.edges:
                described = []
                for port in (p, q):
                    owner, index = port
                    if owner == BOUNDARY:
                        described.append(("b", index, 0))
                    else:
                        kind = g.vertices[owner]
                        strand = 0
                        if isinstance(kind, Crossing):
                            strand = kind.strand_of(index) ^ flips.get(owner, 0)
                        described.append(("n", rank[owner], strand))
                entries.append(tuple(sorted(described)))
            return sorted(entries)

        # The two strand labels inside each crossing are symmetric; pick the
        # joint labeling with the least edge serialization.
        best = min(
            (entry_list(dict(zip(crossings, combo))) for combo in
             itertools.product((0, 1), repeat=len(crossings))),
            default=entry_list({}),
        ) if crossings else entry_list({})
        parts.extend(f"e:{e}" for e in best)
        return ";".join(parts)

    def search(colors: dict[int, int]) -> str:
        colors = refine(colors)
        done = emit(colors)
        if done is not None:
            return done
        by_color: dict[int, list[int]] = {}
        for vid in vids:
            by_color.setdefault(colors[vid], []).append(vid)
        cell = min((vs for vs in by_color.values() if len(vs) > 1), key=lambda vs: colors[vs[0]])
        best: str | None = None
        for chosen in cell:
            trial = dict(colors)
            trial[chosen] = len(vids) + colors[chosen] + 1
            rankfix = {c: i for i, c in enumerate(sorted(set(trial.values())))}
            candidate = search({v: rankfix[c] for v, c in trial.items()})
            if best is None or candidate < best:
                best = candidate
        assert best is not None
        return best

    initial = {s: i for i, s in enumerate(sorted({kind_tag(v) for v in vids}))}
    return search({vid: initial[kind_tag(vid)] for vid in vids})


def isomorphic(g: Diagram, h: Diagram) -> bool:
    """Boundary-respecting graph isomorphism (test-scale)."""
    if len(g.boundary) != len(h.boundary) or g.circles != h.circles:
        return False
    if sorted(map(repr, g.vertices.values())) != sorted(map(repr, h.vertices.values())):
        return False
    return canonical_form(g) == canonical_form(h)


# -- small construction helper ------------------------------------------------


class DiagramBuilder:
    """Incremental construction of a diagram with explicit boundary legs."""

    def __init__(self) -> None:
        self._vertices: dict[int, VertexKind] = {}
        self._edges: list[tuple[Port, Port]] = []
        self._legs: dict[int, str] = {}
        self._circles = 0

    def vertex(self, kind: VertexKind) -> int:
        vid = len(self._vertices)
        self._vertices[vid] = kind
        return vid

    def leg(self, position: int, dir_: str = "out") -> Port:
        self._legs[position] = dir_
        return (BOUNDARY, position)

    def edge(self, p: Port, q: Port) -> None:
        self._edges.append((p, q))

    def chain(self, start: Port, kinds: Sequence[VertexKind], end: Port) -> list[int]:
        """Wire ``start`` to ``end`` through a path of binary vertices."""
        current = start
        made = []
        for kind in kinds:
            if port_count(kind) != 2:
                raise DiagramError("chain links must be binary vertices")
            vid = self.vertex(kind)
            made.append(vid)
            self.edge(current, (vid, 0))
            current = (vid, 1)
        self.edge(current, end)
        return made

    def circle(self, count: int = 1) -> None:
        self._circles += count

    def build(self) -> Diagram:
        positions = sorted(self._legs)
        if positions != list(range(len(positions))):
            raise DiagramError(f"boundary positions {positions} are not contiguous from 0")
        boundary = tuple(self._legs[i] for i in positions)
        return Diagram(dict(self._vertices), tuple(self._edges), boundary, self._circles)
