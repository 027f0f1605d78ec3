"""Normal forms and the constructive normalization procedure.

A normal form over n legs is a list of terms (p, m, b): sign bit p,
multiplicity m >= 1 and a bitstring b of length n, with all b distinct and
terms sorted by (b, p).  It denotes the tensor sum of (-1)^p m |b> over the
terms.

``nf_to_diagram`` realizes a normal form as a diagram built from one fixed
template; ``is_normal_form`` recognizes that template and parses the data
back out.  The template, bottom to top:

* a Black backbone of arity q (the term count);
* per term, a chain from its backbone port: a multiplicity gadget when
  m >= 2 (two Black-2 vertices around a pair of Black-(m+1) vertices joined
  by m parallel wires, contributing diag(1, m)), then a White-2 sign changer
  when p = 0, then the term's White vertex;
* one top Black vertex per leg, wired to the White vertex of every term
  whose bitstring is 0 at that leg, plus one wire to the leg itself.

With the generator tensors used here, a term's White vertex must connect to
the tops of its *zero* positions and carry a changer exactly when its sign is
*positive*; that convention is forced by direct evaluation of the template
(the backbone emits a single 1 among the chains, each White vertex maps the
all-equal inputs 1...1 to -1 and 0...0 to +1, and the tops then put the 1 on
the zero-wired legs).

``normalize`` follows the constructive completeness argument: eliminate
crossings, then fold the generators' normal forms over the diagram's wiring
with juxtaposition and traces, emitting an optional audit trace whose steps
are honest diagrams with unchanged evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .diagram import (
    BOUNDARY,
    Black,
    Crossing,
    Diagram,
    DiagramBuilder,
    Port,
    VertexKind,
    White,
    _resolve_wires,
    plug,
    port_count,
    validate,
)
from .errors import DiagramError, LegCapError
from .tensor import (
    DEFAULT_LEG_CAP,
    INTEGERS,
    IntegersMod,
    Ring,
    Tensor,
    generator_tensor,
)


class NFTerm(NamedTuple):
    p: int
    m: int
    b: str


@dataclass(frozen=True)
class NormalForm:
    """The canonical sum decomposition: legs and sorted (p, m, b) terms."""

    legs: int
    terms: tuple[NFTerm, ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for term in self.terms:
            if term.p not in (0, 1):
                raise ValueError(f"sign bit must be 0 or 1, got {term.p}")
            if term.m < 1:
                raise ValueError(f"multiplicity must be positive, got {term.m}")
            if len(term.b) != self.legs or any(ch not in "01" for ch in term.b):
                raise ValueError(f"bad bitstring {term.b!r} for {self.legs} legs")
            if term.b in seen:
                raise ValueError(f"duplicate bitstring {term.b!r}")
            seen.add(term.b)
        if list(self.terms) != sorted(self.terms, key=lambda t: (t.b, t.p)):
            raise ValueError("terms must be sorted by (b, p)")

    def coefficient(self, b: str) -> int:
        for term in self.terms:
            if term.b == b:
                return -term.m if term.p else term.m
        return 0


def _combine(legs: int, raw: Iterable[tuple[int, int, str]], ring: Ring) -> NormalForm:
    """Merge raw (p, m, b) contributions into canonical terms."""
    totals: dict[str, int] = {}
    for p, m, b in raw:
        totals[b] = totals.get(b, 0) + (-m if p else m)
    terms = []
    for b, value in totals.items():
        value = ring.reduce(value)
        if value == 0:
            continue
        if isinstance(ring, IntegersMod):
            terms.append(NFTerm(0, value, b))
        else:
            terms.append(NFTerm(1 if value < 0 else 0, abs(value), b))
    terms.sort(key=lambda t: (t.b, t.p))
    return NormalForm(legs, tuple(terms))


# -- the normal form of a tensor ----------------------------------------------


def nf_of_tensor(psi: Tensor, ring: Ring = INTEGERS) -> NormalForm:
    """Decompose a tensor into sign/multiplicity/bitstring terms.

    Over the integers the decomposition is the usual sign-magnitude one; over
    a modular ring every coefficient is its least positive residue with p = 0.
    """
    raw = [(0, coeff, psi.bitstring(mask)) for mask, coeff in psi.entries.items()]
    return _combine(psi.legs, raw, ring)


# -- the diagram of a normal form ---------------------------------------------


def _build_chain(b: DiagramBuilder, start: Port, term: NFTerm, end: Port) -> None:
    """Wire backbone port ``start`` to White-vertex port ``end`` for a term."""
    current = start
    if term.m >= 2:
        entry = b.vertex(Black(2))
        inner_a = b.vertex(Black(term.m + 1))
        inner_b = b.vertex(Black(term.m + 1))
        exit_ = b.vertex(Black(2))
        b.edge(current, (entry, 0))
        b.edge((entry, 1), (inner_a, 0))
        for k in range(1, term.m + 1):
            b.edge((inner_a, k), (inner_b, k))
        b.edge((inner_b, 0), (exit_, 0))
        current = (exit_, 1)
    if term.p == 0:
        changer = b.vertex(White(2))
        b.edge(current, (changer, 0))
        current = (changer, 1)
    b.edge(current, end)


def _build_template(
    legs: int,
    units: Sequence[NFTerm],
    dirs: Sequence[str] | None,
) -> Diagram:
    b = DiagramBuilder()
    backbone = b.vertex(Black(len(units)))
    zero_terms_of_leg: list[list[int]] = [[] for _ in range(legs)]
    for i, term in enumerate(units):
        for j, ch in enumerate(term.b):
            if ch == "0":
                zero_terms_of_leg[j].append(i)
    tops = [b.vertex(Black(len(zero_terms_of_leg[j]) + 1)) for j in range(legs)]
    top_slot = [0] * legs
    for j in range(legs):
        b.edge((tops[j], len(zero_terms_of_leg[j])), b.leg(j, dirs[j] if dirs else "out"))
    for i, term in enumerate(units):
        zeros = [j for j, ch in enumerate(term.b) if ch == "0"]
        vertex = b.vertex(White(1 + len(zeros)))
        _build_chain(b, (backbone, i), term, (vertex, 0))
        for rank, j in enumerate(zeros):
            b.edge((vertex, 1 + rank), (tops[j], top_slot[j]))
            top_slot[j] += 1
    return b.build()


def nf_to_diagram(nf: NormalForm, dirs: Sequence[str] | None = None) -> Diagram:
    """Build the template diagram of a normal form.

    ``dirs`` optionally assigns boundary direction flags (all "out" by
    default); the flags do not affect evaluation.
    """
    if dirs is not None and len(dirs) != nf.legs:
        raise ValueError("direction list does not match leg count")
    return _build_template(nf.legs, nf.terms, dirs)


def deloop(nf: NormalForm) -> Diagram:
    """The loop-free template: each term expanded into m unit copies.

    The result is a pre-normal-form diagram (duplicate bitstrings allowed,
    no multiplicity gadgets) with the same evaluation as ``nf_to_diagram``.
    """
    units = [NFTerm(term.p, 1, term.b) for term in nf.terms for _ in range(term.m)]
    return _build_template(nf.legs, units, None)


# -- lemma-level operations on normal forms ------------------------------------


def negate_end(nf: NormalForm, j: int, ring: Ring = INTEGERS) -> NormalForm:
    """Flip bit j of every term: the effect of plugging Black-2 onto leg j."""
    if not 0 <= j < nf.legs:
        raise ValueError(f"leg {j} out of range")
    raw = [
        (t.p, t.m, t.b[:j] + ("1" if t.b[j] == "0" else "0") + t.b[j + 1 :])
        for t in nf.terms
    ]
    return _combine(nf.legs, raw, ring)


def trace_ends(nf: NormalForm, j: int, k: int, ring: Ring = INTEGERS) -> NormalForm:
    """Contract legs j and k with the metric: keep terms with equal bits there."""
    if j == k or not (0 <= j < nf.legs and 0 <= k < nf.legs):
        raise ValueError(f"cannot trace legs {j} and {k}")
    lo, hi = sorted((j, k))
    raw = [
        (t.p, t.m, t.b[:lo] + t.b[lo + 1 : hi] + t.b[hi + 1 :])
        for t in nf.terms
        if t.b[j] == t.b[k]
    ]
    return _combine(nf.legs - 2, raw, ring)


def absorb_zero(nf: NormalForm) -> NormalForm:
    """Juxtaposing the nullary Black vertex annihilates every term."""
    return NormalForm(nf.legs, ())


def plug_normal_forms(
    a: NormalForm,
    b: NormalForm,
    pairing: Iterable[tuple[int, int]],
    ring: Ring = INTEGERS,
) -> NormalForm:
    """Plug two normal forms: juxtapose, then trace each paired leg pair."""
    pairs = list(pairing)
    a_used = [i for i, _ in pairs]
    b_used = [j for _, j in pairs]
    for used, legs, name in ((a_used, a.legs, "first"), (b_used, b.legs, "second")):
        for leg in used:
            if not 0 <= leg < legs:
                raise ValueError(f"{name} normal form has no leg {leg}")
        if len(set(used)) != len(used):
            raise ValueError(f"duplicated {name}-side leg in pairing")
    raw = [
        (ta.p ^ tb.p, ta.m * tb.m, ta.b + tb.b)
        for ta in a.terms
        for tb in b.terms
    ]
    result = _combine(a.legs + b.legs, raw, ring)
    labels = list(range(a.legs + b.legs))
    for i, j in pairs:
        x, y = labels.index(i), labels.index(a.legs + j)
        result = trace_ends(result, x, y, ring)
        labels = [v for v in labels if v not in (i, a.legs + j)]
    return result


def permute_legs(nf: NormalForm, order: Sequence[int]) -> NormalForm:
    """Reorder legs so that new leg k is old leg ``order[k]``."""
    if sorted(order) != list(range(nf.legs)):
        raise ValueError("order must be a permutation of the legs")
    terms = sorted(
        (NFTerm(t.p, t.m, "".join(t.b[old] for old in order)) for t in nf.terms),
        key=lambda t: (t.b, t.p),
    )
    return NormalForm(nf.legs, tuple(terms))


def reduce_mod(nf: NormalForm, n: int) -> NormalForm:
    """Reduce coefficients to least positive residues mod n (signs fold in)."""
    if n < 1:
        raise ValueError("modulus must be at least 1")
    return _combine(nf.legs, [tuple(t) for t in nf.terms], IntegersMod(n))


def generator_nf(kind: VertexKind) -> NormalForm:
    """The normal form of a single generator vertex with all legs out."""
    return nf_of_tensor(generator_tensor(kind), INTEGERS)


def wire_nf() -> NormalForm:
    """The normal form of a bare wire (the metric)."""
    return NormalForm(2, (NFTerm(0, 1, "00"), NFTerm(0, 1, "11")))


def circle_nf() -> NormalForm:
    """The scalar 2 carried by a closed circle."""
    return NormalForm(0, (NFTerm(0, 2, ""),))


def scalar_one_nf() -> NormalForm:
    return NormalForm(0, (NFTerm(0, 1, ""),))


# -- normal form recognition ---------------------------------------------------


def is_normal_form(g: Diagram) -> NormalForm | None:
    """Parse a diagram against the normal-form template.

    Returns the template's data when the diagram matches it exactly (up to
    internal wire ordering), None otherwise.  Total: never raises on a
    well-formed diagram.
    """
    if validate(g) or g.circles or g.has_crossings():
        return None
    if not g.is_fully_wired():
        return None
    partner = g.port_partner()
    legs = len(g.boundary)
    used: set[int] = set()

    def black_arity(vid: int) -> int | None:
        kind = g.vertices.get(vid)
        return kind.arity if isinstance(kind, Black) else None

    # Tops: the unique neighbor vertex of each leg.
    tops: list[int] = []
    for j in range(legs):
        port = partner.get((BOUNDARY, j))
        if port is None or port[0] == BOUNDARY:
            return None
        vid = port[0]
        if black_arity(vid) is None or vid in used:
            return None
        tops.append(vid)
        used.add(vid)

    whites = [vid for vid, kind in g.vertices.items() if isinstance(kind, White)]

    if not whites:
        # Only the q = 0 template has no White vertices: a lone nullary Black
        # besides the unary tops.
        rest = [vid for vid in g.vertices if vid not in used]
        if len(rest) != 1 or black_arity(rest[0]) != 0:
            return None
        if any(black_arity(t) != 1 for t in tops):
            return None
        if len(g.edges) != legs:
            return None
        return NormalForm(legs, ())

    # Each top's other ports must all lead to White vertices; collect the
    # wiring (term vertex, leg) while rejecting parallel wires to one top.
    top_of = {vid: j for j, vid in enumerate(tops)}
    zeros_of_white: dict[int, set[int]] = {}
    for j, vid in enumerate(tops):
        arity = black_arity(vid)
        assert arity is not None
        for k in range(arity):
            other = partner.get((vid, k))
            if other is None:
                return None
            if other == (BOUNDARY, j):
                continue
            if other[0] == BOUNDARY or not isinstance(g.vertices.get(other[0]), White):
                return None
            wired = zeros_of_white.setdefault(other[0], set())
            if j in wired:
                return None
            wired.add(j)

    term_vertices = sorted(
        set(zeros_of_white)
        | {vid for vid in whites if g.vertices[vid].arity == 1}  # type: ignore[union-attr]
    )
    q = len(term_vertices)

    parsed: list[tuple[int, int, str]] = []
    backbone: int | None = None
    backbone_ports: set[int] = set()
    for vid in term_vertices:
        if vid in used:
            return None
        used.add(vid)
        kind = g.vertices[vid]
        assert isinstance(kind, White)
        zeros = zeros_of_white.get(vid, set())
        if kind.arity != 1 + len(zeros):
            return None
        down_ports = [
            k for k in range(kind.arity) if partner.get((vid, k), (BOUNDARY, -1))[0] not in top_of
        ]
        if len(down_ports) != 1:
            return None

        # Walk the chain toward the backbone: at most one sign changer and at
        # most one multiplicity gadget, in either order.
        sign_p = 1
        mult = 1
        current = partner.get((vid, down_ports[0]))
        while True:
            if current is None or current[0] == BOUNDARY:
                return None
            cvid, cport = current
            ckind = g.vertices[cvid]
            if isinstance(ckind, White):
                if ckind.arity != 2 or cvid in term_vertices or sign_p == 0 or cvid in used:
                    return None
                sign_p = 0
                used.add(cvid)
                current = partner.get((cvid, 1 - cport))
                continue
            if not isinstance(ckind, Black):
                return None
            if ckind.arity == 2:
                gadget = _parse_gadget(g, partner, cvid, cport, term_vertices)
                if gadget is not None:
                    if mult != 1:
                        return None
                    mult, gadget_vertices, exit_port = gadget
                    if gadget_vertices & used:
                        return None
                    used |= gadget_vertices
                    current = partner.get(exit_port)
                    continue
            # A Black vertex that is not a gadget entry terminates the chain.
            if backbone is None:
                backbone = cvid
            elif backbone != cvid:
                return None
            if cport in backbone_ports:
                return None
            backbone_ports.add(cport)
            break

        b = "".join("0" if j in zeros else "1" for j in range(legs))
        parsed.append((sign_p, mult, b))

    if backbone is None or black_arity(backbone) != q or backbone in used:
        return None
    used.add(backbone)
    if len(backbone_ports) != q:
        return None
    if used != set(g.vertices):
        return None

    terms = sorted((NFTerm(p, m, b) for p, m, b in parsed), key=lambda t: (t.b, t.p))
    if len({t.b for t in terms}) != len(terms):
        return None
    try:
        return NormalForm(legs, tuple(terms))
    except ValueError:
        return None


def _parse_gadget(
    g: Diagram,
    partner: dict[Port, Port],
    entry_vid: int,
    entry_port: int,
    term_vertices: list[int],
) -> tuple[int, set[int], Port] | None:
    """Try to read a multiplicity gadget starting at a Black-2 entry vertex.

    Returns (m, consumed vertex ids, exit port to continue the walk from), or
    None when the shape doesn't match.
    """

    def black_of(port: Port | None, arity_min: int) -> tuple[int, int] | None:
        if port is None or port[0] == BOUNDARY:
            return None
        kind = g.vertices[port[0]]
        if not isinstance(kind, Black) or kind.arity < arity_min:
            return None
        return port

    inner_a = black_of(partner.get((entry_vid, 1 - entry_port)), 3)
    if inner_a is None:
        return None
    a_vid, a_port = inner_a
    m = g.vertices[a_vid].arity - 1  # type: ignore[union-attr]
    b_vid: int | None = None
    b_ports: set[int] = set()
    for k in range(m + 1):
        if k == a_port:
            continue
        other = partner.get((a_vid, k))
        if other is None or other[0] == BOUNDARY:
            return None
        if b_vid is None:
            b_vid = other[0]
            if not isinstance(g.vertices[b_vid], Black) or g.vertices[b_vid].arity != m + 1:
                return None
            if b_vid == a_vid or b_vid in term_vertices:
                return None
        if other[0] != b_vid or other[1] in b_ports:
            return None
        b_ports.add(other[1])
    assert b_vid is not None
    leftover = [k for k in range(m + 1) if k not in b_ports]
    if len(leftover) != 1:
        return None
    exit_entry = partner.get((b_vid, leftover[0]))
    if exit_entry is None or exit_entry[0] == BOUNDARY:
        return None
    e_vid, e_port = exit_entry
    kind = g.vertices[e_vid]
    if not isinstance(kind, Black) or kind.arity != 2 or e_vid in (entry_vid, a_vid, b_vid):
        return None
    return m, {entry_vid, a_vid, b_vid, e_vid}, (e_vid, 1 - e_port)


# -- crossing elimination -------------------------------------------------------


def _splice_crossing(g: Diagram, vid: int) -> Diagram:
    """Replace one crossing vertex by the template of its normal form."""
    kind = g.vertices[vid]
    if not isinstance(kind, Crossing):
        raise DiagramError(f"vertex {vid} is not a crossing")
    base = len(g.boundary)
    vertices = {w: k for w, k in g.vertices.items() if w != vid}
    edges = []
    for p, q in g.edges:
        p2 = (BOUNDARY, base + p[1]) if p[0] == vid else p
        q2 = (BOUNDARY, base + q[1]) if q[0] == vid else q
        edges.append((p2, q2))
    opened = Diagram(vertices, tuple(edges), g.boundary + ("out",) * 4, g.circles)
    template = nf_to_diagram(nf_of_tensor(generator_tensor(kind)))
    return plug(opened, template, [(base + k, k) for k in range(4)])


def eliminate_crossings(g: Diagram) -> Diagram:
    """Rewrite every crossing into its crossing-free normal-form template.

    Crossing-free diagrams come back unchanged.
    """
    result = g
    for vid in sorted(v for v, k in g.vertices.items() if isinstance(k, Crossing)):
        result = _splice_crossing(result, vid)
    return result


# -- normalization --------------------------------------------------------------


@dataclass(frozen=True)
class TraceStep:
    step: str
    before: Diagram
    after: Diagram


@dataclass(frozen=True)
class RewriteTrace:
    steps: tuple[TraceStep, ...]


@dataclass
class _FoldState:
    """Bookkeeping for the generator fold.

    Accumulator legs are labeled (edge index, endpoint side); an edge whose
    two labels are both present is ready to be traced.
    """

    diagram: Diagram
    ring: Ring
    acc: NormalForm
    labels: list[tuple[int, int]]
    absorbed: set[int]
    wires_done: set[int]
    circles_left: int

    def side_of(self) -> dict[Port, tuple[int, int]]:
        sides: dict[Port, tuple[int, int]] = {}
        for index, (p, q) in enumerate(self.diagram.edges):
            sides[p] = (index, 0)
            sides[q] = (index, 1)
        return sides

    def done(self) -> bool:
        bare = {
            e
            for e, (p, q) in enumerate(self.diagram.edges)
            if p[0] == BOUNDARY and q[0] == BOUNDARY
        }
        return (
            self.absorbed == set(self.diagram.vertices)
            and self.wires_done == bare
            and self.circles_left == 0
            and len(self.labels) == len(self.diagram.boundary)
        )

    def untouched(self) -> bool:
        return not self.absorbed and not self.wires_done and self.circles_left == self.diagram.circles


def _final_diagram(state: _FoldState) -> Diagram:
    """Permute the accumulator to boundary order and build the output."""
    g = state.diagram
    sides = state.side_of()
    order = []
    for position in range(len(g.boundary)):
        e, s = sides[(BOUNDARY, position)]
        p, q = g.edges[e]
        if p[0] == BOUNDARY and q[0] == BOUNDARY:
            order.append(state.labels.index((e, s)))
        else:
            order.append(state.labels.index((e, 1 - s)))
    return nf_to_diagram(permute_legs(state.acc, order), dirs=g.boundary)


def _snapshot(state: _FoldState) -> Diagram:
    """An eval-preserving diagram for the fold's current position."""
    if state.untouched():
        return state.diagram
    if state.done():
        return _final_diagram(state)
    g = state.diagram
    acc_diagram = nf_to_diagram(state.acc)
    offset = max(g.vertices, default=-1) + 1
    vertices: dict[int, VertexKind] = {
        vid: kind for vid, kind in g.vertices.items() if vid not in state.absorbed
    }
    for vid, kind in acc_diagram.vertices.items():
        vertices[vid + offset] = kind

    label_index = {label: i for i, label in enumerate(state.labels)}
    segments: list[tuple[object, object]] = []
    junctions: set = set()
    for e, (p, q) in enumerate(g.edges):
        have = [s for s in (0, 1) if (e, s) in label_index]
        endpoints = (p, q)
        if not have:
            if any(pt[0] != BOUNDARY and pt[0] in state.absorbed for pt in endpoints):
                continue  # traced away
            segments.append((_host_point(endpoints[0]), _host_point(endpoints[1])))
        elif len(have) == 1:
            s = have[0]
            marker = ("acc", label_index[(e, s)])
            junctions.add(marker)
            segments.append((marker, _host_point(endpoints[1 - s])))
        elif endpoints[0][0] == BOUNDARY:
            for s in (0, 1):
                marker = ("acc", label_index[(e, s)])
                junctions.add(marker)
                segments.append((marker, _host_point(endpoints[s])))
        else:
            markers = tuple(("acc", label_index[(e, s)]) for s in (0, 1))
            junctions.update(markers)
            segments.append(markers)
    for ap, aq in acc_diagram.edges:
        segments.append((_acc_point(ap, offset), _acc_point(aq, offset)))

    wires, extra = _resolve_wires(segments, junctions)

    def back(point: object) -> Port:
        assert isinstance(point, tuple)
        if point[0] == "b":
            return (BOUNDARY, point[1])
        return point  # already a vertex port

    edges = tuple((back(p), back(q)) for p, q in wires)
    return Diagram(vertices, edges, g.boundary, state.circles_left + extra)


def _host_point(endpoint: Port) -> object:
    return ("b", endpoint[1]) if endpoint[0] == BOUNDARY else endpoint


def _acc_point(endpoint: Port, offset: int) -> object:
    if endpoint[0] == BOUNDARY:
        return ("acc", endpoint[1])
    return (endpoint[0] + offset, endpoint[1])


def normalize(
    g: Diagram,
    ring: Ring = INTEGERS,
    want_trace: bool = False,
    leg_cap: int = DEFAULT_LEG_CAP,
) -> tuple[Diagram, RewriteTrace | None]:
    """Rewrite a diagram into normal form by the constructive procedure.

    Crossings are eliminated first, then every generator's normal form is
    folded into an accumulator following the wiring (juxtapose, then trace
    each closed edge), and the result is rendered through the template.  The
    output always satisfies :func:`is_normal_form`.  With ``want_trace`` the
    returned trace lists every step as a pair of whole diagrams with equal
    evaluation.
    """
    errors = validate(g)
    if errors:
        raise DiagramError("; ".join(errors))
    if not g.is_fully_wired():
        raise DiagramError("cannot normalize a diagram with unwired boundary legs")
    if len(g.boundary) > leg_cap:
        raise LegCapError(f"diagram has {len(g.boundary)} open legs (cap {leg_cap})")

    steps: list[TraceStep] = []
    current = g
    for vid in sorted(v for v, k in g.vertices.items() if isinstance(k, Crossing)):
        spliced = _splice_crossing(current, vid)
        if want_trace:
            steps.append(TraceStep("crossing-elim", current, spliced))
        current = spliced

    state = _FoldState(
        diagram=current,
        ring=ring,
        acc=scalar_one_nf(),
        labels=[],
        absorbed=set(),
        wires_done=set(),
        circles_left=current.circles,
    )
    sides = state.side_of()

    def emit(name: str, before: Diagram | None) -> Diagram | None:
        if not want_trace:
            return None
        after = _snapshot(state)
        assert before is not None
        steps.append(TraceStep(name, before, after))
        return after

    def trace_ready(cursor: Diagram | None) -> Diagram | None:
        while True:
            present = set(state.labels)
            ready = sorted(
                e for e, _ in present if ((e, 0) in present and (e, 1) in present)
            )
            ready = [
                e
                for e in ready
                if not all(pt[0] == BOUNDARY for pt in state.diagram.edges[e])
            ]
            if not ready:
                return cursor
            e = ready[0]
            i, j = state.labels.index((e, 0)), state.labels.index((e, 1))
            state.acc = trace_ends(state.acc, i, j, ring)
            state.labels = [lab for lab in state.labels if lab[0] != e]
            cursor = emit("trace", cursor)

    cursor: Diagram | None = current if want_trace else None

    def open_legs_after(vid: int) -> int:
        added = [sides[(vid, k)] for k in range(port_count(current.vertices[vid]))]
        future = set(state.labels) | set(added)
        closes = {e for e, s in future if (e, 0) in future and (e, 1) in future}
        closes = {
            e
            for e in closes
            if not all(pt[0] == BOUNDARY for pt in current.edges[e])
        }
        return len(state.labels) + len(added) - 2 * len(closes)

    pending = set(current.vertices)
    while pending:
        vid = min(pending, key=lambda v: (open_legs_after(v), v))
        pending.discard(vid)
        kind = current.vertices[vid]
        gen = nf_of_tensor(generator_tensor(kind, ring), ring)
        state.acc = plug_normal_forms(state.acc, gen, [], ring)
        state.labels = state.labels + [
            sides[(vid, k)] for k in range(port_count(kind))
        ]
        state.absorbed.add(vid)
        cursor = emit("generator-nf", cursor)
        cursor = trace_ready(cursor)

    for e, (p, q) in enumerate(current.edges):
        if p[0] == BOUNDARY and q[0] == BOUNDARY:
            state.acc = plug_normal_forms(state.acc, wire_nf(), [], ring)
            state.labels = state.labels + [(e, 0), (e, 1)]
            state.wires_done.add(e)
            cursor = emit("plugging", cursor)

    while state.circles_left:
        state.acc = plug_normal_forms(state.acc, circle_nf(), [], ring)
        state.circles_left -= 1
        cursor = emit("plugging", cursor)

    out = _final_diagram(state)
    if want_trace and not steps and not (out == current):
        steps.append(TraceStep("plugging", current, out))
    return out, (RewriteTrace(tuple(steps)) if want_trace else None)
