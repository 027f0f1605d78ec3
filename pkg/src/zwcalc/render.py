"""Deterministic DOT export for diagrams.

Output is a plain undirected graphviz document: Black vertices as filled
circles, White vertices as hollow circles, crossings as square "X" nodes,
boundary legs as ranked plaintext terminals.  Every list is emitted in
sorted order, so equal diagrams render to byte-identical text.
"""

from __future__ import annotations

from .diagram import BOUNDARY, Black, Crossing, Diagram, Port, White


def _node_lines(g: Diagram) -> list[str]:
    lines: list[str] = []
    for vid in sorted(g.vertices):
        kind = g.vertices[vid]
        if isinstance(kind, Black):
            attrs = (
                'shape=circle, style=filled, fillcolor=black, '
                f'fontcolor=white, label="{kind.arity}"'
            )
        elif isinstance(kind, White):
            attrs = f'shape=circle, style=filled, fillcolor=white, label="{kind.arity}"'
        else:
            strands = ";".join(f"{a}-{b}" for a, b in kind.strands)
            attrs = f'shape=square, label="X", tooltip="{strands}"'
        lines.append(f"  v{vid} [{attrs}];")
    return lines


def _endpoint(p: Port) -> str:
    return f"b{p[1]}" if p[0] == BOUNDARY else f"v{p[0]}"


def _port_label(p: Port) -> str:
    return "" if p[0] == BOUNDARY else str(p[1])


def render_dot(g: Diagram) -> str:
    """Serialize the diagram as an undirected DOT graph."""
    lines = ["graph zw {", "  rankdir=TB;"]
    if g.boundary:
        lines.append("  { rank=source;")
        for i, dir_ in enumerate(g.boundary):
            lines.append(f'    b{i} [shape=plaintext, label="{i}:{dir_}"];')
        lines.append("  }")
    lines.extend(_node_lines(g))
    for p, q in sorted(g.edges):
        label = "-".join(x for x in (_port_label(p), _port_label(q)) if x)
        suffix = f' [label="{label}"]' if label else ""
        lines.append(f"  {_endpoint(p)} -- {_endpoint(q)}{suffix};")
    for i in range(g.circles):
        lines.append(f'  circle{i} [shape=circle, label="O"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
