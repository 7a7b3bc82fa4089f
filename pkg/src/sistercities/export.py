"""GraphML and DOT serialization for external renderers."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from typing import Hashable, Mapping

from .graph import Graph

GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"

# Categorical palette for community coloring; cycles beyond its length.
PALETTE = (
    "#8e44ad", "#27ae60", "#c0392b", "#16a085", "#f39c12",
    "#2980b9", "#d35400", "#7f8c8d", "#2c3e50", "#e84393",
)


def _node_attrs(node: Hashable) -> dict[str, str]:
    attrs = {"label": str(node)}
    country = getattr(node, "country", None)
    if country:
        attrs["country"] = country
    return attrs


def to_graphml(g: Graph, node_data: Mapping[Hashable, Mapping[str, object]] | None = None) -> str:
    """GraphML document; edges always carry a ``weight`` attribute."""
    ET.register_namespace("", GRAPHML_NS)
    root = ET.Element(f"{{{GRAPHML_NS}}}graphml")
    rows = {n: {**_node_attrs(n), **(node_data or {}).get(n, {})} for n in g.nodes}
    keys = sorted({k for attrs in rows.values() for k in attrs})
    for k in keys:
        ET.SubElement(
            root, f"{{{GRAPHML_NS}}}key", id=k, attrib={"for": "node", "attr.name": k, "attr.type": "string"}
        )
    ET.SubElement(
        root, f"{{{GRAPHML_NS}}}key", id="weight", attrib={"for": "edge", "attr.name": "weight", "attr.type": "double"}
    )
    graph = ET.SubElement(root, f"{{{GRAPHML_NS}}}graph", id="G", edgedefault="undirected")
    for i, n in enumerate(g.nodes):
        el = ET.SubElement(graph, f"{{{GRAPHML_NS}}}node", id=f"n{i}")
        for k in keys:
            if k in rows[n]:
                d = ET.SubElement(el, f"{{{GRAPHML_NS}}}data", key=k)
                d.text = str(rows[n][k])
    for e, (i, j, w) in enumerate(g.edges()):
        el = ET.SubElement(graph, f"{{{GRAPHML_NS}}}edge", id=f"e{e}", source=f"n{i}", target=f"n{j}")
        d = ET.SubElement(el, f"{{{GRAPHML_NS}}}data", key="weight")
        d.text = repr(w)
    ET.indent(root)
    return ET.tostring(root, encoding="unicode", xml_declaration=True) + "\n"


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(
    g: Graph,
    communities: Mapping[Hashable, int] | None = None,
    name: str = "G",
) -> str:
    """DOT graph. With ``communities`` nodes are filled by community color."""
    lines = [f"graph {_dot_quote(name)} {{"]
    for i, n in enumerate(g.nodes):
        attrs = [f"label={_dot_quote(str(n))}"]
        if communities is not None and n in communities:
            c = communities[n]
            attrs += [f"community={c}", "style=filled", f"fillcolor={_dot_quote(PALETTE[c % len(PALETTE)])}"]
        lines.append(f"  n{i} [{', '.join(attrs)}];")
    for i, j, w in g.edges():
        weight = int(w) if float(w).is_integer() else w
        lines.append(f"  n{i} -- n{j} [weight={weight}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
