"""Graphviz DOT and CSV exports of an edge-similarity map."""

from __future__ import annotations

import csv
import io
from typing import Mapping

from .model import DirectedEdge

GREY = "#808080"
PINK = (0xFF, 0xC0, 0xCB)
RED = (0xFF, 0x00, 0x00)


def similarity_color(s: float) -> str:
    """Grey for 0, otherwise linear from pink (s -> 0+) to red (s = 1)."""
    if s <= 0:
        return GREY
    s = min(float(s), 1.0)
    rgb = (round(p + s * (r - p)) for p, r in zip(PINK, RED))
    return "#" + "".join(f"{c:02x}" for c in rgb)


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def similarity_dot(
    sims: Mapping[DirectedEdge, float],
    reference: DirectedEdge,
    endpoints: set[str] | frozenset[str],
    name: str = "similarity",
) -> str:
    """DOT digraph with endpoints as triangles and routers as circles.

    Each edge is colored by its similarity to ``reference`` and labelled with
    the value; the reference edge is drawn bold.
    """
    nodes = sorted({x for e in sims for x in e})
    lines = [
        f"digraph {_quote(name)} {{",
        "  rankdir=LR;",
        f"  label={_quote(f'Edge similarity to {reference.src}-{reference.dst}')};",
        "  node [fontsize=10];",
    ]
    for n in nodes:
        shape = "triangle" if n in endpoints else "circle"
        lines.append(f"  {_quote(n)} [shape={shape}];")
    for e, s in sims.items():
        attrs = [f"color={_quote(similarity_color(s))}", f"label={_quote(f'{s:.2f}')}"]
        attrs.append(f"similarity={s:.6f}")
        if e == reference:
            attrs.append("penwidth=3")
        lines.append(f"  {_quote(e.src)} -> {_quote(e.dst)} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def similarity_csv(sims: Mapping[DirectedEdge, float], reference: DirectedEdge) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["edge", "reference", "similarity"])
    for e, s in sims.items():
        writer.writerow([e.label, reference.label, repr(float(s))])
    return buf.getvalue()
