"""JSON, CSV and DOT serialization.

Graph JSON::

    {"n": int, "edges": [[u, v, w], ...], "labels": [...],
     "structure": {...} | absent, "family": str, "params": {...}}

Floats are written in shortest round-trip form; exact weights as ``"p/q"``.
"""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from typing import Optional, TextIO

import numpy as np

from .embeddings import Embedding
from .graphs import DiamondStructure, Subdiamond, WeightedGraph
from .metric import MetricSpace


def encode_number(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else x.numerator
    if isinstance(x, (int, np.integer)):
        return int(x)
    return float(x)


def decode_number(x):
    if isinstance(x, str):
        return Fraction(x)
    return x


def structure_to_json(s: DiamondStructure) -> dict:
    return {
        "level": s.level,
        "weighted": s.weighted,
        "edge_level": list(s.edge_level),
        "vertex_birth": list(s.vertex_birth),
        "vertex_origin": [None if o is None else [o[0], o[1]] for o in s.vertex_origin],
        "generation": list(s.generation),
        "subdiamonds": [
            {
                "lineage": d.lineage,
                "step": d.step,
                "bottom": d.bottom,
                "top": d.top,
                "height": d.height,
                "diagonal": d.diagonal,
                "parent": d.parent,
                "children": list(d.children),
                "members": sorted(d.members),
            }
            for d in s.subdiamonds
        ],
    }


def structure_from_json(obj: dict) -> DiamondStructure:
    subs = tuple(
        Subdiamond(
            index=i,
            lineage=d["lineage"],
            step=d["step"],
            bottom=d["bottom"],
            top=d["top"],
            height=d["height"],
            members=frozenset(d["members"]),
            diagonal=d["diagonal"],
            parent=d["parent"],
            children=tuple(d["children"]),
        )
        for i, d in enumerate(obj["subdiamonds"])
    )
    return DiamondStructure(
        level=obj["level"],
        weighted=obj["weighted"],
        edge_level=tuple(obj["edge_level"]),
        vertex_birth=tuple(obj["vertex_birth"]),
        vertex_origin=tuple(None if o is None else (o[0], o[1]) for o in obj["vertex_origin"]),
        subdiamonds=subs,
    )


def graph_to_json(
    g: WeightedGraph,
    structure: Optional[DiamondStructure] = None,
    family: Optional[str] = None,
    params: Optional[dict] = None,
    rational: bool = False,
) -> dict:
    def weight(w):
        if rational and not isinstance(w, Fraction):
            w = Fraction(w)
        return encode_number(w)

    out = {"n": g.n_vertices, "edges": [[u, v, weight(w)] for u, v, w in g.edges]}
    if g.labels is not None:
        out["labels"] = list(g.labels)
    if structure is not None:
        out["structure"] = structure_to_json(structure)
    if family is not None:
        out["family"] = family
    if params is not None:
        out["params"] = params
    return out


def graph_from_json(obj: dict) -> tuple[WeightedGraph, Optional[DiamondStructure]]:
    g = WeightedGraph(
        obj["n"],
        tuple((u, v, decode_number(w)) for u, v, w in obj["edges"]),
        tuple(obj["labels"]) if obj.get("labels") is not None else None,
    )
    s = structure_from_json(obj["structure"]) if obj.get("structure") else None
    return g, s


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=False)


def write_json(obj, fh: TextIO) -> None:
    fh.write(dumps(obj))
    fh.write("\n")


def graph_to_dot(g: WeightedGraph, name: str = "G") -> str:
    lines = [f"graph {name} {{"]
    for v in range(g.n_vertices):
        label = g.label_of(v) if g.labels is not None else str(v)
        lines.append(f'  {v} [label="{label or "()"}"];')
    for u, v, w in g.edges:
        lines.append(f'  {u} -- {v} [weight="{encode_number(w)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def metric_to_csv(m: MetricSpace) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    labels = [m.label_of(i) for i in range(m.n_points)]
    writer.writerow([""] + labels)
    for i, lab in enumerate(labels):
        writer.writerow([lab] + [encode_number(x) if isinstance(x, Fraction) else repr(float(x))
                                 for x in m.dist[i]])
    return buf.getvalue()


def metric_from_csv(text: str) -> MetricSpace:
    rows = list(csv.reader(io.StringIO(text)))
    labels = rows[0][1:]
    vals = [[Fraction(x) if "/" in x else float(x) for x in row[1:]] for row in rows[1:]]
    exact = any(isinstance(x, Fraction) for row in vals for x in row)
    mat = np.array(vals, dtype=object if exact else float)
    return MetricSpace(mat, tuple(labels))


def embedding_to_csv(e: Embedding) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["point_label"] + [f"x_{i}" for i in range(e.dim)])
    for v in range(e.n_points):
        label = e.labels[v] if e.labels is not None else str(v)
        writer.writerow([label] + [repr(float(x)) for x in e.coords[v]])
    return buf.getvalue()


def embedding_from_csv(text: str, host_norm: str = "l2") -> Embedding:
    rows = list(csv.reader(io.StringIO(text)))
    labels = tuple(r[0] for r in rows[1:])
    coords = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
    if coords.size == 0:
        coords = coords.reshape(len(labels), len(rows[0]) - 1)
    return Embedding(host_norm, coords, labels)
