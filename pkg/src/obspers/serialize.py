"""Versioned JSON formats with exact rationals as strings.

Every document carries {"format": "obspers/1", "kind": ...}.  Serialization
is canonical (sorted keys, two-space indent, trailing newline), so identical
values produce byte-identical files.
"""

import json
from fractions import Fraction

import numpy as np

from .calculus import Grid
from .errors import ValidationError
from .fields import PrimeField
from .metric import INF, DistanceBracket, Interleaving
from .pipelines import Bifiltration, FiniteMetricSpace, SimplicialComplex
from .stepmodule import Morphism, StepModule

FORMAT = "obspers/1"


def fr_to_str(q):
    if q == INF:
        return "inf"
    return str(Fraction(q))


def fr_from_str(s):
    if s == "inf":
        return INF
    return Fraction(s)


def _point_key(g):
    return ",".join(str(i) for i in g)


def _point_from_key(s):
    return tuple(int(x) for x in s.split(","))


def dumps(payload):
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_json(path, payload):
    with open(path, "w") as fh:
        fh.write(dumps(payload))


def read_json(path):
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise ValidationError(f"{path}: not an {FORMAT} document")
    return doc


def _expect_kind(doc, kind):
    if doc.get("kind") != kind:
        raise ValidationError(f"expected kind {kind}, found {doc.get('kind')}")


# ---------------------------------------------------------------------------
# Modules and morphisms
# ---------------------------------------------------------------------------

def module_to_json(v):
    steps = []
    for (g, axis) in sorted(v.steps):
        steps.append({"at": list(g), "axis": axis,
                      "matrix": v.steps[(g, axis)].tolist()})
    return {
        "format": FORMAT,
        "kind": "module",
        "field": {"p": v.field.p},
        "grid": [[fr_to_str(c) for c in axis] for axis in v.grid.axes],
        "dims": {_point_key(g): d for g, d in v.dims.items()},
        "steps": steps,
    }


def module_from_json(doc):
    _expect_kind(doc, "module")
    F = PrimeField(int(doc["field"]["p"]))
    grid = Grid(tuple(tuple(fr_from_str(c) for c in axis) for axis in doc["grid"]))
    dims = {_point_from_key(k): int(d) for k, d in doc["dims"].items()}
    steps = {}
    for entry in doc["steps"]:
        g = tuple(int(i) for i in entry["at"])
        mat = np.array(entry["matrix"], dtype=np.int64)
        succ = grid.successor(g, int(entry["axis"]))
        if succ is None:
            raise ValidationError(f"step at {g} axis {entry['axis']} leaves the grid")
        if mat.size == 0:
            mat = mat.reshape(dims.get(succ, 0), dims.get(g, 0))
        steps[(g, int(entry["axis"]))] = mat
    return StepModule(F, grid, dims, steps)


def morphism_to_json(m):
    return {
        "format": FORMAT,
        "kind": "morphism",
        "source": module_to_json(m.source),
        "target": module_to_json(m.target),
        "comps": {_point_key(g): c.tolist() for g, c in m.comps.items()},
    }


def morphism_from_json(doc):
    _expect_kind(doc, "morphism")
    source = module_from_json(doc["source"])
    target = module_from_json(doc["target"])
    comps = {}
    for k, rows in doc["comps"].items():
        g = _point_from_key(k)
        mat = np.array(rows, dtype=np.int64)
        if mat.size == 0:
            mat = mat.reshape(target.dims.get(g, 0), source.dims.get(g, 0))
        comps[g] = mat
    return Morphism(source, target, comps)


def interleaving_to_json(w):
    return {
        "format": FORMAT,
        "kind": "interleaving",
        "eps": fr_to_str(w.eps),
        "f": morphism_to_json(w.f),
        "g": morphism_to_json(w.g),
        "verified": w.verified,
        "violations": list(w.violations),
    }


def interleaving_from_json(doc):
    _expect_kind(doc, "interleaving")
    return Interleaving(fr_from_str(doc["eps"]),
                        morphism_from_json(doc["f"]),
                        morphism_from_json(doc["g"]),
                        bool(doc["verified"]),
                        tuple(doc.get("violations", ())))


def bracket_to_json(b):
    return {
        "format": FORMAT,
        "kind": "distance-bracket",
        "lower": fr_to_str(b.lower),
        "upper": fr_to_str(b.upper),
        "exact": b.exact,
        "witness": None if b.witness is None else interleaving_to_json(b.witness),
        "certificates": {k: (fr_to_str(v) if isinstance(v, (Fraction, float)) else v)
                         for k, v in b.certificates.items()
                         if v is not None},
    }


# ---------------------------------------------------------------------------
# Complexes, metric spaces, bifiltrations
# ---------------------------------------------------------------------------

def complex_to_json(k, values=None):
    doc = {
        "format": FORMAT,
        "kind": "complex",
        "vertices": list(k.vertices),
        "simplices": [list(s) for s in k.simplices],
    }
    if values is not None:
        doc["values"] = {str(v): [fr_to_str(x) for x in values[v]]
                         for v in k.vertices}
    return doc


def complex_from_json(doc):
    _expect_kind(doc, "complex")
    cx = SimplicialComplex(tuple(doc["vertices"]),
                           tuple(tuple(s) for s in doc["simplices"]))
    values = None
    if "values" in doc:
        by_name = {str(v): v for v in cx.vertices}
        values = {by_name[name]: tuple(fr_from_str(x) for x in vec)
                  for name, vec in doc["values"].items()}
    return cx, values


def metric_to_json(m):
    return {
        "format": FORMAT,
        "kind": "metric-space",
        "points": list(m.points),
        "distances": [[fr_to_str(x) for x in row] for row in m.distances],
    }


def metric_from_json(doc):
    _expect_kind(doc, "metric-space")
    return FiniteMetricSpace(
        tuple(doc["points"]),
        tuple(tuple(fr_from_str(x) for x in row) for row in doc["distances"]))


def bifiltration_to_json(b):
    return {
        "format": FORMAT,
        "kind": "bifiltration",
        "n_axes": b.n_axes,
        "complex": complex_to_json(b.complex),
        "grades": [[list(s), [[fr_to_str(x) for x in g] for g in b.grades[s]]]
                   for s in b.complex.simplices],
    }


def bifiltration_from_json(doc):
    _expect_kind(doc, "bifiltration")
    cx, _ = complex_from_json(doc["complex"])
    grades = {tuple(s): tuple(tuple(fr_from_str(x) for x in g) for g in gs)
              for s, gs in doc["grades"]}
    return Bifiltration(cx, grades, int(doc["n_axes"]))


def chain_manifest_to_json(term_paths, link_paths):
    return {
        "format": FORMAT,
        "kind": "chain",
        "terms": list(term_paths),
        "links": list(link_paths),
    }


def load_any(path):
    """Load a document by its kind tag; returns (kind, value)."""
    doc = read_json(path)
    kind = doc.get("kind")
    if kind == "module":
        return kind, module_from_json(doc)
    if kind == "morphism":
        return kind, morphism_from_json(doc)
    if kind == "interleaving":
        return kind, interleaving_from_json(doc)
    if kind == "complex":
        return kind, complex_from_json(doc)
    if kind == "metric-space":
        return kind, metric_from_json(doc)
    if kind == "bifiltration":
        return kind, bifiltration_from_json(doc)
    if kind == "chain":
        return kind, doc
    raise ValidationError(f"{path}: unknown kind {kind!r}")
