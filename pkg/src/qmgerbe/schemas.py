"""JSON schemas for CLI scenario files."""

from __future__ import annotations

NUMBER = {"type": "number"}
POSITIVE = {"type": "number", "exclusiveMinimum": 0}
VECTOR = {"type": "array", "items": NUMBER, "minItems": 1}
NUM_OR_VEC = {"oneOf": [NUMBER, VECTOR]}

KERNEL = {
    "type": "object",
    "required": ["kind"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": ["free", "linear", "harmonic"]},
        "m": POSITIVE,
        "hbar": POSITIVE,
        "d": {"type": "integer", "minimum": 1},
        "F": NUM_OR_VEC,
        "omega": POSITIVE,
    },
}

POINT = {
    "type": "object",
    "required": ["q", "t"],
    "additionalProperties": False,
    "properties": {"q": NUM_OR_VEC, "t": NUMBER},
}

QUAD = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "nodes": {"type": "integer", "minimum": 3},
        "eps": {"type": "array", "items": POSITIVE, "minItems": 1},
        "half_width": POSITIVE,
        "budget": POSITIVE,
        "method": {"enum": ["damped", "rotated"]},
        "rotated_nodes": {"type": "integer", "minimum": 3},
    },
}

COMMON = {"description": {"type": "string"}, "quad": QUAD, "tol": POSITIVE}


def _obj(required, props) -> dict:
    return {
        "type": "object",
        "required": list(required),
        "additionalProperties": False,
        "properties": {**COMMON, **props},
    }


PROPAGATOR = _obj(["kernel", "p1", "p2"], {"kernel": KERNEL, "p1": POINT, "p2": POINT})

COMPOSE = _obj(
    ["kernel", "p1", "p2", "tmid"],
    {
        "kernel": KERNEL,
        "p1": POINT,
        "p2": POINT,
        "tmid": NUMBER,
        "timeslice": {"type": "array", "items": {"type": "integer", "minimum": 2}},
    },
)

TRIVIALISE = _obj(
    ["kernel", "times", "q12_grid"],
    {
        "kernel": KERNEL,
        "times": {"type": "array", "items": NUMBER, "minItems": 3, "maxItems": 3},
        "q12_grid": {
            "type": "array",
            "prefixItems": [NUMBER, NUMBER, {"type": "integer", "minimum": 1}],
            "minItems": 3,
            "maxItems": 3,
        },
        "q_ref": NUMBER,
    },
)

LOOP = {
    "type": "object",
    "required": ["kernel", "anchors", "midpoint", "times"],
    "additionalProperties": False,
    "properties": {
        "kernel": KERNEL,
        "anchors": {"type": "array", "items": NUM_OR_VEC, "minItems": 3, "maxItems": 3},
        "anchors_out": {"type": "array", "items": NUM_OR_VEC, "minItems": 3, "maxItems": 3},
        "midpoint": NUM_OR_VEC,
        "times": {"type": "array", "items": NUMBER, "minItems": 9, "maxItems": 9},
    },
}

COCYCLE = _obj(["loop"], {"loop": LOOP, "extremal": {"type": "boolean"}})

BOX_MESH = {
    "type": "object",
    "required": ["n"],
    "additionalProperties": False,
    "properties": {
        "type": {"enum": ["square", "box_surface", "box"]},
        "n": {"oneOf": [{"type": "integer", "minimum": 1}, {"type": "array", "items": {"type": "integer", "minimum": 1}}]},
        "lo": VECTOR,
        "hi": VECTOR,
    },
}

CHART = {
    "type": "object",
    "required": ["index", "lo", "hi"],
    "additionalProperties": False,
    "properties": {"index": {"type": "integer"}, "lo": VECTOR, "hi": VECTOR},
}

COVER = {
    "type": "object",
    "required": ["d", "charts"],
    "additionalProperties": False,
    "properties": {"d": {"type": "integer", "minimum": 1}, "charts": {"type": "array", "items": CHART, "minItems": 1}},
}

CONNECTION = _obj(
    ["mesh"],
    {
        "mesh": BOX_MESH,
        "cover": COVER,
        "seed": {"type": "integer"},
        "flat": {"type": "boolean"},
        "perturb": {
            "type": "object",
            "required": ["amount"],
            "additionalProperties": False,
            "properties": {"pair": {"type": "array", "items": {"type": "integer"}}, "amount": NUMBER},
        },
    },
)

POLY_TERM = {
    "type": "array",
    "prefixItems": [NUMBER, {"type": "array", "items": {"type": "integer", "minimum": 0}}],
    "minItems": 2,
    "maxItems": 2,
}

FIELD = {
    "type": "object",
    "additionalProperties": False,
    "properties": {"polynomial": {"type": "array", "items": POLY_TERM, "minItems": 1}, "vortex": NUMBER},
    "minProperties": 1,
    "maxProperties": 1,
}

STOKES = _obj(
    ["field", "mesh"],
    {"field": FIELD, "mesh": BOX_MESH, "refinements": {"type": "array", "items": {"type": "integer", "minimum": 1}}},
)

H_SPEC = {
    "type": "object",
    "required": ["uniform_total"],
    "additionalProperties": False,
    "properties": {"uniform_total": NUMBER},
}

CHARCLASS = _obj(
    ["check"],
    {
        "check": {"enum": ["closed_volume", "gauss_law", "gluing", "cocycle"]},
        "mesh": BOX_MESH,
        "field": FIELD,
        "H": {"oneOf": [H_SPEC, {"type": "array", "items": H_SPEC, "minItems": 2, "maxItems": 2}]},
        "hbar": POSITIVE,
        "g_phase": NUMBER,
        "winding": {"type": "integer"},
    },
)

SCHEMAS = {
    "propagator": PROPAGATOR,
    "compose": COMPOSE,
    "trivialise": TRIVIALISE,
    "cocycle": COCYCLE,
    "connection": CONNECTION,
    "stokes": STOKES,
    "charclass": CHARCLASS,
}
