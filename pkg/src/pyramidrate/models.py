"""Built-in quadrant models and the JSON model-file format.

Model file schema (JSON)::

    {
      "dim": 2,
      "cone": {"normals": [[1, 0], [0, 1]]},
      "distribution": {
        "kind": "atomic",
        "atoms": [[-1, 1], [1, -1], [1, 1]],
        "probabilities": ["1/3", "1/3", "1/3"]
      },
      "start": [0, 0],
      "options": {}
    }

``probabilities`` is optional (uniform when absent).  A Gaussian law is
``{"kind": "gaussian", "mean": [0.7, 0.7]}``.  Numbers may be given as JSON
numbers or as strings holding a fraction such as ``"1/3"``.
"""
from __future__ import annotations

import hashlib
import json
import math
import numbers
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .distributions import AtomicDistribution, GaussianDistribution, validate_hypotheses
from .errors import Infeasible, ParseError
from .geometry import Pyramid

SQ2, SQ3, SQ6 = math.sqrt(2), math.sqrt(3), math.sqrt(6)
LOG2, LOG3, LOG23 = -math.log(2), -math.log(3), math.log(2 / 3)


@dataclass(frozen=True)
class QuadrantModel:
    number: int
    steps: tuple
    s10: float
    rho10: float
    s01: float
    rho01: float
    rho: float

    def distribution(self):
        return AtomicDistribution(self.steps)


# Small-step quadrant models with drift in the open quadrant, uniform weights.
QUADRANT_MODELS = (
    QuadrantModel(1, ((-1, 1), (1, -1), (1, 1)),
              LOG2, 2 * SQ2 / 3, LOG2, math.sqrt(8) / 3, math.sqrt(8) / 3),
    QuadrantModel(2, ((-1, 1), (1, -1), (1, 0), (0, 1)),
              LOG2, (1 + 2 * SQ2) / 4, LOG2, (1 + 2 * SQ2) / 4, (1 + 2 * SQ2) / 4),
    QuadrantModel(3, ((-1, 1), (1, -1), (1, 0), (0, 1), (1, 1)),
              LOG3, (1 + 2 * SQ3) / 5, LOG3, (1 + 2 * SQ3) / 5, (1 + 2 * SQ3) / 5),
    QuadrantModel(4, ((-1, 1), (1, -1), (0, 1), (1, 1)),
              LOG2, (1 + 2 * SQ2) / 4, LOG3, SQ3 / 2, (1 + 2 * SQ2) / 4),
    QuadrantModel(5, ((1, 0), (0, 1), (-1, -1), (1, 1)),
              LOG2, math.sqrt(8) / 3, LOG2, math.sqrt(8) / 3, math.sqrt(8) / 3),
    QuadrantModel(6, ((1, 1), (1, -1), (-1, 0), (0, 1)),
              LOG2, (1 + 2 * SQ2) / 4, LOG2, (1 + 2 * SQ2) / 4, (1 + 2 * SQ2) / 4),
    QuadrantModel(7, ((1, 1), (-1, 1), (0, 1), (1, 0), (0, -1)),
              LOG2, (2 + 2 * SQ2) / 5, LOG3, (1 + 2 * SQ3) / 5, (2 + 2 * SQ2) / 5),
    QuadrantModel(8, ((1, 1), (-1, 1), (0, 1), (1, -1), (0, -1)),
              LOG2, (2 + 2 * SQ2) / 5, LOG23, 2 * SQ6 / 5, 2 * SQ6 / 5),
    QuadrantModel(9, ((1, 1), (-1, 0), (0, 1), (1, 0), (0, -1)),
              LOG2, (2 + 2 * SQ2) / 5, LOG2, (2 + 2 * SQ2) / 5, (2 + 2 * SQ2) / 5),
    QuadrantModel(10, ((1, 1), (-1, 1), (1, -1), (1, 0), (0, 1), (-1, 0)),
              LOG23, (1 + 2 * SQ6) / 6, LOG3, (1 + SQ3) / 3, (1 + 2 * SQ6) / 6),
    QuadrantModel(11, ((1, 1), (-1, 1), (1, -1), (1, 0), (0, 1), (-1, -1)),
              LOG23, (1 + 2 * SQ6) / 6, LOG23, (1 + 2 * SQ6) / 6, (1 + 2 * SQ6) / 6),
    QuadrantModel(12, ((1, 1), (-1, 1), (1, -1), (1, 0), (0, 1), (-1, 0), (0, -1)),
              LOG23, (2 + 2 * SQ6) / 7, LOG23, (2 + 2 * SQ6) / 7, (2 + 2 * SQ6) / 7),
)


def quadrant_model(number):
    return QUADRANT_MODELS[number - 1]


QUADRANT = ((1.0, 0.0), (0.0, 1.0))


@dataclass
class ModelSpec:
    """A deserialized model file."""

    distribution: object
    cone: Pyramid
    start: np.ndarray
    options: dict = field(default_factory=dict)
    source: dict = field(default_factory=dict)
    hypotheses: object = None

    @property
    def dim(self):
        return self.cone.dim

    def to_dict(self):
        return {"dim": self.dim,
                "cone": {"normals": self.cone.normals.tolist()},
                "distribution": self.distribution.to_dict(),
                "start": [float(v) for v in self.start],
                "options": dict(self.options)}

    @property
    def digest(self):
        """SHA-256 of the canonical JSON form of the resolved model."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _number(value, where):
    if isinstance(value, bool):
        raise ParseError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, numbers.Real):
        return float(value)
    if isinstance(value, str):
        try:
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"{where}: cannot parse {value!r} as a number") from None
    raise ParseError(f"{where}: expected a number, got {type(value).__name__}")


def _vector(value, dim, where):
    if not isinstance(value, list) or len(value) != dim:
        raise ParseError(f"{where}: expected a list of {dim} numbers")
    return np.array([_number(v, f"{where}[{i}]") for i, v in enumerate(value)])


def _require(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"{where}: missing field '{key}'")
    return obj[key]


def model_from_dict(data):
    """Build a :class:`ModelSpec` from parsed JSON, validating the schema."""
    if not isinstance(data, dict):
        raise ParseError("model document must be a JSON object")
    dim = _require(data, "dim", "model")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ParseError("dim: expected a positive integer")
    cone = _require(data, "cone", "model")
    normals = _require(cone, "normals", "cone")
    if not isinstance(normals, list) or not normals:
        raise ParseError("cone.normals: expected a non-empty list of vectors")
    normals = [_vector(n, dim, f"cone.normals[{i}]") for i, n in enumerate(normals)]
    try:
        pyramid = Pyramid(normals)
    except Infeasible as exc:
        raise ParseError(f"cone.normals: {exc}") from None
    except ValueError as exc:
        raise ParseError(f"cone.normals: {exc}") from None

    dist = _require(data, "distribution", "model")
    kind = _require(dist, "kind", "distribution")
    if kind == "atomic":
        atoms = _require(dist, "atoms", "distribution")
        if not isinstance(atoms, list) or not atoms:
            raise ParseError("distribution.atoms: expected a non-empty list of vectors")
        atoms = [_vector(a, dim, f"distribution.atoms[{i}]") for i, a in enumerate(atoms)]
        probs = dist.get("probabilities")
        if probs is not None:
            if not isinstance(probs, list) or len(probs) != len(atoms):
                raise ParseError("distribution.probabilities: need one entry per atom")
            probs = [_number(p, f"distribution.probabilities[{i}]")
                     for i, p in enumerate(probs)]
        try:
            law = AtomicDistribution(atoms, probs)
        except ValueError as exc:
            raise ParseError(f"distribution: {exc}") from None
    elif kind == "gaussian":
        law = GaussianDistribution(_vector(_require(dist, "mean", "distribution"), dim,
                                           "distribution.mean"))
    else:
        raise ParseError(f"distribution.kind: expected 'atomic' or 'gaussian', got {kind!r}")

    start = data.get("start", [0] * dim)
    start = _vector(start, dim, "start")
    if not pyramid.contains(start):
        raise ParseError("start: point is not in the cone")
    options = data.get("options", {})
    if not isinstance(options, dict):
        raise ParseError("options: expected an object")
    spec = ModelSpec(law, pyramid, start, options, data)
    spec.hypotheses = validate_hypotheses(law, pyramid)
    return spec


def loads_model(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    return model_from_dict(data)


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return loads_model(fh.read())


def quadrant_model_dict(steps, probs=None, start=(0, 0)):
    """Model-file dictionary for a quadrant walk."""
    dist = {"kind": "atomic", "atoms": [list(s) for s in steps]}
    if probs is not None:
        dist["probabilities"] = list(probs)
    return {"dim": 2, "cone": {"normals": [list(n) for n in QUADRANT]},
            "distribution": dist, "start": list(start)}
