"""Workload traces: tensors, kernels, and their serialized form.

A trace describes exactly one training iteration; multi-iteration behavior
comes from replaying it. Kernels execute serially in index order.
"""

from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass, field


class TraceError(ValueError):
    """Base class for trace validation failures."""


class MalformedInputError(TraceError):
    """Bad JSON, missing field, or wrong type."""


class DanglingTensorRefError(TraceError):
    """A kernel references an unknown tensor id."""


class NonPositiveValueError(TraceError):
    """A size or duration that must be positive is not."""


class DuplicateIdError(TraceError):
    """Two tensors share an id."""


class InvalidParamsError(TraceError):
    """Synthesis parameters outside their domain."""


class TensorKind(enum.Enum):
    GLOBAL = "global"
    INTERMEDIATE = "intermediate"
    UNSPECIFIED = None


@dataclass(frozen=True)
class TensorDescriptor:
    id: int
    size_bytes: int
    kind: TensorKind = TensorKind.UNSPECIFIED


@dataclass(frozen=True)
class KernelRecord:
    index: int
    name: str
    duration_us: int
    inputs: frozenset[int]
    outputs: frozenset[int]

    def tensors(self):
        return self.inputs | self.outputs


@dataclass(frozen=True)
class WorkloadTrace:
    tensors: dict[int, TensorDescriptor]
    kernels: tuple[KernelRecord, ...]
    metadata: dict[str, str] = field(default_factory=dict)

    def total_us(self):
        return sum(k.duration_us for k in self.kernels)


def _require(cond, err, msg):
    if not cond:
        raise err(msg)


def _as_int(obj, what):
    # bool is an int subclass; reject it explicitly
    _require(isinstance(obj, int) and not isinstance(obj, bool),
             MalformedInputError, f"{what} must be an integer, got {obj!r}")
    return obj


def parse_trace(raw) -> WorkloadTrace:
    """Parse a UTF-8 JSON byte stream (or str) into a validated trace."""
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    try:
        doc = json.loads(raw)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedInputError(f"not valid JSON: {exc}") from None
    _require(isinstance(doc, dict), MalformedInputError, "top level must be an object")
    for key in ("tensors", "kernels"):
        _require(key in doc, MalformedInputError, f"missing field {key!r}")
        _require(isinstance(doc[key], list), MalformedInputError, f"{key!r} must be a list")

    tensors: dict[int, TensorDescriptor] = {}
    for entry in doc["tensors"]:
        _require(isinstance(entry, dict), MalformedInputError, "tensor entry must be an object")
        for key in ("id", "size_bytes", "kind"):
            _require(key in entry, MalformedInputError, f"tensor missing field {key!r}")
        tid = _as_int(entry["id"], "tensor id")
        size = _as_int(entry["size_bytes"], "size_bytes")
        _require(size > 0, NonPositiveValueError, f"tensor {tid}: size_bytes must be > 0")
        kind_raw = entry["kind"]
        _require(kind_raw in ("global", "intermediate", None),
                 MalformedInputError, f"tensor {tid}: bad kind {kind_raw!r}")
        _require(tid not in tensors, DuplicateIdError, f"duplicate tensor id {tid}")
        tensors[tid] = TensorDescriptor(tid, size, TensorKind(kind_raw))

    kernels = []
    for pos, entry in enumerate(doc["kernels"]):
        _require(isinstance(entry, dict), MalformedInputError, "kernel entry must be an object")
        for key in ("index", "name", "duration_us", "inputs", "outputs"):
            _require(key in entry, MalformedInputError, f"kernel missing field {key!r}")
        idx = _as_int(entry["index"], "kernel index")
        _require(idx == pos, MalformedInputError,
                 f"kernel indices must be contiguous from 0 (position {pos} has index {idx})")
        name = entry["name"]
        _require(isinstance(name, str), MalformedInputError, "kernel name must be a string")
        dur = _as_int(entry["duration_us"], "duration_us")
        _require(dur > 0, NonPositiveValueError, f"kernel {idx}: duration_us must be > 0")
        refs = {}
        for key in ("inputs", "outputs"):
            _require(isinstance(entry[key], list), MalformedInputError, f"{key} must be a list")
            ids = [_as_int(t, "tensor ref") for t in entry[key]]
            for t in ids:
                _require(t in tensors, DanglingTensorRefError,
                         f"kernel {idx} references unknown tensor {t}")
            refs[key] = frozenset(ids)
        _require(refs["inputs"] | refs["outputs"], MalformedInputError,
                 f"kernel {idx} touches no tensors")
        kernels.append(KernelRecord(idx, name, dur, refs["inputs"], refs["outputs"]))

    metadata = doc.get("metadata", {})
    _require(isinstance(metadata, dict), MalformedInputError, "metadata must be an object")
    meta = {str(k): str(v) for k, v in metadata.items()}
    return WorkloadTrace(tensors=tensors, kernels=tuple(kernels), metadata=meta)


def serialize_trace(trace: WorkloadTrace) -> str:
    """Canonical JSON text; parse(serialize(t)) == t byte-for-byte stable."""
    doc = {
        "tensors": [
            {"id": t.id, "size_bytes": t.size_bytes, "kind": t.kind.value}
            for t in sorted(trace.tensors.values(), key=lambda t: t.id)
        ],
        "kernels": [
            {
                "index": k.index,
                "name": k.name,
                "duration_us": k.duration_us,
                "inputs": sorted(k.inputs),
                "outputs": sorted(k.outputs),
            }
            for k in trace.kernels
        ],
        "metadata": {k: trace.metadata[k] for k in sorted(trace.metadata)},
    }
    return json.dumps(doc, indent=2) + "\n"


def _draw(dist, rng, what):
    """Draw one positive int from a constant or (lo, hi) uniform spec."""
    if isinstance(dist, int) and not isinstance(dist, bool):
        value = dist
    elif (isinstance(dist, tuple) and len(dist) == 2
          and all(isinstance(v, int) for v in dist)):
        lo, hi = dist
        if lo > hi:
            raise InvalidParamsError(f"{what}: empty range {dist}")
        value = rng.randint(lo, hi)
    else:
        raise InvalidParamsError(f"{what}: expected int or (lo, hi) tuple, got {dist!r}")
    if value <= 0:
        raise InvalidParamsError(f"{what}: values must be positive, got {value}")
    return value


def synthesize_trace(layers, act_size, weight_size, dur, seed=0) -> WorkloadTrace:
    """Deterministic training-style trace: forward then backward kernels.

    Forward kernel i reads W_i (and A_{i-1} for i > 0) and writes A_i;
    backward kernel 2*layers-1-i reads W_i and A_i and writes the weight
    gradient. Weights are global, activations and gradients intermediate.
    Size and duration specs are ints or (lo, hi) uniform ranges.
    """
    if not isinstance(layers, int) or layers <= 0:
        raise InvalidParamsError(f"layers must be a positive int, got {layers!r}")
    rng = random.Random(seed)

    # ids: weights, then activations, then gradients, each in layer order
    w_id = lambda i: i
    a_id = lambda i: layers + i
    g_id = lambda i: 2 * layers + i

    tensors = {}
    for i in range(layers):
        tensors[w_id(i)] = TensorDescriptor(
            w_id(i), _draw(weight_size, rng, "weight_size"), TensorKind.GLOBAL)
    for i in range(layers):
        tensors[a_id(i)] = TensorDescriptor(
            a_id(i), _draw(act_size, rng, "act_size"), TensorKind.INTERMEDIATE)
    for i in range(layers):
        # weight gradients mirror their weight's shape
        tensors[g_id(i)] = TensorDescriptor(
            g_id(i), tensors[w_id(i)].size_bytes, TensorKind.INTERMEDIATE)

    kernels = []
    for i in range(layers):
        inputs = {w_id(i)} if i == 0 else {w_id(i), a_id(i - 1)}
        kernels.append(KernelRecord(i, f"fwd_{i}", _draw(dur, rng, "dur"),
                                    frozenset(inputs), frozenset({a_id(i)})))
    for k in range(layers, 2 * layers):
        i = 2 * layers - 1 - k
        kernels.append(KernelRecord(k, f"bwd_{i}", _draw(dur, rng, "dur"),
                                    frozenset({w_id(i), a_id(i)}),
                                    frozenset({g_id(i)})))

    meta = {"generator": "synthetic", "layers": str(layers), "seed": str(seed)}
    return WorkloadTrace(tensors=tensors, kernels=tuple(kernels), metadata=meta)
