"""
JSON encoding of matrices, processors, programs, channels and reports.

A matrix is {"rows": r, "cols": c, "entries": [[re, im], ...]} in
row-major order; a vector is {"dim": n, "entries": [[re, im], ...]}.
Params files may use a plain number for a real entry and a gate name
("I", "X", "Y", "Z", "H") wherever a matrix is expected.

Output is deterministic: keys sorted, floats printed with 17
significant digits.
"""

import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from channel import Channel
from errors import SchemaError
from operator_core import EPS, NAMED_GATES
from processor import Processor, ProgramState
from probabilistic import MeasurementBasis
from processor_zoo import ControlledSpec

logger = logging.getLogger(__name__)


def _require(obj: Any, key: str, where: str):
    if not isinstance(obj, dict):
        raise SchemaError(f"{where} must be a JSON object")
    if key not in obj:
        raise SchemaError(f"{where} is missing required key {key!r}")
    return obj[key]


def _real(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{where} must be a number, got {value!r}")
    return float(value)


def _int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{where} must be an integer, got {value!r}")
    return value


def complex_to_json(z: complex) -> List[float]:
    return [float(np.real(z)), float(np.imag(z))]


def complex_from_json(entry: Any, where: str = "entry") -> complex:
    if isinstance(entry, (list, tuple)):
        if len(entry) != 2:
            raise SchemaError(f"{where} must be [re, im], got {entry!r}")
        return complex(_real(entry[0], where), _real(entry[1], where))
    return complex(_real(entry, where))


def matrix_to_json(m) -> Dict[str, Any]:
    m = np.asarray(m, dtype=complex)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "entries": [complex_to_json(z) for z in m.ravel()],
    }


def matrix_from_json(obj: Any, where: str = "matrix") -> np.ndarray:
    if isinstance(obj, str):
        if obj not in NAMED_GATES:
            raise SchemaError(f"{where}: unknown gate name {obj!r}; known: {', '.join(sorted(NAMED_GATES))}")
        return np.array(NAMED_GATES[obj])
    rows = _int(_require(obj, "rows", where), f"{where}.rows")
    cols = _int(_require(obj, "cols", where), f"{where}.cols")
    entries = _require(obj, "entries", where)
    if not isinstance(entries, list) or len(entries) != rows * cols:
        raise SchemaError(f"{where} declares {rows}x{cols} but lists {len(entries) if isinstance(entries, list) else 'no'} entries")
    values = [complex_from_json(e, f"{where}.entries[{i}]") for i, e in enumerate(entries)]
    return np.array(values, dtype=complex).reshape(rows, cols)


def vector_to_json(v) -> Dict[str, Any]:
    v = np.asarray(v, dtype=complex)
    return {"dim": int(v.shape[0]), "entries": [complex_to_json(z) for z in v]}


def vector_from_json(obj: Any, where: str = "vector") -> np.ndarray:
    if isinstance(obj, list):
        entries = obj
    else:
        entries = _require(obj, "entries", where)
        dim = _int(_require(obj, "dim", where), f"{where}.dim")
        if not isinstance(entries, list) or len(entries) != dim:
            raise SchemaError(f"{where} declares dimension {dim} but lists a different number of entries")
    if not entries:
        raise SchemaError(f"{where} is empty")
    return np.array([complex_from_json(e, f"{where}[{i}]") for i, e in enumerate(entries)], dtype=complex)


def processor_to_json(proc: Processor) -> Dict[str, Any]:
    return {"data_dim": proc.data_dim, "prog_dim": proc.prog_dim, "G": matrix_to_json(proc.G)}


def processor_from_json(obj: Any, check: bool = True, eps: float = EPS) -> Processor:
    m = _int(_require(obj, "data_dim", "processor"), "processor.data_dim")
    n = _int(_require(obj, "prog_dim", "processor"), "processor.prog_dim")
    g = matrix_from_json(_require(obj, "G", "processor"), "processor.G")
    return Processor(G=g, data_dim=m, prog_dim=n, check=check, eps=eps)


def program_to_json(prog: ProgramState) -> Dict[str, Any]:
    value = vector_to_json(prog.value) if prog.is_pure else matrix_to_json(prog.value)
    return {"kind": prog.kind, "value": value}


def program_from_json(obj: Any, eps: float = EPS) -> ProgramState:
    kind = _require(obj, "kind", "program")
    value = _require(obj, "value", "program")
    if kind == "pure":
        return ProgramState.pure(vector_from_json(value, "program.value"), eps)
    if kind == "mixed":
        return ProgramState.mixed(matrix_from_json(value, "program.value"), eps)
    raise SchemaError(f"program kind must be 'pure' or 'mixed', got {kind!r}")


def channel_to_json(ch: Channel) -> Dict[str, Any]:
    return {"dim": ch.dim, "tp": ch.tp, "kraus": [matrix_to_json(k) for k in ch.kraus]}


def channel_from_json(obj: Any) -> Channel:
    tp = _require(obj, "tp", "channel")
    if not isinstance(tp, bool):
        raise SchemaError("channel.tp must be a boolean")
    kraus = _require(obj, "kraus", "channel")
    if not isinstance(kraus, list):
        raise SchemaError("channel.kraus must be a list")
    ops = [matrix_from_json(k, f"channel.kraus[{i}]") for i, k in enumerate(kraus)]
    return Channel.from_kraus(ops, tp=tp)


def outcome_to_json(outcome) -> Dict[str, Any]:
    return {
        "index": outcome.outcome_index,
        "probability": outcome.probability,
        "flagged": outcome.flagged,
        "post_state": None if outcome.post_state is None else matrix_to_json(outcome.post_state),
        "post_map": channel_to_json(outcome.post_map),
    }


def controlled_spec_from_json(obj: Any) -> ControlledSpec:
    """{"unitaries": [...], "basis": [...] (optional)} for the U, Y, U' and Y' kinds."""
    unitaries = _require(obj, "unitaries", "params")
    if not isinstance(unitaries, list) or not unitaries:
        raise SchemaError("params.unitaries must be a non-empty list")
    mats = [matrix_from_json(u, f"params.unitaries[{i}]") for i, u in enumerate(unitaries)]
    bases = obj.get("basis")
    vectors = None
    if bases is not None:
        if not isinstance(bases, list):
            raise SchemaError("params.basis must be a list of vectors")
        vectors = [vector_from_json(v, f"params.basis[{i}]") for i, v in enumerate(bases)]
    return ControlledSpec(unitaries=tuple(mats), bases=None if vectors is None else tuple(vectors))


def measurement_from_json(obj: Any, eps: float = EPS):
    """{"vectors": [...]} (rank-1 projectors) or {"projectors": [...]}."""
    if isinstance(obj, dict) and "vectors" in obj:
        vectors = obj["vectors"]
        if not isinstance(vectors, list) or not vectors:
            raise SchemaError("measurement.vectors must be a non-empty list")
        return MeasurementBasis.from_vectors([vector_from_json(v, f"measurement.vectors[{i}]")
                                              for i, v in enumerate(vectors)], eps)
    projectors = _require(obj, "projectors", "measurement")
    if not isinstance(projectors, list) or not projectors:
        raise SchemaError("measurement.projectors must be a non-empty list")
    mats = [matrix_from_json(p, f"measurement.projectors[{i}]") for i, p in enumerate(projectors)]
    return MeasurementBasis(dim=mats[0].shape[0], projectors=tuple(mats), eps=eps)


def _float_text(value: float) -> str:
    """17 significant digits; integral values keep a trailing ".0"."""
    if not math.isfinite(value):
        raise ValueError(f"float {value!r} is not JSON compliant")
    text = "%.17g" % value
    if "." not in text and "e" not in text:
        text += ".0"
    return text


def _encode(obj: Any, indent: Optional[int], depth: int) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(int(obj))
    if isinstance(obj, float):
        return _float_text(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        if not all(isinstance(key, str) for key in obj):
            raise TypeError("JSON object keys must be strings")
        colon = ":" if indent is None else ": "
        parts = [f"{json.dumps(key)}{colon}{_encode(obj[key], indent, depth + 1)}" for key in sorted(obj)]
        return _wrap("{", parts, "}", indent, depth)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return _wrap("[", [_encode(item, indent, depth + 1) for item in obj], "]", indent, depth)
    raise TypeError(f"object of type {type(obj).__name__} is not JSON serializable")


def _wrap(opening: str, parts: List[str], closing: str, indent: Optional[int], depth: int) -> str:
    if indent is None:
        return opening + ",".join(parts) + closing
    inner = "\n" + " " * (indent * (depth + 1))
    return opening + inner + ("," + inner).join(parts) + "\n" + " " * (indent * depth) + closing


def dumps(obj: Any, fmt: str = "json") -> str:
    """Deterministic JSON text; ``pretty`` indents, ``json`` is compact.

    Keys are sorted and floats carry 17 significant digits, so equal
    payloads give byte-identical text that parses back to the same values.
    """
    if fmt == "pretty":
        return _encode(obj, 2, 0)
    if fmt == "json":
        return _encode(obj, None, 0)
    raise SchemaError(f"unknown output format {fmt!r}")


def load_json(path) -> Any:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path} is not valid JSON: {e}") from e
    except OSError as e:
        raise SchemaError(f"cannot read {path}: {e}") from e


def write_atomic(path, text: str):
    """Write *text* to *path* through a temp file and os.replace."""
    path = Path(path)
    directory = path.parent
    directory.mkdir(parents=True, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=str(directory), suffix=".tmp", prefix=f"{path.stem}_")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp_path, str(path))
    except OSError:
        logger.error(f"Failed to write {path}")
        try:
            os.unlink(tmp_path)
        except OSError:
            pass
        raise
    logger.debug(f"Wrote {len(text)} bytes to {path}")

