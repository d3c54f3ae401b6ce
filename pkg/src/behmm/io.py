"""JSON model, query and report files.

Matrices are row-major nested lists. A complex entry is either a plain number
or a ``[re, im]`` pair, and the string ``"id"`` may stand for the identity
wherever a matrix is expected. Floats are written with ``repr``, which
round-trips bit for bit.
"""
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .entangled import HiddenModel
from .errors import ParseError, ValidationError

QUERY_KINDS = ("joint", "hidden", "recurrence", "diagonal", "validate")
DEFAULT_HORIZON = 20
DEFAULT_TOL = 1e-8


def read_json(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: cannot read file ({exc.strerror})") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _entry(value, where):
    if isinstance(value, bool):
        raise ParseError(f"{where}: expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        return complex(value[0], value[1])
    raise ParseError(f"{where}: expected a number or [re, im] pair, got {value!r}")


def parse_matrix(value, d, where):
    if value == "id":
        return np.eye(d, dtype=complex)
    if not isinstance(value, list) or len(value) != d:
        raise ParseError(f"{where}: expected {d} rows")
    out = np.zeros((d, d), dtype=complex)
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != d:
            raise ParseError(f"{where}[{i}]: expected {d} entries")
        for j, v in enumerate(row):
            out[i, j] = _entry(v, f"{where}[{i}][{j}]")
    return out


def _real_matrix(value, d, where):
    m = parse_matrix(value, d, where)
    if np.any(m.imag != 0):
        raise ParseError(f"{where}: entries must be real")
    return m.real


def _require(obj, key, where):
    if key not in obj:
        raise ParseError(f"{where}: missing field {key!r}")
    return obj[key]


def model_from_dict(obj, where="model"):
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected a JSON object")
    d = _require(obj, "d", where)
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise ParseError(f"{where}.d: expected a positive integer, got {d!r}")
    pi = _require(obj, "pi", where)
    if not isinstance(pi, list) or len(pi) != d:
        raise ParseError(f"{where}.pi: expected a list of {d} numbers")
    pi_vals = []
    for j, v in enumerate(pi):
        c = _entry(v, f"{where}.pi[{j}]")
        if c.imag:
            raise ParseError(f"{where}.pi[{j}]: must be real")
        pi_vals.append(c.real)
    Pi = _real_matrix(_require(obj, "Pi", where), d, f"{where}.Pi")
    Q = _real_matrix(_require(obj, "Q", where), d, f"{where}.Q")
    W0 = parse_matrix(obj["W0"], d, f"{where}.W0") if obj.get("W0") is not None else None
    return HiddenModel.create(pi_vals, Pi, Q, W0=W0, renormalize=bool(obj.get("renormalize", False)))


def load_model(path):
    return model_from_dict(read_json(path), str(path))


def complex_entry(z):
    z = complex(z)
    return [float(z.real), float(z.imag)]


def complex_matrix(a):
    return [[complex_entry(z) for z in row] for row in np.asarray(a)]


def model_to_dict(model):
    return {
        "d": model.d,
        "pi": [float(v) for v in model.pi],
        "Pi": [[float(v) for v in row] for row in model.Pi],
        "Q": [[float(v) for v in row] for row in model.Q],
        "W0": complex_matrix(model.W0),
    }


def dumps(obj):
    return json.dumps(jsonable(obj), indent=2, allow_nan=False) + "\n"


def jsonable(obj):
    """Recursively convert numpy values and non-finite floats for JSON output."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return complex_entry(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


@dataclass
class Query:
    kind: str
    words: list
    projections: list
    horizon: int = DEFAULT_HORIZON
    tol: float = DEFAULT_TOL
    oracle: bool = False
    channel: str = "O_underlying"


def _positive_int(v, where):
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ParseError(f"{where}: expected a positive integer, got {v!r}")
    return v


def _plural(obj, key):
    if key + "s" in obj:
        items = obj[key + "s"]
        if not isinstance(items, list):
            raise ParseError(f"query.{key}s: expected a list")
        return [(f"query.{key}s[{i}]", v) for i, v in enumerate(items)]
    if key in obj:
        return [(f"query.{key}", obj[key])]
    return []


def _operator_word(value, d, where):
    if not isinstance(value, list) or not value:
        raise ParseError(f"{where}: expected a non-empty list of [a, b] pairs")
    pairs = []
    for m, pair in enumerate(value):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ParseError(f"{where}[{m}]: expected an [a, b] pair")
        pairs.append((parse_matrix(pair[0], d, f"{where}[{m}][0]"), parse_matrix(pair[1], d, f"{where}[{m}][1]")))
    return pairs


def _hidden_word(value, d, where):
    if not isinstance(value, list) or not value:
        raise ParseError(f"{where}: expected a non-empty list of matrices")
    return [parse_matrix(a, d, f"{where}[{m}]") for m, a in enumerate(value)]


def _diagonal_word(value, d, where):
    if not isinstance(value, list) or not value:
        raise ParseError(f"{where}: expected a non-empty list of indices")
    out = []
    for m, j in enumerate(value):
        if isinstance(j, bool) or not isinstance(j, int):
            raise ParseError(f"{where}[{m}]: expected an integer index, got {j!r}")
        if not 0 <= j < d:
            raise ValidationError(f"{where}[{m}] = {j} out of range for d={d}")
        out.append(j)
    return out


def query_from_dict(obj, d, kind=None):
    """Parse a query object against model dimension ``d``.

    ``kind`` (from the subcommand) must agree with the file's ``kind`` if both
    are present.
    """
    if not isinstance(obj, dict):
        raise ParseError("query: expected a JSON object")
    file_kind = obj.get("kind")
    if file_kind is not None and file_kind not in QUERY_KINDS:
        raise ParseError(f"query.kind: expected one of {list(QUERY_KINDS)}, got {file_kind!r}")
    if kind is not None and file_kind is not None and kind != file_kind:
        raise ParseError(f"query.kind: file says {file_kind!r} but command is {kind!r}")
    kind = kind or file_kind
    if kind is None:
        raise ParseError("query: missing field 'kind'")
    parser = {"joint": _operator_word, "hidden": _hidden_word, "diagonal": _diagonal_word}.get(kind)
    words = [parser(v, d, where) for where, v in _plural(obj, "word")] if parser else []
    projections = [parse_matrix(v, d, where) for where, v in _plural(obj, "projection")]
    q = Query(kind, words, projections)
    if "horizon" in obj:
        q.horizon = _positive_int(obj["horizon"], "query.horizon")
    if "tol" in obj:
        tol = obj["tol"]
        if isinstance(tol, bool) or not isinstance(tol, (int, float)) or not tol > 0:
            raise ParseError(f"query.tol: expected a positive number, got {tol!r}")
        q.tol = float(tol)
    if "oracle" in obj:
        if not isinstance(obj["oracle"], bool):
            raise ParseError("query.oracle: expected true or false")
        q.oracle = obj["oracle"]
    if "channel" in obj:
        if obj["channel"] not in ("H", "O_underlying"):
            raise ParseError(f"query.channel: expected 'H' or 'O_underlying', got {obj['channel']!r}")
        q.channel = obj["channel"]
    if kind in ("joint", "hidden", "diagonal") and not q.words:
        raise ParseError(f"query: kind {kind!r} needs 'word' or 'words'")
    if kind == "recurrence" and not q.projections:
        raise ParseError("query: kind 'recurrence' needs 'projection' or 'projections'")
    return q
