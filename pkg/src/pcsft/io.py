"""
Reading and writing operator and channel files.

An operator file is a JSON object::

    {"dim": 2,
     "entries": [[[1, 0], [0, 0]],
                 [[0, 0], [0, 0]]],
     "name": "ket0",            # optional
     "role": "density"}         # optional

Each entry is an ``[re, im]`` pair. A channel file is a JSON list of operator
records whose role, if given, is ``"kraus-block"``.
"""
import json
import math
from pathlib import Path

import numpy as np

from .exceptions import NotHermitian, NotProjector, PCSFTError, SchemaError
from .linalg import is_hermitian, is_projector, scaled_tol
from .states import check_density

ROLES = ("density", "hamiltonian", "observable", "kraus-block", "projector")


def _load_json(path):
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _number(x, where):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise SchemaError(f"{where}: expected a finite number, got {x!r}")
    return float(x)


def operator_from_record(rec, where="operator"):
    """Parse one operator record; returns ``(matrix, name, role)``."""
    if not isinstance(rec, dict):
        raise SchemaError(f"{where}: expected an object with 'dim' and 'entries'")
    unknown = set(rec) - {"dim", "entries", "name", "role"}
    if unknown:
        raise SchemaError(f"{where}: unknown keys {sorted(unknown)}")
    dim = rec.get("dim")
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise SchemaError(f"{where}.dim: expected a positive integer, got {dim!r}")
    rows = rec.get("entries")
    if not isinstance(rows, list) or len(rows) != dim:
        raise SchemaError(f"{where}.entries: expected {dim} rows")
    M = np.empty((dim, dim), dtype=np.complex128)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim:
            raise SchemaError(f"{where}.entries[{i}]: expected {dim} entries")
        for j, z in enumerate(row):
            at = f"{where}.entries[{i}][{j}]"
            if not isinstance(z, list) or len(z) != 2:
                raise SchemaError(f"{at}: expected an [re, im] pair, got {z!r}")
            M[i, j] = complex(_number(z[0], at), _number(z[1], at))
    role = rec.get("role")
    if role is not None and role not in ROLES:
        raise SchemaError(f"{where}.role: unknown role {role!r}")
    name = rec.get("name")
    if name is not None and not isinstance(name, str):
        raise SchemaError(f"{where}.name: expected a string")
    return M, name, role


def check_role(M, role, where="operator"):
    """Apply the invariants implied by ``role``."""
    try:
        if role == "density":
            check_density(M)
        elif role in ("hamiltonian", "observable"):
            if not is_hermitian(M, scaled_tol(M)):
                raise NotHermitian("operator is not Hermitian")
        elif role == "projector":
            if not is_projector(M):
                raise NotProjector("operator is not a Hermitian idempotent")
    except PCSFTError as exc:
        raise type(exc)(f"{where} (role {role}): {exc}") from exc
    return M


def load_operator(path, role=None) -> np.ndarray:
    """Load an operator file and validate it for ``role`` (or its declared role)."""
    M, _, declared = operator_from_record(_load_json(path), str(path))
    if role is not None and declared is not None and declared != role:
        raise SchemaError(f"{path}: declared role {declared!r}, expected {role!r}")
    return check_role(M, role or declared, str(path))


def load_channel(path) -> list:
    data = _load_json(path)
    if not isinstance(data, list) or not data:
        raise SchemaError(f"{path}: expected a non-empty list of kraus-block records")
    blocks = []
    for k, rec in enumerate(data):
        M, _, role = operator_from_record(rec, f"{path}[{k}]")
        if role not in (None, "kraus-block"):
            raise SchemaError(f"{path}[{k}].role: expected 'kraus-block', got {role!r}")
        blocks.append(M)
    if len({M.shape for M in blocks}) != 1:
        raise SchemaError(f"{path}: blocks have different dimensions")
    return blocks


def encode_matrix(M):
    """Nested ``[re, im]`` lists for a complex matrix or vector."""
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim == 0:
        return [float(M.real), float(M.imag)]
    return [encode_matrix(row) for row in M]


def operator_record(M, role=None, name=None) -> dict:
    M = np.asarray(M, dtype=np.complex128)
    rec = {"dim": int(M.shape[0]), "entries": encode_matrix(M)}
    if name is not None:
        rec["name"] = name
    if role is not None:
        rec["role"] = role
    return rec


def save_operator(path, M, role=None, name=None):
    Path(path).write_text(json.dumps(operator_record(M, role, name), indent=2) + "\n")


def save_channel(path, blocks, names=None):
    names = names or [None] * len(blocks)
    recs = [operator_record(V, "kraus-block", nm) for V, nm in zip(blocks, names)]
    Path(path).write_text(json.dumps(recs, indent=2) + "\n")
