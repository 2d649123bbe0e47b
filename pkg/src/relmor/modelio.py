"""Model file ingestion and emission.

Two documented formats, both versioned:

dense text (``relmor-dense v1``)
    First non-comment line: ``n m``.  Then ``n`` rows of A (``n`` values
    each), ``n`` rows of B (``m`` values), ``m`` rows of C (``n`` values),
    ``m`` rows of D (``m`` values), whitespace-separated.  Lines starting
    with ``#`` are ignored on load; :func:`save_model` emits the canonical
    form (shortest round-trip float repr, single spaces, one header
    comment), so load -> save is byte-stable.

sparse triplet manifest (``relmor-sparse v1``)
    A JSON manifest with keys ``format`` (``"relmor-sparse-v1"``), ``n``,
    ``m``, and per-matrix file names ``A``, ``B``, ``C``, ``D`` relative to
    the manifest directory.  Each matrix file holds coordinate triplets
    ``row col value`` (1-based indices); omitted entries are zero.  A
    missing ``D`` key means ``D = 0``.
"""

import json
from pathlib import Path

import numpy as np

from .exceptions import ModelFormatError
from .sstools import StateSpace

__all__ = ["load_model", "save_model", "load_dense", "load_sparse_manifest"]

_DENSE_HEADER = "# relmor-dense v1"


def _parse_row(line, lineno, expected, path):
    parts = line.split()
    if len(parts) != expected:
        raise ModelFormatError(
            f"{path}:{lineno}: expected {expected} values, got {len(parts)}"
        )
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise ModelFormatError(f"{path}:{lineno}: {exc}") from exc


def load_dense(path):
    """Load a model from the dense text format."""
    path = Path(path)
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            rows.append((lineno, line))
    if not rows:
        raise ModelFormatError(f"{path}: empty model file")
    lineno, header = rows[0]
    parts = header.split()
    if len(parts) != 2:
        raise ModelFormatError(f"{path}:{lineno}: header must be 'n m', got {header!r}")
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ModelFormatError(f"{path}:{lineno}: {exc}") from exc
    if n < 1 or m < 1:
        raise ModelFormatError(f"{path}:{lineno}: need n >= 1 and m >= 1, got n={n} m={m}")
    need = n + n + m + m
    body = rows[1:]
    if len(body) != need:
        raise ModelFormatError(
            f"{path}: expected {need} matrix rows for n={n}, m={m}, got {len(body)}"
        )
    widths = [n] * n + [m] * n + [n] * m + [m] * m
    data = [
        _parse_row(line, lineno, width, path)
        for (lineno, line), width in zip(body, widths)
    ]
    A = np.array(data[:n], dtype=float).reshape(n, n)
    B = np.array(data[n : 2 * n], dtype=float).reshape(n, m)
    C = np.array(data[2 * n : 2 * n + m], dtype=float).reshape(m, n)
    D = np.array(data[2 * n + m :], dtype=float).reshape(m, m)
    return StateSpace(A, B, C, D)


def _load_coordinate(path, shape):
    M = np.zeros(shape)
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ModelFormatError(
                    f"{path}:{lineno}: expected 'row col value', got {line!r}"
                )
            try:
                i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError as exc:
                raise ModelFormatError(f"{path}:{lineno}: {exc}") from exc
            if not (1 <= i <= shape[0] and 1 <= j <= shape[1]):
                raise ModelFormatError(
                    f"{path}:{lineno}: index ({i}, {j}) outside {shape[0]}x{shape[1]}"
                )
            M[i - 1, j - 1] = v
    return M


def load_sparse_manifest(path):
    """Load a model from a sparse triplet manifest."""
    path = Path(path)
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: invalid JSON manifest: {exc}") from exc
    if manifest.get("format") != "relmor-sparse-v1":
        raise ModelFormatError(
            f"{path}: unsupported manifest format {manifest.get('format')!r}"
        )
    try:
        n, m = int(manifest["n"]), int(manifest["m"])
    except (KeyError, ValueError) as exc:
        raise ModelFormatError(f"{path}: manifest must carry integer n and m: {exc}") from exc
    shapes = {"A": (n, n), "B": (n, m), "C": (m, n), "D": (m, m)}
    mats = {}
    for key, shape in shapes.items():
        if key not in manifest:
            if key == "D":
                mats[key] = np.zeros(shape)
                continue
            raise ModelFormatError(f"{path}: manifest missing matrix entry {key!r}")
        ref = path.parent / manifest[key]
        if not ref.is_file():
            raise ModelFormatError(f"{path}: referenced file {ref} does not exist")
        mats[key] = _load_coordinate(ref, shape)
    return StateSpace(mats["A"], mats["B"], mats["C"], mats["D"])


def load_model(path, format="auto"):
    """Load a state-space model from a file.

    Parameters
    ----------
    path : str or Path
    format : {"auto", "dense", "sparse"}
        "auto" treats ``.json`` files as sparse manifests and everything
        else as dense text.

    Raises
    ------
    ModelFormatError
        On parse failures; the message carries file and line number.
    FileNotFoundError
        If the file does not exist.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"model file {path} does not exist")
    if format == "auto":
        format = "sparse" if path.suffix.lower() == ".json" else "dense"
    if format == "dense":
        return load_dense(path)
    if format == "sparse":
        return load_sparse_manifest(path)
    raise ValueError(f"unknown format {format!r}")


def _fmt(x):
    return repr(float(x))


def save_model(sys, path):
    """Write a model in canonical dense text form (byte-stable round trip)."""
    if sys.n < 1:
        raise ValueError("the dense file format requires n >= 1")
    lines = [_DENSE_HEADER, f"{sys.n} {sys.m}"]
    for M in (sys.A, sys.B, sys.C, sys.D):
        lines.extend(" ".join(_fmt(v) for v in row) for row in np.atleast_2d(M))
    text = "\n".join(lines) + "\n"
    Path(path).write_text(text, encoding="utf-8")
    return text
