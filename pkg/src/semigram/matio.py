"""Text interchange formats: the matrix format used by the CLI and the
JSON system-description files that bundle (A, B, C).

Matrix format: first line ``rows cols``, then ``rows`` lines of ``cols``
whitespace-separated entries. Real entries are plain decimal floats; complex
entries use ``a+bi`` tokens (for example ``1.5-0.25i``). Parsing is
locale-independent: only ``.`` is accepted as the decimal separator.
"""

import json
import os

import numpy as np

from .errors import ParseError
from .linalg import as_operator
from .reduction import StateSpaceSystem

__all__ = [
    "parse_matrix",
    "format_matrix",
    "read_matrix",
    "write_matrix",
    "read_system",
]


def _parse_token(token, where):
    text = token.strip()
    if not text:
        raise ParseError("empty matrix entry %s" % where)
    try:
        if text.endswith("i") or text.endswith("I"):
            value = complex(text[:-1].replace(" ", "") + "j")
        else:
            value = complex(float(text))
    except ValueError as exc:
        raise ParseError("cannot parse matrix entry %r %s" % (token, where)) from exc
    if not (np.isfinite(value.real) and np.isfinite(value.imag)):
        raise ParseError("non-finite matrix entry %r %s" % (token, where))
    return value


def parse_matrix(text, name="matrix"):
    """Parse matrix-format text into a float64 or complex128 array."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("%s: empty matrix text" % name)
    header = lines[0].split()
    if len(header) != 2:
        raise ParseError("%s: header must be 'rows cols', got %r" % (name, lines[0]))
    try:
        rows, cols = int(header[0]), int(header[1])
    except ValueError as exc:
        raise ParseError("%s: non-integer dimensions in header" % name) from exc
    if rows < 0 or cols < 0:
        raise ParseError("%s: negative dimensions in header" % name)
    if len(lines) - 1 != rows:
        raise ParseError(
            "%s: expected %d data rows, found %d" % (name, rows, len(lines) - 1)
        )
    data = np.zeros((rows, cols), dtype=np.complex128)
    for i, line in enumerate(lines[1:]):
        tokens = line.split()
        if len(tokens) != cols:
            raise ParseError(
                "%s: row %d has %d entries, expected %d"
                % (name, i, len(tokens), cols)
            )
        for j, token in enumerate(tokens):
            data[i, j] = _parse_token(token, "at row %d col %d of %s" % (i, j, name))
    if rows and cols and not np.any(data.imag):
        return np.ascontiguousarray(data.real)
    if not (rows and cols):
        return np.zeros((rows, cols))
    return data


def _format_entry(value):
    if np.iscomplexobj(np.asarray(value)):
        return "%.17g%+.17gi" % (value.real, value.imag)
    return "%.17g" % value


def format_matrix(a):
    """Render a matrix in the text interchange format (round-trip exact)."""
    a = as_operator(a, "matrix")
    lines = ["%d %d" % a.shape]
    for row in a:
        lines.append(" ".join(_format_entry(v) for v in row))
    return "\n".join(lines) + "\n"


def read_matrix(path, name=None):
    """Read a matrix-format file."""
    name = name or os.path.basename(str(path))
    try:
        with open(path, "r", encoding="ascii") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError("cannot read matrix file %s: %s" % (path, exc)) from exc
    return parse_matrix(text, name=name)


def write_matrix(path, a):
    """Write a matrix-format file."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_matrix(a))


def _resolve_field(doc, field, base_dir):
    """A field is either an inline nested list or a path to a matrix file."""
    value = doc[field]
    if isinstance(value, str):
        path = value if os.path.isabs(value) else os.path.join(base_dir, value)
        return read_matrix(path, name="%s (%s)" % (field, value))
    try:
        return as_operator(value, name=field)
    except Exception as exc:
        raise ParseError("field %r is not a valid inline matrix: %s" % (field, exc)) from exc


def read_system(path):
    """Load a system-description JSON file into a StateSpaceSystem.

    The document must contain field ``A`` and may contain ``B``, ``C``
    (each a matrix-file path relative to the document, or an inline nested
    list) plus an optional ``labels`` list naming the modes. Missing ``B``
    or ``C`` default to the identity on the state space.

    Returns
    -------
    (system, labels) : (StateSpaceSystem, list of str or None)
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError("cannot read system file %s: %s" % (path, exc)) from exc
    except json.JSONDecodeError as exc:
        raise ParseError("system file %s is not valid JSON: %s" % (path, exc)) from exc
    if not isinstance(doc, dict):
        raise ParseError("system file %s: top level must be an object" % path)
    if "A" not in doc:
        raise ParseError("system file %s: missing required field 'A'" % path)

    base_dir = os.path.dirname(os.path.abspath(path))
    a = _resolve_field(doc, "A", base_dir)
    if a.shape[0] != a.shape[1]:
        raise ParseError("system file %s: A must be square, got %s" % (path, (a.shape,)))
    n = a.shape[0]
    b = _resolve_field(doc, "B", base_dir) if "B" in doc else np.eye(n)
    c = _resolve_field(doc, "C", base_dir) if "C" in doc else np.eye(n)

    labels = doc.get("labels")
    if labels is not None:
        if not isinstance(labels, list) or not all(isinstance(s, str) for s in labels):
            raise ParseError("system file %s: 'labels' must be a list of strings" % path)

    try:
        system = StateSpaceSystem(a, b, c)
    except Exception as exc:
        raise ParseError("system file %s: %s" % (path, exc)) from exc
    return system, labels
