"""Plain-text formats shared with the command line.

Vectors: one ``re im`` line per entry.  Matrices: a ``rows cols`` header,
then the entries row by row in the vector format.  Generators: a header
``n d kindA paramsA kindB paramsB`` followed by F and G as matrices; a
shift operator's params are ``re im``, a diagonal operator's param is the
literal ``knots`` and its knot vector follows G (A's knots first).
"""

import io
import os

import numpy as np

from .exceptions import InputError


def _lines(source):
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, os.PathLike) or (isinstance(source, str) and "\n" not in source
                                             and os.path.exists(source)):
        with open(source) as fh:
            text = fh.read()
    else:
        text = source
    return [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]


def _fmt(z):
    return f"{z.real!r} {z.imag!r}"


def _parse_entry(line):
    parts = line.split()
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise InputError(f"expected 're im', got {line!r}")


def format_vector(v):
    return "".join(_fmt(complex(z)) + "\n" for z in np.asarray(v).ravel())


def format_matrix(M):
    M = np.atleast_2d(np.asarray(M))
    return f"{M.shape[0]} {M.shape[1]}\n" + format_vector(M.ravel())


def parse_vector(lines):
    return np.array([_parse_entry(ln) for ln in lines], dtype=np.complex128)


def _take_matrix(lines, pos):
    try:
        rows, cols = (int(x) for x in lines[pos].split())
    except ValueError as exc:
        raise InputError(f"bad matrix header {lines[pos]!r}") from exc
    body = lines[pos + 1:pos + 1 + rows * cols]
    if len(body) != rows * cols:
        raise InputError("matrix body is truncated")
    return parse_vector(body).reshape(rows, cols), pos + 1 + rows * cols


def read_vector(source):
    """Read a vector from a path, file object or text."""
    return parse_vector(_lines(source))


def read_matrix(source):
    lines = _lines(source)
    M, end = _take_matrix(lines, 0)
    if end != len(lines):
        raise InputError("trailing data after matrix")
    return M


def write_vector(v, dest=None):
    text = format_vector(v)
    return _emit(text, dest)


def write_matrix(M, dest=None):
    return _emit(format_matrix(M), dest)


def _emit(text, dest):
    if dest is None:
        return text
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w") as fh:
            fh.write(text)
    return text


def _op_header(op):
    if op.kind == "diag":
        return "diag knots"
    return f"{op.kind} {op.param.real!r} {op.param.imag!r}"


def format_generator(gen):
    n, d = gen.F.shape
    out = io.StringIO()
    out.write(f"{n} {d} {_op_header(gen.A)} {_op_header(gen.B)}\n")
    out.write(format_matrix(gen.F.reshape(n, d)))
    out.write(format_matrix(gen.G.reshape(n, d)))
    for op in (gen.A, gen.B):
        if op.kind == "diag":
            out.write(format_vector(op.knots.values))
    return out.getvalue()


def write_generator(gen, dest=None):
    return _emit(format_generator(gen), dest)


def read_generator(source):
    """Inverse of :func:`format_generator`."""
    from .displacement import DisplacementGenerator, OperatorDescriptor

    lines = _lines(source)
    if not lines:
        raise InputError("empty generator input")
    tok = lines[0].split()
    try:
        n, d = int(tok[0]), int(tok[1])
        specs, k = [], 2
        for _ in range(2):
            kind = tok[k]
            if kind == "diag":
                specs.append((kind, None))
                k += 2
            else:
                specs.append((kind, complex(float(tok[k + 1]), float(tok[k + 2]))))
                k += 3
    except (IndexError, ValueError) as exc:
        raise InputError(f"bad generator header {lines[0]!r}") from exc
    F, pos = _take_matrix(lines, 1)
    G, pos = _take_matrix(lines, pos)
    ops = []
    for kind, param in specs:
        if kind == "diag":
            ops.append(OperatorDescriptor.diagonal(parse_vector(lines[pos:pos + n])))
            pos += n
        else:
            ops.append(OperatorDescriptor(kind, param, n=n))
    if F.shape != (n, d) and not (d == 0 and F.size == 0):
        raise InputError("F shape does not match header")
    return DisplacementGenerator(ops[0], ops[1], F.reshape(n, d), G.reshape(n, d))
