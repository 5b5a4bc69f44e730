"""Dense linear algebra over F_p on top of the elimination kernel.

The compiled kernel is used when it imports; setting ``REDSHIFT_PURE_PYTHON``
forces the pure-Python one.  Vectors and matrices are plain lists of ints.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("REDSHIFT_PURE_PYTHON"):
    _backend = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _backend
        BACKEND = "compiled"
    except ImportError:
        _backend = _kernels_py
        BACKEND = "python"


def rref(rows, ncols, p, backend=None):
    if not rows or not ncols:
        return [], []
    return (backend or _backend).rref(rows, ncols, p)


def rank(rows, ncols, p):
    return len(rref(rows, ncols, p)[1])


def nullspace(rows, ncols, p):
    """Basis of ``{x : rows · x = 0}`` in reduced echelon form.

    One vector per free column, in increasing column order; the vector for
    free column ``f`` has a 1 at ``f`` and zeros at the other free columns.
    """
    reduced, pivots = rref(rows, ncols, p)
    pivot_set = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivot_set:
            continue
        v = [0] * ncols
        v[f] = 1
        for row, c in zip(reduced, pivots):
            if row[f]:
                v[c] = (-row[f]) % p
        basis.append(v)
    return basis


def transpose(rows, ncols):
    return [[row[j] for row in rows] for j in range(ncols)]


def matmul(a, b, p):
    """Product of an ``m×k`` and a ``k×n`` matrix."""
    if not a or not b:
        return [[0] * (len(b[0]) if b else 0) for _ in a]
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) % p for col in bt] for row in a]


def quotient_basis(image, kernel, dim, p):
    """Vectors spanning a complement of ``span(image)`` inside ``span(kernel)``.

    ``image`` must lie in ``span(kernel)``.  The image is put in reduced
    echelon form, then each kernel vector (in the given order) is reduced
    against the growing echelon basis and kept when it survives; the kept
    vectors are the reduced ones, so the choice is deterministic.
    """
    echelon, pivots = rref(image, dim, p)
    echelon = [list(r) for r in echelon]
    pivots = list(pivots)
    kept = []
    for vec in kernel:
        v = [x % p for x in vec]
        for row, c in zip(echelon, pivots):
            f = v[c]
            if f:
                v = [(x - f * y) % p for x, y in zip(v, row)]
        lead = next((j for j, x in enumerate(v) if x), None)
        if lead is None:
            continue
        kept.append(v)
        inv = pow(v[lead], p - 2, p)
        row = [x * inv % p for x in v]
        for k, other in enumerate(echelon):
            f = other[lead]
            if f:
                echelon[k] = [(x - f * y) % p for x, y in zip(other, row)]
        echelon.append(row)
        pivots.append(lead)
    return kept
