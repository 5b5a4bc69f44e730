"""Pure-Python elimination kernels over F_p.

Same interface as the compiled ``_kernels`` extension; used when the
extension is not built or when ``REDSHIFT_PURE_PYTHON`` is set.
"""

from __future__ import annotations


def rref(rows, ncols, p):
    """Reduced row echelon form of ``rows`` mod ``p``.

    Returns ``(reduced, pivots)`` where ``reduced`` holds only the nonzero
    rows, each normalized to a leading 1, and ``pivots[i]`` is the column
    of the leading entry of ``reduced[i]``.
    """
    a = [[x % p for x in row] for row in rows]
    nrows = len(a)
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = None
        for i in range(r, nrows):
            if a[i][c]:
                piv = i
                break
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        row = a[r]
        inv = pow(row[c], p - 2, p)
        if inv != 1:
            for j in range(c, ncols):
                row[j] = row[j] * inv % p
        for i in range(nrows):
            if i != r:
                f = a[i][c]
                if f:
                    other = a[i]
                    for j in range(c, ncols):
                        if row[j]:
                            other[j] = (other[j] - f * row[j]) % p
        pivots.append(c)
        r += 1
    return a[:r], pivots
