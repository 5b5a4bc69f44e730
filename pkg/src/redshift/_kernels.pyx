# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled elimination kernels over F_p."""

from libc.stdlib cimport malloc, free


cdef long long _inv(long long a, long long p) nogil:
    cdef long long result = 1, base = a % p, e = p - 2
    while e > 0:
        if e & 1:
            result = result * base % p
        base = base * base % p
        e >>= 1
    return result


cdef Py_ssize_t _rref(long long* a, Py_ssize_t nrows, Py_ssize_t ncols,
                      long long p, Py_ssize_t* pivots) nogil:
    cdef Py_ssize_t r = 0, c, i, j, piv
    cdef long long inv, f
    cdef long long* row
    cdef long long* other
    cdef long long tmp
    for c in range(ncols):
        if r == nrows:
            break
        piv = -1
        for i in range(r, nrows):
            if a[i * ncols + c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(ncols):
                tmp = a[r * ncols + j]
                a[r * ncols + j] = a[piv * ncols + j]
                a[piv * ncols + j] = tmp
        row = a + r * ncols
        inv = _inv(row[c], p)
        if inv != 1:
            for j in range(c, ncols):
                row[j] = row[j] * inv % p
        for i in range(nrows):
            if i != r:
                other = a + i * ncols
                f = other[c]
                if f != 0:
                    for j in range(c, ncols):
                        if row[j] != 0:
                            other[j] = (other[j] - f * row[j]) % p
                            if other[j] < 0:
                                other[j] += p
        pivots[r] = c
        r += 1
    return r


def rref(rows, Py_ssize_t ncols, long long p):
    """Reduced row echelon form of ``rows`` mod ``p``; see the Python fallback."""
    cdef Py_ssize_t nrows = len(rows), i, j, rank
    cdef long long v
    if nrows == 0 or ncols == 0:
        return [], []
    cdef long long* a = <long long*> malloc(nrows * ncols * sizeof(long long))
    cdef Py_ssize_t* pivots = <Py_ssize_t*> malloc(nrows * sizeof(Py_ssize_t))
    if a == NULL or pivots == NULL:
        free(a)
        free(pivots)
        raise MemoryError()
    try:
        for i in range(nrows):
            row = rows[i]
            for j in range(ncols):
                v = row[j] % p
                a[i * ncols + j] = v
        with nogil:
            rank = _rref(a, nrows, ncols, p, pivots)
        out = [[a[i * ncols + j] for j in range(ncols)] for i in range(rank)]
        piv = [pivots[i] for i in range(rank)]
        return out, piv
    finally:
        free(a)
        free(pivots)
