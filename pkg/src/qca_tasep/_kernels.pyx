# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled channel application kernel.

Applies a local (phys**2 x phys**2) superoperator in place to the row-major
vectorization of a density matrix factorized as dim_left x phys x dim_right.
Semantics match qca_tasep._kernels_py.apply_superop; this version avoids the
two full-array transpose copies the numpy path needs by gathering and
scattering stride-addressed panels directly.
"""

import numpy as np

cimport numpy as cnp
from libc.stdlib cimport free, malloc

cnp.import_array()

COMPILED = True


cdef int _apply(double complex* v, const double complex* sup,
                Py_ssize_t dim_left, Py_ssize_t phys,
                Py_ssize_t dim_right) noexcept nogil:
    cdef Py_ssize_t dtot = dim_left * phys * dim_right
    cdef Py_ssize_t d2 = phys * phys
    cdef Py_ssize_t stride_tk = dim_right * dtot
    cdef Py_ssize_t stride_tb = dim_right
    cdef Py_ssize_t length, stride_v, n_fixed, stride_fixed
    # vectorize over the larger of the two untouched bra factors
    if dim_right >= dim_left:
        length = dim_right
        stride_v = 1
        n_fixed = dim_left
        stride_fixed = phys * dim_right
    else:
        length = dim_left
        stride_v = phys * dim_right
        n_fixed = dim_right
        stride_fixed = 1

    cdef double complex* buf = <double complex*> malloc(
        (d2 * length + length + 2 * d2) * sizeof(double complex))
    if buf == NULL:
        return -1
    cdef double complex* obuf = buf + d2 * length
    # row offsets of each (ket, bra) pair of the local operator indices
    cdef Py_ssize_t* rows = <Py_ssize_t*> malloc(d2 * sizeof(Py_ssize_t))
    if rows == NULL:
        free(buf)
        return -1

    cdef Py_ssize_t a, b, fixed, tk, tb, s, t, w, base, ket_off, row
    cdef double complex c
    for t in range(d2):
        rows[t] = (t // phys) * stride_tk + (t % phys) * stride_tb

    for a in range(dim_left):
        for b in range(dim_right):
            ket_off = (a * phys * dim_right + b) * dtot
            for fixed in range(n_fixed):
                base = ket_off + fixed * stride_fixed
                for t in range(d2):
                    row = base + rows[t]
                    for w in range(length):
                        buf[t * length + w] = v[row + w * stride_v]
                for s in range(d2):
                    for w in range(length):
                        obuf[w] = 0
                    for t in range(d2):
                        c = sup[s * d2 + t]
                        if c.real != 0.0 or c.imag != 0.0:
                            for w in range(length):
                                obuf[w] = obuf[w] + c * buf[t * length + w]
                    row = base + rows[s]
                    for w in range(length):
                        v[row + w * stride_v] = obuf[w]
    free(buf)
    free(rows)
    return 0


def apply_superop(data, sup, Py_ssize_t dim_left, Py_ssize_t phys,
                  Py_ssize_t dim_right):
    """In-place counterpart of the numpy fallback; see _kernels_py."""
    cdef Py_ssize_t dtot = dim_left * phys * dim_right
    cdef double complex[::1] vec = data
    if vec.shape[0] != dtot * dtot:
        raise ValueError(
            f"data has length {vec.shape[0]}, expected {dtot * dtot} for the "
            f"given dimensions"
        )
    sup_arr = np.ascontiguousarray(sup, dtype=np.complex128)
    if sup_arr.shape != (phys * phys, phys * phys):
        raise ValueError(
            f"superoperator shape {sup_arr.shape} does not match phys={phys}"
        )
    cdef double complex[:, ::1] m = sup_arr
    cdef int status
    with nogil:
        status = _apply(&vec[0], &m[0, 0], dim_left, phys, dim_right)
    if status != 0:
        raise MemoryError("could not allocate kernel work buffers")
    return data
