# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled bounded-length cycle enumeration; same contract as _cycles_py."""
import numpy as np


def enumerate_raw(Py_ssize_t n, indptr_in, indices_in, int delta):
    cdef long[::1] indptr = np.ascontiguousarray(indptr_in, dtype=np.int_)
    cdef long[::1] indices = np.ascontiguousarray(indices_in, dtype=np.int_)
    cdef long[::1] path = np.zeros(max(delta, 1), dtype=np.int_)
    cdef long[::1] cursor = np.zeros(max(delta, 1), dtype=np.int_)
    cdef char[::1] on_path = np.zeros(max(n, 1), dtype=np.int8)
    cdef Py_ssize_t s, depth, v, w, k
    out = []
    for s in range(n):
        path[0] = s
        on_path[s] = 1
        cursor[0] = indptr[s]
        depth = 1
        while depth > 0:
            v = path[depth - 1]
            k = cursor[depth - 1]
            if k >= indptr[v + 1]:
                on_path[v] = 0
                depth -= 1
                continue
            cursor[depth - 1] = k + 1
            w = indices[k]
            if w == s:
                if depth >= 2:
                    out.append(tuple([path[i] for i in range(depth)]))
            elif w > s and not on_path[w] and depth < delta:
                path[depth] = w
                cursor[depth] = indptr[w]
                on_path[w] = 1
                depth += 1
    return out
