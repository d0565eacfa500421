"""Pure-Python bounded-length cycle enumeration (fallback kernel)."""


def enumerate_raw(n, indptr, indices, delta):
    """All simple directed cycles of length ``2..delta`` in a CSR digraph.

    Vertices are ``0..n-1``; each cycle is reported once, rotated so that
    its smallest vertex comes first.
    """
    out = []
    indptr = list(indptr)
    indices = list(indices)
    path = []
    on_path = [False] * n

    def extend(s, v):
        for k in range(indptr[v], indptr[v + 1]):
            w = indices[k]
            if w == s:
                if len(path) >= 2:
                    out.append(tuple(path))
            elif w > s and not on_path[w] and len(path) < delta:
                path.append(w)
                on_path[w] = True
                extend(s, w)
                on_path[w] = False
                path.pop()

    for s in range(n):
        path.append(s)
        on_path[s] = True
        extend(s, s)
        on_path[s] = False
        path.pop()
    return out
