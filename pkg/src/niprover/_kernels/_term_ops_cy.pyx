# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twin of term_ops_py; same encoding, same contracts.

Gains come from typed locals and C-level control flow over the interpreted
tuple walking of the pure version; term structure and results are identical.
"""


cpdef object walk(object t, dict subst):
    cdef object nxt
    while type(t) is int:
        nxt = subst.get(t)
        if nxt is None:
            return t
        t = nxt
    return t


cpdef bint occurs(object var, object t, dict subst):
    cdef Py_ssize_t i, n
    t = walk(t, subst)
    if type(t) is int:
        return t == var
    n = len(<tuple?>t)
    for i in range(1, n):
        if occurs(var, (<tuple?>t)[i], subst):
            return True
    return False


cpdef bint unify_terms(object a, object b, dict subst):
    cdef Py_ssize_t i, n
    a = walk(a, subst)
    b = walk(b, subst)
    if type(a) is int:
        if type(b) is int and a == b:
            return True
        if occurs(a, b, subst):
            return False
        subst[a] = b
        return True
    if type(b) is int:
        if occurs(b, a, subst):
            return False
        subst[b] = a
        return True
    n = len(<tuple?>a)
    if (<tuple?>a)[0] != (<tuple?>b)[0] or n != len(<tuple?>b):
        return False
    for i in range(1, n):
        if not unify_terms((<tuple?>a)[i], (<tuple?>b)[i], subst):
            return False
    return True


cpdef bint unify_args(tuple args_a, tuple args_b, dict subst):
    cdef Py_ssize_t i, n = len(args_a)
    if n != len(args_b):
        return False
    for i in range(n):
        if not unify_terms(args_a[i], args_b[i], subst):
            return False
    return True


cpdef object apply_subst(object t, dict subst):
    cdef Py_ssize_t i, n
    cdef list parts
    t = walk(t, subst)
    if type(t) is int:
        return t
    n = len(<tuple?>t)
    if n == 1:
        return t
    parts = [(<tuple?>t)[0]]
    for i in range(1, n):
        parts.append(apply_subst((<tuple?>t)[i], subst))
    return tuple(parts)


cpdef dict resolve_subst(dict subst):
    cdef dict out = {}
    for v, rhs in subst.items():
        out[v] = apply_subst(rhs, subst)
    return out


cpdef object shift_vars(object t, int offset):
    cdef Py_ssize_t i, n
    cdef list parts
    if type(t) is int:
        return t + offset
    n = len(<tuple?>t)
    if n == 1:
        return t
    parts = [(<tuple?>t)[0]]
    for i in range(1, n):
        parts.append(shift_vars((<tuple?>t)[i], offset))
    return tuple(parts)


cdef object _canon_term(object t, dict mapping):
    cdef Py_ssize_t i, n
    cdef object idx
    cdef list parts
    if type(t) is int:
        idx = mapping.get(t)
        if idx is None:
            idx = len(mapping)
            mapping[t] = idx
        return idx
    n = len(<tuple?>t)
    if n == 1:
        return t
    parts = [(<tuple?>t)[0]]
    for i in range(1, n):
        parts.append(_canon_term((<tuple?>t)[i], mapping))
    return tuple(parts)


cpdef tuple canonicalize_args(object args_lists):
    cdef dict mapping = {}
    cdef list out = []
    cdef list parts
    for args in args_lists:
        parts = []
        for a in args:
            parts.append(_canon_term(a, mapping))
        out.append(tuple(parts))
    return out, len(mapping)


cpdef int max_var(object t):
    cdef Py_ssize_t i, n
    cdef int best, m
    if type(t) is int:
        return t
    best = -1
    n = len(<tuple?>t)
    for i in range(1, n):
        m = max_var((<tuple?>t)[i])
        if m > best:
            best = m
    return best


cpdef int term_size(object t):
    cdef Py_ssize_t i, n
    cdef int total
    if type(t) is int:
        return 1
    total = 1
    n = len(<tuple?>t)
    for i in range(1, n):
        total += term_size((<tuple?>t)[i])
    return total


cpdef int term_depth(object t):
    cdef Py_ssize_t i, n
    cdef int best, d
    if type(t) is int:
        return 0
    n = len(<tuple?>t)
    if n == 1:
        return 0
    best = 0
    for i in range(1, n):
        d = term_depth((<tuple?>t)[i])
        if d > best:
            best = d
    return best


cpdef str serialize_term(object t, bint skeleton=False):
    cdef Py_ssize_t i, n
    cdef list parts
    if type(t) is int:
        return "v" if skeleton else "v%d" % t
    n = len(<tuple?>t)
    if n == 1:
        return "s%d" % (<tuple?>t)[0]
    parts = []
    for i in range(1, n):
        parts.append(serialize_term((<tuple?>t)[i], skeleton))
    return "s%d(%s)" % ((<tuple?>t)[0], ",".join(parts))
