# cython: language_level=3
# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled search kernels: the Cython twin of ``pykernel``.

Same functions, same signatures, same canonical orderings and tie behavior;
``pykernel`` is the reference and carries the full documentation.  States are
unpacked into C integer arrays on entry.  Inputs the fast path cannot take
without risking 64-bit overflow (more than ``_MAXN`` numbers, negative or
oversized values, non-int types) delegate to the pure twin, so both backends
are observationally identical on every input.
"""

HEURISTIC_SUM = 0
HEURISTIC_MULTIPLY = 1

_OPSTRS = ("+", "-", "*", "/")

# Largest value cap per state width: with every input v <= cap, any op
# sequence stays below prod(v_i + 1) <= 2**62, so intermediates fit a long.
_CAPS = tuple(int(2.0 ** (62.0 / n)) - 1 if n else 0 for n in range(9))
_SCALAR_CAP = 2 ** 61

cdef int _MAXN = 8
cdef int _MAXOPS = 112  # C(8, 2) pairs * 4 operators


cdef object _py():
    from searchtrace._kernel import pykernel
    return pykernel


cdef int _unpack_state(object nums, long* st) except -2:
    """Fill ``st`` from ``nums`` and return its length, or -1 when the
    input needs the pure-Python fallback."""
    cdef Py_ssize_t n
    cdef int i = 0
    cdef object cap, v
    try:
        n = len(nums)
    except TypeError:
        return -1
    if n > _MAXN:
        return -1
    cap = _CAPS[n] if n > 0 else 0
    for v in nums:
        if not isinstance(v, int):
            return -1
        if v < 0 or v > cap:
            return -1
        st[i] = v
        i += 1
    return <int> n


cdef bint _fits_scalar(object v):
    if not isinstance(v, int):
        return False
    return -_SCALAR_CAP <= v <= _SCALAR_CAP


cdef inline int _emit(long* klo, long* khi, int* kop,
                      long* lhs, long* rhs, int* opc, long* res,
                      int m, long lo, long hi, int op,
                      long left, long right, long value):
    cdef int t
    for t in range(m):
        if klo[t] == lo and khi[t] == hi and kop[t] == op:
            return m  # duplicate (operands, operator) from another position pair
    klo[m] = lo
    khi[m] = hi
    kop[m] = op
    lhs[m] = left
    rhs[m] = right
    opc[m] = op
    res[m] = value
    return m + 1


cdef int _enum_c(long* st, int n, long* lhs, long* rhs, int* opc, long* res):
    """Canonical legal-op enumeration; mirrors ``pykernel.enum_ops``."""
    cdef int i, j, m = 0
    cdef long a, b, lo, hi
    cdef long klo[112]
    cdef long khi[112]
    cdef int kop[112]
    for i in range(n - 1):
        a = st[i]
        for j in range(i + 1, n):
            b = st[j]
            if a <= b:
                lo = a
                hi = b
            else:
                lo = b
                hi = a
            m = _emit(klo, khi, kop, lhs, rhs, opc, res, m, lo, hi, 0, a, b, a + b)
            m = _emit(klo, khi, kop, lhs, rhs, opc, res, m, lo, hi, 1, hi, lo, hi - lo)
            m = _emit(klo, khi, kop, lhs, rhs, opc, res, m, lo, hi, 2, a, b, a * b)
            if lo >= 1:
                if hi % lo == 0:
                    m = _emit(klo, khi, kop, lhs, rhs, opc, res, m, lo, hi, 3, hi, lo, hi // lo)
            elif hi >= 1:  # lo == 0: zero divided by anything positive
                m = _emit(klo, khi, kop, lhs, rhs, opc, res, m, lo, hi, 3, 0, hi, 0)
    return m


cdef int _child_c(long* st, int n, long lhs, long rhs, long result, long* out):
    """Stable removal of the first lhs and first rhs, result appended."""
    cdef int i, m = 0
    cdef bint took_l = False, took_r = False
    for i in range(n):
        if not took_l and st[i] == lhs:
            took_l = True
            continue
        if not took_r and st[i] == rhs:
            took_r = True
            continue
        out[m] = st[i]
        m += 1
    out[m] = result
    return m + 1


cdef long _h_sum_c(long* st, int n, long target):
    cdef long s = 0
    cdef int i
    for i in range(n):
        s += st[i]
    if target >= s:
        return target - s
    return s - target


cdef long _h_mul_c(long* st, int n, long target):
    # caller guarantees target >= 1, so d == 1 always seeds `best`
    cdef long s = 0, best = -1, d = 1, q, diff
    cdef int i
    for i in range(n):
        s += st[i]
    while d * d <= target:
        if target % d == 0:
            q = target // d
            diff = d - s if d >= s else s - d
            if best < 0 or diff < best:
                best = diff
            diff = q - s if q >= s else s - q
            if diff < best:
                best = diff
        d += 1
    return best


cdef long _h_c(int kind, long* st, int n, long target):
    if kind == HEURISTIC_SUM:
        return _h_sum_c(st, n, target)
    return _h_mul_c(st, n, target)


def enum_ops(nums):
    """All legal operations over pairs of ``nums``, in canonical order."""
    cdef long st[8]
    cdef long lhs[112]
    cdef long rhs[112]
    cdef int opc[112]
    cdef long res[112]
    cdef int n, m, i
    cdef list out
    n = _unpack_state(nums, st)
    if n < 0:
        return _py().enum_ops(nums)
    m = _enum_c(st, n, lhs, rhs, opc, res)
    out = []
    for i in range(m):
        out.append((lhs[i], rhs[i], _OPSTRS[opc[i]], res[i]))
    return out


def child_state(nums, lhs, rhs, result):
    """Remaining numbers after consuming ``lhs`` and ``rhs``: stable removal,
    result appended at the end."""
    out = list(nums)
    out.remove(lhs)
    out.remove(rhs)
    out.append(result)
    return tuple(out)


def divisors(n):
    """Positive divisors of ``n`` in ascending order (1 and n included)."""
    cdef long d, nn, q
    cdef list small, large
    if not isinstance(n, int) or n > _SCALAR_CAP:
        return _py().divisors(n)
    if n < 1:
        raise ValueError(f"divisors requires a positive int, got {n}")
    nn = n
    small = []
    large = []
    d = 1
    while d * d <= nn:
        if nn % d == 0:
            small.append(d)
            q = nn // d
            if d != q:
                large.append(q)
        d += 1
    large.reverse()
    return tuple(small + large)


def h_sum(nums, target):
    """Distance of the remaining-numbers sum from the target."""
    cdef long st[8]
    cdef int n = _unpack_state(nums, st)
    if n < 0 or not _fits_scalar(target):
        return _py().h_sum(nums, target)
    return _h_sum_c(st, n, target)


def h_multiply(nums, target):
    """Smallest distance of the remaining-numbers sum from any divisor of
    the target."""
    cdef long st[8]
    cdef int n = _unpack_state(nums, st)
    if n < 0 or not isinstance(target, int) or target < 1 or target > _SCALAR_CAP:
        return _py().h_multiply(nums, target)
    return _h_mul_c(st, n, target)


cdef int _exh_rec(long* st, int n, long target, bint all_used,
                  list acc, list path) except -1:
    cdef long lhs[112]
    cdef long rhs[112]
    cdef int opc[112]
    cdef long res[112]
    cdef long child[8]
    cdef int m, i, cn
    m = _enum_c(st, n, lhs, rhs, opc, res)
    for i in range(m):
        cn = _child_c(st, n, lhs[i], rhs[i], res[i], child)
        if res[i] == target and (not all_used or cn == 1):
            acc[0] = acc[0] + 1
            if acc[1] is None:
                acc[1] = path + [(lhs[i], rhs[i], _OPSTRS[opc[i]], res[i])]
            continue
        if cn >= 2:
            path.append((lhs[i], rhs[i], _OPSTRS[opc[i]], res[i]))
            _exh_rec(child, cn, target, all_used, acc, path)
            path.pop()
    return 0


def solve_exhaustive(nums, target, require_all_used=False):
    """Count all goal-reaching op sequences and return the first one found."""
    cdef long st[8]
    cdef int n = _unpack_state(nums, st)
    cdef list acc
    if n < 0 or not _fits_scalar(target):
        return _py().solve_exhaustive(nums, target, require_all_used)
    acc = [0, None]
    _exh_rec(st, n, target, bool(require_all_used), acc, [])
    return acc[0], acc[1]


cdef bint _solvable_rec(long* st, int n, long target, bint all_used):
    cdef long lhs[112]
    cdef long rhs[112]
    cdef int opc[112]
    cdef long res[112]
    cdef long child[8]
    cdef int m, i, cn
    m = _enum_c(st, n, lhs, rhs, opc, res)
    for i in range(m):
        cn = _child_c(st, n, lhs[i], rhs[i], res[i], child)
        if res[i] == target and (not all_used or cn == 1):
            return True
        if cn >= 2 and _solvable_rec(child, cn, target, all_used):
            return True
    return False


def solvable(nums, target, require_all_used=False):
    """Whether any op sequence reaches the target (early-exit search)."""
    cdef long st[8]
    cdef int n = _unpack_state(nums, st)
    if n < 0 or not _fits_scalar(target):
        return _py().solvable(nums, target, require_all_used)
    return _solvable_rec(st, n, target, bool(require_all_used))


cdef object _short_rec(long* st, int n, long target, int depth, bint all_used, list path):
    cdef long lhs[112]
    cdef long rhs[112]
    cdef int opc[112]
    cdef long res[112]
    cdef long child[8]
    cdef int m, i, cn
    cdef object found
    m = _enum_c(st, n, lhs, rhs, opc, res)
    for i in range(m):
        cn = _child_c(st, n, lhs[i], rhs[i], res[i], child)
        if depth == 1:
            if res[i] == target and (not all_used or cn == 1):
                return path + [(lhs[i], rhs[i], _OPSTRS[opc[i]], res[i])]
            continue
        if res[i] == target and not all_used:
            continue  # deeper hits on this branch would pass through a goal
        if cn >= 2:
            found = _short_rec(child, cn, target, depth - 1, all_used,
                               path + [(lhs[i], rhs[i], _OPSTRS[opc[i]], res[i])])
            if found is not None:
                return found
    return None


def shortest_path(nums, target, require_all_used=False):
    """Shortest goal-reaching op sequence; ties broken by enumeration order."""
    cdef long st[8]
    cdef int n = _unpack_state(nums, st)
    cdef int depth
    cdef bint all_used
    cdef object found
    if n < 0 or not _fits_scalar(target):
        return _py().shortest_path(nums, target, require_all_used)
    all_used = bool(require_all_used)
    for depth in range(1, n):
        found = _short_rec(st, n, target, depth, all_used, [])
        if found is not None:
            return found
    return None


cdef bint _dfs_rec(long* st, int n, long target, int kind, long threshold,
                   bint keep_le, bint prune, bint all_used):
    cdef long lhs[112]
    cdef long rhs[112]
    cdef int opc[112]
    cdef long res[112]
    cdef long child[8]
    cdef long kept[112][8]
    cdef int kept_n[112]
    cdef int m, i, j, cn, kc = 0
    cdef long h
    if n < 2:
        return False
    m = _enum_c(st, n, lhs, rhs, opc, res)
    for i in range(m):
        cn = _child_c(st, n, lhs[i], rhs[i], res[i], child)
        if prune:
            h = _h_c(kind, child, cn, target)
            if keep_le:
                if h > threshold:
                    continue
            elif h <= threshold:
                continue
        if res[i] == target and (not all_used or cn == 1):
            return True
        for j in range(cn):
            kept[kc][j] = child[j]
        kept_n[kc] = cn
        kc += 1
    for i in range(kc):
        if _dfs_rec(kept[i], kept_n[i], target, kind, threshold, keep_le, prune, all_used):
            return True
    return False


def dfs_solves(nums, target, heuristic, threshold, keep_le,
               prune=True, require_all_used=False):
    """No-trace mirror of the depth-first trace strategy (found-or-not)."""
    cdef long st[8]
    cdef int n = _unpack_state(nums, st)
    if (n < 0 or not _fits_scalar(target) or not _fits_scalar(threshold)
            or (heuristic != HEURISTIC_SUM and target < 1)):
        return _py().dfs_solves(nums, target, heuristic, threshold, keep_le,
                                prune, require_all_used)
    return _dfs_rec(st, n, target,
                    0 if heuristic == HEURISTIC_SUM else 1,
                    threshold, bool(keep_le), bool(prune), bool(require_all_used))


cdef tuple _as_tuple(long* st, int n):
    cdef int i
    return tuple([st[i] for i in range(n)])


def bfs_solves(nums, target, heuristic, breadth, select_min=True,
               require_all_used=False):
    """No-trace mirror of the breadth-first trace strategy: per expansion the
    ``breadth`` best children by heuristic survive (stable ties) and only
    those survivors are goal-checked."""
    cdef long st[8]
    cdef long lhs[112]
    cdef long rhs[112]
    cdef int opc[112]
    cdef long res[112]
    cdef long child[8]
    cdef int n0, n, m, i, cn, kind
    cdef long h
    cdef Py_ssize_t b, k, limit
    cdef bint minimize, all_used
    cdef list frontier, next_frontier, scored
    cdef tuple state
    n0 = _unpack_state(nums, st)
    if (n0 < 0 or not _fits_scalar(target)
            or not isinstance(breadth, int) or breadth < 0 or breadth > 10 ** 9
            or (heuristic != HEURISTIC_SUM and target < 1)):
        return _py().bfs_solves(nums, target, heuristic, breadth,
                                select_min, require_all_used)
    kind = 0 if heuristic == HEURISTIC_SUM else 1
    minimize = bool(select_min)
    all_used = bool(require_all_used)
    b = breadth
    frontier = [tuple(nums)]
    while frontier:
        next_frontier = []
        for state in frontier:
            n = <int> len(state)
            if n < 2:
                continue
            for i in range(n):
                st[i] = state[i]
            m = _enum_c(st, n, lhs, rhs, opc, res)
            scored = []
            for i in range(m):
                cn = _child_c(st, n, lhs[i], rhs[i], res[i], child)
                h = _h_c(kind, child, cn, target)
                # (score, index) pairs sort like a stable sort on the score
                # alone: equal scores keep enumeration order either way
                scored.append((h, i) if minimize else (-h, i))
            scored.sort()
            limit = b if b < m else m
            for k in range(limit):
                i = <int> (<tuple> scored[k])[1]
                cn = _child_c(st, n, lhs[i], rhs[i], res[i], child)
                if res[i] == target and (not all_used or cn == 1):
                    return True
                next_frontier.append(_as_tuple(child, cn))
        frontier = next_frontier
    return False
