# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled swap/build kernels.

Mirrors ``_pykernels`` statement for statement; keep the two in sync.
"""

from libc.math cimport INFINITY
from libc.stdlib cimport free, malloc

ctypedef Py_ssize_t idx_t
ctypedef unsigned long long count_t


cdef inline double _dist(const double* t, idx_t i, idx_t j) noexcept nogil:
    if i > j:
        return t[i * (i - 1) // 2 + j]
    if i < j:
        return t[j * (j - 1) // 2 + i]
    return 0.0


cdef inline double _row(const double* t, idx_t base, idx_t o, idx_t j) noexcept nogil:
    # d(o, j) with base = j*(j-1)//2 precomputed
    if o < j:
        return t[base + o]
    if o > j:
        return t[o * (o - 1) // 2 + j]
    return 0.0


cdef count_t _scan_object(const double* t, idx_t o, const idx_t* med, idx_t k,
                          idx_t own_slot, idx_t* nearest, idx_t* second,
                          double* dnear, double* dsecond) noexcept nogil:
    cdef idx_t s, b1 = -1, b2 = -1
    cdef double v, d1 = INFINITY, d2 = INFINITY
    cdef count_t lookups = 0
    for s in range(k):
        if s == own_slot:
            continue
        v = _dist(t, o, med[s])
        lookups += 1
        if v < d1:
            b2 = b1
            d2 = d1
            b1 = s
            d1 = v
        elif v < d2:
            b2 = s
            d2 = v
    if own_slot >= 0:
        nearest[o] = own_slot
        dnear[o] = 0.0
        second[o] = b1
        dsecond[o] = d1
    else:
        nearest[o] = b1
        dnear[o] = d1
        second[o] = b2
        dsecond[o] = d2
    return lookups


def td(const double[::1] tri, idx_t n, const idx_t[::1] medoids):
    cdef const double* t = &tri[0] if tri.shape[0] else NULL
    cdef idx_t o, i, k = medoids.shape[0]
    cdef double total = 0.0, best, v
    cdef count_t lookups = 0
    with nogil:
        for o in range(n):
            best = INFINITY
            for i in range(k):
                v = _dist(t, o, medoids[i])
                lookups += 1
                if v < best:
                    best = v
            total += best
    return total, lookups


def assign(const double[::1] tri, idx_t n, const idx_t[::1] medoids,
           idx_t[::1] nearest, idx_t[::1] second,
           double[::1] dnear, double[::1] dsecond):
    cdef const double* t = &tri[0] if tri.shape[0] else NULL
    cdef idx_t k = medoids.shape[0]
    cdef idx_t o, s
    cdef count_t lookups = 0
    cdef idx_t* slot_of = <idx_t*> malloc(n * sizeof(idx_t))
    if slot_of == NULL:
        raise MemoryError()
    try:
        with nogil:
            for o in range(n):
                slot_of[o] = -1
            for s in range(k):
                slot_of[medoids[s]] = s
            for o in range(n):
                lookups += _scan_object(t, o, &medoids[0], k, slot_of[o],
                                        &nearest[0], &second[0], &dnear[0], &dsecond[0])
    finally:
        free(slot_of)
    return lookups


def update_cache(const double[::1] tri, idx_t n, const idx_t[::1] medoids,
                 const unsigned char[::1] is_medoid, idx_t slot,
                 idx_t[::1] nearest, idx_t[::1] second,
                 double[::1] dnear, double[::1] dsecond):
    cdef const double* t = &tri[0] if tri.shape[0] else NULL
    cdef idx_t k = medoids.shape[0]
    cdef idx_t x = medoids[slot]
    cdef idx_t base = x * (x - 1) // 2
    cdef idx_t o, s
    cdef double dox, dn, ds
    cdef count_t lookups = 0
    cdef idx_t* slot_of = <idx_t*> malloc(n * sizeof(idx_t))
    if slot_of == NULL:
        raise MemoryError()
    try:
        with nogil:
            for o in range(n):
                slot_of[o] = -1
            for s in range(k):
                slot_of[medoids[s]] = s
            for o in range(n):
                if o == x or nearest[o] == slot or second[o] == slot:
                    lookups += _scan_object(t, o, &medoids[0], k, slot_of[o],
                                            &nearest[0], &second[0], &dnear[0], &dsecond[0])
                    continue
                dox = _row(t, base, o, x)
                lookups += 1
                dn = dnear[o]
                if not is_medoid[o] and (dox < dn or (dox == dn and slot < nearest[o])):
                    second[o] = nearest[o]
                    dsecond[o] = dn
                    nearest[o] = slot
                    dnear[o] = dox
                else:
                    ds = dsecond[o]
                    if dox < ds or (dox == ds and slot < second[o]):
                        second[o] = slot
                        dsecond[o] = dox
    finally:
        free(slot_of)
    return lookups


def swap_delta(const double[::1] tri, idx_t n, const idx_t[::1] medoids,
               const unsigned char[::1] is_medoid, const idx_t[::1] nearest,
               const double[::1] dnear, const double[::1] dsecond,
               idx_t slot, idx_t cand):
    cdef const double* t = &tri[0] if tri.shape[0] else NULL
    cdef idx_t mi = medoids[slot]
    cdef idx_t base = cand * (cand - 1) // 2
    cdef idx_t o
    cdef double delta = -dnear[cand], doj, dso
    cdef count_t inner = 1, lookups = 0
    with nogil:
        for o in range(n):
            if o == cand or (is_medoid[o] and o != mi):
                continue
            doj = _row(t, base, o, cand)
            lookups += 1
            inner += 1
            if nearest[o] == slot:
                dso = dsecond[o]
                delta += (dso if dso < doj else doj) - dnear[o]
            elif doj < dnear[o]:
                delta += doj - dnear[o]
    return delta, inner, lookups


def pam_scan(const double[::1] tri, idx_t n, const idx_t[::1] medoids,
             const unsigned char[::1] is_medoid, const idx_t[::1] nearest,
             const double[::1] dnear, const double[::1] dsecond):
    cdef const double* t = &tri[0] if tri.shape[0] else NULL
    cdef idx_t k = medoids.shape[0]
    cdef idx_t i, j, o, mi, base, bs = -1, bj = -1
    cdef double best = 0.0, delta, doj, dso
    cdef count_t inner = 0, lookups = 0
    with nogil:
        for i in range(k):
            mi = medoids[i]
            for j in range(n):
                if is_medoid[j]:
                    continue
                base = j * (j - 1) // 2
                delta = -dnear[j]
                inner += 1
                for o in range(n):
                    if o == j or (is_medoid[o] and o != mi):
                        continue
                    doj = _row(t, base, o, j)
                    lookups += 1
                    inner += 1
                    if nearest[o] == i:
                        dso = dsecond[o]
                        delta += (dso if dso < doj else doj) - dnear[o]
                    elif doj < dnear[o]:
                        delta += doj - dnear[o]
                if delta < best or (
                    delta == best and bs >= 0 and (j < bj or (j == bj and i < bs))
                ):
                    best = delta
                    bs = i
                    bj = j
    return best, bs, bj, inner, lookups


def reynolds_scan(const double[::1] tri, idx_t n, const idx_t[::1] medoids,
                  const unsigned char[::1] is_medoid, const idx_t[::1] nearest,
                  const double[::1] dnear, const double[::1] dsecond,
                  double[:, ::1] deltas):
    cdef const double* t = &tri[0] if tri.shape[0] else NULL
    cdef idx_t k = medoids.shape[0]
    cdef idx_t i, j, o, mi, base, bs = -1, bj = -1
    cdef double best = 0.0, delta, removal, doj, ref
    cdef count_t inner = 0, lookups = 0
    with nogil:
        for i in range(k):
            mi = medoids[i]
            removal = 0.0
            for o in range(n):
                if nearest[o] == i:
                    removal += dsecond[o] - dnear[o]
                    inner += 1
            for j in range(n):
                if is_medoid[j]:
                    continue
                base = j * (j - 1) // 2
                delta = removal
                for o in range(n):
                    if is_medoid[o] and o != mi:
                        continue
                    if o == j:
                        doj = 0.0
                    else:
                        doj = _row(t, base, o, j)
                        lookups += 1
                    inner += 1
                    ref = dsecond[o] if nearest[o] == i else dnear[o]
                    if doj < ref:
                        delta += doj - ref
                deltas[i, j] = delta
                if delta < best or (
                    delta == best and bs >= 0 and (j < bj or (j == bj and i < bs))
                ):
                    best = delta
                    bs = i
                    bj = j
    return best, bs, bj, inner, lookups


cdef count_t _candidate_losses(const double* t, idx_t n, idx_t j, idx_t k,
                               const idx_t* nearest, const double* dnear,
                               const double* dsecond, double* arr) noexcept nogil:
    """Fill arr[k] with the loss change of swapping j into each slot."""
    cdef idx_t base = j * (j - 1) // 2
    cdef idx_t o, i, no
    cdef double dj = dnear[j], doj, dno, dso, x
    cdef count_t reassign = 0
    for i in range(k):
        arr[i] = -dj
    for o in range(n):
        if o == j:
            continue
        doj = _row(t, base, o, j)
        no = nearest[o]
        dno = dnear[o]
        dso = dsecond[o]
        arr[no] += (dso if dso < doj else doj) - dno
        if doj < dno:
            x = doj - dno
            for i in range(k):
                if i != no:
                    arr[i] += x
            reassign += 1
    return reassign


def fastpam1_scan(const double[::1] tri, idx_t n, const idx_t[::1] medoids,
                  const unsigned char[::1] is_medoid, const idx_t[::1] nearest,
                  const double[::1] dnear, const double[::1] dsecond):
    cdef const double* t = &tri[0] if tri.shape[0] else NULL
    cdef idx_t k = medoids.shape[0]
    cdef idx_t i, s, j, bs = -1, bj = -1
    cdef double best = 0.0
    cdef count_t inner = 0, lookups = 0, reassign
    cdef double* arr = <double*> malloc(k * sizeof(double))
    if arr == NULL:
        raise MemoryError()
    try:
        with nogil:
            for j in range(n):
                if is_medoid[j]:
                    continue
                reassign = _candidate_losses(t, n, j, k, &nearest[0], &dnear[0],
                                             &dsecond[0], arr)
                inner += k + (n - 1) + reassign * (k - 1)
                lookups += n - 1
                i = 0
                for s in range(1, k):
                    if arr[s] < arr[i]:
                        i = s
                if arr[i] < best:
                    best = arr[i]
                    bs = i
                    bj = j
    finally:
        free(arr)
    return best, bs, bj, inner, lookups


def fastpam2_scan(const double[::1] tri, idx_t n, const idx_t[::1] medoids,
                  const unsigned char[::1] is_medoid, const idx_t[::1] nearest,
                  const double[::1] dnear, const double[::1] dsecond,
                  double[::1] best_delta, idx_t[::1] best_cand):
    cdef const double* t = &tri[0] if tri.shape[0] else NULL
    cdef idx_t k = medoids.shape[0]
    cdef idx_t i, j
    cdef count_t inner = 0, lookups = 0, reassign
    cdef double* arr = <double*> malloc(k * sizeof(double))
    if arr == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(k):
                best_delta[i] = 0.0
                best_cand[i] = -1
            for j in range(n):
                if is_medoid[j]:
                    continue
                reassign = _candidate_losses(t, n, j, k, &nearest[0], &dnear[0],
                                             &dsecond[0], arr)
                inner += k + (n - 1) + reassign * (k - 1)
                lookups += n - 1
                for i in range(k):
                    if arr[i] < best_delta[i]:
                        best_delta[i] = arr[i]
                        best_cand[i] = j
    finally:
        free(arr)
    return inner, lookups


def build(const double[::1] tri, idx_t n, idx_t k, idx_t[::1] medoids_out):
    cdef const double* t = &tri[0] if tri.shape[0] else NULL
    cdef idx_t j, o, step, base, m1 = -1, bx
    cdef double best = INFINITY, s, delta, doj, v
    cdef count_t lookups = 0
    cdef double* dmin = <double*> malloc(n * sizeof(double))
    cdef unsigned char* ism = <unsigned char*> malloc(n)
    if dmin == NULL or ism == NULL:
        free(dmin)
        free(ism)
        raise MemoryError()
    try:
        with nogil:
            for j in range(n):
                base = j * (j - 1) // 2
                s = 0.0
                for o in range(n):
                    if o != j:
                        s += _row(t, base, o, j)
                        lookups += 1
                if s < best:
                    best = s
                    m1 = j
            medoids_out[0] = m1
            for o in range(n):
                ism[o] = 0
            ism[m1] = 1
            base = m1 * (m1 - 1) // 2
            for o in range(n):
                dmin[o] = _row(t, base, o, m1)
            lookups += n - 1
            for step in range(1, k):
                best = INFINITY
                bx = -1
                for j in range(n):
                    if ism[j]:
                        continue
                    base = j * (j - 1) // 2
                    delta = 0.0
                    for o in range(n):
                        if ism[o]:
                            continue
                        if o == j:
                            doj = 0.0
                        else:
                            doj = _row(t, base, o, j)
                            lookups += 1
                        v = doj - dmin[o]
                        if v < 0:
                            delta += v
                    if delta < best:
                        best = delta
                        bx = j
                medoids_out[step] = bx
                ism[bx] = 1
                base = bx * (bx - 1) // 2
                for o in range(n):
                    if o != bx:
                        v = _row(t, base, o, bx)
                        lookups += 1
                        if v < dmin[o]:
                            dmin[o] = v
                    else:
                        dmin[o] = 0.0
    finally:
        free(dmin)
        free(ism)
    return lookups
