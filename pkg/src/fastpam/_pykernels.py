"""Pure-Python swap/build kernels.

Reference twin of ``_ckernels.pyx``. Every loop visits objects and slots in
the same order and accumulates in the same order as the compiled version, so
both backends produce bitwise-identical deltas, traces and counters.

Storage convention: ``tri`` is the lower triangle of the dissimilarity matrix
flattened row by row, ``d(i, j) = tri[i*(i-1)//2 + j]`` for ``i > j``.
"""

import math

INF = math.inf


def _prep(tri, medoids, *arrays):
    return (tri.tolist(), medoids.tolist()) + tuple(a.tolist() for a in arrays)


def _row_getter(t, j):
    base = j * (j - 1) // 2

    def get(o):
        if o < j:
            return t[base + o]
        if o > j:
            return t[o * (o - 1) // 2 + j]
        return 0.0

    return get


def _dist(t, i, j):
    if i > j:
        return t[i * (i - 1) // 2 + j]
    if i < j:
        return t[j * (j - 1) // 2 + i]
    return 0.0


def td(tri, n, medoids):
    t, med = _prep(tri, medoids)
    total = 0.0
    lookups = 0
    for o in range(n):
        best = INF
        for m in med:
            v = _dist(t, o, m)
            lookups += 1
            if v < best:
                best = v
        total += best
    return total, lookups


def _scan_object(t, o, med, own_slot):
    """Nearest and second nearest slot of ``o`` (lowest slot wins ties)."""
    b1, d1, b2, d2 = -1, INF, -1, INF
    lookups = 0
    for s, m in enumerate(med):
        if s == own_slot:
            continue
        v = _dist(t, o, m)
        lookups += 1
        if v < d1:
            b2, d2 = b1, d1
            b1, d1 = s, v
        elif v < d2:
            b2, d2 = s, v
    if own_slot >= 0:
        # a medoid is always assigned to itself; its best rival is the second
        return own_slot, 0.0, b1, d1, lookups
    return b1, d1, b2, d2, lookups


def assign(tri, n, medoids, nearest, second, dnear, dsecond):
    t, med = _prep(tri, medoids)
    slot_of = {m: s for s, m in enumerate(med)}
    lookups = 0
    for o in range(n):
        b1, d1, b2, d2, lk = _scan_object(t, o, med, slot_of.get(o, -1))
        nearest[o] = b1
        dnear[o] = d1
        second[o] = b2
        dsecond[o] = d2
        lookups += lk
    return lookups


def update_cache(tri, n, medoids, is_medoid, slot, nearest, second, dnear, dsecond):
    """Refresh the cache after ``medoids[slot]`` was replaced."""
    t, med, ism = _prep(tri, medoids, is_medoid)
    x = med[slot]
    get = _row_getter(t, x)
    slot_of = {m: s for s, m in enumerate(med)}
    lookups = 0
    for o in range(n):
        if o == x or nearest[o] == slot or second[o] == slot:
            b1, d1, b2, d2, lk = _scan_object(t, o, med, slot_of.get(o, -1))
            nearest[o] = b1
            dnear[o] = d1
            second[o] = b2
            dsecond[o] = d2
            lookups += lk
            continue
        dox = get(o)
        lookups += 1
        dn = dnear[o]
        if not ism[o] and (dox < dn or (dox == dn and slot < nearest[o])):
            second[o] = nearest[o]
            dsecond[o] = dn
            nearest[o] = slot
            dnear[o] = dox
        else:
            ds = dsecond[o]
            if dox < ds or (dox == ds and slot < second[o]):
                second[o] = slot
                dsecond[o] = dox
    return lookups


def swap_delta(tri, n, medoids, is_medoid, nearest, dnear, dsecond, slot, cand):
    """Sum of the change function over all objects for one swap."""
    t, med, ism, nr, dn, ds = _prep(tri, medoids, is_medoid, nearest, dnear, dsecond)
    mi = med[slot]
    get = _row_getter(t, cand)
    delta = -dn[cand]
    inner = 1
    lookups = 0
    for o in range(n):
        if o == cand or (ism[o] and o != mi):
            continue
        doj = get(o)
        lookups += 1
        inner += 1
        if nr[o] == slot:
            dso = ds[o]
            delta += (dso if dso < doj else doj) - dn[o]
        elif doj < dn[o]:
            delta += doj - dn[o]
    return delta, inner, lookups


def pam_scan(tri, n, medoids, is_medoid, nearest, dnear, dsecond):
    """One PAM SWAP sweep: every (slot, non-medoid) pair, full change sum.

    Returns ``(best_delta, best_slot, best_cand, inner, lookups)``; ties go to
    the lowest candidate index, then the lowest slot.
    """
    t, med, ism, nr, dn, ds = _prep(tri, medoids, is_medoid, nearest, dnear, dsecond)
    k = len(med)
    best, bs, bj = 0.0, -1, -1
    inner = 0
    lookups = 0
    for i in range(k):
        mi = med[i]
        for j in range(n):
            if ism[j]:
                continue
            get = _row_getter(t, j)
            delta = -dn[j]
            inner += 1
            for o in range(n):
                if o == j or (ism[o] and o != mi):
                    continue
                doj = get(o)
                lookups += 1
                inner += 1
                if nr[o] == i:
                    dso = ds[o]
                    delta += (dso if dso < doj else doj) - dn[o]
                elif doj < dn[o]:
                    delta += doj - dn[o]
            if delta < best or (
                delta == best and bs >= 0 and (j < bj or (j == bj and i < bs))
            ):
                best, bs, bj = delta, i, j
    return best, bs, bj, inner, lookups


def reynolds_scan(tri, n, medoids, is_medoid, nearest, dnear, dsecond, deltas):
    """PAM sweep with the removal loss of each medoid hoisted out.

    Every scored pair's loss change is also written to ``deltas[i, j]``.
    """
    t, med, ism, nr, dn, ds = _prep(tri, medoids, is_medoid, nearest, dnear, dsecond)
    k = len(med)
    best, bs, bj = 0.0, -1, -1
    inner = 0
    lookups = 0
    for i in range(k):
        mi = med[i]
        removal = 0.0
        for o in range(n):
            if nr[o] == i:
                removal += ds[o] - dn[o]
                inner += 1
        for j in range(n):
            if ism[j]:
                continue
            get = _row_getter(t, j)
            delta = removal
            for o in range(n):
                if ism[o] and o != mi:
                    continue
                if o == j:
                    doj = 0.0
                else:
                    doj = get(o)
                    lookups += 1
                inner += 1
                ref = ds[o] if nr[o] == i else dn[o]
                if doj < ref:
                    delta += doj - ref
            deltas[i, j] = delta
            if delta < best or (
                delta == best and bs >= 0 and (j < bj or (j == bj and i < bs))
            ):
                best, bs, bj = delta, i, j
    return best, bs, bj, inner, lookups


def _candidate_losses(get, n, j, k, nr, dn, ds):
    dj = dn[j]
    arr = [-dj] * k
    inner = k
    reassign = 0
    for o in range(n):
        if o == j:
            continue
        doj = get(o)
        no = nr[o]
        dno = dn[o]
        dso = ds[o]
        arr[no] += (dso if dso < doj else doj) - dno
        if doj < dno:
            x = doj - dno
            for i in range(k):
                if i != no:
                    arr[i] += x
            reassign += 1
    inner += (n - 1) + reassign * (k - 1)
    return arr, inner, n - 1


def fastpam1_scan(tri, n, medoids, is_medoid, nearest, dnear, dsecond):
    """FastPAM1 sweep: per-candidate array of losses for all slots at once."""
    t, med, ism, nr, dn, ds = _prep(tri, medoids, is_medoid, nearest, dnear, dsecond)
    k = len(med)
    best, bs, bj = 0.0, -1, -1
    inner = 0
    lookups = 0
    for j in range(n):
        if ism[j]:
            continue
        arr, inn, lk = _candidate_losses(_row_getter(t, j), n, j, k, nr, dn, ds)
        inner += inn
        lookups += lk
        i = 0
        for s in range(1, k):
            if arr[s] < arr[i]:
                i = s
        if arr[i] < best:
            best, bs, bj = arr[i], i, j
    return best, bs, bj, inner, lookups


def fastpam2_scan(tri, n, medoids, is_medoid, nearest, dnear, dsecond, best_delta, best_cand):
    """FastPAM2 sweep: fills the best (delta, candidate) per slot in place."""
    t, med, ism, nr, dn, ds = _prep(tri, medoids, is_medoid, nearest, dnear, dsecond)
    k = len(med)
    bd = [0.0] * k
    bc = [-1] * k
    inner = 0
    lookups = 0
    for j in range(n):
        if ism[j]:
            continue
        arr, inn, lk = _candidate_losses(_row_getter(t, j), n, j, k, nr, dn, ds)
        inner += inn
        lookups += lk
        for i in range(k):
            if arr[i] < bd[i]:
                bd[i] = arr[i]
                bc[i] = j
    best_delta[:] = bd
    best_cand[:] = bc
    return inner, lookups


def build(tri, n, k, medoids_out):
    """Greedy BUILD; writes the k chosen objects into ``medoids_out``."""
    t = tri.tolist()
    lookups = 0
    best, m1 = INF, -1
    for j in range(n):
        get = _row_getter(t, j)
        s = 0.0
        for o in range(n):
            if o != j:
                s += get(o)
                lookups += 1
        if s < best:
            best, m1 = s, j
    chosen = [m1]
    ism = [False] * n
    ism[m1] = True
    get = _row_getter(t, m1)
    dmin = [get(o) for o in range(n)]
    lookups += n - 1
    for _ in range(1, k):
        best, bx = INF, -1
        for j in range(n):
            if ism[j]:
                continue
            get = _row_getter(t, j)
            delta = 0.0
            for o in range(n):
                if ism[o]:
                    continue
                if o == j:
                    doj = 0.0
                else:
                    doj = get(o)
                    lookups += 1
                v = doj - dmin[o]
                if v < 0:
                    delta += v
            if delta < best:
                best, bx = delta, j
        chosen.append(bx)
        ism[bx] = True
        get = _row_getter(t, bx)
        for o in range(n):
            if o != bx:
                v = get(o)
                lookups += 1
                if v < dmin[o]:
                    dmin[o] = v
            else:
                dmin[o] = 0.0
    medoids_out[:] = chosen
    return lookups
