# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled allocation kernel, the fast twin of ``_pure``.

Implements the identical algorithm with the identical floating-point
operation order, so outputs match the fallback bit for bit.  Any change
here must be mirrored in ``_pure.py``.
"""

import numpy as np

BACKEND = "compiled"


cdef inline bint _tie_beats(Py_ssize_t a, Py_ssize_t b,
                            const double[::1] fs, const double[::1] d,
                            const long long[::1] cat,
                            const double[::1] ze) noexcept:
    if fs[a] != fs[b]:
        return fs[a] < fs[b]
    if d[a] != d[b]:
        return d[a] > d[b]
    if cat[a] != cat[b]:
        return cat[a] < cat[b]
    if ze[a] != ze[b]:
        return ze[a] < ze[b]
    return a < b


def waterfill_grants(const double[::1] demand, const double[::1] file_size,
                     const long long[::1] catalog, const long long[::1] start,
                     const double[::1] cum, const long long[::1] offsets,
                     const double[::1] total, const double[::1] zipf,
                     double budget_bytes, double need_saving):
    """See ``aerofed._kernels._pure.waterfill_grants``."""
    cdef Py_ssize_t g = demand.shape[0]
    cdef Py_ssize_t s, lead, second
    cdef double budget = budget_bytes
    cdef double saving = 0.0
    cdef double lead_marg, second_marg, marg, w, afford, need_rem
    cdef long long base, cap, run, take, lo, hi, mid
    cdef bint keeps_lead

    m_arr = np.empty(g, dtype=np.int64)
    cdef long long[::1] m = m_arr
    for s in range(g):
        m[s] = start[s]
    if need_saving <= 0.0:
        return m_arr.tolist(), saving, budget

    while True:
        lead = -1
        lead_marg = 0.0
        second = -1
        second_marg = 0.0
        for s in range(g):
            if m[s] >= catalog[s] or demand[s] <= 0.0 or file_size[s] > budget:
                continue
            base = offsets[s] + m[s]
            marg = (cum[base + 1] - cum[base]) / total[s] * demand[s]
            if lead < 0 or marg > lead_marg or (
                    marg == lead_marg and _tie_beats(s, lead, file_size, demand, catalog, zipf)):
                second = lead
                second_marg = lead_marg
                lead = s
                lead_marg = marg
            elif second < 0 or marg > second_marg or (
                    marg == second_marg and _tie_beats(s, second, file_size, demand, catalog, zipf)):
                second = s
                second_marg = marg
        if lead < 0:
            break

        base = offsets[lead] + m[lead]
        cap = catalog[lead] - m[lead]
        afford = budget / file_size[lead]
        if afford < <double>cap:
            cap = <long long>afford
        run = cap
        if second >= 0:
            keeps_lead = _tie_beats(lead, second, file_size, demand, catalog, zipf)
            lo = 1
            hi = cap
            while lo < hi:
                mid = (lo + hi + 1) // 2
                w = (cum[base + mid] - cum[base + mid - 1]) / total[lead] * demand[lead]
                if w > second_marg or (w == second_marg and keeps_lead):
                    lo = mid
                else:
                    hi = mid - 1
            run = lo
        take = run
        need_rem = need_saving - saving
        if (cum[base + run] - cum[base]) / total[lead] * demand[lead] >= need_rem:
            lo = 1
            hi = run
            while lo < hi:
                mid = (lo + hi) // 2
                if (cum[base + mid] - cum[base]) / total[lead] * demand[lead] >= need_rem:
                    hi = mid
                else:
                    lo = mid + 1
            take = lo

        saving += (cum[base + take] - cum[base]) / total[lead] * demand[lead]
        budget -= take * file_size[lead]
        m[lead] += take
        if saving >= need_saving:
            break

    return m_arr.tolist(), saving, budget
