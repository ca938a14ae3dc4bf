"""Pure-Python allocation kernel, the fallback twin of ``_speedups``.

Both backends implement the identical algorithm with the identical
floating-point operation order, so their outputs match bit for bit.
Any change here must be mirrored in ``_speedups.pyx``.
"""

BACKEND = "pure"


def _aslist(values, conv):
    if hasattr(values, "tolist"):
        return values.tolist()
    return [conv(v) for v in values]


def waterfill_grants(demand, file_size, catalog, start, cum, offsets, total,
                     zipf, budget_bytes, need_saving):
    """Greedy whole-file cache grants, most valuable file first.

    The value of granting slice ``s`` its next-most-popular file is the
    bandwidth it saves: popularity of that file times the slice demand.
    Grants continue until the accumulated saving reaches ``need_saving``,
    the byte budget is exhausted, or every catalog is fully cached.
    Equal-value candidates are ordered by a parameter chain (file size
    ascending, demand descending, catalog ascending, zipf exponent
    ascending, then position) so the outcome does not depend on how
    identically-parameterised slices are labelled.

    Parameters
    ----------
    demand : sequence of float
        Aggregate slice demands, bits/s.
    file_size : sequence of float
        Bytes per file, per slice.
    catalog : sequence of int
        Catalog sizes in files, per slice.
    start : sequence of int
        Files already granted per slice; never revoked.
    cum : sequence of float
        Concatenated popularity prefix sums: ``cum[offsets[s] + j]`` is the
        total weight of slice ``s``'s ``j`` most popular files.
    offsets : sequence of int
        Start index of each slice's prefix block inside ``cum``.
    total : sequence of float
        Total popularity weight per slice (last prefix entry).
    zipf : sequence of float
        Zipf exponents, used only in the tie chain.
    budget_bytes : float
        Bytes available for grants beyond ``start``.
    need_saving : float
        Target additional saving in bits/s; ``inf`` grants until exhausted,
        values <= 0 grant nothing.

    Returns
    -------
    (grants, saving, budget_left)
        Total files granted per slice (including ``start``), the additional
        saving achieved, and the remaining byte budget.
    """
    g = len(demand)
    d = _aslist(demand, float)
    fs = _aslist(file_size, float)
    cat = _aslist(catalog, int)
    m = _aslist(start, int)
    c = _aslist(cum, float)
    off = _aslist(offsets, int)
    tot = _aslist(total, float)
    ze = _aslist(zipf, float)
    budget = float(budget_bytes)
    saving = 0.0
    if need_saving <= 0.0:
        return m, saving, budget

    def tie_beats(a, b):
        if fs[a] != fs[b]:
            return fs[a] < fs[b]
        if d[a] != d[b]:
            return d[a] > d[b]
        if cat[a] != cat[b]:
            return cat[a] < cat[b]
        if ze[a] != ze[b]:
            return ze[a] < ze[b]
        return a < b

    while True:
        lead = -1
        lead_marg = 0.0
        second = -1
        second_marg = 0.0
        for s in range(g):
            if m[s] >= cat[s] or d[s] <= 0.0 or fs[s] > budget:
                continue
            base = off[s] + m[s]
            marg = (c[base + 1] - c[base]) / tot[s] * d[s]
            if lead < 0 or marg > lead_marg or (marg == lead_marg and tie_beats(s, lead)):
                second, second_marg = lead, lead_marg
                lead, lead_marg = s, marg
            elif second < 0 or marg > second_marg or (marg == second_marg and tie_beats(s, second)):
                second, second_marg = s, marg
        if lead < 0:
            break

        base = off[lead] + m[lead]
        cap = cat[lead] - m[lead]
        afford = budget / fs[lead]
        if afford < cap:
            cap = int(afford)
        # longest run the leader keeps before the runner-up takes over
        run = cap
        if second >= 0:
            keeps_lead = tie_beats(lead, second)
            lo, hi = 1, cap
            while lo < hi:
                mid = (lo + hi + 1) // 2
                w = (c[base + mid] - c[base + mid - 1]) / tot[lead] * d[lead]
                if w > second_marg or (w == second_marg and keeps_lead):
                    lo = mid
                else:
                    hi = mid - 1
            run = lo
        # shortest prefix of the run that already meets the target
        take = run
        need_rem = need_saving - saving
        if (c[base + run] - c[base]) / tot[lead] * d[lead] >= need_rem:
            lo, hi = 1, run
            while lo < hi:
                mid = (lo + hi) // 2
                if (c[base + mid] - c[base]) / tot[lead] * d[lead] >= need_rem:
                    hi = mid
                else:
                    lo = mid + 1
            take = lo

        saving += (c[base + take] - c[base]) / tot[lead] * d[lead]
        budget -= take * fs[lead]
        m[lead] += take
        if saving >= need_saving:
            break

    return m, saving, budget
