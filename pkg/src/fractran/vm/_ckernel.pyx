# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Fixed-width (int64) factored kernel.

Same contract and status codes as ``_pykernel.run_factored``.  Exponents are
held in signed 64-bit slots; any update that could leave [0, 2**62) stops
the run with OVERFLOW *before* touching the state, so the caller can resume
the identical computation with Python ints.
"""

from libc.stdint cimport int64_t

cdef enum:
    HALTED = 0
    BUDGET = 1
    EVENT = 2
    OVERFLOW = 3
    MAX_STEPS = 4

cdef int64_t LIMIT = (<int64_t>1) << 62
cdef int64_t UNBOUNDED_CHUNK = (<int64_t>1) << 32
cdef int64_t INF = -1


cdef inline int64_t burst_length(int64_t[::1] exps, Py_ssize_t j, Py_ssize_t nb,
                                 int64_t[::1] need_ptr, int64_t[::1] need_idx,
                                 int64_t[::1] need_amt, int64_t[::1] need_dense,
                                 int64_t[::1] delta_dense) nogil:
    cdef int64_t m = INF, k, r, d, amt, t, s, last_blocked, first_reblocked
    cdef Py_ssize_t i, f, q, base = j * nb
    cdef bint forever
    for i in range(nb):
        d = delta_dense[base + i]
        if d < 0:
            k = (exps[i] - need_dense[base + i]) // (-d) + 1
            if m == INF or k < m:
                m = k
    for f in range(j):
        forever = False
        last_blocked = 0
        first_reblocked = INF
        for q in range(need_ptr[f], need_ptr[f + 1]):
            i = need_idx[q]
            amt = need_amt[q]
            r = exps[i]
            d = delta_dense[base + i]
            if r < amt:
                if d <= 0:
                    forever = True
                    break
                t = (amt - r + d - 1) // d
                if t > last_blocked:
                    last_blocked = t
            elif d < 0:
                s = (r - amt) // (-d) + 1
                if first_reblocked == INF or s < first_reblocked:
                    first_reblocked = s
        if forever:
            continue
        if first_reblocked != INF and first_reblocked <= last_blocked:
            continue
        if m == INF or last_blocked < m:
            m = last_blocked
    return m


def run_factored(int64_t[::1] exps, layout, int64_t budget, int64_t max_steps,
                 bint accelerate, int64_t[::1] watch, int64_t two_idx,
                 int64_t others_nonzero):
    cdef int64_t[::1] need_ptr = layout.c_need_ptr
    cdef int64_t[::1] need_idx = layout.c_need_idx
    cdef int64_t[::1] need_amt = layout.c_need_amt
    cdef int64_t[::1] delta_ptr = layout.c_delta_ptr
    cdef int64_t[::1] delta_idx = layout.c_delta_idx
    cdef int64_t[::1] delta_amt = layout.c_delta_amt
    cdef int64_t[::1] need_dense = layout.c_need_dense
    cdef int64_t[::1] delta_dense = layout.c_delta_dense
    cdef Py_ssize_t nf = need_ptr.shape[0] - 1
    cdef Py_ssize_t nb = exps.shape[0]
    cdef Py_ssize_t nw = watch.shape[0]
    cdef int64_t steps = 0, macro = 0, m, cap, before, after, d
    cdef Py_ssize_t f, q, i, j, last = -1
    cdef bint ok
    cdef int status = -1

    with nogil:
        while True:
            if macro >= budget:
                status = BUDGET
                break
            if max_steps >= 0 and steps >= max_steps:
                status = MAX_STEPS
                break
            j = -1
            for f in range(nf):
                ok = True
                for q in range(need_ptr[f], need_ptr[f + 1]):
                    if exps[need_idx[q]] < need_amt[q]:
                        ok = False
                        break
                if ok:
                    j = f
                    break
            if j < 0:
                status = HALTED
                break
            m = 1
            if accelerate:
                m = burst_length(exps, j, nb, need_ptr, need_idx, need_amt,
                                 need_dense, delta_dense)
                if max_steps >= 0:
                    cap = max_steps - steps
                    if m == INF or m > cap:
                        m = cap
                elif m == INF:
                    m = UNBOUNDED_CHUNK
            # refuse any update that would leave the safe range
            ok = True
            for q in range(delta_ptr[j], delta_ptr[j + 1]):
                d = delta_amt[q]
                if d > 0 and m > (LIMIT - exps[delta_idx[q]]) // d:
                    ok = False
                    break
            if not ok or steps > LIMIT - m:
                status = OVERFLOW
                break
            for q in range(delta_ptr[j], delta_ptr[j + 1]):
                i = delta_idx[q]
                before = exps[i]
                after = before + delta_amt[q] * m
                exps[i] = after
                if i != two_idx:
                    if before == 0:
                        others_nonzero += 1
                    elif after == 0:
                        others_nonzero -= 1
            steps += m
            macro += 1
            last = j
            if others_nonzero == 0:
                status = EVENT
                break
            for q in range(nw):
                if exps[watch[q]] != 0:
                    status = EVENT
                    break
            if status == EVENT:
                break
    return status, steps, macro, others_nonzero, last
