"""Pure-Python factored kernel; the reference the Cython kernel must match.

State is a list of exponents over a fixed prime basis.  ``run_factored``
advances until it halts, exhausts a budget, or lands on a watched state, and
reports why it stopped.  Both kernels share the status codes below.
"""

from __future__ import annotations

HALTED = 0
BUDGET = 1
EVENT = 2
OVERFLOW = 3  # only produced by the fixed-width kernel
MAX_STEPS = 4

# burst cap when a fraction could fire forever and no step cap was given
UNBOUNDED_CHUNK = 1 << 32


def burst_length(exps, j, needs, need_dense, delta_dense):
    """How many consecutive times fraction ``j`` stays the first applicable one.

    Returns ``None`` when it would fire forever.  Exact: every condition is a
    linear inequality in the repeat count, and each earlier fraction stays
    blocked while at least one of its deficits persists.
    """
    dj = delta_dense[j]
    nj = need_dense[j]
    m = None
    for i, d in enumerate(dj):
        if d < 0:
            k = (exps[i] - nj[i]) // -d + 1
            if m is None or k < m:
                m = k
    for f in range(j):
        forever = False
        last_blocked = 0
        first_reblocked = None
        for i, amt in needs[f]:
            r = exps[i]
            d = dj[i]
            if r < amt:
                if d <= 0:
                    forever = True
                    break
                t = (amt - r + d - 1) // d
                if t > last_blocked:
                    last_blocked = t
            elif d < 0:
                s = (r - amt) // -d + 1
                if first_reblocked is None or s < first_reblocked:
                    first_reblocked = s
        if forever:
            continue
        if first_reblocked is not None and first_reblocked <= last_blocked:
            continue
        if m is None or last_blocked < m:
            m = last_blocked
    return m


def run_factored(exps, layout, budget, max_steps, accelerate, watch, two_idx, others_nonzero):
    """Advance ``exps`` in place.

    Returns ``(status, steps, macro_steps, others_nonzero, last_fraction)``;
    ``others_nonzero`` counts nonzero exponents other than the power of two
    (plus one for a nontrivial cofactor) so pure powers of two are cheap to spot.
    """
    needs = layout.needs
    deltas = layout.deltas
    need_dense = layout.need_dense
    delta_dense = layout.delta_dense
    nf = len(needs)
    steps = 0
    macro = 0
    last = -1
    while True:
        if macro >= budget:
            return BUDGET, steps, macro, others_nonzero, last
        if max_steps >= 0 and steps >= max_steps:
            return MAX_STEPS, steps, macro, others_nonzero, last
        j = -1
        for f in range(nf):
            for i, amt in needs[f]:
                if exps[i] < amt:
                    break
            else:
                j = f
                break
        if j < 0:
            return HALTED, steps, macro, others_nonzero, last
        m = 1
        if accelerate:
            m = burst_length(exps, j, needs, need_dense, delta_dense)
            if max_steps >= 0:
                cap = max_steps - steps
                if m is None or m > cap:
                    m = cap
            elif m is None:
                m = UNBOUNDED_CHUNK
        for i, d in deltas[j]:
            before = exps[i]
            after = before + d * m
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
            return EVENT, steps, macro, others_nonzero, last
        for i in watch:
            if exps[i]:
                return EVENT, steps, macro, others_nonzero, last
