"""Compiled inner loops for congruence enumeration.

Everything here works on the flat arrays of a ``WordGraph`` plus the
session registers in ``regs``. The coincidence and deduction stacks are
int64 arrays holding pairs pushed as ``x`` then ``y``, with their sizes in
the ``CSP`` and ``DSP`` registers. Callers guarantee that the node arrays
have room for the nodes a macro step may create; drivers return ``GROW``
at a macro-step boundary when they do not.

The stacks never grow inside a kernel. A full deduction stack is emptied
and ``OVERFLOW`` raised, which consumers answer with an exhaustive scan. A
full coincidence stack records the pair straight into the partition and
raises ``LAZY``; ``tc3`` then merges every active node that is no longer
its own representative. ``COINC_FULL`` and ``WORK_FULL`` make drivers
return ``GROW`` so the caller can enlarge the stack.
"""

import numpy as np
from numba import njit

UNDEF = -1

# register layout
K = 0
MAX_NODES = 1
MAX_STEPS = 2
TC1 = 3
TC2 = 4
TC3 = 5
TC3_PASSES = 6
DEDUCTIONS = 7
SWEEPS = 8
PEAK = 9
HLT_CURSOR = 10
GAP_CURSOR = 11
OMEGA = 12
ZERO = 13
TRACK = 14
OVERFLOW = 15
CSP = 16
ALT_POS = 17
DSP = 18
LAZY = 19
WORK_FULL = 20
COINC_FULL = 21
NUM_REGS = 22

# driver return codes
DONE = 0
GROW = 1
NODE_LIMIT = 2
STEP_LIMIT = 3
PAUSED = 4

# TC2 outcomes
EDGE_DEFINED = 0
COINCIDENCE = 1
INCOMPLETE = 2
COMPATIBLE = 3

NO_POS = 1 << 62


@njit(cache=True)
def find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nx = parent[x]
        parent[x] = root
        x = nx
    return root


@njit(cache=True)
def link(fwd, first, nxt, k, s, a, t):
    i = s * k + a
    j = t * k + a
    fwd[i] = t
    nxt[i] = first[j]
    first[j] = s


@njit(cache=True)
def steps_exceeded(regs):
    return regs[MAX_STEPS] >= 0 and regs[TC1] + regs[TC2] + regs[TC3] > regs[MAX_STEPS]


@njit(cache=True)
def follow(fwd, k, node, letters, start, length):
    x = node
    for i in range(start, start + length):
        x = fwd[x * k + letters[i]]
        if x < 0:
            return UNDEF
    return x


# -- stacks ---------------------------------------------------------------------


@njit(cache=True)
def push_ded(ded, regs, x, a):
    if not regs[TRACK]:
        return
    sp = regs[DSP]
    if sp + 2 > ded.shape[0]:
        regs[DSP] = 0
        regs[OVERFLOW] = 1
        return
    ded[sp] = x
    ded[sp + 1] = a
    regs[DSP] = sp + 2


@njit(cache=True)
def push_coinc(coinc, parent, regs, x, y):
    sp = regs[CSP]
    if sp + 2 > coinc.shape[0]:
        rx = find(parent, x)
        ry = find(parent, y)
        if rx != ry:
            if rx < ry:
                parent[ry] = rx
            else:
                parent[rx] = ry
            regs[LAZY] = 1
        regs[COINC_FULL] = 1
        return
    coinc[sp] = x
    coinc[sp + 1] = y
    regs[CSP] = sp + 2


@njit(cache=True)
def has_coinc(regs):
    return regs[CSP] > 0 or regs[LAZY] != 0


# -- primitive steps -----------------------------------------------------------


@njit(cache=True)
def tc1(fwd, first, nxt, alive, meta, parent, regs, ded, node, a):
    """Returns the new node, -2 when the node cap is reached, or -3 when
    the arrays are full."""
    if meta[1] >= regs[MAX_NODES]:
        return -2
    new = meta[0]
    if new >= alive.shape[0]:
        return -3
    k = regs[K]
    meta[0] = new + 1
    meta[1] += 1
    alive[new] = 1
    parent[new] = new
    if meta[1] > regs[PEAK]:
        regs[PEAK] = meta[1]
    link(fwd, first, nxt, k, node, a, new)
    regs[TC1] += 1
    push_ded(ded, regs, node, a)
    z = regs[ZERO]
    if z >= 0:
        link(fwd, first, nxt, k, new, z, find(parent, regs[OMEGA]))
        push_ded(ded, regs, new, z)
    return new


@njit(cache=True)
def tc2_probe(fwd, k, letters, ls, ll, rs, rl, node):
    """Trace both sides of a relation from ``node``. Returns ``(status, x,
    bu, y, bv)``: ``x`` and ``y`` end the sides minus their last letters,
    ``bu`` and ``bv`` end the full sides (or are -1). ``status`` is
    INCOMPLETE, COMPATIBLE, or -1 when ``tc2_apply`` has work to do."""
    x = node
    for i in range(ls, ls + ll - 1):
        x = fwd[x * k + letters[i]]
        if x < 0:
            return INCOMPLETE, x, x, x, x
    y = node
    for i in range(rs, rs + rl - 1):
        y = fwd[y * k + letters[i]]
        if y < 0:
            return INCOMPLETE, x, x, y, y
    bu = x
    bv = y
    if ll > 0:
        bu = fwd[x * k + letters[ls + ll - 1]]
    if rl > 0:
        bv = fwd[y * k + letters[rs + rl - 1]]
    if bu < 0 and bv < 0:
        return INCOMPLETE, x, bu, y, bv
    if bu == bv:
        return COMPATIBLE, x, bu, y, bv
    return -1, x, bu, y, bv


@njit(cache=True)
def tc2_apply(fwd, first, nxt, parent, regs, coinc, ded, letters, ls, ll, rs, rl, x, bu, y, bv):
    k = regs[K]
    if bu >= 0 and bv >= 0:
        push_coinc(coinc, parent, regs, bu, bv)
        return COINCIDENCE
    if bu >= 0:
        b = letters[rs + rl - 1]
        link(fwd, first, nxt, k, y, b, bu)
        push_ded(ded, regs, y, b)
    else:
        a = letters[ls + ll - 1]
        link(fwd, first, nxt, k, x, a, bv)
        push_ded(ded, regs, x, a)
    return EDGE_DEFINED


@njit(cache=True)
def tc2(fwd, first, nxt, parent, regs, coinc, ded, letters, ls, ll, rs, rl, node):
    regs[TC2] += 1
    status, x, bu, y, bv = tc2_probe(fwd, regs[K], letters, ls, ll, rs, rl, node)
    if status >= 0:
        return status
    return tc2_apply(fwd, first, nxt, parent, regs, coinc, ded, letters, ls, ll, rs, rl, x, bu, y, bv)


@njit(cache=True)
def tc2_rel(fwd, first, nxt, parent, regs, coinc, ded, letters, ridx, r, node):
    # hot loops inline this body by hand: passing every array through an
    # inlined call costs a reference-count round trip per array
    regs[TC2] += 1
    ls = ridx[r, 0]
    ll = ridx[r, 1]
    rs = ridx[r, 2]
    rl = ridx[r, 3]
    status, x, bu, y, bv = tc2_probe(fwd, regs[K], letters, ls, ll, rs, rl, node)
    if status >= 0:
        return status
    return tc2_apply(fwd, first, nxt, parent, regs, coinc, ded, letters, ls, ll, rs, rl, x, bu, y, bv)


@njit(cache=True)
def merge_nodes(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, keep, drop):
    """Redirect the edges into ``drop`` to ``keep``, move its outgoing edges
    over where ``keep`` has none and queue the clashing targets."""
    k = regs[K]
    for a in range(k):
        jd = drop * k + a
        jk = keep * k + a
        s = first[jd]
        first[jd] = UNDEF
        while s != UNDEF:
            i = s * k + a
            following = nxt[i]
            if alive[s] and fwd[i] == drop:
                fwd[i] = keep
                nxt[i] = first[jk]
                first[jk] = s
                push_ded(ded, regs, s, a)
            s = following
    for a in range(k):
        v = fwd[drop * k + a]
        if v == UNDEF:
            continue
        u = fwd[keep * k + a]
        if u == UNDEF:
            link(fwd, first, nxt, k, keep, a, v)
            push_ded(ded, regs, keep, a)
        elif u != v:
            push_coinc(coinc, parent, regs, u, v)
    alive[drop] = 0
    meta[1] -= 1


@njit(cache=True)
def merge_forward_only(fwd, alive, meta, parent, regs, coinc, ded, keep, drop):
    k = regs[K]
    bk = keep * k
    bd = drop * k
    for a in range(k):
        v = fwd[bd + a]
        if v == UNDEF:
            continue
        u = fwd[bk + a]
        if u == UNDEF:
            fwd[bk + a] = v
            push_ded(ded, regs, keep, a)
        elif u != v:
            push_coinc(coinc, parent, regs, u, v)
    alive[drop] = 0
    meta[1] -= 1


@njit(cache=True)
def rebuild_backward(fwd, first, nxt, alive, n, k):
    for i in range(n * k):
        first[i] = UNDEF
        nxt[i] = UNDEF
    for s in range(n - 1, -1, -1):
        if alive[s]:
            base = s * k
            for a in range(k):
                t = fwd[base + a]
                if t != UNDEF:
                    link(fwd, first, nxt, k, s, a, t)


@njit(cache=True)
def redirect_targets(fwd, first, nxt, alive, meta, parent, regs, ded):
    k = regs[K]
    n = meta[0]
    for s in range(n):
        if not alive[s]:
            continue
        base = s * k
        for a in range(k):
            t = fwd[base + a]
            if t != UNDEF and not alive[t]:
                fwd[base + a] = find(parent, t)
                push_ded(ded, regs, s, a)
    rebuild_backward(fwd, first, nxt, alive, n, k)


@njit(cache=True)
def tc3(fwd, first, nxt, alive, meta, parent, regs, coinc, ded):
    """Drain the coincidence stack. Switches to forward-only merging with
    one final redirection pass once merges outnumber half the active
    nodes, and does so at once when the stack has overflowed."""
    if not has_coinc(regs):
        return 0
    threshold = max(meta[1] // 2, 1)
    merges = 0
    batch = False
    while True:
        while regs[CSP] > 0:
            sp = regs[CSP] - 2
            regs[CSP] = sp
            x = find(parent, coinc[sp])
            y = find(parent, coinc[sp + 1])
            if x == y:
                continue
            if x > y:
                x, y = y, x
            parent[y] = x
            merges += 1
            if batch:
                merge_forward_only(fwd, alive, meta, parent, regs, coinc, ded, x, y)
            else:
                merge_nodes(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, x, y)
                if merges > threshold:
                    batch = True
        if not regs[LAZY]:
            break
        # identifications made directly in the partition
        regs[LAZY] = 0
        batch = True
        for y in range(meta[0]):
            if alive[y]:
                x = find(parent, y)
                if x != y:
                    merges += 1
                    merge_forward_only(fwd, alive, meta, parent, regs, coinc, ded, x, y)
    if batch:
        redirect_targets(fwd, first, nxt, alive, meta, parent, regs, ded)
    regs[TC3] += merges
    regs[TC3_PASSES] += 1
    return merges


@njit(cache=True)
def trace_define(fwd, first, nxt, alive, meta, parent, regs, ded, node, letters, start, length):
    k = regs[K]
    x = node
    for i in range(start, start + length):
        c = letters[i]
        t = fwd[x * k + c]
        if t < 0:
            t = tc1(fwd, first, nxt, alive, meta, parent, regs, ded, x, c)
            if t < 0:
                return t
        x = t
    return x


# -- deduction processing --------------------------------------------------------


@njit(cache=True)
def sweep_all(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, letters, ridx):
    """TC2 at every active node for every relation, in order."""
    k = regs[K]
    regs[SWEEPS] += 1
    changed = False
    nrel = ridx.shape[0]
    for node in range(meta[0]):
        if not alive[node]:
            continue
        for r in range(nrel):
            regs[TC2] += 1
            ls, ll, rs, rl = ridx[r, 0], ridx[r, 1], ridx[r, 2], ridx[r, 3]
            status, x, bu, y, bv = tc2_probe(fwd, k, letters, ls, ll, rs, rl, node)
            if status < 0:
                tc2_apply(fwd, first, nxt, parent, regs, coinc, ded, letters, ls, ll, rs, rl, x, bu, y, bv)
                changed = True
    return changed


@njit(cache=True)
def process_deductions(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, letters, ridx,
                       iota_ptr, iota_data, ch_ptr, ch_letter, ch_node, root, work):
    """Drain the deduction stack with the subword-tree backtrack search,
    identifying coincidences after every deduction. Returns DONE or
    STEP_LIMIT."""
    k = regs[K]
    if iota_ptr.shape[0] <= 1:
        regs[DSP] = 0
        regs[OVERFLOW] = 0
        tc3(fwd, first, nxt, alive, meta, parent, regs, coinc, ded)
        return DONE
    stack = work
    while True:
        while regs[DSP] > 0:
            sp = regs[DSP] - 2
            regs[DSP] = sp
            alpha = ded[sp]
            a = ded[sp + 1]
            regs[DEDUCTIONS] += 1
            if not alive[alpha]:
                continue
            t0 = root[a]
            if t0 < 0:
                continue
            stack[0] = alpha
            stack[1] = t0
            top = 1
            full = False
            while top > 0:
                top -= 1
                n = stack[2 * top]
                t = stack[2 * top + 1]
                for j in range(iota_ptr[t], iota_ptr[t + 1]):
                    r = iota_data[j]
                    regs[TC2] += 1
                    ls, ll, rs, rl = ridx[r, 0], ridx[r, 1], ridx[r, 2], ridx[r, 3]
                    # tc2_probe written out: a call here costs refcount traffic
                    x = n
                    for i in range(ls, ls + ll - 1):
                        x = fwd[x * k + letters[i]]
                        if x < 0:
                            break
                    if x < 0:
                        continue
                    y = n
                    for i in range(rs, rs + rl - 1):
                        y = fwd[y * k + letters[i]]
                        if y < 0:
                            break
                    if y < 0:
                        continue
                    bu = x
                    bv = y
                    if ll > 0:
                        bu = fwd[x * k + letters[ls + ll - 1]]
                    if rl > 0:
                        bv = fwd[y * k + letters[rs + rl - 1]]
                    if bu != bv and (bu >= 0 or bv >= 0):
                        tc2_apply(fwd, first, nxt, parent, regs, coinc, ded, letters, ls, ll, rs, rl,
                                  x, bu, y, bv)
                for j in range(ch_ptr[t], ch_ptr[t + 1]):
                    b = ch_letter[j]
                    child = ch_node[j]
                    s = first[n * k + b]
                    while s != UNDEF:
                        i = s * k + b
                        if alive[s] and fwd[i] == n:
                            if 2 * top + 2 > stack.shape[0]:
                                # out of search stack: fall back to a full
                                # sweep and ask the caller for a bigger one
                                regs[WORK_FULL] = 1
                                regs[OVERFLOW] = 1
                                regs[DSP] = 0
                                full = True
                                break
                            stack[2 * top] = s
                            stack[2 * top + 1] = child
                            top += 1
                        s = nxt[i]
                    if full:
                        break
                if full:
                    break
            if has_coinc(regs):
                tc3(fwd, first, nxt, alive, meta, parent, regs, coinc, ded)
            if steps_exceeded(regs):
                return STEP_LIMIT
        if regs[OVERFLOW]:
            regs[OVERFLOW] = 0
            regs[DSP] = 0
            sweep_all(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, letters, ridx)
            continue
        if has_coinc(regs):
            tc3(fwd, first, nxt, alive, meta, parent, regs, coinc, ded)
            continue
        return DONE


# -- HLT -----------------------------------------------------------------------


@njit(cache=True)
def hlt_step(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, letters, ridx, x):
    k = regs[K]
    for r in range(ridx.shape[0]):
        if not alive[x]:
            return DONE
        ls, ll, rs, rl = ridx[r, 0], ridx[r, 1], ridx[r, 2], ridx[r, 3]
        # trace the right-hand side in full and the left-hand side but its
        # last letter; an empty left-hand side swaps the roles
        if ll > 0:
            fs, fl, ps, pl = rs, rl, ls, ll - 1
        else:
            fs, fl, ps, pl = ls, 0, rs, max(rl - 1, 0)
        if trace_define(fwd, first, nxt, alive, meta, parent, regs, ded, x, letters, fs, fl) < 0:
            return NODE_LIMIT
        if trace_define(fwd, first, nxt, alive, meta, parent, regs, ded, x, letters, ps, pl) < 0:
            return NODE_LIMIT
        if tc2(fwd, first, nxt, parent, regs, coinc, ded, letters, ls, ll, rs, rl, x) == COINCIDENCE:
            tc3(fwd, first, nxt, alive, meta, parent, regs, coinc, ded)
    if alive[x]:
        for a in range(k):
            if fwd[x * k + a] == UNDEF:
                if tc1(fwd, first, nxt, alive, meta, parent, regs, ded, x, a) < 0:
                    return NODE_LIMIT
    return DONE


@njit(cache=True)
def next_hlt_node(alive, meta, regs):
    x = regs[HLT_CURSOR]
    n = meta[0]
    while x < n and not alive[x]:
        x += 1
    regs[HLT_CURSOR] = x
    return x if x < n else -1


@njit(cache=True)
def hlt_run(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, letters, ridx, headroom):
    tc3(fwd, first, nxt, alive, meta, parent, regs, coinc, ded)
    cap = alive.shape[0]
    while True:
        x = next_hlt_node(alive, meta, regs)
        if x < 0:
            return DONE
        if meta[0] + headroom > cap or regs[WORK_FULL] or regs[COINC_FULL]:
            return GROW
        code = hlt_step(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, letters, ridx, x)
        if code != DONE:
            return code
        regs[HLT_CURSOR] = x + 1
        if steps_exceeded(regs):
            return STEP_LIMIT


# -- Felsch ----------------------------------------------------------------------


@njit(cache=True)
def next_gap(fwd, alive, meta, regs):
    """Least active node with an undefined edge, and its least such letter,
    encoded as ``node * k + letter``; -1 if the graph is complete."""
    k = regs[K]
    x = regs[GAP_CURSOR]
    n = meta[0]
    while x < n:
        if alive[x]:
            base = x * k
            for a in range(k):
                if fwd[base + a] == UNDEF:
                    regs[GAP_CURSOR] = x
                    return base + a
        x += 1
    regs[GAP_CURSOR] = x
    return -1


@njit(cache=True)
def felsch_modified_run(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, letters, ridx,
                        iota_ptr, iota_data, ch_ptr, ch_letter, ch_node, root, work):
    k = regs[K]
    cap = alive.shape[0]
    code = process_deductions(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, letters, ridx,
                              iota_ptr, iota_data, ch_ptr, ch_letter, ch_node, root, work)
    if code != DONE:
        return code
    while True:
        gap = next_gap(fwd, alive, meta, regs)
        if gap < 0:
            return DONE
        if meta[0] + 2 > cap or regs[WORK_FULL] or regs[COINC_FULL]:
            return GROW
        if tc1(fwd, first, nxt, alive, meta, parent, regs, ded, gap // k, gap % k) < 0:
            return NODE_LIMIT
        code = process_deductions(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, letters, ridx,
                                  iota_ptr, iota_data, ch_ptr, ch_letter, ch_node, root, work)
        if code != DONE:
            return code
        if steps_exceeded(regs):
            return STEP_LIMIT


@njit(cache=True)
def heap_push(heap, qsz, key):
    i = qsz[0]
    qsz[0] = i + 1
    while i > 0:
        up = (i - 1) >> 1
        if heap[up] <= key:
            break
        heap[i] = heap[up]
        i = up
    heap[i] = key


@njit(cache=True)
def heap_pop(heap, qsz):
    top = heap[0]
    n = qsz[0] - 1
    qsz[0] = n
    if n == 0:
        return top
    key = heap[n]
    i = 0
    while True:
        c = 2 * i + 1
        if c >= n:
            break
        if c + 1 < n and heap[c + 1] < heap[c]:
            c += 1
        if heap[c] >= key:
            break
        heap[i] = heap[c]
        i = c
    heap[i] = key
    return top


@njit(cache=True)
def flag(dirty, heap, later, qsz, key, pos):
    if not dirty[key]:
        dirty[key] = 1
        if key > pos:
            heap_push(heap, qsz, key)
        else:
            later[qsz[1]] = key
            qsz[1] += 1


@njit(cache=True)
def mark_node(dirty, heap, later, qsz, nrel, node):
    for r in range(nrel):
        flag(dirty, heap, later, qsz, node * nrel + r, NO_POS)


@njit(cache=True)
def flag_all(alive, meta, regs, nrel, dirty, heap, later, qsz, pos):
    regs[OVERFLOW] = 0
    regs[DSP] = 0
    for n in range(meta[0]):
        if alive[n]:
            for r in range(nrel):
                flag(dirty, heap, later, qsz, n * nrel + r, pos)


@njit(cache=True)
def mark_pairs(fwd, first, nxt, alive, meta, regs, ded, nrel, iota_ptr, iota_data, ch_ptr, ch_letter,
               ch_node, root, work, dirty, heap, later, qsz, pos):
    """Drain the deduction stack, flagging every (node, relation) pair whose
    paths run through a deduced edge. Flagged pairs after ``pos`` join the
    running sweep; the rest wait in ``later`` for the next one. After an
    overflow every pair is flagged."""
    k = regs[K]
    if regs[OVERFLOW]:
        flag_all(alive, meta, regs, nrel, dirty, heap, later, qsz, pos)
        return
    if iota_ptr.shape[0] <= 1:
        regs[DSP] = 0
        return
    stack = work
    while regs[DSP] > 0:
        sp = regs[DSP] - 2
        regs[DSP] = sp
        alpha = ded[sp]
        a = ded[sp + 1]
        regs[DEDUCTIONS] += 1
        if not alive[alpha]:
            continue
        t0 = root[a]
        if t0 < 0:
            continue
        stack[0] = alpha
        stack[1] = t0
        top = 1
        while top > 0:
            top -= 1
            n = stack[2 * top]
            t = stack[2 * top + 1]
            for j in range(iota_ptr[t], iota_ptr[t + 1]):
                flag(dirty, heap, later, qsz, n * nrel + iota_data[j], pos)
            for j in range(ch_ptr[t], ch_ptr[t + 1]):
                b = ch_letter[j]
                child = ch_node[j]
                s = first[n * k + b]
                while s != UNDEF:
                    i = s * k + b
                    if alive[s] and fwd[i] == n:
                        if 2 * top + 2 > stack.shape[0]:
                            regs[WORK_FULL] = 1
                            flag_all(alive, meta, regs, nrel, dirty, heap, later, qsz, pos)
                            return
                        stack[2 * top] = s
                        stack[2 * top + 1] = child
                        top += 1
                    s = nxt[i]


@njit(cache=True)
def plain_sweep(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, letters, ridx,
                iota_ptr, iota_data, ch_ptr, ch_letter, ch_node, root, work, dirty, heap, later, qsz):
    """One TC2 pass over every (node, relation) pair in increasing order.

    Pairs that are not flagged are skipped: their last application changed
    nothing and no edge on their paths has appeared since, so applying TC2
    to them again is a no-op.
    """
    regs[SWEEPS] += 1
    k = regs[K]
    nrel = ridx.shape[0]
    # a sorted array is a valid heap
    m = qsz[1]
    heap[:m] = np.sort(later[:m])
    qsz[0] = m
    qsz[1] = 0
    changed = False
    while qsz[0] > 0:
        key = heap_pop(heap, qsz)
        dirty[key] = 0
        n = key // nrel
        if not alive[n]:
            continue
        r = key % nrel
        regs[TC2] += 1
        ls, ll, rs, rl = ridx[r, 0], ridx[r, 1], ridx[r, 2], ridx[r, 3]
        code, x, bu, y, bv = tc2_probe(fwd, k, letters, ls, ll, rs, rl, n)
        if code < 0:
            code = tc2_apply(fwd, first, nxt, parent, regs, coinc, ded, letters, ls, ll, rs, rl,
                             x, bu, y, bv)
        if code < 2:
            changed = True
        if code == EDGE_DEFINED:
            mark_pairs(fwd, first, nxt, alive, meta, regs, ded, nrel, iota_ptr, iota_data, ch_ptr,
                       ch_letter, ch_node, root, work, dirty, heap, later, qsz, key)
    return changed


@njit(cache=True)
def felsch_plain_run(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, letters, ridx,
                     iota_ptr, iota_data, ch_ptr, ch_letter, ch_node, root, work, dirty, heap, later, qsz):
    k = regs[K]
    nrel = ridx.shape[0]
    cap = alive.shape[0]
    while True:
        gap = next_gap(fwd, alive, meta, regs)
        if gap < 0:
            # complete: sweep until a sweep changes nothing, then confirm
            # with one exhaustive pass
            while True:
                changed = plain_sweep(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, letters,
                                      ridx, iota_ptr, iota_data, ch_ptr, ch_letter, ch_node, root, work,
                                      dirty, heap, later, qsz)
                if has_coinc(regs):
                    tc3(fwd, first, nxt, alive, meta, parent, regs, coinc, ded)
                    changed = True
                mark_pairs(fwd, first, nxt, alive, meta, regs, ded, nrel, iota_ptr, iota_data, ch_ptr,
                           ch_letter, ch_node, root, work, dirty, heap, later, qsz, NO_POS)
                if steps_exceeded(regs):
                    return STEP_LIMIT
                if not changed:
                    break
            if sweep_all(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, letters, ridx) \
                    or has_coinc(regs):
                tc3(fwd, first, nxt, alive, meta, parent, regs, coinc, ded)
                mark_pairs(fwd, first, nxt, alive, meta, regs, ded, nrel, iota_ptr, iota_data, ch_ptr,
                           ch_letter, ch_node, root, work, dirty, heap, later, qsz, NO_POS)
                continue
            regs[DSP] = 0
            return DONE
        if meta[0] + 2 > cap or regs[WORK_FULL] or regs[COINC_FULL]:
            return GROW
        new = tc1(fwd, first, nxt, alive, meta, parent, regs, ded, gap // k, gap % k)
        if new < 0:
            return NODE_LIMIT
        mark_node(dirty, heap, later, qsz, nrel, new)
        mark_pairs(fwd, first, nxt, alive, meta, regs, ded, nrel, iota_ptr, iota_data, ch_ptr,
                   ch_letter, ch_node, root, work, dirty, heap, later, qsz, NO_POS)
        plain_sweep(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, letters, ridx, iota_ptr,
                    iota_data, ch_ptr, ch_letter, ch_node, root, work, dirty, heap, later, qsz)
        tc3(fwd, first, nxt, alive, meta, parent, regs, coinc, ded)
        mark_pairs(fwd, first, nxt, alive, meta, regs, ded, nrel, iota_ptr, iota_data, ch_ptr,
                   ch_letter, ch_node, root, work, dirty, heap, later, qsz, NO_POS)
        if steps_exceeded(regs):
            return STEP_LIMIT


@njit(cache=True)
def felsch_naive_run(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, letters, ridx):
    """Plain Felsch with literal full sweeps; the reference for the flagged
    version, quadratic and only for small inputs."""
    k = regs[K]
    cap = alive.shape[0]
    while True:
        gap = next_gap(fwd, alive, meta, regs)
        if gap < 0:
            while True:
                changed = sweep_all(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, letters, ridx)
                if has_coinc(regs):
                    tc3(fwd, first, nxt, alive, meta, parent, regs, coinc, ded)
                    changed = True
                if steps_exceeded(regs):
                    return STEP_LIMIT
                if not changed:
                    break
            return DONE
        if meta[0] + 2 > cap or regs[WORK_FULL] or regs[COINC_FULL]:
            return GROW
        if tc1(fwd, first, nxt, alive, meta, parent, regs, ded, gap // k, gap % k) < 0:
            return NODE_LIMIT
        sweep_all(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, letters, ridx)
        tc3(fwd, first, nxt, alive, meta, parent, regs, coinc, ded)
        if steps_exceeded(regs):
            return STEP_LIMIT


# -- alternation -------------------------------------------------------------------


@njit(cache=True)
def alternating_run(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, letters, ridx,
                    iota_ptr, iota_data, ch_ptr, ch_letter, ch_node, root, work, hlt_steps, felsch_steps,
                    headroom):
    k = regs[K]
    cap = alive.shape[0]
    period = hlt_steps + felsch_steps
    while True:
        pos = regs[ALT_POS]
        if pos < hlt_steps:
            x = next_hlt_node(alive, meta, regs)
            if x < 0:
                regs[DSP] = 0
                regs[OVERFLOW] = 0
                tc3(fwd, first, nxt, alive, meta, parent, regs, coinc, ded)
                regs[DSP] = 0
                return DONE
            if meta[0] + headroom > cap or regs[WORK_FULL] or regs[COINC_FULL]:
                return GROW
            code = hlt_step(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, letters, ridx, x)
            if code != DONE:
                return code
            regs[HLT_CURSOR] = x + 1
        else:
            code = process_deductions(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, letters,
                                      ridx, iota_ptr, iota_data, ch_ptr, ch_letter, ch_node, root, work)
            if code != DONE:
                return code
            gap = next_gap(fwd, alive, meta, regs)
            if gap < 0:
                return DONE
            if meta[0] + 2 > cap or regs[WORK_FULL] or regs[COINC_FULL]:
                return GROW
            if tc1(fwd, first, nxt, alive, meta, parent, regs, ded, gap // k, gap % k) < 0:
                return NODE_LIMIT
            code = process_deductions(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, letters,
                                      ridx, iota_ptr, iota_data, ch_ptr, ch_letter, ch_node, root, work)
            if code != DONE:
                return code
        regs[ALT_POS] = (pos + 1) % period
        if steps_exceeded(regs):
            return STEP_LIMIT


# -- Stephen's procedure --------------------------------------------------------------
#
# Pair flags live in ``dirty`` (bit 0 at ``node * nrel + r``); bit 1 at
# ``node * nrel`` says the node is already queued in ``later``. A sweep sorts
# the queued nodes into ``heap`` and walks them with the cursor ``qsz[2]``.


@njit(cache=True)
def stephen_flag(dirty, later, qsz, nrel, n, r):
    base = n * nrel
    dirty[base + r] |= 1
    if not dirty[base] & 2:
        dirty[base] |= 2
        later[qsz[1]] = n
        qsz[1] += 1


@njit(cache=True)
def stephen_flag_node(dirty, later, qsz, nrel, n):
    for r in range(nrel):
        stephen_flag(dirty, later, qsz, nrel, n, r)


@njit(cache=True)
def stephen_settle(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, letters, ridx,
                   iota_ptr, iota_data, ch_ptr, ch_letter, ch_node, root, work, dirty, later, qsz):
    """Drain the deductions: every (node, relation) pair whose paths run
    through a new edge gets TC2 at once when both sides trace up to their
    last letters, and is flagged for expansion otherwise. Coincidences are
    processed as they appear. After an overflow every pair is flagged."""
    k = regs[K]
    nrel = ridx.shape[0]
    stack = work
    while True:
        if regs[OVERFLOW] or iota_ptr.shape[0] <= 1:
            regs[OVERFLOW] = 0
            regs[DSP] = 0
            for n in range(meta[0]):
                if alive[n]:
                    stephen_flag_node(dirty, later, qsz, nrel, n)
        while regs[DSP] > 0:
            sp = regs[DSP] - 2
            regs[DSP] = sp
            alpha = ded[sp]
            a = ded[sp + 1]
            regs[DEDUCTIONS] += 1
            if not alive[alpha]:
                continue
            t0 = root[a]
            if t0 < 0:
                continue
            stack[0] = alpha
            stack[1] = t0
            top = 1
            full = False
            while top > 0:
                top -= 1
                n = stack[2 * top]
                t = stack[2 * top + 1]
                for j in range(iota_ptr[t], iota_ptr[t + 1]):
                    r = iota_data[j]
                    ls, ll, rs, rl = ridx[r, 0], ridx[r, 1], ridx[r, 2], ridx[r, 3]
                    x = n
                    for i in range(ls, ls + ll - 1):
                        x = fwd[x * k + letters[i]]
                        if x < 0:
                            break
                    y = n
                    if x >= 0:
                        for i in range(rs, rs + rl - 1):
                            y = fwd[y * k + letters[i]]
                            if y < 0:
                                break
                    if x < 0 or y < 0:
                        stephen_flag(dirty, later, qsz, nrel, n, r)
                        continue
                    bu = x
                    bv = y
                    if ll > 0:
                        bu = fwd[x * k + letters[ls + ll - 1]]
                    if rl > 0:
                        bv = fwd[y * k + letters[rs + rl - 1]]
                    if bu < 0 and bv < 0:
                        stephen_flag(dirty, later, qsz, nrel, n, r)
                    elif bu != bv:
                        regs[TC2] += 1
                        tc2_apply(fwd, first, nxt, parent, regs, coinc, ded, letters, ls, ll, rs, rl,
                                  x, bu, y, bv)
                for j in range(ch_ptr[t], ch_ptr[t + 1]):
                    b = ch_letter[j]
                    child = ch_node[j]
                    s = first[n * k + b]
                    while s != UNDEF:
                        i = s * k + b
                        if alive[s] and fwd[i] == n:
                            if 2 * top + 2 > stack.shape[0]:
                                regs[WORK_FULL] = 1
                                regs[OVERFLOW] = 1
                                regs[DSP] = 0
                                full = True
                                break
                            stack[2 * top] = s
                            stack[2 * top + 1] = child
                            top += 1
                        s = nxt[i]
                    if full:
                        break
                if full:
                    break
            if has_coinc(regs):
                tc3(fwd, first, nxt, alive, meta, parent, regs, coinc, ded)
        if regs[OVERFLOW]:
            continue
        if has_coinc(regs):
            tc3(fwd, first, nxt, alive, meta, parent, regs, coinc, ded)
            continue
        return


@njit(cache=True)
def stephen_run(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, letters, ridx,
                iota_ptr, iota_data, ch_ptr, ch_letter, ch_node, root, work, dirty, heap, later, qsz,
                headroom, budget):
    """Elementary expansions over flagged (node, relation) pairs, in sweeps
    over the flagged nodes in increasing order, each followed by
    determination. A sweep takes only the nodes queued before it began, so
    no pair waits forever behind the nodes the sweep itself creates.

    A pair is flagged when its node is new, when an edge appears on one of
    its paths that TC2 alone cannot settle, or when its node is merged
    away (the flag moves to the surviving node). Returns DONE at the fixed
    point, PAUSED after ``budget`` pairs (if ``budget`` >= 0), or a limit
    code.
    """
    k = regs[K]
    nrel = ridx.shape[0]
    cap = alive.shape[0]
    done = 0
    while True:
        if qsz[2] >= qsz[0]:
            m = qsz[1]
            if m == 0:
                return DONE
            heap[:m] = np.sort(later[:m])
            qsz[0] = m
            qsz[1] = 0
            qsz[2] = 0
            regs[SWEEPS] += 1
        n = heap[qsz[2]]
        base = n * nrel
        dirty[base] &= 1
        if not alive[n]:
            rep = find(parent, n)
            for r in range(nrel):
                if dirty[base + r] & 1:
                    dirty[base + r] = 0
                    stephen_flag(dirty, later, qsz, nrel, rep, r)
            qsz[2] += 1
            continue
        for r in range(nrel):
            if not dirty[base + r] & 1:
                continue
            if meta[0] + headroom > cap or regs[WORK_FULL] or regs[COINC_FULL]:
                return GROW
            if budget >= 0 and done >= budget:
                return PAUSED
            if steps_exceeded(regs):
                return STEP_LIMIT
            dirty[base + r] &= 2
            done += 1
            for side in range(2):
                if not alive[n]:
                    break
                if side == 0:
                    ps, pl, qs, ql = ridx[r, 0], ridx[r, 1], ridx[r, 2], ridx[r, 3]
                else:
                    ps, pl, qs, ql = ridx[r, 2], ridx[r, 3], ridx[r, 0], ridx[r, 1]
                if follow(fwd, k, n, letters, ps, pl) < 0:
                    continue
                before = meta[0]
                if trace_define(fwd, first, nxt, alive, meta, parent, regs, ded, n, letters,
                                qs, max(ql - 1, 0)) < 0:
                    dirty[base + r] |= 1
                    return NODE_LIMIT
                for new in range(before, meta[0]):
                    stephen_flag_node(dirty, later, qsz, nrel, new)
                if tc2(fwd, first, nxt, parent, regs, coinc, ded, letters, ps, pl, qs, ql, n) == COINCIDENCE:
                    tc3(fwd, first, nxt, alive, meta, parent, regs, coinc, ded)
                stephen_settle(fwd, first, nxt, alive, meta, parent, regs, coinc, ded, letters, ridx,
                               iota_ptr, iota_data, ch_ptr, ch_letter, ch_node, root, work, dirty,
                               later, qsz)
            if not alive[n]:
                break
        if alive[n]:
            qsz[2] += 1
        # a node merged away mid-visit stays at the cursor so its flags move on


# -- whole-graph helpers ------------------------------------------------------------------


@njit(cache=True)
def is_compatible(fwd, alive, n, k, letters, ridx):
    for node in range(n):
        if not alive[node]:
            continue
        for r in range(ridx.shape[0]):
            x = follow(fwd, k, node, letters, ridx[r, 0], ridx[r, 1])
            if x < 0:
                return False
            if x != follow(fwd, k, node, letters, ridx[r, 2], ridx[r, 3]):
                return False
    return True


@njit(cache=True)
def bfs_order(fwd, n, k, letter_order):
    """Old ids in breadth-first first-visit order from node 0."""
    seen = np.zeros(n, np.uint8)
    order = np.empty(n, np.int64)
    order[0] = 0
    seen[0] = 1
    head = 0
    tail = 1
    while head < tail:
        s = order[head]
        head += 1
        for a in letter_order:
            t = fwd[s * k + a]
            if t != UNDEF and not seen[t]:
                seen[t] = 1
                order[tail] = t
                tail += 1
    return order[:tail]


@njit(cache=True)
def relabel_table(fwd, k, order, n_old):
    """Forward table of the graph renumbered so that ``order[i]`` becomes ``i``."""
    new_id = np.full(n_old, -1, np.int64)
    for i in range(order.shape[0]):
        new_id[order[i]] = i
    m = order.shape[0]
    out = np.full(m * k, UNDEF, np.int32)
    for i in range(m):
        s = order[i]
        for a in range(k):
            t = fwd[s * k + a]
            if t != UNDEF:
                out[i * k + a] = new_id[t]
    return out


def new_regs(k):
    regs = np.zeros(NUM_REGS, np.int64)
    regs[K] = k
    regs[MAX_STEPS] = -1
    regs[OMEGA] = -1
    regs[ZERO] = -1
    return regs


def pairs(buf, size) -> list:
    flat = buf[:size].tolist()
    return list(zip(flat[0::2], flat[1::2]))
