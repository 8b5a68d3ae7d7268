"""Hot loops: rotor walks, orbit iteration, exact floor words, firings.

Every function here is compiled with numba unless ``ROTORROUTER_NO_NUMBA``
is set, in which case the identical source runs as plain Python. Kernels
take and mutate caller-owned numpy arrays; optional outputs are disabled
by passing zero-length arrays.

Lattice kernels work on a flattened C-order grid. ``offsets[i]`` is the
flat displacement of the i-th direction of the rotor ordering, and
``margin[p]`` marks cells too close to the edge to fire or settle safely;
kernels stop and report so the caller can enlarge the grid.
"""
import numpy as np

from ._accel import njit

R_LABEL = 0
L_LABEL = 1

# status codes shared by the lattice kernels
DONE = 0
NEEDS_GROW = 1
NEEDS_RANDOM = 2
CAP_EXCEEDED = 3


# ---------------------------------------------------------------- 1-D model


@njit
def walk_1d(labels, origin, cap, path):
    """Route one particle from ``origin`` through the label array.

    Flips each label as the particle leaves the site. Returns
    ``(side, steps)`` with side +1/-1 for a right/left exit and 0 when
    ``cap`` steps were exceeded. ``path`` (if non-empty) receives the
    visited indices, exit site included.
    """
    n = labels.shape[0]
    p = origin
    steps = 0
    trace = path.shape[0] > 0
    if trace:
        path[0] = p
    while 0 <= p < n:
        if steps >= cap:
            return 0, steps
        lab = labels[p]
        labels[p] = 1 - lab
        if lab == R_LABEL:
            p += 1
        else:
            p -= 1
        steps += 1
        if trace:
            path[steps] = p
    if p >= n:
        return 1, steps
    return -1, steps


@njit
def render_triple(x, y, z, s, out):
    """Write R^(z-x) L^(y-z) R^s into ``out`` (length y-x+s)."""
    for i in range(z - x):
        out[i] = R_LABEL
    for i in range(z - x, y - x):
        out[i] = L_LABEL
    for i in range(y - x, y - x + s):
        out[i] = R_LABEL


@njit
def read_triple(x, labels, s):
    """Parse R^i L^j R^s; returns (y, z, ok) with y, z absolute sites."""
    n = labels.shape[0]
    if n < s:
        return 0, 0, False
    for k in range(n - s, n):
        if labels[k] != R_LABEL:
            return 0, 0, False
    body = n - s
    i = 0
    while i < body and labels[i] == R_LABEL:
        i += 1
    k = i
    while k < body and labels[k] == L_LABEL:
        k += 1
    if k != body:
        return 0, 0, False
    y = x + body
    z = x + i
    return y, z, True


@njit
def piecewise_step(x, y, z, r, s):
    if x + y <= z:
        return x, y + s, z - y, 1
    return x - r, y, z - x + 1, 0


@njit
def oracle_sweep(xmin, ymax, r, s):
    """Count triples in the box where the label walk disagrees with the
    closed-form step. Returns (checked, mismatches)."""
    size = ymax - xmin + 2 * s + r + 2
    buf = np.zeros(size, dtype=np.uint8)
    nopath = np.zeros(0, dtype=np.int64)
    checked = 0
    bad = 0
    for x in range(xmin, 1):
        for y in range(0, ymax + 1):
            for z in range(x, y + 1):
                # leave r spare cells on the left so a left exit can grow in place
                n = y - x + s
                lab = buf[r:r + n]
                render_triple(x, y, z, s, lab)
                cap = 4 * (n + 1) * (n + 1)
                side, _ = walk_1d(lab, -x, cap, nopath)
                if side == 1:
                    grown = buf[r:r + n + s]
                    for k in range(n, n + s):
                        grown[k] = R_LABEL
                    nx = x
                elif side == -1:
                    grown = buf[0:r + n]
                    for k in range(r):
                        grown[k] = R_LABEL
                    nx = x - r
                else:
                    bad += 1
                    checked += 1
                    continue
                ny, nz, ok = read_triple(nx, grown, s)
                ex, ey, ez, _ = piecewise_step(x, y, z, r, s)
                if not ok or nx != ex or ny != ey or nz != ez:
                    bad += 1
                checked += 1
    return checked, bad


@njit
def orbit(x, y, z, r, s, n, traj, bits):
    """Iterate the piecewise map n times.

    ``bits[k]`` gets 1 for an f+ step and 0 for an f- step (step k+1).
    ``traj`` (if non-empty, shape (n+1, 3)) receives every state.
    Returns the final triple.
    """
    keep = traj.shape[0] > 0
    if keep:
        traj[0, 0] = x
        traj[0, 1] = y
        traj[0, 2] = z
    for k in range(n):
        if x + y <= z:
            z = z - y
            y = y + s
            bits[k] = 1
        else:
            z = z - x + 1
            x = x - r
            bits[k] = 0
        if keep:
            traj[k + 1, 0] = x
            traj[k + 1, 1] = y
            traj[k + 1, 2] = z
    return x, y, z


# ------------------------------------------------------- exact floor words


@njit
def isqrt64(n):
    """floor(sqrt(n)) for 0 <= n < 2**62, integer Newton iteration."""
    if n < 2:
        return n
    bits = 0
    t = n
    while t > 0:
        t >>= 1
        bits += 1
    x = 1 << ((bits + 1) // 2)
    while True:
        y = (x + n // x) // 2
        if y >= x:
            return x
        x = y


@njit
def floor_quadratic(a, b, d, m):
    """Exact floor((a + b*sqrt(d)) / m) for integers, m != 0, d >= 0."""
    bb = b * b * d
    t = isqrt64(bb)
    exact = t * t == bb
    if b >= 0:
        lo = a + t
    elif exact:
        lo = a - t
    else:
        lo = a - t - 1
    # lo = floor(a + b*sqrt(d)); the value is an integer iff exact
    if m > 0:
        return lo // m
    if exact:
        return (-lo) // (-m)
    return (-lo - 1) // (-m)


@njit
def floor_word(a0, a1, b0, b1, d, m, length, out):
    """out[k] = floor(v(n+1)) - floor(v(n)) for n = k+1, where
    v(n) = (a0 + a1*n + (b0 + b1*n)*sqrt(d)) / m."""
    prev = floor_quadratic(a0 + a1, b0 + b1, d, m)
    for k in range(length):
        n1 = k + 2
        cur = floor_quadratic(a0 + a1 * n1, b0 + b1 * n1, d, m)
        out[k] = cur - prev
        prev = cur


# ------------------------------------------------- d-dimensional aggregate


@njit
def deposit_run(occ, rot, visits, offsets, origin, margin, n, totals,
                history, settled, cap):
    """Deposit up to ``n`` particles at ``origin``.

    Returns the number completed. Stops early (after settling) when a
    particle settles on a margin cell, and returns -1 - done if a walk
    exceeds ``cap`` steps.
    """
    k_dirs = offsets.shape[0]
    record = history.shape[0] > 0
    for i in range(n):
        p = origin
        visits[p] += 1
        steps = 0
        while occ[p]:
            d = rot[p]
            nd = d + 1
            if nd == k_dirs:
                nd = 0
            rot[p] = nd
            totals[d] += 1
            p += offsets[d]
            visits[p] += 1
            steps += 1
            if steps > cap:
                return -1 - i
        occ[p] = True
        rot[p] = 0
        settled[i] = p
        if record:
            for j in range(k_dirs):
                history[i, j] = totals[j]
        if margin[p]:
            return i + 1
    return n


# ------------------------------------------------------ particle firings


@njit
def fire_one(counts, rot, offsets, x):
    d = rot[x]
    nd = d + 1
    if nd == offsets.shape[0]:
        nd = 0
    rot[x] = nd
    counts[x] -= 1
    q = x + offsets[d]
    counts[q] += 1
    return q


@njit
def fire_many(counts, rot, odo, offsets, x, k):
    """Fire ``k`` particles from ``x`` in rotor order."""
    k_dirs = offsets.shape[0]
    q = k // k_dirs
    rem = k - q * k_dirs
    d0 = rot[x]
    for j in range(k_dirs):
        add = q
        if j < rem:
            add += 1
        if add:
            counts[x + offsets[(d0 + j) % k_dirs]] += add
    counts[x] -= k
    odo[x] += k
    rot[x] = (d0 + rem) % k_dirs


@njit
def unfire_many(counts, rot, odo, offsets, x, k):
    """Undo the last ``k`` firings of ``x``."""
    k_dirs = offsets.shape[0]
    q = k // k_dirs
    rem = k - q * k_dirs
    d0 = rot[x]
    for j in range(k_dirs):
        sub = q
        if j < rem:
            sub += 1
        if sub:
            counts[x + offsets[(d0 - 1 - j) % k_dirs]] -= sub
    counts[x] += k
    odo[x] -= k
    rot[x] = (d0 - rem) % k_dirs


@njit
def _wants(counts, odo, x, mode):
    if mode == 0:
        return counts[x] >= 2
    return counts[x] <= 0 and odo[x] > 0


@njit
def relax(counts, rot, odo, offsets, margin, mode):
    """One-sided correction of an odometer guess, FIFO order.

    mode 0 fires the whole excess of every site holding two or more
    particles; mode 1 unfires sites left empty (or in debt) that have
    fired, never pushing a count above one. Returns (status, events).
    """
    n = counts.shape[0]
    k_dirs = offsets.shape[0]
    ring = np.empty(n, dtype=np.int64)
    queued = np.zeros(n, dtype=np.uint8)
    head = 0
    size = 0
    for p in range(n):
        if _wants(counts, odo, p, mode):
            ring[(head + size) % n] = p
            size += 1
            queued[p] = 1
    events = 0
    while size > 0:
        x = ring[head]
        if not _wants(counts, odo, x, mode):
            head = (head + 1) % n
            size -= 1
            queued[x] = 0
            continue
        if mode == 0 and margin[x]:
            return NEEDS_GROW, events
        head = (head + 1) % n
        size -= 1
        queued[x] = 0
        if mode == 0:
            fire_many(counts, rot, odo, offsets, x, counts[x] - 1)
        else:
            unfire_many(counts, rot, odo, offsets, x, min(odo[x], 1 - counts[x]))
        events += 1
        for j in range(k_dirs):
            nb = x + offsets[j]
            if queued[nb] == 0 and _wants(counts, odo, nb, mode):
                ring[(head + size) % n] = nb
                size += 1
                queued[nb] = 1
    return DONE, events


@njit
def pop_cycles(counts, rot, odo, offsets):
    """Unfire once around every cycle of last-exit pointers.

    The last-exit pointer of a fired site is the direction it fired in
    most recently. Repeats whole passes until none is left and returns
    the number of unfirings.
    """
    n = counts.shape[0]
    k_dirs = offsets.shape[0]
    total = 0
    state = np.zeros(n, dtype=np.int64)
    while True:
        state[:] = 0
        popped = 0
        stamp = 0
        for s0 in range(n):
            if odo[s0] <= 0 or state[s0] != 0:
                continue
            stamp += 1
            x = s0
            while odo[x] > 0 and state[x] == 0:
                state[x] = stamp
                x = x + offsets[(rot[x] - 1) % k_dirs]
            if odo[x] > 0 and state[x] == stamp:
                y = x
                while True:
                    nxt = y + offsets[(rot[y] - 1) % k_dirs]
                    unfire_many(counts, rot, odo, offsets, y, 1)
                    popped += 1
                    y = nxt
                    if y == x:
                        break
            y = s0
            while state[y] == stamp:
                state[y] = -1
                if odo[y] <= 0:
                    break
                y = y + offsets[(rot[y] - 1) % k_dirs]
        total += popped
        if popped == 0:
            return total


@njit
def cycle_sites(succ, active):
    """Number of active nodes lying on a cycle of the map ``succ``.

    Inactive nodes are sinks.
    """
    n = succ.shape[0]
    state = np.zeros(n, dtype=np.int64)
    on_cycle = 0
    stamp = 0
    for s0 in range(n):
        if not active[s0] or state[s0] != 0:
            continue
        stamp += 1
        x = s0
        while active[x] and state[x] == 0:
            state[x] = stamp
            x = succ[x]
        if active[x] and state[x] == stamp:
            y = x
            while True:
                on_cycle += 1
                y = succ[y]
                if y == x:
                    break
        y = s0
        while active[y] and state[y] == stamp:
            state[y] = -1
            y = succ[y]
    return on_cycle


@njit
def stabilize_queue(counts, rot, odo, offsets, margin, cap):
    """FIFO schedule, one particle per firing. Returns (status, fired)."""
    n = counts.shape[0]
    ring = np.empty(n, dtype=np.int64)
    queued = np.zeros(n, dtype=np.uint8)
    head = 0
    size = 0
    for p in range(n):
        if counts[p] >= 2:
            ring[(head + size) % n] = p
            size += 1
            queued[p] = 1
    fired = 0
    while size > 0:
        x = ring[head]
        if margin[x]:
            return NEEDS_GROW, fired
        head = (head + 1) % n
        size -= 1
        queued[x] = 0
        if fired >= cap:
            return CAP_EXCEEDED, fired
        nb = fire_one(counts, rot, offsets, x)
        odo[x] += 1
        fired += 1
        if counts[nb] >= 2 and queued[nb] == 0:
            ring[(head + size) % n] = nb
            size += 1
            queued[nb] = 1
        if counts[x] >= 2:
            ring[(head + size) % n] = x
            size += 1
            queued[x] = 1
    return DONE, fired


@njit
def stabilize_random(counts, rot, odo, offsets, margin, rand, cap):
    """Fire one particle at a uniformly chosen unstable site per step.

    Consumes ``rand`` in order. Returns (status, fired, used).
    """
    n = counts.shape[0]
    members = np.empty(n, dtype=np.int64)
    pos = np.full(n, -1, dtype=np.int64)
    size = 0
    for p in range(n):
        if counts[p] >= 2:
            members[size] = p
            pos[p] = size
            size += 1
    fired = 0
    used = 0
    while size > 0:
        if used >= rand.shape[0]:
            return NEEDS_RANDOM, fired, used
        i = rand[used] % size
        x = members[i]
        if margin[x]:
            return NEEDS_GROW, fired, used
        used += 1
        if fired >= cap:
            return CAP_EXCEEDED, fired, used
        nb = fire_one(counts, rot, offsets, x)
        odo[x] += 1
        fired += 1
        if counts[x] < 2:
            last = members[size - 1]
            members[i] = last
            pos[last] = i
            pos[x] = -1
            size -= 1
        if counts[nb] >= 2 and pos[nb] == -1:
            members[size] = nb
            pos[nb] = size
            size += 1
    return DONE, fired, used


@njit
def stabilize_scanline(counts, rot, odo, offsets, margin, cap):
    """Raster sweeps, one particle per unstable site per sweep."""
    n = counts.shape[0]
    fired = 0
    active = True
    while active:
        active = False
        for x in range(n):
            if counts[x] >= 2:
                if margin[x]:
                    return NEEDS_GROW, fired
                if fired >= cap:
                    return CAP_EXCEEDED, fired
                fire_one(counts, rot, offsets, x)
                odo[x] += 1
                fired += 1
                active = True
    return DONE, fired


@njit
def floor_word_incremental(a0, a1, b0, b1, d, m, t0, e0, length, out):
    """Same output as ``floor_word`` for b0 + b1 >= 0 and b1 >= 0.

    Tracks t = floor(b*sqrt(d)) and the residual b*b*d - t*t as b grows
    by b1 per term, so nothing of size b**2 is ever formed and the loop
    stays exact in int64 far beyond the direct method's range. The
    caller supplies t0 and e0 for b = b0 + b1.
    """
    step = isqrt64(b1 * b1 * d)
    b = b0 + b1
    t = t0
    e = e0
    a = a0 + a1
    lo = a + t
    if m > 0:
        prev = lo // m
    elif e == 0:
        prev = (-lo) // (-m)
    else:
        prev = (-lo - 1) // (-m)
    for k in range(length):
        # b -> b + b1 adds (2*b*b1 + b1*b1)*d to b*b*d
        e += (2 * b + b1) * b1 * d
        b += b1
        nt = t + step
        e -= (nt - t) * (nt + t)
        t = nt
        while e < 0:
            e += 2 * t - 1
            t -= 1
        while e >= 2 * t + 1:
            e -= 2 * t + 1
            t += 1
        a += a1
        lo = a + t
        if m > 0:
            cur = lo // m
        elif e == 0:
            cur = (-lo) // (-m)
        else:
            cur = (-lo - 1) // (-m)
        out[k] = cur - prev
        prev = cur


@njit
def window_codes(bits, n, codes):
    """codes[i] = the n bits starting at i read as a binary number (n <= 62)."""
    count = bits.shape[0] - n + 1
    c = 0
    for j in range(n):
        c = (c << 1) | np.int64(bits[j])
    codes[0] = c
    mask = (1 << n) - 1
    for i in range(1, count):
        c = ((c << 1) | np.int64(bits[i + n - 1])) & mask
        codes[i] = c


@njit
def count_marked(codes, table):
    """Distinct values in ``codes``, all below table.shape[0]."""
    table[:] = 0
    distinct = 0
    for c in codes:
        if table[c] == 0:
            table[c] = 1
            distinct += 1
    return distinct
