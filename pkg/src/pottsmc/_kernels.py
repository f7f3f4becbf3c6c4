"""Compiled chain kernels.

Whole-chain drivers are jitted so per-iteration cost is the arithmetic itself,
not interpreter dispatch; this is what makes the O(n^2 q) vs O(n k q)
per-iteration scaling of the two auxiliary-Gaussian variants measurable at
moderate n. All matrix-vector work is written as explicit loops on purpose:
BLAS threading would blur the scaling and break single-thread determinism
guarantees. Every kernel takes the chain's np.random.Generator directly, so
draws are bit-identical to the equivalent pure-numpy sequence and kernels can
run without the GIL.
"""

import numpy as np
from numba import njit

_JIT = dict(nogil=True, cache=True)


@njit(inline="always")
def _cat_from_logits(logits, q, u):
    # Max-subtracted categorical draw; one uniform per call.
    m = logits[0]
    for ell in range(1, q):
        if logits[ell] > m:
            m = logits[ell]
    total = 0.0
    for ell in range(q):
        total += np.exp(logits[ell] - m)
    target = u * total
    acc = 0.0
    for ell in range(q):
        acc += np.exp(logits[ell] - m)
        if target < acc:
            return ell
    return q - 1


@njit(inline="always")
def _phi_direct(A, beta, x):
    # beta * sum over ordered pairs (diagonal included as stored).
    n = x.size
    acc = 0.0
    for i in range(n):
        xi = x[i]
        for j in range(n):
            if x[j] == xi:
                acc += A[i, j]
    return beta * acc


# ---------------------------------------------------------------- regular AG

@njit(**_JIT)
def ag_step(B, L, x, z, logits, rng):
    """One block-Gibbs step: z_ell = L xi + y_ell, then sites via softmax(B z)."""
    n = x.size
    q = z.shape[0]
    for ell in range(q):
        xi = rng.standard_normal(n)
        for i in range(n):
            acc = 0.0
            for j in range(i + 1):
                acc += L[i, j] * xi[j]
            if x[i] == ell:
                acc += 1.0
            z[ell, i] = acc
    u = rng.random(n)
    for i in range(n):
        for ell in range(q):
            acc = 0.0
            for j in range(n):
                acc += B[i, j] * z[ell, j]
            logits[ell] = acc
        x[i] = _cat_from_logits(logits, q, u[i])


@njit(**_JIT)
def ag_chain(B, L, A, beta, x, m, q, rng, draws, phis):
    n = x.size
    z = np.empty((q, n))
    logits = np.empty(q)
    for t in range(m):
        ag_step(B, L, x, z, logits, rng)
        for i in range(n):
            draws[t, i] = np.int8(x[i])
        phis[t] = _phi_direct(A, beta, x)


@njit(**_JIT)
def ag_bench(B, L, x, iters, q, rng):
    # Timing helper: bare steps, no trace recording.
    n = x.size
    z = np.empty((q, n))
    logits = np.empty(q)
    for _ in range(iters):
        ag_step(B, L, x, z, logits, rng)


# --------------------------------------------------------------- low-rank AG

@njit(**_JIT)
def lowrank_step(mu, P, x, z, zw, logits, rng):
    """Low-rank step: z_ell(j) ~ N(p_j' y_ell, 1/mu_j), sites via softmax.

    z receives the raw auxiliary draws; zw the mu-weighted copies that form
    the site logits sum_j mu_j z_ell(j) p_j(i).
    """
    n = x.size
    k = mu.size
    q = z.shape[0]
    if k == 0:
        u = rng.random(n)
        for i in range(n):
            s = int(u[i] * q)
            if s >= q:
                s = q - 1
            x[i] = s
        return
    for ell in range(q):
        for j in range(k):
            z[ell, j] = 0.0
    for i in range(n):
        xi_state = x[i]
        for j in range(k):
            z[xi_state, j] += P[i, j]
    noise = rng.standard_normal(q * k)
    idx = 0
    for ell in range(q):
        for j in range(k):
            z[ell, j] = z[ell, j] + noise[idx] / np.sqrt(mu[j])
            zw[ell, j] = mu[j] * z[ell, j]
            idx += 1
    u = rng.random(n)
    for i in range(n):
        for ell in range(q):
            acc = 0.0
            for j in range(k):
                acc += zw[ell, j] * P[i, j]
            logits[ell] = acc
        x[i] = _cat_from_logits(logits, q, u[i])


@njit(**_JIT)
def lowrank_chain(mu, P, A, beta, x, m, q, rng, draws, phis):
    n = x.size
    k = mu.size
    z = np.empty((q, max(k, 1)))
    zw = np.empty((q, max(k, 1)))
    logits = np.empty(q)
    for t in range(m):
        lowrank_step(mu, P, x, z, zw, logits, rng)
        for i in range(n):
            draws[t, i] = np.int8(x[i])
        phis[t] = _phi_direct(A, beta, x)


@njit(**_JIT)
def lowrank_bench(mu, P, x, iters, q, rng):
    n = x.size
    k = mu.size
    z = np.empty((q, max(k, 1)))
    zw = np.empty((q, max(k, 1)))
    logits = np.empty(q)
    for _ in range(iters):
        lowrank_step(mu, P, x, z, zw, logits, rng)


# ------------------------------------------------------------- q=2 variants

@njit(**_JIT)
def ising_ag_step(B, L, x, w, rng):
    """Two-state specialization: one n-vector W ~ N(y_0 - y_1, 2 B^-1)."""
    n = x.size
    sqrt2 = np.sqrt(2.0)
    xi = rng.standard_normal(n)
    for i in range(n):
        acc = 0.0
        for j in range(i + 1):
            acc += L[i, j] * xi[j]
        mean_i = 1.0 if x[i] == 0 else -1.0
        w[i] = sqrt2 * acc + mean_i
    u = rng.random(n)
    for i in range(n):
        t = 0.0
        for j in range(n):
            t += B[i, j] * w[j]
        # site logits are +-t/2, i.e. P(state 0) = sigmoid(t)
        p0 = 1.0 / (1.0 + np.exp(-t))
        x[i] = 0 if u[i] < p0 else 1


@njit(**_JIT)
def ising_ag_chain(B, L, A, beta, x, m, rng, draws, phis):
    n = x.size
    w = np.empty(n)
    for t in range(m):
        ising_ag_step(B, L, x, w, rng)
        for i in range(n):
            draws[t, i] = np.int8(x[i])
        phis[t] = _phi_direct(A, beta, x)


@njit(**_JIT)
def ising_lowrank_step(mu, P, x, w, rng):
    """Two-state low-rank: W_j ~ N(p_j'(y_0 - y_1), 2/mu_j), k draws total."""
    n = x.size
    k = mu.size
    if k == 0:
        u = rng.random(n)
        for i in range(n):
            x[i] = 0 if u[i] < 0.5 else 1
        return
    for j in range(k):
        w[j] = 0.0
    for i in range(n):
        s = 1.0 if x[i] == 0 else -1.0
        for j in range(k):
            w[j] += s * P[i, j]
    noise = rng.standard_normal(k)
    for j in range(k):
        w[j] += noise[j] * np.sqrt(2.0 / mu[j])
    u = rng.random(n)
    for i in range(n):
        t = 0.0
        for j in range(k):
            t += mu[j] * w[j] * P[i, j]
        p0 = 1.0 / (1.0 + np.exp(-t))
        x[i] = 0 if u[i] < p0 else 1


@njit(**_JIT)
def ising_lowrank_chain(mu, P, A, beta, x, m, rng, draws, phis):
    k = mu.size
    n = x.size
    w = np.empty(max(k, 1))
    for t in range(m):
        ising_lowrank_step(mu, P, x, w, rng)
        for i in range(n):
            draws[t, i] = np.int8(x[i])
        phis[t] = _phi_direct(A, beta, x)


# ---------------------------------------------------------------- heat bath

@njit(**_JIT)
def heat_bath_sweep(A, beta, x, q, logits, rng):
    """One sweep: sites 0..n-1 in order, each from its full conditional."""
    n = x.size
    u = rng.random(n)
    for i in range(n):
        for ell in range(q):
            logits[ell] = 0.0
        for j in range(n):
            if j != i:
                logits[x[j]] += beta * A[i, j]
        x[i] = _cat_from_logits(logits, q, u[i])


@njit(**_JIT)
def heat_bath_chain(A, beta, x, m, q, rng, draws, phis):
    n = x.size
    logits = np.empty(q)
    for t in range(m):
        heat_bath_sweep(A, beta, x, q, logits, rng)
        for i in range(n):
            draws[t, i] = np.int8(x[i])
        phis[t] = _phi_direct(A, beta, x)


# ---------------------------------------------------------- cluster kernels

@njit(inline="always")
def _find_root(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:  # path compression
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@njit(**_JIT)
def sw_step(ei, ej, pbond, x, q, parent, comp_state, rng):
    """Percolate bonds between equal-state endpoints, re-color components."""
    n = x.size
    for i in range(n):
        parent[i] = i
    for e in range(ei.size):
        a = ei[e]
        b = ej[e]
        if x[a] == x[b]:
            if rng.random() < pbond[e]:
                ra = _find_root(parent, a)
                rb = _find_root(parent, b)
                if ra != rb:
                    parent[rb] = ra
    for i in range(n):
        comp_state[i] = -1
    for i in range(n):
        r = _find_root(parent, i)
        if comp_state[r] < 0:
            comp_state[r] = rng.integers(0, q)
        x[i] = comp_state[r]


@njit(**_JIT)
def sw_chain(ei, ej, pbond, A, beta, x, m, q, rng, draws, phis):
    n = x.size
    parent = np.empty(n, dtype=np.int64)
    comp_state = np.empty(n, dtype=np.int64)
    for t in range(m):
        sw_step(ei, ej, pbond, x, q, parent, comp_state, rng)
        for i in range(n):
            draws[t, i] = np.int8(x[i])
        phis[t] = _phi_direct(A, beta, x)


@njit(**_JIT)
def wolff_step(indptr, indices, pedge, x, q, in_cluster, stack, members, rng):
    """Grow one cluster from a uniform seed, then re-color it.

    A site rejected across one edge stays eligible through other edges, so
    membership is tracked per node, not per attempt.
    """
    n = x.size
    seed = rng.integers(0, n)
    s = x[seed]
    stack[0] = seed
    top = 1
    in_cluster[seed] = True
    members[0] = seed
    count = 1
    while top > 0:
        top -= 1
        i = stack[top]
        for ptr in range(indptr[i], indptr[i + 1]):
            j = indices[ptr]
            if not in_cluster[j] and x[j] == s:
                if rng.random() < pedge[ptr]:
                    in_cluster[j] = True
                    stack[top] = j
                    top += 1
                    members[count] = j
                    count += 1
    if q == 2:
        new = 1 - s
    else:
        r = rng.integers(0, q - 1)
        new = r if r < s else r + 1
    for t in range(count):
        x[members[t]] = new
        in_cluster[members[t]] = False


@njit(**_JIT)
def wolff_chain(indptr, indices, pedge, A, beta, x, m, q, rng, draws, phis):
    n = x.size
    in_cluster = np.zeros(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    members = np.empty(n, dtype=np.int64)
    for t in range(m):
        wolff_step(indptr, indices, pedge, x, q, in_cluster, stack, members, rng)
        for i in range(n):
            draws[t, i] = np.int8(x[i])
        phis[t] = _phi_direct(A, beta, x)
