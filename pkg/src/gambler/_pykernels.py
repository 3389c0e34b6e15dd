"""Pure-Python/numpy implementations of the hot loops.

Every function here has a twin in ``_ckernels.pyx`` with the same signature
and the same floating-point operation order, so both backends produce
bit-identical results.
"""
import numpy as np


def lattice_values(level, p, gamma, start=0, count=-1):
    """v(k / 2**level) for k in [start, start + count), as float64.

    ``count < 0`` means "through k = 2**level". The point k = 2**level is the
    boundary state and evaluates to exactly 1.
    """
    top = 1 << level
    if count < 0:
        count = top + 1 - start
    k = np.arange(start, start + count, dtype=np.int64)
    acc = np.zeros(count, dtype=np.float64)
    prod = np.ones(count, dtype=np.float64)
    q = 1.0 - p
    gi = 1.0
    for i in range(1, level + 1):
        gi = gi * gamma
        c = q * gi
        bit = ((k >> (level - i)) & 1).astype(bool)
        acc = np.where(bit, acc + c * prod, acc)
        prod = prod * np.where(bit, p, q)
    acc[k == top] = 1.0
    return acc


def bellman_backup(F, p, gamma, stride=1, tie_tol=0.0):
    """Greedy one-step backup on the integer grid {0, ..., N}, N = len(F) - 1.

    For states i = stride, 2*stride, ... < N and integer bets 1 <= m <= min(i, N-i)
    computes max_m  p*gamma*F[i-m] + (1-p)*gamma*F[i+m]. Returns the maxima and
    the largest bet whose backup is within ``tie_tol`` of the maximum.
    """
    F = np.ascontiguousarray(F, dtype=np.float64)
    N = F.shape[0] - 1
    pg = p * gamma
    qg = (1.0 - p) * gamma
    states = np.arange(stride, N, stride)
    best = np.empty(states.shape[0], dtype=np.float64)
    action = np.empty(states.shape[0], dtype=np.int64)
    for j, i in enumerate(states):
        mmax = min(i, N - i)
        vals = pg * F[i - mmax:i][::-1] + qg * F[i + 1:i + mmax + 1]
        top = vals.max()
        best[j] = top
        action[j] = np.flatnonzero(vals >= top - tie_tol)[-1] + 1
    return best, action


def _greedy(Q, n, amax):
    best = Q[n, 1]
    arg = 1
    for a in range(2, amax + 1):
        if Q[n, a] >= best:
            best = Q[n, a]
            arg = a
    return arg, best


def qlearn_run(Q, visits, returns, U, pos, ep_start, ep_end, N, p, gamma,
               a0, a_tau, e0, e_tau, max_steps):
    """Tabular Q-learning episodes [ep_start, ep_end) consuming uniforms ``U``.

    Stops early when fewer than ``1 + 3*max_steps`` uniforms remain so that
    every episode is fully served by one buffer. Returns (next_episode, pos).
    """
    need = 1 + 3 * max_steps
    size = len(U)
    U = U.tolist()
    ep = ep_start
    while ep < ep_end and pos + need <= size:
        n = 1 + int(U[pos] * (N - 1))
        pos += 1
        if n > N - 1:
            n = N - 1
        eps = e0 / (1.0 + ep / e_tau)
        disc = 1.0
        ret = 0.0
        for _ in range(max_steps):
            amax = min(n, N - n)
            u1 = U[pos]
            u2 = U[pos + 1]
            u3 = U[pos + 2]
            pos += 3
            if u1 < eps:
                a = 1 + int(u2 * amax)
                if a > amax:
                    a = amax
            else:
                a, _ = _greedy(Q, n, amax)
            n2 = n - a if u3 < p else n + a
            disc = disc * gamma
            if n2 == N:
                target = gamma
            elif n2 == 0:
                target = 0.0
            else:
                _, nxt = _greedy(Q, n2, min(n2, N - n2))
                target = gamma * nxt
            visits[n, a] += 1
            alpha = a0 / (1.0 + (visits[n, a] - 1) / a_tau)
            Q[n, a] = Q[n, a] + alpha * (target - Q[n, a])
            n = n2
            if n2 == N:
                ret = disc
                break
            if n2 == 0:
                break
        returns[ep] = ret
        ep += 1
    return ep, pos


def simulate_run(bets, n0, den, p, gamma, cutoff, U, pos, ep_start, ep_end,
                 returns, steps, outcomes):
    """Episodes of the chain on {0, ..., den} under integer bet table ``bets``.

    One uniform per step: below ``p`` the bet is lost. Outcome codes:
    1 reached den, 0 reached 0, 2 truncated after ``cutoff`` steps.
    Returns (next_episode, pos).
    """
    size = len(U)
    U = U.tolist()
    bets = [int(b) for b in bets]
    ep = ep_start
    while ep < ep_end and pos + cutoff <= size:
        n = n0
        t = 0
        disc = 1.0
        while 0 < n < den and t < cutoff:
            a = bets[n]
            if U[pos] < p:
                n = n - a
            else:
                n = n + a
            pos += 1
            t += 1
            disc = disc * gamma
        steps[ep] = t
        if n == den:
            outcomes[ep] = 1
            returns[ep] = disc
        elif n == 0:
            outcomes[ep] = 0
            returns[ep] = 0.0
        else:
            outcomes[ep] = 2
            returns[ep] = 0.0
        ep += 1
    return ep, pos
