# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the loops in ``_pykernels``; same signatures, same operation order."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def lattice_values(int level, double p, double gamma, long long start=0, long long count=-1):
    cdef long long top = (<long long>1) << level
    if count < 0:
        count = top + 1 - start
    out = np.empty(count, dtype=np.float64)
    cdef double[::1] acc = out
    cdef double q = 1.0 - p
    cdef double gi, c, prod, s
    cdef long long j, k
    cdef int i
    for j in range(count):
        k = start + j
        if k == top:
            acc[j] = 1.0
            continue
        s = 0.0
        prod = 1.0
        gi = 1.0
        for i in range(1, level + 1):
            gi = gi * gamma
            c = q * gi
            if (k >> (level - i)) & 1:
                s = s + c * prod
                prod = prod * p
            else:
                prod = prod * q
        acc[j] = s
    return out


def bellman_backup(F_in, double p, double gamma, long long stride=1, double tie_tol=0.0):
    cdef double[::1] F = np.ascontiguousarray(F_in, dtype=np.float64)
    cdef long long N = F.shape[0] - 1
    cdef double pg = p * gamma
    cdef double qg = (1.0 - p) * gamma
    cdef long long count = (N - 1) // stride if N > stride else 0
    best_arr = np.empty(count, dtype=np.float64)
    act_arr = np.empty(count, dtype=np.int64)
    cdef double[::1] best = best_arr
    cdef long long[::1] action = act_arr
    cdef long long j, i, m, mmax, arg
    cdef double top, val
    for j in range(count):
        i = (j + 1) * stride
        mmax = i if i < N - i else N - i
        top = pg * F[i - 1] + qg * F[i + 1]
        for m in range(2, mmax + 1):
            val = pg * F[i - m] + qg * F[i + m]
            if val > top:
                top = val
        arg = 1
        for m in range(mmax, 0, -1):
            val = pg * F[i - m] + qg * F[i + m]
            if val >= top - tie_tol:
                arg = m
                break
        best[j] = top
        action[j] = arg
    return best_arr, act_arr


cdef inline long long _greedy(double[:, ::1] Q, long long n, long long amax, double* out) noexcept nogil:
    cdef double best = Q[n, 1]
    cdef long long arg = 1
    cdef long long a
    for a in range(2, amax + 1):
        if Q[n, a] >= best:
            best = Q[n, a]
            arg = a
    out[0] = best
    return arg


def qlearn_run(double[:, ::1] Q, long long[:, ::1] visits, double[::1] returns,
               double[::1] U, long long pos, long long ep_start, long long ep_end,
               long long N, double p, double gamma, double a0, double a_tau,
               double e0, double e_tau, long long max_steps):
    cdef long long need = 1 + 3 * max_steps
    cdef long long size = U.shape[0]
    cdef long long ep = ep_start
    cdef long long n, n2, a, amax, step
    cdef double eps, disc, ret, u1, u2, u3, target, nxt, alpha, dummy
    with nogil:
        while ep < ep_end and pos + need <= size:
            n = 1 + <long long>(U[pos] * (N - 1))
            pos += 1
            if n > N - 1:
                n = N - 1
            eps = e0 / (1.0 + ep / e_tau)
            disc = 1.0
            ret = 0.0
            for step in range(max_steps):
                amax = n if n < N - n else N - n
                u1 = U[pos]
                u2 = U[pos + 1]
                u3 = U[pos + 2]
                pos += 3
                if u1 < eps:
                    a = 1 + <long long>(u2 * amax)
                    if a > amax:
                        a = amax
                else:
                    a = _greedy(Q, n, amax, &dummy)
                if u3 < p:
                    n2 = n - a
                else:
                    n2 = n + a
                disc = disc * gamma
                if n2 == N:
                    target = gamma
                elif n2 == 0:
                    target = 0.0
                else:
                    _greedy(Q, n2, n2 if n2 < N - n2 else N - n2, &nxt)
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


def simulate_run(bets_in, long long n0, long long den, double p, double gamma,
                 long long cutoff, double[::1] U, long long pos, long long ep_start,
                 long long ep_end, double[::1] returns, long long[::1] steps,
                 long long[::1] outcomes):
    cdef long long[::1] bets = np.ascontiguousarray(bets_in, dtype=np.int64)
    cdef long long size = U.shape[0]
    cdef long long ep = ep_start
    cdef long long n, t
    cdef double disc
    with nogil:
        while ep < ep_end and pos + cutoff <= size:
            n = n0
            t = 0
            disc = 1.0
            while 0 < n < den and t < cutoff:
                if U[pos] < p:
                    n = n - bets[n]
                else:
                    n = n + bets[n]
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
