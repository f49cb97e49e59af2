# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. ``_purepy`` mirrors every function here operation for
operation so both backends return bit-identical results."""

import numpy as np
from libc.math cimport exp, fabs, floor


def betweenness(const long long[::1] indptr, const long long[::1] indices):
    """Raw Brandes dependency sums over every source (each unordered pair
    counted twice). Neighbour lists must be sorted ascending."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef double[::1] cb = np.zeros(n, dtype=np.float64)
    cdef double[::1] sigma = np.zeros(n, dtype=np.float64)
    cdef double[::1] delta = np.zeros(n, dtype=np.float64)
    cdef long long[::1] dist = np.empty(n, dtype=np.int64)
    cdef long long[::1] order = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t s, head, tail, p, v, w, i
    cdef double coeff

    for s in range(n):
        if indptr[s + 1] == indptr[s]:
            continue
        for i in range(n):
            dist[i] = -1
            sigma[i] = 0.0
            delta[i] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        order[0] = s
        head = 0
        tail = 1
        while head < tail:
            v = order[head]
            head += 1
            for p in range(indptr[v], indptr[v + 1]):
                w = indices[p]
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    order[tail] = w
                    tail += 1
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
        while tail > 1:
            tail -= 1
            w = order[tail]
            coeff = (1.0 + delta[w]) / sigma[w]
            for p in range(indptr[w], indptr[w + 1]):
                v = indices[p]
                if dist[v] == dist[w] - 1:
                    delta[v] += sigma[v] * coeff
            cb[w] += delta[w]
    return np.asarray(cb)


def decode_batch(const double[:, ::1] positions, long long n):
    """Map each row of continuous coordinates to ``k`` distinct ranks in
    ``[0, n)``, returned sorted ascending per row."""
    cdef Py_ssize_t rows = positions.shape[0]
    cdef Py_ssize_t k = positions.shape[1]
    if k > n:
        k = n
    out_arr = np.empty((rows, k), dtype=np.int64)
    cdef long long[:, ::1] out = out_arr
    cdef unsigned char[::1] used = np.zeros(max(n, 1), dtype=np.uint8)
    cdef Py_ssize_t r, j, a, b
    cdef double x
    cdef long long rank, tmp

    for r in range(rows):
        for j in range(k):
            x = positions[r, j]
            if x < 0.0:
                x = 0.0
            elif x > n - 1:
                x = n - 1
            rank = <long long>floor(x + 0.5)
            while used[rank]:
                rank += 1
                if rank == n:
                    rank = 0
            used[rank] = 1
            out[r, j] = rank
        for j in range(k):
            used[out[r, j]] = 0
        # insertion sort, k is small
        for a in range(1, k):
            tmp = out[r, a]
            b = a - 1
            while b >= 0 and out[r, b] > tmp:
                out[r, b + 1] = out[r, b]
                b -= 1
            out[r, b + 1] = tmp
    return out_arr


def set_scores(const long long[:, ::1] ranks, const double[::1] scores):
    """Left-to-right sum of ``scores`` over each row of ``ranks``."""
    cdef Py_ssize_t rows = ranks.shape[0]
    cdef Py_ssize_t k = ranks.shape[1]
    out_arr = np.empty(rows, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t r, j
    cdef double total
    for r in range(rows):
        total = 0.0
        for j in range(k):
            total += scores[ranks[r, j]]
        out[r] = total
    return out_arr


cdef double _set_score(const double[:, ::1] pos, Py_ssize_t r, Py_ssize_t k, long long n,
                       const double[::1] scores, unsigned char[::1] used, long long[::1] picked):
    """Decode row ``r`` like ``decode_batch`` and return its score sum."""
    cdef Py_ssize_t j, a, b
    cdef double x, total
    cdef long long rank, tmp
    for j in range(k):
        x = pos[r, j]
        if x < 0.0:
            x = 0.0
        elif x > n - 1:
            x = n - 1
        rank = <long long>floor(x + 0.5)
        while used[rank]:
            rank += 1
            if rank == n:
                rank = 0
        used[rank] = 1
        picked[j] = rank
    for j in range(k):
        used[picked[j]] = 0
    for a in range(1, k):
        tmp = picked[a]
        b = a - 1
        while b >= 0 and picked[b] > tmp:
            picked[b + 1] = picked[b]
            b -= 1
        picked[b + 1] = tmp
    total = 0.0
    for j in range(k):
        total += scores[picked[j]]
    return total


cdef inline double _clipd(double x, double lo, double hi):
    if x < lo:
        x = lo
    if x > hi:
        x = hi
    return x


def cso_epoch(double[:, ::1] positions, double[::1] fitness,
              const double[::1] lo, const double[::1] hi,
              const long long[::1] r_idx, const long long[:, ::1] r_tab, const long long[::1] r_cnt,
              const long long[::1] h_idx, const long long[::1] h_mate,
              const long long[:, ::1] h_tab, const long long[::1] h_cnt,
              const long long[::1] c_idx, const long long[::1] c_mother,
              const double[:, ::1] u_r, const double[:, :, ::1] z,
              const double[:, ::1] u_h, const double[:, :, :, ::1] rand,
              const double[:, ::1] fl, const double[::1] scores,
              double epsilon, double exp_cap,
              double[::1] best_pos, double best_fit, double[::1] trace):
    """Run ``trace.shape[0]`` synchronous swarm iterations on a set objective
    with all random draws supplied up front; mirrors ``cso.step``.

    Updates ``positions``, ``fitness`` and ``best_pos`` in place, fills
    ``trace`` and returns the final best fitness."""
    cdef Py_ssize_t iters = trace.shape[0]
    cdef Py_ssize_t pop = positions.shape[0]
    cdef Py_ssize_t dim = positions.shape[1]
    cdef long long n = scores.shape[0]
    cdef Py_ssize_t k = dim if dim < n else n
    cdef double[:, ::1] new = np.empty((pop, dim), dtype=np.float64)
    cdef double[::1] new_fit = np.empty(pop, dtype=np.float64)
    cdef unsigned char[::1] used = np.zeros(max(n, 1), dtype=np.uint8)
    cdef long long[::1] picked = np.empty(max(k, 1), dtype=np.int64)
    cdef Py_ssize_t t, a, i, d, col, cand
    cdef long long peer, r1, r2, cnt
    cdef double f_i, f_k, e, spread, s1, s2, c, v

    for t in range(iters):
        new[:, :] = positions
        for a in range(r_idx.shape[0]):
            i = r_idx[a]
            cnt = r_cnt[a]
            f_i = fitness[i]
            spread = 1.0
            if cnt > 0:
                col = <Py_ssize_t>(u_r[t, a] * cnt)
                if col > cnt - 1:
                    col = cnt - 1
                peer = r_tab[a, col]
                f_k = fitness[peer]
                if f_i > f_k:
                    e = (f_k - f_i) / (fabs(f_i) + epsilon)
                    if e > exp_cap:
                        e = exp_cap
                    if e > 0.0:
                        e = 0.0
                    spread = exp(e)
            for d in range(dim):
                c = positions[i, d]
                new[i, d] = _clipd(c * (1.0 + spread * z[t, a, d]), lo[d], hi[d])
        for a in range(h_idx.shape[0]):
            i = h_idx[a]
            r1 = h_mate[a]
            cnt = h_cnt[a]
            r2 = i
            if cnt > 0:
                col = <Py_ssize_t>(u_h[t, a] * cnt)
                if col > cnt - 1:
                    col = cnt - 1
                r2 = h_tab[a, col]
            f_i = fitness[i]
            e = (f_i - fitness[r1]) / (fabs(f_i) + epsilon)
            s1 = exp(e if e < exp_cap else exp_cap)
            e = fitness[r2] - f_i
            s2 = exp(e if e < exp_cap else exp_cap)
            for d in range(dim):
                c = positions[i, d]
                v = (c + s1 * rand[t, 0, a, d] * (positions[r1, d] - c)
                     + s2 * rand[t, 1, a, d] * (positions[r2, d] - c))
                new[i, d] = _clipd(v, lo[d], hi[d])
        for a in range(c_idx.shape[0]):
            i = c_idx[a]
            r1 = c_mother[a]
            for d in range(dim):
                c = positions[i, d]
                new[i, d] = _clipd(c + fl[t, a] * (positions[r1, d] - c), lo[d], hi[d])
        cand = 0
        for i in range(pop):
            new_fit[i] = _set_score(new, i, k, n, scores, used, picked)
            if new_fit[i] > fitness[i]:
                fitness[i] = new_fit[i]
                positions[i, :] = new[i, :]
            if fitness[i] > fitness[cand]:
                cand = i
        if fitness[cand] > best_fit:
            best_fit = fitness[cand]
            best_pos[:] = positions[cand, :]
        trace[t] = best_fit
    return best_fit
