"""Pure-Python fallback for the compiled kernels in ``_kernels.pyx``.

Loop structure and floating-point operation order match the Cython code
exactly, so either backend produces identical results.
"""

import math

import numpy as np


def betweenness(indptr, indices):
    indptr = [int(v) for v in indptr]
    indices = [int(v) for v in indices]
    n = len(indptr) - 1
    cb = [0.0] * n

    for s in range(n):
        if indptr[s + 1] == indptr[s]:
            continue
        dist = [-1] * n
        sigma = [0.0] * n
        delta = [0.0] * n
        dist[s] = 0
        sigma[s] = 1.0
        order = [s]
        head = 0
        while head < len(order):
            v = order[head]
            head += 1
            dv = dist[v] + 1
            for p in range(indptr[v], indptr[v + 1]):
                w = indices[p]
                if dist[w] < 0:
                    dist[w] = dv
                    order.append(w)
                if dist[w] == dv:
                    sigma[w] += sigma[v]
        for w in reversed(order[1:]):
            coeff = (1.0 + delta[w]) / sigma[w]
            dw = dist[w] - 1
            for p in range(indptr[w], indptr[w + 1]):
                v = indices[p]
                if dist[v] == dw:
                    delta[v] += sigma[v] * coeff
            cb[w] += delta[w]
    return np.asarray(cb, dtype=np.float64)


def decode_batch(positions, n):
    positions = np.ascontiguousarray(positions, dtype=np.float64)
    n = int(n)
    rows, k = positions.shape
    k = min(k, n)
    out = np.empty((rows, k), dtype=np.int64)
    for r in range(rows):
        used = set()
        picked = []
        for x in positions[r, :k].tolist():
            if x < 0.0:
                x = 0.0
            elif x > n - 1:
                x = float(n - 1)
            rank = math.floor(x + 0.5)
            while rank in used:
                rank += 1
                if rank == n:
                    rank = 0
            used.add(rank)
            picked.append(rank)
        out[r] = sorted(picked)
    return out


def set_scores(ranks, scores):
    scores = np.asarray(scores, dtype=np.float64).tolist()
    out = np.empty(len(ranks), dtype=np.float64)
    for r, row in enumerate(np.asarray(ranks).tolist()):
        total = 0.0
        for j in row:
            total += scores[j]
        out[r] = total
    return out


def _exp(values):
    # math.exp is the same libm call the compiled kernel makes
    return np.array([math.exp(v) for v in values.tolist()], dtype=np.float64)


def _pick(table, counts, u):
    col = np.minimum((u * counts).astype(np.int64), np.maximum(counts - 1, 0))
    return np.where(counts > 0, table[np.arange(len(counts)), col], -1)


def cso_epoch(positions, fitness, lo, hi, r_idx, r_tab, r_cnt, h_idx, h_mate, h_tab, h_cnt,
              c_idx, c_mother, u_r, z, u_h, rand, fl, scores, epsilon, exp_cap,
              best_pos, best_fit, trace):
    for t in range(len(trace)):
        new = positions.copy()
        if len(r_idx):
            peer = _pick(r_tab, r_cnt, u_r[t])
            has = peer >= 0
            f_i = fitness[r_idx]
            f_k = fitness[np.where(has, peer, r_idx)]
            e = np.minimum(np.minimum((f_k - f_i) / (np.abs(f_i) + epsilon), exp_cap), 0.0)
            spread = np.where(has & (f_i > f_k), _exp(e), 1.0)
            c = positions[r_idx]
            new[r_idx] = np.minimum(np.maximum(c * (1.0 + spread[:, None] * z[t]), lo), hi)
        if len(h_idx):
            r2 = _pick(h_tab, h_cnt, u_h[t])
            r2 = np.where(r2 >= 0, r2, h_idx)
            f_i = fitness[h_idx]
            s1 = _exp(np.minimum((f_i - fitness[h_mate]) / (np.abs(f_i) + epsilon), exp_cap))
            s2 = _exp(np.minimum(fitness[r2] - f_i, exp_cap))
            c = positions[h_idx]
            v = (c + s1[:, None] * rand[t, 0] * (positions[h_mate] - c)
                 + s2[:, None] * rand[t, 1] * (positions[r2] - c))
            new[h_idx] = np.minimum(np.maximum(v, lo), hi)
        if len(c_idx):
            c = positions[c_idx]
            v = c + fl[t][:, None] * (positions[c_mother] - c)
            new[c_idx] = np.minimum(np.maximum(v, lo), hi)
        new_fit = set_scores(decode_batch(new, len(scores)), scores)
        better = new_fit > fitness
        positions[better] = new[better]
        fitness[better] = new_fit[better]
        cand = int(np.argmax(fitness))
        if fitness[cand] > best_fit:
            best_fit = float(fitness[cand])
            best_pos[:] = positions[cand]
        trace[t] = best_fit
    return best_fit
