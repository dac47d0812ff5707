# cython: language_level=3
"""Compiled kernels; see ``_pykernels`` for the reference semantics."""
from libc.math cimport exp, INFINITY
from libc.stdlib cimport malloc, free

import numpy as np


def sa_chain(double[:, ::1] table, const double[:, ::1] cost,
             const long long[::1] i1, const long long[::1] i2,
             const long long[::1] j1, const long long[::1] j2,
             const double[::1] ufrac, const double[::1] vdraw,
             const double[::1] temps, double current,
             double[::1] costs_out, unsigned char[::1] accepted_out):
    cdef Py_ssize_t b, steps = i1.shape[0]
    cdef Py_ssize_t x1, x2, y1, y2
    cdef double alpha, other, u, dk, tau
    cdef unsigned char acc
    cdef long naccepted = 0
    with nogil:
        for b in range(steps):
            x1 = i1[b]
            x2 = i2[b]
            y1 = j1[b]
            y2 = j2[b]
            alpha = table[x1, y2]
            other = table[x2, y1]
            if other < alpha:
                alpha = other
            acc = 0
            if alpha > 0.0:
                acc = 2
                u = alpha * ufrac[b]
                dk = u * (((cost[x1, y1] + cost[x2, y2]) - cost[x1, y2]) - cost[x2, y1])
                if dk <= 0.0:
                    acc = 1
                else:
                    tau = temps[b]
                    if tau > 0.0 and exp(-dk / tau) > vdraw[b]:
                        acc = 1
                if acc == 1:
                    table[x1, y1] += u
                    table[x2, y2] += u
                    table[x1, y2] -= u
                    table[x2, y1] -= u
                    current += dk
                    naccepted += 1
            costs_out[b] = current
            accepted_out[b] = acc
    return current, naccepted


def negative_cycle(const double[:, ::1] weights, double tol):
    cdef Py_ssize_t n = weights.shape[0]
    cdef Py_ssize_t r, u, v, s, t, k
    cdef double du, wuv, nd, total
    cdef bint changed
    cdef double *dist = <double *> malloc(n * sizeof(double))
    cdef Py_ssize_t *pred = <Py_ssize_t *> malloc(n * sizeof(Py_ssize_t))
    cdef Py_ssize_t *mark = <Py_ssize_t *> malloc(n * sizeof(Py_ssize_t))
    if dist == NULL or pred == NULL or mark == NULL:
        free(dist); free(pred); free(mark)
        raise MemoryError()
    try:
        for v in range(n):
            dist[v] = 0.0
            pred[v] = -1
            mark[v] = 0
        for r in range(n):
            changed = False
            for u in range(n):
                du = dist[u]
                for v in range(n):
                    wuv = weights[u, v]
                    if wuv == INFINITY:
                        continue
                    nd = du + wuv
                    if nd < dist[v] - tol:
                        dist[v] = nd
                        pred[v] = u
                        changed = True
            if not changed:
                return None
        for s in range(n):
            v = s
            while v != -1 and mark[v] == 0:
                mark[v] = s + 1
                v = pred[v]
            if v == -1 or mark[v] != s + 1:
                continue
            cycle = [v]
            u = pred[v]
            while u != v:
                cycle.append(u)
                u = pred[u]
            cycle.reverse()
            k = len(cycle)
            total = 0.0
            for t in range(k):
                total += weights[cycle[t], cycle[(t + 1) % k]]
            if total < -tol:
                return cycle
        return None
    finally:
        free(dist)
        free(pred)
        free(mark)
