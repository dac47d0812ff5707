"""Pure-Python kernels.

These mirror ``_ckernels.pyx`` statement for statement so both backends give
bitwise-identical results on the same inputs.
"""
from math import exp, inf


def sa_chain(table, cost, i1, i2, j1, j2, ufrac, vdraw, temps, current, costs_out, accepted_out):
    """Run annealing steps on ``table`` in place.

    Step ``b`` proposes the basic move that drains cells ``(i1, j2)`` and
    ``(i2, j1)`` and feeds ``(i1, j1)`` and ``(i2, j2)`` by
    ``u = ufrac[b] * alpha``. ``accepted_out[b]`` is 0 when the proposal
    was not admissible, 1 when it was accepted and 2 when it was rejected.
    Returns ``(cost, accepted_count)``.
    """
    g = table.tolist()
    c = cost.tolist()
    a1, a2, b1, b2 = i1.tolist(), i2.tolist(), j1.tolist(), j2.tolist()
    uf, vv, tm = ufrac.tolist(), vdraw.tolist(), temps.tolist()
    costs = [0.0] * len(a1)
    flags = [0] * len(a1)
    naccepted = 0
    for b in range(len(a1)):
        x1 = a1[b]
        x2 = a2[b]
        y1 = b1[b]
        y2 = b2[b]
        alpha = g[x1][y2]
        other = g[x2][y1]
        if other < alpha:
            alpha = other
        acc = 0
        if alpha > 0.0:
            acc = 2
            u = alpha * uf[b]
            dk = u * (((c[x1][y1] + c[x2][y2]) - c[x1][y2]) - c[x2][y1])
            if dk <= 0.0:
                acc = 1
            else:
                tau = tm[b]
                if tau > 0.0 and exp(-dk / tau) > vv[b]:
                    acc = 1
            if acc == 1:
                g[x1][y1] += u
                g[x2][y2] += u
                g[x1][y2] -= u
                g[x2][y1] -= u
                current += dk
                naccepted += 1
        costs[b] = current
        flags[b] = acc
    table[:, :] = g
    costs_out[:] = costs
    accepted_out[:] = flags
    return current, naccepted


def negative_cycle(weights, tol):
    """Find a cycle of total weight below ``-tol`` in a dense digraph.

    ``weights[u, v]`` is the arc weight, ``inf`` for a missing arc. Bellman-Ford
    from a virtual source joined to every node; returns the cycle as a node
    list ``[v0, v1, ...]`` (arcs ``v_t -> v_{t+1}``, closing back to ``v0``) or
    None.
    """
    n = weights.shape[0]
    w = weights.tolist()
    dist = [0.0] * n
    pred = [-1] * n
    for _ in range(n):
        changed = False
        for u in range(n):
            du = dist[u]
            row = w[u]
            for v in range(n):
                wuv = row[v]
                if wuv == inf:
                    continue
                nd = du + wuv
                if nd < dist[v] - tol:
                    dist[v] = nd
                    pred[v] = u
                    changed = True
        if not changed:
            return None
    mark = [0] * n
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
            total += w[cycle[t]][cycle[(t + 1) % k]]
        if total < -tol:
            return cycle
    return None
