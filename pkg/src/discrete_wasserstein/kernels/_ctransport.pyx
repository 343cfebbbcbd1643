# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled transportation solver; same algorithm as ``_pytransport``.

All quantities are int64. The dispatcher in ``kernels/__init__.py`` only
routes instances here whose totals and costs cannot overflow.
"""

from cpython.array cimport array, clone

cdef array _LL = array("q", [])


cdef inline array _zeros(Py_ssize_t size):
    return clone(_LL, size, True)


def transport_min_cost(supply, demand, cost):
    cdef Py_ssize_t m = len(supply), n = len(demand)
    cdef Py_ssize_t i, j, u, v, e, it
    cdef long long du, nd, push, total = 0
    cdef bint changed

    if sum(supply) != sum(demand):
        raise ValueError("supply and demand totals differ")
    if any(s < 0 for s in supply) or any(d < 0 for d in demand):
        raise ValueError("negative supply or demand")

    cdef Py_ssize_t source = 0, sink = m + n + 1, nodes = m + n + 2
    cdef Py_ssize_t n_edges = 2 * (m + m * n + n)
    cdef array head_a = _zeros(nodes), to_a = _zeros(n_edges), cap_a = _zeros(n_edges)
    cdef array wt_a = _zeros(n_edges), nxt_a = _zeros(n_edges)
    cdef array dist_a = _zeros(nodes), via_a = _zeros(nodes), seen_a = _zeros(nodes)
    cdef array cell_a = _zeros(m * n if m * n > 0 else 1)
    cdef long long[:] head = head_a, to = to_a, cap = cap_a, wt = wt_a, nxt = nxt_a
    cdef long long[:] dist = dist_a, via = via_a, seen = seen_a, cell = cell_a
    cdef Py_ssize_t count = 0

    for u in range(nodes):
        head[u] = -1

    cdef long long c_val, s_i, d_j
    for i in range(m):
        count = _edge(head, to, cap, wt, nxt, count, source, 1 + i, supply[i], 0)
    for i in range(m):
        row = cost[i]
        s_i = supply[i]
        for j in range(n):
            d_j = demand[j]
            c_val = row[j]
            cell[i * n + j] = count
            count = _edge(head, to, cap, wt, nxt, count, 1 + i, 1 + m + j,
                          s_i if s_i < d_j else d_j, c_val)
    for j in range(n):
        count = _edge(head, to, cap, wt, nxt, count, 1 + m + j, sink, demand[j], 0)

    while True:
        for u in range(nodes):
            seen[u] = 0
            via[u] = -1
            dist[u] = 0
        seen[source] = 1
        for it in range(nodes - 1):
            changed = False
            for u in range(nodes):
                if not seen[u]:
                    continue
                du = dist[u]
                e = head[u]
                while e != -1:
                    if cap[e] > 0:
                        v = to[e]
                        nd = du + wt[e]
                        if not seen[v] or nd < dist[v]:
                            dist[v] = nd
                            via[v] = e
                            seen[v] = 1
                            changed = True
                    e = nxt[e]
            if not changed:
                break
        if not seen[sink]:
            break
        push = -1
        v = sink
        while v != source:
            e = via[v]
            if push < 0 or cap[e] < push:
                push = cap[e]
            v = to[e ^ 1]
        v = sink
        while v != source:
            e = via[v]
            cap[e] -= push
            cap[e ^ 1] += push
            v = to[e ^ 1]
        total += push * dist[sink]

    plan = [[cap[cell[i * n + j] ^ 1] for j in range(n)] for i in range(m)]
    return total, plan


cdef inline Py_ssize_t _edge(long long[:] head, long long[:] to, long long[:] cap,
                             long long[:] wt, long long[:] nxt, Py_ssize_t count,
                             Py_ssize_t u, Py_ssize_t v, long long c, long long w):
    to[count] = v
    cap[count] = c
    wt[count] = w
    nxt[count] = head[u]
    head[u] = count
    to[count + 1] = u
    cap[count + 1] = 0
    wt[count + 1] = -w
    nxt[count + 1] = head[v]
    head[v] = count + 1
    return count + 2
