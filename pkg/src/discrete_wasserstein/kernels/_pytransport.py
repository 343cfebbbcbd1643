"""Pure-Python transportation solver (successive shortest paths).

Reference implementation and fallback for the compiled kernel in
``_ctransport.pyx``; both run the same algorithm on the same graph layout,
so they return the same optimal plan.
"""

from __future__ import annotations


def transport_min_cost(supply, demand, cost):
    """Solve ``min sum c[i][j] f[i][j]`` over integer transport plans.

    ``supply`` and ``demand`` are nonnegative integers with equal sums;
    ``cost`` is an ``len(supply) x len(demand)`` nested sequence of integers.
    Returns ``(optimal_cost, plan)`` where ``plan`` is a list of rows.
    """
    m, n = len(supply), len(demand)
    if sum(supply) != sum(demand):
        raise ValueError("supply and demand totals differ")
    if any(v < 0 for v in supply) or any(v < 0 for v in demand):
        raise ValueError("negative supply or demand")

    # Nodes: 0 = source, 1..m = rows, m+1..m+n = columns, m+n+1 = sink.
    source, sink = 0, m + n + 1
    nodes = m + n + 2
    head, to, cap, wt = [-1] * nodes, [], [], []
    nxt = []

    def edge(u, v, c, w):
        for a, b, cc, ww in ((u, v, c, w), (v, u, 0, -w)):
            to.append(b)
            cap.append(cc)
            wt.append(ww)
            nxt.append(head[a])
            head[a] = len(to) - 1

    for i in range(m):
        edge(source, 1 + i, supply[i], 0)
    cell = [[0] * n for _ in range(m)]
    for i in range(m):
        row = cost[i]
        for j in range(n):
            cell[i][j] = len(to)
            edge(1 + i, 1 + m + j, min(supply[i], demand[j]), row[j])
    for j in range(n):
        edge(1 + m + j, sink, demand[j], 0)

    total = 0
    inf = None
    while True:
        # Bellman-Ford on the residual graph; residual costs may be negative.
        dist = [inf] * nodes
        via = [-1] * nodes
        dist[source] = 0
        for _ in range(nodes - 1):
            changed = False
            for u in range(nodes):
                du = dist[u]
                if du is None:
                    continue
                e = head[u]
                while e != -1:
                    if cap[e] > 0:
                        v = to[e]
                        nd = du + wt[e]
                        if dist[v] is None or nd < dist[v]:
                            dist[v] = nd
                            via[v] = e
                            changed = True
                    e = nxt[e]
            if not changed:
                break
        if dist[sink] is None:
            break
        push = None
        v = sink
        while v != source:
            e = via[v]
            push = cap[e] if push is None else min(push, cap[e])
            v = to[e ^ 1]
        v = sink
        while v != source:
            e = via[v]
            cap[e] -= push
            cap[e ^ 1] += push
            v = to[e ^ 1]
        total += push * dist[sink]

    plan = [[cap[cell[i][j] ^ 1] for j in range(n)] for i in range(m)]
    return total, plan
