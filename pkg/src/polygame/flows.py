"""Small exact max-flow solver (integer capacities) with min-cut extraction.

Capacities are integers so feasibility verdicts never depend on float
accumulation; callers scale rational data before handing it in.
"""
from __future__ import annotations

from collections import deque


class FlowNetwork:
    """Adjacency-list residual network over integer node ids 0..n-1."""

    def __init__(self, num_nodes: int):
        self.num_nodes = num_nodes
        self.adj: list[list[int]] = [[] for _ in range(num_nodes)]
        self.to: list[int] = []
        self.cap: list[int] = []

    def add_arc(self, u: int, v: int, capacity: int) -> int:
        """Returns the arc index; a zero-capacity reverse arc is paired with it."""
        idx = len(self.to)
        self.adj[u].append(idx)
        self.to.append(v)
        self.cap.append(int(capacity))
        self.adj[v].append(idx + 1)
        self.to.append(u)
        self.cap.append(0)
        return idx

    def max_flow(self, source: int, sink: int) -> int:
        """Edmonds-Karp; mutates residual capacities in place."""
        total = 0
        while True:
            parent_arc = [-1] * self.num_nodes
            parent_arc[source] = -2
            queue = deque([source])
            while queue:
                u = queue.popleft()
                if u == sink:
                    break
                for idx in self.adj[u]:
                    v = self.to[idx]
                    if self.cap[idx] > 0 and parent_arc[v] == -1:
                        parent_arc[v] = idx
                        queue.append(v)
            if parent_arc[sink] == -1:
                return total
            bottleneck = None
            v = sink
            while v != source:
                idx = parent_arc[v]
                if bottleneck is None or self.cap[idx] < bottleneck:
                    bottleneck = self.cap[idx]
                v = self.to[idx ^ 1]
            v = sink
            while v != source:
                idx = parent_arc[v]
                self.cap[idx] -= bottleneck
                self.cap[idx ^ 1] += bottleneck
                v = self.to[idx ^ 1]
            total += bottleneck

    def flow_on(self, arc_index: int) -> int:
        """Flow routed through an arc returned by add_arc (its reverse residual)."""
        return self.cap[arc_index ^ 1]

    def residual_reachable(self, source: int) -> set[int]:
        """Nodes reachable from source in the residual graph (min-cut side)."""
        seen = {source}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for idx in self.adj[u]:
                v = self.to[idx]
                if self.cap[idx] > 0 and v not in seen:
                    seen.add(v)
                    queue.append(v)
        return seen


def decompose_paths(num_nodes: int, arc_flows: dict[tuple[int, int], float],
                    source: int, sink: int, tol: float = 1e-12):
    """Decompose a source-sink flow into simple paths (cycles are cancelled).

    Returns a list of (node_path, amount); leftover circulation not touching
    the source is dropped.
    """
    residual: dict[int, dict[int, float]] = {}
    for (u, v), f in arc_flows.items():
        if f > tol:
            row = residual.setdefault(u, {})
            row[v] = row.get(v, 0.0) + f
    paths = []
    while True:
        out = residual.get(source)
        if not out:
            break
        path = [source]
        pos = {source: 0}
        node = source
        while node != sink:
            nxt_map = residual.get(node)
            if not nxt_map:
                raise ValueError("flow is not balanced: dead end during decomposition")
            nxt = next(iter(nxt_map))
            if nxt in pos:
                # cancel the cycle pos[nxt]..end and restart the walk there
                start = pos[nxt]
                cycle = path[start:] + [nxt]
                amount = min(residual[cycle[i]][cycle[i + 1]] for i in range(len(cycle) - 1))
                for i in range(len(cycle) - 1):
                    _consume(residual, cycle[i], cycle[i + 1], amount, tol)
                for dropped in path[start + 1:]:
                    del pos[dropped]
                path = path[:start + 1]
                node = nxt
                continue
            path.append(nxt)
            pos[nxt] = len(path) - 1
            node = nxt
        amount = min(residual[path[i]][path[i + 1]] for i in range(len(path) - 1))
        for i in range(len(path) - 1):
            _consume(residual, path[i], path[i + 1], amount, tol)
        paths.append((tuple(path), amount))
    return paths


def _consume(residual, u, v, amount, tol):
    left = residual[u][v] - amount
    if left <= tol:
        del residual[u][v]
        if not residual[u]:
            del residual[u]
    else:
        residual[u][v] = left
