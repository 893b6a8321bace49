"""Exact transportation problem on small dense bipartite instances.

Primal transportation simplex (the network simplex specialised to a complete
bipartite graph). The initial basis is the northwest-corner tree, potentials
are recomputed on the spanning tree every pivot and Bland's rule picks both
the entering and the leaving cell, so runs are deterministic and cannot
cycle under degeneracy.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["TransportPlan", "WEIGHT_TOL", "solve_transport"]

WEIGHT_TOL = 1e-7
_RC_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class TransportPlan:
    flow: np.ndarray
    cost: float
    iterations: int = 0


def _northwest(a, b):
    k, l = len(a), len(b)
    a = a.copy()
    b = b.copy()
    flow = np.zeros((k, l))
    basis = []
    i = j = 0
    while True:
        x = min(a[i], b[j])
        flow[i, j] = x
        a[i] -= x
        b[j] -= x
        basis.append((i, j))
        if i == k - 1 and j == l - 1:
            break
        if i == k - 1:
            j += 1
        elif j == l - 1:
            i += 1
        elif a[i] <= b[j]:
            i += 1
        else:
            j += 1
    return flow, basis


def _tree(basis, k, l):
    adj = [[] for _ in range(k + l)]
    for i, j in basis:
        adj[i].append(k + j)
        adj[k + j].append(i)
    return adj


def _potentials(C, basis, k, l):
    adj = _tree(basis, k, l)
    pot = np.full(k + l, np.nan)
    pot[0] = 0.0
    stack = [0]
    while stack:
        node = stack.pop()
        for nb in adj[node]:
            if np.isnan(pot[nb]):
                # u_i + v_j = c_ij on basic cells
                if node < k:
                    pot[nb] = C[node, nb - k] - pot[node]
                else:
                    pot[nb] = C[nb, node - k] - pot[node]
                stack.append(nb)
    return pot[:k], pot[k:]


def _tree_path(basis, k, l, src, dst):
    """Node path from ``src`` to ``dst`` in the basis tree."""
    adj = _tree(basis, k, l)
    parent = {src: None}
    queue = [src]
    for node in queue:
        if node == dst:
            break
        for nb in adj[node]:
            if nb not in parent:
                parent[nb] = node
                queue.append(nb)
    path = [dst]
    while path[-1] != src:
        path.append(parent[path[-1]])
    return path[::-1]


def solve_transport(a, b, C, max_iter: int | None = None) -> TransportPlan:
    """Minimum-cost coupling of supplies ``a`` and demands ``b`` under costs ``C``.

    ``a`` and ``b`` must be nonnegative with equal totals (within
    ``WEIGHT_TOL``); the demand side is rescaled to match the supply total
    exactly before solving.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    C = np.asarray(C, dtype=float)
    k, l = a.shape[0], b.shape[0]
    if k == 0 or l == 0:
        raise ValueError("both sides need at least one node")
    if C.shape != (k, l):
        raise ValueError(f"cost matrix has shape {C.shape}, expected {(k, l)}")
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("supplies and demands must be nonnegative")
    if not np.all(np.isfinite(C)):
        raise ValueError("costs must be finite")
    sa, sb = a.sum(), b.sum()
    if abs(sa - sb) > WEIGHT_TOL:
        raise ValueError(f"unbalanced instance: supply {sa!r} vs demand {sb!r}")
    if sb > 0:
        b = b * (sa / sb)

    flow, basis = _northwest(a, b)
    max_iter = max_iter or 50 * (k + l) ** 2 + 100
    it = 0
    for it in range(1, max_iter + 1):
        u, v = _potentials(C, basis, k, l)
        reduced = C - u[:, None] - v[None, :]
        basic = np.zeros((k, l), dtype=bool)
        for cell in basis:
            basic[cell] = True
        reduced[basic] = 0.0
        cand = np.argwhere(reduced < -_RC_TOL)
        if cand.size == 0:
            break
        # Bland: first improving cell in row-major order
        ei, ej = map(int, cand[0])
        path = _tree_path(basis, k, l, k + ej, ei)
        # cycle: (ei,ej) +, then tree edges alternate -, +, ...
        cells = []
        for s, t in zip(path[:-1], path[1:]):
            cells.append((s, t - k) if s < k else (t, s - k))
        minus = cells[0::2]
        plus = cells[1::2]
        theta = min(flow[c] for c in minus)
        leave = min(
            (c for c in minus if flow[c] <= theta),
            key=lambda c: c[0] * l + c[1],
        )
        for c in minus:
            flow[c] -= theta
        for c in plus:
            flow[c] += theta
        flow[ei, ej] += theta
        flow[leave] = 0.0
        basis.remove(leave)
        basis.append((ei, ej))
    else:
        raise RuntimeError(f"transportation simplex did not converge in {max_iter} pivots")
    np.maximum(flow, 0.0, out=flow)
    return TransportPlan(flow, float(np.sum(flow * C)), it)
