"""Exact combinatorial kernels used by the classical decoder: minimum
weight perfect matching, exact Steiner trees in the dual lattice, and
partitioning of defect cells into discharge groups.

All weights are nonnegative integers (dual path lengths), so optimality
comparisons are exact. Every search is deterministic: candidate orders are
fixed and ties resolve toward lexicographically earlier structures.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import networkx as nx

from .lattice import DualLattice

_INF = float("inf")


@dataclass(frozen=True)
class WeightedGraph:
    """Finite undirected graph with nonnegative integer edge weights."""

    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int, int], ...]

    def __post_init__(self) -> None:
        vs = set(self.vertices)
        for u, v, w in self.edges:
            if u == v:
                raise ValueError("self-loops are not allowed")
            if u not in vs or v not in vs:
                raise ValueError(f"edge ({u},{v}) uses unknown vertex")
            if not isinstance(w, int) or w < 0:
                raise ValueError("weights must be nonnegative integers")


@dataclass(frozen=True)
class Matching:
    """Vertex-disjoint edge set with its total weight."""

    edges: frozenset[tuple[int, int]]
    weight: int

    def covers(self, vertices) -> bool:
        seen = {x for e in self.edges for x in e}
        return all(v in seen for v in vertices)


def _nx_graph(g: WeightedGraph) -> nx.Graph:
    G = nx.Graph()
    G.add_nodes_from(g.vertices)
    for u, v, w in g.edges:
        if not G.has_edge(u, v) or G[u][v]["weight"] > w:
            G.add_edge(u, v, weight=w)
    return G


def _solve_min_perfect(G: nx.Graph) -> tuple[frozenset[tuple[int, int]], int] | None:
    if G.number_of_nodes() == 0:
        return frozenset(), 0
    m = nx.min_weight_matching(G)
    if 2 * len(m) != G.number_of_nodes():
        return None
    edges = frozenset(tuple(sorted(e)) for e in m)
    weight = sum(G[u][v]["weight"] for u, v in edges)
    return edges, weight


def min_weight_perfect_matching(g: WeightedGraph) -> Matching:
    """Exact minimum weight perfect matching (blossom).

    Among all optimal matchings the lexicographically smallest edge set is
    returned, found by forcing edges in ascending order and re-solving; the
    forcing pass is skipped above 32 vertices where the plain blossom result
    (still deterministic) is used.
    """
    if len(g.vertices) % 2 != 0:
        raise ValueError("perfect matching needs an even vertex count")
    G = _nx_graph(g)
    base = _solve_min_perfect(G)
    if base is None:
        raise ValueError("graph has no perfect matching")
    edges, weight = base
    if len(g.vertices) > 32:
        return Matching(edges, weight)

    forced: list[tuple[int, int]] = []
    forced_weight = 0
    H = G.copy()
    candidates = sorted(tuple(sorted((u, v))) for u, v in G.edges)
    for u, v in candidates:
        if not (H.has_node(u) and H.has_node(v)):
            continue
        rest = H.copy()
        rest.remove_nodes_from((u, v))
        sub = _solve_min_perfect(rest)
        if sub is not None and forced_weight + G[u][v]["weight"] + sub[1] == weight:
            forced.append((u, v))
            forced_weight += G[u][v]["weight"]
            H.remove_nodes_from((u, v))
    assert forced_weight == weight and H.number_of_nodes() == 0
    return Matching(frozenset(forced), weight)


def brute_force_perfect_matching(g: WeightedGraph) -> Matching | None:
    """Factorial-time reference: enumerate all perfect matchings."""
    if len(g.vertices) % 2 != 0:
        return None
    weight = {}
    for u, v, w in g.edges:
        key = tuple(sorted((u, v)))
        weight[key] = min(w, weight.get(key, w))
    best: tuple[int, list[tuple[int, int]]] | None = None

    def rec(remaining: list[int], acc: list[tuple[int, int]], total: int) -> None:
        nonlocal best
        if not remaining:
            cand = (total, sorted(acc))
            if best is None or cand < best:
                best = cand
            return
        u = remaining[0]
        for v in remaining[1:]:
            key = tuple(sorted((u, v)))
            if key in weight:
                rest = [x for x in remaining[1:] if x != v]
                rec(rest, acc + [key], total + weight[key])

    rec(sorted(g.vertices), [], 0)
    if best is None:
        return None
    return Matching(frozenset(best[1]), best[0])


@dataclass(frozen=True)
class SteinerResult:
    """Minimum tree in the dual graph connecting a terminal set, reported
    as the primal edge ids the tree crosses."""

    terminals: tuple[int, ...]
    tree_edges: frozenset[int]
    length: int


class SteinerTables:
    """Dreyfus-Wagner tables over one terminal list: cost[X][v] is the
    minimum dual tree spanning terminal subset X plus vertex v, so both
    St(X) and St(X + extra vertex) come from one run."""

    def __init__(self, dlat: DualLattice, terminals: tuple[int, ...]):
        if len(terminals) > 10:
            raise ValueError("terminal budget exceeded (max 10)")
        if len(set(terminals)) != len(terminals):
            raise ValueError("duplicate terminals")
        self.dlat = dlat
        self.terminals = terminals
        k = len(terminals)
        n = dlat.n_vertices
        self.cost = [[_INF] * n for _ in range(1 << k)]
        # back[X][v]: ("walk", u, eid) step or ("merge", Y) split at v
        self.back: list[list[tuple | None]] = [[None] * n for _ in range(1 << k)]
        for i, t in enumerate(terminals):
            self.cost[1 << i][t] = 0
            self._relax(1 << i)
        masks = sorted(range(1, 1 << k), key=lambda m: (m.bit_count(), m))
        for X in masks:
            if X.bit_count() < 2:
                continue
            low = X & -X
            cX, bX = self.cost[X], self.back[X]
            Y = (X - 1) & X
            while Y > 0:
                if Y & low:
                    cY, cZ = self.cost[Y], self.cost[X ^ Y]
                    for v in range(n):
                        cand = cY[v] + cZ[v]
                        if cand < cX[v]:
                            cX[v] = cand
                            bX[v] = ("merge", Y)
                Y = (Y - 1) & X
            self._relax(X)

    def _relax(self, X: int) -> None:
        cX, bX = self.cost[X], self.back[X]
        heap = [(c, v) for v, c in enumerate(cX) if c < _INF]
        heapq.heapify(heap)
        adj = self.dlat.adjacency
        while heap:
            c, u = heapq.heappop(heap)
            if c > cX[u]:
                continue
            for w, eid in adj[u]:
                nd = c + 1
                if nd < cX[w]:
                    cX[w] = nd
                    bX[w] = ("walk", u, eid)
                    heapq.heappush(heap, (nd, w))

    def steiner_cost(self, mask: int) -> int:
        c = min(self.cost[mask])
        return c if c < _INF else -1

    def cost_with(self, mask: int, v: int) -> int:
        c = self.cost[mask][v]
        return c if c < _INF else -1

    def recover(self, mask: int, v: int | None = None) -> frozenset[int]:
        """Primal edge ids of an optimal tree for terminal set mask (+v)."""
        if v is None:
            v = min(range(len(self.cost[mask])), key=lambda u: self.cost[mask][u])
        edges: set[int] = set()
        stack = [(mask, v)]
        while stack:
            X, u = stack.pop()
            step = self.back[X][u]
            if step is None:
                continue
            if step[0] == "walk":
                _, prev, eid = step
                edges.add(eid)
                stack.append((X, prev))
            else:
                _, Y = step
                stack.append((Y, u))
                stack.append((X ^ Y, u))
        return frozenset(edges)


def steiner_tree_exact(
    dlat: DualLattice, terminals, max_terminals: int = 8
) -> SteinerResult:
    """Exact minimum Steiner tree for the terminal cells in the dual graph
    (the exterior vertex, when present, may serve as a through point)."""
    terminals = tuple(terminals)
    if len(terminals) > max_terminals:
        raise ValueError(f"terminal budget exceeded (max {max_terminals})")
    if not terminals:
        return SteinerResult((), frozenset(), 0)
    tables = SteinerTables(dlat, terminals)
    full = (1 << len(terminals)) - 1
    length = tables.steiner_cost(full)
    if length < 0:
        raise ValueError("terminals are not connected in the dual graph")
    edges = tables.recover(full)
    assert len(edges) == length
    return SteinerResult(terminals, edges, length)


@dataclass(frozen=True)
class DefectGroup:
    cells: tuple[int, ...]
    classes: tuple[int, ...]
    cost: int
    tree_edges: frozenset[int]
    uses_boundary: bool


@dataclass(frozen=True)
class DefectPartition:
    groups: tuple[DefectGroup, ...]
    total_cost: int


def partition_defects(
    dlat: DualLattice, defects, d: int, allow_boundary: bool | None = None
) -> DefectPartition:
    """Cheapest way to cancel all defects: partition them into groups, each
    either summing to 0 mod d (joined by a Steiner tree) or, on open
    boundaries, discharged through the exterior (tree includes the exterior
    vertex). Exhaustive over all group partitions, so the result is the
    exact minimum number of relabeled edges needed to kill the defects.

    defects: list of (dual cell id, class) with class in 1..d-1.
    """
    defects = list(defects)
    if len(defects) > 10:
        raise ValueError("defect budget exceeded (max 10)")
    cells = tuple(c for c, _ in defects)
    classes = tuple(x % d for _, x in defects)
    if len(set(cells)) != len(cells):
        raise ValueError("duplicate defect cells")
    if any(x == 0 for x in classes):
        raise ValueError("defect classes must be nonzero")
    if allow_boundary is None:
        allow_boundary = dlat.exterior is not None
    if allow_boundary and dlat.exterior is None:
        raise ValueError("boundary absorption needs an open boundary")
    if not allow_boundary and sum(classes) % d != 0:
        raise ValueError("defect classes do not cancel on a closed surface")
    if not defects:
        return DefectPartition((), 0)

    tables = SteinerTables(dlat, cells)
    k = len(defects)
    full = (1 << k) - 1
    ext = dlat.exterior

    def group_cost(mask: int) -> int:
        s = 0
        m = mask
        while m:
            i = (m & -m).bit_length() - 1
            s += classes[i]
            m &= m - 1
        if s % d == 0:
            return tables.steiner_cost(mask)
        if allow_boundary:
            return tables.cost_with(mask, ext)
        return -1

    best = [_INF] * (1 << k)
    choice = [0] * (1 << k)
    best[0] = 0
    for mask in range(1, 1 << k):
        low = mask & -mask
        sub = mask
        while sub > 0:
            if sub & low:
                c = group_cost(sub)
                if c >= 0 and best[mask ^ sub] + c < best[mask]:
                    best[mask] = best[mask ^ sub] + c
                    choice[mask] = sub
            sub = (sub - 1) & mask
    if best[full] == _INF:
        raise ValueError("no feasible defect partition")

    groups = []
    mask = full
    while mask:
        sub = choice[mask]
        idxs = [i for i in range(k) if sub & (1 << i)]
        s = sum(classes[i] for i in idxs) % d
        boundary = s != 0
        anchor = ext if boundary else None
        cost = tables.cost_with(sub, ext) if boundary else tables.steiner_cost(sub)
        groups.append(
            DefectGroup(
                cells=tuple(cells[i] for i in idxs),
                classes=tuple(classes[i] for i in idxs),
                cost=cost,
                tree_edges=tables.recover(sub, anchor),
                uses_boundary=boundary,
            )
        )
        mask ^= sub
    total = sum(g.cost for g in groups)
    assert total == best[full]
    return DefectPartition(tuple(groups), total)
