"""Square lattices with four boundary modes and the derived structure the
rest of the package consumes: 4-edge cells, the dual lattice, BFS spanning
trees, enlarged trees, and fixed homology representatives.

Conventions, fixed once here:
  * Vertices are (row, col) with id r*cols + c. The x direction increases
    with col, the y direction with row.
  * Edges are stored with a fixed anchor and direction: ``R`` from (r, c) to
    (r, c+1 mod cols), ``D`` from (r, c) to (r+1 mod rows, c). All horizontal
    edges precede all vertical edges in the id order, each block row-major.
  * CYLX wraps x only (col index wraps), CYLY wraps y only, TORUS both.
  * The cell anchored at (r, c) is walked top, right, bottom, left; the top
    and right edges are traversed forward, bottom and left backward. A
    labeling's cell class therefore composes as
    left^-1 . bottom^-1 . right . top (first-traversed edge applied first).
  * Every open boundary side feeds a single fused exterior dual vertex.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Boundary(enum.Enum):
    PLANE = "plane"
    CYLX = "cylx"
    CYLY = "cyly"
    TORUS = "torus"

    @property
    def wraps_x(self) -> bool:
        return self in (Boundary.CYLX, Boundary.TORUS)

    @property
    def wraps_y(self) -> bool:
        return self in (Boundary.CYLY, Boundary.TORUS)


@dataclass(frozen=True)
class Edge:
    id: int
    r: int
    c: int
    kind: str  # "R" or "D"
    tail: int
    head: int


@dataclass(frozen=True)
class Cell:
    """A 4-edge face, anchored at its lowest (r, c) corner.

    walk lists (edge_id, forward) pairs in traversal order
    top, right, bottom, left.
    """

    id: int
    r: int
    c: int
    walk: tuple[tuple[int, bool], ...]


@dataclass
class Lattice:
    rows: int
    cols: int
    boundary: Boundary
    edges: list[Edge] = field(default_factory=list, repr=False)
    # adjacency[v] = sorted list of (neighbor vertex, edge id, tail_is_v)
    adjacency: list[list[tuple[int, int, bool]]] = field(default_factory=list, repr=False)
    _h_ids: dict[tuple[int, int], int] = field(default_factory=dict, repr=False)
    _v_ids: dict[tuple[int, int], int] = field(default_factory=dict, repr=False)

    @property
    def n_vertices(self) -> int:
        return self.rows * self.cols

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def vertex(self, r: int, c: int) -> int:
        return (r % self.rows) * self.cols + (c % self.cols)

    def coords(self, v: int) -> tuple[int, int]:
        return divmod(v, self.cols)

    def h_edge(self, r: int, c: int) -> int:
        """Id of the horizontal edge anchored at (r, c)."""
        key = (r % self.rows, c % self.cols)
        if key not in self._h_ids:
            raise ValueError(f"no horizontal edge at {key}")
        return self._h_ids[key]

    def v_edge(self, r: int, c: int) -> int:
        """Id of the vertical edge anchored at (r, c)."""
        key = (r % self.rows, c % self.cols)
        if key not in self._v_ids:
            raise ValueError(f"no vertical edge at {key}")
        return self._v_ids[key]


def build(rows: int, cols: int, boundary: Boundary | str) -> Lattice:
    """Build a rows x cols lattice with the given boundary mode."""
    if isinstance(boundary, str):
        try:
            boundary = Boundary(boundary)
        except ValueError:
            raise ValueError(f"unknown boundary mode {boundary!r}") from None
    if rows < 2 or cols < 2:
        raise ValueError(f"lattice needs rows >= 2 and cols >= 2, got {rows}x{cols}")

    lat = Lattice(rows, cols, boundary)
    for r in range(rows):
        for c in range(cols):
            if c < cols - 1 or boundary.wraps_x:
                eid = len(lat.edges)
                lat.edges.append(Edge(eid, r, c, "R", lat.vertex(r, c), lat.vertex(r, c + 1)))
                lat._h_ids[(r, c)] = eid
    for r in range(rows):
        for c in range(cols):
            if r < rows - 1 or boundary.wraps_y:
                eid = len(lat.edges)
                lat.edges.append(Edge(eid, r, c, "D", lat.vertex(r, c), lat.vertex(r + 1, c)))
                lat._v_ids[(r, c)] = eid

    lat.adjacency = [[] for _ in range(lat.n_vertices)]
    for e in lat.edges:
        lat.adjacency[e.tail].append((e.head, e.id, True))
        lat.adjacency[e.head].append((e.tail, e.id, False))
    for lst in lat.adjacency:
        lst.sort()
    return lat


def cells(lat: Lattice) -> list[Cell]:
    """All 4-edge cells, row-major by anchor."""
    out: list[Cell] = []
    for r in range(lat.rows):
        if r == lat.rows - 1 and not lat.boundary.wraps_y:
            continue
        for c in range(lat.cols):
            if c == lat.cols - 1 and not lat.boundary.wraps_x:
                continue
            walk = (
                (lat.h_edge(r, c), True),  # top
                (lat.v_edge(r, c + 1), True),  # right
                (lat.h_edge(r + 1, c), False),  # bottom
                (lat.v_edge(r, c), False),  # left
            )
            out.append(Cell(len(out), r, c, walk))
    return out


@dataclass
class DualLattice:
    """Dual graph: one vertex per cell plus, when any boundary side is open,
    a single fused exterior vertex. One dual edge per primal edge.

    side_plus[e] is the dual vertex whose cell walks primal edge e forward,
    side_minus[e] the one walking it backward; the exterior vertex stands in
    for a missing cell. Labeling e with shift(t) adds t to the class of
    side_plus[e] and subtracts t from side_minus[e].
    """

    lat: Lattice
    n_cells: int
    exterior: int | None  # dual vertex id of the fused exterior, if present
    side_plus: list[int]
    side_minus: list[int]
    adjacency: list[list[tuple[int, int]]]  # dual vertex -> [(neighbor, primal edge id)]

    @property
    def n_vertices(self) -> int:
        return self.n_cells + (1 if self.exterior is not None else 0)


def dual(lat: Lattice) -> DualLattice:
    cs = cells(lat)
    cell_at = {(c.r, c.c): c.id for c in cs}
    open_boundary = not (lat.boundary.wraps_x and lat.boundary.wraps_y)
    ext = len(cs) if open_boundary else None

    def cell_or_ext(r: int, c: int) -> int:
        wrap_ok_r = 0 <= r < lat.rows or lat.boundary.wraps_y
        wrap_ok_c = 0 <= c < lat.cols or lat.boundary.wraps_x
        key = (r % lat.rows, c % lat.cols)
        if wrap_ok_r and wrap_ok_c and key in cell_at:
            return cell_at[key]
        assert ext is not None
        return ext

    side_plus = [0] * lat.n_edges
    side_minus = [0] * lat.n_edges
    for e in lat.edges:
        if e.kind == "R":
            side_plus[e.id] = cell_or_ext(e.r, e.c)  # cell below walks it forward
            side_minus[e.id] = cell_or_ext(e.r - 1, e.c)  # cell above walks it backward
        else:
            side_plus[e.id] = cell_or_ext(e.r, e.c - 1)  # cell to the left
            side_minus[e.id] = cell_or_ext(e.r, e.c)  # cell to the right

    n_dual = len(cs) + (1 if ext is not None else 0)
    adjacency: list[list[tuple[int, int]]] = [[] for _ in range(n_dual)]
    for eid in range(lat.n_edges):
        a, b = side_plus[eid], side_minus[eid]
        if a == b:
            continue  # both sides exterior (does not happen on >=2 lattices)
        adjacency[a].append((b, eid))
        adjacency[b].append((a, eid))
    for lst in adjacency:
        lst.sort()
    return DualLattice(lat, len(cs), ext, side_plus, side_minus, adjacency)


@dataclass
class Tree:
    """BFS spanning tree with deterministic row-major neighbor order."""

    root: int
    edge_ids: frozenset[int]
    parent: dict[int, tuple[int, int]]  # v -> (parent vertex, edge id)
    preorder: list[int]


def spanning_tree(lat: Lattice, root: int = 0) -> Tree:
    if not 0 <= root < lat.n_vertices:
        raise ValueError(f"root {root} out of range")
    parent: dict[int, tuple[int, int]] = {}
    seen = [False] * lat.n_vertices
    seen[root] = True
    order = [root]
    queue = [root]
    while queue:
        nxt: list[int] = []
        for v in queue:
            for w, eid, _ in lat.adjacency[v]:
                if not seen[w]:
                    seen[w] = True
                    parent[w] = (v, eid)
                    order.append(w)
                    nxt.append(w)
        queue = nxt
    if len(order) != lat.n_vertices:
        raise AssertionError("lattice is connected; BFS must reach every vertex")
    return Tree(root, frozenset(eid for _, eid in parent.values()), parent, order)


def enlarge_tree(lat: Lattice, tree: Tree | frozenset[int]) -> frozenset[int]:
    """Grow an edge set by absorbing every cell with exactly one edge outside
    it, until no cell qualifies. On a plane lattice this reaches all edges."""
    grown = set(tree.edge_ids if isinstance(tree, Tree) else tree)
    cs = cells(lat)
    changed = True
    while changed:
        changed = False
        for cell in cs:
            outside = [eid for eid, _ in cell.walk if eid not in grown]
            if len(outside) == 1:
                grown.add(outside[0])
                changed = True
    return frozenset(grown)


def homology_representatives(lat: Lattice) -> list[list[tuple[int, bool]]]:
    """Fixed non-contractible primal cycles, one per wrapping direction:
    the row-0 horizontal ring when x wraps, then the column-0 vertical ring
    when y wraps. Each entry is a (edge id, forward) walk."""
    reps: list[list[tuple[int, bool]]] = []
    if lat.boundary.wraps_x:
        reps.append([(lat.h_edge(0, c), True) for c in range(lat.cols)])
    if lat.boundary.wraps_y:
        reps.append([(lat.v_edge(r, 0), True) for r in range(lat.rows)])
    return reps


def dual_shortest_path(dlat: DualLattice, start: int, goal: int, metric: str = "unit") -> list[int]:
    """Primal edge ids crossed by a shortest dual path from start to goal.

    Unit metric BFS; parents assigned in ascending (vertex, edge) order, so
    ties resolve deterministically.
    """
    if metric != "unit":
        raise ValueError(f"unsupported metric {metric!r}")
    n = dlat.n_vertices
    if not (0 <= start < n and 0 <= goal < n):
        raise ValueError("dual vertex out of range")
    if start == goal:
        return []
    pred: dict[int, tuple[int, int]] = {}
    seen = {start}
    queue = [start]
    while queue and goal not in seen:
        nxt: list[int] = []
        for v in queue:
            for w, eid in dlat.adjacency[v]:
                if w not in seen:
                    seen.add(w)
                    pred[w] = (v, eid)
                    nxt.append(w)
        queue = nxt
    if goal not in seen:
        raise AssertionError("dual lattice is connected")
    path: list[int] = []
    v = goal
    while v != start:
        v, eid = pred[v]
        path.append(eid)
    path.reverse()
    return path


def dual_distances(dlat: DualLattice, start: int) -> list[int]:
    """BFS distances from a dual vertex to every dual vertex."""
    dist = [-1] * dlat.n_vertices
    dist[start] = 0
    queue = [start]
    while queue:
        nxt = []
        for v in queue:
            for w, _ in dlat.adjacency[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    nxt.append(w)
        queue = nxt
    return dist
