"""Permutation labelings of lattice edges and their switch-equivalence
structure: cell and cycle classes, canonical forms relative to a fixed
spanning tree, defect signatures, and equivalence decisions.

A labeling assigns one permutation to every edge; an assignment gives one
outcome per vertex, and an edge u -> v with label p is satisfied when
k(v) = p(k(u)). Switching at a vertex relabels its outcomes and generates
the equivalence relation all value computations are invariant under.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from . import lattice as lt
from . import perm as pm
from .lattice import Lattice
from .perm import Perm


@dataclass(frozen=True)
class Labeling:
    """Immutable edge labeling of a lattice. labels[eid] acts on outcomes."""

    lat: Lattice
    d: int
    labels: tuple[Perm, ...]

    def __post_init__(self) -> None:
        if len(self.labels) != self.lat.n_edges:
            raise ValueError("one label per edge required")
        for p in self.labels:
            if p.degree != self.d:
                raise ValueError(f"label degree {p.degree} != d={self.d}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Labeling):
            return NotImplemented
        return (
            self.d == other.d
            and self.lat.rows == other.lat.rows
            and self.lat.cols == other.lat.cols
            and self.lat.boundary == other.lat.boundary
            and self.labels == other.labels
        )


def identity_labeling(lat: Lattice, d: int) -> Labeling:
    return Labeling(lat, d, (pm.identity(d),) * lat.n_edges)


def with_labels(base: Labeling, updates: dict[int, Perm]) -> Labeling:
    labels = list(base.labels)
    for eid, p in updates.items():
        labels[eid] = p
    return Labeling(base.lat, base.d, tuple(labels))


def shift_indices(K: Labeling) -> list[int] | None:
    """Shift index per edge, or None if any label is not a cyclic shift."""
    out = []
    for p in K.labels:
        i = pm.shift_index(p)
        if i is None:
            return None
        out.append(i)
    return out


def from_shift_indices(lat: Lattice, d: int, indices: list[int]) -> Labeling:
    return Labeling(lat, d, tuple(pm.shift(d, i % d) for i in indices))


def is_shift_labeled(K: Labeling) -> bool:
    return shift_indices(K) is not None


def apply_switch(K: Labeling, v: int, sigma: Perm) -> Labeling:
    """Relabel outcomes at vertex v: edges into v get sigma . p, edges out
    of v get p . sigma^-1."""
    if not 0 <= v < K.lat.n_vertices:
        raise ValueError(f"vertex {v} out of range")
    if sigma.degree != K.d:
        raise ValueError("switch degree mismatch")
    sigma_inv = pm.inverse(sigma)
    labels = list(K.labels)
    for _, eid, tail_is_v in K.lat.adjacency[v]:
        if tail_is_v:
            labels[eid] = pm.compose(labels[eid], sigma_inv)
        else:
            labels[eid] = pm.compose(sigma, labels[eid])
    return Labeling(K.lat, K.d, tuple(labels))


def apply_global_switch(K: Labeling, sigma: Perm) -> Labeling:
    """Switch every vertex by sigma; every label conjugates to sigma.p.sigma^-1."""
    sigma_inv = pm.inverse(sigma)
    return Labeling(
        K.lat, K.d, tuple(pm.compose(sigma, pm.compose(p, sigma_inv)) for p in K.labels)
    )


def cycle_class(K: Labeling, walk) -> Perm:
    """Composition of labels along a closed walk of (edge id, forward) steps.

    The first-traversed edge acts first; edges traversed against their
    stored direction contribute their inverse. For a cell walked top, right,
    bottom, left this realizes left^-1 . bottom^-1 . right . top.
    """
    acc = pm.identity(K.d)
    for eid, forward in walk:
        p = K.labels[eid] if forward else pm.inverse(K.labels[eid])
        acc = pm.compose(p, acc)
    return acc


def cell_class(K: Labeling, cell: lt.Cell) -> Perm:
    return cycle_class(K, cell.walk)


def cell_class_indices(K: Labeling) -> list[int]:
    """Shift index of every cell class, row-major. Requires shift labels."""
    idx = shift_indices(K)
    if idx is None:
        raise ValueError("cell class indices need all labels in the shift family")
    d = K.d
    out = []
    for cell in lt.cells(K.lat):
        total = 0
        for eid, forward in cell.walk:
            total += idx[eid] if forward else -idx[eid]
        out.append(total % d)
    return out


def consistent_assignments(K: Labeling) -> list[tuple[int, ...]]:
    """All outcome assignments violating no edge, found by fixing vertex 0,
    propagating along the fixed BFS tree and checking the non-tree edges.
    Their count classifies the labeling: d good, 1..d-1 ugly, 0 bad."""
    tree = lt.spanning_tree(K.lat, 0)
    found: list[tuple[int, ...]] = []
    for v0 in range(K.d):
        values = [-1] * K.lat.n_vertices
        values[tree.root] = v0
        for v in tree.preorder[1:]:
            p, eid = tree.parent[v]
            e = K.lat.edges[eid]
            if e.tail == p:
                values[v] = K.labels[eid](values[p])
            else:
                values[v] = pm.inverse(K.labels[eid])(values[p])
        ok = all(values[e.head] == K.labels[e.id](values[e.tail]) for e in K.lat.edges)
        if ok:
            found.append(tuple(values))
    return found


def classify_labeling(K: Labeling) -> str:
    """good (d consistent assignments), ugly (some but not all), bad (none)."""
    n = len(consistent_assignments(K))
    if n == K.d:
        return "good"
    return "ugly" if n > 0 else "bad"


def canonicalize(K: Labeling, tree: lt.Tree | None = None) -> Labeling:
    """Equivalent labeling with identity on every edge of the spanning tree,
    via root-to-leaf switches. Shift-labeled input stays shift-labeled."""
    if tree is None:
        tree = lt.spanning_tree(K.lat, 0)
    labels = list(K.labels)
    for v in tree.preorder[1:]:
        _, eid = tree.parent[v]
        e = K.lat.edges[eid]
        # choose sigma so the switch at v sends this tree edge to identity
        sigma = pm.inverse(labels[eid]) if e.head == v else labels[eid]
        sigma_inv = pm.inverse(sigma)
        for _, eid2, tail_is_v in K.lat.adjacency[v]:
            if tail_is_v:
                labels[eid2] = pm.compose(labels[eid2], sigma_inv)
            else:
                labels[eid2] = pm.compose(sigma, labels[eid2])
    out = Labeling(K.lat, K.d, tuple(labels))
    assert all(out.labels[eid].is_identity() for eid in tree.edge_ids)
    return out


def labeling_sum(K: Labeling, L: Labeling) -> Labeling:
    """Edgewise composition, defined on the commutative shift family only."""
    ki, li = shift_indices(K), shift_indices(L)
    if ki is None or li is None:
        raise ValueError("labeling_sum needs both labelings in the shift family")
    if K.lat.n_edges != L.lat.n_edges or K.d != L.d:
        raise ValueError("mismatched labelings")
    return from_shift_indices(K.lat, K.d, [a + b for a, b in zip(ki, li)])


def labeling_diff(K: Labeling, L: Labeling) -> Labeling:
    ki, li = shift_indices(K), shift_indices(L)
    if ki is None or li is None:
        raise ValueError("labeling_diff needs both labelings in the shift family")
    if K.lat.n_edges != L.lat.n_edges or K.d != L.d:
        raise ValueError("mismatched labelings")
    return from_shift_indices(K.lat, K.d, [a - b for a, b in zip(ki, li)])


@dataclass(frozen=True)
class DefectSignature:
    """Cell classes (row-major) and loop classes (one per wrap direction,
    x first), all as shift indices, taken after canonicalization w.r.t. the
    fixed BFS tree so loop values are deterministic."""

    d: int
    cells: tuple[int, ...]
    loops: tuple[int, ...]

    def dump(self) -> str:
        cells = ",".join(str(x) for x in self.cells)
        loops = ",".join(str(x) for x in self.loops)
        return f"cells: [{cells}] loops: [{loops}]"


def signature(K: Labeling) -> DefectSignature:
    if not is_shift_labeled(K):
        raise ValueError("signature is defined for shift-family labelings only")
    canon = canonicalize(K)
    cells = tuple(cell_class_indices(canon))
    loops = []
    for rep in lt.homology_representatives(K.lat):
        i = pm.shift_index(cycle_class(canon, rep))
        assert i is not None
        loops.append(i)
    return DefectSignature(K.d, cells, tuple(loops))


def units(d: int) -> list[int]:
    return [u for u in range(1, d) if gcd(u, d) == 1]


@dataclass(frozen=True)
class EquivalenceResult:
    equivalent: bool
    unit: int | None  # witness u on success
    witness: tuple[str, int] | None  # ("cell"|"loop", index) on failure

    def __bool__(self) -> bool:
        return self.equivalent


def is_equivalent(K1: Labeling, K2: Labeling) -> EquivalenceResult:
    """Decide switch equivalence of two shift-labeled games by comparing
    signatures up to a unit u (outcome relabelings that normalize the shift
    family act on classes as x -> u*x). Non-shift labels are not decided
    here; use orbit_oracle for those."""
    if (
        K1.lat.rows != K2.lat.rows
        or K1.lat.cols != K2.lat.cols
        or K1.lat.boundary != K2.lat.boundary
    ):
        raise ValueError("labelings live on different lattices")
    if K1.d != K2.d:
        raise ValueError("labelings have different d")
    if not is_shift_labeled(K1) or not is_shift_labeled(K2):
        raise ValueError("is_equivalent decides shift-family labelings only")
    s1, s2 = signature(K1), signature(K2)
    d = K1.d
    best_mismatch: tuple[str, int] | None = None
    best_count = None
    for u in units(d):
        mism: list[tuple[str, int]] = []
        for i, (a, b) in enumerate(zip(s1.cells, s2.cells)):
            if a != (u * b) % d:
                mism.append(("cell", i))
        for i, (a, b) in enumerate(zip(s1.loops, s2.loops)):
            if a != (u * b) % d:
                mism.append(("loop", i))
        if not mism:
            return EquivalenceResult(True, u, None)
        if best_count is None or len(mism) < best_count:
            best_count, best_mismatch = len(mism), mism[0]
    return EquivalenceResult(False, None, best_mismatch)


def orbit_oracle(K1: Labeling, K2: Labeling, max_states: int = 200_000) -> str:
    """Exhaustive check of switch equivalence on tiny instances: BFS over
    the orbit of K1 under single-vertex shift switches plus the global
    relabeling moves by family-normalizing permutations (reflections and,
    for d >= 5, multiplier maps). Returns "equivalent", "inequivalent", or
    "inconclusive" when the orbit exceeds max_states."""
    i1, i2 = shift_indices(K1), shift_indices(K2)
    if i1 is None or i2 is None:
        raise ValueError("orbit_oracle operates on shift-family labelings")
    if K1.d != K2.d or K1.lat.n_edges != K2.lat.n_edges:
        raise ValueError("mismatched labelings")
    d = K1.d
    lat = K1.lat
    target = bytes(i2)
    start = bytes(i1)
    if start == target:
        return "equivalent"

    # precompute the effect of s(v, shift(1)): +1 on in-edges, -1 on out-edges
    inc: list[list[tuple[int, int]]] = []
    for v in range(lat.n_vertices):
        inc.append([(eid, -1 if tail_is_v else +1) for _, eid, tail_is_v in lat.adjacency[v]])

    seen = {start}
    frontier = [start]
    while frontier:
        if len(seen) > max_states:
            return "inconclusive"
        next_frontier: list[bytes] = []
        for state in frontier:
            neighbors: list[bytes] = []
            for v in range(lat.n_vertices):
                for t in range(1, d):
                    s = bytearray(state)
                    for eid, sign in inc[v]:
                        s[eid] = (s[eid] + sign * t) % d
                    neighbors.append(bytes(s))
            for u in units(d):
                if u == 1:
                    continue
                neighbors.append(bytes((u * x) % d for x in state))
            for s in neighbors:
                if s not in seen:
                    if s == target:
                        return "equivalent"
                    seen.add(s)
                    next_frontier.append(s)
        frontier = next_frontier
    return "inequivalent"


def count_loop_classes(lat: Lattice, d: int) -> int:
    """Number of loop signatures of defect-free labelings: d^(wrap count)
    (torus d^2, cylinder d, plane 1)."""
    return d ** (int(lat.boundary.wraps_x) + int(lat.boundary.wraps_y))


def bipartition(lat: Lattice) -> tuple[list[int], list[int]] | None:
    """Vertex 2-coloring by (r+c) mod 2, or None if a wrap direction of odd
    length breaks bipartiteness."""
    if lat.boundary.wraps_x and lat.cols % 2 != 0:
        return None
    if lat.boundary.wraps_y and lat.rows % 2 != 0:
        return None
    part0, part1 = [], []
    for v in range(lat.n_vertices):
        r, c = lat.coords(v)
        (part0 if (r + c) % 2 == 0 else part1).append(v)
    return part0, part1


def normalize_family(K: Labeling) -> Labeling:
    """Convert an all-reflection labeling into an equivalent all-shift one by
    reflection switches on one bipartition class."""
    parts = bipartition(K.lat)
    if parts is None:
        raise ValueError("normalize_family needs a bipartite lattice")
    refl = [pm.reflection_index(p) for p in K.labels]
    if any(i is None for i in refl):
        raise ValueError("normalize_family expects every label in the reflection family")
    if is_shift_labeled(K):
        raise ValueError("labeling already lies in the shift family")
    out = K
    for v in parts[1]:
        out = apply_switch(out, v, pm.reflection(K.d, 0))
    assert is_shift_labeled(out)
    return out
