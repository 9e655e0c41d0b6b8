import pytest

from nlgame import lattice as lt


BOUNDARIES = ("plane", "cylx", "cyly", "torus")


def expected_edge_count(rows, cols, boundary):
    h = rows * (cols if boundary in ("cylx", "torus") else cols - 1)
    v = (rows if boundary in ("cyly", "torus") else rows - 1) * cols
    return h + v


def expected_cell_count(rows, cols, boundary):
    cr = rows if boundary in ("cyly", "torus") else rows - 1
    cc = cols if boundary in ("cylx", "torus") else cols - 1
    return cr * cc


def test_counts_all_boundaries():
    for rows, cols in ((2, 2), (2, 3), (3, 2), (4, 4), (3, 5)):
        for b in BOUNDARIES:
            lat = lt.build(rows, cols, b)
            assert lat.n_vertices == rows * cols
            assert lat.n_edges == expected_edge_count(rows, cols, b)
            assert len(lt.cells(lat)) == expected_cell_count(rows, cols, b)


def test_euler_characteristic():
    # V - E + F = 2 on the sphere (plane plus outer face), 0 on the torus
    for rows, cols in ((2, 2), (3, 4), (4, 4)):
        p = lt.build(rows, cols, "plane")
        assert p.n_vertices - p.n_edges + len(lt.cells(p)) + 1 == 2
        t = lt.build(rows, cols, "torus")
        assert t.n_vertices - t.n_edges + len(lt.cells(t)) == 0


def test_edge_ids_horizontal_block_first():
    lat = lt.build(3, 4, "torus")
    n_h = 3 * 4
    for eid in range(n_h):
        assert lat.edges[eid].kind == "R"
    for eid in range(n_h, lat.n_edges):
        assert lat.edges[eid].kind == "D"
    # row-major within each block
    assert lat.h_edge(0, 0) == 0
    assert lat.h_edge(0, 1) == 1
    assert lat.h_edge(1, 0) == 4
    assert lat.v_edge(0, 0) == n_h


def test_edge_endpoints_wrap():
    lat = lt.build(3, 4, "torus")
    e = lat.edges[lat.h_edge(1, 3)]
    assert e.tail == lat.vertex(1, 3) and e.head == lat.vertex(1, 0)
    e = lat.edges[lat.v_edge(2, 1)]
    assert e.tail == lat.vertex(2, 1) and e.head == lat.vertex(0, 1)


def test_cell_walk_shape():
    lat = lt.build(3, 3, "torus")
    for cell in lt.cells(lat):
        kinds = [(lat.edges[eid].kind, fwd) for eid, fwd in cell.walk]
        assert kinds == [("R", True), ("D", True), ("R", False), ("D", False)]


def test_build_validation():
    with pytest.raises(ValueError):
        lt.build(1, 4, "plane")
    with pytest.raises(ValueError):
        lt.build(4, 4, "moebius")


def test_dual_torus_has_no_exterior():
    lat = lt.build(3, 4, "torus")
    dual = lt.dual(lat)
    assert dual.exterior is None
    assert dual.n_cells == 12
    for e in lat.edges:
        assert dual.side_plus[e.id] != dual.side_minus[e.id]


def test_dual_plane_exterior_absorbs_boundary():
    lat = lt.build(3, 3, "plane")
    dual = lt.dual(lat)
    assert dual.exterior == dual.n_cells
    # the top horizontal edge has the exterior on its minus side
    assert dual.side_minus[lat.h_edge(0, 0)] == dual.exterior
    # an interior vertical edge separates two proper cells
    assert dual.exterior not in (
        dual.side_plus[lat.v_edge(1, 1)],
        dual.side_minus[lat.v_edge(1, 1)],
    )


def test_dual_sides_match_cell_walks():
    # side_plus must be exactly the cell whose walk uses the edge forward
    for b in BOUNDARIES:
        lat = lt.build(3, 4, b)
        dual = lt.dual(lat)
        for cell in lt.cells(lat):
            for eid, fwd in cell.walk:
                if fwd:
                    assert dual.side_plus[eid] == cell.id
                else:
                    assert dual.side_minus[eid] == cell.id


def test_spanning_tree_properties():
    for b in BOUNDARIES:
        lat = lt.build(4, 5, b)
        tree = lt.spanning_tree(lat)
        assert len(tree.edge_ids) == lat.n_vertices - 1
        assert len(tree.preorder) == lat.n_vertices
        assert tree.preorder[0] == tree.root == 0
        seen = {tree.root}
        for v in tree.preorder[1:]:
            p, eid = tree.parent[v]
            assert p in seen
            e = lat.edges[eid]
            assert {e.tail, e.head} == {p, v}
            seen.add(v)


def test_enlarge_tree_plane_absorbs_everything():
    # on the plane the enlarged tree swallows every cell, so every edge
    # can be made identity by switches
    lat = lt.build(3, 4, "plane")
    tree = lt.spanning_tree(lat)
    full = lt.enlarge_tree(lat, tree)
    assert full == frozenset(range(lat.n_edges))


def test_enlarge_tree_torus_leaves_loops():
    lat = lt.build(3, 3, "torus")
    tree = lt.spanning_tree(lat)
    full = lt.enlarge_tree(lat, tree)
    assert len(full) <= lat.n_edges - 2


def test_homology_representatives():
    lat = lt.build(3, 4, "torus")
    reps = lt.homology_representatives(lat)
    assert len(reps) == 2
    xs, ys = reps
    assert [eid for eid, _ in xs] == [lat.h_edge(0, c) for c in range(4)]
    assert [eid for eid, _ in ys] == [lat.v_edge(r, 0) for r in range(3)]
    assert len(lt.homology_representatives(lt.build(3, 4, "cylx"))) == 1
    assert len(lt.homology_representatives(lt.build(3, 4, "plane"))) == 0


def test_dual_shortest_path_unit_metric():
    lat = lt.build(4, 4, "torus")
    dual = lt.dual(lat)
    # neighboring cells: one edge
    path = lt.dual_shortest_path(dual, 0, 1)
    assert len(path) == 1
    # wrap-around is shorter than going across
    path = lt.dual_shortest_path(dual, 0, 3)
    assert len(path) == 1
    path = lt.dual_shortest_path(dual, 0, 2)
    assert len(path) == 2


def test_dual_path_to_exterior():
    lat = lt.build(4, 4, "plane")
    dual = lt.dual(lat)
    center = 4  # cell (1, 1) in the 3x3 cell grid
    path = lt.dual_shortest_path(dual, center, dual.exterior)
    assert len(path) == 2


def test_dual_distances_agree_with_paths():
    lat = lt.build(3, 4, "cyly")
    dual = lt.dual(lat)
    dist = lt.dual_distances(dual, 0)
    for target in range(dual.n_cells):
        path = lt.dual_shortest_path(dual, 0, target)
        assert dist[target] == len(path)
