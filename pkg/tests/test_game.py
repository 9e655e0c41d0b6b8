import random

import pytest

from nlgame import game as gm
from nlgame import lattice as lt
from nlgame import perm as pm


def random_shift_labeling(lat, d, rng):
    return gm.from_shift_indices(lat, d, [rng.randrange(d) for _ in range(lat.n_edges)])


def test_identity_labeling_is_good():
    lat = lt.build(3, 3, "torus")
    K = gm.identity_labeling(lat, 3)
    assert gm.classify_labeling(K) == "good"
    assert len(gm.consistent_assignments(K)) == 3


def test_single_defect_is_bad():
    lat = lt.build(2, 2, "plane")
    K = gm.with_labels(gm.identity_labeling(lat, 3), {0: pm.shift(3, 1)})
    assert gm.classify_labeling(K) == "bad"


def test_ugly_labeling():
    # a cycle class with a proper fixed-point set leaves some assignments alive
    lat = lt.build(2, 2, "plane")
    K = gm.with_labels(gm.identity_labeling(lat, 4), {0: pm.Perm((0, 2, 1, 3))})
    assert gm.classify_labeling(K) == "ugly"
    assert len(gm.consistent_assignments(K)) == 2


def test_consistent_assignments_respect_all_edges():
    rng = random.Random(3)
    for _ in range(25):
        lat = lt.build(2, 3, rng.choice(("plane", "cylx", "cyly", "torus")))
        d = rng.choice((2, 3, 4))
        K = random_shift_labeling(lat, d, rng)
        for values in gm.consistent_assignments(K):
            for e in lat.edges:
                assert values[e.head] == K.labels[e.id](values[e.tail])


def test_switch_preserves_value_structure():
    # s(v, sigma) relabels outcomes at v, so consistent assignment counts match
    rng = random.Random(4)
    for _ in range(25):
        lat = lt.build(3, 3, rng.choice(("plane", "torus")))
        d = rng.choice((2, 3))
        K = random_shift_labeling(lat, d, rng)
        n0 = len(gm.consistent_assignments(K))
        img = list(range(d))
        rng.shuffle(img)
        K2 = gm.apply_switch(K, rng.randrange(lat.n_vertices), pm.Perm(tuple(img)))
        assert len(gm.consistent_assignments(K2)) == n0


def test_shift_switches_preserve_cell_classes():
    rng = random.Random(5)
    for d in (2, 3, 4, 5):
        lat = lt.build(3, 4, "torus")
        K = random_shift_labeling(lat, d, rng)
        before = gm.cell_class_indices(K)
        for _ in range(30):
            K = gm.apply_switch(K, rng.randrange(lat.n_vertices), pm.shift(d, rng.randrange(d)))
        assert gm.cell_class_indices(K) == before


def test_reflection_switch_conjugates_cell_class():
    # a global reflection switch sends every cell class x to -x
    rng = random.Random(6)
    for d in (2, 3, 4, 5):
        lat = lt.build(3, 3, "plane")
        K = random_shift_labeling(lat, d, rng)
        before = gm.cell_class_indices(K)
        K2 = gm.apply_global_switch(K, pm.reflection(d, rng.randrange(d)))
        assert gm.cell_class_indices(K2) == [(-x) % d for x in before]


def test_cell_class_matches_walk_composition():
    rng = random.Random(7)
    lat = lt.build(3, 3, "torus")
    K = random_shift_labeling(lat, 5, rng)
    idx = gm.cell_class_indices(K)
    for cell, want in zip(lt.cells(lat), idx):
        assert gm.cell_class(K, cell) == pm.shift(5, want)


def test_canonicalize_fixes_tree_and_keeps_signature():
    rng = random.Random(8)
    for d in (2, 3):
        lat = lt.build(3, 4, "torus")
        K = random_shift_labeling(lat, d, rng)
        canon = gm.canonicalize(K)
        tree = lt.spanning_tree(lat)
        assert all(canon.labels[eid].is_identity() for eid in tree.edge_ids)
        assert gm.cell_class_indices(canon) == gm.cell_class_indices(K)


def test_signature_examples():
    lat = lt.build(4, 4, "torus")
    K = gm.identity_labeling(lat, 2)
    K = gm.with_labels(K, {lat.h_edge(r, 0): pm.shift(2, 1) for r in range(4)})
    sig = gm.signature(K)
    assert sig.cells == (0,) * 16
    assert sig.loops == (1, 0)
    assert sig.dump() == "cells: [0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0] loops: [1,0]"

    K2 = gm.identity_labeling(lat, 2)
    K2 = gm.with_labels(K2, {lat.v_edge(0, c): pm.shift(2, 1) for c in range(4)})
    assert gm.signature(K2).loops == (0, 1)


def test_signature_invariant_under_switches():
    rng = random.Random(9)
    for d in (2, 3, 4):
        lat = lt.build(3, 3, "torus")
        K = random_shift_labeling(lat, d, rng)
        s0 = gm.signature(K)
        K2 = K
        for _ in range(40):
            K2 = gm.apply_switch(K2, rng.randrange(lat.n_vertices), pm.shift(d, rng.randrange(d)))
        assert gm.signature(K2) == s0


def test_signature_rejects_non_shift():
    lat = lt.build(2, 2, "plane")
    K = gm.Labeling(lat, 3, (pm.reflection(3, 0),) * lat.n_edges)
    with pytest.raises(ValueError):
        gm.signature(K)


def test_labeling_sum_and_diff():
    rng = random.Random(10)
    lat = lt.build(3, 3, "torus")
    d = 5
    A = random_shift_labeling(lat, d, rng)
    B = random_shift_labeling(lat, d, rng)
    S = gm.labeling_sum(A, B)
    ca = gm.cell_class_indices(A)
    cb = gm.cell_class_indices(B)
    assert gm.cell_class_indices(S) == [(x + y) % d for x, y in zip(ca, cb)]
    D = gm.labeling_diff(S, B)
    assert D == A


def test_labeling_sum_rejects_non_commuting():
    lat = lt.build(2, 2, "plane")
    A = gm.identity_labeling(lat, 3)
    B = gm.Labeling(lat, 3, (pm.reflection(3, 0),) * lat.n_edges)
    with pytest.raises(ValueError):
        gm.labeling_sum(A, B)


def test_sum_commutes_with_shift_switch():
    rng = random.Random(11)
    lat = lt.build(3, 3, "torus")
    d = 4
    for _ in range(20):
        A = random_shift_labeling(lat, d, rng)
        B = random_shift_labeling(lat, d, rng)
        v = rng.randrange(lat.n_vertices)
        t = rng.randrange(d)
        lhs = gm.labeling_sum(gm.apply_switch(A, v, pm.shift(d, t)), B)
        rhs = gm.apply_switch(gm.labeling_sum(A, B), v, pm.shift(d, t))
        assert lhs == rhs


def test_is_equivalent_unit_witness():
    # loop class 2 maps to loop class 3 under the unit 4 (mod 5)
    lat = lt.build(2, 2, "cylx")
    A = gm.with_labels(gm.identity_labeling(lat, 5), {lat.h_edge(0, 0): pm.shift(5, 2)})
    B = gm.with_labels(gm.identity_labeling(lat, 5), {lat.h_edge(0, 0): pm.shift(5, 3)})
    r = gm.is_equivalent(A, B)
    assert r.equivalent and r.unit == 4
    assert bool(r)


def test_is_equivalent_reflexive_symmetric():
    rng = random.Random(12)
    for _ in range(20):
        lat = lt.build(2, 3, rng.choice(("plane", "cylx", "torus")))
        d = rng.choice((2, 3, 4, 5))
        A = random_shift_labeling(lat, d, rng)
        B = random_shift_labeling(lat, d, rng)
        assert gm.is_equivalent(A, A).equivalent
        assert gm.is_equivalent(A, B).equivalent == gm.is_equivalent(B, A).equivalent


def test_is_equivalent_inequivalent_has_witness():
    lat = lt.build(2, 2, "plane")
    A = gm.identity_labeling(lat, 3)
    B = gm.with_labels(A, {0: pm.shift(3, 1)})
    r = gm.is_equivalent(A, B)
    assert not r.equivalent
    assert r.witness == ("cell", 0)


def test_is_equivalent_rejects_other_family():
    lat = lt.build(2, 2, "plane")
    A = gm.identity_labeling(lat, 3)
    B = gm.Labeling(lat, 3, (pm.reflection(3, 1),) * lat.n_edges)
    with pytest.raises(ValueError):
        gm.is_equivalent(A, B)


def test_orbit_oracle_matches_is_equivalent():
    rng = random.Random(13)
    for _ in range(30):
        lat = lt.build(2, 2, rng.choice(("plane", "cylx", "torus")))
        d = rng.choice((2, 3))
        A = random_shift_labeling(lat, d, rng)
        B = random_shift_labeling(lat, d, rng)
        want = "equivalent" if gm.is_equivalent(A, B).equivalent else "inequivalent"
        assert gm.orbit_oracle(A, B, max_states=300_000) == want


def test_orbit_oracle_inconclusive_on_tiny_budget():
    lat = lt.build(2, 3, "torus")
    rng = random.Random(14)
    A = random_shift_labeling(lat, 3, rng)
    B = random_shift_labeling(lat, 3, rng)
    if gm.is_equivalent(A, B).equivalent:
        B = gm.with_labels(B, {0: pm.shift(3, (pm.shift_index(B.labels[0]) + 1) % 3)})
    assert gm.orbit_oracle(A, B, max_states=5) == "inconclusive"


def test_count_loop_classes():
    assert gm.count_loop_classes(lt.build(3, 3, "torus"), 2) == 4
    assert gm.count_loop_classes(lt.build(3, 3, "torus"), 3) == 9
    assert gm.count_loop_classes(lt.build(3, 3, "cylx"), 3) == 3
    assert gm.count_loop_classes(lt.build(3, 3, "cyly"), 5) == 5
    assert gm.count_loop_classes(lt.build(3, 3, "plane"), 7) == 1


def test_normalize_family_all_reflections():
    lat = lt.build(2, 2, "plane")
    K = gm.Labeling(lat, 3, (pm.reflection(3, 0),) * lat.n_edges)
    N = gm.normalize_family(K)
    assert gm.is_shift_labeled(N)
    assert gm.classify_labeling(N) == gm.classify_labeling(K)


def test_normalize_family_preserves_class_structure():
    rng = random.Random(15)
    for _ in range(20):
        lat = lt.build(2, 3, "plane")
        d = rng.choice((3, 4, 5))
        K = gm.Labeling(
            lat, d, tuple(pm.reflection(d, rng.randrange(d)) for _ in range(lat.n_edges))
        )
        N = gm.normalize_family(K)
        assert gm.is_shift_labeled(N)
        # switches never change the number of consistent assignments
        assert len(gm.consistent_assignments(N)) == len(gm.consistent_assignments(K))


def test_normalize_family_rejects_shift_input():
    lat = lt.build(2, 2, "plane")
    with pytest.raises(ValueError):
        gm.normalize_family(gm.identity_labeling(lat, 3))


def test_normalize_family_rejects_mixed():
    lat = lt.build(2, 2, "plane")
    labels = [pm.reflection(3, 0)] * lat.n_edges
    labels[1] = pm.shift(3, 1)
    with pytest.raises(ValueError):
        gm.normalize_family(gm.Labeling(lat, 3, tuple(labels)))


def test_normalize_family_rejects_odd_wrap():
    lat = lt.build(3, 3, "torus")
    K = gm.Labeling(lat, 3, (pm.reflection(3, 0),) * lat.n_edges)
    with pytest.raises(ValueError):
        gm.normalize_family(K)
