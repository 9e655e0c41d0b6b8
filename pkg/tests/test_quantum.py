import math

import numpy as np
import pytest

from nlgame import classical as cl
from nlgame import game as gm
from nlgame import lattice as lt
from nlgame import perm as pm
from nlgame import quantum as qt


def cycle_value(d: int, m: int) -> float:
    # quantum value of one length-m cycle whose labels compose to a unit
    # shift: (1/d)(1 + (d-1) cos(2 pi / (d m)))
    return (1.0 + (d - 1) * math.cos(2 * math.pi / (d * m))) / d


def shift_game(rows, cols, boundary, d, updates):
    lat = lt.build(rows, cols, boundary)
    idx = [0] * lat.n_edges
    for eid, t in updates.items():
        idx[eid] = t
    return gm.from_shift_indices(lat, d, idx)


def loop_x(lat, value=1):
    return {lat.h_edge(r, 0): value for r in range(lat.rows)}


def loop_y(lat, value=1):
    return {lat.v_edge(0, c): value for c in range(lat.cols)}


def torus_loops(rows, cols, d, kx=0, ky=0):
    lat = lt.build(rows, cols, "torus")
    ups = {}
    if kx:
        ups.update(loop_x(lat, kx))
    if ky:
        ups.update(loop_y(lat, ky))
    return shift_game(rows, cols, "torus", d, ups)


def chsh_game():
    # 2x2 plane is a 4-cycle; one swapped edge makes it the standard
    # two-question correlation game
    return shift_game(2, 2, "plane", 2, {0: 1})


def test_bell_instance_structure():
    K = torus_loops(4, 4, 2, kx=1)
    inst = qt.to_bell_instance(K)
    assert len(inst.alice) == 8 and len(inst.bob) == 8
    assert inst.n_edges == 32
    aset, bset = set(inst.alice), set(inst.bob)
    for x, y, p in inst.edges:
        assert x in aset and y in bset
    assert inst.weight == pytest.approx(1 / 32)


def test_bell_instance_reverses_bob_to_alice_edges():
    lat = lt.build(4, 4, "torus")
    K = gm.identity_labeling(lat, 3)
    flipped = None
    for e in lat.edges:
        r, c = lat.coords(e.tail)
        if (r + c) % 2 == 1:
            flipped = e
            break
    K = gm.with_labels(K, {flipped.id: pm.shift(3, 1)})
    inst = qt.to_bell_instance(K)
    stored = [t for t in inst.edges if not t[2].is_identity()]
    assert len(stored) == 1
    x, y, p = stored[0]
    assert (x, y) == (flipped.head, flipped.tail)
    assert p == pm.inverse(pm.shift(3, 1))


def test_bell_instance_identity_game():
    K = shift_game(2, 3, "plane", 2, {})
    inst = qt.to_bell_instance(K)
    assert all(p.is_identity() for _, _, p in inst.edges)


def test_bell_instance_rejects_odd_wraps():
    for rows, cols, boundary in [(3, 3, "torus"), (3, 4, "torus"), (4, 3, "cylx"), (3, 4, "cyly")]:
        K = shift_game(rows, cols, boundary, 2, {})
        with pytest.raises(ValueError):
            qt.to_bell_instance(K)
    qt.to_bell_instance(shift_game(3, 4, "cylx", 2, {}))


def test_bell_instance_validation():
    p = pm.identity(2)
    with pytest.raises(ValueError):
        qt.BellInstance((0, 1), (1, 2), ((0, 1, p),), 2)
    with pytest.raises(ValueError):
        qt.BellInstance((0,), (1,), ((0, 2, p),), 2)
    with pytest.raises(ValueError):
        qt.BellInstance((0,), (1,), ((0, 1, p),), 3)
    with pytest.raises(ValueError):
        qt.BellInstance((0,), (1,), (), 2)


def test_xor_exact_identity_is_perfect():
    for K in (shift_game(2, 2, "plane", 2, {}), shift_game(4, 4, "torus", 2, {})):
        assert qt.xor_exact_value(qt.to_bell_instance(K)) == pytest.approx(1.0, abs=1e-7)


def test_xor_exact_chsh():
    v = qt.xor_exact_value(qt.to_bell_instance(chsh_game()))
    assert v == pytest.approx((2 + math.sqrt(2)) / 4, abs=1e-7)
    assert v == pytest.approx(cycle_value(2, 4), abs=1e-7)


def test_xor_exact_rejects_d3():
    with pytest.raises(ValueError):
        qt.xor_exact_value(qt.to_bell_instance(torus_loops(4, 4, 3, kx=1)))


def test_xor_exact_torus_loops():
    both = qt.xor_exact_value(qt.to_bell_instance(torus_loops(4, 4, 2, kx=1, ky=1)))
    assert both == pytest.approx(cycle_value(2, 4), abs=1e-6)
    single = qt.xor_exact_value(qt.to_bell_instance(torus_loops(4, 4, 2, kx=1)))
    assert single == pytest.approx((1 + cycle_value(2, 4)) / 2, abs=1e-6)


def test_xor_exact_tall_torus_loops():
    # one frustrated direction has cycle length 8, the other 4
    both = qt.xor_exact_value(qt.to_bell_instance(torus_loops(8, 4, 2, kx=1, ky=1)))
    assert both == pytest.approx((cycle_value(2, 8) + cycle_value(2, 4)) / 2, abs=1e-6)
    tall = qt.xor_exact_value(qt.to_bell_instance(torus_loops(8, 4, 2, ky=1)))
    assert tall == pytest.approx((1 + cycle_value(2, 8)) / 2, abs=1e-6)


def test_npa1_matches_exact_for_d2():
    games = [
        chsh_game(),
        torus_loops(4, 4, 2, kx=1, ky=1),
        shift_game(2, 4, "torus", 2, {0: 1, 5: 1, 9: 1}),
    ]
    for K in games:
        inst = qt.to_bell_instance(K)
        assert qt.npa1_upper_bound(inst) == pytest.approx(qt.xor_exact_value(inst), abs=1e-5)


def test_npa1_identity_is_perfect():
    for d in (2, 3):
        inst = qt.to_bell_instance(shift_game(2, 2, "plane", d, {}))
        assert qt.npa1_upper_bound(inst) == pytest.approx(1.0, abs=1e-6)


def test_npa1_d3_torus_loops():
    inst = qt.to_bell_instance(torus_loops(4, 4, 3, kx=1, ky=1))
    assert qt.npa1_upper_bound(inst) == pytest.approx(cycle_value(3, 4), abs=1e-4)


def test_npa1_positivity_cuts_tighten_d3():
    # forcing outcome probabilities nonnegative is a valid strengthening:
    # strictly below the plain level-1 value here, still above any strategy
    inst = qt.to_bell_instance(torus_loops(4, 4, 3, kx=1, ky=1))
    plain = qt.npa1_upper_bound(inst)
    tight = qt.npa1_upper_bound(inst, cut_rounds=5)
    assert tight < plain - 1e-3
    lower = qt.seesaw_lower_bound(inst, dim=3, restarts=2, iterations=8, seed=0)
    assert lower <= tight + 1e-6


def test_npa1_d3_single_loop():
    inst = qt.to_bell_instance(torus_loops(2, 4, 3, kx=1))
    # unfrustrated vertical edges push the value halfway to 1
    assert qt.npa1_upper_bound(inst) == pytest.approx((1 + cycle_value(3, 4)) / 2, abs=1e-4)


def test_npa1_switch_invariance():
    K = torus_loops(2, 4, 3, kx=1, ky=2)
    L = gm.apply_switch(gm.apply_switch(K, 3, pm.shift(3, 2)), 5, pm.reflection(3, 1))
    a = qt.npa1_upper_bound(qt.to_bell_instance(K))
    b = qt.npa1_upper_bound(qt.to_bell_instance(L))
    assert a == pytest.approx(b, abs=1e-6)


def test_xor_exact_switch_invariance():
    K = torus_loops(4, 4, 2, kx=1)
    L = gm.apply_switch(K, 6, pm.shift(2, 1))
    a = qt.xor_exact_value(qt.to_bell_instance(K))
    b = qt.xor_exact_value(qt.to_bell_instance(L))
    assert a == pytest.approx(b, abs=1e-6)


def test_npa1_unit_related_loop_classes_agree():
    pairs = [((1, 1), (2, 2)), ((1, 2), (2, 1))]
    for (ka, kb), (kc, kd) in pairs:
        a = qt.npa1_upper_bound(qt.to_bell_instance(torus_loops(2, 4, 3, kx=ka, ky=kb)))
        b = qt.npa1_upper_bound(qt.to_bell_instance(torus_loops(2, 4, 3, kx=kc, ky=kd)))
        assert a == pytest.approx(b, abs=1e-5)


def test_seesaw_chsh_reaches_exact():
    inst = qt.to_bell_instance(chsh_game())
    v = qt.seesaw_lower_bound(inst, dim=2, restarts=4, iterations=15, seed=0)
    assert v <= (2 + math.sqrt(2)) / 4 + 1e-6
    assert v == pytest.approx((2 + math.sqrt(2)) / 4, abs=1e-5)


def test_seesaw_torus_d2():
    inst = qt.to_bell_instance(torus_loops(4, 4, 2, kx=1, ky=1))
    v = qt.seesaw_lower_bound(inst, dim=2, restarts=3, iterations=12, seed=1)
    assert v <= cycle_value(2, 4) + 1e-6
    assert v >= cycle_value(2, 4) - 1e-4


def test_seesaw_identity_game_saturates():
    inst = qt.to_bell_instance(shift_game(2, 2, "torus", 2, {}))
    v = qt.seesaw_lower_bound(inst, dim=2, restarts=1, iterations=8, seed=3)
    assert v <= 1 + 1e-9
    assert v >= 1 - 1e-6


def test_seesaw_monotone_history():
    inst = qt.to_bell_instance(torus_loops(2, 2, 3, kx=1))
    _, history = qt._seesaw_run(inst, 3, 6, np.random.default_rng(11))
    for earlier, later in zip(history, history[1:]):
        assert later >= earlier - 5e-7


def test_seesaw_deterministic_for_fixed_seed():
    inst = qt.to_bell_instance(chsh_game())
    a = qt.seesaw_search(inst, dim=2, restarts=3, iterations=6, seed=7)
    b = qt.seesaw_search(inst, dim=2, restarts=3, iterations=6, seed=7)
    assert a[0] == b[0]
    assert a[1].restart_values == b[1].restart_values


def test_seesaw_validation():
    inst = qt.to_bell_instance(chsh_game())
    with pytest.raises(ValueError):
        qt.seesaw_lower_bound(inst, dim=1)
    with pytest.raises(ValueError):
        qt.seesaw_lower_bound(inst, restarts=0)
    with pytest.raises(ValueError):
        qt.seesaw_lower_bound(inst, iterations=0)


def test_product_embedding_matches_classical_value():
    K = torus_loops(2, 4, 2, kx=1)
    res = cl.classical_value_decoder(K)
    inst = qt.to_bell_instance(K)
    v = qt.product_embedding_value(inst, res.optimal_assignment)
    assert v == pytest.approx(float(res.p_win), abs=1e-12)


def test_quantum_bounds_sandwich_d2():
    K = torus_loops(2, 4, 2, kx=1)
    res = cl.classical_value_decoder(K)
    qb = qt.quantum_bounds(K, restarts=3, iterations=10, seed=2,
                           floor_assignment=res.optimal_assignment)
    assert float(res.p_win) <= qb.q_lower + 1e-9
    assert qb.q_lower <= qb.q_upper + 1e-6
    assert qb.q_upper <= 1 + 1e-6
    assert qb.q_exact == pytest.approx(qb.q_upper, abs=1e-5)
    assert len(qb.diagnostics.restart_values) == 3


def test_quantum_bounds_sandwich_d3():
    K = torus_loops(2, 2, 3, kx=1, ky=1)
    res = cl.classical_value_decoder(K)
    qb = qt.quantum_bounds(K, restarts=3, iterations=10, seed=4,
                           floor_assignment=res.optimal_assignment)
    assert qb.q_exact is None
    assert float(res.p_win) <= qb.q_lower + 1e-9
    assert qb.q_lower <= qb.q_upper + 1e-6


def test_additivity_report_loops():
    vals = {}
    for key, (kx, ky) in {"x": (1, 0), "y": (0, 1), "xy": (1, 1)}.items():
        inst = qt.to_bell_instance(torus_loops(4, 4, 2, kx=kx, ky=ky))
        K = torus_loops(4, 4, 2, kx=kx, ky=ky)
        vals[key] = {
            "C": float(cl.classical_value_decoder(K).p_win),
            "Q": qt.xor_exact_value(inst),
        }
    rows = qt.additivity_report(vals)
    assert [r.quantity for r in rows] == ["C", "Q"]
    for row in rows:
        assert row.residual == pytest.approx(0.0, abs=1e-6)


def test_additivity_report_detects_nonadditive_values():
    vals = {
        "x": {"Q": 0.968750},
        "y": {"Q": 0.968750},
        "xy": {"Q": 0.937842},
    }
    rows = qt.additivity_report(vals)
    assert abs(rows[0].residual) > 1e-4


def test_additivity_report_missing_configuration():
    with pytest.raises(ValueError):
        qt.additivity_report({"x": {"C": 1.0}, "y": {"C": 1.0}})


def test_thread_count_env(monkeypatch):
    monkeypatch.delenv("NLGAME_THREADS", raising=False)
    assert qt.thread_count() == 1
    monkeypatch.setenv("NLGAME_THREADS", "4")
    assert qt.thread_count() == 4
    monkeypatch.setenv("NLGAME_THREADS", "zero")
    with pytest.raises(ValueError):
        qt.thread_count()


def test_seesaw_threaded_matches_sequential(monkeypatch):
    inst = qt.to_bell_instance(chsh_game())
    monkeypatch.setenv("NLGAME_THREADS", "1")
    seq = qt.seesaw_search(inst, dim=2, restarts=3, iterations=5, seed=9)
    monkeypatch.setenv("NLGAME_THREADS", "3")
    par = qt.seesaw_search(inst, dim=2, restarts=3, iterations=5, seed=9)
    assert seq[1].restart_values == par[1].restart_values
