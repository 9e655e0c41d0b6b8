"""Quantum values of bipartite lattice games: the exact two-outcome
correlation value, a level-1 moment-matrix upper bound for any outcome
count, and a see-saw variational lower bound.

All three run on the dense SDP core. Questions are the lattice vertices
split across the two-coloring, asked uniformly over edges; an edge with
permutation p is won when Bob answers p(Alice's answer).
"""

from __future__ import annotations

import concurrent.futures
import logging
import os
from dataclasses import dataclass

import numpy as np

from . import game as gm
from . import perm as pm
from . import sdpcore as sdp
from .game import Labeling
from .perm import Perm

logger = logging.getLogger(__name__)


def thread_count() -> int:
    """Worker count for independent restarts, from NLGAME_THREADS."""
    raw = os.environ.get("NLGAME_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"NLGAME_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


@dataclass(frozen=True)
class BellInstance:
    """Two-party view of an edge-labeled game.

    alice/bob hold the vertex ids asked to each party; every edge
    (x, y, p) asks Alice x and Bob y and is won when b = p(a). Each edge
    is drawn with probability 1/len(edges).
    """

    alice: tuple[int, ...]
    bob: tuple[int, ...]
    edges: tuple[tuple[int, int, Perm], ...]
    d: int

    def __post_init__(self) -> None:
        aset, bset = set(self.alice), set(self.bob)
        if aset & bset:
            raise ValueError("parties must not share questions")
        if not self.edges:
            raise ValueError("instance needs at least one edge")
        for x, y, p in self.edges:
            if x not in aset or y not in bset:
                raise ValueError("every edge must join the two parties")
            if p.degree != self.d:
                raise ValueError(f"edge permutation degree {p.degree} != d={self.d}")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def weight(self) -> float:
        return 1.0 / len(self.edges)


def to_bell_instance(K: Labeling) -> BellInstance:
    """Split a labeling across the (r+c) mod 2 vertex coloring.

    Edges stored with their tail on Bob's side are reversed, which
    inverts the permutation: b = p(a) iff a = p^-1(b).
    """
    parts = gm.bipartition(K.lat)
    if parts is None:
        raise ValueError("lattice is not bipartite (a wrapped direction has odd length)")
    alice, bob = parts
    aset = set(alice)
    edges = []
    for e in K.lat.edges:
        p = K.labels[e.id]
        if e.tail in aset:
            edges.append((e.tail, e.head, p))
        else:
            edges.append((e.head, e.tail, pm.inverse(p)))
    return BellInstance(tuple(alice), tuple(bob), tuple(edges), K.d)


def _unit_diag(n: int, i: int) -> np.ndarray:
    A = np.zeros((n, n))
    A[i, i] = 1.0
    return A


def xor_exact_value(inst: BellInstance) -> float:
    """Exact quantum winning probability of a two-outcome instance.

    Each edge contributes (1 + s_e u_x.v_y)/2 with s_e = +1 for the
    identity label and -1 for the swap, maximized over unit vectors.
    The Gram relaxation of the vectors is tight for this class, so the
    SDP optimum is the exact value.
    """
    if inst.d != 2:
        raise ValueError("exact correlation value requires d = 2")
    pos = {q: i for i, q in enumerate(inst.alice + inst.bob)}
    n = len(pos)
    E = inst.n_edges
    C = np.zeros((n, n))
    for x, y, p in inst.edges:
        s = 1.0 if p.is_identity() else -1.0
        C[pos[x], pos[y]] += s / (4 * E)
        C[pos[y], pos[x]] += s / (4 * E)
    cons = [(_unit_diag(n, i), 1.0) for i in range(n)]
    sol = sdp.solve(sdp.SdpProblem(n, C, cons, sense="max", shift=0.5))
    if sol.status != "optimal":
        raise RuntimeError(f"correlation program ended with status {sol.status}")
    return float(sol.objective)


def _prob_terms(
    qpos: dict[int, int], d: int, x: int, a: int, y: int, b: int
) -> tuple[float, dict[tuple[int, int], float]]:
    """p(ab|xy) as (constant, {(i, j): coeff}) over moment entries.

    Basis row 0 is the identity; question q keeps projectors for
    outcomes 0..d-2 at rows 1 + q(d-1) + a. The last outcome is the
    completeness substitution 1 - sum of the kept ones, so probabilities
    touching it expand into affine combinations.
    """
    terms: dict[tuple[int, int], float] = {}

    def add(i: int, j: int, c: float) -> None:
        key = (i, j) if i <= j else (j, i)
        terms[key] = terms.get(key, 0.0) + c

    xs = [1 + qpos[x] * (d - 1) + aa for aa in range(d - 1)]
    ys = [1 + qpos[y] * (d - 1) + bb for bb in range(d - 1)]
    const = 0.0
    if a < d - 1 and b < d - 1:
        add(xs[a], ys[b], 1.0)
    elif a == d - 1 and b < d - 1:
        add(0, ys[b], 1.0)
        for ia in xs:
            add(ia, ys[b], -1.0)
    elif a < d - 1 and b == d - 1:
        add(0, xs[a], 1.0)
        for ib in ys:
            add(xs[a], ib, -1.0)
    else:
        const = 1.0
        for ia in xs:
            add(0, ia, -1.0)
        for ib in ys:
            add(0, ib, -1.0)
        for ia in xs:
            for ib in ys:
                add(ia, ib, 1.0)
    return const, terms


def _terms_matrix(n: int, terms: dict[tuple[int, int], float]) -> np.ndarray:
    A = np.zeros((n, n))
    for (i, j), c in terms.items():
        if i == j:
            A[i, i] += c
        else:
            A[i, j] += c / 2
            A[j, i] += c / 2
    return A


def npa1_upper_bound(inst: BellInstance, cut_rounds: int = 0, cut_tol: float = 1e-8) -> float:
    """Level-1 moment-matrix upper bound on the quantum value.

    The moment matrix runs over the identity and d-1 projectors per
    question; eliminating the last outcome by substitution makes every
    completeness relation an exact identity of the matrix entries.
    Imposed rows: unit corner, projector idempotence against the
    identity row, and orthogonality of distinct outcomes of one
    question.

    cut_rounds > 0 additionally forces outcome-pair probabilities
    nonnegative, lazily: entries that come out negative are added as
    slack rows and the program re-solves. Every quantum strategy
    satisfies those cuts, so the result stays a valid upper bound, but
    for d >= 3 it can be strictly below the plain level-1 value; the
    default leaves them off, which is what the reference tables report.
    """
    d = inst.d
    questions = inst.alice + inst.bob
    qpos = {q: i for i, q in enumerate(questions)}
    n = 1 + len(questions) * (d - 1)
    w = inst.weight

    C = np.zeros((n, n))
    shift = 0.0
    for x, y, p in inst.edges:
        for a in range(d):
            const, terms = _prob_terms(qpos, d, x, a, y, p(a))
            shift += w * const
            for (i, j), c in terms.items():
                if i == j:
                    C[i, i] += w * c
                else:
                    C[i, j] += w * c / 2
                    C[j, i] += w * c / 2

    cons: list[tuple[np.ndarray, float]] = [(_unit_diag(n, 0), 1.0)]
    for q in range(len(questions)):
        idx = [1 + q * (d - 1) + a for a in range(d - 1)]
        for i in idx:
            A = np.zeros((n, n))
            A[i, i] = 1.0
            A[0, i] = A[i, 0] = -0.5
            cons.append((A, 0.0))
        for u in range(len(idx)):
            for v in range(u + 1, len(idx)):
                A = np.zeros((n, n))
                A[idx[u], idx[v]] = A[idx[v], idx[u]] = 0.5
                cons.append((A, 0.0))

    pool = [
        _prob_terms(qpos, d, x, a, y, b)
        for x, y, p in inst.edges
        for a in range(d)
        for b in range(d)
    ]
    cuts: list[int] = []
    active: set[int] = set()
    value = 0.0
    for round_no in range(cut_rounds + 1):
        if cuts:
            m = len(cons) + len(cuts)
            G = np.zeros((m, len(cuts)))
            cut_cons = []
            for t, ci in enumerate(cuts):
                const, terms = pool[ci]
                cut_cons.append((_terms_matrix(n, terms), -const))
                G[len(cons) + t, t] = -1.0
            prob = sdp.SdpProblem(
                n, C, cons + cut_cons, sense="max", shift=shift,
                nonneg_cost=np.zeros(len(cuts)), nonneg_rows=G,
            )
        else:
            prob = sdp.SdpProblem(n, C, cons, sense="max", shift=shift)
        sol = sdp.solve(prob)
        if sol.status != "optimal":
            raise RuntimeError(f"moment program ended with status {sol.status}")
        value = float(sol.objective)
        violated = []
        for ci, (const, terms) in enumerate(pool):
            if ci in active:
                continue
            val = const + sum(c * sol.X[i, j] for (i, j), c in terms.items())
            if val < -cut_tol:
                violated.append((val, ci))
        if not violated:
            break
        if round_no == cut_rounds:
            logger.info(
                "npa1: %d probability entries still negative after %d cut rounds",
                len(violated), cut_rounds,
            )
            break
        violated.sort()
        for _, ci in violated:
            cuts.append(ci)
            active.add(ci)
        logger.info("npa1: adding %d nonnegativity cuts (round %d)", len(violated), round_no + 1)
    return value


def _haar_basis(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * np.sign(np.diag(r))


def _random_povm(rng: np.random.Generator, dim: int, d: int) -> list[np.ndarray]:
    """Projective measurement from a random orthobasis, outcomes taking
    basis vectors round-robin (outcomes past dim get zero projectors)."""
    q = _haar_basis(rng, dim)
    ops = [np.zeros((dim, dim)) for _ in range(d)]
    for k in range(dim):
        ops[k % d] += np.outer(q[:, k], q[:, k])
    return ops


def _bell_operator(inst: BellInstance, alice_ops, bob_ops, dim: int) -> np.ndarray:
    S = np.zeros((dim * dim, dim * dim))
    for x, y, p in inst.edges:
        for a in range(inst.d):
            S += inst.weight * np.kron(alice_ops[x][a], bob_ops[y][p(a)])
    return S


def _seesaw_run(
    inst: BellInstance, dim: int, iterations: int, rng: np.random.Generator
) -> tuple[float, list[float]]:
    """One restart: alternate state, Alice, and Bob updates.

    Each update maximizes the winning probability with the other two
    blocks held fixed, so the recorded value sequence never decreases;
    that is asserted with a slack matching the SDP tolerance.
    """
    alice = {x: _random_povm(rng, dim, inst.d) for x in inst.alice}
    bob = {y: _random_povm(rng, dim, inst.d) for y in inst.bob}
    history: list[float] = []

    def record(v: float) -> None:
        assert not history or v >= history[-1] - 5e-7, "see-saw step decreased the value"
        history.append(v)

    for it in range(iterations):
        S = _bell_operator(inst, alice, bob, dim)
        vals, vecs = np.linalg.eigh(S)
        record(float(vals[-1]))
        W = vecs[:, -1].reshape(dim, dim)

        lifted = {y: [inst.weight * (W @ Nb @ W.T) for Nb in ops] for y, ops in bob.items()}
        ha = {x: [np.zeros((dim, dim)) for _ in range(inst.d)] for x in inst.alice}
        for x, y, p in inst.edges:
            for a in range(inst.d):
                ha[x][a] = ha[x][a] + lifted[y][p(a)]
        total = 0.0
        for x in inst.alice:
            ops, v = sdp.max_povm_step(ha[x])
            alice[x] = ops
            total += v
        record(total)

        lifted = {x: [inst.weight * (W.T @ Ma @ W) for Ma in ops] for x, ops in alice.items()}
        hb = {y: [np.zeros((dim, dim)) for _ in range(inst.d)] for y in inst.bob}
        for x, y, p in inst.edges:
            for a in range(inst.d):
                hb[y][p(a)] = hb[y][p(a)] + lifted[x][a]
        total = 0.0
        for y in inst.bob:
            ops, v = sdp.max_povm_step(hb[y])
            bob[y] = ops
            total += v
        record(total)

        if it > 0 and history[-1] - history[-4] < 1e-10:
            break
    return history[-1], history


@dataclass(frozen=True)
class SeesawDiagnostics:
    dim: int
    restarts: int
    iterations: int
    seed: int
    restart_values: tuple[float, ...]


def seesaw_search(
    inst: BellInstance,
    dim: int | None = None,
    restarts: int = 20,
    iterations: int = 20,
    seed: int = 0,
) -> tuple[float, SeesawDiagnostics]:
    """Best see-saw value over independent random restarts, with the
    per-restart values kept for diagnostics. Restart streams are spawned
    from one seed, so results are reproducible regardless of the worker
    count (NLGAME_THREADS)."""
    if dim is None:
        dim = inst.d
    if dim < 2:
        raise ValueError("local dimension must be at least 2")
    if restarts < 1 or iterations < 1:
        raise ValueError("restarts and iterations must be positive")
    streams = np.random.SeedSequence(seed).spawn(restarts)

    def run(stream: np.random.SeedSequence) -> float:
        return _seesaw_run(inst, dim, iterations, np.random.default_rng(stream))[0]

    workers = thread_count()
    if workers > 1 and restarts > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(run, streams))
    else:
        values = [run(stream) for stream in streams]
    for i, v in enumerate(values):
        logger.info("seesaw restart %d/%d: %.9f", i + 1, restarts, v)
    return max(values), SeesawDiagnostics(dim, restarts, iterations, seed, tuple(values))


def seesaw_lower_bound(
    inst: BellInstance,
    dim: int | None = None,
    restarts: int = 20,
    iterations: int = 20,
    seed: int = 0,
) -> float:
    """Lower bound on the quantum value by alternating maximization:
    state from the top Bell-operator eigenvector, then Alice's POVMs,
    then Bob's, each a separate exact program. Heuristic but always a
    valid bound; deterministic for a fixed seed."""
    return seesaw_search(inst, dim, restarts, iterations, seed)[0]


def product_embedding_value(inst: BellInstance, assignment) -> float:
    """Value of a deterministic strategy (one outcome per vertex) played
    as a product state: the fraction of satisfied edges."""
    hits = sum(1 for x, y, p in inst.edges if assignment[y] == p(assignment[x]))
    return hits / inst.n_edges


@dataclass(frozen=True)
class QuantumBounds:
    q_lower: float
    q_upper: float
    q_exact: float | None
    diagnostics: SeesawDiagnostics


def quantum_bounds(
    K: Labeling,
    dim: int | None = None,
    restarts: int = 20,
    iterations: int = 20,
    seed: int = 0,
    floor_assignment=None,
) -> QuantumBounds:
    """Upper and lower quantum bounds for one labeling; d = 2 also
    carries the exact correlation value. An optional deterministic
    assignment is scored as a product strategy and floors the lower
    bound, so a known classical optimum is never undercut."""
    inst = to_bell_instance(K)
    upper = npa1_upper_bound(inst)
    lower, diag = seesaw_search(inst, dim, restarts, iterations, seed)
    if floor_assignment is not None:
        lower = max(lower, product_embedding_value(inst, floor_assignment))
    exact = xor_exact_value(inst) if K.d == 2 else None
    if lower > upper + 1e-6:
        raise AssertionError(f"lower bound {lower} exceeds upper bound {upper}")
    return QuantumBounds(lower, upper, exact, diag)


@dataclass(frozen=True)
class AdditivityRow:
    quantity: str
    deficit_x: float
    deficit_y: float
    deficit_both: float
    residual: float


def additivity_report(results: dict[str, dict[str, float]]) -> list[AdditivityRow]:
    """Deficit accounting across the three loop configurations.

    results maps configuration keys "x", "y", "xy" to {quantity: value}.
    Each row reports the deficits 1 - value and the residual
    (1 - F(xy)) - (1 - F(x)) - (1 - F(y)); near zero means the two
    directions degrade the game independently.
    """
    missing = [k for k in ("x", "y", "xy") if k not in results]
    if missing:
        raise ValueError(f"missing configurations: {', '.join(missing)}")
    quantities = sorted(set(results["x"]) & set(results["y"]) & set(results["xy"]))
    rows = []
    for q in quantities:
        dx = 1.0 - results["x"][q]
        dy = 1.0 - results["y"][q]
        dboth = 1.0 - results["xy"][q]
        rows.append(AdditivityRow(q, dx, dy, dboth, dboth - dx - dy))
    return rows
