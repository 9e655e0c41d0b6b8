"""Dense semidefinite programming for the small problems quantum bounds
need: equality-constrained programs over one PSD block, plus optional
free and nonnegative scalar variables.

Solved by a primal-dual interior-point method (HKM direction with a
Mehrotra corrector). Everything is real symmetric and dense; problem
sizes here never exceed a ~100x100 block with a few hundred constraints,
so explicit factorizations beat any sparse machinery.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _sym(M: np.ndarray) -> np.ndarray:
    return (M + M.T) / 2


def _check_symmetric(M: np.ndarray, what: str) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{what} must be square")
    if not np.isfinite(M).all():
        raise ValueError(f"{what} must be finite")
    if not np.allclose(M, M.T, atol=1e-12):
        raise ValueError(f"{what} must be symmetric")
    return _sym(M)


@dataclass
class SdpProblem:
    """max/min <C, X> + free_cost.f + nonneg_cost.s subject to
    <A_i, X> + free_rows[i].f + nonneg_rows[i].s = b_i, X PSD, s >= 0."""

    n: int
    C: np.ndarray
    constraints: list[tuple[np.ndarray, float]]
    sense: str = "max"
    free_cost: np.ndarray | None = None
    free_rows: np.ndarray | None = None
    nonneg_cost: np.ndarray | None = None
    nonneg_rows: np.ndarray | None = None
    shift: float = 0.0

    def __post_init__(self) -> None:
        if self.sense not in ("max", "min"):
            raise ValueError("sense must be 'max' or 'min'")
        if self.n < 1:
            raise ValueError("block size must be positive")
        if not self.constraints:
            raise ValueError("constraint list must be nonempty")
        self.C = _check_symmetric(self.C, "objective")
        if self.C.shape[0] != self.n:
            raise ValueError("objective size mismatch")
        checked = []
        for i, (A, b) in enumerate(self.constraints):
            A = _check_symmetric(A, f"constraint {i}")
            if A.shape[0] != self.n or not np.isfinite(b):
                raise ValueError(f"constraint {i} malformed")
            checked.append((A, float(b)))
        self.constraints = checked

    @property
    def n_free(self) -> int:
        return 0 if self.free_cost is None else len(self.free_cost)

    @property
    def n_nonneg(self) -> int:
        return 0 if self.nonneg_cost is None else len(self.nonneg_cost)


@dataclass(frozen=True)
class SdpSolution:
    X: np.ndarray
    objective: float
    y: np.ndarray
    Z: np.ndarray
    status: str
    residuals: tuple[float, float, float]
    iterations: int
    s: np.ndarray = field(default_factory=lambda: np.zeros(0))
    f: np.ndarray = field(default_factory=lambda: np.zeros(0))


def _max_step(X: np.ndarray, dX: np.ndarray) -> float:
    """Largest a with X + a dX staying PSD, for X positive definite."""
    L = np.linalg.cholesky(X)
    W = np.linalg.solve(L, np.linalg.solve(L, dX).T)
    lam = np.linalg.eigvalsh(_sym(W)).min()
    return np.inf if lam >= -1e-14 else -1.0 / lam


def _max_step_diag(s: np.ndarray, ds: np.ndarray) -> float:
    neg = ds < 0
    return np.inf if not neg.any() else float((-s[neg] / ds[neg]).min())


def _solve_spd(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve with the SPD Schur matrix; singular systems (linearly
    dependent but consistent constraints) fall back to an escalating
    ridge, then least squares."""
    try:
        return np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        pass
    eps = 1e-12 * max(1.0, float(np.abs(M.diagonal()).max()))
    for _ in range(3):
        try:
            return np.linalg.solve(M + eps * np.eye(M.shape[0]), rhs)
        except np.linalg.LinAlgError:
            eps *= 1e3
    return np.linalg.lstsq(M, rhs, rcond=None)[0]


def solve(
    p: SdpProblem,
    tol_feas: float = 1e-8,
    tol_gap: float = 1e-8,
    tol_psd: float = 1e-9,
    max_iter: int = 100,
) -> SdpSolution:
    """Primal-dual interior-point solve; deterministic for fixed inputs."""
    n, m = p.n, len(p.constraints)
    flip = -1.0 if p.sense == "max" else 1.0
    C = flip * p.C
    A = np.stack([Ai for Ai, _ in p.constraints])
    b = np.array([bi for _, bi in p.constraints])
    kf, ks = p.n_free, p.n_nonneg
    F = np.zeros((m, kf)) if p.free_rows is None else np.asarray(p.free_rows, float)
    G = np.zeros((m, ks)) if p.nonneg_rows is None else np.asarray(p.nonneg_rows, float)
    cf = flip * (np.zeros(kf) if p.free_cost is None else np.asarray(p.free_cost, float))
    cs = flip * (np.zeros(ks) if p.nonneg_cost is None else np.asarray(p.nonneg_cost, float))
    if F.shape != (m, kf) or G.shape != (m, ks):
        raise ValueError("scalar coefficient shape mismatch")

    eta = max(1.0, float(np.abs(b).max()), float(np.abs(C).max() if C.size else 1.0))
    X = eta * np.eye(n)
    Z = eta * np.eye(n)
    y = np.zeros(m)
    f = np.zeros(kf)
    s = np.full(ks, eta)
    zs = np.full(ks, eta)

    bnorm, cnorm = 1.0 + np.linalg.norm(b), 1.0 + np.linalg.norm(C)
    status = "max_iter"
    it = 0
    for it in range(1, max_iter + 1):
        rp = b - np.einsum("mij,ij->m", A, X) - F @ f - G @ s
        RdX = C - Z - np.einsum("m,mij->ij", y, A)
        rds = cs - zs - G.T @ y
        rdf = cf - F.T @ y
        mu = (np.vdot(X, Z) + s @ zs) / (n + ks)
        pres = np.linalg.norm(rp) / bnorm
        dres = np.linalg.norm(RdX) / cnorm
        pobj = np.vdot(C, X) + cf @ f + cs @ s
        dobj = b @ y
        gap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        if pres <= tol_feas and dres <= tol_feas and gap <= tol_gap:
            status = "optimal"
            break
        if np.abs(y).max(initial=0.0) > 1e11 or mu > 1e13:
            status = "infeasible"
            break

        try:
            Zi = _sym(np.linalg.inv(Z))
        except np.linalg.LinAlgError:
            break
        # Schur complement: M[i,j] = tr(A_i Zi A_j X) plus scalar parts
        T = np.einsum("ij,mjk,kl->mil", Zi, A, X)
        M = np.einsum("mij,kij->mk", A, T)
        if ks:
            M = M + (G * (s / zs)) @ G.T
        M = _sym(M)

        def directions(sigmu: float, VX: np.ndarray, vs: np.ndarray):
            # VX, vs carry the corrector cross terms (zero on the predictor)
            EX = sigmu * Zi - X - _sym(Zi @ VX)
            es = (sigmu - vs) / zs - s
            rhs = (
                rp
                - np.einsum("mij,ij->m", A, EX - _sym(Zi @ RdX @ X))
                - G @ (es - (s / zs) * rds)
            )
            if kf:
                K = np.block([[M, F], [F.T, np.zeros((kf, kf))]])
                sol = _solve_spd(K, np.concatenate([rhs, rdf]))
                dy, df = sol[:m], sol[m:]
            else:
                dy = _solve_spd(M, rhs)
                df = np.zeros(0)
            dZ = RdX - np.einsum("m,mij->ij", dy, A)
            dzs = rds - G.T @ dy
            dX = _sym(EX - Zi @ dZ @ X)
            ds = es - (s / zs) * dzs
            return dX, dy, dZ, df, ds, dzs

        try:
            dXa, dya, dZa, dfa, dsa, dzsa = directions(0.0, np.zeros((n, n)), np.zeros(ks))
            kp = min(1.0, 0.99 * _max_step(X, dXa), 0.99 * _max_step_diag(s, dsa))
            kd = min(1.0, 0.99 * _max_step(Z, dZa), 0.99 * _max_step_diag(zs, dzsa))
            mu_aff = (
                np.vdot(X + kp * dXa, Z + kd * dZa) + (s + kp * dsa) @ (zs + kd * dzsa)
            ) / (n + ks)
            sigma = min(1.0, max(0.0, (mu_aff / mu)) ** 3)
            dX, dy, dZ, df, ds, dzs = directions(sigma * mu, dZa @ dXa, dsa * dzsa)
            gamma = 0.9 + 0.09 * min(1.0, kp, kd)
            ap = min(_max_step(X, dX), _max_step_diag(s, ds))
            ad = min(_max_step(Z, dZ), _max_step_diag(zs, dzs))
        except np.linalg.LinAlgError:
            status = "max_iter"
            break
        ap, ad = min(1.0, gamma * ap), min(1.0, gamma * ad)
        X = _sym(X + ap * dX)
        s = s + ap * ds
        y = y + ad * dy
        Z = _sym(Z + ad * dZ)
        zs = zs + ad * dzs
        f = f + ap * df

    obj = flip * (np.vdot(C, X) + cf @ f + cs @ s) + p.shift
    if status == "optimal" and np.linalg.eigvalsh(X).min() < -tol_psd:
        status = "max_iter"
    return SdpSolution(
        X=X,
        objective=float(obj),
        y=flip * y,
        Z=Z,
        status=status,
        residuals=(float(pres), float(dres), float(gap)),
        iterations=it,
        s=s,
        f=f,
    )


# ------------------------------------------------------------ POVM step


def max_povm_step(H: list[np.ndarray]) -> tuple[list[np.ndarray], float]:
    """Maximize sum_a <H_a, M_a> over POVMs (M_a >= 0, sum_a M_a = I).

    Solved as one block-diagonal PSD program: X = diag(M_0..M_{d-1}) with
    cross-block entries pinned to zero. The duals of the sum constraints
    form the matrix Y of the dual program min Tr Y s.t. Y >= H_a, and
    strong duality is asserted before returning."""
    d = len(H)
    if d == 0:
        raise ValueError("need at least one objective matrix")
    Hs = [_check_symmetric(H[a], f"H[{a}]") for a in range(d)]
    n = Hs[0].shape[0]
    if any(Ha.shape[0] != n for Ha in Hs):
        raise ValueError("objective matrices must share one size")
    N = n * d
    C = np.zeros((N, N))
    for a, Ha in enumerate(Hs):
        C[a * n : (a + 1) * n, a * n : (a + 1) * n] = Ha

    constraints: list[tuple[np.ndarray, float]] = []
    sum_index: dict[tuple[int, int], int] = {}
    for q in range(n):
        for r in range(q, n):
            Ai = np.zeros((N, N))
            w = 1.0 if q == r else 0.5
            for a in range(d):
                Ai[a * n + q, a * n + r] = w
                Ai[a * n + r, a * n + q] = w
            sum_index[(q, r)] = len(constraints)
            constraints.append((Ai, 1.0 if q == r else 0.0))
    for a in range(d):
        for c in range(a + 1, d):
            for q in range(n):
                for r in range(n):
                    Ai = np.zeros((N, N))
                    Ai[a * n + q, c * n + r] = 0.5
                    Ai[c * n + r, a * n + q] = 0.5
                    constraints.append((Ai, 0.0))

    sol = solve(SdpProblem(N, C, constraints, sense="max"))
    if sol.status != "optimal":
        raise RuntimeError(f"POVM step did not converge: {sol.status}")
    povm = [_sym(sol.X[a * n : (a + 1) * n, a * n : (a + 1) * n]) for a in range(d)]
    Y = np.zeros((n, n))
    for (q, r), i in sum_index.items():
        Y[q, r] = Y[r, q] = sol.y[i] if q == r else sol.y[i] / 2
    dual_val = float(np.trace(Y))
    assert abs(dual_val - sol.objective) <= 1e-6 * (1 + abs(dual_val)), (
        dual_val,
        sol.objective,
    )
    return povm, sol.objective
