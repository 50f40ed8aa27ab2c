"""Semidefinite relaxation of cardinality-constrained subset scoring.

The indicator problem max x'Qx over |s| = P subsets is lifted to +/-1
coordinates with a homogenizing 0-th entry, giving max y'Qu y over sign
vectors with y_0 = +1 and sum(y_1..N) = 2P - N, and then relaxed to

    max tr(Qu Y)   s.t.  sum_{i,j>=1} Y_ij = (2P-N)^2,
                         sum_{i>=1}  Y_0i  = 2P-N,
                         diag(Y) = 1,   Y PSD.

The solver is a homogeneous self-dual embedding interior-point method
(NT scaling, Mehrotra predictor-corrector) with dense Schur systems —
adequate for desk-scale N (a few hundred at most). Gaussian rounding and
greedy size adjustment turn the relaxation back into index sets.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .criteria import QMatrix, SubsetOracle
from .errors import ConfigError, SolverError
from .search import SelectionResult, backward_elimination, forward_selection

RESIDUAL_KEYS = ("cardinality-squared", "linear-cardinality", "diagonal", "psd")


@dataclass(frozen=True)
class HomogenizedProblem:
    """The lifted (N+1)-dimensional objective plus its cardinality target."""

    qu: np.ndarray
    n: int
    p_target: int

    def __post_init__(self):
        qu = np.asarray(self.qu, dtype=float)
        object.__setattr__(self, "qu", qu)
        if qu.ndim != 2 or qu.shape != (self.n + 1, self.n + 1):
            raise ConfigError("homogenized matrix must be (N+1) x (N+1)")
        if np.abs(qu - qu.T).max(initial=0.0) > 1e-12:
            raise ConfigError("homogenized matrix must be symmetric")
        qu.setflags(write=False)

    @property
    def card(self) -> float:
        return float(2 * self.p_target - self.n)


def homogenize(q, p: int | None = None) -> HomogenizedProblem:
    """Lift Q to the +/-1 form: qu[0,0]=0, qu[0,1:] = e'Q, qu[1:,1:] = Q.

    For any sign vector y with y_0 = +1, y'Qu y = 4 x'Qx - 4c at
    x = (y_{1..N} + e)/2 and c = offset_constant(q).
    """
    if isinstance(q, QMatrix):
        arr = q.q
        if p is None:
            p = q.p_target
    else:
        arr = np.asarray(q, float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ConfigError("Q must be square")
        if p is None:
            raise ConfigError("target cardinality required for a bare matrix")
    n = arr.shape[0]
    qu = np.zeros((n + 1, n + 1))
    col = arr.sum(axis=0)
    qu[0, 1:] = col
    qu[1:, 0] = col
    qu[1:, 1:] = arr
    return HomogenizedProblem(qu, n, int(p))


def offset_constant(q) -> float:
    """c = (1/4) e'Qe, the affine shift between the two coordinate systems."""
    arr = q.q if isinstance(q, QMatrix) else np.asarray(q, float)
    return float(arr.sum()) / 4.0


def subset_from_signs(signs) -> tuple[int, ...]:
    """Indices whose sign matches the homogenizing entry (invariant to y -> -y)."""
    signs = np.asarray(signs)
    return tuple(i for i in range(signs.size - 1) if signs[i + 1] == signs[0])


@dataclass(frozen=True)
class SdpSolution:
    """Relaxation output: the PSD matrix plus convergence diagnostics.

    ``dual_bound`` is a rigorous upper bound on the relaxation value built
    from the dual iterate; ``certificate_slack`` bounds how far the reported
    objective may exceed it given the residual-level (not exact)
    feasibility of y_mat.
    """

    y_mat: np.ndarray
    objective: float
    residuals: dict
    iterations: int
    status: str
    dual_bound: float
    certificate_slack: float
    p_target: int
    n: int

    def to_json(self, include_matrix: bool = False) -> dict:
        out = {
            "objective": float(self.objective),
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "iterations": int(self.iterations),
            "status": self.status,
            "dual_bound": float(self.dual_bound),
            "certificate_slack": float(self.certificate_slack),
            "p_target": int(self.p_target),
            "n": int(self.n),
        }
        if include_matrix:
            out["y_mat"] = [[float(x) for x in row] for row in self.y_mat]
        return out


def feasibility_residuals(problem: HomogenizedProblem, y_mat) -> dict:
    """The four constraint residuals of a candidate matrix."""
    y = np.asarray(y_mat, float)
    card = problem.card
    return {
        "cardinality-squared": abs(float(y[1:, 1:].sum()) - card ** 2),
        "linear-cardinality": abs(float(y[0, 1:].sum()) - card),
        "diagonal": float(np.abs(np.diag(y) - 1.0).max()),
        "psd": max(0.0, -float(np.linalg.eigvalsh(y).min())),
    }


# ---------------------------------------------------------------------------
# interior-point engine


def _constraint_stack(n):
    d = n + 1
    a1 = np.zeros((d, d)); a1[1:, 1:] = 1.0
    a2 = np.zeros((d, d)); a2[0, 1:] = 0.5; a2[1:, 0] = 0.5
    mats = [a1, a2] + [np.diag((np.arange(d) == i).astype(float)) for i in range(d)]
    return np.stack([m.ravel() for m in mats])


def _psd_sqrt_pair(mat, floor=1e-14):
    w, v = np.linalg.eigh(mat)
    w = np.clip(w, floor, None)
    return (v * np.sqrt(w)) @ v.T, (v / np.sqrt(w)) @ v.T


def _max_step(mat_isq, dmat):
    lam = float(np.linalg.eigvalsh(mat_isq @ dmat @ mat_isq.T).min())
    if lam >= 0.0:
        return np.inf
    return -1.0 / lam


def _solve_hsd(qu, n, p, tol=1e-6, max_iter=200):
    d = n + 1
    card = float(2 * p - n)
    amat = _constraint_stack(n)
    b = np.array([card ** 2, card] + [1.0] * d)
    row_scale = np.linalg.norm(amat, axis=1)
    amat = amat / row_scale[:, None]
    b = b / row_scale
    m = len(b)

    def aop(mat):
        return amat @ mat.ravel()

    def atop(vec):
        return (vec @ amat).reshape(d, d)

    scale = max(np.linalg.norm(qu), 1e-12)
    qn = qu / scale
    cmat = -qn
    # after normalization ||qn|| is 1 (or 0 for Q = 0, where the gap is
    # identically 0 and any positive budget works)
    gap_budget = 0.9 * 2.0 * tol

    x_mat = np.eye(d)
    s_mat = np.eye(d)
    y_vec = np.zeros(m)
    tau = 1.0
    kap = 1.0

    status = "max_iter"
    it = 0
    best = None
    best_merit = np.inf
    for it in range(1, max_iter + 1):
        if not (np.isfinite(x_mat).all() and np.isfinite(y_vec).all()
                and np.isfinite(tau) and tau > 0):
            status = "numerical"
            break
        y_ext = x_mat / tau
        r_card = abs(y_ext[1:, 1:].sum() - card ** 2)
        r_lin = abs(y_ext[0, 1:].sum() - card)
        r_diag = np.abs(np.diag(y_ext) - 1.0).max()
        yv_ext = -y_vec / tau
        zmat = qn - atop(yv_ext)
        lam_max = float(np.linalg.eigvalsh(zmat).max())
        dual_cert = float(b @ yv_ext) + d * max(0.0, lam_max)
        pobj = float(np.sum(qn * y_ext))
        merit = max(r_card, r_lin, r_diag) / tol \
            + max(dual_cert - pobj, 0.0) / gap_budget
        if merit < best_merit:
            best_merit = merit
            best = (x_mat.copy(), y_vec.copy(), tau)
        if max(r_card, r_lin, r_diag) <= 0.3 * tol and dual_cert - pobj <= gap_budget:
            status = "converged"
            break

        rx = aop(x_mat) - b * tau
        ry = -atop(y_vec) + cmat * tau - s_mat
        rt = float(b @ y_vec) - float(np.sum(cmat * x_mat)) - kap
        mu = (float(np.sum(x_mat * s_mat)) + tau * kap) / (d + 1)

        s_sq, s_isq = _psd_sqrt_pair(s_mat)
        inner = s_sq @ x_mat @ s_sq
        in_sq, _ = _psd_sqrt_pair(inner)
        w_nt = s_isq @ in_sq @ s_isq
        w_nt = 0.5 * (w_nt + w_nt.T)
        sinv = s_isq @ s_isq
        _, x_isq = _psd_sqrt_pair(x_mat)

        mmat = np.empty((m, m))
        for k in range(m):
            ak = amat[k].reshape(d, d)
            mmat[k] = amat @ (w_nt @ ak @ w_nt).ravel()
        mmat = 0.5 * (mmat + mmat.T)
        jit = max(1e-15 * np.trace(mmat) / m, 1e-300)
        cho = None
        for _ in range(8):
            try:
                cho = np.linalg.cholesky(mmat + jit * np.eye(m))
                break
            except np.linalg.LinAlgError:
                jit *= 1e3
        if cho is None:
            status = "numerical"
            break

        def ssolve(r):
            sol = np.linalg.solve(cho.T, np.linalg.solve(cho, r))
            for _ in range(2):
                resid = r - mmat @ sol
                sol = sol + np.linalg.solve(cho.T, np.linalg.solve(cho, resid))
            return sol

        wcw = w_nt @ cmat @ w_nt
        g_vec = aop(wcw)
        h_cc = float(np.sum(wcw * cmat))
        v_vec = g_vec + b
        minv_v = ssolve(v_vec)

        def newton(sig):
            eta = -(1.0 - sig)
            comp = sig * mu * sinv - x_mat
            u_vec = eta * rx - aop(comp) - aop(w_nt @ (eta * ry) @ w_nt)
            minv_u = ssolve(u_vec)
            c0 = float(np.sum(cmat * comp))
            e0 = float(np.sum(wcw * (eta * ry)))
            rhs2 = eta * rt + c0 + e0 + (sig * mu - tau * kap) / tau
            den = float((b - g_vec) @ minv_v) + h_cc + kap / tau
            dtau = (rhs2 - float((b - g_vec) @ minv_u)) / den
            dy = minv_u + minv_v * dtau
            ds = -atop(dy) + cmat * dtau - eta * ry
            dx = comp - w_nt @ ds @ w_nt
            dx = 0.5 * (dx + dx.T)
            ds = 0.5 * (ds + ds.T)
            dkap = (sig * mu - tau * kap - kap * dtau) / tau
            return dx, dy, ds, dtau, dkap

        def max_alpha(dx, ds, dtau, dkap):
            a = min(_max_step(x_isq, dx), _max_step(s_isq, ds))
            if dtau < 0:
                a = min(a, -tau / dtau)
            if dkap < 0:
                a = min(a, -kap / dkap)
            return a

        dxa, dya, dsa, dta, dka = newton(0.0)
        a_aff = min(1.0, max_alpha(dxa, dsa, dta, dka))
        gap_aff = float(np.sum((x_mat + a_aff * dxa) * (s_mat + a_aff * dsa))) \
            + (tau + a_aff * dta) * (kap + a_aff * dka)
        sig = min(1.0, max(1e-8, (max(gap_aff, 0.0) / (mu * (d + 1))) ** 3))
        feas = max(np.abs(rx).max(), np.linalg.norm(ry), abs(rt))
        sig = max(sig, min(0.99, 0.2 * feas / (mu * (d + 1))))

        dx, dy, ds, dtau, dkap = newton(sig)
        frac = 0.9 + 0.09 * min(1.0, it / 10.0)
        a = min(1.0, frac * max_alpha(dx, ds, dtau, dkap))
        x_mat = x_mat + a * dx
        x_mat = 0.5 * (x_mat + x_mat.T)
        s_mat = s_mat + a * ds
        s_mat = 0.5 * (s_mat + s_mat.T)
        y_vec = y_vec + a * dy
        tau += a * dtau
        kap += a * dkap

    if status != "converged" and best is not None:
        x_mat, y_vec, tau = best
    y_ext = x_mat / tau

    def contract_res(y):
        rc = abs(y[1:, 1:].sum() - card ** 2)
        rl = abs(y[0, 1:].sum() - card)
        rd = np.abs(np.diag(y) - 1.0).max()
        rp = max(0.0, -float(np.linalg.eigvalsh(y).min()))
        return rc, rl, rd, rp

    # affine polish: project the extraction exactly onto the linear
    # constraints; the psd eigenvalue dip is bounded by the shift norm,
    # so keep the polished point only when the worst residual improves
    gram = amat @ amat.T
    try:
        corr = np.linalg.solve(gram, aop(y_ext) - b)
        y_pol = y_ext - (amat.T @ corr).reshape(d, d)
        y_pol = 0.5 * (y_pol + y_pol.T)
        if max(contract_res(y_pol)) < max(contract_res(y_ext)):
            y_ext = y_pol
    except np.linalg.LinAlgError:
        pass

    yv_ext = -y_vec / tau
    obj = float(np.sum(qu * y_ext))
    zmat = qn - atop(yv_ext)
    lam_max = float(np.linalg.eigvalsh(zmat).max())
    dual_cert = (float(b @ yv_ext) + d * max(0.0, lam_max)) * scale
    # a budget-exhausted run still counts as converged if the polished point
    # certifies BOTH feasibility and the duality gap — never residuals alone
    if status == "max_iter" and max(contract_res(y_ext)) <= tol \
            and dual_cert - obj <= gap_budget * scale:
        status = "converged"
    r_card, r_lin, r_diag, r_psd = contract_res(y_ext)
    # rigorous slack: obj(y_ext) <= dual_cert + cert_slack even though
    # y_ext is only residual-level feasible
    rvec = aop(y_ext) - b
    z_norm = float(np.abs(np.linalg.eigvalsh(zmat)).max())
    cert_slack = (abs(float(yv_ext @ rvec))
                  + max(0.0, lam_max) * (n + 1) * r_diag
                  + z_norm * (n + 1) * r_psd) * scale
    return y_ext, obj, it, status, (r_card, r_lin, r_diag, r_psd), \
        dual_cert, cert_slack


def solve_sdp(problem: HomogenizedProblem, tol: float = 1e-6,
              max_iter: int = 200) -> SdpSolution:
    """Solve the relaxation; non-convergence is a status, not an exception."""
    if tol <= 0:
        raise ConfigError("tol must be positive")
    if max_iter < 1:
        raise ConfigError("max_iter must be >= 1")
    n, p = problem.n, problem.p_target
    if not 2 <= p <= n - 1:
        raise ConfigError(
            f"SDP route needs 2 <= P <= N-1, got P={p}, N={n} "
            "(P = N is the trivial full set)")
    y_ext, obj, it, status, res, dual_cert, cert_slack = _solve_hsd(
        problem.qu, n, p, tol=tol, max_iter=max_iter)
    return SdpSolution(
        y_mat=y_ext,
        objective=obj,
        residuals=dict(zip(RESIDUAL_KEYS, (float(r) for r in res))),
        iterations=it,
        status="converged" if status == "converged" else "max-iter",
        dual_bound=float(dual_cert),
        certificate_slack=float(cert_slack),
        p_target=p,
        n=n,
    )


# ---------------------------------------------------------------------------
# rounding


def _gauss_factor(y_mat):
    w, v = np.linalg.eigh(0.5 * (y_mat + y_mat.T))
    thr = 1e-10 * max(float(w.max()), 0.0)
    w = np.where(w < thr, 0.0, w)
    return v * np.sqrt(w)


def randomized_round(sol: SdpSolution, seed) -> tuple[int, ...]:
    """One Gaussian rounding draw: u ~ N(0, Y), subset from sign agreement.

    Negative eigenvalues of Y (residual-level infeasibility) are clipped to
    zero in the factor; sign(0) := +1. Deterministic given ``seed``.
    """
    factor = _gauss_factor(sol.y_mat)
    rng = np.random.default_rng(seed)
    u = factor @ rng.standard_normal(factor.shape[0])
    signs = np.where(u >= 0.0, 1, -1)
    return subset_from_signs(signs)


def size_adjust(candidate, oracle: SubsetOracle, p: int, n: int | None = None,
                restrict: bool = True) -> tuple[int, ...]:
    """Resize a candidate subset to exactly p members, greedily.

    Oversized candidates shrink by backward elimination; undersized ones
    grow by forward selection seeded with the candidate (new members may
    come from outside it). ``restrict=False`` drops the candidate's role as
    the universe when shrinking and runs BE over all features instead.
    """
    if n is None:
        n = oracle.n
    cand = tuple(sorted({int(i) for i in candidate}))
    if p > n:
        raise ConfigError(f"target size {p} exceeds feature count {n}")
    if p < 1:
        raise ConfigError("target size must be >= 1")
    if cand and (cand[0] < 0 or cand[-1] >= n):
        raise ConfigError(f"candidate index out of range (n={n})")
    if len(cand) == p:
        return cand
    if len(cand) > p:
        pool = cand if restrict else None
        return backward_elimination(oracle, n, p, pool=pool).selected
    return forward_selection(oracle, n, p, start=cand).selected


def cobra(q, oracle: SubsetOracle, p: int, rounds: int = 100, seed: int = 0,
          tol: float = 1e-6, max_iter: int = 200, restrict: bool = True,
          on_nonconverge: str = "fail", threads: int | None = None) -> SelectionResult:
    """Solve-once / round-many subset search.

    One SDP solve, then ``rounds`` independent Gaussian roundings (each with
    its own spawned substream of ``seed``), each resized to exactly p and
    scored by ``oracle``; the best score wins, ties going to the
    lexicographically smaller subset. The trajectory rows are
    (p, round index, adjusted-subset score).
    """
    if rounds < 1:
        raise ConfigError("rounds must be >= 1")
    if on_nonconverge not in ("fail", "proceed"):
        raise ConfigError(f"unknown non-convergence policy {on_nonconverge!r}")
    problem = homogenize(q, p)
    n = problem.n
    if p < 2:
        raise ConfigError("cobra requires p >= 2")
    if p > n:
        raise ConfigError(f"target size {p} exceeds feature count {n}")
    if p == n:
        full = tuple(range(n))
        return SelectionResult(full, oracle(full), (), "cobra", seed)

    sol = solve_sdp(problem, tol=tol, max_iter=max_iter)
    if sol.status != "converged" and on_nonconverge == "fail":
        worst = max(sol.residuals.values())
        raise SolverError(
            f"SDP did not converge within {max_iter} iterations "
            f"(worst residual {worst:.2e}); rerun with a larger budget or "
            "on_nonconverge='proceed'")

    factor = _gauss_factor(sol.y_mat)
    d = factor.shape[0]
    streams = np.random.SeedSequence(seed).spawn(rounds)

    def one_round(r):
        rng = np.random.default_rng(streams[r])
        u = factor @ rng.standard_normal(d)
        signs = np.where(u >= 0.0, 1, -1)
        cand = subset_from_signs(signs)
        adjusted = size_adjust(cand, oracle, p, n, restrict=restrict)
        return adjusted, oracle(adjusted)

    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(one_round, range(rounds)))
    else:
        outcomes = [one_round(r) for r in range(rounds)]

    best_set, best_score = None, -np.inf
    traj = []
    for r, (subset, score) in enumerate(outcomes):
        traj.append((p, r, score))
        if score > best_score or (score == best_score and subset < best_set):
            best_set, best_score = subset, score
    return SelectionResult(best_set, float(best_score), tuple(traj), "cobra", seed)
