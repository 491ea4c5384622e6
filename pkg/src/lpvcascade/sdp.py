"""Dense barrier solver for linear-objective semidefinite programs.

Problems arrive as a linear objective over block-diagonal linear matrix
inequalities,

    minimize    c' x
    subject to  F_j(x) = F_j0 + sum_k x_k F_jk  <=  0   for every block j,

which is exactly the shape produced by the controller-synthesis assembly: a
handful of symmetric blocks of modest order and at most a few hundred scalar
variables.  The implementation therefore favors robustness over asymptotic
cleverness:

* phase 1 minimizes an auxiliary slack tau with F_j(x) <= tau s_j I, where
  the per-block scales s_j normalize wildly different block magnitudes; the
  barrier's duality gap turns a positive lower bound on tau into an
  infeasibility certificate;
* phase 2 follows the central path of t c'x - sum_j log det(-F_j(x)) with a
  geometric schedule on t, damped Newton centering and a backtracking line
  search gated on Cholesky feasibility;
* the Newton system is solved through a Jacobi-equilibrated eigenvalue
  decomposition with clipping, so near-singular Hessians degrade gracefully
  instead of failing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

# Strictness shift applied by assemblers to turn strict inequalities into
# closed ones; re-exported here because feasibility margins quote it.
TOL_STRICT = 1e-7

_BARRIER_MU = 20.0       # geometric growth of the path parameter t
_ARMIJO_SLOPE = 0.25
_ALPHA_MIN = 1e-13
_CENTER_TOL = 1e-9       # stop centering when lambda^2 / 2 drops below this
_MAX_NEWTON_PER_T = 80


@dataclass
class LmiBlock:
    """One symmetric constraint block F0 + sum_k x_{var_idx[k]} coeff[k] <= 0."""

    name: str
    F0: np.ndarray        # (m, m)
    var_idx: np.ndarray   # (nv,) indices into the global variable vector
    coeff: np.ndarray     # (nv, m, m) symmetric coefficient matrices

    @property
    def order(self) -> int:
        return self.F0.shape[0]

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """F(x) for the global variable vector x."""
        xs = x[self.var_idx]
        return self.F0 + np.tensordot(xs, self.coeff, axes=(0, 0))


@dataclass
class SdpProblem:
    """Linear objective c'x over a list of LMI blocks."""

    c: np.ndarray
    blocks: list[LmiBlock]
    meta: dict = field(default_factory=dict)

    @property
    def n_vars(self) -> int:
        return self.c.shape[0]

    @property
    def total_order(self) -> int:
        return sum(b.order for b in self.blocks)


@dataclass
class BarrierResult:
    """Raw solver outcome on the flat variable vector."""

    x: np.ndarray
    status: str           # optimal | feasible | infeasible | max-iter
    objective: float
    gap: float            # final duality-gap bound m / t
    newton_steps: int
    message: str = ""


def block_margins(problem: SdpProblem, x: np.ndarray) -> dict[str, float]:
    """Feasibility margin -lambda_max(F_j(x)) per block; positive = satisfied."""
    out: dict[str, float] = {}
    for blk in problem.blocks:
        evals = np.linalg.eigvalsh(blk.evaluate(x))
        out[blk.name] = float(-evals[-1])
    return out


def _chol(S: np.ndarray) -> np.ndarray | None:
    try:
        return np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        return None


def _factor_blocks(blocks: list[LmiBlock], x: np.ndarray) -> list[np.ndarray] | None:
    """Cholesky factors of the slacks S_j = -F_j(x); None if any is not PD."""
    factors = []
    for blk in blocks:
        L = _chol(-blk.evaluate(x))
        if L is None:
            return None
        factors.append(L)
    return factors


def _barrier_value(factors: list[np.ndarray]) -> float:
    """phi(x) = -sum_j log det S_j from the Cholesky factors."""
    val = 0.0
    for L in factors:
        val -= 2.0 * float(np.sum(np.log(np.diag(L))))
    return val


def _grad_hess(
    blocks: list[LmiBlock], factors: list[np.ndarray], n_vars: int
) -> tuple[np.ndarray, np.ndarray]:
    """Gradient and Hessian of the barrier phi at the factored point.

    With G_k = L^-1 F_k L^-T per block: grad_k = tr(G_k) and
    H_kl = <G_k, G_l>_F, accumulated over blocks on the touched variables.
    """
    grad = np.zeros(n_vars)
    hess = np.zeros((n_vars, n_vars))
    for blk, L in zip(blocks, factors):
        nv, m, _ = blk.coeff.shape
        # X_k = L^-1 F_k for all k at once: stack the F_k side by side.
        stacked = blk.coeff.transpose(1, 0, 2).reshape(m, nv * m)
        X = scipy.linalg.solve_triangular(L, stacked, lower=True)
        X = X.reshape(m, nv, m).transpose(1, 0, 2)
        # G_k = X_k L^-T = (L^-1 X_k^T)^T.
        stacked = X.transpose(2, 0, 1).reshape(m, nv * m)
        G = scipy.linalg.solve_triangular(L, stacked, lower=True)
        G = G.reshape(m, nv, m).transpose(1, 2, 0)
        Gf = G.reshape(nv, m * m)
        g_blk = np.einsum("kii->k", G)
        H_blk = Gf @ Gf.T
        idx = blk.var_idx
        grad[idx] += g_blk
        hess[np.ix_(idx, idx)] += H_blk
    return grad, hess


def _newton_direction(
    hess: np.ndarray, grad: np.ndarray
) -> tuple[np.ndarray, float, bool]:
    """Direction d ~ -H^-1 g via equilibrated eigendecomposition with clipping.

    Returns (d, lambda^2, trusted) where lambda^2 = -g'd is the Newton
    decrement squared (nonnegative by construction of the clipped inverse).
    A near-singular Hessian still yields a usable descent direction, but the
    decrement estimate is then unreliable, so trusted is False and callers
    must not treat a small decrement as proof of centering.
    """
    diag = np.diag(hess).copy()
    diag[diag <= 0.0] = 1.0
    scale = 1.0 / np.sqrt(diag)
    Hs = hess * scale[:, None] * scale[None, :]
    w, V = np.linalg.eigh(Hs)
    w_floor = max(w[-1], 1.0) * 1e-14
    trusted = bool(w[0] > max(w[-1], 1.0) * 1e-12)
    w_inv = 1.0 / np.maximum(w, w_floor)
    gs = scale * grad
    d = -scale * (V @ (w_inv * (V.T @ gs)))
    lam2 = float(-grad @ d)
    return d, max(lam2, 0.0), trusted


def _center(
    blocks: list[LmiBlock],
    c_obj: np.ndarray,
    t: float,
    x: np.ndarray,
    budget: int,
    center_tol: float = _CENTER_TOL,
) -> tuple[np.ndarray, int, bool]:
    """Damped Newton minimization of t c'x + phi(x) from a feasible x.

    Returns (x, steps_used, converged).  The iterate stays strictly feasible:
    the line search only accepts points whose slacks factorize.
    """
    n_vars = x.shape[0]
    factors = _factor_blocks(blocks, x)
    if factors is None:
        return x, 0, False
    f_cur = t * float(c_obj @ x) + _barrier_value(factors)
    steps = 0
    while steps < budget:
        grad_phi, hess = _grad_hess(blocks, factors, n_vars)
        grad = t * c_obj + grad_phi
        d, lam2, trusted = _newton_direction(hess, grad)
        if lam2 / 2.0 <= center_tol:
            # Only a trusted decrement certifies centering; a clipped
            # Hessian can fake a small decrement far from the path.
            return x, steps, trusted
        alpha = 1.0
        slope = float(grad @ d)
        accepted = False
        while alpha >= _ALPHA_MIN:
            x_try = x + alpha * d
            factors_try = _factor_blocks(blocks, x_try)
            if factors_try is not None:
                f_try = t * float(c_obj @ x_try) + _barrier_value(factors_try)
                if f_try <= f_cur + _ARMIJO_SLOPE * alpha * slope:
                    x, factors, f_cur = x_try, factors_try, f_try
                    accepted = True
                    break
            alpha *= 0.5
        steps += 1
        if not accepted:
            # Line search stalled: no certified centering at this t.
            return x, steps, False
    return x, steps, False


def _phase1(
    problem: SdpProblem, max_newton: int, x0: np.ndarray | None = None
) -> tuple[np.ndarray | None, str, int]:
    """Find a strictly feasible x, or certify that none exists.

    Minimizes the normalized slack tau subject to F_j(x) <= tau s_j I with
    per-block scales s_j = max(1, lambda_max(F_j(x0))), so tau starts near 1
    regardless of how disparate the block magnitudes are.  Stops as soon as
    tau < 0 with a working margin, or when the duality-gap bound proves
    min tau > 0 (infeasible), or when the budget runs out.
    """
    n = problem.n_vars
    base = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()
    scales = []
    tau0 = 0.0
    for blk in problem.blocks:
        lmax = float(np.linalg.eigvalsh(blk.evaluate(base))[-1])
        s = max(1.0, lmax)
        scales.append(s)
        tau0 = max(tau0, lmax / s)
    tau0 += 0.5

    aug_blocks = []
    for blk, s in zip(problem.blocks, scales):
        aug_blocks.append(
            LmiBlock(
                name=blk.name,
                F0=blk.F0,
                var_idx=np.concatenate([blk.var_idx, [n]]),
                coeff=np.concatenate(
                    [blk.coeff, -s * np.eye(blk.order)[None, :, :]], axis=0
                ),
            )
        )
    c_aug = np.zeros(n + 1)
    c_aug[n] = 1.0
    m_total = problem.total_order

    x = np.concatenate([base, [tau0]])
    t = 1.0
    steps_total = 0
    stalls = 0
    tau_prev = math.inf
    best: np.ndarray | None = None
    best_tau = 0.0
    while steps_total < max_newton:
        budget = min(_MAX_NEWTON_PER_T, max_newton - steps_total)
        x, used, converged = _center(aug_blocks, c_aug, t, x, budget)
        steps_total += max(used, 1)
        tau = x[n]
        if tau < 0.0 and tau < best_tau:
            # Any tau < 0 point is strictly feasible: every block clears its
            # boundary by at least |tau| s_j.  Keep the deepest one, and keep
            # pushing toward the interior because a point that barely clears
            # the boundary makes a badly conditioned start for phase 2.
            best = x[:n].copy()
            best_tau = tau
            if tau <= -0.02:
                return best, "feasible", steps_total
        if converged:
            stalls = 0
            # The duality bound tau - m/t <= tau_min only holds at a centered
            # point, so an unconverged round certifies nothing.
            if best is None and tau - 1.01 * m_total / t > 0.0:
                return None, "infeasible", steps_total
            if best is not None and m_total / t <= 0.5 * (-tau):
                # Centered with the gap below half the attained slack: the
                # deepest possible margin is at most 1.5x the current one, so
                # further rounds cannot buy meaningful interior room.
                return best, "feasible", steps_total
            t *= _BARRIER_MU
        else:
            # Newton is out of floating-point headroom at this t; growing t
            # would only sharpen the already-failing subproblem.
            stalls += 1
            if stalls >= 2 and tau >= tau_prev - 1e-12:
                break
        tau_prev = tau
    if best is not None:
        return best, "feasible", steps_total
    return None, "max-iter", steps_total


def barrier_solve(
    problem: SdpProblem,
    tol: float = 1e-9,
    max_iter: int = 400,
    x0: np.ndarray | None = None,
) -> BarrierResult:
    """Solve the SDP; see the module docstring for the algorithm.

    tol is the relative duality-gap target; max_iter caps the total Newton
    steps of each phase.  An optional strictly feasible x0 skips phase 1.
    """
    c = np.asarray(problem.c, dtype=float)
    steps_total = 0

    if x0 is not None and _factor_blocks(problem.blocks, x0) is not None:
        x = np.asarray(x0, dtype=float).copy()
    else:
        x_feas, status, used = _phase1(problem, max_iter, x0)
        steps_total += used
        if x_feas is None:
            return BarrierResult(
                x=np.zeros(problem.n_vars),
                status=status,
                objective=math.nan,
                gap=math.inf,
                newton_steps=steps_total,
                message="phase 1 found no strictly feasible point"
                if status == "infeasible"
                else "phase 1 exhausted its Newton budget",
            )
        x = x_feas

    m_total = problem.total_order
    # Match the initial path parameter to the objective scale: starting with
    # t c'x ~ m keeps the barrier competitive with the objective term, so the
    # first subproblems stay well centered even when |c'x0| is huge.
    t = m_total / max(1.0, abs(float(c @ x)))
    steps_phase2 = 0
    stalls = 0
    while True:
        budget = min(_MAX_NEWTON_PER_T, max_iter - steps_phase2)
        if budget <= 0:
            return BarrierResult(
                x=x,
                status="feasible",
                objective=float(c @ x),
                gap=m_total / t,
                newton_steps=steps_total + steps_phase2,
                message="phase 2 exhausted its Newton budget",
            )
        x, used, converged = _center(problem.blocks, c, t, x, budget)
        steps_phase2 += max(used, 1)
        obj = float(c @ x)
        gap = m_total / t
        if gap <= tol * (1.0 + abs(obj)):
            return BarrierResult(
                x=x,
                status="optimal",
                objective=obj,
                gap=gap,
                newton_steps=steps_total + steps_phase2,
            )
        if converged:
            stalls = 0
            t *= _BARRIER_MU
        else:
            # Unconverged rounds count whether the line search quit early or
            # the round ground through its whole budget: both mean Newton has
            # hit its floating-point floor at this t.
            stalls += 1
            if stalls >= 2:
                return BarrierResult(
                    x=x,
                    status="feasible",
                    objective=obj,
                    gap=gap,
                    newton_steps=steps_total + steps_phase2,
                    message="centering stalled before reaching the gap target",
                )
