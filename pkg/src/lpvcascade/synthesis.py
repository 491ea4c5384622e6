"""State-feedback synthesis: vertex-wise LQR through linear matrix inequalities.

For vertex systems (A_i, B) the design searches for a single certificate
P > 0 and per-vertex variables W_i such that, with K_i = W_i P^-1, every
closed-loop vertex A_i + B K_i has its eigenvalues left of -decay.  The
inequalities are the H2-form of the LQR problem:

    A_i P + B W_i + (A_i P + B W_i)' + 2 decay P + I  <=  0      (decay rate)
    [ -Y          R^1/2 W_i ]
    [ W_i' R^1/2  -P        ]                         <=  0      (input energy)
    P >= 0,   Y >= tol I
    tr(Q^1/2 P Q^1/2) + tr(Y)  ->  minimize

The unit driving term I in the decay block pins the scale of P, which makes
the trace objective the familiar quadratic-regulator cost: on a single
vertex with decay 0 the minimizer reproduces the algebraic-Riccati gain.
Strict inequalities are closed with the shift tol = 1e-7, so any returned
solution satisfies the raw inequalities with margin >= tol.

A tuning may also set pole_cap, which adds the mirrored strip inequality

    -(A_i P + B W_i + (A_i P + B W_i)')  <=  2 pole_cap P

confining every closed-loop vertex eigenvalue to the vertical strip
-pole_cap < Re < -decay.  Without the cap the program is free to place
poles hundreds of rad/s deep; such gains certify in continuous time yet
destabilize the sampled loop the moment they are held over a finite step,
so any design meant to run in the simulator should cap its poles well
under the loop rate.

The trace target gamma_bound of a tuning is not imposed on the program (the
shifted strict blocks make very small targets unattainable); it is compared
against the achieved trace and reported.  An explicit trace cap can be
imposed instead, e.g. to re-solve within a factor of a known optimum.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy.linalg

from .lpv import LpvConfig, SchedulingBounds, enumerate_vertices
from .sdp import TOL_STRICT, BarrierResult, LmiBlock, SdpProblem, barrier_solve

# Loose default trace cap: far above any sane tuning's cost, yet finite so the
# program stays bounded even for degenerate weight choices.
TRACE_CAP_AUTO = 1e9

_COND_LIMIT = 1e12


class SynthesisError(RuntimeError):
    """Synthesis failed: infeasible, out of budget, or numerically unusable."""

    def __init__(self, message: str, status: str = "error"):
        super().__init__(message)
        self.status = status


@dataclass(frozen=True)
class SynthesisConfig:
    """Weights and solver settings of one loop's gain design."""

    Q: tuple[float, ...]        # diagonal state weights
    R: tuple[float, ...]        # diagonal input weights
    gamma_bound: float          # trace target, reported against the achieved cost
    decay: float                # closed-loop real-part margin [1/s]
    pole_cap: float | None = None  # strip depth bound on vertex poles [1/s]
    tol: float = 1e-8           # relative duality-gap target of the solver
    max_iter: int = 600         # Newton-step budget per solver phase

    def __post_init__(self) -> None:
        if any(q < 0.0 for q in self.Q):
            raise ValueError("state weights must be nonnegative")
        if any(r <= 0.0 for r in self.R):
            raise ValueError("input weights must be strictly positive")
        if not self.gamma_bound > 0.0:
            raise ValueError("gamma_bound must be strictly positive")
        if not self.decay >= 0.0:
            raise ValueError("decay must be nonnegative")
        if self.pole_cap is not None and not self.pole_cap > self.decay:
            raise ValueError("pole_cap must exceed decay (the strip must be nonempty)")
        if not 0.0 < self.tol < 1.0:
            raise ValueError("tol must lie in (0, 1)")
        if self.max_iter < 10:
            raise ValueError("max_iter is too small to be useful")


def dynamic_synthesis_config() -> SynthesisConfig:
    """Certification weights of the dynamic loop over its full envelope.

    Heavy steering and yaw-integral weights with near-free inputs: the
    resulting design certifies decay 3 over the whole scheduling box, but
    its poles reach several hundred rad/s, far past what a 100 Hz loop can
    hold.  Use dynamic_runtime_config / dynamic_runtime_bounds for gains
    meant to drive the simulator.
    """
    return SynthesisConfig(
        Q=(0.01, 0.01, 0.01, 0.01, 100000.0, 90000.0),
        R=(0.01, 10.0),
        gamma_bound=0.001,
        decay=3.0,
    )


def dynamic_runtime_config() -> SynthesisConfig:
    """Simulation weights of the dynamic loop.

    Stiff input weights keep the gains smooth and the pole cap confines the
    vertex poles to [-60, -3] 1/s, so the design stays stable under the
    10 ms zero-order hold (spectral radius of the held vertex loops < 1
    with margin).  Pair with dynamic_runtime_bounds: quadratic (common-P)
    stabilization over the full envelope is not attainable at gains a
    100 Hz loop can realize, while this operational box admits it.
    """
    return SynthesisConfig(
        Q=(0.5, 1.0, 2.0, 0.001, 0.001, 5.0),
        R=(1.0, 10000.0),
        gamma_bound=0.001,
        decay=3.0,
        pole_cap=60.0,
    )


def kinematic_synthesis_config() -> SynthesisConfig:
    """Certification weights of the kinematic loop.

    The heading-rate weight is set for the 10 Hz outer rate: continuous-time
    designs with a near-free omega channel come out far too hot to survive a
    0.1 s hold (spectral radius >> 1), so R_omega buys discrete stability at
    the cost of a slower certified decay.
    """
    return SynthesisConfig(
        Q=(3.0, 2.0, 20.0),
        R=(0.5, 8.0),
        gamma_bound=0.01,
        decay=0.5,
    )


def kinematic_runtime_config() -> SynthesisConfig:
    """Simulation weights of the kinematic loop.

    Slower than the certification tuning on purpose: in the two-rate cascade
    the outer loop must stay well inside the inner loop's bandwidth, and the
    runtime dynamic design tops out near 3 rad/s.  With these weights the
    per-cycle linearization of the full cascade keeps spectral radius < 0.95
    across the operating envelope; at the certification weights it exceeds 1
    above roughly 6 m/s.
    """
    return SynthesisConfig(
        Q=(0.75, 0.5, 5.0),
        R=(2.0, 32.0),
        gamma_bound=0.01,
        decay=0.25,
    )


class VarLayout:
    """Packing of (P, Y, W_1..W_N) into the flat solver vector.

    Order: upper triangle of P row-major, upper triangle of Y row-major, then
    the W_i row-major, vertex by vertex.
    """

    def __init__(self, n: int, m: int, n_vertices: int):
        self.n = n
        self.m = m
        self.n_vertices = n_vertices
        self.p_pairs = [(i, j) for i in range(n) for j in range(i, n)]
        self.y_pairs = [(i, j) for i in range(m) for j in range(i, m)]
        self.n_p = len(self.p_pairs)
        self.n_y = len(self.y_pairs)
        self.n_w = m * n
        self.n_vars = self.n_p + self.n_y + n_vertices * self.n_w

    def p_index(self, pair_pos: int) -> int:
        return pair_pos

    def y_index(self, pair_pos: int) -> int:
        return self.n_p + pair_pos

    def w_index(self, vertex: int, a: int, b: int) -> int:
        return self.n_p + self.n_y + vertex * self.n_w + a * self.n + b

    def unpack(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        P = np.zeros((self.n, self.n))
        for pos, (i, j) in enumerate(self.p_pairs):
            P[i, j] = P[j, i] = x[pos]
        Y = np.zeros((self.m, self.m))
        for pos, (i, j) in enumerate(self.y_pairs):
            Y[i, j] = Y[j, i] = x[self.n_p + pos]
        W = x[self.n_p + self.n_y:].reshape(self.n_vertices, self.m, self.n).copy()
        return P, Y, W


def _sym_basis(n: int, i: int, j: int) -> np.ndarray:
    E = np.zeros((n, n))
    E[i, j] = 1.0
    E[j, i] = 1.0
    return E


def assemble_lqr_lmi(
    A_list: list[np.ndarray],
    B: np.ndarray,
    cfg: SynthesisConfig,
    trace_cap: float | None = None,
) -> SdpProblem:
    """Build the SDP of the module docstring for the given vertex systems.

    trace_cap bounds tr(Q^1/2 P Q^1/2) + tr(Y); None applies the loose
    default cap.  The variable layout is stored in problem.meta["layout"].
    """
    B = np.asarray(B, dtype=float)
    n, m = B.shape
    if len(cfg.Q) != n:
        raise ValueError(f"expected {n} state weights, got {len(cfg.Q)}")
    if len(cfg.R) != m:
        raise ValueError(f"expected {m} input weights, got {len(cfg.R)}")
    A_list = [np.asarray(A, dtype=float) for A in A_list]
    for A in A_list:
        if A.shape != (n, n):
            raise ValueError("vertex A matrices must match B's state dimension")
    if trace_cap is None:
        trace_cap = TRACE_CAP_AUTO
    if not trace_cap > 0.0:
        raise ValueError("trace_cap must be strictly positive")

    N = len(A_list)
    layout = VarLayout(n, m, N)
    q = np.asarray(cfg.Q, dtype=float)
    r_half = np.sqrt(np.asarray(cfg.R, dtype=float))

    c = np.zeros(layout.n_vars)
    for pos, (i, j) in enumerate(layout.p_pairs):
        if i == j:
            c[layout.p_index(pos)] = q[i]
    for pos, (i, j) in enumerate(layout.y_pairs):
        if i == j:
            c[layout.y_index(pos)] = 1.0

    blocks: list[LmiBlock] = []

    for v_idx, A in enumerate(A_list):
        var_ids = []
        coeffs = []
        for pos, (i, j) in enumerate(layout.p_pairs):
            E = _sym_basis(n, i, j)
            var_ids.append(layout.p_index(pos))
            coeffs.append(A @ E + E @ A.T + 2.0 * cfg.decay * E)
        for a in range(m):
            for b in range(n):
                BW = np.zeros((n, n))
                BW[:, b] = B[:, a]
                var_ids.append(layout.w_index(v_idx, a, b))
                coeffs.append(BW + BW.T)
        blocks.append(
            LmiBlock(
                name=f"decay[{v_idx}]",
                F0=(1.0 + TOL_STRICT) * np.eye(n),
                var_idx=np.array(var_ids, dtype=int),
                coeff=np.array(coeffs),
            )
        )
        if cfg.pole_cap is not None:
            # Mirrored strip side, scale-free in P like the P-psd block: the
            # whole matrix is homogeneous of degree one in the variables.
            var_ids = []
            coeffs = []
            for pos, (i, j) in enumerate(layout.p_pairs):
                E = _sym_basis(n, i, j)
                var_ids.append(layout.p_index(pos))
                coeffs.append(-(A @ E + E @ A.T) - 2.0 * cfg.pole_cap * E)
            for a in range(m):
                for b in range(n):
                    BW = np.zeros((n, n))
                    BW[:, b] = B[:, a]
                    var_ids.append(layout.w_index(v_idx, a, b))
                    coeffs.append(-(BW + BW.T))
            blocks.append(
                LmiBlock(
                    name=f"strip[{v_idx}]",
                    F0=np.zeros((n, n)),
                    var_idx=np.array(var_ids, dtype=int),
                    coeff=np.array(coeffs),
                )
            )

    for v_idx in range(N):
        var_ids = []
        coeffs = []
        for pos, (i, j) in enumerate(layout.y_pairs):
            E = np.zeros((m + n, m + n))
            E[:m, :m] = -_sym_basis(m, i, j)
            var_ids.append(layout.y_index(pos))
            coeffs.append(E)
        for pos, (i, j) in enumerate(layout.p_pairs):
            E = np.zeros((m + n, m + n))
            E[m:, m:] = -_sym_basis(n, i, j)
            var_ids.append(layout.p_index(pos))
            coeffs.append(E)
        for a in range(m):
            for b in range(n):
                E = np.zeros((m + n, m + n))
                E[a, m + b] = r_half[a]
                E[m + b, a] = r_half[a]
                var_ids.append(layout.w_index(v_idx, a, b))
                coeffs.append(E)
        blocks.append(
            LmiBlock(
                name=f"energy[{v_idx}]",
                F0=TOL_STRICT * np.eye(m + n),
                var_idx=np.array(var_ids, dtype=int),
                coeff=np.array(coeffs),
            )
        )

    var_ids = []
    coeffs = []
    for pos, (i, j) in enumerate(layout.p_pairs):
        var_ids.append(layout.p_index(pos))
        coeffs.append(-_sym_basis(n, i, j))
    blocks.append(
        LmiBlock(
            name="P-psd",
            F0=np.zeros((n, n)),
            var_idx=np.array(var_ids, dtype=int),
            coeff=np.array(coeffs),
        )
    )

    var_ids = []
    coeffs = []
    for pos, (i, j) in enumerate(layout.y_pairs):
        var_ids.append(layout.y_index(pos))
        coeffs.append(-_sym_basis(m, i, j))
    blocks.append(
        LmiBlock(
            name="Y-pd",
            F0=TOL_STRICT * np.eye(m),
            var_idx=np.array(var_ids, dtype=int),
            coeff=np.array(coeffs),
        )
    )

    var_ids = []
    coeffs = []
    for pos, (i, j) in enumerate(layout.p_pairs):
        if i == j:
            var_ids.append(layout.p_index(pos))
            coeffs.append(np.array([[q[i]]]))
    for pos, (i, j) in enumerate(layout.y_pairs):
        if i == j:
            var_ids.append(layout.y_index(pos))
            coeffs.append(np.array([[1.0]]))
    blocks.append(
        LmiBlock(
            name="trace",
            F0=np.array([[TOL_STRICT - trace_cap]]),
            var_idx=np.array(var_ids, dtype=int),
            coeff=np.array(coeffs),
        )
    )

    return SdpProblem(
        c=c,
        blocks=blocks,
        meta={
            "layout": layout,
            "trace_cap": trace_cap,
            "decay": cfg.decay,
            "vertex_A": A_list,
            "input_B": B,
        },
    )


@dataclass
class SdpSolution:
    """Unpacked synthesis variables plus solver diagnostics."""

    status: str                 # optimal | feasible | infeasible | max-iter
    P: np.ndarray | None
    Y: np.ndarray | None
    W: np.ndarray | None        # (N, m, n)
    objective: float
    gap: float
    newton_steps: int
    message: str = ""


def _equilibration_scale(
    A_list: list[np.ndarray], B: np.ndarray, cfg: SynthesisConfig
) -> np.ndarray | None:
    """Diagonal state rescaling estimated from per-vertex Riccati solutions.

    The square roots of the vertex-wise maxima of diag(X_are) for the
    decay-shifted pairs (A_i + decay I, B) give the natural per-state units
    of the synthesis variables.  None when any Riccati solve fails (then the
    problem is solved in its original coordinates) or when the spread is too
    small to matter.
    """
    n = B.shape[0]
    Q = np.diag(np.asarray(cfg.Q, dtype=float))
    R = np.diag(np.asarray(cfg.R, dtype=float))
    shift = cfg.decay * np.eye(n)
    diags = []
    try:
        for A in A_list:
            X = scipy.linalg.solve_continuous_are(A + shift, B, Q, R)
            diags.append(np.diag(X))
    except Exception:
        return None
    d = np.sqrt(np.maximum(np.max(diags, axis=0), 0.0))
    if not np.all(np.isfinite(d)) or not d.max() > 0.0:
        return None
    # Cap the conditioning of the rescaling itself.
    d = np.clip(d, d.max() * 1e-6, None)
    if d.max() / d.min() < 10.0:
        return None
    return d


def _scaled_problem(
    problem: SdpProblem, cfg: SynthesisConfig, d: np.ndarray
) -> SdpProblem:
    """Exact congruence image of the assembled program under x -> D^-1 x.

    With D = diag(d): A -> D^-1 A D, B -> D^-1 B, Q -> D Q D, while P maps to
    D^-1 P D^-1 and W to W D^-1.  The strictness shifts ride along as D^-2
    terms so the scaled program is the original one in new variables; the
    objective and the trace constraint are invariant.
    """
    A_list = problem.meta["vertex_A"]
    B = problem.meta["input_B"]
    m = B.shape[1]
    A_s = [(A / d[:, None]) * d[None, :] for A in A_list]
    B_s = B / d[:, None]
    cfg_s = replace(cfg, Q=tuple(float(qi * di * di) for qi, di in zip(cfg.Q, d)))
    scaled = assemble_lqr_lmi(A_s, B_s, cfg_s, trace_cap=problem.meta["trace_cap"])
    dinv2 = 1.0 / (d * d)
    # Strictness rides the congruence as tol*D^-2, floored at 1e-10 so it
    # stays above the solver's rounding noise in the coordinates it actually
    # works in.  Mapped back this is tol*max(I, 1e-3 D^2): never below the
    # nominal tol*I, so the solved program is (slightly) conservative.
    strict = np.maximum(TOL_STRICT * dinv2, 1e-10)
    for blk in scaled.blocks:
        if blk.name.startswith("decay"):
            blk.F0 = np.diag(dinv2 + strict)
        elif blk.name.startswith("energy"):
            blk.F0 = np.diag(np.concatenate([TOL_STRICT * np.ones(m), strict]))
    return scaled


def _variable_scale(layout: VarLayout, d: np.ndarray) -> np.ndarray:
    """Per-variable factors mapping scaled solutions back: x = s * x_scaled."""
    s = np.ones(layout.n_vars)
    for pos, (i, j) in enumerate(layout.p_pairs):
        s[layout.p_index(pos)] = d[i] * d[j]
    for v_idx in range(layout.n_vertices):
        for a in range(layout.m):
            for b in range(layout.n):
                s[layout.w_index(v_idx, a, b)] = d[b]
    return s


def solve_sdp(problem: SdpProblem, cfg: SynthesisConfig) -> SdpSolution:
    """Run the barrier solver and unpack the synthesis variables.

    The solve happens in equilibrated state coordinates when per-vertex
    Riccati solutions are available to estimate them; the mapping back is an
    exact congruence, so statuses, margins, and the objective refer to the
    original problem either way.
    """
    A_list = problem.meta.get("vertex_A")
    d = _equilibration_scale(A_list, problem.meta["input_B"], cfg) \
        if A_list is not None else None
    if d is not None:
        scaled = _scaled_problem(problem, cfg, d)
        res: BarrierResult = barrier_solve(scaled, tol=cfg.tol, max_iter=cfg.max_iter)
        if res.status not in ("infeasible", "max-iter"):
            res.x = res.x * _variable_scale(problem.meta["layout"], d)
            res.objective = float(problem.c @ res.x)
    else:
        res = barrier_solve(problem, tol=cfg.tol, max_iter=cfg.max_iter)
    if res.status in ("infeasible", "max-iter"):
        return SdpSolution(
            status=res.status,
            P=None,
            Y=None,
            W=None,
            objective=res.objective,
            gap=res.gap,
            newton_steps=res.newton_steps,
            message=res.message,
        )
    layout: VarLayout = problem.meta["layout"]
    P, Y, W = layout.unpack(res.x)
    return SdpSolution(
        status=res.status,
        P=P,
        Y=Y,
        W=W,
        objective=res.objective,
        gap=res.gap,
        newton_steps=res.newton_steps,
        message=res.message,
    )


def extract_vertex_gains(sol: SdpSolution) -> np.ndarray:
    """Vertex gains K_i = W_i P^-1 from a solved program, shape (N, m, n).

    The inverse is taken through a Jacobi scaling P = D Pn D with
    D = diag(sqrt(diag P)): state units legitimately differ by orders of
    magnitude, so the singularity test belongs on the correlation-like core
    Pn, not on the raw certificate.
    """
    if sol.P is None or sol.W is None:
        raise SynthesisError(
            f"no gains available from a '{sol.status}' solve: {sol.message}",
            status=sol.status,
        )
    dp = np.diag(sol.P)
    if not np.all(dp > 0.0):
        raise SynthesisError("certificate P is numerically singular", status="singular")
    dp = np.sqrt(dp)
    Pn = sol.P / dp[:, None] / dp[None, :]
    if np.linalg.cond(Pn) > _COND_LIMIT:
        raise SynthesisError("certificate P is numerically singular", status="singular")
    gains = np.stack(
        [np.linalg.solve(Pn, (Wi / dp[None, :]).T).T / dp[None, :] for Wi in sol.W]
    )
    if not np.all(np.isfinite(gains)):
        raise SynthesisError("extracted gains are not finite", status="singular")
    return gains


def riccati_gain(A: np.ndarray, B: np.ndarray, Q: np.ndarray, R: np.ndarray) -> np.ndarray:
    """LQR gain K (for u = K x) from the algebraic Riccati equation.

    Entirely independent of the LMI route; used as a cross-check oracle.
    """
    P = scipy.linalg.solve_continuous_are(A, B, Q, R)
    return -np.linalg.solve(R, B.T @ P)


@dataclass
class SynthesisValidation:
    """Certificate check of a finished design, on the raw inequalities."""

    margins: dict[str, float]      # -lambda_max per inequality; positive = holds
    min_margin: float
    max_real_part: float           # slowest closed-loop vertex eigenvalue
    decay: float
    trace_value: float             # tr(Q^1/2 P Q^1/2) + tr(Y)
    gamma_bound: float
    gamma_met: bool
    ok: bool


def validate_synthesis(
    A_list: list[np.ndarray],
    B: np.ndarray,
    cfg: SynthesisConfig,
    sol: SdpSolution,
    gains: np.ndarray,
    margin_floor: float = 1e-8,
    eig_slack: float = 1e-6,
) -> SynthesisValidation:
    """Re-evaluate the design inequalities directly from (P, Y, W).

    This does not reuse the solver's constraint data: the blocks are rebuilt
    from the matrices, so assembly and certification stay independent.
    """
    if sol.P is None or sol.Y is None or sol.W is None:
        raise SynthesisError("cannot validate an unsolved program", status=sol.status)
    P, Y, W = sol.P, sol.Y, sol.W
    n, m = B.shape
    q_half = np.sqrt(np.asarray(cfg.Q, dtype=float))
    r_half = np.diag(np.sqrt(np.asarray(cfg.R, dtype=float)))

    margins: dict[str, float] = {}
    for idx, (A, Wi) in enumerate(zip(A_list, W)):
        L = A @ P + B @ Wi
        L = L + L.T + 2.0 * cfg.decay * P + np.eye(n)
        margins[f"decay[{idx}]"] = float(-np.linalg.eigvalsh(L)[-1])
        if cfg.pole_cap is not None:
            G = A @ P + B @ Wi
            G = -(G + G.T) - 2.0 * cfg.pole_cap * P
            margins[f"strip[{idx}]"] = float(-np.linalg.eigvalsh(G)[-1])
        S = np.zeros((m + n, m + n))
        S[:m, :m] = -Y
        S[m:, m:] = -P
        S[:m, m:] = r_half @ Wi
        S[m:, :m] = S[:m, m:].T
        margins[f"energy[{idx}]"] = float(-np.linalg.eigvalsh(S)[-1])
    margins["P-psd"] = float(np.linalg.eigvalsh(P)[0])
    margins["Y-pd"] = float(np.linalg.eigvalsh(Y)[0])

    max_re = -math.inf
    for A, K in zip(A_list, gains):
        ev = np.linalg.eigvals(A + B @ K)
        max_re = max(max_re, float(np.max(ev.real)))

    trace_value = float(np.sum(q_half * q_half * np.diag(P)) + np.trace(Y))
    min_margin = min(margins.values())
    ok = min_margin >= margin_floor and max_re < -cfg.decay + eig_slack
    return SynthesisValidation(
        margins=margins,
        min_margin=min_margin,
        max_real_part=max_re,
        decay=cfg.decay,
        trace_value=trace_value,
        gamma_bound=cfg.gamma_bound,
        gamma_met=trace_value <= cfg.gamma_bound,
        ok=ok,
    )


@dataclass
class VertexGainSet:
    """Vertex gains bound to their scheduling box, in canonical vertex order."""

    loop: str                        # "kinematic" | "dynamic"
    bounds: SchedulingBounds
    vertices: np.ndarray             # (N, n_sched)
    gains: np.ndarray                # (N, m, n)
    synthesis: SynthesisConfig
    lpv: LpvConfig | None = None     # recorded for the dynamic loop

    def __post_init__(self) -> None:
        expected = enumerate_vertices(self.bounds)
        if self.vertices.shape != expected.shape or not np.allclose(
            self.vertices, expected, rtol=0.0, atol=0.0
        ):
            raise ValueError("vertices do not match the canonical corner enumeration")
        if self.gains.ndim != 3 or self.gains.shape[0] != expected.shape[0]:
            raise ValueError("gain stack does not match the vertex count")
        if not np.all(np.isfinite(self.gains)):
            raise ValueError("gains must be finite")

    @property
    def n_inputs(self) -> int:
        return self.gains.shape[1]

    @property
    def n_states(self) -> int:
        return self.gains.shape[2]


@dataclass
class SynthesisOutcome:
    """Everything produced by one loop's design pass."""

    gain_set: VertexGainSet
    solution: SdpSolution
    validation: SynthesisValidation


def design_gains(
    loop: str,
    bounds: SchedulingBounds,
    A_list: list[np.ndarray],
    B: np.ndarray,
    cfg: SynthesisConfig,
    lpv: LpvConfig | None = None,
    trace_cap: float | None = None,
) -> SynthesisOutcome:
    """Assemble, solve, extract and validate one loop's vertex gains.

    Raises SynthesisError when the program is infeasible, runs out of budget
    before reaching the gap target, or fails the certificate check.
    """
    problem = assemble_lqr_lmi(A_list, B, cfg, trace_cap=trace_cap)
    sol = solve_sdp(problem, cfg)
    if sol.status not in ("optimal", "feasible"):
        raise SynthesisError(
            f"{loop} synthesis did not converge: status '{sol.status}' "
            f"after {sol.newton_steps} Newton steps ({sol.message})",
            status=sol.status,
        )
    gains = extract_vertex_gains(sol)
    validation = validate_synthesis(A_list, B, cfg, sol, gains)
    if not validation.ok:
        raise SynthesisError(
            f"{loop} synthesis failed certification: min margin "
            f"{validation.min_margin:.3e}, slowest eigenvalue "
            f"{validation.max_real_part:.6f} vs required < {-cfg.decay:g}",
            status="certificate",
        )
    gain_set = VertexGainSet(
        loop=loop,
        bounds=bounds,
        vertices=enumerate_vertices(bounds),
        gains=gains,
        synthesis=cfg,
        lpv=lpv,
    )
    return SynthesisOutcome(gain_set=gain_set, solution=sol, validation=validation)


# ---------------------------------------------------------------------------
# Gain document serialization
# ---------------------------------------------------------------------------

DOCUMENT_VERSION = 1


def gain_document(outcome: SynthesisOutcome) -> dict:
    """JSON-ready document for one loop's gains and diagnostics."""
    gs = outcome.gain_set
    doc = {
        "version": DOCUMENT_VERSION,
        "loop": gs.loop,
        "scheduling": {
            "names": list(gs.bounds.names),
            "lower": list(gs.bounds.lower),
            "upper": list(gs.bounds.upper),
        },
        "vertex_order": "binary corners, last scheduling variable fastest",
        "vertices": gs.vertices.tolist(),
        "gains": gs.gains.tolist(),
        "synthesis": {
            "Q": list(gs.synthesis.Q),
            "R": list(gs.synthesis.R),
            "gamma_bound": gs.synthesis.gamma_bound,
            "decay": gs.synthesis.decay,
            "tol": gs.synthesis.tol,
            "max_iter": gs.synthesis.max_iter,
        },
        "solver": {
            "status": outcome.solution.status,
            "objective": outcome.solution.objective,
            "gap": outcome.solution.gap,
            "newton_steps": outcome.solution.newton_steps,
            "trace_value": outcome.validation.trace_value,
            "gamma_met": outcome.validation.gamma_met,
            "min_margin": outcome.validation.min_margin,
            "max_real_part": outcome.validation.max_real_part,
        },
    }
    if gs.lpv is not None:
        doc["lpv"] = {
            "epsilon": gs.lpv.epsilon,
            "gamma_f": gs.lpv.gamma_f,
            "trig_on_sigma": gs.lpv.trig_on_sigma,
        }
    return doc


def write_gain_document(path: str | Path, outcome: SynthesisOutcome) -> None:
    Path(path).write_text(json.dumps(gain_document(outcome), indent=2) + "\n")


def load_gain_document(path: str | Path) -> VertexGainSet:
    """Load and validate a gain document written by write_gain_document."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed gain document {path}: {exc}") from None
    for key in ("loop", "scheduling", "vertices", "gains", "synthesis"):
        if key not in doc:
            raise ValueError(f"gain document {path} is missing '{key}'")
    sched = doc["scheduling"]
    bounds = SchedulingBounds(
        names=tuple(sched["names"]),
        lower=tuple(float(x) for x in sched["lower"]),
        upper=tuple(float(x) for x in sched["upper"]),
    )
    syn = doc["synthesis"]
    cfg = SynthesisConfig(
        Q=tuple(float(x) for x in syn["Q"]),
        R=tuple(float(x) for x in syn["R"]),
        gamma_bound=float(syn["gamma_bound"]),
        decay=float(syn["decay"]),
        tol=float(syn.get("tol", 1e-9)),
        max_iter=int(syn.get("max_iter", 600)),
    )
    lpv = None
    if "lpv" in doc:
        lpv = LpvConfig(
            epsilon=float(doc["lpv"]["epsilon"]),
            gamma_f=float(doc["lpv"]["gamma_f"]),
            trig_on_sigma=bool(doc["lpv"]["trig_on_sigma"]),
        )
    try:
        return VertexGainSet(
            loop=str(doc["loop"]),
            bounds=bounds,
            vertices=np.array(doc["vertices"], dtype=float),
            gains=np.array(doc["gains"], dtype=float),
            synthesis=cfg,
            lpv=lpv,
        )
    except ValueError as exc:
        raise ValueError(f"invalid gain document {path}: {exc}") from None
