"""Online gain scheduling: vertex-weight interpolation and control laws.

The synthesis stage leaves one gain per corner of the scheduling box.  At run
time the current scheduling point is clamped into the box, converted to
multilinear vertex weights, and the weights blend the vertex gains.  The
weight of vertex j is the tensor-product basis function that equals one at
vertex j and zero at every other corner, so blending recovers each vertex
gain exactly at its own corner.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lpv import SchedulingBounds
from .synthesis import VertexGainSet


@dataclass
class ControllerState:
    """Dynamic-loop controller memory carried between ticks.

    The steering filter state is the physical wheel angle; the scheduling
    variable adds the interval shift on top of it at lookup time.
    """

    i_p: float = 0.0      # integrated yaw-rate error [rad]
    F_xR_f: float = 0.0   # force filter state [N]
    delta_f: float = 0.0  # steering filter state [rad]


def schedule_point(raw, bounds: SchedulingBounds) -> np.ndarray:
    """Project a raw scheduling point onto the interval box.

    Out-of-range values saturate at the nearest face, e.g. speeds in [0, 1)
    schedule at the low-speed corner of the default boxes.
    """
    return bounds.clamp(raw)


def normalized_coords(sv, bounds: SchedulingBounds) -> np.ndarray:
    """Per-variable membership pair (weight toward upper corner, toward lower).

    Row k holds (lam_k, 1 - lam_k) with lam_k = (sv_k - lo_k) / (hi_k - lo_k)
    for the clamped point, so both entries lie in [0, 1] and sum to one.
    """
    sv = bounds.clamp(sv)
    lo = np.asarray(bounds.lower)
    hi = np.asarray(bounds.upper)
    lam = (sv - lo) / (hi - lo)
    return np.column_stack([lam, 1.0 - lam])


def interpolation_weights(sv, bounds: SchedulingBounds) -> np.ndarray:
    """Multilinear vertex weights in canonical vertex order.

    Weight j multiplies, over the scheduling variables, lam_k when vertex j
    sits at the upper bound of variable k and (1 - lam_k) when it sits at the
    lower bound.  The weights are nonnegative and sum to one.
    """
    coords = normalized_coords(sv, bounds)
    n = bounds.n_vars
    weights = np.ones(bounds.n_vertices)
    for j in range(bounds.n_vertices):
        w = 1.0
        for k in range(n):
            # Canonical order: bit of variable k in vertex j, last variable
            # fastest; bit 1 means the upper bound.
            bit = (j >> (n - 1 - k)) & 1
            w *= coords[k, 0] if bit else coords[k, 1]
        weights[j] = w
    return weights


def interpolate_gain(weights: np.ndarray, gain_set: VertexGainSet) -> np.ndarray:
    """Blend the vertex gains: K = sum_j mu_j K_j."""
    return np.einsum("j,jab->ab", weights, gain_set.gains)


def gain_at(sv, gain_set: VertexGainSet) -> np.ndarray:
    """Clamp, weight and blend in one call."""
    return interpolate_gain(interpolation_weights(sv, gain_set.bounds), gain_set)


def feedforward_matrix(A: np.ndarray, B: np.ndarray, K: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Reference-injection matrix inverting the closed-loop DC gain:

        N = [ C (-(A + B K))^-1 B ]^-1

    With u = K x + N r the steady state of x' = A x + B u satisfies C x = r.
    Raises ValueError when the closed loop is singular at DC.
    """
    try:
        X = np.linalg.solve(-(A + B @ K), B)
        N = np.linalg.inv(C @ X)
    except np.linalg.LinAlgError:
        raise ValueError("closed loop is singular at DC; no feedforward exists") from None
    if not np.all(np.isfinite(N)):
        raise ValueError("closed loop is singular at DC; no feedforward exists")
    return N


def kinematic_control(K_C: np.ndarray, error_state: np.ndarray, r_C: np.ndarray) -> np.ndarray:
    """Kinematic loop output u_C = K_C x_e + r_C = (v_cmd, omega_cmd)."""
    return K_C @ error_state + r_C


def dynamic_control(K_D: np.ndarray, x_D: np.ndarray, N_ff: np.ndarray, r_D: np.ndarray) -> np.ndarray:
    """Dynamic loop output u_F = K_D x_D + N_ff r_D = (F_cmd, sigma_cmd)."""
    return K_D @ x_D + N_ff @ r_D
