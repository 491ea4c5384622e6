"""LPV embeddings of the vehicle for controller synthesis.

Two quasi-linear models are produced, each parameterized by a small vector of
scheduling variables confined to an interval box:

* the kinematic pose-error model with states (x_e, y_e, theta_e), scheduled
  on (v_d, omega, theta_e);
* the augmented dynamic model with states (v, alpha, omega, F_xR, sigma, i_p),
  scheduled on (v, sigma), where sigma = delta + epsilon is the shifted
  steering angle, F_xR and sigma carry first-order actuator filters and i_p
  integrates the yaw-rate error.

Scheduling points are plain arrays whose entries follow the variable order of
the corresponding :class:`SchedulingBounds`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .plant import Pose, VehicleParams, clamp, normalize_angle, resistive_force


def sinc(x: float) -> float:
    """sin(x) / x, with a four-term series below 1e-4 to avoid cancellation."""
    if abs(x) < 1e-4:
        x2 = x * x
        return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))
    return math.sin(x) / x


@dataclass(frozen=True)
class SchedulingBounds:
    """Ordered scheduling variables with their interval bounds."""

    names: tuple[str, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self) -> None:
        if not (len(self.names) == len(self.lower) == len(self.upper)):
            raise ValueError("SchedulingBounds fields must have equal length")
        if len(self.names) == 0:
            raise ValueError("SchedulingBounds needs at least one variable")
        for name, lo, hi in zip(self.names, self.lower, self.upper):
            if not lo < hi:
                raise ValueError(f"empty scheduling interval for {name}: [{lo}, {hi}]")

    @property
    def n_vars(self) -> int:
        return len(self.names)

    @property
    def n_vertices(self) -> int:
        return 2 ** len(self.names)

    def clamp(self, point) -> np.ndarray:
        """Project a raw scheduling point onto the interval box."""
        point = np.asarray(point, dtype=float)
        if point.shape != (self.n_vars,):
            raise ValueError(f"expected scheduling point of shape ({self.n_vars},)")
        return np.clip(point, self.lower, self.upper)

    def contains(self, point, tol: float = 0.0) -> bool:
        point = np.asarray(point, dtype=float)
        lo = np.asarray(self.lower) - tol
        hi = np.asarray(self.upper) + tol
        return bool(np.all(point >= lo) and np.all(point <= hi))


def enumerate_vertices(bounds: SchedulingBounds) -> np.ndarray:
    """All 2^n corner points of the interval box, in canonical binary order.

    Counting order: the last scheduling variable toggles fastest, the first
    slowest, with bit 0 = lower bound and bit 1 = upper bound.  Every consumer
    of vertex-indexed data (gains, weights, serialized documents) relies on
    this order.
    """
    pairs = [(lo, hi) for lo, hi in zip(bounds.lower, bounds.upper)]
    return np.array(list(itertools.product(*pairs)))


def dynamic_bounds() -> SchedulingBounds:
    """Full scheduling envelope of the dynamic loop: speed and shifted steering."""
    return SchedulingBounds(
        names=("v", "sigma"),
        lower=(1.0, 0.0873),
        upper=(18.0, 0.9599),
    )


def dynamic_runtime_bounds() -> SchedulingBounds:
    """Operational scheduling box of the dynamic loop.

    Narrower than the full envelope on purpose: a single quadratic
    certificate over the whole speed range needs gains too hot for the
    100 Hz loop (the speed extremes fight each other), while this box covers
    the planner's working range and admits a design the sampled loop can
    hold.  Outside the box the scheduler clamps to the nearest face, which
    keeps the held vertex loops stable over the whole envelope.
    """
    return SchedulingBounds(
        names=("v", "sigma"),
        lower=(3.0, 0.20),
        upper=(12.0, 0.85),
    )


def kinematic_bounds() -> SchedulingBounds:
    """Default scheduling box of the kinematic loop."""
    return SchedulingBounds(
        names=("v_d", "omega", "theta_e"),
        lower=(1.0, -1.417, -0.139),
        upper=(18.0, 1.417, 0.139),
    )


@dataclass(frozen=True)
class LpvConfig:
    """Shaping constants of the augmented dynamic model."""

    epsilon: float = 0.5236    # steering shift, sigma = delta + epsilon [rad]
    gamma_f: float = 50.0      # actuator filter pole [1/s]
    trig_on_sigma: bool = True # evaluate steering trig at sigma (False: at sigma - epsilon)

    def __post_init__(self) -> None:
        if not self.epsilon > 0.0:
            raise ValueError("LpvConfig.epsilon must be strictly positive")
        if not self.gamma_f > 0.0:
            raise ValueError("LpvConfig.gamma_f must be strictly positive")


@dataclass(frozen=True)
class LpvMatrices:
    """State-space data of one frozen scheduling point."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    r: np.ndarray | None = None  # reference injection (kinematic model only)


@dataclass
class KinematicError:
    """Pose error expressed in the vehicle body frame."""

    x_e: float      # along-heading error [m]
    y_e: float      # cross-heading error [m]
    theta_e: float  # heading error [rad]

    def as_array(self) -> np.ndarray:
        return np.array([self.x_e, self.y_e, self.theta_e])


def pose_error_body(pose: Pose, ref: Pose) -> KinematicError:
    """Reference-minus-pose position error rotated into the body frame.

    The rotation by -theta maps the world-frame offset onto the vehicle axes;
    the heading error is wrapped to (-pi, pi].
    """
    dx = ref.x - pose.x
    dy = ref.y - pose.y
    ct = math.cos(pose.theta)
    st = math.sin(pose.theta)
    return KinematicError(
        x_e=ct * dx + st * dy,
        y_e=-st * dx + ct * dy,
        theta_e=normalize_angle(ref.theta - pose.theta),
    )


def kinematic_error_derivatives(err: KinematicError, u, ref) -> np.ndarray:
    """Nonlinear body-frame error rates for command u = (v, omega) and
    reference rates ref = (v_d, omega_d):

        x_e'     =  omega y_e + v_d cos(theta_e) - v
        y_e'     = -omega x_e + v_d sin(theta_e)
        theta_e' =  omega_d - omega
    """
    v, omega = float(u[0]), float(u[1])
    v_d, omega_d = float(ref[0]), float(ref[1])
    return np.array([
        omega * err.y_e + v_d * math.cos(err.theta_e) - v,
        -omega * err.x_e + v_d * math.sin(err.theta_e),
        omega_d - omega,
    ])


def kinematic_lpv_matrices(sv, omega_d: float = 0.0) -> LpvMatrices:
    """Error-model matrices at scheduling point sv = (v_d, omega, theta_e).

    With u = (v, omega) and the reference injection r = (v_d cos(theta_e),
    omega_d), the embedding x' = A x + B u - B r reproduces the nonlinear
    error rates exactly: the only nonlinear term, v_d sin(theta_e), is written
    as v_d sinc(theta_e) * theta_e and parked in the A matrix.
    """
    v_d, omega, theta_e = (float(s) for s in sv)
    A = np.array([
        [0.0, omega, 0.0],
        [-omega, 0.0, v_d * sinc(theta_e)],
        [0.0, 0.0, 0.0],
    ])
    B = np.array([
        [-1.0, 0.0],
        [0.0, 0.0],
        [0.0, -1.0],
    ])
    C = np.eye(3)
    r = np.array([v_d * math.cos(theta_e), omega_d])
    return LpvMatrices(A=A, B=B, C=C, r=r)


def dynamic_lpv_matrices(sv, params: VehicleParams, cfg: LpvConfig) -> LpvMatrices:
    """Augmented dynamic model at scheduling point sv = (v, sigma).

    State order (v, alpha, omega, F_xR, sigma, i_p): three bicycle rows
    linearized about straight running, two first-order actuator filter rows
    with pole -gamma_f, and the yaw-rate error integrator row i_p' = -omega
    (the reference part of the integral enters through the feedforward path).
    The inputs are the filter commands u_F = (F_xR_cmd, sigma_cmd).

    Steering trigonometry is evaluated at sigma itself by default; the shift
    keeps the scheduling interval clear of zero steering.  Setting
    cfg.trig_on_sigma = False evaluates it at the physical angle
    delta = sigma - epsilon instead.
    """
    v, sigma = float(sv[0]), float(sv[1])
    if v <= 0.0:
        raise ValueError("dynamic LPV model is undefined for v <= 0")
    ang = sigma if cfg.trig_on_sigma else sigma - cfg.epsilon
    s = math.sin(ang)
    c = math.cos(ang)
    Cx = params.C_x
    a = params.a
    b = params.b
    M = params.M
    Iz = params.I
    gf = cfg.gamma_f
    F_df = resistive_force(v, params)

    A = np.zeros((6, 6))
    A[0, 0] = -F_df / (M * v)
    A[0, 1] = Cx * s / M
    A[0, 2] = Cx * a * s / (M * v)
    A[0, 3] = 1.0 / M
    A[0, 4] = -Cx * s / M
    # Slip-angle row from d(alpha')/d(alpha, omega, sigma) of the frozen-trig
    # force balance [F_yF cos(delta) + F_yR]/(M v) - omega; both cornering
    # stiffness terms damp alpha, and steering enters with positive sign
    # (matches the central-difference Jacobian of dynamic_derivatives).
    A[1, 1] = -(Cx * c + Cx) / (M * v)
    A[1, 2] = (Cx * b - Cx * a * c) / (M * v * v) - 1.0
    A[1, 4] = Cx * c / (M * v)
    A[2, 1] = (Cx * b - Cx * a * c) / Iz
    A[2, 2] = -(Cx * b * b + Cx * a * a * c) / (Iz * v)
    A[2, 4] = Cx * a * c / Iz
    A[3, 3] = -gf
    A[4, 4] = -gf
    A[5, 2] = -1.0

    B = np.zeros((6, 2))
    B[3, 0] = gf
    B[4, 1] = gf

    return LpvMatrices(A=A, B=B, C=np.eye(6))


def kinematic_vertex_systems(bounds: SchedulingBounds) -> tuple[list[np.ndarray], np.ndarray]:
    """A matrices at all kinematic vertices plus the (constant) B matrix."""
    vertices = enumerate_vertices(bounds)
    mats = [kinematic_lpv_matrices(sv) for sv in vertices]
    return [m.A for m in mats], mats[0].B


def dynamic_vertex_systems(
    bounds: SchedulingBounds, params: VehicleParams, cfg: LpvConfig
) -> tuple[list[np.ndarray], np.ndarray]:
    """A matrices at all dynamic vertices plus the (constant) B matrix."""
    vertices = enumerate_vertices(bounds)
    mats = [dynamic_lpv_matrices(sv, params, cfg) for sv in vertices]
    return [m.A for m in mats], mats[0].B
