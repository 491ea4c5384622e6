"""Nonlinear bicycle-model vehicle used as the ground-truth plant.

The pose (x, y, theta) advances along the heading with the current speed and
yaw rate.  The dynamic states are longitudinal speed v, side-slip angle alpha
and yaw rate omega, driven by a rear longitudinal force F_xR and a front
steering angle delta through linear tire forces,

    F_yF = C_x (delta - alpha - a omega / v)
    F_yR = C_x (-alpha + b omega / v)

plus an aerodynamic-drag / rolling-friction term that always opposes forward
motion.  Everything here is deliberately free of linearization; the LPV
embeddings in :mod:`lpvcascade.lpv` are checked against these equations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

TWO_PI = 2.0 * math.pi


def normalize_angle(theta: float) -> float:
    """Wrap an angle to the half-open interval (-pi, pi]."""
    return math.pi - (math.pi - theta) % TWO_PI


def clamp(value: float, lo: float, hi: float) -> float:
    """Clamp value into [lo, hi]."""
    return lo if value < lo else hi if value > hi else value


@dataclass(frozen=True)
class VehicleParams:
    """Physical parameters of the test vehicle.

    All values must be strictly positive; construction fails otherwise.
    """

    a: float = 0.758      # distance CoG -> front axle [m]
    b: float = 1.036      # distance CoG -> rear axle [m]
    M: float = 683.0      # vehicle mass [kg]
    I: float = 560.94     # yaw moment of inertia [kg m^2]
    C_d: float = 0.36     # aerodynamic drag coefficient [-]
    Ar: float = 1.91      # frontal area [m^2]
    rho: float = 1.184    # air density [kg/m^3]
    mu: float = 0.09      # rolling friction coefficient [-]
    C_x: float = 25000.0  # tire cornering stiffness [N/rad]
    g: float = 9.81       # gravitational acceleration [m/s^2]

    def __post_init__(self) -> None:
        for name in ("a", "b", "M", "I", "C_d", "Ar", "rho", "mu", "C_x", "g"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"VehicleParams.{name} must be strictly positive")


@dataclass(frozen=True)
class ActuatorLimits:
    """Saturation ranges of the two physical actuators."""

    F_max: float = 4000.0      # rear force range is [0, F_max] [N]
    delta_max: float = 0.4363  # steering range is [-delta_max, delta_max] [rad]

    def __post_init__(self) -> None:
        if not self.F_max > 0.0:
            raise ValueError("ActuatorLimits.F_max must be strictly positive")
        if not self.delta_max > 0.0:
            raise ValueError("ActuatorLimits.delta_max must be strictly positive")


@dataclass
class Pose:
    """Planar pose in the world frame."""

    x: float      # m
    y: float      # m
    theta: float  # heading [rad]

    def normalized(self) -> "Pose":
        return Pose(self.x, self.y, normalize_angle(self.theta))


@dataclass
class DynamicState:
    """States of the dynamic bicycle model."""

    v: float      # longitudinal speed [m/s]
    alpha: float  # side-slip angle [rad]
    omega: float  # yaw rate [rad/s]


@dataclass
class ActuatorInput:
    """Physical actuator command applied to the plant."""

    F_xR: float   # rear longitudinal force [N]
    delta: float  # front steering angle [rad]


def saturate_input(u: ActuatorInput, limits: ActuatorLimits) -> ActuatorInput:
    """Clamp the actuator command into its physical range."""
    return ActuatorInput(
        F_xR=clamp(u.F_xR, 0.0, limits.F_max),
        delta=clamp(u.delta, -limits.delta_max, limits.delta_max),
    )


def resistive_force(v: float, params: VehicleParams) -> float:
    """Aerodynamic drag plus rolling friction:

        F_df = 0.5 C_d rho Ar v^2 + mu M g
    """
    return 0.5 * params.C_d * params.rho * params.Ar * v * v + params.mu * params.M * params.g


def tire_forces(state: DynamicState, delta: float, params: VehicleParams) -> tuple[float, float]:
    """Front/rear lateral tire forces of the linear tire model.

    Slip angles involve omega / v, so the model is undefined at standstill.
    """
    if state.v <= 0.0:
        raise ValueError("tire slip angles are undefined for v <= 0")
    F_yF = params.C_x * (delta - state.alpha - params.a * state.omega / state.v)
    F_yR = params.C_x * (-state.alpha + params.b * state.omega / state.v)
    return F_yF, F_yR


def kinematic_derivatives(pose: Pose, v: float, omega: float) -> np.ndarray:
    """Pose rates (x_dot, y_dot, theta_dot) for speed v along the heading."""
    return np.array([v * math.cos(pose.theta), v * math.sin(pose.theta), omega])


def dynamic_derivatives(state: DynamicState, u: ActuatorInput, params: VehicleParams) -> np.ndarray:
    """Rates (v_dot, alpha_dot, omega_dot) of the dynamic bicycle model:

        v_dot     = (F_xR cos(a) + F_yF sin(a - d) + F_yR sin(a) - F_df) / M
        alpha_dot = (-F_xR sin(a) + F_yF cos(a - d) + F_yR cos(a)) / (M v) - omega
        omega_dot = (F_yF a cos(d) - F_yR b) / I

    with a = alpha and d = delta.
    """
    F_yF, F_yR = tire_forces(state, u.delta, params)
    F_df = resistive_force(state.v, params)
    sa = math.sin(state.alpha)
    ca = math.cos(state.alpha)
    sad = math.sin(state.alpha - u.delta)
    cad = math.cos(state.alpha - u.delta)
    v_dot = (u.F_xR * ca + F_yF * sad + F_yR * sa - F_df) / params.M
    alpha_dot = (-u.F_xR * sa + F_yF * cad + F_yR * ca) / (params.M * state.v) - state.omega
    omega_dot = (F_yF * params.a * math.cos(u.delta) - F_yR * params.b) / params.I
    return np.array([v_dot, alpha_dot, omega_dot])


def vehicle_derivatives(y: np.ndarray, u: ActuatorInput, params: VehicleParams) -> np.ndarray:
    """Stacked rates for the full plant state y = (x, y, theta, v, alpha, omega)."""
    pose = Pose(float(y[0]), float(y[1]), float(y[2]))
    dyn = DynamicState(float(y[3]), float(y[4]), float(y[5]))
    kin = kinematic_derivatives(pose, dyn.v, dyn.omega)
    return np.concatenate([kin, dynamic_derivatives(dyn, u, params)])


def step_rk4(f: Callable, y: np.ndarray, u, dt: float) -> np.ndarray:
    """One classical fourth-order Runge-Kutta step of y' = f(y, u).

    The input u is held constant over the step (zero-order hold).
    """
    k1 = f(y, u)
    k2 = f(y + 0.5 * dt * k1, u)
    k3 = f(y + 0.5 * dt * k2, u)
    k4 = f(y + dt * k3, u)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
