"""Deterministic two-rate closed-loop simulation of the cascade controller.

The outer kinematic loop runs once per Ts_kin: it rotates the pose error into
the body frame, schedules the kinematic gain on (v_d, omega, theta_e) and
emits the velocity command pair u_C = (v_cmd, omega_cmd), which the inner
loop holds as its reference until the next tick.  The inner dynamic loop runs
every Ts_dyn: it schedules the dynamic gain on (v, delta_f + epsilon),
accumulates the yaw-rate error integral, computes the actuator commands with
the operating-point feedforward, propagates the actuator filter by its exact
scalar-exponential discretization, saturates the filter state, and advances
the nonlinear bicycle plant one RK4 step.

Telemetry records one row per dynamic step (plant state at the row time,
actuator values applied over the following step); metrics are RMS errors over
the full horizon.  Everything is pure float arithmetic in a fixed order, so
identical scenarios reproduce telemetry bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lpv import LpvConfig, dynamic_lpv_matrices, pose_error_body
from .plant import (
    ActuatorInput,
    ActuatorLimits,
    DynamicState,
    Pose,
    VehicleParams,
    resistive_force,
    saturate_input,
    step_rk4,
    vehicle_derivatives,
)
from .planner import ReferenceTrajectory
from .scheduler import (
    ControllerState,
    dynamic_control,
    feedforward_matrix,
    gain_at,
    kinematic_control,
    schedule_point,
)
from .synthesis import VertexGainSet

TELEMETRY_COLUMNS = (
    "t", "x", "y", "theta", "v", "alpha", "omega",
    "x_d", "y_d", "theta_d", "v_d", "omega_d",
    "x_e", "y_e", "theta_e", "F_xR", "delta",
    "uC_v", "uC_w", "uF_F", "uF_d",
)
_COL_INDEX = {name: i for i, name in enumerate(TELEMETRY_COLUMNS)}

# Rows of the dynamic model treated as controlled outputs: v and omega.
_C_OUT = np.array([[1.0, 0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0, 0.0]])


class SimulationAbort(RuntimeError):
    """The plant left its validity domain (near standstill or non-finite)."""

    def __init__(self, t: float, reason: str):
        super().__init__(f"simulation aborted at t = {t:.3f} s: {reason}")
        self.t = t
        self.reason = reason


@dataclass(frozen=True)
class Scenario:
    """Everything one closed-loop run depends on."""

    trajectory: ReferenceTrajectory
    kinematic_gains: VertexGainSet
    dynamic_gains: VertexGainSet
    params: VehicleParams = field(default_factory=VehicleParams)
    limits: ActuatorLimits = field(default_factory=ActuatorLimits)
    ts_kin: float = 0.1
    ts_dyn: float = 0.01
    v_floor: float = 0.05
    horizon: float | None = None
    initial_pose: Pose | None = None
    initial_state: DynamicState | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.ts_dyn <= self.ts_kin:
            raise ValueError("need 0 < Ts_dyn <= Ts_kin")
        ratio = self.ts_kin / self.ts_dyn
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError("Ts_kin must be an integer multiple of Ts_dyn")
        if self.kinematic_gains.loop != "kinematic":
            raise ValueError("kinematic_gains is not a kinematic-loop document")
        if self.dynamic_gains.loop != "dynamic":
            raise ValueError("dynamic_gains is not a dynamic-loop document")
        if (self.kinematic_gains.n_inputs, self.kinematic_gains.n_states) != (2, 3):
            raise ValueError("kinematic gains must map 3 error states to 2 commands")
        if (self.dynamic_gains.n_inputs, self.dynamic_gains.n_states) != (2, 6):
            raise ValueError("dynamic gains must map 6 states to 2 commands")
        if self.dynamic_gains.lpv is None:
            raise ValueError("dynamic gain document lacks its LPV configuration")
        if not self.v_floor > 0.0:
            raise ValueError("v_floor must be strictly positive")
        if self.horizon is not None and not self.horizon > 0.0:
            raise ValueError("horizon must be strictly positive")
        if self.effective_horizon > self.trajectory.horizon + 1e-9:
            raise ValueError("horizon exceeds the reference trajectory")

    @property
    def effective_horizon(self) -> float:
        return self.trajectory.horizon if self.horizon is None else self.horizon

    @property
    def substeps(self) -> int:
        return int(round(self.ts_kin / self.ts_dyn))


@dataclass(frozen=True)
class Telemetry:
    """Per-dynamic-step log, one row per step, columns TELEMETRY_COLUMNS."""

    data: np.ndarray

    def __post_init__(self) -> None:
        if self.data.ndim != 2 or self.data.shape[1] != len(TELEMETRY_COLUMNS):
            raise ValueError("telemetry array must have one column per field")

    def __len__(self) -> int:
        return self.data.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.data[:, _COL_INDEX[name]]


@dataclass(frozen=True)
class Metrics:
    """Tracking quality over the horizon; all entries are nonnegative."""

    rmse_v: float   # RMS linear-velocity error [m/s]
    rmse_w: float   # RMS yaw-rate error [rad/s]
    rmse_y: float   # RMS lateral error [m]
    max_ev: float   # peak |v - v_d| [m/s]
    max_ey: float   # peak |y_e| [m]

    def as_dict(self) -> dict[str, float]:
        return {
            "rmse_v": self.rmse_v,
            "rmse_w": self.rmse_w,
            "rmse_y": self.rmse_y,
            "max_ev": self.max_ev,
            "max_ey": self.max_ey,
        }


def run_simulation(scenario: Scenario) -> Telemetry:
    """Run the cascade loop over the scenario horizon.

    Per kinematic tick: pose error, schedule K_C, emit u_C.  Per dynamic
    step: schedule K_D, integrate the yaw-rate error, compute u_F, propagate
    and saturate the actuator filter, step the plant with RK4.  Aborts when
    v drops below the floor or any state stops being finite.
    """
    traj = scenario.trajectory
    params = scenario.params
    lpv_cfg = scenario.dynamic_gains.lpv
    n_sub = scenario.substeps
    dt = scenario.ts_dyn
    n_steps = int(round(scenario.effective_horizon / dt))
    if n_steps < 1:
        raise ValueError("horizon shorter than one dynamic step")

    ref0 = traj.sample(0.0)
    pose = scenario.initial_pose or Pose(ref0.x_d, ref0.y_d, ref0.theta_d)
    # v(0) respects the v > 0 domain of the slip-angle model.
    dyn = scenario.initial_state or DynamicState(
        v=max(ref0.v_d, 1.0), alpha=0.0, omega=ref0.omega_d
    )
    y = np.array([pose.x, pose.y, pose.theta, dyn.v, dyn.alpha, dyn.omega])
    # Start the force filter on the drag equilibrium and the wheels straight.
    ctrl = ControllerState(i_p=0.0, F_xR_f=resistive_force(dyn.v, params), delta_f=0.0)
    filter_decay = math.exp(-lpv_cfg.gamma_f * dt)

    u_C = np.array([ref0.v_d, ref0.omega_d])
    rows = np.empty((n_steps, len(TELEMETRY_COLUMNS)))
    for k in range(n_steps):
        t = k * dt
        ref = traj.sample(t)
        err = pose_error_body(
            Pose(y[0], y[1], y[2]), Pose(ref.x_d, ref.y_d, ref.theta_d)
        )
        if k % n_sub == 0:
            K_C = gain_at((ref.v_d, y[5], err.theta_e), scenario.kinematic_gains)
            r_C = np.array([ref.v_d * math.cos(err.theta_e), ref.omega_d])
            u_C = kinematic_control(K_C, err.as_array(), r_C)

        sv = schedule_point(
            (y[3], ctrl.delta_f + lpv_cfg.epsilon), scenario.dynamic_gains.bounds
        )
        K_D = gain_at(sv, scenario.dynamic_gains)
        ctrl.i_p += (u_C[1] - y[5]) * dt
        # Operating-point feedforward on the physical 5-state subsystem; the
        # integrator column is feedback-only.
        mats = dynamic_lpv_matrices(sv, params, lpv_cfg)
        N_ff = feedforward_matrix(mats.A[:5, :5], mats.B[:5, :], K_D[:, :5], _C_OUT)
        x_D = np.array([y[3], y[4], y[5], ctrl.F_xR_f, ctrl.delta_f, ctrl.i_p])
        u_f = dynamic_control(K_D, x_D, N_ff, u_C)

        # Exact first-order-filter step under a zero-order-hold command, then
        # saturation written back into the filter state.
        sat = saturate_input(
            ActuatorInput(
                F_xR=u_f[0] + (ctrl.F_xR_f - u_f[0]) * filter_decay,
                delta=u_f[1] + (ctrl.delta_f - u_f[1]) * filter_decay,
            ),
            scenario.limits,
        )
        ctrl.F_xR_f = sat.F_xR
        ctrl.delta_f = sat.delta

        rows[k] = (
            t, y[0], y[1], y[2], y[3], y[4], y[5],
            ref.x_d, ref.y_d, ref.theta_d, ref.v_d, ref.omega_d,
            err.x_e, err.y_e, err.theta_e, sat.F_xR, sat.delta,
            u_C[0], u_C[1], u_f[0], u_f[1],
        )

        y = step_rk4(
            lambda state, u: vehicle_derivatives(state, u, params), y, sat, dt
        )
        if not np.all(np.isfinite(y)):
            raise SimulationAbort(t + dt, "non-finite plant state")
        if y[3] < scenario.v_floor:
            raise SimulationAbort(
                t + dt, f"speed {y[3]:.3f} m/s below floor {scenario.v_floor}"
            )
    return Telemetry(rows)


def compute_metrics(telemetry: Telemetry) -> Metrics:
    """RMS and peak tracking errors over the full horizon."""
    if len(telemetry) == 0:
        raise ValueError("cannot compute metrics of empty telemetry")
    ev = telemetry.column("v") - telemetry.column("v_d")
    ew = telemetry.column("omega") - telemetry.column("omega_d")
    ey = telemetry.column("y_e")
    return Metrics(
        rmse_v=float(np.sqrt(np.mean(ev * ev))),
        rmse_w=float(np.sqrt(np.mean(ew * ew))),
        rmse_y=float(np.sqrt(np.mean(ey * ey))),
        max_ev=float(np.max(np.abs(ev))),
        max_ey=float(np.max(np.abs(ey))),
    )


def write_telemetry(telemetry: Telemetry, destination: str) -> None:
    """CSV dump, fixed header, 12 significant digits per value."""
    try:
        with open(destination, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(TELEMETRY_COLUMNS) + "\n")
            for row in telemetry.data:
                fh.write(",".join(f"{value:.12g}" for value in row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write telemetry to {destination}: {exc}") from exc


def read_telemetry(source: str) -> Telemetry:
    """Parse a telemetry CSV produced by :func:`write_telemetry`."""
    with open(source, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header.split(",") != list(TELEMETRY_COLUMNS):
            raise ValueError(f"{source}: not a telemetry file (unexpected header)")
        values = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(TELEMETRY_COLUMNS):
                raise ValueError(f"{source}:{lineno}: wrong column count")
            try:
                values.append([float(p) for p in parts])
            except ValueError:
                raise ValueError(f"{source}:{lineno}: non-numeric value") from None
    data = np.array(values) if values else np.empty((0, len(TELEMETRY_COLUMNS)))
    return Telemetry(data)
