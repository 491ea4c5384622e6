"""Offline reference-trajectory generation from circuit waypoints.

The pipeline has three stages:

1. :func:`plan_path` fits a piecewise quintic Hermite spline through the
   waypoints.  Node tangents come from chordal Catmull-Rom differences and
   node curvature vectors from the Menger (circumscribed-circle) curvature of
   each waypoint triple, so the spline is C2 and reproduces straight lines
   and sampled circles without systematic curvature bias.
2. :func:`speed_profile` lays a speed over arc length: the pointwise cap is
   the minimum of the global limit, the lateral-comfort rule
   v <= sqrt(a_lat_max / |kappa|) and per-waypoint targets, then forward and
   backward passes enforce the acceleration bound |dv/dt| <= a_max.
3. :func:`generate_trajectory` converts the profile to uniform time samples
   (t, x_d, y_d, theta_d, v_d, omega_d) at the kinematic period, with
   omega_d = v_d * kappa.

All computation is pure and deterministic; sampling an existing trajectory is
read-only and safe to share between consumers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .plant import normalize_angle

_OMEGA_LIMIT = 1.417         # emitted |omega_d| cap, the scheduling bound [rad/s]
_ARC_SAMPLES = 128           # arc-length table resolution per spline segment
_COINCIDENT_TOL = 1e-9       # waypoints closer than this are degenerate [m]


class PlannerError(Exception):
    """Degenerate waypoints, infeasible constraints, or bad sampling."""


@dataclass(frozen=True)
class Waypoint:
    """One circuit point, optionally carrying a speed target for the segment
    that ends at it."""

    x: float
    y: float
    speed: float | None = None

    def __post_init__(self) -> None:
        if self.speed is not None and not self.speed > 0.0:
            raise ValueError("Waypoint.speed must be strictly positive when given")


@dataclass(frozen=True)
class PlannerConstraints:
    """Speed and acceleration envelope of the profile stage."""

    # The force floor F_xR >= 0 leaves drag plus rolling friction (about
    # 0.88 m/s^2 over the speed range) as the only deceleration, so the
    # default bound stays below it; profiles above it cannot be followed.
    a_max: float = 0.7        # longitudinal acceleration bound [m/s^2]
    v_max: float = 10.0       # global speed cap [m/s]
    v_min: float = 1.0        # speed floor [m/s]
    a_lat_max: float = 2.0    # lateral-comfort bound for the curvature rule [m/s^2]
    end_speed: float | None = None  # terminal target; None slows to v_min

    def __post_init__(self) -> None:
        if not self.a_max > 0.0:
            raise ValueError("PlannerConstraints.a_max must be strictly positive")
        if not 0.0 < self.v_min <= self.v_max <= 18.0:
            raise ValueError("PlannerConstraints requires 0 < v_min <= v_max <= 18")
        if not self.a_lat_max > 0.0:
            raise ValueError("PlannerConstraints.a_lat_max must be strictly positive")
        if self.end_speed is not None and not self.v_min <= self.end_speed <= self.v_max:
            raise ValueError("PlannerConstraints.end_speed must lie in [v_min, v_max]")


@dataclass(frozen=True)
class ReferencePoint:
    """One desired sample of the trajectory."""

    t: float
    x_d: float
    y_d: float
    theta_d: float
    v_d: float
    omega_d: float


class PathSpline:
    """Arc-length-parameterized C2 spline through the waypoints.

    coeffs[i] holds the (6, 2) polynomial coefficients of segment i in its
    local parameter u in [0, 1]; the cumulative arc-length table maps queries
    s -> (segment, u).
    """

    def __init__(self, coeffs: np.ndarray, closed: bool):
        self.coeffs = coeffs               # (n_seg, 6, 2)
        self.closed = closed
        self._build_arc_table()

    def _build_arc_table(self) -> None:
        n_seg = self.coeffs.shape[0]
        u = np.linspace(0.0, 1.0, _ARC_SAMPLES + 1)
        powers = np.vander(u, 6, increasing=True)          # (K, 6) of u^k
        dpow = powers[:, :5] * np.arange(1, 6)             # d(u^k)/du coefficients
        self._seg_s = np.zeros((n_seg, _ARC_SAMPLES + 1))
        self._seg_u = u
        s0 = 0.0
        self._seg_start = np.zeros(n_seg)
        for i in range(n_seg):
            dp = dpow @ self.coeffs[i, 1:, :]              # (K, 2) velocities
            speed = np.hypot(dp[:, 0], dp[:, 1])
            ds = 0.5 * (speed[1:] + speed[:-1]) * np.diff(u)
            self._seg_start[i] = s0
            self._seg_s[i] = s0 + np.concatenate([[0.0], np.cumsum(ds)])
            s0 = self._seg_s[i, -1]
        self.length = float(s0)

    def _locate(self, s: float) -> tuple[int, float]:
        """Segment index and local parameter u for arc length s."""
        s = min(max(s, 0.0), self.length)
        i = int(np.searchsorted(self._seg_start, s, side="right") - 1)
        i = min(max(i, 0), self.coeffs.shape[0] - 1)
        row = self._seg_s[i]
        j = int(np.searchsorted(row, s, side="right") - 1)
        j = min(max(j, 0), row.size - 2)
        span = row[j + 1] - row[j]
        frac = 0.0 if span <= 0.0 else (s - row[j]) / span
        u = self._seg_u[j] + frac * (self._seg_u[j + 1] - self._seg_u[j])
        # One Newton correction on s(u) tightens the table interpolation.
        du = self._derivative(i, u)
        speed = math.hypot(du[0], du[1])
        if speed > 0.0:
            u = min(max(u + (s - self._arc_at(i, u, row, j)) / speed, 0.0), 1.0)
        return i, u

    def _arc_at(self, i: int, u: float, row: np.ndarray, j: int) -> float:
        du_lo = self._derivative(i, self._seg_u[j])
        du_u = self._derivative(i, u)
        speed = 0.5 * (math.hypot(*du_lo) + math.hypot(*du_u))
        return float(row[j] + speed * (u - self._seg_u[j]))

    def _derivative(self, i: int, u: float) -> np.ndarray:
        c = self.coeffs[i]
        return sum(k * c[k] * u ** (k - 1) for k in range(1, 6))

    def point_at(self, s: float) -> tuple[float, float, float, float]:
        """(x, y, heading, curvature) at arc length s."""
        i, u = self._locate(s)
        c = self.coeffs[i]
        pos = sum(c[k] * u**k for k in range(6))
        d1 = self._derivative(i, u)
        d2 = sum(k * (k - 1) * c[k] * u ** (k - 2) for k in range(2, 6))
        speed2 = d1[0] * d1[0] + d1[1] * d1[1]
        if speed2 <= 0.0:
            raise PlannerError("path spline has a stationary point; waypoints degenerate")
        kappa = (d1[0] * d2[1] - d1[1] * d2[0]) / speed2**1.5
        theta = math.atan2(d1[1], d1[0])
        return float(pos[0]), float(pos[1]), theta, float(kappa)


def _menger_curvature(p0: np.ndarray, p1: np.ndarray, p2: np.ndarray) -> float:
    """Signed curvature of the circle through three points (left turn > 0)."""
    a = p1 - p0
    b = p2 - p1
    c = p2 - p0
    cross = a[0] * b[1] - a[1] * b[0]
    denom = np.linalg.norm(a) * np.linalg.norm(b) * np.linalg.norm(c)
    return 0.0 if denom <= 0.0 else float(2.0 * cross / denom)


def _quintic_coeffs(
    p0: np.ndarray, v0: np.ndarray, a0: np.ndarray,
    p1: np.ndarray, v1: np.ndarray, a1: np.ndarray,
) -> np.ndarray:
    """Coefficients of the quintic matching (value, first, second derivative)
    at u = 0 and u = 1, rows indexed by power of u."""
    dp = p1 - p0
    return np.stack([
        p0,
        v0,
        0.5 * a0,
        10.0 * dp - 6.0 * v0 - 4.0 * v1 - 1.5 * a0 + 0.5 * a1,
        -15.0 * dp + 8.0 * v0 + 7.0 * v1 + 1.5 * a0 - a1,
        6.0 * dp - 3.0 * (v0 + v1) - 0.5 * a0 + 0.5 * a1,
    ])


def plan_path(waypoints: list[Waypoint], closed: bool | None = None) -> PathSpline:
    """Fit the C2 quintic spline through the waypoints.

    closed=None detects closure from coincident first/last waypoints; True
    wraps the last waypoint back to the first.  Consecutive waypoints must be
    distinct.
    """
    pts = np.array([[w.x, w.y] for w in waypoints], dtype=float)
    if pts.shape[0] >= 2 and np.linalg.norm(pts[-1] - pts[0]) < _COINCIDENT_TOL:
        pts = pts[:-1]
        closed = True if closed is None else closed
    closed = bool(closed)
    n = pts.shape[0]
    if n < 2 or (closed and n < 3):
        raise PlannerError("need at least 2 distinct waypoints (3 for a closed path)")
    nxt = np.roll(pts, -1, axis=0) if closed else pts[1:]
    cur = pts if closed else pts[:-1]
    chords = np.linalg.norm(nxt - cur, axis=1)
    if np.any(chords < _COINCIDENT_TOL):
        raise PlannerError("consecutive waypoints coincide")

    # Node tangents (unit) and curvature vectors in arc length.
    n_seg = n if closed else n - 1
    tang = np.zeros((n, 2))
    curv = np.zeros(n)
    for i in range(n):
        if closed or 0 < i < n - 1:
            prev = pts[(i - 1) % n]
            here = pts[i]
            here_next = pts[(i + 1) % n]
            d = here_next - prev
            curv[i] = _menger_curvature(prev, here, here_next)
        elif i == 0:
            d = pts[1] - pts[0]
        else:
            d = pts[-1] - pts[-2]
        norm = np.linalg.norm(d)
        if norm < _COINCIDENT_TOL:
            raise PlannerError("degenerate turn: neighboring waypoints fold back")
        tang[i] = d / norm
    if not closed and n >= 3:
        # Ends borrow the neighbor's curvature; a 2-point path stays straight.
        curv[0] = _menger_curvature(pts[0], pts[1], pts[2]) if n >= 3 else 0.0
        curv[-1] = _menger_curvature(pts[-3], pts[-2], pts[-1]) if n >= 3 else 0.0
    normal = np.column_stack([-tang[:, 1], tang[:, 0]])
    acc = normal * curv[:, None]                 # d2 p / d s2 at the nodes

    coeffs = np.zeros((n_seg, 6, 2))
    for i in range(n_seg):
        j = (i + 1) % n
        # Parameterize by estimated arc length, not chord: for a circular arc
        # with turn angle phi between the end tangents, arc/chord is
        # phi / (2 sin(phi/2)).  Chord scaling makes the interpolant bulge and
        # biases mid-segment curvature low.
        phi = math.acos(min(max(float(tang[i] @ tang[j]), -1.0), 1.0))
        stretch = 1.0 + phi * phi / 24.0 if phi < 1e-3 else phi / (2.0 * math.sin(0.5 * phi))
        L = chords[i] * stretch
        coeffs[i] = _quintic_coeffs(
            pts[i], tang[i] * L, acc[i] * L * L,      # d/du = d/ds * L
            pts[j], tang[j] * L, acc[j] * L * L,
        )
    return PathSpline(coeffs, closed)


def _segment_targets(waypoints: list[Waypoint], closed: bool, n_seg: int) -> np.ndarray:
    """Per-segment speed cap: the target of the waypoint the segment ends at."""
    targets = np.full(n_seg, np.inf)
    n = len(waypoints)
    for i in range(n_seg):
        end_wp = waypoints[(i + 1) % n if closed else i + 1]
        if end_wp.speed is not None:
            targets[i] = end_wp.speed
    return targets


def speed_profile(
    path: PathSpline,
    constraints: PlannerConstraints,
    waypoints: list[Waypoint] | None = None,
    ds: float = 0.5,
) -> tuple[np.ndarray, np.ndarray]:
    """Speed over arc length: (s_grid, v_grid), both ends pinned.

    The start speed is the first waypoint's target (v_min otherwise); the end
    speed is constraints.end_speed (v_min otherwise), which is how a lap
    slows down at the end of the circuit.
    """
    n_pts = max(int(math.ceil(path.length / ds)) + 1, 8)
    s = np.linspace(0.0, path.length, n_pts)
    kappa = np.array([path.point_at(si)[3] for si in s])

    cap = np.full(n_pts, constraints.v_max)
    bend = np.abs(kappa) > 1e-12
    cap[bend] = np.minimum(
        cap[bend], np.sqrt(constraints.a_lat_max / np.abs(kappa[bend]))
    )
    if waypoints is not None:
        n_seg = path.coeffs.shape[0]
        targets = _segment_targets(waypoints, path.closed, n_seg)
        seg_of = np.searchsorted(path._seg_start, s, side="right") - 1
        seg_of = np.clip(seg_of, 0, n_seg - 1)
        cap = np.minimum(cap, targets[seg_of])
    if np.any(cap < constraints.v_min):
        worst = float(s[np.argmin(cap)])
        raise PlannerError(
            f"curvature rule forces speed below v_min near s = {worst:.1f} m"
        )

    v = cap.copy()
    start = waypoints[0].speed if waypoints and waypoints[0].speed is not None else None
    v[0] = min(v[0], start if start is not None else constraints.v_min)
    end = constraints.end_speed if constraints.end_speed is not None else constraints.v_min
    v[-1] = min(v[-1], end)
    two_a = 2.0 * constraints.a_max
    for i in range(n_pts - 1):                    # forward: acceleration bound
        v[i + 1] = min(v[i + 1], math.sqrt(v[i] * v[i] + two_a * (s[i + 1] - s[i])))
    for i in range(n_pts - 2, -1, -1):            # backward: braking bound
        v[i] = min(v[i], math.sqrt(v[i + 1] * v[i + 1] + two_a * (s[i + 1] - s[i])))
    return s, np.maximum(v, constraints.v_min)


class ReferenceTrajectory:
    """Uniform time samples of the reference at the kinematic period."""

    def __init__(self, ts: float, columns: dict[str, np.ndarray]):
        self.ts = float(ts)
        self.t = columns["t"]
        self.x_d = columns["x_d"]
        self.y_d = columns["y_d"]
        self.theta_d = columns["theta_d"]
        self.v_d = columns["v_d"]
        self.omega_d = columns["omega_d"]
        if not (
            self.t.shape == self.x_d.shape == self.y_d.shape
            == self.theta_d.shape == self.v_d.shape == self.omega_d.shape
        ):
            raise PlannerError("trajectory columns must share one shape")
        if self.t.size < 2:
            raise PlannerError("trajectory needs at least two samples")

    @property
    def horizon(self) -> float:
        return float(self.t[-1])

    def sample(self, t: float) -> ReferencePoint:
        """Interpolated reference at time t; exact at stored timestamps."""
        if t < -1e-9 or t > self.horizon + 1e-9:
            raise PlannerError(f"sample time {t:.3f} outside horizon [0, {self.horizon:.3f}]")
        pos = min(max(t / self.ts, 0.0), float(self.t.size - 1))
        i = min(int(pos), self.t.size - 2)
        lam = pos - i
        dth = normalize_angle(self.theta_d[i + 1] - self.theta_d[i])
        return ReferencePoint(
            t=float(t),
            x_d=float(self.x_d[i] + lam * (self.x_d[i + 1] - self.x_d[i])),
            y_d=float(self.y_d[i] + lam * (self.y_d[i + 1] - self.y_d[i])),
            theta_d=normalize_angle(self.theta_d[i] + lam * dth),
            v_d=float(self.v_d[i] + lam * (self.v_d[i + 1] - self.v_d[i])),
            omega_d=float(self.omega_d[i] + lam * (self.omega_d[i + 1] - self.omega_d[i])),
        )


def sample_reference(trajectory: ReferenceTrajectory, t: float) -> ReferencePoint:
    """Module-level alias of :meth:`ReferenceTrajectory.sample`."""
    return trajectory.sample(t)


def generate_trajectory(
    waypoints: list[Waypoint],
    constraints: PlannerConstraints,
    ts: float = 0.1,
    closed: bool | None = None,
) -> ReferenceTrajectory:
    """Full pipeline: spline, speed profile, uniform time sampling."""
    path = plan_path(waypoints, closed=closed)
    return _trajectory_from_path(path, constraints, waypoints, ts)


def _trajectory_from_path(
    path: PathSpline,
    constraints: PlannerConstraints,
    waypoints: list[Waypoint] | None,
    ts: float,
) -> ReferenceTrajectory:
    if not ts > 0.0:
        raise PlannerError("sample period must be strictly positive")
    s_grid, v_grid = speed_profile(path, constraints, waypoints)

    # Node times via the trapezoid on 1/v; between nodes the motion is exactly
    # the constant-acceleration segment these times imply.
    dt = 2.0 * np.diff(s_grid) / (v_grid[1:] + v_grid[:-1])
    t_nodes = np.concatenate([[0.0], np.cumsum(dt)])
    total = float(t_nodes[-1])
    n_samples = int(math.floor(total / ts + 1e-9)) + 1

    cols = {k: np.zeros(n_samples) for k in ("t", "x_d", "y_d", "theta_d", "v_d", "omega_d")}
    for k in range(n_samples):
        t = k * ts
        i = min(int(np.searchsorted(t_nodes, t, side="right") - 1), t_nodes.size - 2)
        tau = t - t_nodes[i]
        span = t_nodes[i + 1] - t_nodes[i]
        a_seg = (v_grid[i + 1] - v_grid[i]) / span if span > 0.0 else 0.0
        v = v_grid[i] + a_seg * tau
        s = s_grid[i] + v_grid[i] * tau + 0.5 * a_seg * tau * tau
        x, y, theta, kappa = path.point_at(min(s, path.length))
        cols["t"][k] = t
        cols["x_d"][k] = x
        cols["y_d"][k] = y
        cols["theta_d"][k] = theta
        cols["v_d"][k] = v
        cols["omega_d"][k] = float(np.clip(v * kappa, -_OMEGA_LIMIT, _OMEGA_LIMIT))
    return ReferenceTrajectory(ts, cols)


def load_waypoints(path: str) -> list[Waypoint]:
    """Parse a plain-text waypoint table: one `x y [speed]` triple per line.

    Blank lines and `#` comments are skipped; malformed lines raise
    PlannerError with their line number.
    """
    waypoints: list[Waypoint] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise PlannerError(f"{path}:{lineno}: expected `x y [speed]`, got {raw!r}")
            try:
                x, y = float(parts[0]), float(parts[1])
                speed = float(parts[2]) if len(parts) == 3 else None
            except ValueError:
                raise PlannerError(f"{path}:{lineno}: non-numeric waypoint field") from None
            try:
                waypoints.append(Waypoint(x, y, speed))
            except ValueError as exc:
                raise PlannerError(f"{path}:{lineno}: {exc}") from None
    if len(waypoints) < 2:
        raise PlannerError(f"{path}: needs at least 2 waypoints")
    return waypoints


def write_trajectory_csv(trajectory: ReferenceTrajectory, destination: str) -> None:
    """CSV dump with header t,x_d,y_d,theta_d,v_d,omega_d."""
    with open(destination, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,x_d,y_d,theta_d,v_d,omega_d\n")
        for k in range(trajectory.t.size):
            fh.write(
                f"{trajectory.t[k]:.12g},{trajectory.x_d[k]:.12g},"
                f"{trajectory.y_d[k]:.12g},{trajectory.theta_d[k]:.12g},"
                f"{trajectory.v_d[k]:.12g},{trajectory.omega_d[k]:.12g}\n"
            )


_CIRCUIT_RAMP = 20.0          # straight-to-arc curvature ramp length [m]
_CIRCUIT_RAMP_MID = 12.0      # arc-to-arc curvature ramp length [m]
_CIRCUIT_APEX = 6.0           # full-curvature hold through the R12 corner [m]
_CIRCUIT_DS = 0.05            # chain-walk integration step [m]


def _circuit_profile(unknowns: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Curvature-vs-arc-length knots of the default circuit.

    The lap is designed directly in curvature space as a piecewise-linear
    profile, so the geometry is clothoid-blended by construction: a straight,
    a ramp into an R20 hairpin hold, a return straight, a ramp to an R12
    apex, a ramp down to an R35 hold, and a ramp home to the closing
    straight.  The unknowns are (hairpin hold, return length, R35 hold).
    """
    hold1, length2, hold3 = (float(u) for u in unknowns)
    k1, k2, k3 = 1.0 / 20.0, 1.0 / 12.0, 1.0 / 35.0
    segments = [
        (75.0, 0.0, 0.0),
        (_CIRCUIT_RAMP, 0.0, k1),
        (hold1, k1, k1),
        (_CIRCUIT_RAMP, k1, 0.0),
        (length2, 0.0, 0.0),
        (_CIRCUIT_RAMP, 0.0, k2),
        (_CIRCUIT_APEX, k2, k2),
        (_CIRCUIT_RAMP_MID, k2, k3),
        (hold3, k3, k3),
        (_CIRCUIT_RAMP, k3, 0.0),
        (75.0, 0.0, 0.0),
    ]
    knots = [0.0]
    kvals = [0.0]
    for length, k_in, k_out in segments:
        if kvals[-1] != k_in or length <= 0.0:
            raise PlannerError("default circuit profile degenerate")
        knots.append(knots[-1] + length)
        kvals.append(k_out)
    return np.array(knots), np.array(kvals)


def _circuit_chain(
    unknowns: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Integrate the circuit curvature profile: (s, x, y, theta) from the
    origin heading +x.  The lap seam sits mid-straight, so the joined ends
    are curvature-free."""
    knots, kvals = _circuit_profile(unknowns)
    total = float(knots[-1])
    s = np.union1d(np.arange(0.0, total, _CIRCUIT_DS), knots)
    kappa = np.interp(s, knots, kvals)
    ds = np.diff(s)
    theta = np.concatenate([[0.0], np.cumsum(0.5 * (kappa[1:] + kappa[:-1]) * ds)])
    cx = np.cos(theta)
    sy = np.sin(theta)
    x = np.concatenate([[0.0], np.cumsum(0.5 * (cx[1:] + cx[:-1]) * ds)])
    y = np.concatenate([[0.0], np.cumsum(0.5 * (sy[1:] + sy[:-1]) * ds)])
    return s, x, y, theta


def _circuit_closure(unknowns: np.ndarray) -> np.ndarray:
    _, x, y, theta = _circuit_chain(unknowns)
    return np.array([x[-1], y[-1], theta[-1] - 2.0 * math.pi])


def default_circuit_waypoints(spacing: float = 5.0) -> list[Waypoint]:
    """Closed test circuit: a long straight into an R20 hairpin, a return
    straight, then R12 and R35 corners back to the start, every junction
    blended through a linear curvature ramp.  The hairpin length, return
    length and R35 length are solved numerically so the lap closes exactly;
    waypoints are sampled every `spacing` meters along the blended chain.
    """
    import scipy.optimize

    sol = scipy.optimize.fsolve(
        _circuit_closure, x0=np.array([45.0, 165.0, 60.0]), full_output=True
    )
    unknowns, info, ok, _ = sol
    if ok != 1 or np.linalg.norm(info["fvec"]) > 1e-9:
        raise PlannerError("default circuit failed to close")
    if min(float(u) for u in unknowns) <= 1.0:
        raise PlannerError("default circuit geometry degenerate")

    s, x, y, _ = _circuit_chain(unknowns)
    total = float(s[-1])
    n_pts = max(int(round(total / spacing)), 8)
    targets = np.linspace(0.0, total, n_pts, endpoint=False)
    waypoints = [
        Waypoint(float(np.interp(si, s, x)), float(np.interp(si, s, y)))
        for si in targets
    ]
    waypoints.append(Waypoint(0.0, 0.0))   # exact closure marker
    return waypoints


def default_circuit_path(spacing: float = 5.0) -> PathSpline:
    """The default circuit as a spline built from exact chain data.

    Unlike :func:`plan_path`, node tangents and curvatures here come straight
    from the generating curvature profile instead of finite differences of
    waypoint samples, so the reference stays free of estimation ripple.
    """
    import scipy.optimize

    sol = scipy.optimize.fsolve(
        _circuit_closure, x0=np.array([45.0, 165.0, 60.0]), full_output=True
    )
    unknowns, info, ok, _ = sol
    if ok != 1 or np.linalg.norm(info["fvec"]) > 1e-9:
        raise PlannerError("default circuit failed to close")

    s, x, y, theta = _circuit_chain(unknowns)
    knots, kvals = _circuit_profile(unknowns)
    total = float(s[-1])
    n_seg = max(int(round(total / spacing)), 8)
    nodes = np.linspace(0.0, total, n_seg + 1)
    px = np.interp(nodes, s, x)
    py = np.interp(nodes, s, y)
    th = np.interp(nodes, s, theta)
    kap = np.interp(nodes, knots, kvals)
    px[-1], py[-1], th[-1] = px[0], py[0], th[0] + 2.0 * math.pi
    kap[-1] = kap[0]

    coeffs = np.zeros((n_seg, 6, 2))
    for i in range(n_seg):
        L = nodes[i + 1] - nodes[i]
        t0 = np.array([math.cos(th[i]), math.sin(th[i])])
        t1 = np.array([math.cos(th[i + 1]), math.sin(th[i + 1])])
        n0 = np.array([-t0[1], t0[0]])
        n1 = np.array([-t1[1], t1[0]])
        coeffs[i] = _quintic_coeffs(
            np.array([px[i], py[i]]), t0 * L, kap[i] * n0 * L * L,
            np.array([px[i + 1], py[i + 1]]), t1 * L, kap[i + 1] * n1 * L * L,
        )
    return PathSpline(coeffs, closed=True)


def default_circuit_trajectory(
    constraints: PlannerConstraints, ts: float = 0.1, spacing: float = 5.0
) -> ReferenceTrajectory:
    """Reference trajectory for one lap of the default circuit."""
    return _trajectory_from_path(default_circuit_path(spacing), constraints, None, ts)
