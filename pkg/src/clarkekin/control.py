"""Closed-loop displacement control simulated in Clarke space.

The controller maps the measured joint displacements onto the manifold,
forms the two-dimensional error against the desired Clarke coordinates,
applies a proportional gain with reference feedforward (precompensation),
and maps the command back to joint space. Because the command leaves
through the transform's right-inverse it satisfies the displacement
constraint at every tick regardless of measurement noise.

Actuators are modelled as independent first-order lag (PT1) elements,
discretized exactly (zero-order hold), so the loop is unconditionally
stable for any positive time constant and sample time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arcspace import SegmentGeometry
from .clarke import as_clarke, as_displacement, build_transform, projector


@dataclass(frozen=True)
class ControllerConfig:
    """Proportional gain, sample time and segment geometry.

    feedforward=True gives the precompensated law u = xi_d + kp*e; with
    False the plain proportional law u = kp*e is used for comparison.
    """

    kp: float
    dt: float
    geometry: SegmentGeometry
    feedforward: bool = True

    def __post_init__(self):
        if not self.kp > 0.0:
            raise ValueError(f"kp must be positive, got {self.kp}")
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")


@dataclass(frozen=True)
class PT1Plant:
    """First-order lag actuators: per joint, tau*x' + x = u."""

    tau: float
    state: np.ndarray

    def __post_init__(self):
        if not self.tau > 0.0:
            raise ValueError(f"time constant must be positive, got {self.tau}")
        state = np.ascontiguousarray(self.state, dtype=float)
        if state.ndim != 1 or not np.all(np.isfinite(state)):
            raise ValueError("plant state must be a finite vector")
        state.setflags(write=False)
        object.__setattr__(self, "state", state)


@dataclass(frozen=True)
class NoiseModel:
    """Additive measurement noise, uniform on [-epsilon, epsilon] per joint.

    bias adds a constant offset to every measured joint (a calibration
    offset; the controller is invariant to it). quantum > 0 snaps the
    noisy reading to a grid of that resolution before the bias is added,
    the way an encoder count would; 0 disables quantization.
    """

    epsilon: float
    seed: int = 0
    bias: float = 0.0
    quantum: float = 0.0

    def __post_init__(self):
        if self.epsilon < 0.0:
            raise ValueError(f"noise half-width must be non-negative, got {self.epsilon}")
        if self.quantum < 0.0:
            raise ValueError(f"quantum must be non-negative, got {self.quantum}")


@dataclass(frozen=True)
class TrajectorySpec:
    """Waypoints in Clarke space plus symmetric kinematic limits.

    v_max caps the per-coordinate speed (m/s), a_max and d_max the
    per-coordinate acceleration and deceleration (m/s^2). The trajectory
    comes to rest at every waypoint.
    """

    waypoints: tuple
    v_max: float
    a_max: float
    d_max: float

    def __post_init__(self):
        pts = tuple(as_clarke(w) for w in self.waypoints)
        if len(pts) < 2:
            raise ValueError(f"need at least 2 waypoints, got {len(pts)}")
        if not (self.v_max > 0.0 and self.a_max > 0.0 and self.d_max > 0.0):
            raise ValueError("kinematic limits must be positive")
        object.__setattr__(self, "waypoints", pts)


@dataclass(frozen=True)
class SimTrace:
    """Time series of one run: desired, measured, commanded and plant state.

    All four arrays are n x T with one column per tick; time holds the tick
    instants in seconds.
    """

    time: np.ndarray
    rho_desired: np.ndarray
    rho_measured: np.ndarray
    rho_command: np.ndarray
    rho_plant: np.ndarray

    def __post_init__(self):
        t = len(self.time)
        for name in ("rho_desired", "rho_measured", "rho_command", "rho_plant"):
            arr = getattr(self, name)
            if arr.shape[1] != t:
                raise ValueError(f"{name} has {arr.shape[1]} columns for {t} ticks")


def controller_step(cfg: ControllerConfig, xi_desired, rho_measured) -> np.ndarray:
    """One controller evaluation: measured joints in, commanded joints out.

    The measurement is centered before the transform (n*rho - sum(rho),
    rescaled inside the matrix product). Centering changes nothing
    mathematically since the transform annihilates constant vectors, but it
    cancels a shared offset in exact arithmetic instead of leaving it to
    the vanishing row sums of the matrix.
    """
    t = build_transform(cfg.geometry.layout.n)
    xi_d = as_clarke(xi_desired)
    rho_m = as_displacement(rho_measured, t.n)
    centered_scaled = t.n * rho_m - rho_m.sum()
    xi_m = (t.forward @ centered_scaled) / t.n
    error = xi_d - xi_m
    xi_cmd = xi_d + cfg.kp * error if cfg.feedforward else cfg.kp * error
    return t.inverse @ xi_cmd


def plant_step(plant: PT1Plant, command, dt: float) -> PT1Plant:
    """Advance the PT1 actuators by dt under a held command.

    Exact zero-order-hold discretization x+ = a*x + (1-a)*u with
    a = exp(-dt/tau); stable for every dt, tau > 0.
    """
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    u = as_displacement(command, len(plant.state))
    a = math.exp(-dt / plant.tau)
    return PT1Plant(tau=plant.tau, state=a * plant.state + (1.0 - a) * u)


def _profile_durations(length: float, v: float, a: float, d: float) -> tuple[float, float, float, float]:
    # Rest-to-rest scalar profile over `length`: returns accel, cruise and
    # decel durations plus the peak speed (trapezoid, or triangle when the
    # ramps meet before cruise speed is reached).
    ramp = v * v / (2.0 * a) + v * v / (2.0 * d)
    if length >= ramp:
        peak = v
        cruise = (length - ramp) / v
    else:
        peak = math.sqrt(2.0 * length * a * d / (a + d))
        cruise = 0.0
    return peak / a, cruise, peak / d, peak


def _profile_position(t: float, t_acc: float, t_cruise: float, t_dec: float, peak: float, a: float, d: float, length: float) -> float:
    total = t_acc + t_cruise + t_dec
    if t <= 0.0:
        return 0.0
    if t >= total:
        return length
    if t < t_acc:
        return 0.5 * a * t * t
    if t < t_acc + t_cruise:
        return 0.5 * a * t_acc * t_acc + peak * (t - t_acc)
    remaining = total - t
    return length - 0.5 * d * remaining * remaining


def generate_trajectory(layout, spec: TrajectorySpec, dt: float) -> np.ndarray:
    """Joint-space reference through the waypoints, one column per tick.

    Between consecutive waypoints the Clarke coordinates move on a straight
    line under a trapezoidal speed profile, scaled so that the faster
    coordinate exactly respects v_max/a_max/d_max. Each leg is stretched to
    a whole number of ticks (never violating the limits) and ends at rest.
    The result is mapped to joints through the right-inverse, so every
    column lies on the manifold.
    """
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    t = build_transform(layout)
    xi_cols = [np.asarray(spec.waypoints[0], dtype=float)]
    for start, goal in zip(spec.waypoints[:-1], spec.waypoints[1:]):
        delta = goal - start
        length = float(np.max(np.abs(delta)))
        if length == 0.0:
            xi_cols.append(goal.copy())
            continue
        t_acc, t_cruise, t_dec, peak = _profile_durations(length, spec.v_max, spec.a_max, spec.d_max)
        total = t_acc + t_cruise + t_dec
        ticks = max(1, math.ceil(total / dt - 1e-12))
        dilation = total / (ticks * dt)
        for j in range(1, ticks + 1):
            s = _profile_position(
                min(j * dt * dilation, total), t_acc, t_cruise, t_dec, peak, spec.a_max, spec.d_max, length
            )
            xi_cols.append(start + (s / length) * delta)
    xi = np.column_stack(xi_cols)
    return t.inverse @ xi


def run_simulation(
    cfg: ControllerConfig,
    plant: PT1Plant,
    noise: NoiseModel,
    trajectory: np.ndarray,
    closed_loop: bool = True,
) -> SimTrace:
    """Simulate the loop tick by tick over a joint-space reference.

    Per tick: measure (plant state, noise draw, optional quantization, then
    bias), evaluate the controller, advance the plant. closed_loop=False
    feeds the reference straight to the actuators instead, for open-loop
    comparisons. Deterministic for a given noise seed.
    """
    n = cfg.geometry.layout.n
    t = build_transform(n)
    trajectory = np.asarray(trajectory, dtype=float)
    if trajectory.ndim != 2 or trajectory.shape[0] != n:
        raise ValueError(f"trajectory must be n x T with n={n}, got {trajectory.shape}")
    ticks = trajectory.shape[1]
    if ticks == 0:
        state = plant.state
        rest = t.inverse @ (t.forward @ state)
        col = state.reshape(n, 1)
        return SimTrace(
            time=np.array([0.0]),
            rho_desired=rest.reshape(n, 1),
            rho_measured=col.copy(),
            rho_command=rest.reshape(n, 1).copy(),
            rho_plant=col.copy(),
        )
    rng = np.random.Generator(np.random.PCG64(noise.seed))
    measured = np.empty((n, ticks))
    command = np.empty((n, ticks))
    plant_states = np.empty((n, ticks))
    for i in range(ticks):
        reading = plant.state + rng.uniform(-noise.epsilon, noise.epsilon, n)
        if noise.quantum > 0.0:
            reading = np.round(reading / noise.quantum) * noise.quantum
        reading = reading + noise.bias
        rho_d = trajectory[:, i]
        if closed_loop:
            cmd = controller_step(cfg, t.forward @ rho_d, reading)
        else:
            cmd = rho_d
        plant = plant_step(plant, cmd, cfg.dt)
        measured[:, i] = reading
        command[:, i] = cmd
        plant_states[:, i] = plant.state
    return SimTrace(
        time=cfg.dt * np.arange(ticks),
        rho_desired=trajectory.copy(),
        rho_measured=measured,
        rho_command=command,
        rho_plant=plant_states,
    )


def clarke_tracking_rms(trace: SimTrace, transform_) -> float:
    """RMS of the Clarke-space error between desired and plant displacement."""
    err = transform_.forward @ (trace.rho_desired - trace.rho_plant)
    return float(np.sqrt(np.mean(np.sum(err * err, axis=0))))


@dataclass(frozen=True)
class NoisePropagationReport:
    """How a single-joint measurement error spreads over all joints.

    spread is the manifold projection of sigma at joint `joint_index`; its
    entries follow (2*sigma/n)*cos(psi_i - psi_k). norm_ratio is the
    measured |spread|^2 / sigma^2, equal to 2/n for the amplitude-invariant
    matrix pair used here. norm_ratio_unscaled (n/2) is the value the same
    construction yields without the 2/n amplitude normalization of the
    forward matrix; it is reported for comparison only.
    """

    n: int
    joint_index: int
    sigma: float
    spread: np.ndarray
    peak: float
    squared_norm: float
    norm_ratio: float
    norm_ratio_closed_form: float
    norm_ratio_unscaled: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "joint_index": self.joint_index,
            "sigma": self.sigma,
            "spread": [float(v) for v in self.spread],
            "peak": self.peak,
            "squared_norm": self.squared_norm,
            "norm_ratio": self.norm_ratio,
            "norm_ratio_closed_form": self.norm_ratio_closed_form,
            "norm_ratio_unscaled": self.norm_ratio_unscaled,
        }


def noise_propagation(layout, sigma: float, joint_index: int) -> NoisePropagationReport:
    """Project a single-joint error of size sigma onto the manifold.

    Raises if the measured squared-norm ratio deviates from the closed form
    2/n by more than 1e-12, which would indicate a broken transform pair.
    """
    t = build_transform(layout)
    if not 0 <= joint_index < t.n:
        raise ValueError(f"joint index must be in [0, {t.n}), got {joint_index}")
    fault = np.zeros(t.n)
    fault[joint_index] = sigma
    spread = projector(t) @ fault
    squared = float(spread @ spread)
    ratio = squared / (sigma * sigma) if sigma != 0.0 else 0.0
    closed_form = 2.0 / t.n
    if sigma != 0.0 and abs(ratio - closed_form) > 1e-12:
        raise AssertionError(f"norm ratio {ratio} deviates from closed form {closed_form}")
    return NoisePropagationReport(
        n=t.n,
        joint_index=joint_index,
        sigma=sigma,
        spread=spread,
        peak=float(spread[joint_index]),
        squared_norm=squared,
        norm_ratio=ratio,
        norm_ratio_closed_form=closed_form,
        norm_ratio_unscaled=t.n / 2.0,
    )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_trace_csv(trace: SimTrace, path) -> None:
    """Columns t, rho_d_1..n, rho_m_1..n, rho_cmd_1..n, rho_plant_1..n."""
    n = trace.rho_desired.shape[0]
    header = ["t"]
    for prefix in ("rho_d", "rho_m", "rho_cmd", "rho_plant"):
        header += [f"{prefix}_{i + 1}" for i in range(n)]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for i, ti in enumerate(trace.time):
            row = [_fmt(ti)]
            for arr in (trace.rho_desired, trace.rho_measured, trace.rho_command, trace.rho_plant):
                row += [_fmt(v) for v in arr[:, i]]
            fh.write(",".join(row) + "\n")


def trace_to_dict(trace: SimTrace) -> dict:
    return {
        "t": [float(v) for v in trace.time],
        "rho_desired": trace.rho_desired.tolist(),
        "rho_measured": trace.rho_measured.tolist(),
        "rho_command": trace.rho_command.tolist(),
        "rho_plant": trace.rho_plant.tolist(),
    }


def load_trace_csv(path) -> SimTrace:
    """Read a trace CSV back (lossless at 17 significant digits)."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [[float(v) for v in line.split(",")] for line in fh if line.strip()]
    n = (len(header) - 1) // 4
    data = np.array(rows).T
    return SimTrace(
        time=data[0],
        rho_desired=data[1 : 1 + n],
        rho_measured=data[1 + n : 1 + 2 * n],
        rho_command=data[1 + 2 * n : 1 + 3 * n],
        rho_plant=data[1 + 3 * n :],
    )
