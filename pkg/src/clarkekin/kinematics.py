"""Closed-form kinematics of a single constant-curvature segment.

Two mappings compose into the kinematics: the robot-dependent mapping
between joint displacements and arc parameters (f_dep, f_dep_inverse),
which is linear in the curvature components, and the robot-independent
mapping between arc parameters and the tip pose (f_ind, f_ind_inverse).

The tip frame convention is R = Rz(theta) @ Ry(kappa*l): the frame is
rotated into the bending plane, so R is the identity only under the
straight-segment convention theta(kappa=0) = 0.

fk_direct composes both mappings without ever branching on the curvature;
an epsilon-regularization keeps every expression defined at rho = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arcspace import CurvatureAngle, CurvatureCurvature, SegmentGeometry, _as_car
from .clarke import ClarkeTransform, as_displacement, build_transform

# Targets with p_z at or below this height (meters) are rejected: the tip of
# a forward-bending constant-curvature segment never reaches the p_z <= 0
# half-space, and the pose formulas divide by p_z.
POSITION_Z_FLOOR = 1e-9

# Manifold residual accepted by f_dep_curvature_angle before it refuses
# to interpret a displacement vector as a constant-curvature bend.
MANIFOLD_TOL = 1e-9

_I3 = np.eye(3)
_I3.setflags(write=False)


@dataclass(frozen=True)
class RegularizationConfig:
    """Additive epsilon (meters) applied to the displacement norm in fk_direct."""

    epsilon: float = 1e-12

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class Pose:
    """Tip pose: 3x3 rotation matrix and position vector in meters."""

    rotation: np.ndarray
    position: np.ndarray

    def __post_init__(self):
        rotation = np.ascontiguousarray(self.rotation, dtype=float)
        position = np.ascontiguousarray(self.position, dtype=float)
        if rotation.shape != (3, 3) or position.shape != (3,):
            raise ValueError("pose needs a 3x3 rotation and a 3-vector position")
        if np.max(np.abs(rotation.T @ rotation - _I3)) > 1e-9:
            raise ValueError("rotation matrix is not orthonormal")
        if abs(np.linalg.det(rotation) - 1.0) > 1e-9:
            raise ValueError("rotation matrix must have determinant +1")
        rotation.setflags(write=False)
        position.setflags(write=False)
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "position", position)


def _transform_for(geom: SegmentGeometry) -> ClarkeTransform:
    return build_transform(geom.layout.n)


def f_dep_inverse(geom: SegmentGeometry, arc) -> np.ndarray:
    """Displacements realizing an arc: rho = d*l*inverse @ [kappa_x, kappa_y].

    Accepts either arc representation; the result lies on the displacement
    manifold and is linear in the curvature components.
    """
    t = _transform_for(geom)
    if isinstance(arc, CurvatureCurvature):
        kx, ky = arc.kappa_x, arc.kappa_y
    else:
        ca = _as_car(arc)
        kx = ca.kappa * math.cos(ca.theta)
        ky = ca.kappa * math.sin(ca.theta)
    return geom.layout.d * geom.l * (t.inverse @ np.array([kx, ky]))


def f_dep(geom: SegmentGeometry, rho) -> CurvatureCurvature:
    """Curvature components of a displacement vector: (1/(d*l)) * forward @ rho.

    For rho off the manifold this equals f_dep of the projected vector,
    by linearity.
    """
    t = _transform_for(geom)
    rho = as_displacement(rho, t.n)
    kxy = (t.forward @ rho) / (geom.layout.d * geom.l)
    return CurvatureCurvature(kappa_x=float(kxy[0]), kappa_y=float(kxy[1]))


def f_dep_curvature_angle(geom: SegmentGeometry, rho) -> CurvatureAngle:
    """Curvature and bending-plane angle of an on-manifold displacement vector.

    kappa = sqrt(2*n)/(d*l*n) * |rho| and theta = atan2 of the Clarke
    coordinates; theta = 0 when rho = 0. Rejects vectors whose projector
    residual exceeds MANIFOLD_TOL, because the norm-based curvature formula
    is only valid on the manifold.
    """
    t = _transform_for(geom)
    rho = as_displacement(rho, t.n)
    residual = float(np.max(np.abs(t.inverse @ (t.forward @ rho) - rho)))
    if residual > MANIFOLD_TOL:
        raise ValueError(
            f"displacement vector is off the manifold: projector residual "
            f"{residual:.3e} exceeds {MANIFOLD_TOL:.1e}"
        )
    n = t.n
    d = geom.layout.d
    kappa = math.sqrt(2.0 * n) / (d * geom.l * n) * float(np.linalg.norm(rho))
    xi = t.forward @ rho
    theta = math.atan2(xi[1], xi[0])
    return CurvatureAngle(kappa=kappa, theta=theta)


def f_ind(geom: SegmentGeometry, arc) -> Pose:
    """Tip pose of a constant-curvature bend of length l.

    For kappa > 0 the tip sits on a circular arc of radius 1/kappa in the
    bending plane; kappa = 0 yields the straight pose (identity rotation,
    position (0, 0, l)).
    """
    ca = _as_car(arc)
    l = geom.l
    if ca.kappa == 0.0:
        return Pose(rotation=np.eye(3), position=np.array([0.0, 0.0, l]))
    phi = ca.kappa * l
    ct, st = math.cos(ca.theta), math.sin(ca.theta)
    cp, sp = math.cos(phi), math.sin(phi)
    bow = (1.0 - cp) / ca.kappa
    position = np.array([ct * bow, st * bow, sp / ca.kappa])
    rotation = np.array(
        [
            [ct * cp, -st, ct * sp],
            [st * cp, ct, st * sp],
            [-sp, 0.0, cp],
        ]
    )
    return Pose(rotation=rotation, position=position)


def fk_direct(geom: SegmentGeometry, rho, reg: RegularizationConfig | None = None) -> Pose:
    """Forward kinematics straight from displacements, with no branch on kappa.

    Every quantity is derived from the regularized Clarke amplitude
    A = |xi + (delta, 0)| + delta^2 with delta the Clarke-space image of the
    configured epsilon. The nudge along +x pins the straight configuration
    to theta = 0, so rho = 0 evaluates to the straight pose without any
    conditional; the introduced error is linear in epsilon.
    """
    eps = (reg or RegularizationConfig()).epsilon
    t = _transform_for(geom)
    rho = as_displacement(rho, t.n)
    d = geom.layout.d
    l = geom.l

    xi = t.forward @ rho
    delta = math.sqrt(2.0 / t.n) * eps
    w_re = xi[0] + delta
    w_im = xi[1]
    amp = math.hypot(w_re, w_im) + delta * delta
    ct = w_re / amp
    st = w_im / amp
    phi = amp / d
    cp = math.cos(phi)
    sp = math.sin(phi)
    inv_kappa = d * l / amp
    bow = (1.0 - cp) * inv_kappa
    position = np.array([ct * bow, st * bow, sp * inv_kappa])
    rotation = np.array(
        [
            [ct * cp, -st, ct * sp],
            [st * cp, ct, st * sp],
            [-sp, 0.0, cp],
        ]
    )
    return Pose(rotation=rotation, position=position)


def _classify_target(target) -> tuple[str, np.ndarray | Pose]:
    if isinstance(target, Pose):
        return "pose", target
    arr = np.asarray(target, dtype=float)
    if arr.shape == (3,):
        return "position", arr
    if arr.shape == (3, 3):
        return "rotation", arr
    raise TypeError(
        "target must be a position (3,), a rotation (3, 3), or a Pose, "
        f"got shape {getattr(arr, 'shape', None)}"
    )


def _check_position_target(p: np.ndarray) -> None:
    if float(np.dot(p, p)) == 0.0:
        raise ValueError("target position at the origin is prohibited")
    if p[2] <= POSITION_Z_FLOOR:
        raise ValueError(
            f"target p_z={p[2]:.3e} is in the prohibited region: the reachable "
            f"workspace requires p_z > {POSITION_Z_FLOOR:.1e} m"
        )


def _check_rotation_target(r: np.ndarray) -> None:
    if np.max(np.abs(r.T @ r - _I3)) > 1e-9 or abs(np.linalg.det(r) - 1.0) > 1e-9:
        raise ValueError("target rotation matrix is not a valid rotation")


def f_ind_inverse(geom: SegmentGeometry, target) -> CurvatureCurvature:
    """Arc curvatures reaching a task-space target.

    The target may be a tip position (3-vector), a tip rotation (3x3), or a
    full Pose. Positions with p_z at or below POSITION_Z_FLOOR, and the
    origin, are rejected as unreachable.
    """
    kind, data = _classify_target(target)
    l = geom.l
    if kind == "position":
        p = data
        _check_position_target(p)
        s = float(p[0] * p[0] + p[1] * p[1] + p[2] * p[2])
        return CurvatureCurvature(kappa_x=2.0 * p[0] / s, kappa_y=2.0 * p[1] / s)
    if kind == "rotation":
        r = data
        _check_rotation_target(r)
        phi = math.atan2(-r[2, 0], r[2, 2])
        # r12 = -sin(theta) and r22 = cos(theta) in this frame convention,
        # hence the minus sign on the kappa_y numerator.
        return CurvatureCurvature(kappa_x=r[1, 1] * phi / l, kappa_y=-r[0, 1] * phi / l)
    pose = data
    _check_rotation_target(pose.rotation)
    _check_position_target(pose.position)
    r = pose.rotation
    pz = pose.position[2]
    return CurvatureCurvature(
        kappa_x=-r[2, 0] * r[1, 1] / pz,
        kappa_y=r[2, 0] * r[0, 1] / pz,
    )


def ik(geom: SegmentGeometry, target) -> np.ndarray:
    """Closed-form inverse kinematics to a position, rotation, or pose target.

    Returns the displacement vector on the manifold that reproduces the
    target under fk_direct. A rotation-only target fixes the bending plane
    and the product kappa*l but not the segment length; the returned
    displacements are independent of l.
    """
    kind, data = _classify_target(target)
    t = _transform_for(geom)
    d = geom.layout.d
    l = geom.l
    if kind == "position":
        p = data
        _check_position_target(p)
        s = float(p[0] * p[0] + p[1] * p[1] + p[2] * p[2])
        return (2.0 * d * l / s) * (t.inverse @ np.array([p[0], p[1]]))
    if kind == "rotation":
        r = data
        _check_rotation_target(r)
        phi = math.atan2(-r[2, 0], r[2, 2])
        return d * phi * (t.inverse @ np.array([r[1, 1], -r[0, 1]]))
    pose = data
    _check_rotation_target(pose.rotation)
    _check_position_target(pose.position)
    r = pose.rotation
    pz = pose.position[2]
    return (-d * l * r[2, 0] / pz) * (t.inverse @ np.array([r[1, 1], -r[0, 1]]))


def recover_pose_from_position(geom: SegmentGeometry, p) -> Pose:
    """Reconstruct the full tip pose from the tip position alone.

    The four trigonometric building blocks of the rotation follow in closed
    form from p: with r = hypot(p_x, p_y) and s = |p|^2,

        cos(theta) = p_x / r          sin(theta) = p_y / r
        sin(kappa*l) = 2*p_z*r / s    cos(kappa*l) = (p_z^2 - r^2) / s.

    Positions on the z-axis take the straight-segment convention R = I.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (3,):
        raise ValueError(f"position must have shape (3,), got {p.shape}")
    _check_position_target(p)
    r = math.hypot(p[0], p[1])
    if r == 0.0:
        return Pose(rotation=np.eye(3), position=p)
    s = float(p[0] * p[0] + p[1] * p[1] + p[2] * p[2])
    ct = p[0] / r
    st = p[1] / r
    sp = 2.0 * p[2] * r / s
    cp = (p[2] * p[2] - r * r) / s
    rotation = np.array(
        [
            [ct * cp, -st, ct * sp],
            [st * cp, ct, st * sp],
            [-sp, 0.0, cp],
        ]
    )
    return Pose(rotation=rotation, position=p)
