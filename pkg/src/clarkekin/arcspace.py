"""Arc-space representations of a constant-curvature segment.

Four equivalent parameterizations are in use for a bent segment of fixed
length l: curvature-angle (kappa, theta), curvature-curvature
(kappa_x, kappa_y), angle-angle (phi, theta) with phi = kappa*l, and the
pair (kappa*cos(theta), kappa*sin(theta)) which is the curvature-curvature
form written out. Conversions route through the curvature-angle form.

Convention: kappa >= 0 with theta covering the full circle, and theta = 0
for a straight segment (kappa = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clarke import JointLayout, as_clarke


@dataclass(frozen=True)
class CurvatureAngle:
    """Curvature kappa (1/m, >= 0) and bending-plane angle theta (rad)."""

    kappa: float
    theta: float

    def __post_init__(self):
        if not math.isfinite(self.kappa) or not math.isfinite(self.theta):
            raise ValueError("arc parameters must be finite")
        if self.kappa < 0.0:
            raise ValueError(f"curvature must be non-negative, got {self.kappa}")


@dataclass(frozen=True)
class CurvatureCurvature:
    """Cartesian curvature components (1/m), unconstrained sign."""

    kappa_x: float
    kappa_y: float

    def __post_init__(self):
        if not math.isfinite(self.kappa_x) or not math.isfinite(self.kappa_y):
            raise ValueError("curvature components must be finite")


@dataclass(frozen=True)
class AngleAngle:
    """Bending angle phi = kappa*l (rad, >= 0) and plane angle theta (rad)."""

    phi: float
    theta: float

    def __post_init__(self):
        if not math.isfinite(self.phi) or not math.isfinite(self.theta):
            raise ValueError("arc angles must be finite")
        if self.phi < 0.0:
            raise ValueError(f"bending angle must be non-negative, got {self.phi}")


@dataclass(frozen=True)
class SegmentGeometry:
    """Joint layout plus the constant segment length l (m)."""

    layout: JointLayout
    l: float

    def __post_init__(self):
        if not self.l > 0.0:
            raise ValueError(f"segment length must be positive, got {self.l}")


def ccr_to_car(cc: CurvatureCurvature) -> CurvatureAngle:
    """Curvature-curvature to curvature-angle.

    (0, 0) maps to (0, 0): a straight segment carries theta = 0.
    """
    kappa = math.hypot(cc.kappa_x, cc.kappa_y)
    theta = math.atan2(cc.kappa_y, cc.kappa_x)
    return CurvatureAngle(kappa=kappa, theta=theta)


def car_to_ccr(ca: CurvatureAngle) -> CurvatureCurvature:
    """Curvature-angle to curvature-curvature: (kappa*cos, kappa*sin)."""
    return CurvatureCurvature(
        kappa_x=ca.kappa * math.cos(ca.theta),
        kappa_y=ca.kappa * math.sin(ca.theta),
    )


def car_to_aar(ca: CurvatureAngle, l: float) -> AngleAngle:
    """Curvature-angle to angle-angle via phi = kappa*l."""
    if not l > 0.0:
        raise ValueError(f"segment length must be positive, got {l}")
    return AngleAngle(phi=ca.kappa * l, theta=ca.theta)


def aar_to_car(aa: AngleAngle, l: float) -> CurvatureAngle:
    """Angle-angle to curvature-angle via kappa = phi/l."""
    if not l > 0.0:
        raise ValueError(f"segment length must be positive, got {l}")
    return CurvatureAngle(kappa=aa.phi / l, theta=aa.theta)


def _as_car(arc) -> CurvatureAngle:
    if isinstance(arc, CurvatureAngle):
        return arc
    if isinstance(arc, CurvatureCurvature):
        return ccr_to_car(arc)
    raise TypeError(f"expected CurvatureAngle or CurvatureCurvature, got {type(arc).__name__}")


def clarke_from_arc(geom: SegmentGeometry, arc) -> np.ndarray:
    """Clarke coordinates of a constant-curvature bend.

    rho_re = d*l*kappa*cos(theta) and rho_im = d*l*kappa*sin(theta); the
    magnitude of the pair is the virtual displacement d*l*kappa. Accepts
    either arc representation.
    """
    d = geom.layout.d
    if isinstance(arc, CurvatureCurvature):
        return d * geom.l * np.array([arc.kappa_x, arc.kappa_y])
    ca = _as_car(arc)
    scale = d * geom.l * ca.kappa
    return np.array([scale * math.cos(ca.theta), scale * math.sin(ca.theta)])


def arc_from_clarke(geom: SegmentGeometry, xi) -> CurvatureAngle:
    """Arc parameters of the bend encoded by Clarke coordinates.

    kappa = |xi| / (d*l) and theta = atan2(rho_im, rho_re); the origin maps
    to the straight segment (0, 0).
    """
    xi = as_clarke(xi)
    kappa = math.hypot(xi[0], xi[1]) / (geom.layout.d * geom.l)
    theta = math.atan2(xi[1], xi[0])
    return CurvatureAngle(kappa=kappa, theta=theta)


def virtual_displacement(geom: SegmentGeometry, ca: CurvatureAngle) -> tuple[float, float, float]:
    """Virtual displacement of a bend and its two plane projections.

    Returns (total, proj_x, proj_y) in meters where total = d*l*kappa is the
    maximum displacement, lying in the bending plane, and the projections
    onto the xz- and yz-planes equal the Clarke coordinates. Always
    satisfies total^2 = proj_x^2 + proj_y^2.
    """
    total = geom.layout.d * geom.l * ca.kappa
    return total, total * math.cos(ca.theta), total * math.sin(ca.theta)
