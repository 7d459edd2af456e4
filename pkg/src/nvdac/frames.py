"""Anvil-tip stress model and rotations into the four NV frames.

Everything here works in the cubic crystal frame of the diamond anvil.
The anvil compression axis is identified with the third cube axis, so the
anvil-tip stress tensor is diag(alpha*P, alpha*P, P): normal stress equal
to the chamber pressure P, tangential stress reduced by the anisotropy
factor alpha (alpha = 1 is hydrostatic).  Off-diagonal shear components
are neglected.

The four NV orientations lie along the <111> cube diagonals.  Each NV
frame takes z along its axis and x along the projection of a cube axis
onto the plane perpendicular to it; the four frames are transported into
each other by the 180-degree rotations about the cube axes, which keeps
the spin-stress functional of nvdac.spin valid in every frame.
"""

from dataclasses import dataclass

import numpy as np

from .spin import NvFrameInputs
from .validation import as_matrix3, as_vector3, check_symmetric, check_unit_vector, readonly

_S2, _S3, _S6 = np.sqrt(2.0), np.sqrt(3.0), np.sqrt(6.0)

# Frame of the [111] NV: rows are the NV x, y, z axes in cubic coordinates.
_R111 = np.array([
    [-1 / _S6, -1 / _S6, 2 / _S6],
    [1 / _S2, -1 / _S2, 0.0],
    [1 / _S3, 1 / _S3, 1 / _S3],
])

# Crystal two-fold rotations transporting [111] onto the other three axes.
_TRANSPORT = (
    ("111", np.diag([1.0, 1.0, 1.0])),
    ("1-1-1", np.diag([1.0, -1.0, -1.0])),
    ("-11-1", np.diag([-1.0, 1.0, -1.0])),
    ("-1-11", np.diag([-1.0, -1.0, 1.0])),
)


@dataclass(frozen=True)
class AnvilStressParams:
    """Anvil-tip stress model: tangential ratio alpha and pressure in GPa."""

    alpha: float
    pressure: float

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.5:
            raise ValueError(f"alpha must be in (0, 1.5], got {self.alpha}")
        if not self.pressure >= 0.0:
            raise ValueError(f"pressure must be >= 0, got {self.pressure}")


@dataclass(frozen=True)
class NvOrientation:
    """One <111> NV axis with its cubic-to-NV rotation matrix."""

    label: str
    rotation: np.ndarray

    def __post_init__(self):
        rot = as_matrix3(self.rotation, "rotation")
        if np.abs(rot @ rot.T - np.eye(3)).max() > 1e-12:
            raise ValueError("rotation must be orthogonal to 1e-12")
        if abs(np.linalg.det(rot) - 1.0) > 1e-12:
            raise ValueError("rotation must have determinant +1")
        object.__setattr__(self, "rotation", readonly(rot))

    @property
    def axis(self):
        """The NV axis (NV-frame z) as a unit vector in cubic coordinates."""
        return self.rotation[2]


@dataclass(frozen=True)
class LabField:
    """Applied magnetic field: magnitude in mT and unit direction in the cubic frame."""

    magnitude: float
    direction: np.ndarray = (1.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.magnitude >= 0.0:
            raise ValueError(f"magnitude must be >= 0, got {self.magnitude}")
        direction = as_vector3(self.direction, "direction")
        check_unit_vector(direction, 1e-12, "direction")
        object.__setattr__(self, "direction", readonly(direction))

    @property
    def vector(self):
        return self.magnitude * self.direction


def anvil_stress(params):
    """Cubic-frame stress tensor diag(alpha*P, alpha*P, P) at the anvil tip."""
    s = params.alpha * params.pressure
    return np.diag([s, s, params.pressure])


def nv_orientations():
    """The four NV orientations in a fixed, documented order."""
    return tuple(
        NvOrientation(label, _R111 @ q) for label, q in _TRANSPORT
    )


def to_nv_frame(orientation, stress, field):
    """Rotate a cubic-frame stress tensor and lab field into one NV frame."""
    stress = as_matrix3(stress, "stress")
    check_symmetric(stress, 1e-12, "stress")
    r = orientation.rotation
    stress_nv = r @ stress @ r.T
    # enforce exact symmetry lost to rounding in the triple product
    stress_nv = 0.5 * (stress_nv + stress_nv.T)
    field_nv = r @ field.vector
    return NvFrameInputs(stress_nv=stress_nv, field_nv=field_nv)
