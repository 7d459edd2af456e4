"""Ground-state spin Hamiltonian of the NV center under stress and magnetic field.

The NV ground state is an S = 1 triplet. In the frame of a single NV center
(z along the N-V axis) the Hamiltonian used throughout this package is

    H = (D + Mz) Sz^2 + Mx (Sy^2 - Sx^2) + My (Sx Sy + Sy Sx) + gamma_e B . S

with the three stress projections Mz, Mx, My linear in the NV-frame stress
tensor.  Optionally the axial-transverse mixing terms
Nx {Sx, Sz} + Ny {Sy, Sz} are added; they move the transition frequencies
only at second order in 1/D and are off by default.

Units are fixed package-wide: frequencies in MHz, stress in GPa, magnetic
field in mT.
"""

from dataclasses import dataclass

import numpy as np

from .validation import (
    as_matrix3,
    as_vector3,
    check_hermitian,
    check_symmetric,
    readonly,
)

_SQRT2 = np.sqrt(2.0)

# Spin-1 operators in the basis (|+1>, |0>, |-1>); index 1 is m_s = 0.
S_X = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / _SQRT2
S_Y = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex) / _SQRT2
S_Z = np.diag([1.0, 0.0, -1.0]).astype(complex)

_SZ2 = S_Z @ S_Z
_E1 = S_Y @ S_Y - S_X @ S_X          # Sy^2 - Sx^2
_E2 = S_X @ S_Y + S_Y @ S_X          # {Sx, Sy}
_A1 = S_X @ S_Z + S_Z @ S_X          # {Sx, Sz}
_A2 = S_Y @ S_Z + S_Z @ S_Y          # {Sy, Sz}
for _m in (S_X, S_Y, S_Z, _SZ2, _E1, _E2, _A1, _A2):
    _m.setflags(write=False)

# All eigenvalue gaps below this are reported as a fully degenerate triple.
DEGENERACY_TOLERANCE_MHZ = 1e-6


@dataclass(frozen=True)
class ZfsParams:
    """Zero-field splitting and gyromagnetic ratio of the ground triplet.

    d_zero is the m_s = 0 to m_s = +-1 separation at zero field and zero
    stress (2870 MHz); gamma_e converts mT to MHz (g ~ 2.003).
    """

    d_zero: float = 2870.0
    gamma_e: float = 28.024

    def __post_init__(self):
        if not self.d_zero > 0:
            raise ValueError("d_zero must be > 0")
        if not self.gamma_e > 0:
            raise ValueError("gamma_e must be > 0")


@dataclass(frozen=True)
class StressCouplings:
    """Spin-stress coupling constants, MHz/GPa.

    Defaults are the commonly used experimental values for the NV ground
    state.  a1 and a2 set the hydrostatic shift of the m_s = +-1 manifold,
    b and c the splitting within it.  The sign convention is fixed by this
    package's NV frame definition (see nvdac.frames); sign conventions for
    a2, b, c vary between sources, so override all four together.

    include_spin_half_mixing adds the {Sx,Sz}/{Sy,Sz} terms, reusing b and
    c as their coupling strengths.  These terms only enter the transition
    frequencies at second order in 1/D and are off by default.
    """

    a1: float = 4.86
    a2: float = -3.7
    b: float = -2.3
    c: float = 3.5
    include_spin_half_mixing: bool = False

    def __post_init__(self):
        for name in ("a1", "a2", "b", "c"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"coupling {name} must be finite")
        if not self.a1 > 0:
            raise ValueError("a1 must be > 0")


@dataclass(frozen=True)
class NvFrameInputs:
    """Stress tensor (GPa) and magnetic field vector (mT) in one NV frame."""

    stress_nv: np.ndarray
    field_nv: np.ndarray

    def __post_init__(self):
        stress = as_matrix3(self.stress_nv, "stress_nv")
        check_symmetric(stress, 1e-12, "stress_nv")
        field = as_vector3(self.field_nv, "field_nv")
        object.__setattr__(self, "stress_nv", readonly(stress))
        object.__setattr__(self, "field_nv", readonly(field))


@dataclass(frozen=True)
class TransitionPair:
    """The two microwave transition frequencies out of the m_s = 0 state, MHz."""

    nu_minus: float
    nu_plus: float

    def __post_init__(self):
        if self.nu_plus < self.nu_minus:
            raise ValueError("nu_plus must be >= nu_minus")

    @property
    def center(self):
        return 0.5 * (self.nu_minus + self.nu_plus)

    @property
    def splitting(self):
        return self.nu_plus - self.nu_minus

    @property
    def is_degenerate(self):
        """True for a fully collapsed spectrum (all gaps below tolerance)."""
        return self.nu_plus < DEGENERACY_TOLERANCE_MHZ


def stress_projections(couplings, stress_nv):
    """Project an NV-frame stress tensor onto the spin operators.

    Returns (Mz, Mx, My) in MHz.  The functionals are the trigonal-symmetry
    form expressed in NV-frame components, with the NV x axis along the
    projection of a cube axis (the convention built into nvdac.frames):

        Mz = (a1 - a2)(sxx + syy) + (a1 + 2 a2) szz
        Mx = (b + c)(sxx - syy) + sqrt(2)(2b - c) sxz
        My = -2 (b + c) sxy     + sqrt(2)(2b - c) syz

    Hydrostatic stress p*I gives Mz = 3 a1 p and Mx = My = 0.
    """
    s = stress_nv
    mz = (couplings.a1 - couplings.a2) * (s[0, 0] + s[1, 1]) \
        + (couplings.a1 + 2.0 * couplings.a2) * s[2, 2]
    t1 = couplings.b + couplings.c
    t2 = _SQRT2 * (2.0 * couplings.b - couplings.c)
    mx = t1 * (s[0, 0] - s[1, 1]) + t2 * s[0, 2]
    my = -2.0 * t1 * s[0, 1] + t2 * s[1, 2]
    return mz, mx, my


def build_hamiltonian(params, couplings, inputs):
    """Assemble the 3x3 ground-state Hamiltonian (MHz) for one NV frame.

    Parameters
    ----------
    params : ZfsParams
    couplings : StressCouplings
    inputs : NvFrameInputs
        Stress tensor and field vector already rotated into the NV frame.

    Returns a Hermitian complex ndarray in the basis (|+1>, |0>, |-1>).
    """
    if not isinstance(inputs, NvFrameInputs):
        inputs = NvFrameInputs(*inputs)
    mz, mx, my = stress_projections(couplings, inputs.stress_nv)
    f = inputs.field_nv
    h = (params.d_zero + mz) * _SZ2 + mx * _E1 + my * _E2 \
        + params.gamma_e * (f[0] * S_X + f[1] * S_Y + f[2] * S_Z)
    if couplings.include_spin_half_mixing:
        h = h + mx * _A1 + my * _A2
    return h


def transition_frequencies(h):
    """Exact transition frequencies from the m_s = 0-like eigenstate.

    Diagonalizes h, picks the eigenstate with the largest |<m_s=0|psi>|^2
    (ties broken by lowest eigenvalue), and returns the two gaps to the
    remaining eigenstates sorted ascending.  A fully collapsed spectrum
    (all gaps below DEGENERACY_TOLERANCE_MHZ) is returned as a degenerate
    pair rather than raised as an error.
    """
    h = np.asarray(h, dtype=complex)
    check_hermitian(h, "h")
    evals, evecs = np.linalg.eigh(h)
    overlaps = np.abs(evecs[1, :]) ** 2
    # eigh sorts ascending, so the first maximal overlap is the lowest state
    k0 = int(np.argmax(overlaps > overlaps.max() - 1e-12))
    gaps = np.abs(evals - evals[k0])
    gaps = np.sort(np.delete(gaps, k0))
    return TransitionPair(float(gaps[0]), float(gaps[1]))


def sweep_transition_frequencies(params, couplings, stress_nv, fields_nv):
    """Transition pairs for one NV frame across a batch of field vectors.

    fields_nv has shape (n, 3) in mT; returns an (n, 2) array of
    (nu_minus, nu_plus) rows.  Identical to calling transition_frequencies
    point by point, but diagonalizes the whole batch at once.
    """
    stress_nv = as_matrix3(stress_nv, "stress_nv")
    check_symmetric(stress_nv, 1e-12, "stress_nv")
    fields = np.atleast_2d(np.asarray(fields_nv, dtype=float))
    if fields.shape[1] != 3:
        raise ValueError("fields_nv must have shape (n, 3)")

    mz, mx, my = stress_projections(couplings, stress_nv)
    h_stress = (params.d_zero + mz) * _SZ2 + mx * _E1 + my * _E2
    if couplings.include_spin_half_mixing:
        h_stress = h_stress + mx * _A1 + my * _A2
    zeeman = params.gamma_e * (
        fields[:, 0, None, None] * S_X
        + fields[:, 1, None, None] * S_Y
        + fields[:, 2, None, None] * S_Z
    )
    evals, evecs = np.linalg.eigh(h_stress[None, :, :] + zeeman)

    overlaps = np.abs(evecs[:, 1, :]) ** 2
    k0 = np.argmax(overlaps > overlaps.max(axis=1, keepdims=True) - 1e-12, axis=1)
    idx = np.arange(len(fields))
    gaps = np.abs(evals - evals[idx, k0][:, None])
    gaps[idx, k0] = np.inf
    gaps = np.sort(gaps, axis=1)
    return gaps[:, :2]


def first_order_frequencies(params, delta, delta_sigma, delta_b):
    """First-order transition frequencies D + delta +- Delta/2.

    delta is the common spectral shift and Delta the quadratic sum
    sqrt(delta_sigma^2 + delta_b^2) of the stress- and field-induced
    splittings.  Exact at zero field for the M-type Hamiltonian; an
    approximation once an off-axis field is applied.
    """
    if delta_sigma < 0:
        raise ValueError("delta_sigma must be >= 0")
    if delta_b < 0:
        raise ValueError("delta_b must be >= 0")
    total = np.hypot(delta_sigma, delta_b)
    center = params.d_zero + delta
    return TransitionPair(center - 0.5 * total, center + 0.5 * total)
