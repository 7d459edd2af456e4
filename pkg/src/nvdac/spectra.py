"""Synthesis of ODMR spectra and field-sweep maps from transition frequencies.

Spectra are normalized photoluminescence versus microwave frequency.  Each
transition contributes a Lorentzian with a signed contrast (negative for
the usual PL dip, positive contrast is allowed).  Lineshape parameters are
caller inputs: the package does not predict contrast.
"""

from dataclasses import dataclass

import numpy as np

from . import frames
from .spin import StressCouplings, TransitionPair, ZfsParams, \
    sweep_transition_frequencies

DEFAULT_GRID_START_MHZ = 2600.0
DEFAULT_GRID_STOP_MHZ = 4400.0
DEFAULT_GRID_STEP_MHZ = 1.0

# Paper-of-record operating range for the applied field sweep, mT.
DEFAULT_FIELD_RANGE_MT = (0.0, 10.0)


@dataclass(frozen=True)
class LineshapeParams:
    """Lorentzian lineshape: FWHM in MHz, signed contrast, PL baseline.

    contrast may be a single number applied to every transition or a pair
    (low branch, high branch) applied per transition within each
    TransitionPair.  Negative contrast is a PL dip.
    """

    linewidth_fwhm: float
    contrast: float | tuple = -0.05
    baseline: float = 1.0

    def __post_init__(self):
        if not self.linewidth_fwhm > 0:
            raise ValueError("linewidth_fwhm must be > 0")
        pair = self.contrast_pair
        if any(abs(c) >= 1 for c in pair):
            raise ValueError("|contrast| must be < 1")

    @property
    def contrast_pair(self):
        """Per-branch (low, high) contrast tuple."""
        if np.isscalar(self.contrast):
            return (float(self.contrast), float(self.contrast))
        pair = tuple(float(c) for c in self.contrast)
        if len(pair) != 2:
            raise ValueError("contrast must be a scalar or a (low, high) pair")
        return pair


@dataclass
class ODMRSpectrum:
    """Frequency grid (MHz) and normalized PL samples."""

    frequencies: np.ndarray
    pl: np.ndarray

    def __post_init__(self):
        self.frequencies = np.asarray(self.frequencies, dtype=float)
        self.pl = np.asarray(self.pl, dtype=float)
        if self.frequencies.shape != self.pl.shape or self.frequencies.ndim != 1:
            raise ValueError("frequencies and pl must be 1-d arrays of equal length")
        if len(self.frequencies) >= 2 and not np.all(np.diff(self.frequencies) > 0):
            raise ValueError("frequencies must be strictly increasing")


@dataclass(frozen=True)
class MapMetadata:
    alpha: float
    pressure: float
    lineshape: LineshapeParams


@dataclass
class ODMRMap:
    """A stack of spectra over an ascending magnetic-field sweep."""

    field_values: np.ndarray
    spectra: list
    metadata: MapMetadata | None = None

    def __post_init__(self):
        self.field_values = np.asarray(self.field_values, dtype=float)
        if len(self.field_values) != len(self.spectra):
            raise ValueError("one spectrum per field value required")
        if len(self.field_values) >= 2 and not np.all(np.diff(self.field_values) > 0):
            raise ValueError("field_values must be strictly increasing")
        grid = self.spectra[0].frequencies
        for s in self.spectra[1:]:
            if not np.array_equal(s.frequencies, grid):
                raise ValueError("all spectra in a map must share one frequency grid")


def default_grid(start=DEFAULT_GRID_START_MHZ, stop=DEFAULT_GRID_STOP_MHZ,
                 step=DEFAULT_GRID_STEP_MHZ):
    """Default frequency grid, wide enough for center shifts up to ~130 GPa."""
    n = int(round((stop - start) / step)) + 1
    return np.linspace(start, stop, n)


def synthesize_spectrum(pairs, shape, grid):
    """Sum of Lorentzians over all transitions of all supplied pairs.

    pl(f) = baseline + sum_i contrast_i * w^2 / ((f - f_i)^2 + w^2) with
    w = fwhm / 2.  Degenerate transitions stack additively.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2:
        raise ValueError("grid must be a 1-d array with at least 2 points")
    if not np.all(np.diff(grid) > 0):
        raise ValueError("grid must be strictly increasing")

    w = 0.5 * shape.linewidth_fwhm
    c_lo, c_hi = shape.contrast_pair
    pl = np.full_like(grid, shape.baseline)
    for pair in pairs:
        for nu, c in ((pair.nu_minus, c_lo), (pair.nu_plus, c_hi)):
            pl = pl + c * w * w / ((grid - nu) ** 2 + w * w)
    return ODMRSpectrum(frequencies=grid, pl=pl)


def transition_pairs_map(alpha, pressure, field_mt, zfs=None, couplings=None,
                         direction=(1.0, 0.0, 0.0)):
    """Full-model transition pairs for every NV orientation over a field sweep.

    Returns an array of shape (n_fields, 4, 2).  With the field along a
    cube axis the four orientations are degenerate.
    """
    zfs = zfs or ZfsParams()
    couplings = couplings or StressCouplings()
    field_mt = np.atleast_1d(np.asarray(field_mt, dtype=float))
    stress = frames.anvil_stress(frames.AnvilStressParams(alpha=alpha, pressure=pressure))
    unit = frames.LabField(magnitude=1.0, direction=direction)

    out = np.empty((len(field_mt), 4, 2))
    for j, orientation in enumerate(frames.nv_orientations()):
        nv = frames.to_nv_frame(orientation, stress, unit)
        fields_nv = field_mt[:, None] * nv.field_nv[None, :]
        out[:, j, :] = sweep_transition_frequencies(zfs, couplings, nv.stress_nv, fields_nv)
    return out


def synthesize_map(alpha, pressure, field_sweep, shape, grid=None, zfs=None,
                   couplings=None, direction=(1.0, 0.0, 0.0),
                   field_range_mt=DEFAULT_FIELD_RANGE_MT):
    """Forward-model an ODMR map over an ascending field sweep.

    Each field value gets the spectrum of all four NV orientations.  The
    sweep must stay inside field_range_mt (pass None to lift the range
    check).  Metadata records the scenario parameters used.
    """
    field_sweep = np.asarray(field_sweep, dtype=float)
    if len(field_sweep) >= 2 and not np.all(np.diff(field_sweep) > 0):
        raise ValueError("field_sweep must be strictly increasing")
    if field_range_mt is not None:
        lo, hi = field_range_mt
        if field_sweep.min() < lo or field_sweep.max() > hi:
            raise ValueError(
                f"field_sweep must lie within {field_range_mt} mT; pass "
                "field_range_mt=None to override"
            )
    if grid is None:
        grid = default_grid()

    all_pairs = transition_pairs_map(alpha, pressure, field_sweep, zfs, couplings, direction)
    spectra = []
    for pairs_at_field in all_pairs:
        pairs = [TransitionPair(lo, hi) for lo, hi in pairs_at_field]
        spectra.append(synthesize_spectrum(pairs, shape, grid))
    meta = MapMetadata(alpha=alpha, pressure=pressure, lineshape=shape)
    return ODMRMap(field_values=field_sweep, spectra=spectra, metadata=meta)


def add_noise(spectrum, sigma, seed):
    """Add i.i.d. Gaussian PL noise; deterministic for a fixed seed."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    rng = np.random.default_rng(seed)
    noisy = spectrum.pl + rng.normal(0.0, sigma, size=spectrum.pl.shape) if sigma > 0 \
        else spectrum.pl.copy()
    return ODMRSpectrum(frequencies=spectrum.frequencies.copy(), pl=noisy)
