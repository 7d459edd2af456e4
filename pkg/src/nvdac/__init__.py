"""Forward and inverse modeling of NV-center ODMR in diamond anvil cells.

Physics core: ground-triplet spin Hamiltonian under combined stress and
magnetic field (nvdac.spin), the anvil-tip stress model and NV frame
rotations (nvdac.frames), spectrum synthesis (nvdac.spectra), estimator-
style fits of (alpha, P) or the field magnitude (nvdac.fitting), and the
pressure-calibration chain (nvdac.calibration).
"""

from .calibration import (
    DiamondEos,
    EosParams,
    GruneisenParams,
    RamanEdgeGauge,
    RamanGaugeParams,
    VolumeRamanShift,
    ZplLine,
    ZplVolumeLine,
    calibrate_a1,
    calibrate_b,
    calibrated_couplings,
    eos_pressure_to_volume,
    eos_volume_to_pressure,
    gruneisen_shift,
    micropillar_zpl_line,
    pressure_to_raman_edge,
    raman_edge_to_pressure,
    standard_anvil_zpl_line,
    zpl_energy,
)
from .config import ConfigError, RunConfig
from .fitting import (
    FieldFitResult,
    FieldMagnitudeFitter,
    InconsistentFieldError,
    LorentzianSpectrumFit,
    NoConvergenceError,
    PeakSet,
    StressFitResult,
    StressMapFitter,
    extract_peaks,
    fit_field,
    fit_stress,
    sensitivity_estimate,
)
from .frames import (
    AnvilStressParams,
    LabField,
    NvOrientation,
    anvil_stress,
    nv_orientations,
    to_nv_frame,
)
from .spectra import (
    LineshapeParams,
    ODMRMap,
    ODMRSpectrum,
    add_noise,
    default_grid,
    synthesize_map,
    synthesize_spectrum,
)
from .spin import (
    NvFrameInputs,
    StressCouplings,
    TransitionPair,
    ZfsParams,
    build_hamiltonian,
    first_order_frequencies,
    stress_projections,
    sweep_transition_frequencies,
    transition_frequencies,
)

__version__ = "0.1.0"
