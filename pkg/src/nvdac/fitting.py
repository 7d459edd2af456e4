"""Peak extraction and physical-parameter fits driven by the full diagonalization.

Three estimators with the scikit-learn fit/predict contract:

* LorentzianSpectrumFit — multi-Lorentzian least squares on one spectrum,
  recovering centers, signed depths, widths and the baseline.
* StressMapFitter — fits the stress anisotropy alpha and pressure P to
  transition pairs measured across a magnetic-field sweep (field along a
  cube axis), using the exact Hamiltonian diagonalization as the model.
* FieldMagnitudeFitter — magnetometry mode: recovers the field magnitude
  from a transition pair at known (alpha, P).

Thin functions (extract_peaks, fit_stress, fit_field) wrap the estimators
with the package's value types.  All fits are deterministic for fixed
inputs and initialization.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter1d
from scipy.optimize import least_squares
from scipy.signal import find_peaks, peak_widths
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import frames
from .spin import StressCouplings, ZfsParams, sweep_transition_frequencies

# Shot-noise prefactor for a Lorentzian cw resonance read out at the point
# of steepest slope: 4 / (3 sqrt(3)).
SHOT_NOISE_PREFACTOR = 4.0 / (3.0 * np.sqrt(3.0))

_FIT_TOL = 1e-10
_MAX_ITER = 200
_DIFF_STEP = 1e-6   # relative step for the central-difference Jacobian


class NoConvergenceError(RuntimeError):
    """Fit did not converge; .best carries the best-effort parameters."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class InconsistentFieldError(ValueError):
    """No real field magnitude can reproduce the measured splitting."""


@dataclass
class PeakSet:
    """Fitted resonance dips: centers and widths in MHz, signed depths."""

    centers: np.ndarray
    depths: np.ndarray
    widths: np.ndarray
    residual_rms: float


@dataclass
class StressFitResult:
    alpha: float
    pressure: float
    alpha_sigma: float
    pressure_sigma: float
    residual_rms: float
    iterations: int


@dataclass
class FieldFitResult:
    b_magnitude: float
    uncertainty: float
    residual_rms: float


def _least_squares(fun, x0, bounds):
    return least_squares(
        fun, x0, jac="3-point", method="trf", bounds=bounds,
        diff_step=_DIFF_STEP, xtol=_FIT_TOL, ftol=_FIT_TOL, gtol=_FIT_TOL,
        max_nfev=_MAX_ITER * (2 * len(np.atleast_1d(x0)) + 1),
    )


def _sigma_from_jacobian(jac, residuals, n_params):
    """1-sigma parameter uncertainties from the residual covariance.

    Directions the data do not constrain (singular Jacobian) are reported
    as infinite rather than spuriously small.
    """
    dof = max(len(residuals) - n_params, 1)
    s2 = float(residuals @ residuals) / dof
    _, sv, vt = np.linalg.svd(jac, full_matrices=False)
    # beyond this conditioning the covariance is numerically meaningless:
    # the corresponding parameter direction is unconstrained by the data
    cutoff = max(sv.max(), 0.0) * 1e-8
    var = np.zeros(n_params)
    for i in range(n_params):
        for k in range(len(sv)):
            if sv[k] <= cutoff:
                if abs(vt[k, i]) > 1e-9:
                    var[i] = np.inf
            else:
                var[i] += (vt[k, i] / sv[k]) ** 2 * s2
    return np.sqrt(var)


# ---------------------------------------------------------------------------
# Peak extraction
# ---------------------------------------------------------------------------

class LorentzianSpectrumFit(BaseEstimator):
    """Least-squares multi-Lorentzian fit of an ODMR spectrum.

    Parameters
    ----------
    n_peaks : int, 1 or 2
        Number of resonances to fit.
    residual_threshold : float or None
        If set, a fit whose residual rms exceeds it raises
        NoConvergenceError even when the optimizer reports success.

    After fit(), the attributes baseline_, centers_, depths_, widths_,
    residual_rms_ and n_iter_ are available; predict(frequencies) evaluates
    the fitted model.  Centers are sorted ascending.  The baseline and the
    depths are fitted jointly, so the result is invariant under affine
    rescaling of the PL axis.
    """

    def __init__(self, n_peaks=2, residual_threshold=None):
        self.n_peaks = n_peaks
        self.residual_threshold = residual_threshold

    @staticmethod
    def _model(x, freqs, n_peaks):
        pl = np.full_like(freqs, x[0])
        for k in range(n_peaks):
            c, d, w = x[1 + 3 * k: 4 + 3 * k]
            hw = 0.5 * w
            pl = pl + d * hw * hw / ((freqs - c) ** 2 + hw * hw)
        return pl

    def _initial_guess(self, freqs, pl):
        """Seed centers/widths/depths from smoothed-derivative extrema.

        Returns (x0, overlapping): overlapping is True when the expected two
        dips are closer than one linewidth (or merge into one envelope), in
        which case the fit goes through the constrained symmetric stage.
        """
        n = len(freqs)
        df = freqs[1] - freqs[0]
        baseline = float(np.median(pl))
        dev = pl - baseline
        window = max(3, n // 200)
        smooth = uniform_filter1d(dev, size=window)

        magnitude = np.abs(smooth)
        idx, props = find_peaks(magnitude, prominence=0.2 * magnitude.max())
        order = np.argsort(props["prominences"])[::-1]
        idx = idx[order][: self.n_peaks]

        if len(idx) == 0:
            idx = np.array([int(np.argmax(magnitude))])
        try:
            widths_idx = peak_widths(magnitude, np.sort(idx), rel_height=0.5)[0]
            widths = np.maximum(widths_idx * df, 2.0 * df)
        except ValueError:
            # featureless data: seed with a generic width, the fit sorts it out
            widths = np.full(len(idx), 10.0 * df)
        centers = freqs[np.sort(idx)]
        depths = smooth[np.sort(idx)]

        overlapping = False
        if self.n_peaks == 2:
            envelope = float(np.max(widths))
            if len(centers) == 1 or abs(centers[-1] - centers[0]) < envelope:
                # one merged envelope: split it symmetrically, component
                # widths about half the envelope width
                overlapping = True
                mid = float(np.mean(centers))
                half_sep = max(0.25 * envelope, df)
                centers = np.array([mid - half_sep, mid + half_sep])
                depths = np.array([depths[0], depths[-1]])
                widths = np.array([0.5 * envelope, 0.5 * envelope])

        x0 = [baseline]
        for k in range(self.n_peaks):
            x0 += [float(centers[k]), float(np.clip(depths[k], -0.999, 0.999)),
                   float(widths[k])]
        return np.asarray(x0), overlapping

    @staticmethod
    def _symmetric_model(x, freqs):
        """Two identical Lorentzians at midpoint +- half-separation."""
        base, mid, half_sep, depth, w = x
        hw = 0.5 * w
        return (base
                + depth * hw * hw / ((freqs - (mid - half_sep)) ** 2 + hw * hw)
                + depth * hw * hw / ((freqs - (mid + half_sep)) ** 2 + hw * hw))

    def _overlap_stage(self, freqs, pl, x0):
        """Constrained symmetric fit; avoids the collapsed-centers minimum
        that the free fit falls into when the dips overlap."""
        span = freqs[-1] - freqs[0]
        df = freqs[1] - freqs[0]
        c1, c2 = x0[1], x0[4]
        xs = np.array([x0[0], 0.5 * (c1 + c2), 0.5 * abs(c2 - c1),
                       0.5 * (x0[2] + x0[5]), 0.5 * (x0[3] + x0[6])])
        lo = [-np.inf, freqs[0], 0.0, -1.0, 0.5 * df]
        hi = [np.inf, freqs[-1], 0.5 * span, 1.0, 2.0 * span]
        res = _least_squares(
            lambda x: self._symmetric_model(x, freqs) - pl,
            np.clip(xs, lo, hi), (lo, hi))
        base, mid, half_sep, depth, w = res.x
        return np.array([base, mid - half_sep, depth, w, mid + half_sep, depth, w])

    def fit(self, X, y):
        """Fit the model to PL samples y on the frequency grid X (MHz)."""
        freqs = np.asarray(X, dtype=float).ravel()
        pl = np.asarray(y, dtype=float).ravel()
        if freqs.shape != pl.shape or len(freqs) < 4:
            raise ValueError("X and y must be equal-length 1-d arrays (>= 4 points)")
        if self.n_peaks not in (1, 2):
            raise ValueError("n_peaks must be 1 or 2")

        x0, overlapping = self._initial_guess(freqs, pl)
        if overlapping:
            x0 = self._overlap_stage(freqs, pl, x0)
        span = freqs[-1] - freqs[0]
        df = freqs[1] - freqs[0]
        lo = [-np.inf] + [freqs[0], -1.0, 0.5 * df] * self.n_peaks
        hi = [np.inf] + [freqs[-1], 1.0, 2.0 * span] * self.n_peaks
        x0 = np.clip(x0, lo, hi)

        res = _least_squares(
            lambda x: self._model(x, freqs, self.n_peaks) - pl, x0, (lo, hi))

        order = np.argsort([res.x[1 + 3 * k] for k in range(self.n_peaks)])
        self.baseline_ = float(res.x[0])
        self.centers_ = np.array([res.x[1 + 3 * k] for k in order])
        self.depths_ = np.array([res.x[2 + 3 * k] for k in order])
        self.widths_ = np.array([res.x[3 + 3 * k] for k in order])
        self.residual_rms_ = float(np.sqrt(np.mean(res.fun ** 2)))
        self.n_iter_ = int(res.njev if res.njev is not None else res.nfev)

        bad = not res.success or (
            self.residual_threshold is not None
            and self.residual_rms_ > self.residual_threshold)
        if bad:
            raise NoConvergenceError(
                f"peak fit did not converge (residual rms {self.residual_rms_:.3g})",
                best=self._peak_set())
        return self

    def _peak_set(self):
        return PeakSet(centers=self.centers_.copy(), depths=self.depths_.copy(),
                       widths=self.widths_.copy(), residual_rms=self.residual_rms_)

    def predict(self, X):
        if not hasattr(self, "centers_"):
            raise NotFittedError("call fit() first")
        freqs = np.asarray(X, dtype=float).ravel()
        x = [self.baseline_]
        for c, d, w in zip(self.centers_, self.depths_, self.widths_):
            x += [c, d, w]
        return self._model(np.asarray(x), freqs, len(self.centers_))


def extract_peaks(spectrum, expected_count=2, residual_threshold=None):
    """Fit expected_count Lorentzian dips to a spectrum; returns a PeakSet."""
    if expected_count not in (1, 2):
        raise ValueError("expected_count must be 1 or 2")
    est = LorentzianSpectrumFit(n_peaks=expected_count,
                                residual_threshold=residual_threshold)
    est.fit(spectrum.frequencies, spectrum.pl)
    return est._peak_set()


# ---------------------------------------------------------------------------
# Forward model shared by the parameter fits
# ---------------------------------------------------------------------------

def _model_pairs(alpha, pressure, field_mt, zfs, couplings, direction):
    """Transition pairs of one NV orientation (all four are degenerate at
    a cube-axis field) for a batch of field magnitudes."""
    stress = frames.anvil_stress(
        frames.AnvilStressParams(alpha=float(alpha), pressure=float(pressure)))
    orientation = frames.nv_orientations()[0]
    nv = frames.to_nv_frame(orientation, stress, frames.LabField(1.0, direction))
    fields_nv = np.atleast_1d(field_mt)[:, None] * nv.field_nv[None, :]
    return sweep_transition_frequencies(zfs, couplings, nv.stress_nv, fields_nv)


def zero_field_splitting_mhz(alpha, pressure, zfs=None, couplings=None):
    """Model stress splitting Delta_sigma at zero field, MHz."""
    zfs = zfs or ZfsParams()
    couplings = couplings or StressCouplings()
    pair = _model_pairs(alpha, pressure, np.array([0.0]), zfs, couplings,
                        (1.0, 0.0, 0.0))[0]
    return float(pair[1] - pair[0])


def splitting_field_slope(alpha, pressure, field_mt, zfs=None, couplings=None,
                          step_mt=1e-3):
    """d(splitting)/dB of the full model at one operating point, MHz/mT."""
    zfs = zfs or ZfsParams()
    couplings = couplings or StressCouplings()
    b = max(float(field_mt), step_mt)
    pairs = _model_pairs(alpha, pressure, np.array([b - step_mt, b + step_mt]),
                         zfs, couplings, (1.0, 0.0, 0.0))
    split = pairs[:, 1] - pairs[:, 0]
    return float((split[1] - split[0]) / (2.0 * step_mt))


# ---------------------------------------------------------------------------
# Stress fit
# ---------------------------------------------------------------------------

class StressMapFitter(BaseEstimator):
    """Fit (alpha, P) to transition pairs measured over a field sweep.

    X is the array of field magnitudes (mT, along a cube axis) and y the
    (n, 2) array of measured (nu_minus, nu_plus) in MHz.  The model is the
    exact diagonalization of the spin Hamiltonian under the anvil stress
    tensor.  Needs at least two distinct field values for the two unknowns.

    Fitted attributes: alpha_, pressure_, alpha_sigma_, pressure_sigma_,
    residual_rms_, n_iter_.  Uncertainties are 1-sigma values from the
    residual covariance; an unconstrained parameter (e.g. alpha at P = 0)
    is reported with infinite uncertainty.
    """

    def __init__(self, zfs=None, couplings=None, init_alpha=0.8,
                 init_pressure=None, direction=(1.0, 0.0, 0.0)):
        self.zfs = zfs
        self.couplings = couplings
        self.init_alpha = init_alpha
        self.init_pressure = init_pressure
        self.direction = direction

    def _resolved(self):
        return (self.zfs or ZfsParams(), self.couplings or StressCouplings())

    def fit(self, X, y):
        field = np.asarray(X, dtype=float).ravel()
        pairs = np.asarray(y, dtype=float)
        if pairs.shape != (len(field), 2):
            raise ValueError("y must have shape (n_fields, 2)")
        if len(np.unique(field)) < 2:
            raise ValueError("need at least 2 distinct field values to fit (alpha, P)")
        zfs, couplings = self._resolved()

        p0 = self.init_pressure
        if p0 is None:
            # seed P from the center shift at the lowest field via the
            # linear relation delta = a1 (1 + 2 alpha) P
            delta0 = float(pairs[np.argmin(field)].mean() - zfs.d_zero)
            p0 = max(delta0, 0.0) / (couplings.a1 * (1.0 + 2.0 * self.init_alpha))
        x0 = np.array([self.init_alpha, max(p0, 0.0)])

        def residuals(x):
            model = _model_pairs(x[0], x[1], field, zfs, couplings, self.direction)
            return (model - pairs).ravel()

        res = _least_squares(residuals, x0, ([1e-6, 0.0], [1.5, np.inf]))
        if not res.success:
            raise NoConvergenceError(
                f"stress fit did not converge: {res.message}",
                best=self._result_from(res))

        self._store(res)
        return self

    def _store(self, res):
        sig = _sigma_from_jacobian(res.jac, res.fun, 2)
        self.alpha_ = float(res.x[0])
        self.pressure_ = float(res.x[1])
        self.alpha_sigma_ = float(sig[0])
        self.pressure_sigma_ = float(sig[1])
        self.residual_rms_ = float(np.sqrt(np.mean(res.fun ** 2)))
        self.n_iter_ = int(res.njev if res.njev is not None else res.nfev)

    def _result_from(self, res):
        self._store(res)
        return StressFitResult(
            alpha=self.alpha_, pressure=self.pressure_,
            alpha_sigma=self.alpha_sigma_, pressure_sigma=self.pressure_sigma_,
            residual_rms=self.residual_rms_, iterations=self.n_iter_)

    def predict(self, X):
        if not hasattr(self, "alpha_"):
            raise NotFittedError("call fit() first")
        zfs, couplings = self._resolved()
        return _model_pairs(self.alpha_, self.pressure_,
                            np.asarray(X, dtype=float).ravel(), zfs, couplings,
                            self.direction)


def fit_stress(map_peaks, zfs=None, couplings=None, init=None):
    """Fit (alpha, P) from a list of (field_mt, TransitionPair) tuples."""
    field = np.array([b for b, _ in map_peaks], dtype=float)
    pairs = np.array([[p.nu_minus, p.nu_plus] for _, p in map_peaks], dtype=float)
    kwargs = {}
    if init is not None:
        kwargs = {"init_alpha": init[0], "init_pressure": init[1]}
    fitter = StressMapFitter(zfs=zfs, couplings=couplings, **kwargs)
    fitter.fit(field, pairs)
    return StressFitResult(
        alpha=fitter.alpha_, pressure=fitter.pressure_,
        alpha_sigma=fitter.alpha_sigma_, pressure_sigma=fitter.pressure_sigma_,
        residual_rms=fitter.residual_rms_, iterations=fitter.n_iter_)


# ---------------------------------------------------------------------------
# Field fit (magnetometry mode)
# ---------------------------------------------------------------------------

class FieldMagnitudeFitter(BaseEstimator):
    """Recover the field magnitude from transition pairs at known (alpha, P).

    X is one (nu_minus, nu_plus) pair or an (n, 2) array of repeated
    measurements of the same field.  The splitting is monotone in B, so the
    one-dimensional least squares has a unique minimum.  A measured
    splitting below the zero-field stress splitting (minus tolerance_mhz)
    cannot be reproduced by any real field and raises
    InconsistentFieldError.
    """

    def __init__(self, alpha=1.0, pressure=0.0, zfs=None, couplings=None,
                 tolerance_mhz=1e-3, direction=(1.0, 0.0, 0.0)):
        self.alpha = alpha
        self.pressure = pressure
        self.zfs = zfs
        self.couplings = couplings
        self.tolerance_mhz = tolerance_mhz
        self.direction = direction

    def fit(self, X, y=None):
        pairs = np.atleast_2d(np.asarray(X, dtype=float))
        if pairs.shape[1] != 2:
            raise ValueError("X must be a (nu_minus, nu_plus) pair or an (n, 2) array")
        zfs = self.zfs or ZfsParams()
        couplings = self.couplings or StressCouplings()

        base = _model_pairs(self.alpha, self.pressure, np.array([0.0]),
                            zfs, couplings, self.direction)[0]
        delta_sigma = base[1] - base[0]
        measured = float(np.mean(pairs[:, 1] - pairs[:, 0]))
        if measured < delta_sigma - self.tolerance_mhz:
            raise InconsistentFieldError(
                f"measured splitting {measured:.6g} MHz is below the zero-field "
                f"stress splitting {delta_sigma:.6g} MHz; no field reproduces it")

        # seed from the quadratic-sum law with the on-axis field projection
        z_proj = abs(frames.nv_orientations()[0].axis @
                     np.asarray(self.direction, dtype=float))
        db = np.sqrt(max(measured ** 2 - delta_sigma ** 2, 0.0))
        b0 = db / (2.0 * zfs.gamma_e * max(z_proj, 1e-12))

        def residuals(x):
            model = _model_pairs(self.alpha, self.pressure, x, zfs, couplings,
                                 self.direction)
            return (model - pairs).ravel()

        res = _least_squares(residuals, np.array([max(b0, 0.0)]), ([0.0], [np.inf]))
        sig = _sigma_from_jacobian(res.jac, res.fun, 1)
        self.b_magnitude_ = float(res.x[0])
        self.b_sigma_ = float(sig[0])
        self.residual_rms_ = float(np.sqrt(np.mean(res.fun ** 2)))
        self.n_iter_ = int(res.njev if res.njev is not None else res.nfev)
        if not res.success:
            raise NoConvergenceError(
                f"field fit did not converge: {res.message}",
                best=FieldFitResult(b_magnitude=self.b_magnitude_,
                                    uncertainty=self.b_sigma_,
                                    residual_rms=self.residual_rms_))
        return self

    def predict(self, X=None):
        if not hasattr(self, "b_magnitude_"):
            raise NotFittedError("call fit() first")
        zfs = self.zfs or ZfsParams()
        couplings = self.couplings or StressCouplings()
        return _model_pairs(self.alpha, self.pressure,
                            np.array([self.b_magnitude_]), zfs, couplings,
                            self.direction)[0]


def fit_field(pair, known, zfs=None, couplings=None, tolerance_mhz=1e-3):
    """Fit the field magnitude from one TransitionPair at known (alpha, P)."""
    alpha, pressure = known
    fitter = FieldMagnitudeFitter(alpha=alpha, pressure=pressure, zfs=zfs,
                                  couplings=couplings, tolerance_mhz=tolerance_mhz)
    fitter.fit(np.array([[pair.nu_minus, pair.nu_plus]]))
    return FieldFitResult(b_magnitude=fitter.b_magnitude_,
                          uncertainty=fitter.b_sigma_,
                          residual_rms=fitter.residual_rms_)


# ---------------------------------------------------------------------------
# Sensitivity
# ---------------------------------------------------------------------------

def sensitivity_estimate(shape, photon_rate, d_delta_d_b):
    """Shot-noise cw-ODMR field sensitivity, mT per sqrt(Hz).

    eta = (4 / 3 sqrt(3)) * fwhm / (|contrast| * sqrt(rate) * dDelta/dB).
    The contrast is the mean magnitude over the branches.  A flat response
    (dDelta/dB = 0) returns the infinite-sensitivity sentinel with a
    warning instead of raising.
    """
    if not photon_rate > 0:
        raise ValueError("photon_rate must be > 0")
    contrast = float(np.mean(np.abs(shape.contrast_pair)))
    if contrast == 0:
        raise ValueError("contrast must be nonzero")
    if d_delta_d_b < 0:
        raise ValueError("d_delta_d_b must be >= 0")
    if d_delta_d_b == 0:
        warnings.warn("flat field response (dDelta/dB = 0): sensitivity is "
                      "unbounded at this operating point", RuntimeWarning)
        return float("inf")
    return SHOT_NOISE_PREFACTOR * shape.linewidth_fwhm / (
        contrast * np.sqrt(photon_rate) * d_delta_d_b)
