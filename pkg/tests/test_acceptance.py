"""Acceptance suite: one test per release criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines.
"""

import json

import numpy as np
import pytest
from click.testing import CliRunner

from nvdac.calibration import (
    EosParams,
    GruneisenParams,
    calibrate_a1,
    calibrated_couplings,
    center_shift_slope,
    eos_pressure_to_volume,
    eos_volume_to_pressure,
    gruneisen_shift,
    micropillar_zpl_line,
    pressure_to_raman_edge,
    raman_edge_to_pressure,
    splitting_slope,
    standard_anvil_zpl_line,
    zpl_energy,
)
from nvdac.cli import main as cli_main
from nvdac.config import RunConfig
from nvdac.fitting import _model_pairs, extract_peaks, fit_field, fit_stress, \
    zero_field_splitting_mhz
from nvdac.frames import AnvilStressParams, LabField, anvil_stress, \
    nv_orientations, to_nv_frame
from nvdac.spectra import LineshapeParams, add_noise, default_grid, synthesize_map
from nvdac.spin import (
    NvFrameInputs,
    StressCouplings,
    TransitionPair,
    ZfsParams,
    build_hamiltonian,
    first_order_frequencies,
    stress_projections,
    transition_frequencies,
)

from oracles import eigvals_cubic

ZFS = ZfsParams()
COUPLINGS = StressCouplings()
FIELD_100 = (1.0, 0.0, 0.0)


def _passed(n, text):
    print(f"\nACCEPTANCE {n}: PASS - {text}")


def test_criterion_01_zero_point_anchor():
    h = build_hamiltonian(ZFS, COUPLINGS,
                          NvFrameInputs(np.zeros((3, 3)), np.zeros(3)))
    pair = transition_frequencies(h)
    assert abs(pair.nu_minus - 2870.0) < 1e-9
    assert abs(pair.nu_plus - 2870.0) < 1e-9
    _passed(1, "zero stress and field give both transitions at 2870.000 MHz")


def test_criterion_02_fourfold_degeneracy():
    rng = np.random.default_rng(1234)
    worst = 0.0
    for _ in range(100):
        stress = anvil_stress(AnvilStressParams(
            alpha=rng.uniform(0.4, 1.0), pressure=rng.uniform(0.0, 130.0)))
        field = LabField(magnitude=rng.uniform(0.0, 10.0), direction=FIELD_100)
        pairs = np.array([
            [p.nu_minus, p.nu_plus] for p in (
                transition_frequencies(build_hamiltonian(
                    ZFS, COUPLINGS, to_nv_frame(o, stress, field)))
                for o in nv_orientations())
        ])
        worst = max(worst, float(np.ptp(pairs, axis=0).max()))
    assert worst < 1e-9
    _passed(2, f"four NV orientations degenerate to {worst:.2e} MHz "
               "over 100 random (alpha, P, B) draws")


def test_criterion_03_first_order_consistency():
    # exact agreement at zero field
    worst0 = 0.0
    for alpha in (0.4, 0.56, 0.8, 0.95, 1.0):
        for p in (0.0, 40.0, 90.0, 130.0):
            stress = anvil_stress(AnvilStressParams(alpha=alpha, pressure=p))
            nv = to_nv_frame(nv_orientations()[0], stress, LabField(0.0))
            full = transition_frequencies(build_hamiltonian(ZFS, COUPLINGS, nv))
            mz, mx, my = stress_projections(COUPLINGS, nv.stress_nv)
            approx = first_order_frequencies(ZFS, mz, 2 * np.hypot(mx, my), 0.0)
            worst0 = max(worst0, abs(full.nu_minus - approx.nu_minus),
                         abs(full.nu_plus - approx.nu_plus))
    assert worst0 < 1e-9

    # quadratic-sum law within 2 % of the exact splitting at 6 mT
    worst6 = 0.0
    delta_b = 2 * ZFS.gamma_e * 6.0 / np.sqrt(3.0)
    for alpha in (0.56, 0.7, 0.85, 0.95, 1.0):
        for p in np.linspace(0.0, 130.0, 14):
            stress = anvil_stress(AnvilStressParams(alpha=alpha, pressure=p))
            nv = to_nv_frame(nv_orientations()[0], stress,
                             LabField(6.0, FIELD_100))
            full = transition_frequencies(build_hamiltonian(ZFS, COUPLINGS, nv))
            mz, mx, my = stress_projections(COUPLINGS, nv.stress_nv)
            approx = first_order_frequencies(ZFS, mz, 2 * np.hypot(mx, my), delta_b)
            worst6 = max(worst6, abs(full.splitting - approx.splitting) / full.splitting)
    assert worst6 < 0.02
    _passed(3, f"first-order formula exact at B=0 ({worst0:.2e} MHz) and within "
               f"{100 * worst6:.2f} % of the exact splitting at 6 mT")


def test_criterion_04_calibrated_slope_reproduction():
    a1 = calibrate_a1(13.42, 0.95)
    couplings = StressCouplings(a1=a1, a2=COUPLINGS.a2, b=COUPLINGS.b, c=COUPLINGS.c)
    predicted = center_shift_slope(0.56, ZFS, couplings)
    assert 9.68 - 0.8 <= predicted <= 9.68 + 0.8
    _passed(4, f"calibrated a1 = {a1:.4f} MHz/GPa predicts a standard-anvil "
               f"center slope of {predicted:.3f} MHz/GPa, inside 9.68 +/- 0.8")


def test_criterion_05_splitting_proportionality_and_pillar_report():
    ratios = []
    for alpha in np.linspace(0.4, 0.99, 7):
        for p in (1.0, 20.0, 75.0, 130.0):
            ratios.append(zero_field_splitting_mhz(alpha, p, ZFS, COUPLINGS)
                          / ((1.0 - alpha) * p))
    ratios = np.asarray(ratios)
    spread = float(np.ptp(ratios) / ratios.mean())
    assert spread < 1e-9

    couplings = calibrated_couplings()
    pillar_predicted = splitting_slope(0.95, ZFS, couplings)
    measured, tol = 0.29, 0.03
    deviation = pillar_predicted - measured
    # known model/measurement mismatch: the prediction is reported, not
    # reconciled; it currently sits above the measured band
    assert pillar_predicted == pytest.approx(0.442, abs=0.002)
    _passed(5, "splitting/( (1-alpha) P ) constant to "
               f"{spread:.2e}; calibrated-b pillar prediction "
               f"{pillar_predicted:.3f} MHz/GPa vs measured {measured} +/- {tol} "
               f"(deviation {deviation:+.3f} MHz/GPa, documented open mismatch)")


def _extract_map_peaks(odmr_map):
    peaks = []
    for b, s in zip(odmr_map.field_values, odmr_map.spectra):
        ps = extract_peaks(s, expected_count=2)
        peaks.append((float(b), TransitionPair(float(ps.centers[0]),
                                               float(ps.centers[1]))))
    return peaks


def test_criterion_06_fit_round_trips():
    sweep = np.linspace(0.0, 10.0, 6)
    shape = LineshapeParams(linewidth_fwhm=10.0, contrast=-0.03)
    grid = default_grid(2600.0, 5000.0)

    worst_alpha, worst_rel_p = 0.0, 0.0
    for alpha in np.linspace(0.4, 1.0, 5):
        for pressure in np.linspace(10.0, 130.0, 5):
            odmr_map = synthesize_map(alpha, pressure, sweep, shape, grid=grid)
            result = fit_stress(_extract_map_peaks(odmr_map))
            worst_alpha = max(worst_alpha, abs(result.alpha - alpha))
            worst_rel_p = max(worst_rel_p, abs(result.pressure - pressure) / pressure)
    assert worst_alpha < 1e-3
    assert worst_rel_p < 1e-3

    # noisy refits at the standard-anvil operating point
    alpha, pressure = 0.56, 40.0
    clean = synthesize_map(alpha, pressure, sweep, shape, grid=grid)
    sigma = 0.2 * 0.03
    alpha_errors, rel_p_errors = [], []
    for trial in range(100):
        noisy_peaks = []
        for i, (b, s) in enumerate(zip(clean.field_values, clean.spectra)):
            noisy = add_noise(s, sigma, seed=1000 * trial + i)
            ps = extract_peaks(noisy, expected_count=2)
            noisy_peaks.append((float(b), TransitionPair(float(ps.centers[0]),
                                                         float(ps.centers[1]))))
        result = fit_stress(noisy_peaks)
        alpha_errors.append(abs(result.alpha - alpha))
        rel_p_errors.append(abs(result.pressure - pressure) / pressure)
    alpha95 = float(np.percentile(alpha_errors, 95))
    rel_p95 = float(np.percentile(rel_p_errors, 95))
    assert alpha95 < 0.02
    assert rel_p95 < 0.02
    _passed(6, f"noiseless 5x5 lattice refits to |d_alpha| {worst_alpha:.2e}, "
               f"|dP|/P {worst_rel_p:.2e}; noisy 95th pct |d_alpha| {alpha95:.4f}, "
               f"|dP|/P {rel_p95:.4f} over 100 seeds")


def test_criterion_07_field_inversion():
    pair_arr = _model_pairs(0.95, 103.0, np.array([6.0]), ZFS, COUPLINGS, FIELD_100)[0]
    result = fit_field(TransitionPair(*pair_arr), known=(0.95, 103.0))
    assert abs(result.b_magnitude - 6.0) < 0.01
    _passed(7, f"field inversion recovers {result.b_magnitude:.6f} mT at the "
               "103 GPa quasi-hydrostatic operating point")


def test_criterion_08_calibration_chain():
    for p in np.linspace(0.0, 150.0, 61):
        rt = raman_edge_to_pressure(pressure_to_raman_edge(p))
        assert abs(rt - p) <= 1e-9 * max(p, 1.0)
        for form in ("vinet", "birch-murnaghan"):
            eos = EosParams(form=form)
            v = eos_pressure_to_volume(p, eos)
            assert abs(eos_volume_to_pressure(v, eos) - p) <= 1e-9 * max(p, 1.0)

    g = GruneisenParams()
    assert (gruneisen_shift(0.9, g) + g.nu0) / g.nu0 == 0.9 ** (-0.97)

    pillar, standard = micropillar_zpl_line(), standard_anvil_zpl_line()
    assert zpl_energy(pillar.v0 - 1.0, pillar) - pillar.intercept == \
        pytest.approx(769.0, abs=1e-9)
    assert zpl_energy(standard.v0 - 1.0, standard) - standard.intercept == \
        pytest.approx(434.0, abs=1e-9)
    _passed(8, "Raman gauge and EOS round-trip to 1e-9 over 0-150 GPa; "
               "Gruneisen and ZPL anchors exact")


def test_criterion_09_eigensolver_oracle_equivalence():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1200):
        a = rng.normal(scale=500, size=(3, 3)) + 1j * rng.normal(scale=500, size=(3, 3))
        h = a + a.conj().T + np.diag([2870.0, 0.0, 2870.0])
        worst = max(worst, float(np.abs(
            np.linalg.eigvalsh(h) - eigvals_cubic(h)).max()))
    assert worst < 1e-9
    _passed(9, f"LAPACK and characteristic-cubic eigenvalues agree to "
               f"{worst:.2e} MHz over 1200 random Hermitian matrices")


def test_criterion_10_cli_determinism(tmp_path):
    cfg = RunConfig(alpha=0.95, pressure=73.0, field_mt=[0.0, 2.5, 5.0, 7.5, 10.0],
                    noise_sigma=0.004, seed=20)
    cfg_path = tmp_path / "config.json"
    cfg.save(cfg_path)
    runner = CliRunner()
    digests = []
    for d in ("run1", "run2"):
        out = tmp_path / d
        result = runner.invoke(cli_main, ["simulate", "--config", str(cfg_path),
                                          "--out", str(out)])
        assert result.exit_code == 0, result.output
        digests.append(tuple((out / n).read_bytes()
                             for n in ("map.csv", "simulate_meta.json")))
    assert digests[0] == digests[1]

    report = json.loads((tmp_path / "run1" / "simulate_meta.json").read_text())
    assert report["config_hash"] == cfg.hash()
    _passed(10, "repeated CLI runs with one config and seed are byte-identical")
