"""Command-line interface: simulate, fit, calibrate.

All state lives in files: a JSON config in, CSV/JSON artifacts out.
Repeated runs with the same config and seed are byte-identical.
"""

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import calibration, io
from .config import ConfigError, RunConfig
from .fitting import NoConvergenceError, extract_peaks, fit_field, fit_stress
from .spectra import add_noise, synthesize_map
from .spin import TransitionPair


def _load_config(path):
    try:
        return RunConfig.load(path)
    except ConfigError as exc:
        raise click.ClickException(f"invalid config: {exc}")
    except OSError as exc:
        raise click.ClickException(str(exc))


@click.group()
def main():
    """ODMR modeling of NV centers under stress in diamond anvil cells."""


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="JSON run config.")
@click.option("--out", "out_dir", default=".", type=click.Path(file_okay=False),
              help="Output directory.")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--plot", is_flag=True, help="Also emit an SVG plot of the output.")
def simulate(config_path, out_dir, seed, plot):
    """Synthesize an ODMR spectrum or field-sweep map from a config."""
    cfg = _load_config(config_path)
    if seed is not None:
        cfg.seed = seed
        try:
            cfg.validate()
        except ConfigError as exc:
            raise click.ClickException(f"invalid config: {exc}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    odmr_map = synthesize_map(
        cfg.alpha, cfg.pressure, np.asarray(cfg.field_mt, dtype=float),
        cfg.lineshape, grid=cfg.grid(), zfs=cfg.zfs, couplings=cfg.couplings,
        direction=cfg.field_direction, field_range_mt=None)
    if cfg.noise_sigma > 0:
        odmr_map.spectra = [
            add_noise(s, cfg.noise_sigma, cfg.seed + i)
            for i, s in enumerate(odmr_map.spectra)]

    config_hash = cfg.hash()
    single = len(cfg.field_mt) == 1
    data_path = out / ("spectrum.csv" if single else "map.csv")
    if single:
        io.write_spectrum_csv(data_path, odmr_map.spectra[0], config_hash)
    else:
        io.write_map_csv(data_path, odmr_map, config_hash)
    io.write_json(out / "simulate_meta.json", {
        "config": cfg.to_dict(),
        "config_hash": config_hash,
        "files": [data_path.name],
    })
    if plot:
        _plot_map(odmr_map, out / (data_path.stem + ".svg"))
    click.echo(f"wrote {data_path}")


def _plot_map(odmr_map, path):
    import matplotlib
    matplotlib.use("svg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "nvdac"
    fig, ax = plt.subplots(figsize=(6, 4))
    for b, s in zip(odmr_map.field_values, odmr_map.spectra):
        ax.plot(s.frequencies, s.pl, lw=0.8, label=f"{b:g} mT")
    ax.set_xlabel("microwave frequency (MHz)")
    ax.set_ylabel("normalized PL")
    if len(odmr_map.field_values) <= 8:
        ax.legend(fontsize=7)
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


@main.command()
@click.argument("data_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["stress", "field"]), default="stress",
              show_default=True)
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", default=".", type=click.Path(file_okay=False))
def fit(data_file, mode, config_path, out_dir):
    """Fit stress parameters (alpha, P) to a map, or a field magnitude to a spectrum."""
    cfg = _load_config(config_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    try:
        if mode == "stress":
            report = _fit_stress_report(data_file, cfg)
        else:
            report = _fit_field_report(data_file, cfg)
    except io.ParseError as exc:
        raise click.ClickException(str(exc))
    except (ValueError,) as exc:
        raise click.ClickException(str(exc))

    report_path = out / f"fit_{mode}.json"
    io.write_json(report_path, report)
    click.echo(f"wrote {report_path}")
    if not report["converged"]:
        raise click.ClickException("fit did not converge; best-effort report written")


def _fit_stress_report(data_file, cfg):
    odmr_map, config_hash = io.read_map_csv(data_file)
    map_peaks = []
    peak_meta = []
    for b, spectrum in zip(odmr_map.field_values, odmr_map.spectra):
        peaks = extract_peaks(spectrum, expected_count=2)
        pair = TransitionPair(float(peaks.centers[0]), float(peaks.centers[1]))
        map_peaks.append((float(b), pair))
        peak_meta.append(peaks)

    converged = True
    try:
        result = fit_stress(map_peaks, zfs=cfg.zfs, couplings=cfg.couplings)
    except NoConvergenceError as exc:
        result = exc.best
        converged = False

    from .fitting import _model_pairs
    model = _model_pairs(result.alpha, result.pressure,
                         np.array([b for b, _ in map_peaks]), cfg.zfs,
                         cfg.couplings, tuple(cfg.field_direction))
    points = [{
        "field_mt": b,
        "measured_mhz": [pair.nu_minus, pair.nu_plus],
        "model_mhz": [float(model[i, 0]), float(model[i, 1])],
        "peak_residual_rms": peak_meta[i].residual_rms,
    } for i, (b, pair) in enumerate(map_peaks)]

    return {
        "mode": "stress",
        "converged": converged,
        "alpha": result.alpha,
        "alpha_sigma": _json_num(result.alpha_sigma),
        "pressure_gpa": result.pressure,
        "pressure_sigma_gpa": _json_num(result.pressure_sigma),
        "residual_rms_mhz": result.residual_rms,
        "iterations": result.iterations,
        "points": points,
        "input_config_hash": config_hash,
        "config_hash": cfg.hash(),
    }


def _fit_field_report(data_file, cfg):
    spectrum, config_hash = io.read_spectrum_csv(data_file)
    peaks = extract_peaks(spectrum, expected_count=2)
    pair = TransitionPair(float(peaks.centers[0]), float(peaks.centers[1]))

    converged = True
    try:
        result = fit_field(pair, known=(cfg.alpha, cfg.pressure), zfs=cfg.zfs,
                           couplings=cfg.couplings)
    except NoConvergenceError as exc:
        result = exc.best
        converged = False
    return {
        "mode": "field",
        "converged": converged,
        "b_magnitude_mt": result.b_magnitude,
        "b_sigma_mt": _json_num(result.uncertainty),
        "residual_rms_mhz": result.residual_rms,
        "known_alpha": cfg.alpha,
        "known_pressure_gpa": cfg.pressure,
        "measured_mhz": [pair.nu_minus, pair.nu_plus],
        "input_config_hash": config_hash,
        "config_hash": cfg.hash(),
    }


def _json_num(x):
    """JSON has no Infinity literal; encode unbounded uncertainties as strings."""
    if np.isinf(x) or np.isnan(x):
        return str(x)
    return float(x)


@main.group()
def calibrate():
    """Pressure-gauge and coupling-calibration helpers."""


def _emit(payload, out_path):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
    click.echo(text)


@calibrate.command()
@click.option("--delta-nu", type=float, default=None, help="Raman edge shift, cm^-1.")
@click.option("--pressure", type=float, default=None, help="Pressure, GPa (inverse).")
@click.option("--k0", type=float, default=547.0, show_default=True)
@click.option("--k0-prime", type=float, default=3.75, show_default=True)
@click.option("--nu0", type=float, default=1333.0, show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
def raman(delta_nu, pressure, k0, k0_prime, nu0, out_path):
    """Raman-edge pressure gauge, forward (shift -> GPa) or inverse."""
    gauge = calibration.RamanGaugeParams(k0=k0, k0_prime=k0_prime, nu0=nu0)
    if (delta_nu is None) == (pressure is None):
        raise click.ClickException("pass exactly one of --delta-nu or --pressure")
    try:
        if delta_nu is not None:
            payload = {"delta_nu_cm1": delta_nu,
                       "pressure_gpa": calibration.raman_edge_to_pressure(delta_nu, gauge)}
        else:
            payload = {"pressure_gpa": pressure,
                       "delta_nu_cm1": calibration.pressure_to_raman_edge(pressure, gauge)}
    except ValueError as exc:
        raise click.ClickException(str(exc))
    _emit(payload, out_path)


@calibrate.command()
@click.option("--pressure", type=float, default=None, help="Pressure, GPa.")
@click.option("--volume", type=float, default=None, help="Molar volume, cm^3/mol (inverse).")
@click.option("--v0", type=float, default=3.417, show_default=True)
@click.option("--b0", type=float, default=446.0, show_default=True)
@click.option("--b0-prime", type=float, default=3.0, show_default=True)
@click.option("--form", type=click.Choice(["vinet", "birch-murnaghan"]),
              default="vinet", show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
def eos(pressure, volume, v0, b0, b0_prime, form, out_path):
    """Diamond equation of state, P -> V or V -> P."""
    params = calibration.EosParams(v0=v0, bulk_modulus=b0,
                                   bulk_modulus_derivative=b0_prime, form=form)
    if (pressure is None) == (volume is None):
        raise click.ClickException("pass exactly one of --pressure or --volume")
    try:
        if pressure is not None:
            payload = {"pressure_gpa": pressure,
                       "volume_cm3_mol": calibration.eos_pressure_to_volume(pressure, params)}
        else:
            payload = {"volume_cm3_mol": volume,
                       "pressure_gpa": calibration.eos_volume_to_pressure(volume, params)}
    except ValueError as exc:
        raise click.ClickException(str(exc))
    _emit(payload, out_path)


@calibrate.command()
@click.option("--volume", type=float, default=None, help="Molar volume, cm^3/mol.")
@click.option("--delta-volume", type=float, default=None,
              help="Volume change from ambient, cm^3/mol.")
@click.option("--preset", type=click.Choice(["micropillar", "standard"]),
              default="micropillar", show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
def zpl(volume, delta_volume, preset, out_path):
    """ZPL energy from molar volume, using a measured line preset."""
    line = (calibration.micropillar_zpl_line() if preset == "micropillar"
            else calibration.standard_anvil_zpl_line())
    if (volume is None) == (delta_volume is None):
        raise click.ClickException("pass exactly one of --volume or --delta-volume")
    try:
        if volume is not None:
            payload = {"volume_cm3_mol": volume, "preset": preset,
                       "zpl_energy_mev": calibration.zpl_energy(volume, line)}
        else:
            v = line.v0 + delta_volume
            payload = {"delta_volume_cm3_mol": delta_volume, "preset": preset,
                       "zpl_shift_mev": calibration.zpl_energy(v, line) - line.intercept}
    except ValueError as exc:
        raise click.ClickException(str(exc))
    _emit(payload, out_path)


@calibrate.command()
@click.option("--slope", type=float, required=True,
              help="Measured center-shift slope, MHz/GPa.")
@click.option("--alpha", type=float, required=True,
              help="Stress anisotropy at which the slope was measured.")
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
def a1(slope, alpha, out_path):
    """Hydrostatic spin-stress coupling a1 from a center-shift slope."""
    try:
        value = calibration.calibrate_a1(slope, alpha)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    _emit({"slope_mhz_per_gpa": slope, "alpha": alpha,
           "a1_mhz_per_gpa": value}, out_path)


if __name__ == "__main__":
    sys.exit(main())
