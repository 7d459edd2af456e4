"""Bit-exact CSV formats for spectra and maps, plus JSON report writing.

File layout: two comment header lines (units, config hash), a column-name
row, then data rows.  Numbers are written with 9 significant digits; a
file re-serialized after parsing is byte-identical.
"""

import json

import numpy as np

from .spectra import ODMRMap, ODMRSpectrum

SPECTRUM_COLUMNS = ("frequency_mhz", "pl_normalized")
MAP_COLUMNS = ("field_mt", "frequency_mhz", "pl_normalized")


class ParseError(ValueError):
    """Malformed data file; the message carries the 1-based line number."""


def _fmt(x):
    return format(float(x), ".9g")


def _header(columns, config_hash):
    return [
        "# units: " + ",".join(columns),
        f"# config_hash: {config_hash}",
        ",".join(columns),
    ]


def write_spectrum_csv(path, spectrum, config_hash=""):
    lines = _header(SPECTRUM_COLUMNS, config_hash)
    for f, p in zip(spectrum.frequencies, spectrum.pl):
        lines.append(_fmt(f) + "," + _fmt(p))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_map_csv(path, odmr_map, config_hash=""):
    lines = _header(MAP_COLUMNS, config_hash)
    for b, spectrum in zip(odmr_map.field_values, odmr_map.spectra):
        btxt = _fmt(b)
        for f, p in zip(spectrum.frequencies, spectrum.pl):
            lines.append(btxt + "," + _fmt(f) + "," + _fmt(p))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _read_rows(path, columns):
    with open(path, encoding="utf-8") as fh:
        raw = fh.read().splitlines()
    if len(raw) < 4:
        raise ParseError(f"{path}: file truncated, expected header plus data rows")
    if not raw[0].startswith("# units:"):
        raise ParseError(f"{path}: line 1: missing '# units:' header")
    if not raw[1].startswith("# config_hash:"):
        raise ParseError(f"{path}: line 2: missing '# config_hash:' header")
    config_hash = raw[1].split(":", 1)[1].strip()
    if raw[2] != ",".join(columns):
        raise ParseError(
            f"{path}: line 3: expected columns {','.join(columns)}, got {raw[2]!r}")
    rows = []
    for lineno, line in enumerate(raw[3:], start=4):
        if not line:
            raise ParseError(f"{path}: line {lineno}: blank data row")
        parts = line.split(",")
        if len(parts) != len(columns):
            raise ParseError(
                f"{path}: line {lineno}: expected {len(columns)} fields, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ParseError(f"{path}: line {lineno}: {exc}") from exc
    return np.asarray(rows), config_hash


def read_spectrum_csv(path):
    """Returns (ODMRSpectrum, config_hash)."""
    rows, config_hash = _read_rows(path, SPECTRUM_COLUMNS)
    try:
        spectrum = ODMRSpectrum(frequencies=rows[:, 0], pl=rows[:, 1])
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return spectrum, config_hash


def read_map_csv(path):
    """Returns (ODMRMap without metadata, config_hash)."""
    rows, config_hash = _read_rows(path, MAP_COLUMNS)
    field_values = np.unique(rows[:, 0])  # the format guarantees ascending blocks
    spectra = []
    for b in field_values:
        block = rows[rows[:, 0] == b]
        try:
            spectra.append(ODMRSpectrum(frequencies=block[:, 1], pl=block[:, 2]))
        except ValueError as exc:
            raise ParseError(f"{path}: field {b} mT block: {exc}") from exc
    try:
        odmr_map = ODMRMap(field_values=field_values, spectra=spectra)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return odmr_map, config_hash


def write_json(path, payload):
    """Deterministic JSON artifact (sorted keys, repr floats)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
