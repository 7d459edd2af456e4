"""Run configuration: every constant and scenario knob, serializable to JSON.

A config round-trips bit-exactly through JSON (canonical key order, float
repr), and its SHA-256 hash is embedded in every output artifact so files
can be traced back to the exact configuration that produced them.
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field

from .calibration import EosParams, GruneisenParams, RamanGaugeParams, ZplLine
from .spectra import (
    DEFAULT_GRID_START_MHZ,
    DEFAULT_GRID_STEP_MHZ,
    DEFAULT_GRID_STOP_MHZ,
    LineshapeParams,
    default_grid,
)
from .spin import StressCouplings, ZfsParams


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass
class RunConfig:
    zfs: ZfsParams = field(default_factory=ZfsParams)
    couplings: StressCouplings = field(default_factory=StressCouplings)
    raman: RamanGaugeParams = field(default_factory=RamanGaugeParams)
    eos: EosParams = field(default_factory=EosParams)
    gruneisen: GruneisenParams = field(default_factory=GruneisenParams)
    zpl: ZplLine = field(default_factory=lambda: ZplLine(slope=-769.0))
    alpha: float = 1.0
    pressure: float = 0.0
    field_mt: list = field(default_factory=lambda: [0.0])
    field_direction: list = field(default_factory=lambda: [1.0, 0.0, 0.0])
    lineshape: LineshapeParams = field(
        default_factory=lambda: LineshapeParams(linewidth_fwhm=10.0, contrast=-0.03))
    grid_start: float = DEFAULT_GRID_START_MHZ
    grid_stop: float = DEFAULT_GRID_STOP_MHZ
    grid_step: float = DEFAULT_GRID_STEP_MHZ
    noise_sigma: float = 0.0
    seed: int = 0

    def grid(self):
        return default_grid(self.grid_start, self.grid_stop, self.grid_step)

    def validate(self):
        """Re-run every domain check, mapping failures to field names."""
        checks = [
            ("zfs", lambda: ZfsParams(**asdict(self.zfs))),
            ("couplings", lambda: StressCouplings(**asdict(self.couplings))),
            ("raman", lambda: RamanGaugeParams(**asdict(self.raman))),
            ("eos", lambda: EosParams(**asdict(self.eos))),
            ("gruneisen", lambda: GruneisenParams(**asdict(self.gruneisen))),
            ("zpl", lambda: ZplLine(**asdict(self.zpl))),
            ("lineshape", lambda: LineshapeParams(
                linewidth_fwhm=self.lineshape.linewidth_fwhm,
                contrast=self.lineshape.contrast,
                baseline=self.lineshape.baseline)),
        ]
        for name, check in checks:
            try:
                check()
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"{name}: {exc}") from exc
        if not 0.0 < self.alpha <= 1.5:
            raise ConfigError(f"alpha: must be in (0, 1.5], got {self.alpha}")
        if not self.pressure >= 0.0:
            raise ConfigError(f"pressure: must be >= 0, got {self.pressure}")
        if len(self.field_mt) < 1:
            raise ConfigError("field_mt: at least one field value required")
        if sorted(self.field_mt) != list(self.field_mt) or \
                len(set(self.field_mt)) != len(self.field_mt):
            raise ConfigError("field_mt: values must be strictly increasing")
        if any(b < 0 for b in self.field_mt):
            raise ConfigError("field_mt: values must be >= 0")
        if len(self.field_direction) != 3:
            raise ConfigError("field_direction: must be a 3-vector")
        norm = sum(x * x for x in self.field_direction) ** 0.5
        if abs(norm - 1.0) > 1e-9:
            raise ConfigError("field_direction: must be a unit vector")
        if not self.grid_step > 0:
            raise ConfigError(f"grid_step: must be > 0, got {self.grid_step}")
        if not self.grid_stop > self.grid_start:
            raise ConfigError("grid_stop: must exceed grid_start")
        if not self.noise_sigma >= 0:
            raise ConfigError(f"noise_sigma: must be >= 0, got {self.noise_sigma}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed: must be a non-negative integer, got {self.seed!r}")
        return self

    def to_dict(self):
        d = asdict(self)
        # tuples (lineshape contrast pairs) must survive the JSON round trip
        if isinstance(d["lineshape"]["contrast"], tuple):
            d["lineshape"]["contrast"] = list(d["lineshape"]["contrast"])
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(sorted(unknown))}")
        sub = {
            "zfs": ZfsParams, "couplings": StressCouplings,
            "raman": RamanGaugeParams, "eos": EosParams,
            "gruneisen": GruneisenParams, "zpl": ZplLine,
        }
        kwargs = {}
        for name, value in data.items():
            if name in sub:
                try:
                    kwargs[name] = sub[name](**value)
                except (ValueError, TypeError) as exc:
                    raise ConfigError(f"{name}: {exc}") from exc
            elif name == "lineshape":
                value = dict(value)
                if isinstance(value.get("contrast"), list):
                    value["contrast"] = tuple(value["contrast"])
                try:
                    kwargs[name] = LineshapeParams(**value)
                except (ValueError, TypeError) as exc:
                    raise ConfigError(f"lineshape: {exc}") from exc
            else:
                kwargs[name] = value
        return cls(**kwargs).validate()

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json() + "\n")

    def hash(self):
        """Canonical SHA-256 of the configuration."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
