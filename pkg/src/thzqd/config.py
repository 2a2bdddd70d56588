"""Run configuration: one JSON file, paper reference values as defaults."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields

from .cavity import CavityMode, LaserDrive
from .electronic import AxialGrid, QDGeometry
from .errors import ConfigurationError
from .phonon import ApproxDotShape, PhononEnvironment

REFERENCE_LAYERS = [[10.0, 0.0], [2.0, 65.0], [17.0, 0.0], [2.0, 65.0], [10.0, 0.0]]


@dataclass
class GeometryConfig:
    layers: list = field(default_factory=lambda: [list(x) for x in REFERENCE_LAYERS])
    radius_a: float = 13.0
    effective_mass_ratio: float = 1 / 15


@dataclass
class GridConfig:
    n_points: int = 4096
    padding: float = 20.0
    boundary_potential: float = 300.0


@dataclass
class CavityConfig:
    photon_energy: float = 11.5
    refractive_index: float = 3.6
    volume: float | None = None
    fock_cutoff: int = 2


@dataclass
class LaserConfig:
    photon_energy: float = 15.0
    field_amplitude: float = 30.7
    half_amplitude: bool = True


@dataclass
class PhononConfig:
    mass_density: float = 5300.0
    sound_speed: float = 3700.0
    deformation_potential: float = 8.6
    radius_a: float = 13.0
    height_h: float = 40.0


@dataclass
class SweepConfig:
    field_lo: float = 0.0
    field_hi: float = 2.5
    n_steps: int = 251
    root_rule: str = "rising"
    phonon_energies: list = field(default_factory=list)


@dataclass
class GateConfig:
    mode: str = "kernel"
    model: str = "full"
    rise_time: float = 0.01
    dt_max: float = 1e-3
    calibrate: bool = True
    rotation_laser_scale: float = 1.0
    nonadiabatic: bool = True


@dataclass
class ToleranceConfig:
    phonon_epsrel: float = 1e-2
    phonon_inner_epsrel: float = 1e-8


_SECTIONS = {
    "geometry": GeometryConfig, "grid": GridConfig, "cavity": CavityConfig,
    "laser": LaserConfig, "phonon": PhononConfig, "sweep": SweepConfig,
    "gate": GateConfig, "tolerances": ToleranceConfig,
}


@dataclass
class RunConfig:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    cavity: CavityConfig = field(default_factory=CavityConfig)
    laser: LaserConfig = field(default_factory=LaserConfig)
    phonon: PhononConfig = field(default_factory=PhononConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    gate: GateConfig = field(default_factory=GateConfig)
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    output_dir: str = "."

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigurationError("config must be a JSON object")
        unknown = set(data) - set(_SECTIONS) - {"output_dir"}
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        kw = {}
        for name, sect in _SECTIONS.items():
            sub = data.get(name, {})
            if not isinstance(sub, dict):
                raise ConfigurationError(f"config section {name!r} must be an object")
            allowed = {f.name for f in fields(sect)}
            bad = set(sub) - allowed
            if bad:
                raise ConfigurationError(f"unknown keys in {name!r}: {sorted(bad)}")
            kw[name] = sect(**sub)
        cfg = cls(**kw, output_dir=str(data.get("output_dir", ".")))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigurationError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        """Hash of everything except the output directory."""
        d = self.to_dict()
        d.pop("output_dir")
        text = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def validate(self):
        def positive(name, v, allow_zero=False):
            if not isinstance(v, (int, float)) or isinstance(v, bool) \
                    or not math.isfinite(v) or v < 0 or (v == 0 and not allow_zero):
                raise ConfigurationError(f"{name} must be a positive finite number, got {v!r}")

        for sect in ("grid", "cavity", "laser", "phonon", "gate", "tolerances"):
            for f in fields(_SECTIONS[sect]):
                v = getattr(getattr(self, sect), f.name)
                if isinstance(v, bool) or isinstance(v, str) or v is None:
                    continue
                positive(f"{sect}.{f.name}", v, f.name == "rise_time")
        g = self.geometry
        positive("geometry.radius_a", g.radius_a)
        positive("geometry.effective_mass_ratio", g.effective_mass_ratio)
        for lay in g.layers:
            if len(lay) != 2:
                raise ConfigurationError("each layer is [thickness_nm, offset_meV]")
            positive("layer thickness", lay[0])
            if not math.isfinite(lay[1]):
                raise ConfigurationError("layer offsets must be finite")
        s = self.sweep
        for v in (s.field_lo, s.field_hi):
            if not math.isfinite(v):
                raise ConfigurationError("sweep bounds must be finite")
        if s.field_hi <= s.field_lo:
            raise ConfigurationError("empty sweep range")
        for e in s.phonon_energies:
            positive("sweep.phonon_energies", e)
        if s.root_rule not in ("rising", "lowest", "highest"):
            raise ConfigurationError(f"unknown root rule {s.root_rule!r}")
        if self.gate.mode not in ("kernel", "full"):
            raise ConfigurationError("gate.mode must be 'kernel' or 'full'")
        if self.gate.model not in ("full", "effective"):
            raise ConfigurationError("gate.model must be 'full' or 'effective'")
        # the domain objects carry their own range checks
        self.build_geometry(), self.build_cavity(), self.build_laser()
        self.build_phonon()

    def build_geometry(self) -> QDGeometry:
        g = self.geometry
        return QDGeometry(tuple(tuple(map(float, x)) for x in g.layers), g.radius_a,
                          g.effective_mass_ratio)

    def build_grid(self) -> AxialGrid:
        g = self.grid
        return AxialGrid.for_geometry(self.build_geometry(), g.padding, g.n_points,
                                      g.boundary_potential)

    def build_cavity(self) -> CavityMode:
        c = self.cavity
        return CavityMode(c.photon_energy, c.refractive_index, c.volume, c.fock_cutoff)

    def build_laser(self) -> LaserDrive:
        return LaserDrive(self.laser.photon_energy, self.laser.field_amplitude)

    def build_phonon(self):
        p = self.phonon
        return (PhononEnvironment(p.mass_density, p.sound_speed, p.deformation_potential),
                ApproxDotShape(p.radius_a, p.height_h))
