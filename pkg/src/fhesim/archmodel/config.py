"""Accelerator descriptions and preset loading."""
from __future__ import annotations

import dataclasses
import hashlib
import os
from dataclasses import dataclass, field
from pathlib import Path

import tomli

PRESET_ENV = "FHESIM_PRESET_DIR"
BUILTIN_PRESETS = Path(__file__).with_name("presets")
WIDTHS = (32, 64, 256, 512, 1024)

# Clock per datapath width.  EO: ripple-carry adders slow down as they widen.
EO_FREQ_HZ = {256: 3.4e9, 512: 3.0e9, 1024: 2.0e9}
CMOS_FREQ_HZ = {32: 1.0e9, 64: 1.2e9, 512: 0.8e9}

ENERGY_KEYS = (
    "butterfly",
    "mod_mult",
    "mod_add",
    "automorphism",
    "trng_bit",
    "spm_byte",
    "noc_byte",
    "hbm_byte",
    "tu_move",
)


class ConfigError(ValueError):
    pass


def frequency_for_width(W: int, tech: str = "eo", table: dict | None = None) -> float:
    """Clock in Hz for a ``W``-bit datapath; ``table`` entries override the defaults."""
    base = dict(EO_FREQ_HZ if tech == "eo" else CMOS_FREQ_HZ)
    if tech not in ("eo", "cmos"):
        raise ConfigError(f"unknown technology {tech!r}")
    if table:
        base.update({int(k): float(v) for k, v in table.items()})
    if W not in base:
        raise ConfigError(f"no {tech} frequency entry for a {W}-bit datapath")
    return base[W]


@dataclass(frozen=True)
class ArchConfig:
    name: str
    W: int
    tech: str
    cu_count: int
    bu_per_cu: int
    modmul_per_cu: int
    modadd_per_cu: int
    auto_lanes_per_cu: int
    trng_bits_per_s_per_cu: float
    spm_bytes: int
    bank_count: int
    noc_bytes_per_s: float
    hbm_count: int
    hbm_bytes_per_s_each: float
    tu_enabled: bool
    tu_count: int
    tu_freq_hz: float
    tu_width_bits: int
    energy: dict = field(default_factory=dict)
    freq_table: dict = field(default_factory=dict)
    mult_latency_cycles: int = 0  # 0 -> W (one adder stage per bit)
    rf_pressure: dict = field(default_factory=dict)
    live_ciphertexts: int = 8
    sched_groups: int = 4
    spm_refresh_discount: float = 0.0
    power_components_w: dict = field(default_factory=dict)
    power_budget_w: float = 0.0
    area_mm2: float = 0.0
    description: str = ""

    def __post_init__(self):
        if self.W not in WIDTHS:
            raise ConfigError(f"W must be one of {WIDTHS}, got {self.W}")
        rates = {
            "cu_count": self.cu_count,
            "bu_per_cu": self.bu_per_cu,
            "modmul_per_cu": self.modmul_per_cu,
            "modadd_per_cu": self.modadd_per_cu,
            "auto_lanes_per_cu": self.auto_lanes_per_cu,
            "trng_bits_per_s_per_cu": self.trng_bits_per_s_per_cu,
            "spm_bytes": self.spm_bytes,
            "bank_count": self.bank_count,
            "noc_bytes_per_s": self.noc_bytes_per_s,
            "hbm_count": self.hbm_count,
            "hbm_bytes_per_s_each": self.hbm_bytes_per_s_each,
            "tu_freq_hz": self.tu_freq_hz,
            "tu_width_bits": self.tu_width_bits,
            "sched_groups": self.sched_groups,
        }
        bad = [k for k, v in rates.items() if not v > 0]
        if bad:
            raise ConfigError(f"non-positive rates: {bad}")
        if self.tu_enabled and self.tu_count <= 0:
            raise ConfigError("tu_enabled needs tu_count > 0")
        missing = [k for k in ENERGY_KEYS if k not in self.energy]
        if missing:
            raise ConfigError(f"energy table lacks {missing}")
        if any(not float(v) > 0 for v in self.energy.values()):
            raise ConfigError("energies must be positive")
        if not 0 <= self.spm_refresh_discount < 1:
            raise ConfigError("spm_refresh_discount must be in [0, 1)")
        self.freq_hz  # validates the width/frequency pairing

    # -- derived ------------------------------------------------------------------------
    @property
    def freq_hz(self) -> float:
        return frequency_for_width(self.W, self.tech, self.freq_table)

    @property
    def ntt_lanes(self) -> int:
        return self.cu_count * self.bu_per_cu

    @property
    def mult_lanes(self) -> int:
        return self.cu_count * self.modmul_per_cu

    @property
    def add_lanes(self) -> int:
        return self.cu_count * self.modadd_per_cu

    @property
    def auto_lanes(self) -> int:
        return self.cu_count * self.auto_lanes_per_cu

    @property
    def hbm_bytes_per_s(self) -> float:
        return self.hbm_count * self.hbm_bytes_per_s_each

    @property
    def pipeline_fill(self) -> int:
        """Multiplier latency in cycles, inflated by register-file pressure at this width."""
        base = self.mult_latency_cycles or self.W
        return int(round(base * float(self.rf_pressure.get(self.W, self.rf_pressure.get(str(self.W), 1.0)))))

    @property
    def power_total_w(self) -> float:
        """Sum of the listed power components (may differ from a quoted total)."""
        return float(sum(self.power_components_w.values()))

    def replace(self, **changes) -> "ArchConfig":
        return dataclasses.replace(self, **changes)

    def with_overrides(self, overrides: dict[str, str] | list[str]) -> "ArchConfig":
        """Apply ``key=value`` overrides; ``energy.<key>``, ``freq_table.<W>`` address table entries."""
        if isinstance(overrides, (list, tuple)):
            pairs = {}
            for item in overrides:
                if "=" not in item:
                    raise ConfigError(f"override {item!r} is not key=value")
                k, v = item.split("=", 1)
                pairs[k.strip()] = v.strip()
            overrides = pairs
        cfg = self
        names = {f.name: f for f in dataclasses.fields(self)}
        for key, raw in overrides.items():
            if "." in key:
                table, sub = key.split(".", 1)
                if table not in ("energy", "freq_table", "rf_pressure", "power_components_w"):
                    raise ConfigError(f"unknown table {table!r}")
                if table == "energy" and sub not in ENERGY_KEYS:
                    raise ConfigError(f"unknown energy key {sub!r}")
                d = dict(getattr(cfg, table))
                d[int(sub) if table in ("freq_table", "rf_pressure") else sub] = float(raw)
                cfg = cfg.replace(**{table: d})
                continue
            if key not in names or key in ("energy", "freq_table", "rf_pressure", "power_components_w"):
                raise ConfigError(f"unknown config key {key!r}")
            cfg = cfg.replace(**{key: _coerce(raw, getattr(cfg, key))})
        return cfg

    def digest(self) -> str:
        blob = repr(sorted(_flat(dataclasses.asdict(self)).items())).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def _flat(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flat(v, key + "."))
        else:
            out[key] = v
    return out


def _coerce(raw, current):
    if not isinstance(raw, str):
        return raw
    if isinstance(current, bool):
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"not a boolean: {raw!r}")
    if isinstance(current, int):
        return int(float(raw)) if raw.replace(".", "", 1).replace("e", "", 1).isdigit() else int(raw)
    if isinstance(current, float):
        return float(raw)
    return raw


def preset_dirs() -> list[Path]:
    dirs = []
    env = os.environ.get(PRESET_ENV)
    if env:
        dirs.extend(Path(p) for p in env.split(os.pathsep) if p)
    dirs.append(BUILTIN_PRESETS)
    return dirs


def available_presets() -> list[str]:
    names = set()
    for d in preset_dirs():
        if d.is_dir():
            names.update(p.stem for p in d.glob("*.toml"))
    return sorted(names)


def _from_mapping(data: dict) -> ArchConfig:
    names = {f.name for f in dataclasses.fields(ArchConfig)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown preset keys: {sorted(unknown)}")
    data = dict(data)
    for table in ("freq_table", "rf_pressure"):
        if table in data:
            data[table] = {int(k): float(v) for k, v in data[table].items()}
    try:
        return ArchConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_preset(name_or_path: str | Path) -> ArchConfig:
    """Load a preset by name (searched in ``$FHESIM_PRESET_DIR`` then built-ins) or by path."""
    p = Path(name_or_path)
    if p.suffix == ".toml" and p.exists():
        path = p
    else:
        path = None
        for d in preset_dirs():
            cand = d / f"{name_or_path}.toml"
            if cand.exists():
                path = cand
                break
        if path is None:
            raise ConfigError(f"unknown preset {name_or_path!r}; available: {available_presets()}")
    with open(path, "rb") as fh:
        return _from_mapping(tomli.load(fh))
