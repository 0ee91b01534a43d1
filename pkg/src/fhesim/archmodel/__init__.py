"""Parametric accelerator cost model."""
from .config import (
    BUILTIN_PRESETS,
    CMOS_FREQ_HZ,
    ENERGY_KEYS,
    EO_FREQ_HZ,
    PRESET_ENV,
    ArchConfig,
    ConfigError,
    available_presets,
    frequency_for_width,
    load_preset,
)
from .cost import (
    COUNT_KEYS,
    CostReport,
    Kernel,
    Residency,
    cost_kernel,
    energy_table,
    estimate_op,
    estimate_program,
    footprint,
    op_hints,
    plan_residency,
    transpose_moves,
    unit_class,
)
from .counts import (
    FBOT_RECIPE,
    FBOT_ROTATIONS,
    KS_OPS,
    OPS,
    ModelParams,
    as_model_params,
    calibration_k,
    fbot_hints,
    functional_k,
    ks_kernel_counts,
    op_counts,
    op_phases,
)

__all__ = [
    "BUILTIN_PRESETS",
    "CMOS_FREQ_HZ",
    "COUNT_KEYS",
    "ENERGY_KEYS",
    "EO_FREQ_HZ",
    "FBOT_RECIPE",
    "FBOT_ROTATIONS",
    "KS_OPS",
    "OPS",
    "PRESET_ENV",
    "ArchConfig",
    "ConfigError",
    "CostReport",
    "Kernel",
    "ModelParams",
    "Residency",
    "as_model_params",
    "available_presets",
    "calibration_k",
    "cost_kernel",
    "energy_table",
    "estimate_op",
    "estimate_program",
    "fbot_hints",
    "footprint",
    "frequency_for_width",
    "functional_k",
    "ks_kernel_counts",
    "load_preset",
    "op_counts",
    "op_hints",
    "op_phases",
    "plan_residency",
    "transpose_moves",
    "unit_class",
]
