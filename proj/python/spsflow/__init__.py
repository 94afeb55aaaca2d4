"""Sparse periodic systolic compiler and simulator."""

from ._spsflow import (
    ComplianceError,
    ConfigError,
    DimensionError,
    FormatError,
    PpsConfig,
    PpwLayer,
    VerificationError,
    apply_mask,
    compile_layer,
    conv2d,
    make_config,
    run_command,
    simulate,
    storage_bits,
)

__all__ = [
    "ComplianceError",
    "ConfigError",
    "DimensionError",
    "FormatError",
    "PpsConfig",
    "PpwLayer",
    "VerificationError",
    "apply_mask",
    "compile_layer",
    "conv2d",
    "make_config",
    "run_command",
    "simulate",
    "storage_bits",
]
