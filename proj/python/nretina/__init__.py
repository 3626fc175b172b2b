"""Bit-accurate fixed-point retina emulator with a double-precision reference."""

from ._nretina import (
    ConfigError,
    DegenerateKernel,
    chirp,
    cli,
    pulse,
    quantize,
    run_fixed,
    run_reference,
    spike_agreement,
    variance_explained,
    xcorr_peak_lag,
)

__all__ = [
    "ConfigError",
    "DegenerateKernel",
    "chirp",
    "cli",
    "pulse",
    "quantize",
    "run_fixed",
    "run_reference",
    "spike_agreement",
    "variance_explained",
    "xcorr_peak_lag",
]
