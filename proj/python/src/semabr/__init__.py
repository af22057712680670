"""Trace-driven ABR simulation with latent-diffusion semantic delivery."""

from ._core import (
    ValidationError,
    batch,
    chunk_qoe,
    e2e_comparison,
    latency_report,
    match_step,
    noise_level,
    simulate,
    synth_trace,
    total_latency,
)

__all__ = [
    "ValidationError",
    "batch",
    "chunk_qoe",
    "e2e_comparison",
    "latency_report",
    "match_step",
    "noise_level",
    "simulate",
    "synth_trace",
    "total_latency",
]
