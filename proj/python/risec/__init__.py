"""Secrecy beamforming for RIS-assisted downlinks, C++ core."""

from ._core import (
    RisecError,
    cascade_error,
    config_hash,
    default_experiment,
    default_scene,
    oracle,
    run_sweep,
    solve,
    steering_ula,
    wilson_interval,
)

__all__ = [
    "RisecError",
    "cascade_error",
    "config_hash",
    "default_experiment",
    "default_scene",
    "oracle",
    "run_sweep",
    "solve",
    "steering_ula",
    "wilson_interval",
]
