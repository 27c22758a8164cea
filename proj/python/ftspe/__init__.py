"""Finite-time stable pose estimation on SE(3): python bindings."""

from ._core import (
    exp_so3,
    hat,
    vee,
    principal_angle,
    parse_scalar,
    preset_names,
    settling_gain,
    simulate_preset,
)

__all__ = [
    "exp_so3",
    "hat",
    "vee",
    "principal_angle",
    "parse_scalar",
    "preset_names",
    "settling_gain",
    "simulate_preset",
]
