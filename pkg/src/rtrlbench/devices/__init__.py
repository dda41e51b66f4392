"""Deterministic simulators for the UR5 arm, the Dynamixel actuator and the Create 2."""
from dataclasses import fields, replace

import yaml

from ..errors import ConfigurationError
from .create2 import (FAULTY_PAIR, Arena, Create2Device, Create2Packet, Create2Params,
                      Create2State, create2_step, dock_bits, in_capture_zone, ir_signal,
                      seat_pose, signal_to_distance, wall_signals)
from .dxl import DxlDevice, DxlPacket, DxlParams, DxlState, dxl_step
from .seekdock import SeekDock
from .ur5 import (Ur5Device, Ur5Packet, Ur5Params, Ur5State, planar_fingertip, planar_ik,
                  ur5_fingertip, ur5_step)


def override_params(params, overrides):
    """Return ``params`` with the given fields replaced; unknown keys are an error."""
    if not overrides:
        return params
    known = {f.name: f for f in fields(params)}
    clean = {}
    for key, value in overrides.items():
        if key not in known:
            raise ConfigurationError(
                f"unknown parameter {key!r} for {type(params).__name__}")
        clean[key] = tuple(value) if isinstance(value, list) else value
    return replace(params, **clean)


def load_device_params(path) -> dict:
    """Read a device parameter file (``key: value`` lines, YAML syntax)."""
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: expected a key-value mapping")
    return data


__all__ = [
    "FAULTY_PAIR", "Arena", "Create2Device", "Create2Packet", "Create2Params", "Create2State",
    "DxlDevice", "DxlPacket", "DxlParams", "DxlState", "Ur5Device", "Ur5Packet",
    "Ur5Params", "Ur5State", "create2_step", "dock_bits", "dxl_step", "in_capture_zone",
    "ir_signal", "load_device_params", "override_params", "planar_fingertip", "planar_ik",
    "SeekDock", "seat_pose", "signal_to_distance", "wall_signals", "ur5_fingertip", "ur5_step",
]
