"""Seek-dock routine for the simulated Create 2.

The real robot runs this in firmware. This version only uses what the robot
can sense (dock-beam bits, wall signals, bumps, charging) plus odometry from
its own wheel commands. It cycles through four phases:

``search``    no beam in view: wander, turning away from walls.
``sweep``     spin in place until both side receivers see the dock, then
              turn a little further so the dock is dead ahead.
``align``     off the dock axis: turn toward the axis and drive until the
              omni receiver sees both buoys, then sweep again.
``approach``  on the axis: creep forward, steering to keep the dock between
              the side receivers, slowing down in the force field.
"""
from __future__ import annotations

import math

from .create2 import Create2Params, signal_to_distance

# dock-bit indices: receivers (left, omni, right) x (left buoy, field, right buoy)
_LEFT_RX = (0, 1, 2)
_OMNI_LEFT_BUOY, _OMNI_FIELD, _OMNI_RIGHT_BUOY = 3, 4, 5
_RIGHT_RX = (6, 7, 8)
_FIELD_BITS = (1, 4, 7)


class SeekDock:
    spin_speed = 150.0  # mm/s per wheel
    cruise_speed = 100.0
    approach_speed = 60.0
    field_speed = 15.0
    steer = 15.0
    align_turn = math.radians(55.0)
    centre_turn = math.radians(10.0)
    wall_clearance = 0.12  # m
    backoff_s = 0.4
    align_timeout_s = 6.0

    def __init__(self, params: Create2Params = Create2Params(), dt: float = 0.015):
        self.params = params
        self.dt = dt
        self.reset()

    def reset(self) -> None:
        self.phase = "search"
        self.elapsed = 0.0
        self._turn_left = 0.0  # odometric rotation still to do, rad (signed)
        self._timer = 0.0
        self._side = 0
        self._spin_dir = 1
        self.done = False

    # odometry ----------------------------------------------------------
    def _spin(self, direction: int) -> tuple:
        v = self.spin_speed * direction
        return (-v, v)

    def _rotation(self, cmd) -> float:
        return (cmd[1] - cmd[0]) / 1000.0 / self.params.wheelbase * self.dt

    def _turn(self, angle: float) -> None:
        self._turn_left = angle

    def _turning(self):
        """Command for an unfinished odometric turn, else None."""
        if abs(self._turn_left) < 1e-6:
            return None
        cmd = self._spin(1 if self._turn_left > 0 else -1)
        step = self._rotation(cmd)
        if abs(step) >= abs(self._turn_left):
            # finish the turn exactly with a slower spin
            frac = abs(self._turn_left) / abs(step)
            cmd = (cmd[0] * frac, cmd[1] * frac)
            step = self._rotation(cmd)
        self._turn_left -= step
        return cmd

    # control -------------------------------------------------------------
    def command(self, packet) -> tuple:
        self.elapsed += self.dt
        bits = packet.ir_dock_bits
        if packet.charging:
            self.done = True
            return (0.0, 0.0)
        if any(packet.bump) and self.phase != "backoff":
            self.phase = "backoff"
            self._timer = self.backoff_s
            self._turn(0.0)

        if self.phase == "backoff":
            self._timer -= self.dt
            if self._timer > 0:
                return (-self.cruise_speed, -self.cruise_speed)
            self.phase = "sweep" if bits[_OMNI_LEFT_BUOY] or bits[_OMNI_RIGHT_BUOY] else "search"
            self._turn(math.pi / 2)

        cmd = self._turning()
        if cmd is not None:
            return cmd

        omni_left = bits[_OMNI_LEFT_BUOY]
        omni_right = bits[_OMNI_RIGHT_BUOY]
        left_sees = any(bits[i] for i in _LEFT_RX)
        right_sees = any(bits[i] for i in _RIGHT_RX)

        if self.phase == "search":
            if omni_left or omni_right:
                self.phase = "sweep"
            else:
                front = min(signal_to_distance(packet.wall_signals[k], self.params)
                            for k in (2, 3))
                if front < self.wall_clearance:
                    self._turn(math.pi / 2)
                    return self._turning()
                return (self.cruise_speed, self.cruise_speed)

        if self.phase == "sweep":
            if not (omni_left or omni_right):
                self.phase = "search"
                return (self.cruise_speed, self.cruise_speed)
            if left_sees and right_sees:
                if omni_left and omni_right:
                    self.phase = "approach"
                    # the spin enters the window at its edge; centre the dock
                    self._turn(self._spin_dir * self.centre_turn)
                else:
                    # off axis: the lit buoy tells which side we are on
                    self.phase = "align"
                    self._side = 1 if omni_left else -1
                    self._timer = self.align_timeout_s
                    self._turn(-self._side * self.align_turn)
                    # after the align leg the dock lies on this side
                    self._spin_dir = self._side
                return self._turning()
            return self._spin(self._spin_dir)

        if self.phase == "align":
            self._timer -= self.dt
            if (omni_left and omni_right) or self._timer <= 0:
                self.phase = "sweep"
                return self._spin(self._spin_dir)
            front = min(signal_to_distance(packet.wall_signals[k], self.params)
                        for k in (2, 3))
            if front < self.wall_clearance:
                # too close to the dock wall to line up: back away first
                self.phase = "backoff"
                self._timer = self.backoff_s
                return (-self.cruise_speed, -self.cruise_speed)
            return (self.cruise_speed, self.cruise_speed)

        # approach
        if not (left_sees or right_sees) or not (omni_left or omni_right):
            self.phase = "sweep"
            return self._spin(self._spin_dir)
        v = self.field_speed if any(bits[i] for i in _FIELD_BITS) else self.approach_speed
        if left_sees and not right_sees:
            return (v - self.steer, v + self.steer)
        if right_sees and not left_sees:
            return (v + self.steer, v - self.steer)
        if not (omni_left and omni_right):
            # drifted off the axis: nudge back toward it
            s = self.steer / 3
            return (v + s, v - s) if omni_left else (v - s, v + s)
        return (v, v)
