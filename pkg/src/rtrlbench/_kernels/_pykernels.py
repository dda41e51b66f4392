"""Pure-Python reference implementations of the hot kernels.

Every function here has a twin with an identical signature in
``_ckernels.pyx``. The two must agree to floating-point rounding; the test
suite checks this on random inputs.
"""
import math

import numpy as np

BACKEND = "python"

# Bump sensor geometry: contacts within this bearing of straight ahead press
# both bumpers.
_FRONT_HALF_ANGLE = math.radians(20.0)


def gae(rewards, values, next_values, ends, gamma, lam):
    """Backward GAE recursion; ``ends[t]`` cuts the trace after step t."""
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    next_values = np.asarray(next_values, dtype=np.float64)
    ends = np.asarray(ends, dtype=np.bool_)
    n = rewards.shape[0]
    out = np.empty(n, dtype=np.float64)
    acc = 0.0
    decay = gamma * lam
    for t in range(n - 1, -1, -1):
        if ends[t]:
            acc = 0.0
        delta = rewards[t] + gamma * next_values[t] - values[t]
        acc = delta + decay * acc
        out[t] = acc
    return out


def discount_cumsum(x, gamma):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    acc = 0.0
    for t in range(x.shape[0] - 1, -1, -1):
        acc = x[t] + gamma * acc
        out[t] = acc
    return out


def dxl_integrate(angle, velocity, current, dt, kt, damping, inertia, lo, hi):
    """Exact solution of J dv/dt = kt*i - b*v over dt with constant current."""
    torque = kt * current
    if damping > 0.0:
        rate = damping / inertia
        v_inf = torque / damping
        decay = math.exp(-rate * dt)
        new_v = v_inf + (velocity - v_inf) * decay
        new_a = angle + v_inf * dt + (velocity - v_inf) * (1.0 - decay) / rate
    else:
        acc = torque / inertia
        new_v = velocity + acc * dt
        new_a = angle + velocity * dt + 0.5 * acc * dt * dt
    if new_a < lo:
        new_a = lo
        new_v = 0.0
    elif new_a > hi:
        new_a = hi
        new_v = 0.0
    return new_a, new_v


def _wrap(a):
    return (a + math.pi) % (2.0 * math.pi) - math.pi


def create_integrate(x, y, heading, v_left, v_right, dt, wheelbase, radius,
                     width, depth):
    """Differential-drive arc integration inside a rectangular arena.

    Wheel speeds are in mm/s, lengths in metres. Returns the new pose, the
    signed forward travel in mm and the (left, right) bump flags.
    """
    vl = v_left * 1e-3
    vr = v_right * 1e-3
    v = 0.5 * (vl + vr)
    omega = (vr - vl) / wheelbase
    dh = omega * dt
    if abs(dh) < 1e-12:
        nx = x + v * dt * math.cos(heading)
        ny = y + v * dt * math.sin(heading)
    else:
        r_turn = v / omega
        nx = x + r_turn * (math.sin(heading + dh) - math.sin(heading))
        ny = y - r_turn * (math.cos(heading + dh) - math.cos(heading))
    nh = _wrap(heading + dh)

    bump_left = False
    bump_right = False
    contacts = []
    xmin, xmax = radius, width - radius
    ymin, ymax = radius, depth - radius
    if nx > xmax:
        nx = xmax
        contacts.append(0.0)
    elif nx < xmin:
        nx = xmin
        contacts.append(math.pi)
    if ny > ymax:
        ny = ymax
        contacts.append(0.5 * math.pi)
    elif ny < ymin:
        ny = ymin
        contacts.append(-0.5 * math.pi)
    for direction in contacts:
        bearing = _wrap(direction - nh)
        if abs(bearing) <= _FRONT_HALF_ANGLE:
            bump_left = True
            bump_right = True
        elif bearing > 0.0:
            bump_left = True
        else:
            bump_right = True

    mid = heading + 0.5 * dh
    dist = ((nx - x) * math.cos(mid) + (ny - y) * math.sin(mid)) * 1e3
    return nx, ny, nh, dist, bump_left, bump_right


def ray_distances(x, y, heading, bearings, radius, width, depth):
    """Distance from the robot perimeter to the arena wall along each bearing."""
    bearings = np.asarray(bearings, dtype=np.float64)
    out = np.empty(bearings.shape[0], dtype=np.float64)
    for k in range(bearings.shape[0]):
        ang = heading + bearings[k]
        ux = math.cos(ang)
        uy = math.sin(ang)
        ox = x + radius * ux
        oy = y + radius * uy
        best = math.inf
        if ux > 1e-12:
            best = min(best, (width - ox) / ux)
        elif ux < -1e-12:
            best = min(best, -ox / ux)
        if uy > 1e-12:
            best = min(best, (depth - oy) / uy)
        elif uy < -1e-12:
            best = min(best, -oy / uy)
        out[k] = max(best, 0.0)
    return out


def docker_terms(charging, bumps, distance, ir_dock, n, weights):
    """Docking reward components from newest-first packet arrays.

    ``charging`` and ``distance`` hold at least ``n`` entries, ``bumps`` is
    (m, 2) with m >= n, ``ir_dock`` is (20, 9). Callers pad with zeros.
    """
    charging = np.asarray(charging, dtype=np.float64)
    bumps = np.asarray(bumps, dtype=np.float64)
    distance = np.asarray(distance, dtype=np.float64)
    ir_dock = np.asarray(ir_dock, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)

    x = 0.0
    for i in range(n):
        x += (n - i) * charging[i]
    x *= 2.0 / (n * (n + 1))

    y = 0.0
    for k in range(bumps.shape[1]):
        hit = 0.0
        for i in range(n):
            if bumps[i, k] != 0.0:
                hit = 1.0
                break
        y -= hit

    z = 0.0
    for i in range(n):
        z += distance[i]
    z /= n

    v = 0.0
    rows = ir_dock.shape[0]
    for i in range(rows):
        for k in range(ir_dock.shape[1]):
            v += weights[k] * ir_dock[i, k]
    v /= rows
    return x, y, z, v
