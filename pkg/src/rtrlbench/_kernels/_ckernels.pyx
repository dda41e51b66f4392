# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, exp, fabs, fmod, M_PI, INFINITY

cnp.import_array()

BACKEND = "cython"

cdef double _FRONT_HALF_ANGLE = 20.0 * M_PI / 180.0


cdef inline double _wrap(double a) noexcept nogil:
    cdef double r = fmod(a + M_PI, 2.0 * M_PI)
    if r < 0:
        r += 2.0 * M_PI
    return r - M_PI


def gae(rewards, values, next_values, ends, double gamma, double lam):
    cdef double[::1] r = np.ascontiguousarray(rewards, dtype=np.float64)
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef double[::1] nv = np.ascontiguousarray(next_values, dtype=np.float64)
    cdef cnp.uint8_t[::1] e = np.ascontiguousarray(ends, dtype=np.uint8)
    cdef Py_ssize_t n = r.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double acc = 0.0
    cdef double decay = gamma * lam
    cdef double delta
    cdef Py_ssize_t t
    with nogil:
        for t in range(n - 1, -1, -1):
            if e[t]:
                acc = 0.0
            delta = r[t] + gamma * nv[t] - v[t]
            acc = delta + decay * acc
            o[t] = acc
    return out


def discount_cumsum(x, double gamma):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double acc = 0.0
    cdef Py_ssize_t t
    with nogil:
        for t in range(n - 1, -1, -1):
            acc = xv[t] + gamma * acc
            o[t] = acc
    return out


def dxl_integrate(double angle, double velocity, double current, double dt,
                  double kt, double damping, double inertia, double lo,
                  double hi):
    cdef double torque = kt * current
    cdef double rate, v_inf, decay, new_v, new_a, acc
    if damping > 0.0:
        rate = damping / inertia
        v_inf = torque / damping
        decay = exp(-rate * dt)
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


cdef inline void _bump_from(double direction, double nh, bint* left,
                            bint* right) noexcept nogil:
    cdef double bearing = _wrap(direction - nh)
    if fabs(bearing) <= _FRONT_HALF_ANGLE:
        left[0] = True
        right[0] = True
    elif bearing > 0.0:
        left[0] = True
    else:
        right[0] = True


def create_integrate(double x, double y, double heading, double v_left,
                     double v_right, double dt, double wheelbase,
                     double radius, double width, double depth):
    cdef double vl = v_left * 1e-3
    cdef double vr = v_right * 1e-3
    cdef double v = 0.5 * (vl + vr)
    cdef double omega = (vr - vl) / wheelbase
    cdef double dh = omega * dt
    cdef double nx, ny, nh, r_turn, mid, dist
    cdef bint bump_left = False
    cdef bint bump_right = False
    if fabs(dh) < 1e-12:
        nx = x + v * dt * cos(heading)
        ny = y + v * dt * sin(heading)
    else:
        r_turn = v / omega
        nx = x + r_turn * (sin(heading + dh) - sin(heading))
        ny = y - r_turn * (cos(heading + dh) - cos(heading))
    nh = _wrap(heading + dh)

    cdef double xmin = radius, xmax = width - radius
    cdef double ymin = radius, ymax = depth - radius
    if nx > xmax:
        nx = xmax
        _bump_from(0.0, nh, &bump_left, &bump_right)
    elif nx < xmin:
        nx = xmin
        _bump_from(M_PI, nh, &bump_left, &bump_right)
    if ny > ymax:
        ny = ymax
        _bump_from(0.5 * M_PI, nh, &bump_left, &bump_right)
    elif ny < ymin:
        ny = ymin
        _bump_from(-0.5 * M_PI, nh, &bump_left, &bump_right)

    mid = heading + 0.5 * dh
    dist = ((nx - x) * cos(mid) + (ny - y) * sin(mid)) * 1e3
    return nx, ny, nh, dist, bool(bump_left), bool(bump_right)


def ray_distances(double x, double y, double heading, bearings, double radius,
                  double width, double depth):
    cdef double[::1] b = np.ascontiguousarray(bearings, dtype=np.float64)
    cdef Py_ssize_t m = b.shape[0]
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t k
    cdef double ang, ux, uy, ox, oy, best, cand
    with nogil:
        for k in range(m):
            ang = heading + b[k]
            ux = cos(ang)
            uy = sin(ang)
            ox = x + radius * ux
            oy = y + radius * uy
            best = INFINITY
            if ux > 1e-12:
                cand = (width - ox) / ux
                if cand < best:
                    best = cand
            elif ux < -1e-12:
                cand = -ox / ux
                if cand < best:
                    best = cand
            if uy > 1e-12:
                cand = (depth - oy) / uy
                if cand < best:
                    best = cand
            elif uy < -1e-12:
                cand = -oy / uy
                if cand < best:
                    best = cand
            o[k] = best if best > 0.0 else 0.0
    return out


def docker_terms(charging, bumps, distance, ir_dock, int n, weights):
    cdef double[::1] c = np.ascontiguousarray(charging, dtype=np.float64)
    cdef double[:, ::1] bp = np.ascontiguousarray(bumps, dtype=np.float64)
    cdef double[::1] d = np.ascontiguousarray(distance, dtype=np.float64)
    cdef double[:, ::1] ir = np.ascontiguousarray(ir_dock, dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef double x = 0.0, y = 0.0, z = 0.0, v = 0.0, hit
    cdef Py_ssize_t i, k
    with nogil:
        for i in range(n):
            x += (n - i) * c[i]
        x *= 2.0 / (n * (n + 1.0))
        for k in range(bp.shape[1]):
            hit = 0.0
            for i in range(n):
                if bp[i, k] != 0.0:
                    hit = 1.0
                    break
            y -= hit
        for i in range(n):
            z += d[i]
        z /= n
        for i in range(ir.shape[0]):
            for k in range(ir.shape[1]):
                v += w[k] * ir[i, k]
        v /= ir.shape[0]
    return x, y, z, v
