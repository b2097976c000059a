"""
Fixed-step 4th order Runge-Kutta for the second-order plant.
"""
import math

import numpy as np

# Effective step target (step * omega_n) used when substeps are chosen
# automatically, and the hard limit for an explicit substep count.
AUTO_STEP_OMEGA = 0.1
MAX_STEP_OMEGA = 0.5


def substeps_for(dt, omega_n, target=AUTO_STEP_OMEGA):
    """Smallest substep count with (dt / substeps) * omega_n <= target."""
    return max(1, math.ceil(dt * float(np.max(omega_n)) / target - 1e-9))


def rk4_step(fn, x, u, h):
    """
    One classical Runge-Kutta step for x' = fn(x, u) with u held constant.

    :param fn: derivative fn(x, u); must broadcast over the leading axes of x
    :param x: state array, last axis is the state dimension
    :param u: input, zero-order held over the step
    :param h: step size in s
    """
    k1 = fn(x, u)
    k2 = fn(x + 0.5 * h * k1, u)
    k3 = fn(x + 0.5 * h * k2, u)
    k4 = fn(x + h * k3, u)

    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def plant_derivative(omega_n, zeta):
    """Derivative of [y, y'] for y'' + 2 zeta omega_n y' + omega_n^2 y = omega_n^2 u."""
    stiffness = np.asarray(omega_n, dtype=float) ** 2
    damping = 2.0 * np.asarray(zeta, dtype=float) * np.asarray(omega_n, dtype=float)

    def fn(state, u):
        y = state[..., 0]
        v = state[..., 1]
        return np.stack([v, stiffness * (u - y) - damping * v], axis=-1)

    return fn


def step_second_order(state, omega_n, zeta, u, dt, substeps):
    """Advance [y, y'] states (shape (..., 2)) by dt with per-state parameters."""
    fn = plant_derivative(omega_n, zeta)
    h = dt / substeps
    for _ in range(substeps):
        state = rk4_step(fn, state, u, h)

    return state


def integrate_second_order(omega_n, zeta, u, dt, y0, v0, substeps):
    """
    Integrate the plant over a zero-order-held input sequence.

    omega_n and zeta may be scalars or equally shaped arrays (a batch of
    plants driven by the same input). Sample k of the result is the
    displacement at t0 + k * dt; input sample k acts on [t_k, t_k+1).

    :return: displacements with shape omega_n.shape + (len(u),)
    """
    omega_n = np.asarray(omega_n, dtype=float)
    zeta = np.broadcast_to(np.asarray(zeta, dtype=float), omega_n.shape)
    u = np.asarray(u, dtype=float)

    state = np.empty(omega_n.shape + (2,))
    state[..., 0] = y0
    state[..., 1] = v0

    out = np.empty(omega_n.shape + (u.size,))
    if u.size == 0:
        return out
    out[..., 0] = state[..., 0]

    fn = plant_derivative(omega_n, zeta)
    h = dt / substeps
    for k in range(u.size - 1):
        for _ in range(substeps):
            state = rk4_step(fn, state, u[k], h)
        out[..., k + 1] = state[..., 0]

    return out
