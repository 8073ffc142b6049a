"""Classical fixed-step fourth-order Runge-Kutta for linear, time-independent systems."""

from __future__ import annotations

from typing import Callable

import numpy as np


def linear_generator(rhs: Callable[[np.ndarray], np.ndarray], size: int,
                     dtype=complex) -> np.ndarray:
    """Matrix of a linear right-hand side, assembled column by column from unit vectors."""
    gen = np.zeros((size, size), dtype=dtype)
    unit = np.zeros(size, dtype=dtype)
    for j in range(size):
        unit[j] = 1
        gen[:, j] = rhs(unit)
        unit[j] = 0
    return gen


def rk4_linear(generator: np.ndarray, y0: np.ndarray, dt: float, n_steps: int,
               record_every: int = 1,
               check: Callable[[int, np.ndarray], None] | None = None) -> np.ndarray:
    """Integrate dy/dt = generator @ y with explicit RK4 stages.

    Returns the states at steps 0, record_every, 2*record_every, ... up to
    ``n_steps`` (which must be a multiple of ``record_every``). ``check`` is
    called on each recorded state with its step index.
    """
    if n_steps % record_every:
        raise ValueError("n_steps must be a multiple of record_every")
    y = np.array(y0, dtype=np.result_type(generator, y0))
    out = np.empty((n_steps // record_every + 1, y.size), dtype=y.dtype)
    out[0] = y
    if check is not None:
        check(0, y)
    half = 0.5 * dt
    for step in range(1, n_steps + 1):
        k1 = generator @ y
        k2 = generator @ (y + half * k1)
        k3 = generator @ (y + half * k2)
        k4 = generator @ (y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if step % record_every == 0:
            out[step // record_every] = y
            if check is not None:
                check(step, y)
    return out


def step_count(t_max: float, dt: float) -> int:
    """Number of whole steps of size ``dt`` covering ``t_max`` (tolerant of float drift)."""
    n = int(round(t_max / dt))
    if n < 1 or abs(n * dt - t_max) > 1e-9 * max(1.0, t_max):
        raise ValueError(f"t_max={t_max} is not a whole multiple of dt={dt}")
    return n
