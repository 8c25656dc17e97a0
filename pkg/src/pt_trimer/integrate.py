"""Fixed-step classical Runge-Kutta for ``i dpsi/dt = H psi``."""
from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np


def rk4_step(apply_h: Callable[[np.ndarray], np.ndarray], y: np.ndarray, dt: float) -> np.ndarray:
    f = lambda v: -1j * apply_h(v)  # noqa: E731
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_evolve(apply_h, y0, t_end: float, dt: float, record_every: int = 1,
               on_step: Optional[Callable[[float, np.ndarray], None]] = None):
    """Integrate from 0 to ``t_end``; ``dt`` is shrunk so the grid ends exactly on ``t_end``.

    Returns ``(times, states)`` sampled every ``record_every`` steps (the
    final state is always included).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    steps = int(math.ceil(t_end / dt - 1e-9)) if t_end > 0 else 0
    h = t_end / steps if steps else 0.0
    y = np.array(y0, dtype=complex)
    times, states = [0.0], [y.copy()]
    for n in range(1, steps + 1):
        y = rk4_step(apply_h, y, h)
        t = n * h
        if on_step is not None:
            on_step(t, y)
        if n % record_every == 0 or n == steps:
            times.append(t)
            states.append(y.copy())
    return np.array(times), np.array(states)
