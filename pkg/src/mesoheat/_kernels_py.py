"""Pure numpy versions of the compiled stencil kernels."""
import numpy as np


def ring_evolve(u, p, steps):
    a = np.array(u, dtype=np.float64)
    c = 1.0 - 2.0 * p
    for _ in range(steps):
        a = p * np.roll(a, -1) + c * a + p * np.roll(a, 1)
    return a


def line_evolve(u, p, steps):
    a = np.array(u, dtype=np.float64)
    c = 1.0 - 2.0 * p
    for _ in range(steps):
        pad = np.concatenate(([0.0, 0.0], a, [0.0, 0.0]))
        a = p * pad[2:] + c * pad[1:-1] + p * pad[:-2]
    return a
