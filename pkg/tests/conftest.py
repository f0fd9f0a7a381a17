"""Shared helpers: a Richardson-extrapolated finite-difference gradient oracle.

Analytic gradients here are often ~1e-6 in magnitude; a plain central
difference at fixed h is then dominated by roundoff.  Combining two step
sizes as (4 D(h) - D(2h)) / 3 cancels the leading O(h^2) term and keeps
the subtraction noise h-sized, which separates real gradient bugs from
floating-point artifacts.
"""

import numpy as np

from gaplearn.nn import mse_loss


def numeric_directional(loss_fn, array, index, h):
    orig = array.flat[index]
    array.flat[index] = orig + h
    up = loss_fn()
    array.flat[index] = orig - h
    down = loss_fn()
    array.flat[index] = orig
    return (up - down) / (2 * h)


def richardson_derivative(loss_fn, array, index, h=5e-5):
    fine = numeric_directional(loss_fn, array, index, h)
    coarse = numeric_directional(loss_fn, array, index, 2 * h)
    return (4.0 * fine - coarse) / 3.0


def gradient_max_rel_err(network, x, y, probes=8, seed=0):
    """Worst relative error over sampled parameter and input coordinates."""
    rng = np.random.default_rng(seed)
    x = np.array(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)

    def loss_fn():
        return mse_loss(network.forward(x), y)[0]

    network.zero_grads()
    loss, dloss = mse_loss(network.forward(x), y)
    dx = network.backward(dloss)
    analytic = dict(network.gradients())
    analytic["__input__"] = dx

    worst = 0.0
    arrays = dict(network.parameters())
    arrays["__input__"] = x
    for name, arr in arrays.items():
        grad = analytic[name]
        count = min(probes, arr.size)
        for index in rng.choice(arr.size, size=count, replace=False):
            numeric = richardson_derivative(loss_fn, arr, index)
            a = grad.flat[index]
            if abs(a - numeric) < 1e-10:
                continue
            rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
            worst = max(worst, rel)
    return worst
