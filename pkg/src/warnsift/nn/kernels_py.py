"""Pure-numpy implementations of the recurrent sweep kernels.

Drop-in equivalents of the compiled versions in ``_core``; the kernel
selector picks whichever is available (see :mod:`warnsift.nn.kernels`).
Gate layout along the last axis is [input, forget, cell, output].
"""

from __future__ import annotations

import numpy as np


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def lstm_forward(
    zx: np.ndarray,
    wh: np.ndarray,
    h_out: np.ndarray,
    c_out: np.ndarray,
    gates: np.ndarray,
) -> None:
    steps = zx.shape[0]
    hidden = wh.shape[0]
    h_prev = np.zeros(hidden)
    c_prev = np.zeros(hidden)
    for t in range(steps):
        z = zx[t] + h_prev @ wh
        i_g = _sigmoid(z[:hidden])
        f_g = _sigmoid(z[hidden : 2 * hidden])
        g_g = np.tanh(z[2 * hidden : 3 * hidden])
        o_g = _sigmoid(z[3 * hidden :])
        c_prev = f_g * c_prev + i_g * g_g
        h_prev = o_g * np.tanh(c_prev)
        gates[t, :hidden] = i_g
        gates[t, hidden : 2 * hidden] = f_g
        gates[t, 2 * hidden : 3 * hidden] = g_g
        gates[t, 3 * hidden :] = o_g
        c_out[t] = c_prev
        h_out[t] = h_prev


def lstm_backward(
    wh: np.ndarray,
    h_all: np.ndarray,
    c_all: np.ndarray,
    gates: np.ndarray,
    dh_up: np.ndarray,
    dz_out: np.ndarray,
    dwh_out: np.ndarray,
) -> None:
    steps = h_all.shape[0]
    hidden = wh.shape[0]
    dh_rec = np.zeros(hidden)
    dc_rec = np.zeros(hidden)
    for t in range(steps - 1, -1, -1):
        i_g = gates[t, :hidden]
        f_g = gates[t, hidden : 2 * hidden]
        g_g = gates[t, 2 * hidden : 3 * hidden]
        o_g = gates[t, 3 * hidden :]
        dh = dh_up[t] + dh_rec
        tc = np.tanh(c_all[t])
        do = dh * tc
        dc = dc_rec + dh * o_g * (1.0 - tc * tc)
        c_prev = c_all[t - 1] if t > 0 else np.zeros(hidden)
        dz_out[t, :hidden] = dc * g_g * i_g * (1.0 - i_g)
        dz_out[t, hidden : 2 * hidden] = dc * c_prev * f_g * (1.0 - f_g)
        dz_out[t, 2 * hidden : 3 * hidden] = dc * i_g * (1.0 - g_g * g_g)
        dz_out[t, 3 * hidden :] = do * o_g * (1.0 - o_g)
        dc_rec = dc * f_g
        dh_rec = dz_out[t] @ wh.T
        if t > 0:
            dwh_out += np.outer(h_all[t - 1], dz_out[t])
