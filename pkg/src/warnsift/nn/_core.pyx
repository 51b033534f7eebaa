# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Recurrent sweep kernels.

Only the strictly sequential per-timestep work lives here; the large
input projections (x @ W_x and its gradients) are plain matmuls that
the caller batches outside the loop.  Gate layout along the last axis
is [input, forget, cell, output], each ``hidden`` wide.
"""

from libc.math cimport exp, tanh


cdef inline double _sigmoid(double x) noexcept nogil:
    return 1.0 / (1.0 + exp(-x))


def lstm_forward(
    double[:, ::1] zx,      # (T, 4H) precomputed x @ W_x + b
    double[:, ::1] wh,      # (H, 4H)
    double[:, ::1] h_out,   # (T, H) filled
    double[:, ::1] c_out,   # (T, H) filled
    double[:, ::1] gates,   # (T, 4H) filled with activated gate values
):
    cdef Py_ssize_t steps = zx.shape[0]
    cdef Py_ssize_t hidden = wh.shape[0]
    cdef Py_ssize_t t, j, k
    cdef double i_g, f_g, g_g, o_g, c_prev, c_new, h_prev_k

    with nogil:
        for t in range(steps):
            # z = zx[t] + h_prev @ wh, computed into gates[t] pre-activation
            for j in range(4 * hidden):
                gates[t, j] = zx[t, j]
            if t > 0:
                for k in range(hidden):
                    h_prev_k = h_out[t - 1, k]
                    if h_prev_k != 0.0:
                        for j in range(4 * hidden):
                            gates[t, j] += h_prev_k * wh[k, j]
            for j in range(hidden):
                i_g = _sigmoid(gates[t, j])
                f_g = _sigmoid(gates[t, hidden + j])
                g_g = tanh(gates[t, 2 * hidden + j])
                o_g = _sigmoid(gates[t, 3 * hidden + j])
                gates[t, j] = i_g
                gates[t, hidden + j] = f_g
                gates[t, 2 * hidden + j] = g_g
                gates[t, 3 * hidden + j] = o_g
                c_prev = c_out[t - 1, j] if t > 0 else 0.0
                c_new = f_g * c_prev + i_g * g_g
                c_out[t, j] = c_new
                h_out[t, j] = o_g * tanh(c_new)


def lstm_backward(
    double[:, ::1] wh,      # (H, 4H)
    double[:, ::1] h_all,   # (T, H) forward hidden states
    double[:, ::1] c_all,   # (T, H) forward cell states
    double[:, ::1] gates,   # (T, 4H) activated gates from the forward pass
    double[:, ::1] dh_up,   # (T, H) upstream gradient wrt every h_t
    double[:, ::1] dz_out,  # (T, 4H) filled: gradient wrt pre-activations
    double[:, ::1] dwh_out, # (H, 4H) filled: gradient wrt wh
):
    cdef Py_ssize_t steps = h_all.shape[0]
    cdef Py_ssize_t hidden = wh.shape[0]
    cdef Py_ssize_t t, j, k
    cdef double dh, dc, do, tc, i_g, f_g, g_g, o_g, c_prev, acc, h_prev_k

    # Per-hidden-unit carries across timesteps.
    cdef double[::1] dh_rec = h_all[0].copy()
    cdef double[::1] dc_rec = h_all[0].copy()

    with nogil:
        for j in range(hidden):
            dh_rec[j] = 0.0
            dc_rec[j] = 0.0
        for t in range(steps - 1, -1, -1):
            for j in range(hidden):
                i_g = gates[t, j]
                f_g = gates[t, hidden + j]
                g_g = gates[t, 2 * hidden + j]
                o_g = gates[t, 3 * hidden + j]
                dh = dh_up[t, j] + dh_rec[j]
                tc = tanh(c_all[t, j])
                do = dh * tc
                dc = dc_rec[j] + dh * o_g * (1.0 - tc * tc)
                c_prev = c_all[t - 1, j] if t > 0 else 0.0
                dz_out[t, j] = dc * g_g * i_g * (1.0 - i_g)
                dz_out[t, hidden + j] = dc * c_prev * f_g * (1.0 - f_g)
                dz_out[t, 2 * hidden + j] = dc * i_g * (1.0 - g_g * g_g)
                dz_out[t, 3 * hidden + j] = do * o_g * (1.0 - o_g)
                dc_rec[j] = dc * f_g
            # dh_rec = dz_out[t] @ wh.T ; dwh += outer(h_prev, dz_out[t])
            for k in range(hidden):
                acc = 0.0
                for j in range(4 * hidden):
                    acc += dz_out[t, j] * wh[k, j]
                dh_rec[k] = acc
            if t > 0:
                for k in range(hidden):
                    h_prev_k = h_all[t - 1, k]
                    if h_prev_k != 0.0:
                        for j in range(4 * hidden):
                            dwh_out[k, j] += h_prev_k * dz_out[t, j]
