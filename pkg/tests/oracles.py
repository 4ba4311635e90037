"""Slow, loop-based reference computations that share no code with the package."""
import numpy as np


def partial_trace_loops(m, dx, dy, keep):
    if keep == 0:
        out = np.zeros((dx, dx), dtype=complex)
        for a in range(dx):
            for b in range(dx):
                out[a, b] = sum(m[a * dy + j, b * dy + j] for j in range(dy))
    else:
        out = np.zeros((dy, dy), dtype=complex)
        for a in range(dy):
            for b in range(dy):
                out[a, b] = sum(m[i * dy + a, i * dy + b] for i in range(dx))
    return out


def partial_transpose_loops(m, dx, dy, on):
    out = np.zeros_like(m)
    for i in range(dx):
        for j in range(dy):
            for k in range(dx):
                for l in range(dy):
                    if on == 1:
                        out[i * dy + j, k * dy + l] = m[i * dy + l, k * dy + j]
                    else:
                        out[i * dy + j, k * dy + l] = m[k * dy + j, i * dy + l]
    return out


def choi_from_matrix_units(kraus):
    """(1/d) sum_ij |i><j| (x) N(|i><j|) evaluated unit by unit."""
    d_out, d_in = kraus[0].shape
    j = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    for a in range(d_in):
        for b in range(d_in):
            unit = np.zeros((d_in, d_in))
            unit[a, b] = 1
            out = sum(k @ unit @ k.conj().T for k in kraus)
            j += np.kron(unit, out) / d_in
    return j






def reconstruct_by_sum(omega, states_x, states_y):
    """sum over the coefficient dict of omega * xi^T (x) psi^T, one term at a time."""
    dx, dy = states_x[0].shape[0], states_y[0].shape[0]
    w = np.zeros((dx * dy, dx * dy), dtype=complex)
    for (x, y), value in omega.items():
        w += value * np.kron(states_x[x].T, states_y[y].T)
    return w
