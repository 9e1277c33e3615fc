# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loop for the pyramid quadrature of cosine-polynomial numerators.

Mirrors ``friedrichs._kernels_py.face_sum``; see that module for the meaning
of the table arguments.
"""


def face_sum(const double[::1] wt, const double[::1] ws, const double[::1] wv,
             const double[::1] ua, const double[::1] fa,
             const double[:, ::1] ub, const double[:, ::1] fb,
             const double[:, ::1] uc, const double[:, ::1] fc,
             double a0, double ca, double cb, double cc,
             int num_power, int den_power, double w2):
    cdef Py_ssize_t nt = wt.shape[0], ns = ws.shape[0], nv = wv.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double total = 0.0, row, col, base_u, base_f, g, num, den
    if num_power < 0 or num_power > 2 or den_power < 1 or den_power > 2:
        raise ValueError("num_power must be 0..2 and den_power 1..2")
    with nogil:
        for i in range(nt):
            row = 0.0
            for j in range(ns):
                base_u = ua[i] + ub[i, j]
                base_f = a0 + ca * fa[i] + cb * fb[i, j]
                col = 0.0
                for k in range(nv):
                    den = base_u + uc[i, k] + w2
                    if den_power == 2:
                        den = den * den
                    if num_power == 0:
                        num = 1.0
                    else:
                        g = base_f + cc * fc[i, k]
                        num = g if num_power == 1 else g * g
                    col += wv[k] * (num / den)
                row += ws[j] * col
            total += wt[i] * row
    return total
