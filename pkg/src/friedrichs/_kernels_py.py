"""NumPy implementation of the pyramid face sum (fallback for the Cython kernel).

For one pyramid face with normal axis ``a`` and transverse axes ``b``, ``c``
the nodes are q_a = +-pi t_i, q_b = pi t_i s_j, q_c = pi t_i v_k. The caller
tabulates per-axis pieces so that

    u0(q)        = ua[i] + ub[i, j] + uc[i, k]
    phi(q + s)   = a0 + ca fa[i] + cb fb[i, j] + cc fc[i, k]

and this returns sum_ijk wt_i ws_j wv_k phi^num_power / (u0 + w2)^den_power.
"""


def face_sum(wt, ws, wv, ua, fa, ub, fb, uc, fc, a0, ca, cb, cc, num_power, den_power, w2):
    if not (0 <= num_power <= 2 and 1 <= den_power <= 2):
        raise ValueError("num_power must be 0..2 and den_power 1..2")
    den = (ua[:, None, None] + ub[:, :, None]) + uc[:, None, :] + w2
    if den_power == 2:
        den = den * den
    if num_power == 0:
        val = 1.0 / den
    else:
        g = (a0 + ca * fa[:, None, None] + cb * fb[:, :, None]) + cc * fc[:, None, :]
        val = (g if num_power == 1 else g * g) / den
    return float(wt @ ((val @ wv) @ ws))
