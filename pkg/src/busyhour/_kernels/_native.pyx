# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled fast path for the hot numeric kernels.

Mirrors busyhour._kernels.pyref exactly; see that module for the
authoritative description of each function.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, tanh

cnp.import_array()


cdef inline double _sig(double x) nogil:
    return 1.0 / (1.0 + exp(-x))


def css_residuals(w, ar, ma):
    """Conditional one-step innovations of an expanded ARMA recursion."""
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[::1] av = np.ascontiguousarray(ar, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(ma, dtype=np.float64)
    cdef Py_ssize_t n = wv.shape[0]
    cdef Py_ssize_t na = av.shape[0]
    cdef Py_ssize_t nb = bv.shape[0]
    eps_arr = np.zeros(n)
    cdef double[::1] eps = eps_arr
    cdef Py_ssize_t t, i, j, jmax
    cdef double acc
    if n <= na:
        return eps_arr
    with nogil:
        for t in range(na, n):
            acc = wv[t]
            for i in range(1, na + 1):
                acc -= av[i - 1] * wv[t - i]
            jmax = nb if nb <= t else t
            for j in range(1, jmax + 1):
                acc -= bv[j - 1] * eps[t - j]
            eps[t] = acc
    return eps_arr


cdef void _cell_forward(double x, bint has_input,
                        double[::1] Wx, double[:, ::1] Wh, double[::1] b,
                        double[:, ::1] h_prev, double[:, ::1] c_prev,
                        double[:, ::1] h_out, double[:, ::1] c_out,
                        double[:, ::1] act, Py_ssize_t bi, Py_ssize_t H) nogil:
    # one LSTM cell step for sample bi; gate order i, f, g, o
    cdef Py_ssize_t j, r
    cdef double zi, zf, zg, zo, gi, gf, gg, go, c
    for j in range(H):
        zi = b[j]
        zf = b[H + j]
        zg = b[2 * H + j]
        zo = b[3 * H + j]
        if has_input:
            zi += x * Wx[j]
            zf += x * Wx[H + j]
            zg += x * Wx[2 * H + j]
            zo += x * Wx[3 * H + j]
        for r in range(H):
            zi += Wh[j, r] * h_prev[bi, r]
            zf += Wh[H + j, r] * h_prev[bi, r]
            zg += Wh[2 * H + j, r] * h_prev[bi, r]
            zo += Wh[3 * H + j, r] * h_prev[bi, r]
        gi = _sig(zi)
        gf = _sig(zf)
        gg = tanh(zg)
        go = _sig(zo)
        c = gf * c_prev[bi, j] + gi * gg
        act[bi, j] = gi
        act[bi, H + j] = gf
        act[bi, 2 * H + j] = gg
        act[bi, 3 * H + j] = go
        c_out[bi, j] = c
        h_out[bi, j] = go * tanh(c)


def lstm_forward(Wx, Wh, b, Vh, vb, Wf, bf, wo, bo, X):
    """Encoder-decoder forward pass; X is (batch, input_len)."""
    Y, _ = _forward_impl(Wx, Wh, b, Vh, vb, Wf, bf, wo, bo, X, False)
    return Y


def _forward_impl(Wx, Wh, b, Vh, vb, Wf, bf, wo, bo, X, bint keep_cache):
    cdef double[::1] Wxv = np.ascontiguousarray(Wx, dtype=np.float64)
    cdef double[:, ::1] Whv = np.ascontiguousarray(Wh, dtype=np.float64)
    cdef double[::1] bvv = np.ascontiguousarray(b, dtype=np.float64)
    cdef double[:, ::1] Vhv = np.ascontiguousarray(Vh, dtype=np.float64)
    cdef double[::1] vbv = np.ascontiguousarray(vb, dtype=np.float64)
    cdef double[:, :, ::1] Wfv = np.ascontiguousarray(Wf, dtype=np.float64)
    cdef double[:, ::1] bfv = np.ascontiguousarray(bf, dtype=np.float64)
    cdef double[:, ::1] wov = np.ascontiguousarray(wo, dtype=np.float64)
    cdef double[::1] bov = np.ascontiguousarray(bo, dtype=np.float64)
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)

    cdef Py_ssize_t B = Xv.shape[0]
    cdef Py_ssize_t L = Xv.shape[1]
    cdef Py_ssize_t H = Whv.shape[1]
    cdef Py_ssize_t K = Wfv.shape[0]
    cdef Py_ssize_t M = Wfv.shape[1]

    hs_e = np.zeros((L + 1, B, H))
    cs_e = np.zeros((L + 1, B, H))
    act_e = np.zeros((L, B, 4 * H))
    hs_d = np.zeros((K + 1, B, H))
    cs_d = np.zeros((K + 1, B, H))
    act_d = np.zeros((K, B, 4 * H))
    us = np.zeros((K, B, M))
    Y = np.zeros((B, K))

    cdef double[:, :, ::1] hse = hs_e
    cdef double[:, :, ::1] cse = cs_e
    cdef double[:, :, ::1] ace = act_e
    cdef double[:, :, ::1] hsd = hs_d
    cdef double[:, :, ::1] csd = cs_d
    cdef double[:, :, ::1] acd = act_d
    cdef double[:, :, ::1] usv = us
    cdef double[:, ::1] Yv = Y

    cdef Py_ssize_t t, s, bi, m, j
    cdef double a, yacc, u
    with nogil:
        for t in range(L):
            for bi in range(B):
                _cell_forward(Xv[bi, t], True, Wxv, Whv, bvv,
                              hse[t], cse[t], hse[t + 1], cse[t + 1], ace[t], bi, H)
        for bi in range(B):
            for j in range(H):
                hsd[0, bi, j] = hse[L, bi, j]
                csd[0, bi, j] = cse[L, bi, j]
        for s in range(K):
            for bi in range(B):
                _cell_forward(0.0, False, Wxv, Vhv, vbv,
                              hsd[s], csd[s], hsd[s + 1], csd[s + 1], acd[s], bi, H)
                yacc = bov[s]
                for m in range(M):
                    a = bfv[s, m]
                    for j in range(H):
                        a += Wfv[s, m, j] * hsd[s + 1, bi, j]
                    u = a if a > 0.0 else 0.0
                    usv[s, bi, m] = u
                    yacc += wov[s, m] * u
                Yv[bi, s] = yacc
    if keep_cache:
        return Y, (hs_e, cs_e, act_e, hs_d, cs_d, act_d, us)
    return Y, None


cdef void _cell_backward(double[:, ::1] dh, double[:, ::1] dc,
                         double[:, :, ::1] act, double[:, :, ::1] cs,
                         Py_ssize_t step,
                         double[:, ::1] Wh,
                         double[:, ::1] dz, Py_ssize_t B, Py_ssize_t H) nogil:
    # fills dz for this step and rewrites dh/dc for the previous step
    cdef Py_ssize_t bi, j, r
    cdef double gi, gf, gg, go, tc, dcv, acc
    for bi in range(B):
        for j in range(H):
            gi = act[step, bi, j]
            gf = act[step, bi, H + j]
            gg = act[step, bi, 2 * H + j]
            go = act[step, bi, 3 * H + j]
            tc = tanh(cs[step + 1, bi, j])
            dz[bi, 3 * H + j] = dh[bi, j] * tc * go * (1.0 - go)
            dcv = dc[bi, j] + dh[bi, j] * go * (1.0 - tc * tc)
            dz[bi, H + j] = dcv * cs[step, bi, j] * gf * (1.0 - gf)
            dz[bi, j] = dcv * gg * gi * (1.0 - gi)
            dz[bi, 2 * H + j] = dcv * gi * (1.0 - gg * gg)
            dc[bi, j] = dcv * gf
    for bi in range(B):
        for j in range(H):
            acc = 0.0
            for r in range(4 * H):
                acc += dz[bi, r] * Wh[r, j]
            dh[bi, j] = acc


def lstm_loss_grads(Wx, Wh, b, Vh, vb, Wf, bf, wo, bo, X, T):
    """Mean-MSE loss and parameter gradients; see pyref.lstm_loss_grads."""
    cdef double[::1] Wxv = np.ascontiguousarray(Wx, dtype=np.float64)
    cdef double[:, ::1] Whv = np.ascontiguousarray(Wh, dtype=np.float64)
    cdef double[:, ::1] Vhv = np.ascontiguousarray(Vh, dtype=np.float64)
    cdef double[:, :, ::1] Wfv = np.ascontiguousarray(Wf, dtype=np.float64)
    cdef double[:, ::1] wov = np.ascontiguousarray(wo, dtype=np.float64)
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[:, ::1] Tv = np.ascontiguousarray(T, dtype=np.float64)

    Y, cache = _forward_impl(Wx, Wh, b, Vh, vb, Wf, bf, wo, bo, X, True)
    hs_e, cs_e, act_e, hs_d, cs_d, act_d, us = cache

    cdef double[:, :, ::1] hse = hs_e
    cdef double[:, :, ::1] cse = cs_e
    cdef double[:, :, ::1] ace = act_e
    cdef double[:, :, ::1] hsd = hs_d
    cdef double[:, :, ::1] csd = cs_d
    cdef double[:, :, ::1] acd = act_d
    cdef double[:, :, ::1] usv = us
    cdef double[:, ::1] Yv = Y

    cdef Py_ssize_t B = Xv.shape[0]
    cdef Py_ssize_t L = Xv.shape[1]
    cdef Py_ssize_t H = Whv.shape[1]
    cdef Py_ssize_t K = Wfv.shape[0]
    cdef Py_ssize_t M = Wfv.shape[1]

    gWx_a = np.zeros(4 * H)
    gWh_a = np.zeros((4 * H, H))
    gb_a = np.zeros(4 * H)
    gVh_a = np.zeros((4 * H, H))
    gvb_a = np.zeros(4 * H)
    gWf_a = np.zeros((K, M, H))
    gbf_a = np.zeros((K, M))
    gwo_a = np.zeros((K, M))
    gbo_a = np.zeros(K)
    dY_a = np.zeros((B, K))
    dh_a = np.zeros((B, H))
    dc_a = np.zeros((B, H))
    du_a = np.zeros((B, M))
    dz_a = np.zeros((B, 4 * H))

    cdef double[::1] gWx = gWx_a
    cdef double[:, ::1] gWh = gWh_a
    cdef double[::1] gb = gb_a
    cdef double[:, ::1] gVh = gVh_a
    cdef double[::1] gvb = gvb_a
    cdef double[:, :, ::1] gWf = gWf_a
    cdef double[:, ::1] gbf = gbf_a
    cdef double[:, ::1] gwo = gwo_a
    cdef double[::1] gbo = gbo_a
    cdef double[:, ::1] dY = dY_a
    cdef double[:, ::1] dh = dh_a
    cdef double[:, ::1] dc = dc_a
    cdef double[:, ::1] du = du_a
    cdef double[:, ::1] dz = dz_a

    cdef Py_ssize_t bi, s, t, m, j, r
    cdef double loss = 0.0, resid, dyv, duv, acc
    with nogil:
        for bi in range(B):
            for s in range(K):
                resid = Yv[bi, s] - Tv[bi, s]
                loss += resid * resid
                dY[bi, s] = 2.0 * resid / (B * K)
        loss /= B * K

        for s in range(K - 1, -1, -1):
            for bi in range(B):
                dyv = dY[bi, s]
                gbo[s] += dyv
                for m in range(M):
                    gwo[s, m] += usv[s, bi, m] * dyv
                    duv = dyv * wov[s, m] if usv[s, bi, m] > 0.0 else 0.0
                    du[bi, m] = duv
                    gbf[s, m] += duv
                    for j in range(H):
                        gWf[s, m, j] += duv * hsd[s + 1, bi, j]
                for j in range(H):
                    acc = dh[bi, j]
                    for m in range(M):
                        acc += du[bi, m] * Wfv[s, m, j]
                    dh[bi, j] = acc
            _cell_backward(dh, dc, acd, csd, s, Vhv, dz, B, H)
            for bi in range(B):
                for r in range(4 * H):
                    gvb[r] += dz[bi, r]
                    for j in range(H):
                        gVh[r, j] += dz[bi, r] * hsd[s, bi, j]

        for t in range(L - 1, -1, -1):
            _cell_backward(dh, dc, ace, cse, t, Whv, dz, B, H)
            for bi in range(B):
                for r in range(4 * H):
                    gWx[r] += dz[bi, r] * Xv[bi, t]
                    gb[r] += dz[bi, r]
                    for j in range(H):
                        gWh[r, j] += dz[bi, r] * hse[t, bi, j]

    return loss, (gWx_a, gWh_a, gb_a, gVh_a, gvb_a, gWf_a, gbf_a, gwo_a, gbo_a)
