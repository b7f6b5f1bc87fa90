"""NumPy reference implementations of the hot numeric kernels.

``_native.pyx`` mirrors every function in this module; the two backends
must agree to float precision (checked in tests/test_kernels.py).  Keep
the math here authoritative: change both files together.
"""

from __future__ import annotations

import numpy as np


def css_residuals(w: np.ndarray, ar: np.ndarray, ma: np.ndarray) -> np.ndarray:
    """One-step innovations of an expanded ARMA recursion on ``w``.

    ``ar`` and ``ma`` are the multiplicatively expanded lag coefficients,
    i.e. the model is  w[t] = sum_i ar[i-1]*w[t-i] + e[t] + sum_j ma[j-1]*e[t-j].
    Residuals are conditional: e[t] = 0 for t < len(ar), and pre-sample
    innovations are taken as zero.
    """
    w = np.ascontiguousarray(w, dtype=np.float64)
    ar = np.ascontiguousarray(ar, dtype=np.float64)
    ma = np.ascontiguousarray(ma, dtype=np.float64)
    n = w.shape[0]
    na = ar.shape[0]
    nb = ma.shape[0]
    eps = np.zeros(n)
    if n <= na:
        return eps
    if nb == 0:
        # no feedback through residuals: fully vectorisable
        eps[na:] = w[na:]
        for i in range(1, na + 1):
            eps[na:] -= ar[i - 1] * w[na - i : n - i]
        return eps
    for t in range(na, n):
        acc = w[t]
        for i in range(1, na + 1):
            acc -= ar[i - 1] * w[t - i]
        jmax = nb if nb <= t else t
        for j in range(1, jmax + 1):
            acc -= ma[j - 1] * eps[t - j]
        eps[t] = acc
    return eps


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def _lstm_forward_cached(Wx, Wh, b, Vh, vb, Wf, bf, wo, bo, X):
    """Forward pass keeping per-step activations for backpropagation."""
    B, L = X.shape
    H = Wh.shape[1]
    k = Wf.shape[0]
    hs_e = np.zeros((L + 1, B, H))
    cs_e = np.zeros((L + 1, B, H))
    act_e = np.zeros((L, B, 4 * H))
    h = hs_e[0]
    c = cs_e[0]
    for t in range(L):
        z = X[:, t, None] * Wx + h @ Wh.T + b
        i = _sigmoid(z[:, :H])
        f = _sigmoid(z[:, H : 2 * H])
        g = np.tanh(z[:, 2 * H : 3 * H])
        o = _sigmoid(z[:, 3 * H :])
        c = f * c + i * g
        h = o * np.tanh(c)
        act_e[t] = np.concatenate([i, f, g, o], axis=1)
        hs_e[t + 1] = h
        cs_e[t + 1] = c

    # decoder: state seeded by the encoder, zero inputs at every step
    hs_d = np.zeros((k + 1, B, H))
    cs_d = np.zeros((k + 1, B, H))
    act_d = np.zeros((k, B, 4 * H))
    hs_d[0] = h
    cs_d[0] = c
    us = np.zeros((k, B, Wf.shape[1]))
    Y = np.zeros((B, k))
    for s in range(k):
        z = hs_d[s] @ Vh.T + vb
        i = _sigmoid(z[:, :H])
        f = _sigmoid(z[:, H : 2 * H])
        g = np.tanh(z[:, 2 * H : 3 * H])
        o = _sigmoid(z[:, 3 * H :])
        c = f * cs_d[s] + i * g
        h = o * np.tanh(c)
        act_d[s] = np.concatenate([i, f, g, o], axis=1)
        hs_d[s + 1] = h
        cs_d[s + 1] = c
        u = np.maximum(h @ Wf[s].T + bf[s], 0.0)
        us[s] = u
        Y[:, s] = u @ wo[s] + bo[s]
    return Y, (hs_e, cs_e, act_e, hs_d, cs_d, act_d, us)


def lstm_forward(Wx, Wh, b, Vh, vb, Wf, bf, wo, bo, X):
    """Encoder-decoder forward pass.

    X has shape (batch, input_len); the result has shape (batch, k) where
    k is the number of fully connected output branches.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    Y, _ = _lstm_forward_cached(Wx, Wh, b, Vh, vb, Wf, bf, wo, bo, X)
    return Y


def lstm_loss_grads(Wx, Wh, b, Vh, vb, Wf, bf, wo, bo, X, T):
    """Mean-MSE loss and its gradients w.r.t. every parameter array.

    Returns ``(loss, (gWx, gWh, gb, gVh, gvb, gWf, gbf, gwo, gbo))`` with
    gradient shapes matching the inputs.  Loss is averaged over both the
    batch and the k output branches.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    T = np.ascontiguousarray(T, dtype=np.float64)
    B, L = X.shape
    H = Wh.shape[1]
    k = Wf.shape[0]
    Y, cache = _lstm_forward_cached(Wx, Wh, b, Vh, vb, Wf, bf, wo, bo, X)
    hs_e, cs_e, act_e, hs_d, cs_d, act_d, us = cache

    r = Y - T
    loss = float(np.mean(r * r))
    dY = (2.0 / (B * k)) * r

    gWx = np.zeros_like(Wx)
    gWh = np.zeros_like(Wh)
    gb = np.zeros_like(b)
    gVh = np.zeros_like(Vh)
    gvb = np.zeros_like(vb)
    gWf = np.zeros_like(Wf)
    gbf = np.zeros_like(bf)
    gwo = np.zeros_like(wo)
    gbo = np.zeros_like(bo)

    dh = np.zeros((B, H))
    dc = np.zeros((B, H))
    for s in reversed(range(k)):
        dy = dY[:, s]
        gwo[s] = us[s].T @ dy
        gbo[s] = dy.sum()
        du = np.outer(dy, wo[s]) * (us[s] > 0)
        gWf[s] = du.T @ hs_d[s + 1]
        gbf[s] = du.sum(axis=0)
        dh = dh + du @ Wf[s]

        i = act_d[s][:, :H]
        f = act_d[s][:, H : 2 * H]
        g = act_d[s][:, 2 * H : 3 * H]
        o = act_d[s][:, 3 * H :]
        tc = np.tanh(cs_d[s + 1])
        do = dh * tc
        dzo = do * o * (1.0 - o)
        dc = dc + dh * o * (1.0 - tc * tc)
        df = dc * cs_d[s]
        dzf = df * f * (1.0 - f)
        di = dc * g
        dzi = di * i * (1.0 - i)
        dg = dc * i
        dzg = dg * (1.0 - g * g)
        dz = np.concatenate([dzi, dzf, dzg, dzo], axis=1)
        gVh += dz.T @ hs_d[s]
        gvb += dz.sum(axis=0)
        dh = dz @ Vh
        dc = dc * f

    for t in reversed(range(L)):
        i = act_e[t][:, :H]
        f = act_e[t][:, H : 2 * H]
        g = act_e[t][:, 2 * H : 3 * H]
        o = act_e[t][:, 3 * H :]
        tc = np.tanh(cs_e[t + 1])
        do = dh * tc
        dzo = do * o * (1.0 - o)
        dc = dc + dh * o * (1.0 - tc * tc)
        df = dc * cs_e[t]
        dzf = df * f * (1.0 - f)
        di = dc * g
        dzi = di * i * (1.0 - i)
        dg = dc * i
        dzg = dg * (1.0 - g * g)
        dz = np.concatenate([dzi, dzf, dzg, dzo], axis=1)
        gWx += (dz * X[:, t, None]).sum(axis=0)
        gWh += dz.T @ hs_e[t]
        gb += dz.sum(axis=0)
        dh = dz @ Wh
        dc = dc * f

    return loss, (gWx, gWh, gb, gVh, gvb, gWf, gbf, gwo, gbo)
