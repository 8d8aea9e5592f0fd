"""Pure numpy versions of the compiled sign kernels (same contract)."""

import numpy as np


def relu_difference_signs(thetas, points, widths, f0, rel_tol):
    thetas = np.asarray(thetas, dtype=np.float64)
    points = np.asarray(points, dtype=np.float64)
    f0 = np.asarray(f0, dtype=np.float64)
    S, m = thetas.shape[0], points.shape[0]
    widths = [int(w) for w in widths]
    n_layers = len(widths) - 1
    a = np.broadcast_to(points, (S, m, widths[0]))
    am = np.abs(a)
    uncertain = np.zeros((S, m), dtype=bool)
    pos = 0
    for l in range(1, n_layers + 1):
        n_in, n_out = widths[l - 1], widths[l]
        block = thetas[:, pos:pos + n_out * (n_in + 1)].reshape(S, n_out, n_in + 1)
        pos += n_out * (n_in + 1)
        W, b = block[:, :, :n_in], block[:, :, n_in]
        y = np.einsum("sji,spi->spj", W, a) + b[:, None, :]
        ym = np.einsum("sji,spi->spj", np.abs(W), am) + np.abs(b)[:, None, :]
        if l < n_layers:
            uncertain |= np.any(np.abs(y) <= rel_tol * ym, axis=2)
            on = y > 0.0
            a = np.where(on, y, 0.0)
            am = np.where(on, ym, 0.0)
    diff = y[:, :, 0] - f0[None, :]
    dmag = ym[:, :, 0] + np.abs(f0)[None, :]
    out = np.sign(diff).astype(np.int8)
    out[np.abs(diff) <= rel_tol * dmag] = 0
    out[uncertain] = 0
    return out


def poly_difference_signs(thetas, exps, coefs, slot_of_term, f0, rel_tol):
    thetas = np.asarray(thetas, dtype=np.float64)
    exps = np.asarray(exps, dtype=np.int64)
    coefs = np.asarray(coefs, dtype=np.float64)
    f0 = np.asarray(f0, dtype=np.float64)
    S, m = thetas.shape[0], f0.shape[0]
    if exps.shape[0] == 0:
        terms = np.zeros((S, 0))
    else:
        terms = coefs[None, :] * np.prod(thetas[:, None, :] ** exps[None, :, :], axis=2)
    val = np.zeros((S, m))
    mag = np.zeros((S, m))
    for t, p in enumerate(slot_of_term):
        val[:, p] += terms[:, t]
        mag[:, p] += np.abs(terms[:, t])
    diff = val - f0[None, :]
    dmag = mag + np.abs(f0)[None, :]
    out = np.sign(diff).astype(np.int8)
    out[np.abs(diff) <= rel_tol * dmag] = 0
    return out
