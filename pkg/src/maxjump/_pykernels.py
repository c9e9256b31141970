"""Pure numpy implementations of the inner loops.

Used when the compiled extension is unavailable, or when
``MAXJUMP_PURE_PYTHON=1`` is set. Results match the compiled versions
bit for bit, except ``kstep_deltas``, where summation order may differ.
"""

import numpy as np


def sample_chain(cum, uniforms, y0):
    """Walk the chain: next mode is the first column with ``u < cum[y, j]``."""
    m = cum.shape[1]
    modes = np.empty(len(uniforms) + 1, dtype=np.int64)
    modes[0] = y = y0
    rows = [list(r) for r in cum]
    for k, u in enumerate(uniforms.tolist()):
        row = rows[y]
        j = 0
        while j < m - 1 and u >= row[j]:
            j += 1
        y = j
        modes[k + 1] = y
    return modes


def propagate(A, modes, x0, drive, maxplus):
    npaths, steps = modes.shape
    n = A.shape[1]
    out = np.empty((npaths, steps, n))
    out[:, 0] = x0
    x = np.array(x0, dtype=float)
    for k in range(steps - 1):
        mats = A[modes[:, k]]
        if maxplus:
            x = (mats + x[:, None, :]).max(axis=2)
        else:
            x = (mats * x[:, None, :]).max(axis=2)
        if drive is not None:
            x = np.maximum(x, drive[:, k])
        out[:, k + 1] = x
    return out


def kstep_deltas(A, c, P, k0):
    m = A.shape[0]
    deltas = np.empty(m)
    for i in range(m):
        # one row per surviving mode path: current vector, last mode, probability
        w = (A[i] / P[i][None, :]).max(axis=1)[None, :]
        last = np.array([i])
        prob = np.array([1.0])
        for _ in range(k0 - 1):
            nxt = c[last]  # (paths, m)
            keep_path, keep_mode = np.nonzero(nxt)
            prob = prob[keep_path] * nxt[keep_path, keep_mode]
            w = (A[keep_mode] * w[keep_path][:, None, :]).max(axis=2)
            last = keep_mode
        terminal = (P[None, :, :] * w[:, None, :]).max(axis=2)  # (paths, m)
        deltas[i] = float((prob[:, None] * c[last] * terminal).sum())
    return deltas
