"""NumPy/SciPy implementations of the compiled kernels in ``_kernels.pyx``.

Signatures and outputs match the Cython versions; results agree to
floating-point round-off.
"""
import numpy as np
from scipy.linalg import solve_banded
from scipy.signal import lfilter


def refresh_scan(times, offsets):
    times = np.asarray(times, dtype=np.float64)
    offsets = np.asarray(offsets, dtype=np.int64)
    d = len(offsets) - 1
    series = [times[offsets[k]:offsets[k + 1]] for k in range(d)]
    cap = min(len(s) for s in series)
    grid = np.empty(cap)
    idx = np.zeros((d, cap), dtype=np.int64)
    T = max(s[0] for s in series)
    grid[0] = T
    p = 1
    while p < cap:
        pos = [int(np.searchsorted(s, T, side="right")) for s in series]
        if any(q == len(s) for q, s in zip(pos, series)):
            break
        idx[:, p] = pos
        T = max(s[q] for q, s in zip(pos, series))
        grid[p] = T
        p += 1
    return grid[:p], idx[:, :p]


def hitting_scan(path, var_step, lower, upper, uniforms, bridge):
    path = np.asarray(path, dtype=np.float64)
    m = len(path)
    hits, signs = [], []
    start, chunk, ref = 0, 256, path[0]
    while start < m - 1:
        end = min(m, start + chunk + 1)
        seg = path[start:end] - ref
        x0, x1 = seg[:-1], seg[1:]
        down = x1 <= -lower
        up = (x1 >= upper) & ~down
        if bridge:
            v = var_step[start:end - 1]
            inside = ~(down | up) & (v > 0.0)
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                pd = np.exp(-2.0 * (x0 + lower) * (x1 + lower) / v)
                pu = np.exp(-2.0 * (upper - x0) * (upper - x1) / v)
            u = uniforms[start:end - 1]
            bd = inside & (u < pd)
            down = down | bd
            up = up | (inside & ~bd & (u < pd + pu))
        hit = down | up
        if hit.any():
            j = int(np.argmax(hit))
            start = start + j + 1
            ref = path[start]
            hits.append(start)
            signs.append(-1 if down[j] else 1)
        else:
            start = end - 1
            chunk *= 2
    return np.asarray(hits, dtype=np.int64), np.asarray(signs, dtype=np.int8)


def exp_two_sided(x, decay):
    x = np.asarray(x, dtype=np.float64)
    fwd = lfilter([1.0], [1.0, -decay], x, axis=0)
    bwd = lfilter([1.0], [1.0, -decay], x[::-1], axis=0)[::-1]
    return fwd + bwd - x


def window_sum(x, w, shift, n_out):
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    L, d = x.shape
    m = len(w)
    left = max(0, -shift)
    right = max(0, n_out - 1 + shift + m - L)
    out = np.empty((n_out, d))
    start = shift + left
    for c in range(d):
        xp = np.concatenate([np.zeros(left), x[:, c], np.zeros(right)])
        out[:, c] = np.correlate(xp, w, mode="valid")[start:start + n_out]
    return out


def tridiagonal_solve(sub, diag, sup, rhs):
    n = len(diag)
    ab = np.zeros((3, n))
    ab[0, 1:] = sup[: n - 1]
    ab[1] = diag
    ab[2, :-1] = sub[: n - 1]
    return solve_banded((1, 1), ab, np.asarray(rhs, dtype=np.float64))
