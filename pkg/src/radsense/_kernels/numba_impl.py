"""numba-compiled hot loops.  Same contracts as ``numpy_impl``."""
import math

import numpy as np
from numba import njit

from radsense.constants import SPEED_OF_LIGHT

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT)
def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


@njit(**_JIT)
def _plane_dist(p, normals, origins, s):
    return ((p[0] - origins[s, 0]) * normals[s, 0]
            + (p[1] - origins[s, 1]) * normals[s, 1]
            + (p[2] - origins[s, 2]) * normals[s, 2])


@njit(**_JIT)
def _edge_margin(p, edge_pts, edge_in, nedges, s):
    best = np.inf
    for e in range(nedges[s]):
        d = ((p[0] - edge_pts[s, e, 0]) * edge_in[s, e, 0]
             + (p[1] - edge_pts[s, e, 1]) * edge_in[s, e, 1]
             + (p[2] - edge_pts[s, e, 2]) * edge_in[s, e, 2])
        if d < best:
            best = d
    return best


@njit(**_JIT)
def _segment_blocked(a, b, normals, origins, edge_pts, edge_in, nedges, skip1, skip2, tol):
    p = np.empty(3)
    for s in range(normals.shape[0]):
        if s == skip1 or s == skip2:
            continue
        da = _plane_dist(a, normals, origins, s)
        db = _plane_dist(b, normals, origins, s)
        if (da > tol and db < -tol) or (da < -tol and db > tol):
            t = da / (da - db)
            for i in range(3):
                p[i] = a[i] + t * (b[i] - a[i])
            if _edge_margin(p, edge_pts, edge_in, nedges, s) >= -tol:
                return True
    return False


@njit(**_JIT)
def occluded_segments(a, b, skip, normals, origins, edge_pts, edge_in, nedges, tol):
    """Blocked flag per segment ``a[i] -> b[i]``; ``skip[i]`` holds two surface ids (-1 = none)."""
    out = np.zeros(a.shape[0], dtype=np.bool_)
    for i in range(a.shape[0]):
        out[i] = _segment_blocked(a[i], b[i], normals, origins, edge_pts, edge_in, nedges,
                                  skip[i, 0], skip[i, 1], tol)
    return out


@njit(**_JIT)
def trace_sequences(normals, origins, edge_pts, edge_in, nedges, seqs, orders, tx, rx, tol):
    """Image-method validation of every surface sequence.

    Returns ``(valid, points, lengths)`` with ``points[m, j]`` the j-th
    reflection point of sequence m.
    """
    m_total = seqs.shape[0]
    kmax = seqs.shape[1]
    valid = np.zeros(m_total, dtype=np.bool_)
    points = np.zeros((m_total, max(kmax, 1), 3))
    lengths = np.zeros(m_total)
    images = np.empty((kmax + 1, 3))
    cur = np.empty(3)
    prev = np.empty(3)
    nxt = np.empty(3)

    for m in range(m_total):
        k = orders[m]
        images[0, :] = tx
        for j in range(k):
            s = seqs[m, j]
            d = _plane_dist(images[j], normals, origins, s)
            for i in range(3):
                images[j + 1, i] = images[j, i] - 2.0 * d * normals[s, i]

        ok = True
        cur[:] = rx
        for j in range(k - 1, -1, -1):
            s = seqs[m, j]
            d_img = _plane_dist(images[j + 1], normals, origins, s)
            d_cur = _plane_dist(cur, normals, origins, s)
            if not (d_img * d_cur < 0.0 and abs(d_img) > tol and abs(d_cur) > tol):
                ok = False
                break
            t = d_img / (d_img - d_cur)
            for i in range(3):
                points[m, j, i] = images[j + 1, i] + t * (cur[i] - images[j + 1, i])
            if _edge_margin(points[m, j], edge_pts, edge_in, nedges, s) < tol:
                ok = False
                break
            cur[:] = points[m, j]
        if not ok:
            continue

        # incoming and outgoing legs must lie on the same side of each plane
        for j in range(k):
            s = seqs[m, j]
            prev[:] = tx if j == 0 else points[m, j - 1]
            nxt[:] = rx if j == k - 1 else points[m, j + 1]
            dp = _plane_dist(prev, normals, origins, s)
            dn = _plane_dist(nxt, normals, origins, s)
            if not (dp * dn > 0.0 and abs(dp) > tol and abs(dn) > tol):
                ok = False
                break
        if not ok:
            continue

        total = 0.0
        for j in range(k + 1):
            prev[:] = tx if j == 0 else points[m, j - 1]
            nxt[:] = rx if j == k else points[m, j]
            s1 = seqs[m, j - 1] if j > 0 else -1
            s2 = seqs[m, j] if j < k else -1
            if _segment_blocked(prev, nxt, normals, origins, edge_pts, edge_in, nedges, s1, s2, tol):
                ok = False
                break
            total += math.sqrt((nxt[0] - prev[0]) ** 2 + (nxt[1] - prev[1]) ** 2
                               + (nxt[2] - prev[2]) ** 2)
        if ok:
            valid[m] = True
            lengths[m] = total
    return valid, points, lengths


@njit(**_JIT)
def sinc_sample(delays, amps, t0, fs, n_samples):
    """values[n] = sum_k amps[k] * sin(x)/x,  x = pi*fs*(t_n - delays[k])."""
    out = np.zeros(n_samples, dtype=np.complex128)
    for n in range(n_samples):
        tn = t0 + n / fs
        acc = 0j
        for k in range(delays.shape[0]):
            x = math.pi * fs * (tn - delays[k])
            if x == 0.0:
                acc += amps[k]
            else:
                acc += amps[k] * (math.sin(x) / x)
        out[n] = acc
    return out


@njit(**_JIT)
def ellipse_accumulate(xs, ys, z, tx, rx, t0, fs, weights, sigma, cutoff):
    """Sum of Gaussian ellipse bands, one per weighted sample, over the grid.

    Cell (iy, ix) receives ``sum_n weights[n] * exp(-d^2 / (2 sigma^2))`` where
    ``d`` is the focal-distance sum minus the range ``c * (t0 + n/fs)``;
    terms with ``|d| > cutoff`` are dropped.
    """
    c = SPEED_OF_LIGHT
    n_samples = weights.shape[0]
    out = np.zeros((ys.shape[0], xs.shape[0]))
    inv2s2 = 1.0 / (2.0 * sigma * sigma)
    dzt = z - tx[2]
    dzr = z - rx[2]
    for iy in range(ys.shape[0]):
        y = ys[iy]
        for ix in range(xs.shape[0]):
            x = xs[ix]
            s = (math.sqrt((x - tx[0]) ** 2 + (y - tx[1]) ** 2 + dzt * dzt)
                 + math.sqrt((x - rx[0]) ** 2 + (y - rx[1]) ** 2 + dzr * dzr))
            base = math.floor((s / c - t0) * fs)
            span = int(math.ceil(cutoff / c * fs)) + 1
            lo = max(0, base - span)
            hi = min(n_samples - 1, base + span + 1)
            acc = 0.0
            for n in range(lo, hi + 1):
                w = weights[n]
                if w == 0.0:
                    continue
                d = s - c * (t0 + n / fs)
                if abs(d) <= cutoff:
                    acc += w * math.exp(-d * d * inv2s2)
            out[iy, ix] = acc
    return out
