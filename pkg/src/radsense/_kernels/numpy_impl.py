"""Vectorized numpy versions of the hot loops (fallback when numba is off)."""
import numpy as np

from radsense.constants import SPEED_OF_LIGHT


def _edge_margin(p, surf, edge_pts, edge_in, nedges):
    # p: (..., 3), surf: (...) surface ids
    d = np.einsum("...ec,...ec->...e", p[..., None, :] - edge_pts[surf], edge_in[surf])
    pad = np.arange(edge_pts.shape[1]) >= nedges[surf][..., None]
    return np.where(pad, np.inf, d).min(axis=-1)


def occluded_segments(a, b, skip, normals, origins, edge_pts, edge_in, nedges, tol):
    n_surf = normals.shape[0]
    if a.shape[0] == 0 or n_surf == 0:
        return np.zeros(a.shape[0], dtype=bool)
    da = np.einsum("msc,sc->ms", a[:, None, :] - origins[None], normals)
    db = np.einsum("msc,sc->ms", b[:, None, :] - origins[None], normals)
    cross = ((da > tol) & (db < -tol)) | ((da < -tol) & (db > tol))
    ids = np.arange(n_surf)
    cross &= (ids[None, :] != skip[:, :1]) & (ids[None, :] != skip[:, 1:2])
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(cross, da / (da - db), 0.0)
    p = a[:, None, :] + t[..., None] * (b - a)[:, None, :]
    surf = np.broadcast_to(ids, da.shape)
    hit = cross & (_edge_margin(p, surf, edge_pts, edge_in, nedges) >= -tol)
    return hit.any(axis=1)


def trace_sequences(normals, origins, edge_pts, edge_in, nedges, seqs, orders, tx, rx, tol):
    m_total, kmax = seqs.shape
    valid = np.zeros(m_total, dtype=bool)
    points = np.zeros((m_total, max(kmax, 1), 3))
    lengths = np.zeros(m_total)

    for k in np.unique(orders):
        rows = np.flatnonzero(orders == k)
        seq = seqs[rows, :k]
        mm = rows.size
        images = np.empty((mm, k + 1, 3))
        images[:, 0] = tx
        for j in range(k):
            s = seq[:, j]
            d = np.einsum("mc,mc->m", images[:, j] - origins[s], normals[s])
            images[:, j + 1] = images[:, j] - 2.0 * d[:, None] * normals[s]

        ok = np.ones(mm, dtype=bool)
        pts = np.zeros((mm, max(k, 1), 3))
        cur = np.broadcast_to(rx, (mm, 3)).copy()
        for j in range(k - 1, -1, -1):
            s = seq[:, j]
            d_img = np.einsum("mc,mc->m", images[:, j + 1] - origins[s], normals[s])
            d_cur = np.einsum("mc,mc->m", cur - origins[s], normals[s])
            ok &= (d_img * d_cur < 0.0) & (np.abs(d_img) > tol) & (np.abs(d_cur) > tol)
            with np.errstate(divide="ignore", invalid="ignore"):
                t = np.where(ok, d_img / (d_img - d_cur), 0.0)
            pts[:, j] = images[:, j + 1] + t[:, None] * (cur - images[:, j + 1])
            ok &= _edge_margin(pts[:, j], s, edge_pts, edge_in, nedges) >= tol
            cur = pts[:, j]

        chain = np.concatenate([np.broadcast_to(tx, (mm, 1, 3)), pts[:, :k],
                                np.broadcast_to(rx, (mm, 1, 3))], axis=1)
        for j in range(k):
            s = seq[:, j]
            dp = np.einsum("mc,mc->m", chain[:, j] - origins[s], normals[s])
            dn = np.einsum("mc,mc->m", chain[:, j + 2] - origins[s], normals[s])
            ok &= (dp * dn > 0.0) & (np.abs(dp) > tol) & (np.abs(dn) > tol)

        seg_len = np.zeros(mm)
        for j in range(k + 1):
            live = np.flatnonzero(ok)
            if live.size == 0:
                break
            skip = np.full((live.size, 2), -1, dtype=np.int64)
            if j > 0:
                skip[:, 0] = seq[live, j - 1]
            if j < k:
                skip[:, 1] = seq[live, j]
            a, b = chain[live, j], chain[live, j + 1]
            blocked = occluded_segments(a, b, skip, normals, origins, edge_pts, edge_in, nedges, tol)
            ok[live[blocked]] = False
            seg_len[live] += np.sqrt(np.sum((b - a) ** 2, axis=1))

        valid[rows] = ok
        points[rows, :max(k, 1)] = pts
        lengths[rows] = np.where(ok, seg_len, 0.0)
    return valid, points, lengths


def sinc_sample(delays, amps, t0, fs, n_samples):
    tn = t0 + np.arange(n_samples) / fs
    x = np.pi * fs * (tn[:, None] - delays[None, :])
    with np.errstate(invalid="ignore", divide="ignore"):
        kern = np.where(x == 0.0, 1.0, np.sin(x) / x)
    out = np.zeros(n_samples, dtype=np.complex128)
    for k in range(delays.shape[0]):
        out += amps[k] * kern[:, k]
    return out


def ellipse_accumulate(xs, ys, z, tx, rx, t0, fs, weights, sigma, cutoff):
    c = SPEED_OF_LIGHT
    n_samples = weights.shape[0]
    gx, gy = np.meshgrid(xs, ys)
    s = (np.sqrt((gx - tx[0]) ** 2 + (gy - tx[1]) ** 2 + (z - tx[2]) ** 2)
         + np.sqrt((gx - rx[0]) ** 2 + (gy - rx[1]) ** 2 + (z - rx[2]) ** 2))
    base = np.floor((s / c - t0) * fs).astype(np.int64)
    span = int(np.ceil(cutoff / c * fs)) + 1
    inv2s2 = 1.0 / (2.0 * sigma * sigma)
    out = np.zeros_like(s)
    for j in range(-span, span + 2):
        n = base + j
        inside = (n >= 0) & (n < n_samples)
        nc = np.clip(n, 0, n_samples - 1)
        w = np.where(inside, weights[nc], 0.0)
        d = s - c * (t0 + nc / fs)
        use = inside & (w != 0.0) & (np.abs(d) <= cutoff)
        out += np.where(use, w * np.exp(-d * d * inv2s2), 0.0)
    return out
