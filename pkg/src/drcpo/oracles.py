"""Brute-force reference implementations used to cross-check the fast paths.

These share no code with the production modules: the hull oracle enumerates
facets directly, the shadow oracle models a scanner's nearest-return-per-ray
behavior, and the ranking oracle restates the candidate rule in plain
Python. They are correctness references, not performance code.
"""

from __future__ import annotations

import numba
import numpy as np

from .errors import TooManyPoints

MAX_ORACLE_POINTS = 300


@numba.njit(cache=True)
def _facet_scan(shifted, tol):
    """Mark points incident to a facet: for every triple, test whether all
    other points sit weakly on one side of its plane. The inner scan bails
    out as soon as points appear on both sides."""
    n = shifted.shape[0]
    is_vertex = np.zeros(n, numba.boolean)
    for i in range(n - 2):
        ax, ay, az = shifted[i, 0], shifted[i, 1], shifted[i, 2]
        for j in range(i + 1, n - 1):
            bx = shifted[j, 0] - ax
            by = shifted[j, 1] - ay
            bz = shifted[j, 2] - az
            for k in range(j + 1, n):
                cx = shifted[k, 0] - ax
                cy = shifted[k, 1] - ay
                cz = shifted[k, 2] - az
                nx = by * cz - bz * cy
                ny = bz * cx - bx * cz
                nz = bx * cy - by * cx
                norm = np.sqrt(nx * nx + ny * ny + nz * nz)
                if norm <= tol:
                    continue
                nx /= norm
                ny /= norm
                nz /= norm
                off = nx * ax + ny * ay + nz * az
                pos_ok = True
                neg_ok = True
                for p in range(n):
                    d = nx * shifted[p, 0] + ny * shifted[p, 1] + nz * shifted[p, 2] - off
                    if d > tol:
                        pos_ok = False
                        if not neg_ok:
                            break
                    if d < -tol:
                        neg_ok = False
                        if not pos_ok:
                            break
                if pos_ok or neg_ok:
                    is_vertex[i] = True
                    is_vertex[j] = True
                    is_vertex[k] = True
    return is_vertex


def brute_hull_vertices(points, tol_scale=1e-9):
    """Exhaustive 3D hull vertex set via O(n^4) facet enumeration.

    A point triple spans a facet when every other point lies weakly on one
    side of its plane; hull vertices are the points incident to at least
    one facet. Assumes general position (no four near-coplanar points
    within tolerance of a candidate facet containing extra points).
    """
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    if n > MAX_ORACLE_POINTS:
        raise TooManyPoints(f"{n} > {MAX_ORACLE_POINTS}")
    if n <= 4:
        return np.arange(n)
    center = pts.mean(axis=0)
    shifted = pts - center
    scale = np.abs(shifted).max()
    tol = tol_scale * max(scale, 1.0)
    return np.flatnonzero(_facet_scan(shifted, tol))


def brute_hpr_visible(points, viewpoint, radius, tol_scale=1e-12):
    """Reference HPR visibility: flip each point by hand, then ask the
    brute hull which flipped images (plus the viewpoint) are vertices."""
    pts = np.asarray(points, dtype=np.float64)[:, :3]
    view = np.asarray(viewpoint, dtype=np.float64)
    rel = pts - view
    norms = np.sqrt((rel * rel).sum(axis=1))
    flipped = rel + 2.0 * (radius - norms)[:, None] * rel / norms[:, None]
    cloud = np.vstack([flipped + view, view[None, :]])
    verts = brute_hull_vertices(cloud, tol_scale=tol_scale)
    return verts[verts < len(pts)]


def angular_shadow_visible(points, viewpoint, az_bins=256, el_bins=256):
    """Physical scanner model: bucket points by direction, keep the nearest
    return per occupied (azimuth, elevation) bin."""
    if az_bins < 64 or el_bins < 64:
        raise ValueError("need at least 64 bins per axis")
    pts = np.asarray(points, dtype=np.float64)[:, :3]
    rel = pts - np.asarray(viewpoint, dtype=np.float64)
    dist = np.linalg.norm(rel, axis=1)
    az = np.arctan2(rel[:, 1], rel[:, 0])  # [-pi, pi]
    el = np.arcsin(np.clip(rel[:, 2] / np.maximum(dist, 1e-300), -1.0, 1.0))
    ai = np.clip(((az + np.pi) / (2 * np.pi) * az_bins).astype(np.int64), 0, az_bins - 1)
    ei = np.clip(((el + np.pi / 2) / np.pi * el_bins).astype(np.int64), 0, el_bins - 1)
    bin_id = ai * el_bins + ei
    order = np.lexsort((dist, bin_id))
    _, first = np.unique(bin_id[order], return_index=True)
    return np.sort(order[first])


def brute_candidate_ranking(db, source_id, k):
    """Plain restatement of the candidate rule with identical tie-breaking.

    Rank same-class objects by box-volume IoU (ties by ascending id), keep
    the best 2K; score each by its summed density over the source's
    deficient partitions (strictly below the source's non-empty mean, or
    every partition if the source is empty); keep the best K by score,
    ties by IoU then ascending id.
    """
    src = db.objects[source_id]
    sl, sw, sh = src.box.l, src.box.w, src.box.h
    svol = sl * sw * sh

    sims = []
    for j in db.by_class[src.label]:
        if j == source_id:
            continue
        other = db.objects[j]
        ol, ow, oh = other.box.l, other.box.w, other.box.h
        inter = min(ol, sl) * min(ow, sw) * min(oh, sh)
        sim = inter / (ol * ow * oh + svol - inter)
        sims.append((j, sim))
    sims.sort(key=lambda pair: (-pair[1], pair[0]))
    pool = sims[: 2 * k]

    src_dens = [float(v) for v in src.densities]
    nonempty = [v for v in src_dens if v > 0]
    if nonempty:
        mean = sum(nonempty) / len(nonempty)
        deficient = [q for q, v in enumerate(src_dens) if v < mean]
    else:
        deficient = list(range(len(src_dens)))

    scored = []
    for j, sim in pool:
        dens_j = db.objects[j].densities
        score = 0.0
        for q in deficient:
            score += float(dens_j[q])
        scored.append((j, sim, score))
    scored.sort(key=lambda rec: (-rec[2], -rec[1], rec[0]))
    return [j for j, _, _ in scored[:k]]
