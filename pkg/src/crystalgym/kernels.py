"""Kernel dispatch: compiled extension when available, numpy fallback otherwise.

Set CRYSTALGYM_KERNELS=python to force the fallback (e.g. for benchmarking),
CRYSTALGYM_KERNELS=compiled to fail loudly when the extension is missing.
"""

from __future__ import annotations

import os

import numpy as np

_MODE = os.environ.get("CRYSTALGYM_KERNELS", "auto")

_compiled = None
if _MODE in ("auto", "compiled"):
    try:
        from . import _ckernels as _compiled
    except ImportError:
        if _MODE == "compiled":
            raise
        _compiled = None


def backend() -> str:
    return "compiled" if _compiled is not None else "python"


def _segment_sum_py(values, seg, num_segments):
    out = np.zeros((num_segments, values.shape[1]), dtype=np.float64)
    np.add.at(out, seg, values)
    return out


def _scatter_rows_add_py(out, idx, rows):
    np.add.at(out, idx, rows)


def _neighbor_pairs_py(frac, cell, cutoff, shift_range):
    n = len(frac)
    r = shift_range
    width = 2 * r + 1
    axis = np.arange(-r, r + 1)
    # shift grid in lexicographic order, matching the compiled loop nest
    shifts = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    # delta[u, v, s, :] = frac[v] + shift[s] - frac[u]
    delta = (frac[None, :, None, :] + shifts[None, None, :, :] - frac[:, None, None, :])
    f0, f1, f2 = delta[..., 0], delta[..., 1], delta[..., 2]
    x = f0 * cell[0, 0] + f1 * cell[1, 0] + f2 * cell[2, 0]
    y = f0 * cell[0, 1] + f1 * cell[1, 1] + f2 * cell[2, 1]
    z = f0 * cell[0, 2] + f1 * cell[1, 2] + f2 * cell[2, 2]
    d2 = x * x + y * y + z * z
    mask = (d2 <= cutoff * cutoff) & (d2 > 0.0)
    u_idx, v_idx, s_idx = np.nonzero(mask)  # row-major: ordered by (u, v, shift)
    d = np.sqrt(d2[mask])
    return (u_idx.astype(np.int64), v_idx.astype(np.int64),
            shifts[s_idx].astype(np.int64), d)


def segment_sum(values, seg, num_segments: int):
    """Sum rows of values (n, d) into buckets given by seg (n,)."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    seg = np.ascontiguousarray(seg, dtype=np.int64)
    if _compiled is not None:
        return _compiled.segment_sum(values, seg, num_segments)
    return _segment_sum_py(values, seg, num_segments)


def segment_mean(values, seg, num_segments: int):
    """Mean rows per bucket; buckets with no rows stay zero."""
    total = segment_sum(values, seg, num_segments)
    counts = np.bincount(np.asarray(seg), minlength=num_segments).astype(np.float64)
    counts[counts == 0.0] = 1.0
    return total / counts[:, None]


def scatter_rows_add(out, idx, rows):
    """out[idx[i]] += rows[i] with duplicate accumulation (gather backward)."""
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    rows = np.ascontiguousarray(rows, dtype=np.float64)
    if _compiled is not None and out.flags["C_CONTIGUOUS"] and out.dtype == np.float64:
        _compiled.scatter_rows_add(out, idx, rows)
    else:
        _scatter_rows_add_py(out, idx, rows)


def neighbor_pairs(frac, cell, cutoff: float, shift_range: int):
    """All ordered site pairs within cutoff over periodic images.

    Returns (src, dst, shifts, dists); ordering is (u, v, shift lexicographic).
    """
    frac = np.ascontiguousarray(frac, dtype=np.float64)
    cell = np.ascontiguousarray(cell, dtype=np.float64)
    if _compiled is not None:
        return _compiled.neighbor_pairs(frac, cell, cutoff, shift_range)
    return _neighbor_pairs_py(frac, cell, cutoff, shift_range)
