"""Pure numpy implementations of the hot kernels.

Signatures and results match the compiled ``_kernels`` extension exactly.
"""
import numpy as np


def inverse_cdf_counts(cdf, uniforms):
    """Tally uniforms into half-open bins ``[cdf[k-1], cdf[k])``."""
    cdf = np.ascontiguousarray(cdf, dtype=np.float64)
    idx = np.searchsorted(cdf, np.asarray(uniforms, dtype=np.float64), side="right")
    np.minimum(idx, cdf.size - 1, out=idx)
    return np.bincount(idx, minlength=cdf.size).astype(np.int64)


def inverse_cdf_counts_batch(cdf, uniforms):
    """Row-wise ``inverse_cdf_counts`` for a (reps, shots) uniform array."""
    cdf = np.ascontiguousarray(cdf, dtype=np.float64)
    uniforms = np.asarray(uniforms, dtype=np.float64)
    k = cdf.size
    idx = np.searchsorted(cdf, uniforms, side="right")
    np.minimum(idx, k - 1, out=idx)
    offsets = np.arange(uniforms.shape[0])[:, None] * k
    flat = np.bincount((idx + offsets).ravel(), minlength=uniforms.shape[0] * k)
    return flat.reshape(uniforms.shape[0], k).astype(np.int64)


def evolve_sequence(superops, seq, rho):
    """Apply ``superops[seq[0]]``, then ``superops[seq[1]]``, ... to ``rho``."""
    v = np.array(rho, dtype=np.complex128)
    for k in seq:
        v = superops[k] @ v
    return v


def qda_classify(points, means, inv_covs, offsets):
    """Argmax of ``offsets[c] - 0.5 d^T inv_covs[c] d`` with ``d = x - means[c]``.

    Ties go to the lowest class index.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    d = points[:, None, :] - np.asarray(means)[None, :, :]
    quad = np.einsum("nci,cij,ncj->nc", d, np.asarray(inv_covs), d)
    scores = np.asarray(offsets)[None, :] - 0.5 * quad
    return np.argmax(scores, axis=1).astype(np.int64)
