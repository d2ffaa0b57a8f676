"""Block spectral decomposition for states commuting with n_A - n_B.

Every two-mode state produced by the illumination pipeline with an EPR probe
is invariant under the joint phase rotation exp(i theta (n_A - n_B)), so its
matrix is block diagonal over the charge sectors q = n_A - n_B. Diagonalizing
the sectors separately turns one eigh of size d_A d_B into O(d_A + d_B) small
ones, which is what makes the Fock-side entropies affordable.
"""

from __future__ import annotations

import numpy as np

from .fock import ENTROPY_FLOOR, FockState, PSD_CLIP, PsdError, SpectralDecomposition

OFF_BLOCK_REL_TOL = 1e-11


def charge_sectors(dim_a: int, dim_b: int):
    """Index sets of the q = n_A - n_B sectors of a (dim_a * dim_b) space.

    Yields (q, flat_indices) with flat index n_a * dim_b + n_b, row-major.
    """
    for q in range(-(dim_b - 1), dim_a):
        lo = max(0, -q)
        hi = min(dim_b - 1, dim_a - 1 - q)
        nb = np.arange(lo, hi + 1)
        yield q, (nb + q) * dim_b + nb


def off_block_mass(matrix: np.ndarray, dim_a: int, dim_b: int) -> float:
    """Frobenius norm of the part of `matrix` outside the charge blocks."""
    total = np.linalg.norm(matrix)
    inside = 0.0
    for _, idx in charge_sectors(dim_a, dim_b):
        sub = matrix[np.ix_(idx, idx)]
        inside += float(np.sum(np.abs(sub) ** 2))
    out = total ** 2 - inside
    return float(np.sqrt(max(out, 0.0)))


def _clip_spectrum(vals: np.ndarray) -> np.ndarray:
    if vals.min() < PSD_CLIP:
        raise PsdError(f"negative eigenvalue {vals.min():.3e} below clip threshold")
    clipped = np.where(vals < 0.0, 0.0, vals)
    total = vals.sum()
    pos = clipped.sum()
    if pos > 0 and total > 0 and pos != total:
        clipped = clipped * (total / pos)
    return clipped


def block_spectral(state: FockState) -> SpectralDecomposition:
    """Spectral decomposition exploiting the charge-block structure.

    Falls back to a dense eigh when the state is not two-mode or carries
    non-negligible weight outside the blocks (relative Frobenius mass above
    OFF_BLOCK_REL_TOL).
    """
    from .fock import spectral  # local import avoids a cycle at module load

    if state.num_modes != 2:
        return spectral(state)
    dim_a, dim_b = state.dims.dim_per_mode
    mat = state.matrix
    norm = np.linalg.norm(mat)
    if norm > 0 and off_block_mass(mat, dim_a, dim_b) > OFF_BLOCK_REL_TOL * norm:
        return spectral(state)
    n = mat.shape[0]
    vals = np.zeros(n)
    vecs = np.zeros((n, n), dtype=complex)
    pos = 0
    for _, idx in charge_sectors(dim_a, dim_b):
        sub = mat[np.ix_(idx, idx)]
        w, v = np.linalg.eigh(sub)
        k = len(idx)
        vals[pos:pos + k] = w
        vecs[np.ix_(idx, np.arange(pos, pos + k))] = v
        pos += k
    vals_checked = _clip_spectrum(vals)
    order = np.argsort(vals_checked)[::-1]
    return SpectralDecomposition(vals_checked[order], vecs[:, order])


def block_entropy(state: FockState) -> float:
    """Von Neumann entropy in bits via the charge-block eigenvalues."""
    dec = block_spectral(state)
    w = dec.eigenvalues[dec.eigenvalues > ENTROPY_FLOOR]
    if w.size == 0:
        return 0.0
    return float(-np.sum(w * np.log2(w)))
