"""Truncated Fock-space machinery for few-mode bosonic states.

Conventions used throughout the package:

* quadratures x = a + a†, p = -i(a - a†), so the vacuum has variance 1
  in each quadrature and [x, p] = 2i
* entropies are in bits
* a multimode density matrix is stored dense, row-major over the mode
  index tuple (mode 0 is the slowest index)

Pure-state constructors report how much trace the truncation lost and can
be asked to fail when the deficit exceeds a tolerance, so downstream code
never works with a silently broken basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

ENTROPY_FLOOR = 1e-14     # eigenvalues at or below this contribute no entropy
PSD_CLIP = -1e-10         # eigenvalues in [PSD_CLIP, 0) are rounding debris
HERMITICITY_TOL = 1e-12


class TruncationError(Exception):
    """A truncated object lost more trace (or amplitude) than allowed."""


class PsdError(Exception):
    """An operator that must be positive semidefinite is not, beyond rounding."""


@dataclass(frozen=True)
class TruncationSpec:
    """Per-mode Fock-space dimensions plus the acceptable trace loss."""

    dim_per_mode: tuple[int, ...]
    trace_tol: float = 1e-6

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dim_per_mode)
        object.__setattr__(self, "dim_per_mode", dims)
        if len(dims) == 0:
            raise ValueError("need at least one mode")
        if any(d < 2 for d in dims):
            raise ValueError(f"every mode needs dimension >= 2, got {dims}")
        if not (0.0 <= self.trace_tol < 1.0):
            raise ValueError(f"trace_tol must lie in [0, 1), got {self.trace_tol}")

    @property
    def num_modes(self) -> int:
        return len(self.dim_per_mode)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dim_per_mode))


@dataclass
class FockState:
    """Density matrix on a truncated multimode Fock space.

    ``is_pure_hint`` records that the state was built as a projector; it is
    advisory metadata only and never replaces a numerical check.
    """

    matrix: np.ndarray
    dims: TruncationSpec
    is_pure_hint: bool = False

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        d = self.dims.total_dim
        if mat.shape != (d, d):
            raise ValueError(f"matrix shape {mat.shape} does not match dims {self.dims.dim_per_mode}")
        herm = np.max(np.abs(mat - mat.conj().T))
        if herm > HERMITICITY_TOL:
            raise ValueError(f"matrix is not Hermitian (max deviation {herm:.3e})")
        # store exactly Hermitian so eigh sees a clean input
        self.matrix = 0.5 * (mat + mat.conj().T)

    @property
    def num_modes(self) -> int:
        return self.dims.num_modes

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def trace_deficit(self) -> float:
        return 1.0 - self.trace

    def tensor_view(self) -> np.ndarray:
        """The matrix reshaped to one ket and one bra axis per mode."""
        dims = self.dims.dim_per_mode
        return self.matrix.reshape(dims + dims)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (descending) and matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _deficit_check(deficit: float, tol: float | None, what: str):
    if tol is not None and deficit > tol:
        raise TruncationError(f"{what}: trace deficit {deficit:.3e} exceeds tolerance {tol:.3e}")


# ---------------------------------------------------------------------------
# elementary operators


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def number_operator(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def quadrature_operators(dim: int) -> tuple[np.ndarray, np.ndarray]:
    """x = a + a† and p = -i(a - a†) on a single truncated mode."""
    a = annihilation(dim)
    return a + a.conj().T, -1j * (a - a.conj().T)


def displacement_matrix(alpha: complex, dim: int) -> np.ndarray:
    """Matrix elements <m|D(alpha)|n> of the displacement operator.

    Uses the closed form with associated Laguerre polynomials, so each entry
    is the exact infinite-dimensional matrix element; only the state built
    from them is truncated. Prefactors are assembled in log space to stay
    finite at large indices.
    """
    alpha = complex(alpha)
    x = abs(alpha) ** 2
    m = np.arange(dim)
    out = np.zeros((dim, dim), dtype=complex)
    if abs(alpha) < 1e-300:
        np.fill_diagonal(out, 1.0)
        return out
    phase = alpha / abs(alpha)
    for n in range(dim):
        k = m[n:] - n  # m >= n
        lag = eval_genlaguerre(n, k, x)
        logpre = 0.5 * (gammaln(n + 1) - gammaln(m[n:] + 1)) + k * np.log(abs(alpha))
        col = np.exp(logpre - 0.5 * x) * (phase ** k) * lag
        out[n:, n] = col
        # <m|D|n> for m < n from D(alpha)^dagger = D(-alpha)
        rowk = k[1:]
        if rowk.size:
            logpre2 = 0.5 * (gammaln(n + 1) - gammaln(m[n + 1:] + 1)) + rowk * np.log(abs(alpha))
            row = np.exp(logpre2 - 0.5 * x) * ((-np.conj(phase)) ** rowk) * eval_genlaguerre(n, rowk, x)
            out[n, n + 1:] = row
    return out


# ---------------------------------------------------------------------------
# state constructors


def coherent_vector(alpha: complex, dim: int) -> np.ndarray:
    """Fock amplitudes e^{-|alpha|^2/2} alpha^n / sqrt(n!) via a stable recurrence."""
    v = np.zeros(dim, dtype=complex)
    v[0] = np.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, dim):
        v[n] = v[n - 1] * alpha / np.sqrt(n)
    return v


def pure_state(vector: np.ndarray, dims: TruncationSpec, *, is_pure_hint: bool = True) -> FockState:
    vec = np.asarray(vector, dtype=complex).reshape(-1)
    if vec.size != dims.total_dim:
        raise ValueError("vector length does not match dims")
    return FockState(np.outer(vec, vec.conj()), dims, is_pure_hint=is_pure_hint)


def coherent_state(alpha: complex, dim: int, *, renormalize: bool = False,
                   trace_tol: float | None = None) -> FockState:
    v = coherent_vector(alpha, dim)
    deficit = 1.0 - float(np.vdot(v, v).real)
    _deficit_check(deficit, trace_tol, f"coherent_state(alpha={alpha}, dim={dim})")
    if renormalize:
        v = v / np.linalg.norm(v)
    return pure_state(v, TruncationSpec((dim,), trace_tol if trace_tol is not None else 1e-6))


def thermal_state(nbar: float, dim: int, *, trace_tol: float | None = None) -> FockState:
    if nbar < 0:
        raise ValueError("nbar must be nonnegative")
    if nbar == 0:
        w = np.zeros(dim)
        w[0] = 1.0
    else:
        ratio = nbar / (nbar + 1.0)
        w = ratio ** np.arange(dim) / (nbar + 1.0)
    deficit = 1.0 - float(w.sum())
    _deficit_check(deficit, trace_tol, f"thermal_state(nbar={nbar}, dim={dim})")
    return FockState(np.diag(w).astype(complex),
                     TruncationSpec((dim,), trace_tol if trace_tol is not None else 1e-6))


def squeezed_vacuum_vector(r: float, dim: int) -> np.ndarray:
    """Amplitudes of S(r) |0> with S(r) = exp(r (a^2 - a†^2) / 2).

    Only even levels are populated: c_0 = 1/sqrt(cosh r) and
    c_2k = c_{2k-2} (-tanh r) sqrt((2k-1)/(2k)). r > 0 squeezes the x
    quadrature (variance e^{-2r}).
    """
    v = np.zeros(dim, dtype=complex)
    v[0] = 1.0 / np.sqrt(np.cosh(r))
    t = -np.tanh(r)
    for k in range(1, (dim + 1) // 2):
        v[2 * k] = v[2 * k - 2] * t * np.sqrt((2 * k - 1) / (2.0 * k))
    return v


def squeezed_coherent_vector(r: float, alpha: complex, dim: int, *, pad: int = 40) -> np.ndarray:
    """Amplitudes of D(alpha) S(r) |0>, built in a padded space then cut.

    Mean photon number is |alpha|^2 + sinh^2 r.
    """
    dwork = dim + pad
    vec = squeezed_vacuum_vector(r, dwork)
    if alpha != 0:
        vec = displacement_matrix(alpha, dwork) @ vec
    return vec[:dim]


def squeezed_coherent_state(r: float, alpha: complex, dim: int, *,
                            trace_tol: float | None = None) -> FockState:
    v = squeezed_coherent_vector(r, alpha, dim)
    deficit = 1.0 - float(np.vdot(v, v).real)
    _deficit_check(deficit, trace_tol, f"squeezed_coherent_state(r={r}, alpha={alpha}, dim={dim})")
    return pure_state(v, TruncationSpec((dim,), trace_tol if trace_tol is not None else 1e-6))


def epr_vector(nbar: float, dim: int, *, sign: int = -1) -> np.ndarray:
    """Schmidt amplitudes of the two-mode squeezed vacuum on |n,n>.

    lam = sqrt(nbar/(nbar+1)); amplitudes sqrt(1-lam^2) (sign*lam)^n. The
    default keeps the (-lam)^n phase; sign=+1 gives the locally equivalent
    convention (idler phase flip), useful for invariance checks.
    """
    if nbar < 0:
        raise ValueError("nbar must be nonnegative")
    if sign not in (-1, 1):
        raise ValueError("sign must be -1 or +1")
    lam = np.sqrt(nbar / (nbar + 1.0))
    c = np.sqrt(1.0 - lam ** 2) * (sign * lam) ** np.arange(dim)
    vec = np.zeros(dim * dim, dtype=complex)
    vec[np.arange(dim) * dim + np.arange(dim)] = c
    return vec


def epr_state(nbar: float, dim: int, *, sign: int = -1,
              trace_tol: float | None = None) -> FockState:
    vec = epr_vector(nbar, dim, sign=sign)
    deficit = 1.0 - float(np.vdot(vec, vec).real)
    _deficit_check(deficit, trace_tol, f"epr_state(nbar={nbar}, dim={dim})")
    return pure_state(vec, TruncationSpec((dim, dim), trace_tol if trace_tol is not None else 1e-6))


# ---------------------------------------------------------------------------
# composition and reduction


def tensor(*states: FockState) -> FockState:
    if not states:
        raise ValueError("need at least one state")
    mat = states[0].matrix
    dims: tuple[int, ...] = states[0].dims.dim_per_mode
    tol = states[0].dims.trace_tol
    pure = states[0].is_pure_hint
    for s in states[1:]:
        mat = np.kron(mat, s.matrix)
        dims = dims + s.dims.dim_per_mode
        tol = max(tol, s.dims.trace_tol)
        pure = pure and s.is_pure_hint
    return FockState(mat, TruncationSpec(dims, tol), is_pure_hint=pure)


def partial_trace(state: FockState, keep: Sequence[int]) -> FockState:
    """Trace out every mode not listed in ``keep`` (kept order is ascending)."""
    m = state.num_modes
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= m for k in keep):
        raise ValueError(f"keep={keep} out of range for {m} modes")
    if len(keep) == 0:
        raise ValueError("must keep at least one mode")
    t = state.tensor_view()
    removed = 0
    for mode in range(m):
        if mode in keep:
            continue
        ax = mode - removed
        nleft = m - removed
        t = np.trace(t, axis1=ax, axis2=ax + nleft)
        removed += 1
    dims = tuple(state.dims.dim_per_mode[k] for k in keep)
    d = int(np.prod(dims))
    return FockState(t.reshape(d, d), TruncationSpec(dims, state.dims.trace_tol))


def beamsplitter_unitary(dim: int, reflectivity: float) -> np.ndarray:
    """Two-mode beam splitter U = exp(theta (a†b - a b†)), sin^2 theta = reflectivity.

    Acting on modes (i, j) = (first, second tensor factor), the Heisenberg
    map is a_i -> sqrt(1-eps) a_i + sqrt(eps) a_j: the first mode is the
    output port that picks up a sqrt(eps) share of the second.
    """
    if not (0.0 <= reflectivity <= 1.0):
        raise ValueError("reflectivity must lie in [0, 1]")
    theta = np.arcsin(np.sqrt(reflectivity))
    a = annihilation(dim)
    gen = np.kron(a.conj().T, a) - np.kron(a, a.conj().T)   # a_i† a_j - a_i a_j†
    h = 1j * gen                                            # Hermitian generator
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * theta * w)) @ v.conj().T


def apply_beamsplitter(state: FockState, modes: tuple[int, int], reflectivity: float,
                       *, unitary: np.ndarray | None = None) -> FockState:
    """Mix two equal-dimension modes on a beam splitter.

    modes[0] becomes the output port carrying sqrt(eps) of modes[1] (and
    sqrt(1-eps) of itself); modes[1] carries the orthogonal combination.
    """
    i, j = modes
    if i == j:
        raise ValueError("modes must be distinct")
    di = state.dims.dim_per_mode[i]
    dj = state.dims.dim_per_mode[j]
    if di != dj:
        raise ValueError("beam splitter requires equal mode dimensions")
    u = beamsplitter_unitary(di, reflectivity) if unitary is None else unitary
    m = state.num_modes
    t = state.tensor_view()
    # bring (i, j) ket axes to the front, (i, j) bra axes right after
    ket = [i, j] + [k for k in range(m) if k not in (i, j)]
    perm = ket + [m + k for k in ket]
    t = np.transpose(t, perm)
    rest = int(np.prod([state.dims.dim_per_mode[k] for k in ket[2:]])) if len(ket) > 2 else 1
    t = t.reshape(di * dj, rest, di * dj, rest)
    t = np.einsum("ab,brcs,dc->ards", u, t, u.conj(), optimize=True)
    t = t.reshape([state.dims.dim_per_mode[k] for k in ket] * 2)
    inv = np.argsort(perm)
    t = np.transpose(t, inv)
    d = state.dims.total_dim
    return FockState(t.reshape(d, d), state.dims, is_pure_hint=state.is_pure_hint)


# ---------------------------------------------------------------------------
# spectra, entropy, measurement


def spectral(state: FockState) -> SpectralDecomposition:
    """Eigendecomposition with the positivity repair policy.

    Eigenvalues in [PSD_CLIP, 0) are zeroed and the spectrum rescaled to
    preserve the trace; anything below PSD_CLIP raises PsdError.
    """
    w, v = np.linalg.eigh(state.matrix)
    if w.min(initial=0.0) < PSD_CLIP:
        raise PsdError(f"eigenvalue {w.min():.3e} below clip threshold {PSD_CLIP:.0e}")
    total = w.sum()
    w = np.where(w < 0.0, 0.0, w)
    pos = w.sum()
    if pos > 0 and total > 0 and pos != total:
        w = w * (total / pos)
    order = np.argsort(w)[::-1]
    return SpectralDecomposition(w[order], v[:, order])


def entropy_from_eigenvalues(values: np.ndarray) -> float:
    vals = np.asarray(values, dtype=float)
    vals = vals[vals > ENTROPY_FLOOR]
    return float(-(vals * np.log2(vals)).sum())


def von_neumann_entropy(state: FockState) -> float:
    return entropy_from_eigenvalues(spectral(state).eigenvalues)


def purity(state: FockState) -> float:
    return float(np.einsum("ij,ji->", state.matrix, state.matrix).real)


def mean_photon(state: FockState, mode: int | None = None) -> float:
    """Mean photon number of one mode, or the total over all modes."""
    if mode is None:
        return sum(mean_photon(state, k) for k in range(state.num_modes))
    red = state if state.num_modes == 1 and mode == 0 else partial_trace(state, [mode])
    d = red.dims.dim_per_mode[0]
    return float((np.diag(red.matrix).real * np.arange(d)).sum())


def vector_mean_photon(vector: np.ndarray, dims: TruncationSpec | None = None) -> float:
    """Mean total photon number of a pure-state amplitude vector."""
    v = np.asarray(vector).reshape(-1)
    if dims is None:
        n = np.arange(v.size)
    else:
        grids = np.meshgrid(*[np.arange(d) for d in dims.dim_per_mode], indexing="ij")
        n = sum(grids).reshape(-1)
    return float((np.abs(v) ** 2 * n).sum())


def project_pure(state: FockState, mode: int, bra_vector: np.ndarray):
    """Condition on finding ``mode`` in the pure state ``bra_vector``.

    Returns (conditional FockState on the remaining modes or None if no mode
    remains, density). The conditional is unnormalized, (I (x) <v|) rho
    (I (x) |v>)/pi, whose trace is the outcome probability density with
    respect to d^2(displacement label) of the measurement family.
    """
    m = state.num_modes
    if not (0 <= mode < m):
        raise ValueError("mode out of range")
    v = np.asarray(bra_vector, dtype=complex).reshape(-1)
    if v.size != state.dims.dim_per_mode[mode]:
        raise ValueError("bra vector length does not match the mode dimension")
    t = state.tensor_view()
    t = np.tensordot(v.conj(), t, axes=([0], [mode]))        # consumes ket axis
    t = np.tensordot(t, v, axes=([mode + m - 1], [0]))       # consumes bra axis
    t = t / np.pi
    if m == 1:
        return None, float(t.real)
    dims = tuple(d for k, d in enumerate(state.dims.dim_per_mode) if k != mode)
    d = int(np.prod(dims))
    mat = t.reshape(d, d)
    density = float(np.trace(mat).real)
    cond = FockState(mat, TruncationSpec(dims, state.dims.trace_tol))
    return cond, density


def project_coherent(state: FockState, mode: int, beta: complex,
                     *, max_deficit: float | None = None):
    """Heterodyne conditioning: project ``mode`` onto the coherent state |beta>.

    Returns (unnormalized conditional/pi, outcome density w.r.t. d^2 beta).
    ``max_deficit`` guards against a |beta> that does not fit the mode's
    truncation; it is off by default because the projection is exact whenever
    the *state* is supported inside the truncated space.
    """
    d = state.dims.dim_per_mode[mode]
    v = coherent_vector(beta, d)
    if max_deficit is not None:
        deficit = 1.0 - float(np.vdot(v, v).real)
        if deficit > max_deficit:
            raise TruncationError(
                f"coherent bra |beta={beta}> loses {deficit:.3e} amplitude at dim {d}")
    return project_pure(state, mode, v)


def first_and_second_moments(state: FockState) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature mean vector and covariance matrix, ordering (x1,p1,x2,p2,...).

    cov_ij = <{dq_i, dq_j}>/2 in the vacuum-variance-1 convention, so a
    coherent state gives the identity and thermal(nbar) gives (2 nbar + 1) I.
    """
    m = state.num_modes
    mean = np.zeros(2 * m)
    cov = np.zeros((2 * m, 2 * m))
    quads = {}
    singles = {}
    for k in range(m):
        red = state if m == 1 else partial_trace(state, [k])
        singles[k] = red
        x, p = quadrature_operators(red.dims.dim_per_mode[0])
        quads[k] = (x, p)
        rho = red.matrix
        ex = float(np.einsum("ij,ji->", rho, x).real)
        ep = float(np.einsum("ij,ji->", rho, p).real)
        mean[2 * k], mean[2 * k + 1] = ex, ep
        xx = float(np.einsum("ij,ji->", rho, x @ x).real)
        pp = float(np.einsum("ij,ji->", rho, p @ p).real)
        xp = float(np.einsum("ij,ji->", rho, 0.5 * (x @ p + p @ x)).real)
        cov[2 * k, 2 * k] = xx - ex * ex
        cov[2 * k + 1, 2 * k + 1] = pp - ep * ep
        cov[2 * k, 2 * k + 1] = cov[2 * k + 1, 2 * k] = xp - ex * ep
    for i in range(m):
        for j in range(i + 1, m):
            red = state if m == 2 else partial_trace(state, [i, j])
            r = red.tensor_view()  # axes (ket_i, ket_j, bra_i, bra_j)
            xi, pi_ = quads[i]
            xj, pj = quads[j]
            for (qi, opi) in ((0, xi), (1, pi_)):
                for (qj, opj) in ((0, xj), (1, pj)):
                    val = float(np.einsum("aibj,ba,ji->", r, opi, opj, optimize=True).real)
                    c = val - mean[2 * i + qi] * mean[2 * j + qj]
                    cov[2 * i + qi, 2 * j + qj] = cov[2 * j + qj, 2 * i + qi] = c
    return mean, cov
