"""Sector-exact Fock representation of the thermal-loss channel.

The illumination channel mixes the probe with a thermal environment on a beam
splitter of transmissivity eps and discards the environment output. Instead
of instantiating the probe-environment product (which is far too large at the
occupations we need), the channel is assembled from the beam splitter's action
inside each total-photon-number sector, where it is a small real orthogonal
matrix. The result is the exact superoperator tensor restricted to the given
truncations: the only approximations are the environment-photon cutoff e_max
and the output dimension, both of which are tracked as per-row trace deficits.

The environment occupation is rescaled to nbar_env / (1 - eps) so that the
noise reaching the detector stays at nbar_env photons for every eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .fock import FockState, TruncationSpec

_UNITARY_IMAG_TOL = 1e-10


def env_cutoff(nbar_eff: float, tail: float = 1e-10) -> int:
    """Smallest e_max with geometric tail mass below `tail`."""
    if nbar_eff <= 0.0:
        return 0
    ratio = nbar_eff / (nbar_eff + 1.0)
    return max(int(math.ceil(math.log(tail) / math.log(ratio))) - 1, 0)


def _sector_unitary(total: int, theta: float) -> np.ndarray:
    """Beam-splitter block on the total-photon sector, basis k = probe count.

    Generator G[k-1, k] = sqrt(k (total - k + 1)) = -G[k, k-1]; U = expm(theta G)
    is real orthogonal. Heisenberg picture: a_probe -> cos(theta) a_probe
    + sin(theta) a_env, so theta = arccos(sqrt(eps)) keeps an eps share of the
    probe in the retained slot.
    """
    n = total + 1
    if total == 0:
        return np.ones((1, 1))
    k = np.arange(1, n)
    g = np.sqrt(k * (total - k + 1.0))
    # Similarity by diag(i^k) turns iG into a real symmetric tridiagonal
    # matrix with zero diagonal and off-diagonal -g.
    w, v = eigh_tridiagonal(np.zeros(n), -g)
    phase = 1j ** np.arange(n)
    core = (v * np.exp(-1j * theta * w)) @ v.T
    u = (phase[:, None] * core) * np.conj(phase)[None, :]
    if np.max(np.abs(u.imag)) > _UNITARY_IMAG_TOL:
        raise RuntimeError("sector unitary acquired an imaginary part")
    return u.real


@dataclass(frozen=True)
class ThermalLossChannel:
    """Precomputed channel tensor for fixed truncations.

    tensor[n, m, a] is the (a, a + m - n) element of the channel output for
    input |n><m|; every other output element vanishes by phase covariance.
    row_deficits[n] is the trace lost from input |n><n| to the environment
    cutoff and the output truncation combined.
    """

    epsilon: float
    nbar_env: float
    dim_in: int
    dim_out: int
    e_max: int
    tensor: np.ndarray = field(repr=False)
    row_deficits: np.ndarray = field(repr=False)

    @property
    def nbar_env_effective(self) -> float:
        if self.epsilon >= 1.0:
            return 0.0
        return self.nbar_env / (1.0 - self.epsilon)

    @property
    def max_row_deficit(self) -> float:
        return float(self.row_deficits.max())


_CACHE: dict[tuple, ThermalLossChannel] = {}


def build_thermal_loss(epsilon: float, nbar_env: float, dim_in: int, dim_out: int,
                       *, env_tail: float = 1e-10, e_max: int | None = None,
                       cached: bool = True) -> ThermalLossChannel:
    """Assemble the channel tensor for probe dimension dim_in and output
    dimension dim_out. nbar_env is the received (post-rescaling) noise."""
    if not (0.0 <= epsilon <= 1.0):
        raise ValueError("epsilon must lie in [0, 1]")
    if epsilon == 1.0 and nbar_env != 0.0:
        raise ValueError("epsilon = 1 is only defined for a vacuum environment")
    if nbar_env < 0.0:
        raise ValueError("nbar_env must be nonnegative")
    n_eff = nbar_env / (1.0 - epsilon) if epsilon < 1.0 else 0.0
    if e_max is None:
        e_max = env_cutoff(n_eff, env_tail)
    key = (round(epsilon, 15), round(nbar_env, 15), dim_in, dim_out, e_max)
    if cached and key in _CACHE:
        return _CACHE[key]

    theta = math.acos(math.sqrt(epsilon))
    if n_eff > 0.0:
        log_q = np.arange(e_max + 1) * math.log(n_eff / (n_eff + 1.0)) \
            - math.log(n_eff + 1.0)
        q = np.exp(log_q)
    else:
        q = np.array([1.0])
        e_max = 0

    n_tot = dim_in - 1 + e_max
    # cols[n, e, a] = U_{n+e}[a, n], zero-padded in a.
    a_ext = dim_out + dim_in
    cols = np.zeros((dim_in, e_max + 1, a_ext))
    for total in range(n_tot + 1):
        u = _sector_unitary(total, theta)
        hi_a = min(total + 1, a_ext)
        for n in range(min(total, dim_in - 1) + 1):
            e = total - n
            if e <= e_max:
                cols[n, e, :hi_a] = u[:hi_a, n]

    tensor = np.zeros((dim_in, dim_in, dim_out))
    for n in range(dim_in):
        weighted = q[:, None] * cols[n, :, :dim_out]
        for m in range(n, dim_in):
            shift = m - n
            tensor[n, m] = np.einsum("ea,ea->a", weighted,
                                     cols[m, :, shift:shift + dim_out])
            if shift:
                tensor[m, n, shift:] = tensor[n, m, :dim_out - shift]

    deficits = 1.0 - np.einsum("nna->n", tensor)
    chan = ThermalLossChannel(epsilon, nbar_env, dim_in, dim_out, e_max,
                              tensor, deficits)
    if cached:
        _CACHE[key] = chan
    return chan


def clear_channel_cache() -> None:
    _CACHE.clear()


def apply_single_mode(channel: ThermalLossChannel, matrix: np.ndarray) -> FockState:
    """Send a single-mode density matrix through the channel."""
    d_in, d_out = channel.dim_in, channel.dim_out
    if matrix.shape != (d_in, d_in):
        raise ValueError(f"expected a ({d_in}, {d_in}) matrix")
    t = channel.tensor
    out = np.zeros((d_out, d_out), dtype=complex)
    idx = np.arange(d_in)
    a = np.arange(d_out)
    for shift in range(d_in):
        n = idx[:d_in - shift]
        diag = np.einsum("n,na->a", matrix[n, n + shift], t[n, n + shift])
        keep = a[:d_out - shift]
        out[keep, keep + shift] += diag[:d_out - shift]
        if shift:
            out[keep + shift, keep] += np.conj(diag[:d_out - shift])
    dims = TruncationSpec((d_out,), trace_tol=0.999)
    return FockState(out, dims)


def apply_epr_probe(channel: ThermalLossChannel, amplitudes: np.ndarray) -> FockState:
    """Send the probe arm of sum_n c_n |n, n> through the channel.

    amplitudes are the Schmidt coefficients c_n (length = dim_in); the output
    is a two-mode state on (detector, idler), block diagonal in the charge
    n_det - n_idler by construction.
    """
    c = np.asarray(amplitudes, dtype=float)
    d_in, d_out = channel.dim_in, channel.dim_out
    if c.shape != (d_in,):
        raise ValueError(f"expected {d_in} Schmidt amplitudes")
    t = channel.tensor
    n = d_out * d_in
    out = np.zeros((n, n), dtype=complex)
    a = np.arange(d_out)
    for i in range(d_in):
        for j in range(d_in):
            shift = j - i
            lo = max(0, -shift)
            hi = min(d_out, d_out - shift)
            if hi <= lo:
                continue
            rows = a[lo:hi] * d_in + i
            cols_ = (a[lo:hi] + shift) * d_in + j
            out[rows, cols_] = c[i] * c[j] * t[i, j, lo:hi]
    dims = TruncationSpec((d_out, d_in), trace_tol=0.999)
    return FockState(out, dims)
