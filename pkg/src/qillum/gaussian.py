"""Gaussian-state toolkit in the vacuum-variance-1 convention.

Quadrature ordering is (x1, p1, x2, p2, ...) with x = a + a†, so a coherent
state has covariance I, thermal(nbar) has (2 nbar + 1) I, and the physicality
condition reads cov + i Omega >= 0 with Omega the block-diagonal symplectic
form [[0, 1], [-1, 0]] per mode. Entropies are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SYMMETRY_TOL = 1e-10
UNCERTAINTY_TOL = 1e-9


def omega(num_modes: int) -> np.ndarray:
    one = np.array([[0.0, 1.0], [-1.0, 0.0]])
    out = np.zeros((2 * num_modes, 2 * num_modes))
    for k in range(num_modes):
        out[2 * k:2 * k + 2, 2 * k:2 * k + 2] = one
    return out


@dataclass
class GaussianState:
    """First and second moments of a Gaussian state."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.asarray(self.cov, dtype=float)
        if mean.size % 2 != 0:
            raise ValueError("mean vector must have even length")
        n = mean.size
        if cov.shape != (n, n):
            raise ValueError(f"cov shape {cov.shape} does not match mean length {n}")
        if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL:
            raise ValueError("covariance matrix is not symmetric")
        cov = 0.5 * (cov + cov.T)
        w = np.linalg.eigvalsh(cov + 1j * omega(n // 2))
        if w.min() < -UNCERTAINTY_TOL:
            raise ValueError(f"uncertainty relation violated (min eig {w.min():.3e})")
        self.mean, self.cov = mean, cov

    @property
    def num_modes(self) -> int:
        return self.mean.size // 2


def f_entropy(x: float) -> float:
    """Entropy in bits carried by one symplectic eigenvalue x >= 1."""
    if x <= 1.0 + 1e-12:
        return 0.0
    a, b = 0.5 * (x + 1.0), 0.5 * (x - 1.0)
    return float(a * np.log2(a) - b * np.log2(b))


def g_thermal(nbar: float) -> float:
    """Entropy in bits of a thermal state with mean photon number nbar."""
    return f_entropy(2.0 * nbar + 1.0)


def thermal_cm(nbar: float, num_modes: int = 1) -> GaussianState:
    if nbar < 0:
        raise ValueError("nbar must be nonnegative")
    n = 2 * num_modes
    return GaussianState(np.zeros(n), (2.0 * nbar + 1.0) * np.eye(n))


def epr_cm(nbar: float) -> GaussianState:
    """Two-mode squeezed vacuum with per-mode mean photon number nbar.

    Diagonal blocks (2 nbar + 1) I, cross block 2 sqrt(nbar(nbar+1)) diag(1,-1).
    The cross-block sign is a local phase choice; every information quantity
    computed here is invariant under flipping it.
    """
    if nbar < 0:
        raise ValueError("nbar must be nonnegative")
    b = 2.0 * nbar + 1.0
    c = 2.0 * np.sqrt(nbar * (nbar + 1.0))
    cov = np.array([
        [b, 0.0, c, 0.0],
        [0.0, b, 0.0, -c],
        [c, 0.0, b, 0.0],
        [0.0, -c, 0.0, b],
    ])
    return GaussianState(np.zeros(4), cov)


def symplectic_eigenvalues(state: GaussianState) -> np.ndarray:
    """Symplectic spectrum, ascending; each value appears once."""
    m = state.num_modes
    vals = np.abs(np.linalg.eigvals(1j * omega(m) @ state.cov).real)
    vals.sort()
    return vals[::2].copy()


def gaussian_entropy(state: GaussianState) -> float:
    return float(sum(f_entropy(v) for v in symplectic_eigenvalues(state)))


def gaussian_mutual_information(state: GaussianState) -> float:
    """I(A:B) of a two-mode Gaussian state, in bits."""
    if state.num_modes != 2:
        raise ValueError("defined for two-mode states")
    sub_a = GaussianState(state.mean[:2], state.cov[:2, :2])
    sub_b = GaussianState(state.mean[2:], state.cov[2:, 2:])
    return gaussian_entropy(sub_a) + gaussian_entropy(sub_b) - gaussian_entropy(state)


@dataclass(frozen=True)
class GeneralDyneMeasurement:
    """Beam splitter of transmissivity t with conjugate homodynes on the outputs.

    Equivalent to projecting onto pure Gaussian states of covariance
    diag(s, 1/s) with s = (1-t)/t; t = 0.5 is heterodyne (coherent-state
    projection), t -> 1 approaches x homodyne, t -> 0 approaches p homodyne.
    """

    t: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.t < 1.0):
            raise ValueError("t must lie strictly between 0 and 1")

    @property
    def squeezing(self) -> float:
        return (1.0 - self.t) / self.t

    @property
    def measurement_cov(self) -> np.ndarray:
        s = self.squeezing
        return np.diag([s, 1.0 / s])


@dataclass(frozen=True)
class GeneralDyneResult:
    """Conditioning of a two-mode Gaussian state on a general-dyne outcome.

    The conditional covariance is outcome independent. For outcome z the
    conditional mean is ``conditional.mean + mean_map @ (z - outcome_mean)``;
    outcomes are normally distributed with ``outcome_cov``.
    """

    conditional: GaussianState
    mean_map: np.ndarray
    outcome_mean: np.ndarray
    outcome_cov: np.ndarray


def conditional_after_generaldyne(state: GaussianState,
                                  measurement: GeneralDyneMeasurement) -> GeneralDyneResult:
    """General-dyne measurement on the second mode of a two-mode state."""
    if state.num_modes != 2:
        raise ValueError("defined for two-mode states")
    a = state.cov[:2, :2]
    b = state.cov[2:, 2:]
    c = state.cov[:2, 2:]
    sig = measurement.measurement_cov
    inv = np.linalg.inv(b + sig)
    cond_cov = a - c @ inv @ c.T
    mean_map = c @ inv
    cond = GaussianState(state.mean[:2], cond_cov)
    return GeneralDyneResult(cond, mean_map, state.mean[2:].copy(), b + sig)


def gaussian_discord(state: GaussianState,
                     measurement: GeneralDyneMeasurement | None = None) -> float:
    """Discord delta(A|B) of a two-mode Gaussian state under a general-dyne
    measurement of mode B (heterodyne by default), in bits."""
    meas = measurement if measurement is not None else GeneralDyneMeasurement(0.5)
    sub_b = GaussianState(state.mean[2:], state.cov[2:, 2:])
    res = conditional_after_generaldyne(state, meas)
    return gaussian_entropy(sub_b) - gaussian_entropy(state) + gaussian_entropy(res.conditional)


def gaussian_discord_opt(state: GaussianState, *, coarse_points: int = 19,
                         bracket: tuple[float, float] = (0.05, 0.95),
                         tol: float = 1e-10) -> tuple[float, float]:
    """Minimize the measured discord over the general-dyne family.

    Coarse grid scan followed by golden-section refinement of t; returns
    (discord at t_opt, t_opt).
    """
    lo, hi = bracket
    grid = np.linspace(lo, hi, coarse_points)
    vals = [gaussian_discord(state, GeneralDyneMeasurement(t)) for t in grid]
    k = int(np.argmin(vals))
    left = grid[max(k - 1, 0)]
    right = grid[min(k + 1, coarse_points - 1)]
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = right - phi * (right - left)
    x2 = left + phi * (right - left)
    f1 = gaussian_discord(state, GeneralDyneMeasurement(x1))
    f2 = gaussian_discord(state, GeneralDyneMeasurement(x2))
    while right - left > tol:
        if f1 <= f2:
            right, x2, f2 = x2, x1, f1
            x1 = right - phi * (right - left)
            f1 = gaussian_discord(state, GeneralDyneMeasurement(x1))
        else:
            left, x1, f1 = x1, x2, f2
            x2 = left + phi * (right - left)
            f2 = gaussian_discord(state, GeneralDyneMeasurement(x2))
    t_opt = 0.5 * (left + right)
    return gaussian_discord(state, GeneralDyneMeasurement(t_opt)), t_opt


def illumination_cm(params, hypothesis: int) -> GaussianState:
    """Covariance model of the illumination channel with an EPR probe.

    Mode order (detector, idler). Hypothesis 0 (object present): the detector
    carries a sqrt(eps) share of the probe plus environment noise rescaled by
    1/(1-eps), which keeps the received noise at nbar_env photons for every
    eps < 1. At eps = 1 nothing couples to the environment, so the perfect
    mirror returns the probe state itself. Hypothesis 1 (object absent):
    detector is thermal(nbar_env) and the idler keeps its thermal(nbar)
    marginal, as a product.
    """
    eps = float(params.epsilon)
    nbar = float(params.nbar_probe)
    nenv = float(params.nbar_env)
    if not (0.0 <= eps <= 1.0):
        raise ValueError("epsilon must lie in [0, 1]")
    if hypothesis not in (0, 1):
        raise ValueError("hypothesis must be 0 or 1")
    b = 2.0 * nbar + 1.0
    if hypothesis == 1:
        cov = np.diag([2.0 * nenv + 1.0, 2.0 * nenv + 1.0, b, b])
        return GaussianState(np.zeros(4), cov)
    if eps == 1.0:
        return epr_cm(nbar)
    a = 2.0 * eps * nbar + 2.0 * nenv + 1.0
    c = np.sqrt(eps) * 2.0 * np.sqrt(nbar * (nbar + 1.0))
    cov = np.array([
        [a, 0.0, c, 0.0],
        [0.0, a, 0.0, -c],
        [c, 0.0, b, 0.0],
        [0.0, -c, 0.0, b],
    ])
    return GaussianState(np.zeros(4), cov)


def lossy_channel_cm(probe: GaussianState, epsilon: float, nbar_env: float) -> GaussianState:
    """Single-mode probe through the illumination channel, hypothesis 0.

    cov -> eps cov + (2 nbar_env + 1 - eps) I, mean -> sqrt(eps) mean; the
    additive term is the rescaled environment's share (1-eps)(2 ñ + 1) with
    ñ = nbar_env/(1-eps). eps = 1 is the perfect mirror: no environment
    couples and the probe passes through unchanged.
    """
    if probe.num_modes != 1:
        raise ValueError("probe must be single mode")
    eps = float(epsilon)
    if eps == 1.0:
        return GaussianState(probe.mean.copy(), probe.cov.copy())
    cov = eps * probe.cov + (2.0 * nbar_env + 1.0 - eps) * np.eye(2)
    return GaussianState(np.sqrt(eps) * probe.mean, cov)
