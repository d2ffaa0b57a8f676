"""Probe definitions and construction of the two-hypothesis state pairs.

A scenario fixes the channel parameters (reflectivity eps, probe and
environment occupations, priors) and the probe kind. All probe kinds draw
their energy from ``nbar_probe``: the coherent amplitude is sqrt(nbar), the
squeezed-coherent displacement is sqrt(nbar - sinh^2 r), and a custom Fock
vector must carry mean photon number nbar itself. `build_pair` pushes the
probe through the thermal-loss channel and returns both hypothesis states in
a common Fock truncation, together with Gaussian moment sidecars where the
probe is Gaussian; downstream entropy code prefers the sidecars because they
are exact.

Truncation dimensions come from a policy object and are verified after the
build: if the realized trace deficits exceed the policy's tolerance the
dimensions are grown geometrically and the build repeats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import fock
from .channel import ThermalLossChannel, apply_epr_probe, apply_single_mode, \
    build_thermal_loss
from .fock import FockState, TruncationError, TruncationSpec
from .gaussian import GaussianState, GeneralDyneMeasurement, epr_cm, \
    illumination_cm, lossy_channel_cm, thermal_cm


@dataclass(frozen=True)
class EprProbe:
    """Two-mode squeezed vacuum; the idler is retained at the receiver."""


@dataclass(frozen=True)
class CoherentProbe:
    """Single coherent state at amplitude sqrt(nbar_probe), phase fixed real."""


@dataclass(frozen=True)
class SqueezedCoherentProbe:
    """Displaced squeezed vacuum D(alpha) S(r) |0>; r > 0 squeezes x.

    The displacement alpha = sqrt(nbar_probe - sinh^2 r) keeps the total
    energy at nbar_probe, so r is the only free parameter.
    """

    r: float = 0.0


@dataclass(frozen=True)
class CustomFockProbe:
    """Arbitrary pure single-mode probe given by Fock amplitudes."""

    vector: tuple

    @property
    def mean_photon(self) -> float:
        v = np.asarray(self.vector)
        return float(np.sum(np.arange(v.size) * np.abs(v) ** 2))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(np.asarray(self.vector)))


Probe = EprProbe | CoherentProbe | SqueezedCoherentProbe | CustomFockProbe


@dataclass(frozen=True)
class ScenarioParams:
    """Channel, prior, and probe parameters of one illumination scenario."""

    epsilon: float
    nbar_probe: float
    nbar_env: float
    p0: float = 0.5
    probe: Probe = EprProbe()

    def __post_init__(self):
        # eps = 1 is excluded: the 1/(1-eps) environment rescaling diverges.
        if not (0.0 <= self.epsilon < 1.0):
            raise ValueError("epsilon must lie in [0, 1)")
        if self.nbar_probe < 0.0 or self.nbar_env < 0.0:
            raise ValueError("occupations must be nonnegative")
        if not (0.0 < self.p0 < 1.0):
            raise ValueError("p0 must lie strictly between 0 and 1")
        if isinstance(self.probe, SqueezedCoherentProbe):
            if math.sinh(self.probe.r) ** 2 > self.nbar_probe:
                raise ValueError("sinh^2 r exceeds the probe energy budget")
        elif isinstance(self.probe, CustomFockProbe):
            if abs(self.probe.norm - 1.0) > 1e-8:
                raise ValueError("custom probe vector must be normalized")
            if abs(self.probe.mean_photon - self.nbar_probe) > 1e-9:
                raise ValueError("custom probe energy must equal nbar_probe")
        elif not isinstance(self.probe, (EprProbe, CoherentProbe)):
            raise TypeError(f"unknown probe kind: {self.probe!r}")

    @property
    def p1(self) -> float:
        return 1.0 - self.p0


def probe_amplitude(params: ScenarioParams) -> float:
    """Coherent displacement realizing the probe energy budget."""
    if isinstance(params.probe, SqueezedCoherentProbe):
        return math.sqrt(params.nbar_probe - math.sinh(params.probe.r) ** 2)
    return math.sqrt(params.nbar_probe)


@dataclass(frozen=True)
class TruncationPolicy:
    """Dimension selection rules plus the post-build deficit gate."""

    tail: float = 1e-9
    env_tail: float = 1e-10
    min_dim: int = 8
    deficit_tol: float = 2e-8
    max_grow: int = 4

    def geometric_dim(self, nbar: float) -> int:
        """Dimension holding all but `tail` of a thermal occupation."""
        if nbar <= 0.0:
            return self.min_dim
        d = math.ceil(math.log(self.tail) / math.log(nbar / (nbar + 1.0)))
        return max(d, self.min_dim)

    def coherent_dim(self, energy: float) -> int:
        """Dimension holding a Poissonian excitation of the given energy."""
        d = math.ceil(energy + 10.0 * math.sqrt(energy + 1.0) + 10.0)
        return max(d, self.min_dim)

    def detector_dim(self, displaced_energy: float, nbar_env: float) -> int:
        base = self.geometric_dim(nbar_env)
        if displaced_energy <= 0.0:
            return base
        return base + math.ceil(displaced_energy
                                + 10.0 * math.sqrt(displaced_energy + 1.0))


DEFAULT_POLICY = TruncationPolicy()


def epr_schmidt(nbar: float, dim: int) -> np.ndarray:
    """Schmidt amplitudes of the two-mode squeezed vacuum, sqrt(1-l^2)(-l)^n."""
    lam = math.sqrt(nbar / (nbar + 1.0)) if nbar > 0 else 0.0
    n = np.arange(dim)
    return math.sqrt(1.0 - lam ** 2) * (-lam) ** n


@dataclass
class EncodedPair:
    """Both hypothesis states of one scenario in a common truncation.

    gauss0/gauss1 are Gaussian sidecars for the individual hypotheses (None
    when the probe is not Gaussian); the mixture itself is never Gaussian.
    """

    params: ScenarioParams
    rho0: FockState
    rho1: FockState
    gauss0: GaussianState | None
    gauss1: GaussianState | None
    channel: ThermalLossChannel = field(repr=False)

    @property
    def truncation(self) -> TruncationSpec:
        return self.rho0.dims

    @property
    def priors(self) -> tuple[float, float]:
        return (self.params.p0, self.params.p1)

    @property
    def mixture(self) -> FockState:
        m = self.params.p0 * self.rho0.matrix + self.params.p1 * self.rho1.matrix
        return FockState(m, self.rho0.dims)

    @property
    def trace_deficit(self) -> float:
        return max(self.rho0.trace_deficit, self.rho1.trace_deficit)


def _grow(dim: int, attempt: int) -> int:
    return math.ceil(dim * 1.4 ** attempt)


def _probe_vector(params: ScenarioParams, dim: int) -> np.ndarray:
    probe = params.probe
    if isinstance(probe, CoherentProbe):
        return fock.coherent_vector(probe_amplitude(params), dim)
    if isinstance(probe, SqueezedCoherentProbe):
        return fock.squeezed_coherent_vector(probe.r, probe_amplitude(params),
                                             dim)
    if isinstance(probe, CustomFockProbe):
        v = np.asarray(probe.vector, dtype=complex)
        if v.size > dim:
            raise ValueError("probe vector longer than the requested dimension")
        out = np.zeros(dim, dtype=complex)
        out[:v.size] = v
        return out
    raise TypeError(f"not a single-mode probe: {probe!r}")


def _probe_cm(params: ScenarioParams) -> GaussianState | None:
    probe = params.probe
    if isinstance(probe, CoherentProbe):
        mean = np.array([2.0 * probe_amplitude(params), 0.0])
        return GaussianState(mean, np.eye(2))
    if isinstance(probe, SqueezedCoherentProbe):
        mean = np.array([2.0 * probe_amplitude(params), 0.0])
        cov = np.diag([math.exp(-2.0 * probe.r), math.exp(2.0 * probe.r)])
        return GaussianState(mean, cov)
    return None


def build_pair(params: ScenarioParams,
               policy: TruncationPolicy = DEFAULT_POLICY) -> EncodedPair:
    """Push the probe through the channel under both hypotheses."""
    for attempt in range(policy.max_grow + 1):
        env_tail = policy.env_tail * 0.1 ** attempt
        if isinstance(params.probe, EprProbe):
            nbar = params.nbar_probe
            d_idler = _grow(policy.geometric_dim(nbar), attempt)
            d_out = _grow(policy.geometric_dim(
                params.epsilon * nbar + params.nbar_env), attempt)
            chan = build_thermal_loss(params.epsilon, params.nbar_env,
                                      d_idler, d_out, env_tail=env_tail)
            rho0 = apply_epr_probe(chan, epr_schmidt(nbar, d_idler))
            rho1 = fock.tensor(fock.thermal_state(params.nbar_env, d_out),
                               fock.thermal_state(nbar, d_idler))
            gauss0 = illumination_cm(params, 0)
            gauss1 = illumination_cm(params, 1)
        else:
            energy = params.nbar_probe
            if isinstance(params.probe, CustomFockProbe):
                d_in = max(len(params.probe.vector), policy.min_dim)
            else:
                d_in = _grow(policy.coherent_dim(energy), attempt)
            d_out = _grow(policy.detector_dim(params.epsilon * energy,
                                              params.nbar_env), attempt)
            chan = build_thermal_loss(params.epsilon, params.nbar_env,
                                      d_in, d_out, env_tail=env_tail)
            vec = _probe_vector(params, d_in)
            rho0 = apply_single_mode(chan, np.outer(vec, np.conj(vec)))
            rho1 = fock.thermal_state(params.nbar_env, d_out)
            probe_cm = _probe_cm(params)
            gauss0 = None if probe_cm is None else \
                lossy_channel_cm(probe_cm, params.epsilon, params.nbar_env)
            gauss1 = thermal_cm(params.nbar_env)
        pair = EncodedPair(params, rho0, rho1, gauss0, gauss1, chan)
        if pair.trace_deficit <= policy.deficit_tol:
            return pair
    raise TruncationError(
        f"trace deficit {pair.trace_deficit:.3e} above {policy.deficit_tol:.1e} "
        f"after {policy.max_grow} dimension increases")


class _CmParams:
    __slots__ = ("epsilon", "nbar_probe", "nbar_env")

    def __init__(self, epsilon, nbar_probe, nbar_env):
        self.epsilon = epsilon
        self.nbar_probe = nbar_probe
        self.nbar_env = nbar_env


def params_for_cm(params: ScenarioParams, nbar_probe: float) -> _CmParams:
    """Parameter view with the probe occupation possibly overridden."""
    return _CmParams(params.epsilon, nbar_probe, params.nbar_env)


@dataclass(frozen=True)
class CollapsedProbeDistribution:
    """Coherent-probe ensemble induced by heterodyning the idler.

    A heterodyne outcome beta leaves the probe arm in the coherent state
    with amplitude -lam * conj(beta), and the outcome itself is distributed
    as the thermal Q function of the idler. The resulting probe energy
    lam^2 |beta|^2 is exponential with mean nbar: lam^2 (nbar + 1) = nbar.
    """

    nbar: float

    @property
    def lam(self) -> float:
        return math.sqrt(self.nbar / (self.nbar + 1.0)) if self.nbar > 0 else 0.0

    @property
    def mean_energy(self) -> float:
        return self.nbar

    def amplitude(self, beta: complex) -> complex:
        return -self.lam * np.conj(beta)

    def outcome_density(self, beta: complex) -> float:
        scale = self.nbar + 1.0
        return math.exp(-abs(beta) ** 2 / scale) / (math.pi * scale)

    def energy_density(self, energy: float) -> float:
        if self.nbar <= 0.0:
            raise ValueError("energy density degenerates to a point mass")
        return math.exp(-energy / self.nbar) / self.nbar


def collapsed_probe_distribution(params: ScenarioParams) -> CollapsedProbeDistribution:
    """Analytic description of the heterodyne-collapsed probe ensemble."""
    if not isinstance(params.probe, EprProbe):
        raise ValueError("collapse distribution is defined for the EPR probe")
    return CollapsedProbeDistribution(params.nbar_probe)


@dataclass(frozen=True)
class CollapsedProbeFamily:
    """Probe-arm conditional family after a general-dyne on the idler.

    Measuring the idler of the two-mode squeezed vacuum collapses the probe
    arm to a fixed-covariance Gaussian state whose mean wanders with the
    outcome: mean = (scale_x u, scale_p v) with u, v independent standard
    normals. cov is diagonal; at t = 0.5 it is the identity (coherent states).
    """

    cov: np.ndarray
    scale_x: float
    scale_p: float

    @property
    def mean_energy(self) -> float:
        cx, cp = self.cov[0, 0], self.cov[1, 1]
        return (cx + cp - 2.0 + self.scale_x ** 2 + self.scale_p ** 2) / 4.0


def generaldyne_collapsed_probe(nbar: float,
                                measurement: GeneralDyneMeasurement) -> CollapsedProbeFamily:
    """Conditional probe family for an idler general-dyne of parameter t."""
    state = epr_cm(nbar)
    from .gaussian import conditional_after_generaldyne
    res = conditional_after_generaldyne(state, measurement)
    s = measurement.squeezing
    b = 2.0 * nbar + 1.0
    c = 2.0 * math.sqrt(nbar * (nbar + 1.0))
    return CollapsedProbeFamily(res.conditional.cov,
                                c / math.sqrt(b + s),
                                -c / math.sqrt(b + 1.0 / s))
