"""Holevo information and accessible-information bounds, in bits.

The receiver distinguishes the two channel outputs rho0 (object present) and
rho1 (object absent) with priors (p0, p1). Three protocols are compared:

* joint: keep the idler, measure probe and idler together; chi of the
  two-mode pair.
* single coherent: transmit one coherent state of the full probe energy;
  chi of the single-mode pair.
* collapsed: measure the idler first (general-dyne), which collapses the
  probe arm to a Gaussian state drawn from a known distribution; the
  protocol value averages the per-outcome chi over that distribution.

Accessible information is bracketed by the lower bound of Fuchs and Caves
(log of the operator mean ratio) and by an upper bound obtained by
integrating the curvature of the mutual information in the prior: I(p) obeys
I'' = -F/ln 2 with F the quantum Fisher-like pair sum, I(0) = I(1) = 0, so I
is recovered through the Green kernel of the second derivative on [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import simpson

from . import fock
from .blocks import OFF_BLOCK_REL_TOL, block_entropy, charge_sectors, off_block_mass
from .channel import apply_single_mode, build_thermal_loss
from .fock import FockState, PsdError, TruncationError, TruncationSpec
from .gaussian import GeneralDyneMeasurement, f_entropy, g_thermal, gaussian_entropy
from .scenarios import CoherentProbe, EncodedPair, ScenarioParams, \
    TruncationPolicy, DEFAULT_POLICY, build_pair, generaldyne_collapsed_probe

# Support floor: rho_bar eigenvalue pairs with lam_j + lam_k below
# PAIR_FLOOR times the largest eigenvalue are treated as outside the support.
PAIR_FLOOR = 1e-12
EIG_FLOOR = 1e-12
L_NEGATIVE_TOL = -1e-8


class ConvergenceError(RuntimeError):
    """Quadrature refinement failed to stabilize."""


def _as_states_and_priors(first, p0) -> tuple[list[FockState], list[float]]:
    """Accept an EncodedPair or an explicit (rho0, rho1) sequence."""
    if isinstance(first, EncodedPair):
        states = [first.rho0, first.rho1]
        p = first.params.p0 if p0 is None else float(p0)
    else:
        states = list(first)
        if p0 is None:
            raise ValueError("p0 is required when passing raw states")
        p = float(p0)
    if len(states) != 2:
        raise ValueError("expected exactly two hypothesis states")
    if not (0.0 <= p <= 1.0):
        raise ValueError("p0 must lie in [0, 1]")
    return states, [p, 1.0 - p]


def pair_entropies(pair: EncodedPair) -> tuple[float, float]:
    """Entropies of the two hypothesis states, preferring Gaussian sidecars."""
    s0 = gaussian_entropy(pair.gauss0) if pair.gauss0 is not None \
        else block_entropy(pair.rho0)
    s1 = gaussian_entropy(pair.gauss1) if pair.gauss1 is not None \
        else block_entropy(pair.rho1)
    return s0, s1


def holevo(pair: EncodedPair, p0: float | None = None) -> float:
    """Holevo information of the binary ensemble, in bits."""
    s0, s1 = pair_entropies(pair)
    p = pair.params.p0 if p0 is None else float(p0)
    if not (0.0 <= p <= 1.0):
        raise ValueError("p0 must lie in [0, 1]")
    if p in (0.0, 1.0):
        return 0.0
    m = p * pair.rho0.matrix + (1.0 - p) * pair.rho1.matrix
    mixture = FockState(m, pair.rho0.dims)
    return block_entropy(mixture) - p * s0 - (1.0 - p) * s1


def _sector_slices(rho0: FockState, rho1: FockState) -> list[np.ndarray]:
    """Common invariant blocks of the pair, or one full block as fallback."""
    n = rho0.matrix.shape[0]
    if rho1.matrix.shape[0] != n:
        raise ValueError("states live in different truncations")
    if rho0.num_modes == 2 and rho1.num_modes == 2 \
            and rho0.dims.dim_per_mode == rho1.dims.dim_per_mode:
        da, db = rho0.dims.dim_per_mode
        ok = True
        for mat in (rho0.matrix, rho1.matrix):
            norm = np.linalg.norm(mat)
            if norm > 0 and off_block_mass(mat, da, db) > OFF_BLOCK_REL_TOL * norm:
                ok = False
                break
        if ok:
            return [idx for _, idx in charge_sectors(da, db)]
    return [np.arange(n)]


@dataclass(frozen=True)
class FuchsLowerResult:
    value: float
    dropped_weight: float


def fuchs_lower_detail(states, priors) -> FuchsLowerResult:
    """Fuchs-Caves lower bound with truncation-loss accounting.

    I >= sum_x p_x Tr[rho_x log2 L(rho_x)] with L the operator solving
    rho_bar L + L rho_bar = 2 rho_x, evaluated on the well-supported
    eigenspace of rho_bar. Eigenvalues of L at or below EIG_FLOOR are
    excluded with their projectors; their total rho_x-weight, plus any
    rho_x-weight outside the retained rho_bar support, is reported in
    dropped_weight. A negative L eigenvalue only raises PsdError when it
    carries non-negligible weight.
    """
    if len(states) != len(priors) or len(states) < 2:
        raise ValueError("need matching states and priors")
    if abs(sum(priors) - 1.0) > 1e-12:
        raise ValueError("priors must sum to 1")
    sectors = _sector_slices(states[0], states[-1])
    mats = [s.matrix for s in states]
    decomps = []
    lam_max = 0.0
    for idx in sectors:
        bar = sum(p * m[np.ix_(idx, idx)] for p, m in zip(priors, mats))
        lam, vec = np.linalg.eigh(bar)
        lam_max = max(lam_max, float(lam[-1]))
        decomps.append((idx, lam, vec))
    support_floor = 0.5 * PAIR_FLOOR * lam_max
    value = 0.0
    dropped = 0.0
    for idx, lam, vec in decomps:
        keep_bar = lam > support_floor
        if not keep_bar.any():
            for p, m in zip(priors, mats):
                dropped += p * abs(float(np.trace(m[np.ix_(idx, idx)]).real))
            continue
        lam = lam[keep_bar]
        vec = vec[:, keep_bar]
        den = lam[:, None] + lam[None, :]
        for p, m in zip(priors, mats):
            block = m[np.ix_(idx, idx)]
            sub = vec.conj().T @ block @ vec
            outside = float(np.trace(block).real) - float(np.trace(sub).real)
            dropped += p * abs(outside)
            omega, w = np.linalg.eigh(2.0 * sub / den)
            weights = np.real(np.einsum("jk,jl,lk->k", np.conj(w), sub, w))
            bad = omega < L_NEGATIVE_TOL
            if bad.any() and float(np.sum(np.abs(weights[bad]))) > 1e-8:
                raise PsdError(
                    f"operator ratio eigenvalue {omega.min():.3e} with weight "
                    f"{np.sum(np.abs(weights[bad])):.3e}")
            keep = omega > EIG_FLOOR
            value += p * float(np.sum(weights[keep] * np.log2(omega[keep])))
            dropped += p * float(np.sum(np.abs(weights[~keep])))
    return FuchsLowerResult(value, dropped)


def fuchs_lower(pair, p0: float | None = None) -> float:
    """Fuchs-Caves lower bound on the accessible information, in bits.

    Accepts an EncodedPair (priors taken from it unless p0 is given) or a
    (rho0, rho1) sequence with an explicit p0.
    """
    states, priors = _as_states_and_priors(pair, p0)
    return fuchs_lower_detail(states, priors).value


@dataclass(frozen=True)
class FuchsUpperResult:
    value: float
    nodes_used: int


def _odd_count(n: int) -> int:
    return max(n | 1, 3)


def fuchs_upper_detail(rho0: FockState, rho1: FockState, p1: float, *,
                       nodes: int = 81, rel_tol: float = 1e-5,
                       max_doublings: int = 3) -> FuchsUpperResult:
    """Curvature upper bound on the accessible information of a binary pair.

    I(p1) = (1/ln 2) [ (1-p1) int_0^p1 s F(s) ds
                       + p1 int_p1^1 (1-s) F(s) ds ]
    with F(s) = sum_jk 2 |<j|rho1-rho0|k>|^2 / (lam_j + lam_k) in the
    eigenbasis of (1-s) rho0 + s rho1. Both segments use composite Simpson;
    the node count doubles until the value is stable to rel_tol.
    """
    if nodes < 21 or nodes % 2 == 0:
        raise ValueError("nodes must be odd and at least 21")
    if not (0.0 <= p1 <= 1.0):
        raise ValueError("the prior must lie in [0, 1]")
    if p1 in (0.0, 1.0):
        return FuchsUpperResult(0.0, 0)
    sectors = _sector_slices(rho0, rho1)
    subs = []
    for idx in sectors:
        a = rho0.matrix[np.ix_(idx, idx)]
        b = rho1.matrix[np.ix_(idx, idx)]
        subs.append((a, b, b - a))

    def curvature(s: float) -> float:
        parts = []
        lam_max = 0.0
        for a, b, d in subs:
            lam, vec = np.linalg.eigh((1.0 - s) * a + s * b)
            lam_max = max(lam_max, float(lam[-1]))
            parts.append((np.maximum(lam, 0.0), vec.conj().T @ d @ vec))
        floor = PAIR_FLOOR * lam_max
        total = 0.0
        for lam, md in parts:
            den = lam[:, None] + lam[None, :]
            live = den > floor
            total += float(np.sum(2.0 * np.abs(md[live]) ** 2 / den[live]))
        return total

    def evaluate(total_nodes: int) -> tuple[float, int]:
        n_left = _odd_count(round(total_nodes * p1))
        n_right = _odd_count(round(total_nodes * (1.0 - p1)))
        xs_l = np.linspace(0.0, p1, n_left)
        xs_r = np.linspace(p1, 1.0, n_right)
        f_mid = curvature(p1)
        g_l = np.zeros(n_left)
        g_l[-1] = p1 * f_mid
        for i in range(1, n_left - 1):
            g_l[i] = xs_l[i] * curvature(xs_l[i])
        g_r = np.zeros(n_right)
        g_r[0] = (1.0 - p1) * f_mid
        for i in range(1, n_right - 1):
            g_r[i] = (1.0 - xs_r[i]) * curvature(xs_r[i])
        val = ((1.0 - p1) * simpson(g_l, x=xs_l) + p1 * simpson(g_r, x=xs_r))
        return val / math.log(2.0), n_left + n_right - 1

    coarse, _ = evaluate(nodes)
    n = nodes
    for _ in range(max_doublings):
        n *= 2
        fine, used = evaluate(n | 1)
        if abs(fine - coarse) <= rel_tol * abs(fine) + 1e-12:
            return FuchsUpperResult(fine, used)
        coarse = fine
    raise ConvergenceError(
        f"upper bound moved by more than rel_tol at {n} nodes")


def fuchs_upper(pair, p0: float | None = None, nodes: int = 81, *,
                rel_tol: float = 1e-5, max_doublings: int = 3) -> float:
    """Curvature upper bound on the accessible information, in bits.

    Accepts an EncodedPair (priors taken from it unless p0 is given) or a
    (rho0, rho1) sequence with an explicit p0.
    """
    states, priors = _as_states_and_priors(pair, p0)
    return fuchs_upper_detail(states[0], states[1], priors[1], nodes=nodes,
                              rel_tol=rel_tol, max_doublings=max_doublings).value


@dataclass(frozen=True)
class InfoReport:
    """Holevo information and accessible-information bracket for one pair."""

    holevo: float
    fuchs_lower: float
    fuchs_upper: float
    gap_rel: float
    truncation: TruncationSpec
    quadrature_nodes: int
    dropped_weight: float = 0.0


def info_report(pair: EncodedPair, *, nodes: int = 81,
                rel_tol: float = 1e-5) -> InfoReport:
    chi = holevo(pair)
    low = fuchs_lower_detail([pair.rho0, pair.rho1], list(pair.priors))
    up = fuchs_upper_detail(pair.rho0, pair.rho1, pair.params.p1,
                            nodes=nodes, rel_tol=rel_tol)
    gap = (up.value - low.value) / max(low.value, 1e-12)
    return InfoReport(chi, low.value, up.value, gap, pair.truncation,
                      up.nodes_used, low.dropped_weight)


@dataclass(frozen=True)
class PovmDescription:
    """A finite POVM: positive effects resolving the identity."""

    elements: tuple

    def __post_init__(self):
        elems = tuple(np.asarray(e, dtype=complex) for e in self.elements)
        if not elems:
            raise ValueError("need at least one effect")
        dim = elems[0].shape[0]
        total = np.zeros((dim, dim), dtype=complex)
        for e in elems:
            if e.shape != (dim, dim):
                raise ValueError("effects must share one square shape")
            if np.min(np.linalg.eigvalsh(0.5 * (e + e.conj().T))) < -1e-9:
                raise ValueError("effects must be positive semidefinite")
            total += e
        if np.max(np.abs(total - np.eye(dim))) > 1e-9:
            raise ValueError("effects do not resolve the identity")
        object.__setattr__(self, "elements", elems)


def mutual_information_povm(pair, p0: float | None, povm) -> float:
    """Classical mutual information of the POVM outcome distribution, in bits."""
    states, priors = _as_states_and_priors(pair, p0)
    effects = povm.elements if isinstance(povm, PovmDescription) \
        else PovmDescription(tuple(povm)).elements
    cond = np.array([[float(np.real(np.trace(s.matrix @ e))) for e in effects]
                     for s in states])
    cond = np.clip(cond, 0.0, None)
    p = np.asarray(priors)
    joint = p[:, None] * cond
    py = joint.sum(axis=0)

    def ent(v):
        v = v[v > 1e-15]
        return -float(np.sum(v * np.log2(v)))

    return ent(py) - float(sum(p[i] * ent(cond[i]) for i in range(len(states))))


@dataclass(frozen=True)
class ProtocolInfo:
    """Chi and (optionally) accessible-information bounds for one protocol."""

    chi: float
    lower: float | None = None
    upper: float | None = None
    dropped_weight: float = 0.0


def _mixture_entropy(rho0: FockState, rho1_diag: np.ndarray, p0: float) -> float:
    m = p0 * rho0.matrix + (1.0 - p0) * np.diag(rho1_diag)
    lam = np.linalg.eigvalsh(m)
    lam = lam[lam > fock.ENTROPY_FLOOR]
    return -float(np.sum(lam * np.log2(lam)))


def coherent_point_info(params: ScenarioParams, energy: float | None = None, *,
                        with_bounds: bool = False,
                        policy: TruncationPolicy = DEFAULT_POLICY,
                        nodes: int = 81) -> ProtocolInfo:
    """Chi (and Fuchs bounds) for a single coherent probe of fixed energy."""
    e = params.nbar_probe if energy is None else energy
    pair = build_pair(replace(params, nbar_probe=e, probe=CoherentProbe()),
                      policy)
    chi = holevo(pair)
    if not with_bounds:
        return ProtocolInfo(chi)
    low = fuchs_lower_detail([pair.rho0, pair.rho1], list(pair.priors))
    up = fuchs_upper_detail(pair.rho0, pair.rho1, pair.params.p1, nodes=nodes)
    return ProtocolInfo(chi, low.value, up.value, low.dropped_weight)


def kept_laguerre(n: int, weight_floor: float = 1e-16):
    """Gauss-Laguerre rule with negligible tail nodes removed."""
    u, w = np.polynomial.laguerre.laggauss(n)
    keep = w >= weight_floor
    return u[keep], w[keep]


def collapsed_average_info(params: ScenarioParams, *,
                           laguerre_nodes: int = 40,
                           with_bounds: bool = False,
                           policy: TruncationPolicy = DEFAULT_POLICY,
                           nodes: int = 41,
                           rel_tol: float = 1e-7) -> ProtocolInfo:
    """Average chi (and bounds) after heterodyning the idler first.

    Heterodyne collapses the probe arm to a coherent state whose energy is
    exponentially distributed with mean nbar_probe; the average over outcomes
    reduces to a Gauss-Laguerre sum over that energy.  The chi integral is
    re-evaluated on a doubled node set; disagreement beyond rel_tol raises
    ConvergenceError.  Bounds reuse the validated base grid.
    """
    nbar, eps, nenv, p0 = (params.nbar_probe, params.epsilon,
                           params.nbar_env, params.p0)
    if nbar <= 0.0:
        raise ValueError("collapsed protocol needs nbar_probe > 0")

    def chi_on_grid(n_nodes, with_bounds):
        u, w = kept_laguerre(n_nodes)
        e_max = nbar * u[-1]
        d_in = policy.coherent_dim(e_max)
        d_out = policy.detector_dim(eps * e_max, nenv)
        chan = build_thermal_loss(eps, nenv, d_in, d_out,
                                  env_tail=policy.env_tail)
        rho1 = fock.thermal_state(nenv, d_out)
        th_diag = np.real(np.diag(rho1.matrix))
        s_env = g_thermal(nenv)
        chi = low = up = dropped = 0.0
        for ui, wi in zip(u, w):
            vec = fock.coherent_vector(math.sqrt(nbar * ui), d_in)
            rho0 = apply_single_mode(chan, np.outer(vec, np.conj(vec)))
            if rho0.trace_deficit > 10.0 * policy.deficit_tol:
                raise TruncationError(
                    f"collapsed-node deficit {rho0.trace_deficit:.3e}")
            chi += wi * (_mixture_entropy(rho0, th_diag, p0) - s_env)
            if with_bounds:
                lo = fuchs_lower_detail([rho0, rho1], [p0, 1.0 - p0])
                hi = fuchs_upper_detail(rho0, rho1, 1.0 - p0, nodes=nodes)
                low += wi * lo.value
                up += wi * hi.value
                dropped += wi * lo.dropped_weight
        return chi, low, up, dropped

    chi, low, up, dropped = chi_on_grid(laguerre_nodes, with_bounds)
    check, _, _, _ = chi_on_grid(2 * laguerre_nodes, False)
    if abs(chi - check) > rel_tol * abs(check) + 1e-15:
        raise ConvergenceError(
            f"collapsed average moved {abs(chi - check):.3e} "
            f"on node doubling (chi {chi:.6e})")
    if not with_bounds:
        return ProtocolInfo(chi)
    return ProtocolInfo(chi, low, up, dropped)


def integrated_local_info(params: ScenarioParams,
                          quantity: str = "holevo", *,
                          laguerre_nodes: int = 40,
                          policy: TruncationPolicy = DEFAULT_POLICY,
                          nodes: int = 41) -> float:
    """One collapsed-protocol scalar: the exponential-energy average of a
    single-coherent-probe quantity.

    quantity selects {"holevo" | "fuchs_lower" | "fuchs_upper"}.
    """
    if quantity not in ("holevo", "fuchs_lower", "fuchs_upper"):
        raise ValueError(f"unknown quantity {quantity!r}")
    if quantity == "holevo":
        return collapsed_average_info(params, laguerre_nodes=laguerre_nodes,
                                      policy=policy).chi
    nbar, eps, nenv, p0 = (params.nbar_probe, params.epsilon,
                           params.nbar_env, params.p0)
    if nbar <= 0.0:
        raise ValueError("collapsed protocol needs nbar_probe > 0")
    u, w = kept_laguerre(laguerre_nodes)
    e_max = nbar * u[-1]
    d_in = policy.coherent_dim(e_max)
    d_out = policy.detector_dim(eps * e_max, nenv)
    chan = build_thermal_loss(eps, nenv, d_in, d_out, env_tail=policy.env_tail)
    rho1 = fock.thermal_state(nenv, d_out)
    total = 0.0
    for ui, wi in zip(u, w):
        vec = fock.coherent_vector(math.sqrt(nbar * ui), d_in)
        rho0 = apply_single_mode(chan, np.outer(vec, np.conj(vec)))
        if rho0.trace_deficit > 10.0 * policy.deficit_tol:
            raise TruncationError(
                f"collapsed-node deficit {rho0.trace_deficit:.3e}")
        if quantity == "fuchs_lower":
            total += wi * fuchs_lower_detail([rho0, rho1], [p0, 1.0 - p0]).value
        else:
            total += wi * fuchs_upper_detail(rho0, rho1, 1.0 - p0,
                                             nodes=nodes).value
    return total


def generaldyne_average_info(params: ScenarioParams,
                             measurement: GeneralDyneMeasurement, *,
                             hermite_nodes: int = 21,
                             policy: TruncationPolicy = DEFAULT_POLICY) -> ProtocolInfo:
    """Average chi when the idler is measured with a general-dyne of
    parameter t before transmission; t = 0.5 reproduces the heterodyne case.

    The collapsed probe is a fixed-squeezing coherent family whose mean
    wanders with the outcome; the outcome average is a two-dimensional
    Gauss-Hermite sum, folded onto one quadrant by symmetry.
    """
    nbar, eps, nenv, p0 = (params.nbar_probe, params.epsilon,
                           params.nbar_env, params.p0)
    fam = generaldyne_collapsed_probe(nbar, measurement)
    cx, cp = fam.cov[0, 0], fam.cov[1, 1]
    r_m = -0.5 * math.log(cx)
    k_add = 2.0 * nenv + 1.0 - eps
    nu0 = math.sqrt((eps * cx + k_add) * (eps * cp + k_add))
    s0 = f_entropy(nu0)
    s_env = g_thermal(nenv)
    u, w = np.polynomial.hermite_e.hermegauss(hermite_nodes)
    w = w / math.sqrt(2.0 * math.pi)
    half = u >= 0.0
    u, w = u[half], w[half]
    mult = np.where(u > 0.0, 2.0, 1.0)
    # Quadrant fold: the integrand is even in each displacement separately.
    grid = [(i, j) for i in range(u.size) for j in range(u.size)
            if mult[i] * mult[j] * w[i] * w[j] >= 1e-16]
    e_node = [(abs(fam.scale_x * u[i]) ** 2 + abs(fam.scale_p * u[j]) ** 2) / 4.0
              for i, j in grid]
    e_max = max(e_node) + math.sinh(r_m) ** 2
    d_in = policy.coherent_dim(e_max)
    d_out = policy.detector_dim(eps * e_max, nenv)
    chan = build_thermal_loss(eps, nenv, d_in, d_out, env_tail=policy.env_tail)
    th_diag = np.real(np.diag(fock.thermal_state(nenv, d_out).matrix))
    chi = 0.0
    for i, j in grid:
        alpha = 0.5 * (fam.scale_x * u[i] + 1j * fam.scale_p * u[j])
        vec = fock.squeezed_coherent_vector(r_m, alpha, d_in)
        rho0 = apply_single_mode(chan, np.outer(vec, np.conj(vec)))
        if rho0.trace_deficit > 10.0 * policy.deficit_tol:
            raise TruncationError(
                f"general-dyne node deficit {rho0.trace_deficit:.3e}")
        node_chi = _mixture_entropy(rho0, th_diag, p0) - p0 * s0 \
            - (1.0 - p0) * s_env
        chi += mult[i] * mult[j] * w[i] * w[j] * node_chi
    return ProtocolInfo(chi)
