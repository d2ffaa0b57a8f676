"""Numerical workbench for quantum illumination viewed as a communication
channel: Holevo information, accessible-information bounds, and the Gaussian
discord consumed by measuring the idler.

Conventions throughout: quadratures x = a + a†, p = -i(a - a†) with vacuum
variance 1; entropies and information in bits.
"""

from .fock import (FockState, PsdError, TruncationError, TruncationSpec,
                   coherent_state, epr_state, mean_photon, partial_trace,
                   squeezed_coherent_state, tensor, thermal_state,
                   von_neumann_entropy)
from .gaussian import (GaussianState, GeneralDyneMeasurement, epr_cm, f_entropy,
                       g_thermal, gaussian_discord, gaussian_discord_opt,
                       gaussian_entropy, illumination_cm, symplectic_eigenvalues,
                       thermal_cm)
from .channel import ThermalLossChannel, apply_epr_probe, apply_single_mode, \
    build_thermal_loss
from .scenarios import (CoherentProbe, CollapsedProbeDistribution,
                        CustomFockProbe, EncodedPair, EprProbe, ScenarioParams,
                        SqueezedCoherentProbe, TruncationPolicy, build_pair,
                        collapsed_probe_distribution, probe_amplitude)
from .info import (ConvergenceError, InfoReport, PovmDescription, ProtocolInfo,
                   coherent_point_info, collapsed_average_info, fuchs_lower,
                   fuchs_upper, generaldyne_average_info, holevo, info_report,
                   integrated_local_info, mutual_information_povm)
from .discord import (DiscordReport, Theorem1Report, TheoremConditions,
                      consumed_discord, discord_encoded_state, discord_mixture,
                      phase_symmetry_residual, theorem1_check,
                      verify_theorem_conditions)
from .experiments import (PerturbationStudyResult, PerturbationStudySpec,
                          ResultRow, SweepSpec, check_csv_schema,
                          run_concavity_check, run_generaldyne_scan,
                          run_perturbation_study, run_squeezed_scan,
                          run_sweep, scan_optimum)

from ._version import __version__

__all__ = [name for name in dir() if not name.startswith("_")]
