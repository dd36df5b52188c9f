"""CRB analysis and constant-modulus reflection-pattern design for
IRS-assisted sparse channel training."""

from .bayes_crb import (BayesFimBlocks, TauKappa, bayes_crb_trace,
                        bayes_fim_blocks, characteristic_phi, density_stats,
                        fisher_density, jaa_eigendecomposition, tau_kappa)
from .hybrid_crb import (HybridFimBlocks, hybrid_crb_alpha, hybrid_crb_psi,
                         hybrid_fim_blocks)
from .model import (ChannelRealization, PriorSpec, SystemConfig,
                    cascade_channel, sample_prior, synthesize_received,
                    ula_response, ula_response_derivative)
from .patterns import (ReflectionPattern, dft_equispaced,
                       dft_equispaced_phase_shifted, dft_first_k,
                       load_pattern, on_off_pattern, pattern_by_name,
                       project_constant_modulus, save_pattern)
from .pgm import (PgmSettings, PgmTrace, design_pattern, pgm_objective,
                  targeted_look_angles, wirtinger_gradient)

__version__ = "0.1.0"

__all__ = [
    "BayesFimBlocks", "TauKappa", "bayes_crb_trace", "bayes_fim_blocks",
    "characteristic_phi", "density_stats", "fisher_density",
    "jaa_eigendecomposition", "tau_kappa",
    "HybridFimBlocks", "hybrid_crb_alpha", "hybrid_crb_psi", "hybrid_fim_blocks",
    "ChannelRealization", "PriorSpec", "SystemConfig", "cascade_channel",
    "sample_prior", "synthesize_received", "ula_response",
    "ula_response_derivative",
    "ReflectionPattern", "dft_equispaced", "dft_equispaced_phase_shifted",
    "dft_first_k", "load_pattern", "on_off_pattern", "pattern_by_name",
    "project_constant_modulus", "save_pattern",
    "PgmSettings", "PgmTrace", "design_pattern", "pgm_objective",
    "targeted_look_angles", "wirtinger_gradient",
    "__version__",
]
