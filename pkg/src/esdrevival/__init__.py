"""Two-photon entanglement collapse and revival in a non-Markovian dephasing channel."""

from .bell import AngleSet, LinearChshOptimizer, chsh_s, correlation, horodecki_smax, optimize_chsh_linear
from .channels import bell_phi_plus, dephase, hwp_on_a, pauli_x_on_a, state_maximal, state_partial
from .entanglement import (
    concurrence,
    concurrence_partial_closed,
    degree_of_polarization,
    find_crossings,
    gamma,
)
from .harness import EntanglementSweep, run_sweep
from .spectrum import (
    FPCavity,
    GaussianEnvelope,
    Spectrum,
    SpectralLine,
    airy_transmission,
    compose_filtered_spectrum,
    kernel,
    kernel_gaussian,
)
from .tomography import LinearInversionTomography, MaximumLikelihoodTomography, mle_reconstruct

__version__ = "0.1.0"

__all__ = [
    "AngleSet",
    "EntanglementSweep",
    "FPCavity",
    "GaussianEnvelope",
    "LinearChshOptimizer",
    "LinearInversionTomography",
    "MaximumLikelihoodTomography",
    "SpectralLine",
    "Spectrum",
    "airy_transmission",
    "bell_phi_plus",
    "chsh_s",
    "compose_filtered_spectrum",
    "concurrence",
    "concurrence_partial_closed",
    "correlation",
    "degree_of_polarization",
    "dephase",
    "find_crossings",
    "gamma",
    "horodecki_smax",
    "hwp_on_a",
    "kernel",
    "kernel_gaussian",
    "mle_reconstruct",
    "optimize_chsh_linear",
    "pauli_x_on_a",
    "run_sweep",
    "state_maximal",
    "state_partial",
]
