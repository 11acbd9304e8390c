"""Fourier-domain workbench for table-parameterized turbo codes.

Submodules:
    boolfn          dense pseudo-Boolean tables and Walsh-Hadamard spectra
    goldreich_levin dominant-coefficient search by query access
    channel         AWGN and discrete memoryless noise models
    codec           turbo encoder, BCJR / iterative / brute-force decoders
    metrics         BCE, BER, conditional entropy, and the bounds between them
    landscape       loss probes along lines between encoder triples
    train           entropy-driven encoder training with power projection
    cli             reproducible command-line experiments
"""

from .boolfn import (
    FourierSpectrum,
    PseudoBooleanTable,
    energy_profile,
    fixture_tables,
    wht_forward,
    wht_inverse,
)
from .channel import AwgnChannel, DiscreteChannel, snr_db_to_sigma
from .codec import (
    Codeword,
    Interleaver,
    SoftPosterior,
    TurboEncoderParams,
    analytic_power,
    bcjr_constituent,
    brute_force_map,
    constrain_power,
    encode,
    optimal_center,
    turbo_decode,
)
from .goldreich_levin import GLConfig, GLResult, QueryFunction, gamma_search, goldreich_levin
from .landscape import ThetaTriple, bent_triple, line_probe, loss_of_theta, parity_triple
from .metrics import bce, ber, check_two_sided_bound, conditional_entropy_estimate
from .train import TrainConfig, entropy_loss_and_gradient, evaluate_trained, train_encoder

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
