"""Channel fidelities, the k-fidelity hierarchy and their sampling estimators."""
from .channels import Channel, NoiseConfig, noisy_backend, unitary_channel
from .fidelity import k_fidelities, k_fidelity, process_fidelity, process_fidelity_exact, zero_fidelity
from .sampling import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Channel",
    "NoiseConfig",
    "k_fidelities",
    "k_fidelity",
    "noisy_backend",
    "process_fidelity",
    "process_fidelity_exact",
    "unitary_channel",
    "zero_fidelity",
]
