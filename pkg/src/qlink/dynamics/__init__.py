from .evolve import (DEFAULT_ATOL, DEFAULT_RTOL, AmplitudeState, Trajectory,
                     derivative, integrate, wavepacket_overlap)
from .model import LinkModel, build_model

__all__ = ["AmplitudeState", "Trajectory", "LinkModel", "build_model",
           "derivative", "integrate", "wavepacket_overlap",
           "DEFAULT_RTOL", "DEFAULT_ATOL"]
from .lamb import (channel_frequency, compensate_detuning, lamb_shift,
                   max_weight_shift, self_energy_shift)

__all__ += ["lamb_shift", "compensate_detuning", "self_energy_shift",
            "max_weight_shift", "channel_frequency"]
