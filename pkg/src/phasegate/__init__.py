"""Phase-modulated entangling gates robust to Rabi-rate noise.

Sequence synthesis, phase-space closure, entangling phases, noise filter
functions and purity estimates, plus a brute-force Fock-space oracle.
"""
__version__ = "0.1.0"

from .entangler import calibrate_rabi, entangling_phase
from .model import (Config, ConfigError, ConcatRecipe, DriveSpec, ModeSpec, PhaseSequence,
                    QubitPairState, SpectrumNoise, initial_state_from_z_label, load_config,
                    load_config_file)
from .noisekit import filter_function, purity_loss_mc, purity_loss_spectral
from .phasespace import closure_residual, trajectory
from .seqsynth import apply_R, reduce_commensurate, synth_full, synth_recipe

__all__ = [
    "__version__", "Config", "ConfigError", "ConcatRecipe", "DriveSpec", "ModeSpec",
    "PhaseSequence", "QubitPairState", "SpectrumNoise", "initial_state_from_z_label",
    "load_config", "load_config_file", "apply_R", "synth_full", "synth_recipe",
    "reduce_commensurate", "closure_residual", "trajectory", "entangling_phase",
    "calibrate_rabi", "filter_function", "purity_loss_spectral", "purity_loss_mc",
]
