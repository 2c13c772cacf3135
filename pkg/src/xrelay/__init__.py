"""Relay-aided interference alignment for X-networks without transmitter CSI.

``num_tx`` single-antenna transmitters each hold a symbol for every one of
``num_rx`` single-antenna receivers. Half-duplex amplify-and-forward relays
with global CSI precode what they overheard so that, over
``num_tx + num_rx - 1`` slots, every receiver sees its interference squeezed
into ``num_rx - 1`` dimensions and can zero-force its ``num_tx`` symbols.
"""

from .aligner import PrecoderSet, build_system, solve_precoders, verify_alignment_condition
from .analysis import certify, estimate_dof, run_campaign, sum_rate_trial, sweep
from .linalg import RankDeficientError, IllConditionedError
from .model import (ChannelMode, Constellation, InfeasibleConfigError, NetworkConfig, NoiseModel,
                    check_feasibility, draw_channels, draw_symbols, make_config)
from .receiver import build_U, decode, effective_channel
from .scheme import assemble_extended_channel, rx_signal_slotwise

__version__ = "0.1.0"

__all__ = [
    "ChannelMode",
    "Constellation",
    "IllConditionedError",
    "InfeasibleConfigError",
    "NetworkConfig",
    "NoiseModel",
    "PrecoderSet",
    "RankDeficientError",
    "assemble_extended_channel",
    "build_U",
    "build_system",
    "certify",
    "check_feasibility",
    "decode",
    "draw_channels",
    "draw_symbols",
    "effective_channel",
    "estimate_dof",
    "make_config",
    "run_campaign",
    "rx_signal_slotwise",
    "solve_precoders",
    "sum_rate_trial",
    "sweep",
    "verify_alignment_condition",
]
