"""Minimal network toolkit: layer specs, autograd-backed networks, Adam, losses."""
from .checkpoint import load_checkpoint, save_checkpoint
from .losses import l1_loss, mse_loss
from .network import Network, backward, forward, resolve_dtype
from .optim import AdamState, MilestoneDecay, PlateauDecay, adam_step, make_schedule
from .spec import (
    AddSkip,
    Conv3d,
    Dense,
    LeakyReLU,
    NetworkSpec,
    ReLU,
    SaveSkip,
    spatial_network,
    temporal_network,
)

__all__ = [
    "AdamState", "AddSkip", "Conv3d", "Dense", "LeakyReLU", "MilestoneDecay", "Network",
    "NetworkSpec", "PlateauDecay", "ReLU", "SaveSkip", "adam_step", "backward", "forward",
    "l1_loss", "load_checkpoint", "make_schedule", "mse_loss", "resolve_dtype",
    "save_checkpoint", "spatial_network", "temporal_network",
]
