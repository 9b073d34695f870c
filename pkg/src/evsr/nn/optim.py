"""Bias-corrected Adam and the learning-rate decay policies used in training."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import torch

from ..exceptions import ShapeMismatch


@dataclass
class AdamState:
    lr: float = 1e-3
    betas: tuple = (0.9, 0.999)
    eps: float = 1e-8
    decay_factor: float = 0.1
    step: int = 0
    m: List[torch.Tensor] = field(default_factory=list)
    v: List[torch.Tensor] = field(default_factory=list)

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")

    def decay(self):
        self.lr *= self.decay_factor


def adam_step(state: AdamState, params: Sequence[torch.Tensor], grads: Sequence[torch.Tensor]):
    """Update ``params`` in place and advance ``state``."""
    if len(params) != len(grads):
        raise ShapeMismatch(f"{len(params)} parameters but {len(grads)} gradients")
    if not state.m:
        state.m = [torch.zeros_like(p) for p in params]
        state.v = [torch.zeros_like(p) for p in params]
    b1, b2 = state.betas
    state.step += 1
    c1 = 1.0 - b1 ** state.step
    c2 = 1.0 - b2 ** state.step
    with torch.no_grad():
        for p, g, m, v in zip(params, grads, state.m, state.v):
            if p.shape != g.shape or m.shape != p.shape:
                raise ShapeMismatch(f"parameter {tuple(p.shape)} vs gradient {tuple(g.shape)}")
            m.mul_(b1).add_(g, alpha=1.0 - b1)
            v.mul_(b2).addcmul_(g, g, value=1.0 - b2)
            denom = (v / c2).sqrt_().add_(state.eps)
            p.addcdiv_(m, denom, value=-state.lr / c1)
    return params, state


class PlateauDecay:
    """Decay the learning rate when the windowed mean loss stops improving.

    The mean over the last ``window`` losses must drop by a relative
    ``threshold`` within ``window`` steps, otherwise lr is multiplied by the
    optimizer's decay factor. At most ``max_decays`` decays are applied.
    """

    def __init__(self, window=100, threshold=1e-4, max_decays=2):
        self.window = window
        self.threshold = threshold
        self.max_decays = max_decays
        self.n_decays = 0
        self._recent = deque(maxlen=window)
        self._best = float("inf")
        self._stale = 0

    def update(self, state: AdamState, loss: float) -> bool:
        self._recent.append(loss)
        if self.n_decays >= self.max_decays or len(self._recent) < self.window:
            return False
        mean = sum(self._recent) / len(self._recent)
        if mean < self._best * (1.0 - self.threshold):
            self._best = mean
            self._stale = 0
            return False
        self._stale += 1
        if self._stale >= self.window:
            state.decay()
            self.n_decays += 1
            self._stale = 0
            self._best = mean
            return True
        return False


class MilestoneDecay:
    """Decay the learning rate at fixed step numbers."""

    def __init__(self, milestones: Optional[Sequence[int]] = None):
        self.milestones = sorted(milestones or ())
        self.n_decays = 0

    def update(self, state: AdamState, loss: float) -> bool:
        if state.step in self.milestones:
            state.decay()
            self.n_decays += 1
            return True
        return False


def make_schedule(decay="plateau", milestones=None):
    if decay == "plateau":
        return PlateauDecay()
    if decay == "milestones":
        return MilestoneDecay(milestones)
    if decay in (None, "none"):
        return MilestoneDecay(())
    raise ValueError(f"unknown decay policy {decay!r}")
