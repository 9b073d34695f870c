import torch

from ..exceptions import EmptyMask, ShapeMismatch


def _check(a, b):
    if a.shape != b.shape:
        raise ShapeMismatch(f"loss operands differ in shape: {tuple(a.shape)} vs {tuple(b.shape)}")


def l1_loss(a, b):
    """Mean absolute difference."""
    a, b = torch.as_tensor(a), torch.as_tensor(b)
    _check(a, b)
    return (a - b).abs().mean()


def mse_loss(a, b, mask=None):
    """Mean squared difference over entries where ``mask`` is 1."""
    a, b = torch.as_tensor(a), torch.as_tensor(b)
    _check(a, b)
    if mask is None:
        return ((a - b) ** 2).mean()
    mask = torch.as_tensor(mask, dtype=a.dtype)
    _check(a, mask)
    n = mask.sum()
    if n == 0:
        raise EmptyMask("mask selects no entries")
    keep = mask > 0
    # masked targets are replaced outright so that their values (even non-finite) cannot leak
    b = torch.where(keep, b, a.detach())
    return ((a - b) ** 2).sum() / n
