"""Input checks shared by the estimators and the CLI."""
import numpy as np

from .events import EventStream
from .exceptions import BadFactor, DataError
from .voxel import VoxelGrid


def check_scale(scale):
    if isinstance(scale, bool) or int(scale) != scale or scale < 1:
        raise BadFactor(f"scale factor must be an integer >= 1, got {scale!r}")
    return int(scale)


def check_stream(stream, allow_empty=True):
    if not isinstance(stream, EventStream):
        raise DataError(f"expected an EventStream, got {type(stream).__name__}")
    if not allow_empty and not len(stream):
        raise DataError("the event stream is empty")
    return stream


def check_grid(grid, allow_empty=True):
    if not isinstance(grid, VoxelGrid):
        raise DataError(f"expected a VoxelGrid, got {type(grid).__name__}")
    if not np.isfinite(grid.data).all():
        raise DataError("voxel grid contains non-finite values")
    if not allow_empty and grid.L == 0:
        raise DataError("the voxel grid is empty")
    return grid
