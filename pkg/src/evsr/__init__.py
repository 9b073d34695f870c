"""Self-supervised spatiotemporal super-resolution for event-camera streams."""
from .events import Event, EventStream, ImpulseTrain, SensorGeometry, group_by_pixel, normalize, validate_stream
from .metrics import bin_events, rmse, stats
from .pipeline import EventSuperResolver, SRResult, assemble, super_resolve
from .resample import Kernel, augment, downsample, upsample_naive
from .spatial import SpatialConfig, SpatialSuperResolver, infer_spatial, train_spatial
from .synth import SynthConfig, downsample_stream, simulate, upsample_stream_nearest
from .temporal import TemporalConfig, TimestampRegressor, encode_features, predict_timestamps, train_temporal
from .voxel import VoxelCoding, VoxelGrid, column, decode, encode

__version__ = "0.1.0"
