"""No-reference video QoE annotation: PBR and freeze metrics, MOS regression, QoE labels."""

from .features import FEATURE_NAMES, MosSample, QoeFeatures, extract_features, load_dataset
from .spatial import IntraCoderConfig, PbrResult, compute_pbr, dct_blur_baseline, intra_encode_size
from .temporal import DecimateThresholds, FreezeEvent, TemporalResult, detect_freezes, is_duplicate
from .video_io import ClipMeta, FrameYuv, attach_recorded_bitrate, open_y4m, read_y4m, write_y4m

__version__ = "0.1.0"
