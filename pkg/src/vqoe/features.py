"""Per-clip QoE feature vectors and MOS-labelled datasets."""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import MalformedRow, MissingFile, MissingRecordedBitrate, MosOutOfRange
from .spatial import IntraCoderConfig, PbrResult, intra_size_planes, pbr_from_bitrates
from .temporal import DecimateThresholds, TemporalResult, detect_freezes_luma
from .video_io import ClipMeta, FrameYuv, attach_recorded_bitrate, read_y4m, stack_planes

FEATURE_NAMES = ("pbr_percent", "freeze_ratio", "num_freezes", "total_freeze_seconds")
EXTRACTOR_VERSION = "1"
MOS_MIN, MOS_MAX = 1.0, 5.0
MANIFEST_COLUMNS = ("clip_id", "path", "recorded_bitrate_bps", "mos")


@dataclass(frozen=True)
class QoeFeatures:
    pbr_percent: float
    freeze_ratio: float
    num_freezes: int
    total_freeze_seconds: float

    def __post_init__(self):
        for name in FEATURE_NAMES:
            x = getattr(self, name)
            if not math.isfinite(x) or x < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {x}")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in FEATURE_NAMES], dtype=np.float64)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "QoeFeatures":
        return cls(
            float(d["pbr_percent"]),
            float(d["freeze_ratio"]),
            int(d["num_freezes"]),
            float(d["total_freeze_seconds"]),
        )


@dataclass(frozen=True)
class MosSample:
    clip_id: str
    features: QoeFeatures
    mos: float

    def __post_init__(self):
        check_mos(self.mos, self.clip_id)


def check_mos(mos: float, where="") -> float:
    if not MOS_MIN <= mos <= MOS_MAX:
        raise MosOutOfRange(f"{where}: MOS {mos} outside [{MOS_MIN}, {MOS_MAX}]")
    return mos


@dataclass
class ClipAnalysis:
    features: QoeFeatures
    pbr: PbrResult
    temporal: TemporalResult


def analyze_frames(
    frames: Sequence[FrameYuv],
    meta: ClipMeta,
    coder_config: IntraCoderConfig | None = None,
    thresholds: DecimateThresholds | None = None,
) -> ClipAnalysis:
    """Run PBR and freeze detection over one shared stack of the frames."""
    if meta.recorded_bitrate_bps is None:
        raise MissingRecordedBitrate(f"clip {meta.clip_id!r} has no recorded bitrate")
    coder_config = coder_config or IntraCoderConfig()
    y, u, v = stack_planes(frames)
    temporal = detect_freezes_luma(y, meta.fps, thresholds)
    duration = len(y) / float(meta.fps)
    intra_bps = intra_size_planes(y, u, v, coder_config.qp) / duration
    rec = float(meta.recorded_bitrate_bps)
    pbr = PbrResult(intra_bps, rec, pbr_from_bitrates(rec, intra_bps))
    features = QoeFeatures(
        pbr.pbr_percent, temporal.freeze_ratio, temporal.num_freezes, temporal.total_freeze_seconds
    )
    return ClipAnalysis(features, pbr, temporal)


def extract_features(
    frames: Sequence[FrameYuv],
    meta: ClipMeta,
    coder_config: IntraCoderConfig | None = None,
    thresholds: DecimateThresholds | None = None,
) -> QoeFeatures:
    return analyze_frames(frames, meta, coder_config, thresholds).features


# ------------------------------------------------------------------ caching


def extractor_key(coder_config: IntraCoderConfig, thresholds: DecimateThresholds) -> str:
    return (
        f"{EXTRACTOR_VERSION};qp={coder_config.qp};"
        f"hi={thresholds.hi!r};lo={thresholds.lo!r};frac={thresholds.frac!r}"
    )


def _cache_path(cache_dir, clip_id):
    return os.path.join(cache_dir, f"{clip_id}.json")


def read_cached(cache_dir, clip_id, key, recorded_bitrate_bps) -> QoeFeatures | None:
    try:
        with open(_cache_path(cache_dir, clip_id)) as fh:
            d = json.load(fh)
        if d.get("extractor_version") != key or d.get("clip_id") != clip_id:
            return None
        if d.get("recorded_bitrate_bps") != recorded_bitrate_bps:
            return None
        return QoeFeatures.from_dict(d)
    except (OSError, ValueError, KeyError, TypeError):
        return None


def write_cached(cache_dir, clip_id, key, recorded_bitrate_bps, features: QoeFeatures):
    """Atomically replace the cache entry; concurrent writers are last-wins."""
    os.makedirs(cache_dir, exist_ok=True)
    d = {"clip_id": clip_id, **features.to_dict(), "extractor_version": key,
         "recorded_bitrate_bps": recorded_bitrate_bps}
    fd, tmp = tempfile.mkstemp(dir=cache_dir, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(d, fh)
        os.replace(tmp, _cache_path(cache_dir, clip_id))
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


# ------------------------------------------------------------------ datasets


@dataclass(frozen=True)
class ManifestRow:
    clip_id: str
    path: str
    recorded_bitrate_bps: float
    mos: float


def read_manifest(manifest) -> list[ManifestRow]:
    manifest = os.fspath(manifest)
    if not os.path.exists(manifest):
        raise MissingFile(f"manifest {manifest} not found")
    base = os.path.dirname(os.path.abspath(manifest))
    rows = []
    with open(manifest, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(MANIFEST_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise MalformedRow(0, f"header lacks columns {sorted(missing)}")
        for i, rec in enumerate(reader, start=1):
            try:
                clip_id = rec["clip_id"].strip()
                path = rec["path"].strip()
                bitrate = float(rec["recorded_bitrate_bps"])
                mos = float(rec["mos"])
            except (TypeError, ValueError, AttributeError) as e:
                raise MalformedRow(i, str(e)) from None
            if not clip_id or not path:
                raise MalformedRow(i, "empty clip_id or path")
            if not math.isfinite(bitrate) or bitrate <= 0:
                raise MalformedRow(i, f"recorded_bitrate_bps must be > 0, got {rec['recorded_bitrate_bps']}")
            check_mos(mos, f"row {i} ({clip_id})")
            rows.append(ManifestRow(clip_id, os.path.join(base, path), bitrate, mos))
    return rows


def default_workers() -> int:
    env = os.environ.get("VQOE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def load_dataset(
    manifest,
    coder_config: IntraCoderConfig | None = None,
    thresholds: DecimateThresholds | None = None,
    cache_dir=None,
    use_cache: bool = True,
    workers: int | None = None,
) -> list[MosSample]:
    """Read a manifest CSV and return one :class:`MosSample` per row, in file order.

    Features come from the sidecar cache when a matching entry exists,
    otherwise the clip is decoded and analysed and the entry written.
    ``cache_dir`` defaults to ``.vqoe_cache`` next to the manifest.
    """
    coder_config = coder_config or IntraCoderConfig()
    thresholds = thresholds or DecimateThresholds()
    rows = read_manifest(manifest)
    if cache_dir is None:
        cache_dir = os.path.join(os.path.dirname(os.path.abspath(manifest)), ".vqoe_cache")
    key = extractor_key(coder_config, thresholds)

    def one(row: ManifestRow) -> MosSample:
        feats = read_cached(cache_dir, row.clip_id, key, row.recorded_bitrate_bps) if use_cache else None
        if feats is None:
            if not os.path.exists(row.path):
                raise MissingFile(f"{row.clip_id}: video {row.path} not found")
            frames, meta = read_y4m(row.path, row.clip_id)
            meta = attach_recorded_bitrate(meta, row.recorded_bitrate_bps)
            feats = extract_features(frames, meta, coder_config, thresholds)
            if use_cache:
                write_cached(cache_dir, row.clip_id, key, row.recorded_bitrate_bps, feats)
        return MosSample(row.clip_id, feats, row.mos)

    workers = workers or default_workers()
    if workers == 1:
        return [one(r) for r in rows]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(one, rows))


def feature_matrix(samples: Sequence[MosSample]) -> tuple[np.ndarray, np.ndarray]:
    x = np.array([s.features.as_array() for s in samples], dtype=np.float64).reshape(-1, len(FEATURE_NAMES))
    y = np.array([s.mos for s in samples], dtype=np.float64)
    return x, y
