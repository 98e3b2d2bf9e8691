"""Freeze detection with an mpdecimate-style block SAD test.

A frame is a duplicate of its predecessor when no 8x8 luma block changed by
more than ``hi`` (sum of absolute differences) and at most ``frac`` of the
blocks changed by more than ``lo``.  Runs of duplicates longer than one second
are freeze events; every duplicate counts toward the freeze ratio.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyClip
from .spatial import to_blocks
from .video_io import ClipMeta, FrameYuv

MIN_FREEZE_SECONDS = 1.0


@dataclass(frozen=True)
class DecimateThresholds:
    hi: float = 64 * 12
    lo: float = 64 * 5
    frac: float = 0.1

    def __post_init__(self):
        if not 0 <= self.lo <= self.hi:
            raise ValueError(f"need 0 <= lo <= hi, got lo={self.lo}, hi={self.hi}")
        if not 0 <= self.frac <= 1:
            raise ValueError(f"frac must be in [0, 1], got {self.frac}")


@dataclass(frozen=True)
class FreezeEvent:
    start_frame: int
    end_frame: int
    duration_seconds: float


@dataclass
class TemporalResult:
    freeze_ratio: float
    num_freezes: int
    total_freeze_seconds: float
    events: list[FreezeEvent] = field(default_factory=list)
    duplicates: np.ndarray | None = field(default=None, repr=False)
    still_clip_warning: bool = False


def block_sad(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """SAD of co-located 8x8 blocks; a, b are (T, H, W) luma stacks -> (T, nblocks)."""
    diff = np.abs(a.astype(np.int16) - b.astype(np.int16)).astype(np.int32)
    blocks = to_blocks(diff)
    return blocks.sum(axis=(1, 2)).reshape(len(a), -1)


def duplicate_mask_from_sad(sad: np.ndarray, th: DecimateThresholds) -> np.ndarray:
    nblocks = sad.shape[1]
    no_big_change = (sad <= th.hi).all(axis=1)
    changed_frac = (sad > th.lo).sum(axis=1) / nblocks
    return no_big_change & (changed_frac <= th.frac)


def is_duplicate(prev: FrameYuv, curr: FrameYuv, th: DecimateThresholds | None = None) -> bool:
    th = th or DecimateThresholds()
    if prev.y.shape != curr.y.shape:
        raise DimensionMismatch(
            f"frames are {prev.width}x{prev.height} and {curr.width}x{curr.height}"
        )
    sad = block_sad(prev.y[None], curr.y[None])
    return bool(duplicate_mask_from_sad(sad, th)[0])


def duplicate_mask(luma: np.ndarray, th: DecimateThresholds | None = None) -> np.ndarray:
    """Boolean per frame of a (T, H, W) luma stack; frame 0 is never a duplicate."""
    th = th or DecimateThresholds()
    mask = np.zeros(len(luma), dtype=bool)
    if len(luma) > 1:
        mask[1:] = duplicate_mask_from_sad(block_sad(luma[:-1], luma[1:]), th)
    return mask


def duplicate_runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of True as inclusive (start, end) index pairs."""
    padded = np.r_[False, mask, False].astype(np.int8)
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    return list(zip(starts.tolist(), ends.tolist()))


def segment_freezes(mask: np.ndarray, fps) -> TemporalResult:
    fps = Fraction(fps)
    n = len(mask)
    events = []
    for start, end in duplicate_runs(mask):
        length = end - start + 1
        if length / fps > MIN_FREEZE_SECONDS:
            events.append(FreezeEvent(start, end, float(length / fps)))
    dup_count = int(mask.sum())
    return TemporalResult(
        freeze_ratio=dup_count / n,
        num_freezes=len(events),
        total_freeze_seconds=float(sum(Fraction(e.end_frame - e.start_frame + 1) for e in events) / fps),
        events=events,
        duplicates=mask,
        still_clip_warning=n > 1 and dup_count == n - 1,
    )


def detect_freezes_luma(luma: np.ndarray, fps, th: DecimateThresholds | None = None) -> TemporalResult:
    if len(luma) < 2:
        raise EmptyClip(f"need at least 2 frames, got {len(luma)}")
    return segment_freezes(duplicate_mask(luma, th), fps)


def detect_freezes(
    frames: Sequence[FrameYuv], meta: ClipMeta, th: DecimateThresholds | None = None
) -> TemporalResult:
    if len(frames) < 2:
        raise EmptyClip(f"need at least 2 frames, got {len(frames)}")
    shape = frames[0].y.shape
    for i, f in enumerate(frames):
        if f.y.shape != shape:
            raise DimensionMismatch(f"frame {i} differs in size from frame 0")
    luma = np.stack([f.y for f in frames])
    return detect_freezes_luma(luma, meta.fps, th)
