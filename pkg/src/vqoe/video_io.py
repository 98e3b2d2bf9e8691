"""Raw YUV4MPEG2 (4:2:0) reading and writing.

Everything downstream consumes :class:`FrameYuv` and :class:`ClipMeta`; no
compressed codec is involved, so the recorded bitrate of the original
transmission has to be attached separately with
:func:`attach_recorded_bitrate`.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyClip,
    MalformedHeader,
    NonPositiveBitrate,
    TruncatedFrame,
    UnsupportedChroma,
)

Y4M_MAGIC = b"YUV4MPEG2"
FRAME_MAGIC = b"FRAME"
_MAX_HEADER = 4096
_CHROMA_420 = {"420", "420jpeg", "420paldv", "420mpeg2"}


@dataclass(frozen=True, eq=False)
class FrameYuv:
    """One planar 4:2:0 picture with read-only uint8 planes."""

    y: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        planes = []
        for name in ("y", "u", "v"):
            p = np.asarray(getattr(self, name))
            if p.dtype != np.uint8 or p.ndim != 2:
                raise ValueError(f"{name} plane must be a 2-D uint8 array")
            if p.flags.writeable:
                p = p.copy()
                p.flags.writeable = False
            object.__setattr__(self, name, p)
            planes.append(p)
        h, w = planes[0].shape
        if w < 8 or h < 8:
            raise ValueError(f"frame {w}x{h} is smaller than one 8x8 block")
        cshape = ((h + 1) // 2, (w + 1) // 2)
        if planes[1].shape != cshape or planes[2].shape != cshape:
            raise ValueError(f"chroma planes must be {cshape[1]}x{cshape[0]}")

    @property
    def width(self) -> int:
        return self.y.shape[1]

    @property
    def height(self) -> int:
        return self.y.shape[0]

    def tobytes(self) -> bytes:
        return self.y.tobytes() + self.u.tobytes() + self.v.tobytes()

    def __eq__(self, other):
        if not isinstance(other, FrameYuv):
            return NotImplemented
        return (
            np.array_equal(self.y, other.y)
            and np.array_equal(self.u, other.u)
            and np.array_equal(self.v, other.v)
        )

    __hash__ = None


@dataclass(frozen=True)
class ClipMeta:
    width: int
    height: int
    fps: Fraction
    frame_count: int
    recorded_bitrate_bps: float | None = None
    clip_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "fps", Fraction(self.fps))
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        if self.width < 8 or self.height < 8:
            raise ValueError("clip must be at least 8x8")
        if self.recorded_bitrate_bps is not None and self.recorded_bitrate_bps <= 0:
            raise NonPositiveBitrate(f"recorded bitrate {self.recorded_bitrate_bps} <= 0")

    @property
    def duration_seconds(self) -> float:
        return float(self.frame_count / self.fps)


def attach_recorded_bitrate(meta: ClipMeta, bitrate_bps: float) -> ClipMeta:
    if not bitrate_bps > 0:
        raise NonPositiveBitrate(f"recorded bitrate must be > 0, got {bitrate_bps}")
    return dataclasses.replace(meta, recorded_bitrate_bps=float(bitrate_bps))


def frames_from_arrays(y: np.ndarray, u: np.ndarray, v: np.ndarray) -> list[FrameYuv]:
    """Wrap stacked (T, H, W) plane arrays as frames without copying."""
    for a in (y, u, v):
        a.flags.writeable = False
    return [FrameYuv(y[t], u[t], v[t]) for t in range(y.shape[0])]


def stack_planes(frames: Sequence[FrameYuv]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stack frames into (T, H, W) arrays, checking they share dimensions."""
    if len(frames) == 0:
        raise EmptyClip("clip has no frames")
    shape = frames[0].y.shape
    for i, f in enumerate(frames):
        if f.y.shape != shape:
            raise DimensionMismatch(
                f"frame {i} is {f.width}x{f.height}, expected {shape[1]}x{shape[0]}"
            )
    return (
        np.stack([f.y for f in frames]),
        np.stack([f.u for f in frames]),
        np.stack([f.v for f in frames]),
    )


def _parse_header(line: bytes) -> dict:
    tokens = line.split(b" ")
    if not tokens or tokens[0] != Y4M_MAGIC:
        raise MalformedHeader("missing YUV4MPEG2 signature")
    params = {}
    for tok in tokens[1:]:
        if not tok:
            continue
        try:
            params[chr(tok[0])] = tok[1:].decode("ascii")
        except UnicodeDecodeError:
            raise MalformedHeader(f"non-ascii header token {tok!r}") from None
    for key in "WHF":
        if key not in params:
            raise MalformedHeader(f"header lacks required {key} tag")
    try:
        width, height = int(params["W"]), int(params["H"])
        num, den = params["F"].split(":")
        fps = Fraction(int(num), int(den))
    except (ValueError, ZeroDivisionError):
        raise MalformedHeader(f"bad W/H/F values in header {line!r}") from None
    if width < 8 or height < 8:
        raise MalformedHeader(f"frame size {width}x{height} below 8x8")
    if width % 2 or height % 2:
        raise MalformedHeader(f"odd frame size {width}x{height} is invalid for 4:2:0")
    if fps <= 0:
        raise MalformedHeader(f"non-positive frame rate {params['F']}")
    interlace = params.get("I", "p")
    if interlace != "p":
        raise MalformedHeader(f"interlacing mode I{interlace} not supported")
    chroma = params.get("C", "420jpeg")
    if chroma not in _CHROMA_420:
        raise UnsupportedChroma(f"chroma subsampling C{chroma} is not 4:2:0")
    return {"width": width, "height": height, "fps": fps}


class Y4mClip:
    """A Y4M file opened for frame-by-frame reading.

    The frame count is established up front by hopping over frame payloads, so
    ``meta`` is complete before any frame is decoded.  Iterating yields frames
    in file order; each iteration re-reads from disk.
    """

    def __init__(self, path, clip_id: str | None = None):
        self.path = os.fspath(path)
        with open(self.path, "rb") as fh:
            head = fh.readline(_MAX_HEADER)
            if not head.endswith(b"\n"):
                raise MalformedHeader(f"{self.path}: header line missing or too long")
            info = _parse_header(head.rstrip(b"\n"))
            self._data_offset = fh.tell()
        w, h = info["width"], info["height"]
        self._frame_bytes = w * h + 2 * (w // 2) * (h // 2)
        self._offsets = self._scan()
        if clip_id is None:
            clip_id = os.path.splitext(os.path.basename(self.path))[0]
        self.meta = ClipMeta(w, h, info["fps"], len(self._offsets), None, clip_id)

    def _scan(self) -> list[int]:
        offsets = []
        size = os.path.getsize(self.path)
        with open(self.path, "rb") as fh:
            pos = self._data_offset
            while pos < size:
                fh.seek(pos)
                line = fh.readline(_MAX_HEADER)
                if not line.startswith(FRAME_MAGIC) or not line.endswith(b"\n"):
                    raise MalformedHeader(
                        f"{self.path}: bad frame marker at byte {pos} (frame {len(offsets)})"
                    )
                start = pos + len(line)
                if start + self._frame_bytes > size:
                    raise TruncatedFrame(
                        f"{self.path}: frame {len(offsets)} has {size - start} bytes, "
                        f"expected {self._frame_bytes}"
                    )
                offsets.append(start)
                pos = start + self._frame_bytes
        return offsets

    def __len__(self):
        return len(self._offsets)

    def __iter__(self) -> Iterator[FrameYuv]:
        w, h = self.meta.width, self.meta.height
        ysz, csz = w * h, (w // 2) * (h // 2)
        with open(self.path, "rb") as fh:
            for off in self._offsets:
                fh.seek(off)
                buf = fh.read(self._frame_bytes)
                if len(buf) != self._frame_bytes:
                    raise TruncatedFrame(f"{self.path}: file shrank while reading")
                a = np.frombuffer(buf, dtype=np.uint8)
                yield FrameYuv(
                    a[:ysz].reshape(h, w),
                    a[ysz : ysz + csz].reshape(h // 2, w // 2),
                    a[ysz + csz :].reshape(h // 2, w // 2),
                )

    def read_all(self) -> list[FrameYuv]:
        return list(self)


def open_y4m(path, clip_id: str | None = None) -> Y4mClip:
    return Y4mClip(path, clip_id)


def read_y4m(path, clip_id: str | None = None) -> tuple[list[FrameYuv], ClipMeta]:
    clip = Y4mClip(path, clip_id)
    return clip.read_all(), clip.meta


def _format_header(width: int, height: int, fps: Fraction) -> bytes:
    fps = Fraction(fps)
    return f"YUV4MPEG2 W{width} H{height} F{fps.numerator}:{fps.denominator} Ip A1:1 C420jpeg\n".encode(
        "ascii"
    )


def write_y4m(path, frames: Iterable[FrameYuv], fps) -> int:
    """Write frames to ``path`` and return the number written.

    The file is written to a temporary sibling and moved into place so readers
    never observe a half-written clip.
    """
    path = os.fspath(path)
    tmp = f"{path}.tmp{os.getpid()}"
    n = 0
    header = None
    try:
        with open(tmp, "wb") as fh:
            for f in frames:
                if header is None:
                    header = (f.width, f.height)
                    if f.width % 2 or f.height % 2:
                        raise DimensionMismatch(f"odd frame size {f.width}x{f.height}")
                    fh.write(_format_header(f.width, f.height, fps))
                elif (f.width, f.height) != header:
                    raise DimensionMismatch(f"frame {n} size differs from frame 0")
                fh.write(FRAME_MAGIC + b"\n")
                fh.write(f.tobytes())
                n += 1
        if n == 0:
            raise EmptyClip("refusing to write a clip with no frames")
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)
    return n
