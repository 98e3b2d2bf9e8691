"""Spatial quality: perceptual bitrate (PBR) and a DCT-histogram blur baseline.

PBR compares the bitrate a clip was recorded at with the size it takes when
every frame is coded on its own (no inter prediction) at a coarse quantizer.
Blur removes the high-frequency energy the intra coder would otherwise pay
for, so the intra bitrate collapses and the relative change grows.  Motion
does not enter because no frame references another.

The coder here is a bit-cost model, not a bitstream writer: 8x8 type-II DCT,
uniform scalar quantizer, zigzag scan, (run, level) pairs priced with
Exp-Golomb code lengths, one end-of-block bit per block and a 32-bit header
per frame.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyClip, MissingRecordedBitrate
from .video_io import ClipMeta, FrameYuv, stack_planes

BLOCK = 8
FRAME_HEADER_BITS = 32
EOB_BITS = 1
DEFAULT_QP = 30
HIGH_FREQ_START = 32


@dataclass(frozen=True)
class IntraCoderConfig:
    qp: int = DEFAULT_QP
    block_size: int = BLOCK

    def __post_init__(self):
        if not isinstance(self.qp, (int, np.integer)) or not 0 <= self.qp <= 51:
            raise ValueError(f"qp must be an integer in 0..51, got {self.qp!r}")
        if self.block_size != BLOCK:
            raise ValueError("only 8x8 blocks are supported")

    @property
    def q_step(self) -> float:
        return qstep(self.qp)


@dataclass(frozen=True)
class PbrResult:
    intra_bitrate_bps: float
    recorded_bitrate_bps: float
    pbr_percent: float


def qstep(qp: int) -> float:
    """Quantizer step size; doubles every 6 QP."""
    return 2.0 ** ((qp - 4) / 6.0)


def dct_matrix(n: int = BLOCK) -> np.ndarray:
    """Orthonormal DCT-II basis, rows indexed by frequency."""
    k = np.arange(n)[:, None]
    i = np.arange(n)[None, :]
    m = np.cos(np.pi * (2 * i + 1) * k / (2 * n)) * np.sqrt(2.0 / n)
    m[0, :] = np.sqrt(1.0 / n)
    return m


_C = dct_matrix()


def dct2(blocks: np.ndarray) -> np.ndarray:
    """Forward 2-D DCT over the last two axes of (..., 8, 8)."""
    return _C @ blocks @ _C.T


def idct2(coefs: np.ndarray) -> np.ndarray:
    return _C.T @ coefs @ _C


def zigzag_order(n: int = BLOCK) -> np.ndarray:
    """Flat indices of an n x n block in JPEG zigzag order."""
    cells = sorted(
        ((r, c) for r in range(n) for c in range(n)),
        key=lambda rc: (rc[0] + rc[1], rc[0] if (rc[0] + rc[1]) % 2 else rc[1]),
    )
    return np.array([r * n + c for r, c in cells])


ZIGZAG = zigzag_order()


def round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def to_blocks(planes: np.ndarray) -> np.ndarray:
    """Tile (T, H, W) planes into (T * nblocks, 8, 8), replicating edges."""
    t, h, w = planes.shape
    ph, pw = -h % BLOCK, -w % BLOCK
    if ph or pw:
        planes = np.pad(planes, ((0, 0), (0, ph), (0, pw)), mode="edge")
        h, w = h + ph, w + pw
    b = planes.reshape(t, h // BLOCK, BLOCK, w // BLOCK, BLOCK).swapaxes(2, 3)
    return b.reshape(-1, BLOCK, BLOCK)


def quantized_coefficients(blocks: np.ndarray, qp: int) -> np.ndarray:
    """Level-shift, transform and quantize; returns int32 (N, 64) in zigzag order."""
    x = blocks.astype(np.float64) - 128.0
    q = round_half_away(dct2(x) / qstep(qp))
    return q.reshape(len(q), -1)[:, ZIGZAG].astype(np.int32)


def _bit_length(k: np.ndarray) -> np.ndarray:
    # frexp exponent == bit length for positive integers, exact in float64
    return np.frexp(k.astype(np.float64))[1].astype(np.int64)


def ue_bits(k: np.ndarray) -> np.ndarray:
    """Unsigned Exp-Golomb code length: 2 * floor(log2(k + 1)) + 1."""
    return 2 * _bit_length(np.asarray(k) + 1) - 1


def se_bits(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.int64)
    mapped = np.where(v > 0, 2 * v - 1, -2 * v)
    return ue_bits(mapped)


def block_bits(coefs: np.ndarray) -> np.ndarray:
    """Per-block cost in bits of zigzag-ordered quantized coefficients (N, 64)."""
    n = len(coefs)
    rows, cols = np.nonzero(coefs)
    bits = np.full(n, EOB_BITS, dtype=np.int64)
    if len(rows) == 0:
        return bits
    prev = np.empty_like(cols)
    prev[0] = -1
    prev[1:] = cols[:-1]
    prev[np.r_[True, rows[1:] != rows[:-1]]] = -1
    runs = cols - prev - 1
    pair_bits = ue_bits(runs) + se_bits(coefs[rows, cols])
    np.add.at(bits, rows, pair_bits)
    return bits


def _plane_bits(planes: np.ndarray, qp: int, chunk: int = 4096) -> int:
    blocks = to_blocks(planes)
    total = 0
    for s in range(0, len(blocks), chunk):
        total += int(block_bits(quantized_coefficients(blocks[s : s + chunk], qp)).sum())
    return total


def intra_size_planes(y: np.ndarray, u: np.ndarray, v: np.ndarray, qp: int = DEFAULT_QP) -> int:
    """Intra-coded size in bits of stacked (T, H, W) planes."""
    if len(y) == 0:
        raise EmptyClip("clip has no frames")
    return FRAME_HEADER_BITS * len(y) + sum(_plane_bits(p, qp) for p in (y, u, v))


def intra_encode_size(frames: Sequence[FrameYuv], config: IntraCoderConfig | None = None) -> int:
    """Total bits to code every frame independently, all three planes."""
    config = config or IntraCoderConfig()
    y, u, v = stack_planes(frames)
    return intra_size_planes(y, u, v, config.qp)


def pbr_from_bitrates(recorded_bps: float, intra_bps: float) -> float:
    return max(0.0, (recorded_bps - intra_bps) / recorded_bps) * 100.0


def compute_pbr(
    frames: Sequence[FrameYuv], meta: ClipMeta, config: IntraCoderConfig | None = None
) -> PbrResult:
    if meta.recorded_bitrate_bps is None:
        raise MissingRecordedBitrate(f"clip {meta.clip_id!r} has no recorded bitrate")
    if len(frames) == 0:
        raise EmptyClip("clip has no frames")
    duration = len(frames) / float(meta.fps)
    intra_bps = intra_encode_size(frames, config) / duration
    rec = float(meta.recorded_bitrate_bps)
    return PbrResult(intra_bps, rec, pbr_from_bitrates(rec, intra_bps))


def dct_blur_baseline(frames: Sequence[FrameYuv]) -> float:
    """Blur score from the share of zeroed high-frequency DCT coefficients.

    Per luma block, the fraction of zigzag positions >= 32 that quantize to
    zero at QP 30; averaged over blocks, then over frames.  1.0 means no
    high-frequency content at all.  This is the content-sensitive prior-art
    measure PBR is meant to improve on.
    """
    if len(frames) == 0:
        raise EmptyClip("clip has no frames")
    y, _, _ = stack_planes(frames)
    coefs = quantized_coefficients(to_blocks(y), DEFAULT_QP)
    zero_frac = (coefs[:, HIGH_FREQ_START:] == 0).mean(axis=1)
    per_frame = zero_frac.reshape(len(y), -1).mean(axis=1)
    return float(per_frame.mean())
