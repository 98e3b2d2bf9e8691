"""Synthetic clips with known degradations and a formula MOS.

The pristine generators stand in for real conversation footage: each one has
enough texture for blur to matter to the intra coder and enough motion that
every consecutive pair of frames fails the duplicate test, so injected
freezes are the only duplicates in a clip.  The synthetic MOS is a test
oracle for the pipeline, not a model of human opinion.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import ndimage

from .errors import OverlappingSpans, SpanOutOfBounds
from .spatial import intra_size_planes
from .temporal import DecimateThresholds, block_sad, duplicate_mask
from .video_io import ClipMeta, FrameYuv, frames_from_arrays, stack_planes, write_y4m

GENERATOR_VERSION = "1"
KINDS = ("gradient", "moving_checker", "noise_texture", "talking_head_proxy")
PROFILES = ("good", "average", "bad", "custom")
MANIFEST_COLUMNS = ("clip_id", "path", "recorded_bitrate_bps", "mos")


@dataclass(frozen=True)
class DegradationSpec:
    blur_sigma: float = 0.0
    freeze_spans: tuple[tuple[int, int], ...] = ()
    network_profile: str = "custom"

    def __post_init__(self):
        if self.blur_sigma < 0:
            raise ValueError("blur_sigma must be >= 0")
        if self.network_profile not in PROFILES:
            raise ValueError(f"unknown network profile {self.network_profile!r}")
        spans = tuple(sorted((int(s), int(n)) for s, n in self.freeze_spans))
        for (s0, n0), (s1, _) in zip(spans, spans[1:]):
            # the next span's anchor frame must be a fresh frame
            if s1 <= s0 + n0:
                raise OverlappingSpans(f"freeze spans {(s0, n0)} and {(s1, _)} overlap")
        for s, n in spans:
            if s < 0 or n < 1:
                raise SpanOutOfBounds(f"bad freeze span {(s, n)}")
        object.__setattr__(self, "freeze_spans", spans)

    def frozen_frames(self) -> int:
        return sum(n for _, n in self.freeze_spans)

    def check_bounds(self, frame_count: int):
        for s, n in self.freeze_spans:
            if s + n >= frame_count:
                raise SpanOutOfBounds(
                    f"span {(s, n)} runs past the last frame index {frame_count - 1}"
                )


@dataclass(frozen=True)
class SynthLabel:
    mos: float
    spec: DegradationSpec


def synthetic_mos(spec: DegradationSpec, frame_count: int) -> float:
    freeze_fraction = spec.frozen_frames() / frame_count
    mos = 5.0 - 3.0 * min(1.0, spec.blur_sigma / 5.0) - 2.5 * freeze_fraction
    return float(min(5.0, max(1.0, mos)))


def label(spec: DegradationSpec, frame_count: int) -> SynthLabel:
    return SynthLabel(synthetic_mos(spec, frame_count), spec)


# ---------------------------------------------------------------- generators


def _downsample(plane: np.ndarray) -> np.ndarray:
    h, w = plane.shape[-2:]
    p = plane.reshape(plane.shape[:-2] + (h // 2, 2, w // 2, 2))
    return p.mean(axis=(-3, -1))


def _to_u8(a: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(a), 0, 255).astype(np.uint8)


def _texture(rng, h, w, amp, smooth=0.6):
    t = rng.standard_normal((h, w))
    if smooth:
        t = ndimage.gaussian_filter(t, smooth, mode="wrap")
        t /= t.std()
    return amp * t


def _rolled(base: np.ndarray, n: int, dy: int, dx: int) -> np.ndarray:
    return np.stack([np.roll(base, (t * dy, t * dx), axis=(0, 1)) for t in range(n)])


def _checker(h, w, cell):
    yy, xx = np.mgrid[0:h, 0:w]
    return ((yy // cell + xx // cell) % 2).astype(np.float64)


def _disc(h, w, cy, cx, r):
    yy, xx = np.mgrid[0:h, 0:w]
    return ((yy - cy) ** 2 + (xx - cx) ** 2 <= r * r).astype(np.float64)


def _gen_gradient(rng, h, w, n, velocity):
    # drifting diagonal ramp with a dark textured card sliding across it
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    tex = _texture(rng, h, w, 20.0)
    card = np.zeros((h, w))
    card[: h // 2, : w // 2] = 1.0
    card_tex = 20.0 + 40.0 * _checker(h, w, 4) + _texture(rng, h, w, 10.0)
    y = np.empty((n, h, w))
    cu = np.empty_like(y)
    cv = np.empty_like(y)
    for t in range(n):
        ramp = 185.0 + 45.0 * np.sin(2 * np.pi * (xx + yy + 0.5 * t) / (h + w))
        shift = (t * velocity, t * (velocity + 1))
        mask = np.roll(card, shift, axis=(0, 1))
        y[t] = np.where(mask > 0, np.roll(card_tex, shift, axis=(0, 1)), ramp + tex)
        cu[t] = np.where(mask > 0, 90.0, 128 + 50 * np.sin(2 * np.pi * (xx + t) / w))
        cv[t] = np.where(mask > 0, 170.0, 128 + 50 * np.cos(2 * np.pi * (yy - t) / h))
    return y, cu, cv


def _gen_moving_checker(rng, h, w, n, velocity):
    # a fixed textured board translated with wraparound, so every frame has
    # exactly the same sample histogram whatever the velocity
    cell = 5
    base = 60.0 + 120.0 * _checker(h, w, cell) + _texture(rng, h, w, 14.0)
    base = ndimage.gaussian_filter(base, 0.5, mode="wrap")
    block = np.zeros((h, w))
    block[h // 8 : h // 8 + h * 7 // 16, w // 8 : w // 8 + w * 7 // 16] = 1.0
    base = np.where(block > 0, 0.15 * base + 215.0, base)
    cbase = 128 + 60 * (_checker(h, w, cell * 2) - 0.5) + _texture(rng, h, w, 10.0)
    y = _rolled(base, n, velocity, velocity)
    c = _rolled(cbase, n, velocity, velocity)
    return y, c, 255.0 - c


def _gen_noise_texture(rng, h, w, n, velocity):
    base = 95.0 + _texture(rng, h, w, 40.0, smooth=0.8)
    base += 130.0 * _disc(h, w, h / 2, w / 2, min(h, w) / 4)
    cu = 128.0 + _texture(rng, h, w, 25.0, smooth=1.0)
    cv = 128.0 + _texture(rng, h, w, 25.0, smooth=1.0)
    return (
        _rolled(base, n, velocity, velocity + 1),
        _rolled(cu, n, velocity, velocity + 1),
        _rolled(cv, n, -velocity, velocity),
    )


def _gen_talking_head(rng, h, w, n, velocity):
    # bright textured head bobbing in front of a slowly panning dark room
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    room = 25.0 + 80.0 * _checker(h, w, 16) + _texture(rng, h, w, 14.0)
    skin = 185.0 + _texture(rng, h, w, 18.0, smooth=0.8)
    y = np.empty((n, h, w))
    cu = np.empty_like(y)
    cv = np.empty_like(y)
    ry, rx = 0.36 * h, 0.26 * w
    for t in range(n):
        # circular sway keeps the head speed constant
        cy = h / 2 + 0.12 * h * math.cos(0.3 * t)
        cx = w / 2 + 0.12 * w * math.sin(0.3 * t)
        face = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0
        background = np.roll(room, t * velocity, axis=1)
        frame = np.where(face, np.roll(skin, t, axis=0), background)
        for ex in (-0.4, 0.4):
            eye = ((yy - (cy - 0.3 * ry)) / 2.5) ** 2 + ((xx - (cx + ex * rx)) / 3.5) ** 2 <= 1
            frame[eye] = 25.0
        mouth_h = 1.0 + 3.0 * abs(math.sin(0.9 * t))
        mouth = ((yy - (cy + 0.45 * ry)) / mouth_h) ** 2 + ((xx - cx) / (0.45 * rx)) ** 2 <= 1
        frame[mouth] = 40.0
        y[t] = frame
        cu[t] = np.where(face, 110.0, 128.0 + 20 * np.roll(_checker(h, w, 16), t * velocity, axis=1))
        cv[t] = np.where(face, 150.0, 128.0)
    return y, cu, cv


_GENERATORS = {
    "gradient": _gen_gradient,
    "moving_checker": _gen_moving_checker,
    "noise_texture": _gen_noise_texture,
    "talking_head_proxy": _gen_talking_head,
}


def _ensure_motion(y: np.ndarray, th: DecimateThresholds) -> None:
    """Stamp a toggling patch into frames whose change is too small to detect."""
    sad = block_sad(y[:-1], y[1:])
    weak = np.flatnonzero(~(sad > th.hi).any(axis=1)) + 1
    for t in weak:
        patch = y[t, :8, :8]
        y[t, :8, :8] = np.where(patch.mean() < 128, 235, 20)


def pristine_planes(kind, width, height, frame_count, seed=0, velocity=1):
    """Deterministic (y, u, v) uint8 stacks for a pristine clip."""
    if kind not in _GENERATORS:
        raise ValueError(f"unknown clip kind {kind!r}; expected one of {KINDS}")
    if width % 2 or height % 2 or width < 8 or height < 8:
        raise ValueError(f"bad clip size {width}x{height}")
    rng = np.random.default_rng(seed)
    y, cu, cv = _GENERATORS[kind](rng, height, width, frame_count, velocity)
    y = _to_u8(y)
    if frame_count > 1:
        _ensure_motion(y, DecimateThresholds())
    cu, cv = _downsample(cu), _downsample(cv)
    return y, _to_u8(cu), _to_u8(cv)


def generate_pristine(kind: str, meta: ClipMeta, seed=0, velocity: int = 1) -> list[FrameYuv]:
    return frames_from_arrays(*pristine_planes(kind, meta.width, meta.height, meta.frame_count, seed, velocity))


# --------------------------------------------------------------- degradation


def gaussian_kernel(sigma: float) -> np.ndarray:
    radius = math.ceil(3 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def blur_planes(planes: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur of each (H, W) slice of a (T, H, W) uint8 stack."""
    if sigma == 0:
        return planes.copy()
    k = gaussian_kernel(sigma)
    out = planes.astype(np.float64)
    for axis in (1, 2):
        out = ndimage.correlate1d(out, k, axis=axis, mode="reflect")
    return _to_u8(out)


def freeze_planes(planes: np.ndarray, spans) -> np.ndarray:
    out = planes.copy()
    for start, length in spans:
        out[start + 1 : start + length + 1] = out[start]
    return out


def degrade_planes(y, u, v, spec: DegradationSpec):
    spec.check_bounds(len(y))
    out = [blur_planes(p, spec.blur_sigma) for p in (y, u, v)]
    return tuple(freeze_planes(p, spec.freeze_spans) for p in out)


def apply_degradation(frames: Sequence[FrameYuv], spec: DegradationSpec) -> list[FrameYuv]:
    """Blur every plane, then overwrite each freeze span with its anchor frame."""
    return frames_from_arrays(*degrade_planes(*stack_planes(frames), spec))


def injected_duplicate_frames(spec: DegradationSpec) -> list[tuple[int, int]]:
    """Inclusive frame ranges a detector should flag for ``spec``'s freezes."""
    return [(s + 1, s + n) for s, n in spec.freeze_spans]


# ------------------------------------------------------------------- profiles


def _split_lengths(rng, total, parts, min_len):
    extra = total - parts * min_len
    cuts = np.sort(rng.integers(0, extra + 1, size=parts - 1))
    sizes = np.diff(np.r_[0, cuts, extra]) + min_len
    return sizes.tolist()


def _place_spans(rng, frame_count, lengths):
    """Lay out spans with at least one fresh frame before each one."""
    k = len(lengths)
    fresh = frame_count - sum(lengths)
    spare = fresh - k
    slots = rng.multinomial(spare, np.full(k + 1, 1.0 / (k + 1))) if spare > 0 else np.zeros(k + 1, int)
    spans = []
    pos = int(slots[0])
    for i, n in enumerate(lengths):
        spans.append((pos, int(n)))
        pos += n + 1 + int(slots[i + 1])
    return tuple(spans)


def min_freeze_frames(fps) -> int:
    """Shortest duplicate run that lasts strictly more than one second."""
    return math.floor(Fraction(fps)) + 1


def sample_profile(profile: str, frame_count: int, fps, rng) -> DegradationSpec:
    min_len = min_freeze_frames(fps)
    if profile == "good":
        return DegradationSpec(0.0, (), "good")
    if profile == "average":
        sigma = float(rng.uniform(1.0, 2.0))
        cap = int(0.2 * frame_count)
        spans = ()
        if cap >= min_len and rng.random() < 0.7:
            n = int(rng.integers(min_len, cap + 1))
            spans = _place_spans(rng, frame_count, [n])
        return DegradationSpec(sigma, spans, "average")
    if profile == "bad":
        sigma = float(rng.uniform(3.0, 5.0))
        target = int(round(rng.uniform(0.8, 0.95) * frame_count))
        parts_max = max(1, min(3, target // min_len))
        parts = int(rng.integers(1, parts_max + 1))
        target = min(target, frame_count - parts)
        if target < parts * min_len:
            raise ValueError(f"clip of {frame_count} frames is too short for a bad profile")
        return DegradationSpec(sigma, _place_spans(rng, frame_count, _split_lengths(rng, target, parts, min_len)), "bad")
    raise ValueError(f"cannot sample profile {profile!r}")


# --------------------------------------------------------------------- corpus

_MAX_DRAWS = 20


def freezes_recoverable(luma: np.ndarray, spec: DegradationSpec) -> bool:
    """True when the duplicate test flags exactly the injected frames."""
    expected = np.zeros(len(luma), dtype=bool)
    for first, last in injected_duplicate_frames(spec):
        expected[first : last + 1] = True
    return bool(np.array_equal(duplicate_mask(luma), expected))



@dataclass
class CorpusClip:
    clip_id: str
    path: str
    kind: str
    seed: int
    recorded_bitrate_bps: float
    label: SynthLabel


@dataclass
class Corpus:
    root: str
    manifest_path: str
    metadata_path: str
    clips: list[CorpusClip] = field(default_factory=list)


def build_corpus(
    n_clips: int,
    seed: int,
    out_dir,
    *,
    width: int = 64,
    height: int = 64,
    fps=10,
    frame_count: int = 60,
    qp: int = 30,
) -> Corpus:
    """Write a stratified corpus of degraded Y4M clips plus manifest and metadata.

    Roughly 30/40/30 percent of clips get the bad/average/good profile.  The
    manifest's recorded bitrate is the intra bitrate of the clip before
    degradation, so PBR measures what the degradation removed.
    """
    if n_clips < 10:
        raise ValueError("a corpus needs at least 10 clips")
    out_dir = os.fspath(out_dir)
    clip_dir = os.path.join(out_dir, "clips")
    os.makedirs(clip_dir, exist_ok=True)
    fps = Fraction(fps)
    duration = float(frame_count / fps)

    rng = np.random.default_rng(seed)
    n_bad = round(0.3 * n_clips)
    n_good = round(0.3 * n_clips)
    profiles = ["bad"] * n_bad + ["good"] * n_good + ["average"] * (n_clips - n_bad - n_good)
    profiles = [profiles[i] for i in rng.permutation(n_clips)]
    child_seeds = np.random.SeedSequence(seed).spawn(n_clips)

    clips = []
    for i, profile in enumerate(profiles):
        clip_id = f"clip_{i:04d}"
        crng = np.random.default_rng(child_seeds[i])
        kind = KINDS[i % len(KINDS)]
        for _ in range(_MAX_DRAWS):
            gen_seed = int(crng.integers(2**31))
            y, u, v = pristine_planes(kind, width, height, frame_count, gen_seed, velocity=int(crng.integers(2, 4)))
            spec = sample_profile(profile, frame_count, fps, crng)
            dy, du, dv = degrade_planes(y, u, v, spec)
            if freezes_recoverable(dy, spec):
                break
        else:
            raise RuntimeError(f"{clip_id}: no detectable {profile} clip after {_MAX_DRAWS} draws")
        rec_bps = intra_size_planes(y, u, v, qp) / duration
        rel = os.path.join("clips", f"{clip_id}.y4m")
        path = os.path.join(out_dir, rel)
        try:
            write_y4m(path, frames_from_arrays(dy, du, dv), fps)
        except OSError as e:
            raise OSError(f"failed writing {path}: {e}") from e
        clips.append(CorpusClip(clip_id, rel, kind, gen_seed, rec_bps, label(spec, frame_count)))

    clips.sort(key=lambda c: c.clip_id)
    manifest = os.path.join(out_dir, "manifest.csv")
    _write_manifest(manifest, clips)
    meta_path = os.path.join(out_dir, "corpus.json")
    _write_json(
        meta_path,
        {
            "generator_version": GENERATOR_VERSION,
            "seed": seed,
            "n_clips": n_clips,
            "width": width,
            "height": height,
            "fps": f"{fps.numerator}:{fps.denominator}",
            "frame_count": frame_count,
            "qp": qp,
            "clips": [
                {
                    "clip_id": c.clip_id,
                    "path": c.path,
                    "kind": c.kind,
                    "seed": c.seed,
                    "profile": c.label.spec.network_profile,
                    "blur_sigma": c.label.spec.blur_sigma,
                    "freeze_spans": [list(s) for s in c.label.spec.freeze_spans],
                    "recorded_bitrate_bps": c.recorded_bitrate_bps,
                    "mos": c.label.mos,
                }
                for c in clips
            ],
        },
    )
    return Corpus(out_dir, manifest, meta_path, clips)


def _write_manifest(path, clips):
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MANIFEST_COLUMNS)
        for c in clips:
            w.writerow([c.clip_id, c.path, repr(float(c.recorded_bitrate_bps)), repr(c.label.mos)])
    os.replace(tmp, path)


def _write_json(path, obj):
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def load_corpus_metadata(path) -> dict:
    with open(path) as fh:
        meta = json.load(fh)
    for c in meta["clips"]:
        c["spec"] = DegradationSpec(c["blur_sigma"], tuple(map(tuple, c["freeze_spans"])), c["profile"])
    return meta
