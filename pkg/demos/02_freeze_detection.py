# # Finding freezes
#
# Each frame is compared with the previous one block by block.  A frame is a
# duplicate when no 8x8 block changed a lot (SAD above `hi`) and only a few
# blocks changed a little (SAD above `lo`).  Runs of duplicates longer than a
# second count as freeze events.

from vqoe import synth
from vqoe.temporal import detect_freezes, duplicate_runs
from vqoe.video_io import ClipMeta

meta = ClipMeta(64, 64, 30, 300)
clip = synth.generate_pristine("talking_head_proxy", meta, seed=1, velocity=2)

# Hold frame 40 for 45 frames (1.5 s) and frame 200 for 20 frames (0.67 s).

spec = synth.DegradationSpec(0.0, [(40, 45), (200, 20)])
frozen = synth.apply_degradation(clip, spec)

res = detect_freezes(frozen, meta)
print("freeze ratio:", res.freeze_ratio, "=", int(res.duplicates.sum()), "/", meta.frame_count)
print("events (only runs over one second):")
for e in res.events:
    print(f"  frames {e.start_frame}..{e.end_frame}, {e.duration_seconds:.2f} s")

# The short hold still counts toward the ratio but is not an event.

print("duplicate runs (inclusive):", duplicate_runs(res.duplicates))

# A clip that never moves after its first frame is flagged, since a freeze
# ratio near 1 could also just mean a static scene.

still = synth.apply_degradation(clip, synth.DegradationSpec(0.0, [(0, meta.frame_count - 1)]))
r = detect_freezes(still, meta)
print("still clip: ratio", round(r.freeze_ratio, 3), "warning", r.still_clip_warning)
