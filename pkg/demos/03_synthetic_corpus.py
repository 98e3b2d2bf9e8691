# # A labelled synthetic corpus
#
# Clips are drawn from three network profiles.  Good clips are untouched,
# average ones get mild blur and maybe one short freeze, bad ones get heavy
# blur and spend most of their time frozen.  The MOS label is a fixed
# function of the injected blur and freeze fraction.

import sys
import tempfile
from collections import defaultdict

import numpy as np

from vqoe.features import load_dataset
from vqoe.synth import build_corpus, load_corpus_metadata

out = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="vqoe_corpus_")
corpus = build_corpus(60, seed=7, out_dir=out)
print("manifest:", corpus.manifest_path)

meta = load_corpus_metadata(corpus.metadata_path)
profile = {c["clip_id"]: c["profile"] for c in meta["clips"]}

# Extract the four features for every clip (cached next to the manifest).

samples = load_dataset(corpus.manifest_path)

by = defaultdict(list)
for s in samples:
    by[profile[s.clip_id]].append(s)

print(f"{'profile':<8} {'n':>3} {'mean MOS':>9} {'PBR %':>7} {'freeze ratio':>13} {'events':>7}")
for p in ("good", "average", "bad"):
    f = np.array([s.features.as_array() for s in by[p]])
    mos = np.mean([s.mos for s in by[p]])
    print(f"{p:<8} {len(by[p]):>3} {mos:>9.2f} {f[:, 0].mean():>7.2f} {f[:, 1].mean():>13.3f} {f[:, 2].mean():>7.2f}")
