# # Predicting MOS and the three QoE classes
#
# Boosted regression trees map the four features to a MOS estimate.  Two
# thresholds found by grid search then cut MOS into bad / average / good.

import sys
import tempfile

import numpy as np

from vqoe.features import FEATURE_NAMES, feature_matrix, load_dataset
from vqoe.learn import (
    AdtConfig,
    feature_importance,
    fit_with_thresholds,
    format_table,
    kfold_cv,
    load_model,
    save_model,
)
from vqoe.synth import build_corpus

out = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="vqoe_train_")
corpus = build_corpus(120, seed=7, out_dir=out)
samples = load_dataset(corpus.manifest_path)

config = AdtConfig(n_estimators=10, learning_rate=0.1, loss="linear")

# 10-fold cross validation; every fold picks its thresholds from its own
# training part.

cv = kfold_cv(samples, config, k=10)
print(format_table({"ADT": cv}))
print("confusion (rows true, cols predicted; bad/average/good):")
print(np.array(cv.confusion))

# Which features carried the model?

for name, w in sorted(zip(FEATURE_NAMES, cv.feature_importance), key=lambda t: -t[1]):
    print(f"  {name:<22} {w:.3f}")

# Fit on everything, save, reload, and check the predictions survive.

x, y = feature_matrix(samples)
model = fit_with_thresholds(x, y, config)
path = f"{out}/model.json"
save_model(model, path)
again = load_model(path)
print("thresholds:", model.thresholds)
print("reloaded predictions identical:", np.array_equal(model.predict(x), again.predict(x)))
