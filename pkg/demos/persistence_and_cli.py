"""
Saving a model and using the command line
=========================================

A saved model bundles the label names, the trained ensemble and the text
pipeline, so raw text can be classified straight from the file.
"""

import subprocess
import sys
import tempfile
from pathlib import Path

from imbalanced_mltc.corpus import desk_profile, generate_synthetic, save_documents, signature_words
from imbalanced_mltc.harness import load_bundle, load_model, save_model
from imbalanced_mltc.multilabel import train_adaboost_mh
from imbalanced_mltc.preprocess import PipelineConfig, TextPipeline
from imbalanced_mltc.weak_learners import WeakSpec

work = Path(tempfile.mkdtemp())
docs, space = generate_synthetic(desk_profile(), 1500, seed=3)
pipe = TextPipeline.from_config(PipelineConfig(feature_count=120))
train = pipe.fit(docs[:1200], space)

model = train_adaboost_mh(train, WeakSpec("tree", seed=0), 5)
save_model(model, work / "boost.json", pipe)

# Loading reproduces every round bit for bit.
again = load_model(work / "boost.json")
print([round(r.alpha, 4) for r in again.rounds], flush=True)

bundle = load_bundle(work / "boost.json")
label = space.names[0]
text = " ".join(signature_words(desk_profile())[label])
predicted = bundle.predict_texts([text])[0]
print(text, "->", space.format(predicted), flush=True)

# The same steps through the CLI: write a corpus, train, predict.  The
# empty second line comes back as an empty label set.
save_documents(docs, space, work / "corpus.csv")
cli = [sys.executable, "-m", "imbalanced_mltc"]
subprocess.run(cli + ["train", "--corpus", str(work / "corpus.csv"), "--algorithm", "bagging-br",
                      "--weak", "tree", "--iterations", "5", "--features", "120",
                      "--out", str(work / "bag.json")], check=True)
(work / "texts.txt").write_text(text + "\n\n")
subprocess.run(cli + ["predict", "--model", str(work / "bag.json"), "--input", str(work / "texts.txt")], check=True)

# A tampered file is refused rather than silently misread.
broken = work / "broken.json"
broken.write_text((work / "boost.json").read_text()[:200])
print("exit code on a truncated model:",
      subprocess.run(cli + ["predict", "--model", str(broken)], capture_output=True).returncode)
