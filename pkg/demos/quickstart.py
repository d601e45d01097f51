"""
Multi-label text classification in a few lines
===============================================

Generate a small imbalanced corpus, turn it into binary feature vectors
and compare Binary Relevance with Label Powerset on held-out documents.
"""

# The desk profile has twelve labels whose frequencies span 600 down to 6.
from imbalanced_mltc.corpus import desk_profile, generate_synthetic, label_distribution

docs, space = generate_synthetic(desk_profile(), 1500, seed=7)
print(len(docs), "documents,", space.Q, "labels")
print(label_distribution((docs, space)).summary())
print(docs[0].text[:80], "->", space.format(docs[0].labels))

# Split first, then fit the text pipeline on the training side only so the
# selected vocabulary never sees a test document.
from imbalanced_mltc.preprocess import PipelineConfig, TextPipeline

train_docs, test_docs = docs[:1200], docs[1200:]
pipe = TextPipeline.from_config(PipelineConfig(feature_count=150))
train = pipe.fit(train_docs, space)
test = pipe.transform(test_docs, space)
print("feature matrix", train.X.shape, "with", train.X.nnz, "ones")
print("top terms:", pipe.selected_terms[:5])

# Both transformations wrap the same weak learner, here a pruned C4.5 tree.
from imbalanced_mltc.metrics import evaluate
from imbalanced_mltc.multilabel import train_br, train_lp
from imbalanced_mltc.weak_learners import WeakSpec

tree = WeakSpec("tree", seed=1)
for name, fit in (("BR", train_br), ("LP", train_lp)):
    model = fit(train, tree)
    report = evaluate(list(model.predict(test.X)), list(test.labelsets), space.Q)
    print(f"{name}: hamming={report.hamming_loss:.4f} subset={report.subset_accuracy:.3f} "
          f"micro-F1={report.micro_f1:.3f}")

# Per-label accuracies average out to one minus the hamming loss.
print(sum(report.per_label_accuracy) / space.Q, 1 - report.hamming_loss)
