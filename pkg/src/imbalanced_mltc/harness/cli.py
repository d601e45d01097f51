"""Command line entry point.

Subcommands::

    synth       generate a synthetic corpus CSV from an imbalance profile
    preprocess  corpus CSV -> sparse dataset, vocabulary and label files
    train       fit one (algorithm, weak learner) pair and save the model
    predict     label raw text lines with a saved model
    evaluate    score a saved model on a labelled corpus
    experiment  run the full grid and write tables, sweeps and margins

Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..corpus import (
    PROFILES,
    Document,
    LabelSpace,
    MultiLabelDataset,
    count_labels,
    generate_synthetic,
    load_documents,
    save_documents,
    save_sparse,
    split_indices,
)
from ..errors import ArtifactError, ConfigurationError, DataError, ValidationError
from ..metrics import evaluate
from ..multilabel import train_adaboost_mh, train_bagging, train_br, train_lp
from ..preprocess import PipelineConfig, TextPipeline
from ..weak_learners import KINDS, WeakSpec, canonical_kind, derive_seed
from .config import ALGORITHMS, ExperimentConfig, CorpusSource, canonical_algorithm, load_config, parse_list
from .experiment import run_experiment
from .persistence import load_bundle, save_model
from .reports import FORMATS, write_reports

ALGORITHM_CHOICES = ("br", "lp", "adaboost-mh", "bagging-br", "bagging-lp")
WEAK_CHOICES = ("stump", "tree", "forest", "nb", "smo")


def _pipeline_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--features", type=int, default=None, help="number of features kept by information gain")
    p.add_argument("--stopwords", help="stopword list, one word per line")
    p.add_argument("--normalization", help="TAB-separated slang -> formal lexicon")
    p.add_argument("--stemmer", choices=("identity", "lexicon"), default="identity")
    p.add_argument("--stem-lexicon", help="TAB-separated word -> stem lexicon")


def _pipeline_config(args, default_features=753) -> PipelineConfig:
    return PipelineConfig(
        stopword_path=args.stopwords,
        normalization_lexicon_path=args.normalization,
        stemmer=args.stemmer,
        stem_lexicon_path=args.stem_lexicon,
        feature_count=args.features if args.features is not None else default_features,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="imbalanced-mltc", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus CSV")
    p.add_argument("--profile", choices=sorted(PROFILES), default="desk")
    p.add_argument("--instances", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="corpus CSV to write")

    p = sub.add_parser("preprocess", help="vectorize a corpus into the sparse format")
    p.add_argument("--corpus", required=True)
    _pipeline_args(p)
    p.add_argument("--train-count", type=int, default=None, help="fit on a train split and also write test.sparse")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")

    for name, helptext in (("train", "train and save one model"), ("evaluate", "score a saved model")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--corpus", required=True)
        p.add_argument("--train-count", type=int, default=None, help="use the split: train on / evaluate the held-out part")
        p.add_argument("--seed", type=int, default=0)
        if name == "train":
            p.add_argument("--algorithm", choices=ALGORITHM_CHOICES, default="br")
            p.add_argument("--weak", choices=WEAK_CHOICES, default="tree")
            p.add_argument("--iterations", type=int, default=20)
            _pipeline_args(p)
            p.add_argument("--out", required=True, help="model file to write")
        else:
            p.add_argument("--model", required=True)
            p.add_argument("--report", choices=FORMATS, default="text")
            p.add_argument("--out", help="write the report here instead of stdout")

    p = sub.add_parser("predict", help="label raw text lines")
    p.add_argument("--model", required=True)
    p.add_argument("--input", help="text file, one document per line (default: stdin)")
    p.add_argument("--out", help="write predictions here instead of stdout")

    p = sub.add_parser("experiment", help="run the experiment grid")
    p.add_argument("--config", help="INI experiment config")
    p.add_argument("--corpus", help="corpus CSV (default: synthetic profile)")
    p.add_argument("--profile", choices=sorted(PROFILES), default=None)
    p.add_argument("--instances", type=int, default=None)
    p.add_argument("--algorithm", action="append", help="repeatable or comma separated")
    p.add_argument("--weak", action="append", help="repeatable or comma separated")
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--features", type=int, default=None)
    p.add_argument("--train-count", type=int, default=None)
    p.add_argument("--seed", type=int, default=None, help="master seed")
    p.add_argument("--report", choices=FORMATS, default="text")
    p.add_argument("--out", required=True, help="output directory")
    return parser


def _rebase(documents: list[Document], source: LabelSpace, target: LabelSpace) -> list[Document]:
    """Re-express label ids of ``documents`` in ``target``'s numbering."""
    if source == target:
        return documents
    missing = sorted(set(source.names) - set(target.names))
    if missing:
        raise ValidationError(f"corpus uses labels the model does not know: {missing}")
    remap = {i: target.id_of(n) for i, n in enumerate(source.names)}
    return [Document(d.id, d.text, frozenset(remap[l] for l in d.labels)) for d in documents]


def _split_docs(documents, train_count, seed):
    if train_count is None:
        return documents, documents
    train_idx, test_idx = split_indices(len(documents), train_count, seed)
    return [documents[i] for i in train_idx], [documents[i] for i in test_idx]


def cmd_synth(args) -> int:
    factory, default_n = PROFILES[args.profile]
    docs, space = generate_synthetic(factory(), args.instances or default_n, args.seed)
    save_documents(docs, space, args.out)
    return 0


def cmd_preprocess(args) -> int:
    documents, space = load_documents(args.corpus)
    train_docs, test_docs = _split_docs(documents, args.train_count, args.seed)
    pipeline = TextPipeline.from_config(_pipeline_config(args))
    train = pipeline.fit(train_docs, space)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_sparse(train, out / ("train.sparse" if args.train_count is not None else "dataset.sparse"))
    if args.train_count is not None:
        save_sparse(pipeline.transform(test_docs, space), out / "test.sparse")
    (out / "vocabulary.txt").write_text("".join(t + "\n" for t in pipeline.selected_terms), encoding="utf-8")
    (out / "labels.txt").write_text("".join(n + "\n" for n in space.names), encoding="utf-8")
    return 0


def fit_model(train: MultiLabelDataset, algorithm: str, weak: WeakSpec, iterations: int, seed: int):
    """Train one model; bagging draws its bootstraps from ``seed``."""
    if algorithm == "br":
        return train_br(train, weak)
    if algorithm == "lp":
        return train_lp(train, weak)
    if algorithm == "adaboost_mh":
        return train_adaboost_mh(train, weak, iterations)
    return train_bagging(train, algorithm.split("_")[1], weak, iterations, seed)


def cmd_train(args) -> int:
    algorithm = canonical_algorithm(args.algorithm)
    kind = canonical_kind(args.weak)
    if args.iterations < 1:
        raise ConfigurationError("--iterations must be >= 1")
    documents, space = load_documents(args.corpus)
    train_docs, _ = _split_docs(documents, args.train_count, args.seed)
    pipeline = TextPipeline.from_config(_pipeline_config(args))
    train = pipeline.fit(train_docs, space)
    weak = WeakSpec(kind, {}, derive_seed(args.seed, 1, ALGORITHMS.index(algorithm), KINDS.index(kind)))
    bootstrap_seed = derive_seed(args.seed, 2, ALGORITHMS.index(algorithm), KINDS.index(kind))
    model = fit_model(train, algorithm, weak, args.iterations, bootstrap_seed)
    save_model(model, args.out, pipeline)
    return 0


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_predict(args) -> int:
    bundle = load_bundle(args.model)
    if bundle.pipeline is None:
        raise DataError("model file carries no text pipeline")
    if args.input:
        lines = Path(args.input).read_text(encoding="utf-8").splitlines()
    else:
        lines = sys.stdin.read().splitlines()
    if not lines:
        _emit("", args.out)
        return 0
    preds = bundle.predict_texts(lines)
    _emit("".join(bundle.space.format(s) + "\n" for s in preds), args.out)
    return 0


def cmd_evaluate(args) -> int:
    bundle = load_bundle(args.model)
    if bundle.pipeline is None:
        raise DataError("model file carries no text pipeline")
    documents, space = load_documents(args.corpus)
    _, test_docs = _split_docs(documents, args.train_count, args.seed)
    test_docs = _rebase(test_docs, space, bundle.space)
    preds = bundle.predict_texts(d.text for d in test_docs)
    q = bundle.space.Q
    report = evaluate(list(preds), [d.labels for d in test_docs], q)
    values = {
        "hamming_loss": report.hamming_loss,
        "subset_accuracy": report.subset_accuracy,
        "example_accuracy": report.example_accuracy,
        "micro_precision": report.micro_precision,
        "micro_recall": report.micro_recall,
        "micro_f1": report.micro_f1,
    }
    if args.report == "jsonl":
        text = json.dumps({"instances": report.N, **values}) + "\n"
    elif args.report == "csv":
        text = "metric,value\n" + "".join(f"{k},{v!r}\n" for k, v in values.items())
    else:
        text = f"instances: {report.N}\n" + "".join(f"{k}: {v:.4f}\n" for k, v in values.items())
        counts = count_labels([d.labels for d in test_docs], q)
        text += "per-label accuracy:\n" + "".join(
            f"  {bundle.space.name_of(l)} (n={int(counts[l])}): {a:.4f}\n"
            for l, a in enumerate(report.per_label_accuracy)
        )
    _emit(text, args.out)
    return 0


def experiment_config(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    corpus = config.corpus
    if args.corpus:
        corpus = CorpusSource(path=args.corpus)
    elif args.profile or args.instances:
        corpus = CorpusSource(
            profile=args.profile or corpus.profile,
            instances=args.instances or corpus.instances,
            seed=corpus.seed,
        )
    pipeline = config.pipeline
    if args.features is not None:
        pipeline = PipelineConfig(
            stopword_path=pipeline.stopword_path,
            normalization_lexicon_path=pipeline.normalization_lexicon_path,
            stemmer=pipeline.stemmer,
            stem_lexicon_path=pipeline.stem_lexicon_path,
            feature_count=args.features,
            lowercase=pipeline.lowercase,
        )
    algorithms = None
    if args.algorithm:
        algorithms = tuple(a for value in args.algorithm for a in parse_list(value))
    kinds = None
    if args.weak:
        kinds = tuple(k for value in args.weak for k in parse_list(value))
    return config.with_overrides(
        corpus=corpus,
        pipeline=pipeline,
        algorithms=algorithms,
        weak_kinds=kinds,
        iterations=args.iterations,
        train_count=args.train_count,
        master_seed=args.seed,
    )


def cmd_experiment(args) -> int:
    result = run_experiment(experiment_config(args))
    write_reports(result, args.out, args.report)
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "preprocess": cmd_preprocess,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors, which is our config code too.
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except ArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ConfigurationError.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DataError.exit_code


if __name__ == "__main__":
    sys.exit(main())
