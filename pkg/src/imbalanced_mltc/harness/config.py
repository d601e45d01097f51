"""Experiment configuration and its INI file format.

Example::

    [corpus]
    source = synthetic        # or a path to a corpus CSV
    profile = desk            # desk | lapor
    instances = 1500
    seed = 7

    [pipeline]
    features = 200

    [split]
    train_count = 1200
    seed = 1

    [experiment]
    algorithms = br, lp, adaboost_mh, bagging_br, bagging_lp
    weak = stump, tree
    iterations = 10
    master_seed = 42

    [weak.tree]
    pruning_cf = 0.25

Unknown sections or keys are rejected.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from typing import Any, Mapping

from ..corpus import PROFILES, ImbalanceProfile
from ..errors import ConfigurationError
from ..preprocess import PipelineConfig
from ..weak_learners import DEFAULTS, KINDS, canonical_kind

ALGORITHMS = ("br", "lp", "adaboost_mh", "bagging_br", "bagging_lp")
ALGORITHM_ALIASES = {
    "adaboost-mh": "adaboost_mh",
    "adaboost": "adaboost_mh",
    "bagging-br": "bagging_br",
    "bagging-lp": "bagging_lp",
}


def canonical_algorithm(name: str) -> str:
    name = name.strip().lower()
    name = ALGORITHM_ALIASES.get(name, name)
    if name not in ALGORITHMS:
        raise ConfigurationError(f"unknown algorithm {name!r}; expected one of {ALGORITHMS}")
    return name


def parse_list(value: str) -> list[str]:
    return [v.strip() for v in value.replace(";", ",").split(",") if v.strip()]


@dataclass(frozen=True)
class CorpusSource:
    path: str | None = None
    profile: str = "desk"
    instances: int | None = None
    seed: int | None = None
    custom_profile: ImbalanceProfile | None = None

    @property
    def synthetic(self) -> bool:
        return self.path is None

    def resolved_profile(self) -> tuple[ImbalanceProfile, int]:
        if self.custom_profile is not None:
            default_n = self.instances or sum(self.custom_profile.per_label_count)
            return self.custom_profile, self.instances or default_n
        if self.profile not in PROFILES:
            raise ConfigurationError(f"unknown profile {self.profile!r}; expected one of {sorted(PROFILES)}")
        factory, default_n = PROFILES[self.profile]
        return factory(), self.instances or default_n


@dataclass(frozen=True)
class ExperimentConfig:
    corpus: CorpusSource = field(default_factory=CorpusSource)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    train_count: int | None = None
    split_seed: int | None = None
    algorithms: tuple[str, ...] = ALGORITHMS
    weak_kinds: tuple[str, ...] = ("tree",)
    iterations: int = 20
    master_seed: int = 0
    weak_params: Mapping[str, Mapping[str, Any]] = field(default_factory=dict)

    def __post_init__(self):
        algos = tuple(canonical_algorithm(a) for a in self.algorithms)
        kinds = tuple(canonical_kind(k) for k in self.weak_kinds)
        if not algos:
            raise ConfigurationError("at least one algorithm is required")
        if not kinds:
            raise ConfigurationError("at least one weak learner is required")
        if len(set(algos)) != len(algos) or len(set(kinds)) != len(kinds):
            raise ConfigurationError("algorithms and weak learners must not repeat")
        if int(self.iterations) < 1:
            raise ConfigurationError("iterations must be >= 1")
        # Keep the canonical report order regardless of how they were listed.
        object.__setattr__(self, "algorithms", tuple(a for a in ALGORITHMS if a in algos))
        object.__setattr__(self, "weak_kinds", tuple(k for k in KINDS if k in kinds))
        params = {canonical_kind(k): dict(v) for k, v in self.weak_params.items()}
        for kind, p in params.items():
            unknown = set(p) - set(DEFAULTS[kind])
            if unknown:
                raise ConfigurationError(f"unknown {kind} hyperparameters: {sorted(unknown)}")
        object.__setattr__(self, "weak_params", params)

    def with_overrides(self, **changes) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


_SCHEMA = {
    "corpus": {"source", "profile", "instances", "seed", "counts", "cardinality", "tokens_per_label", "noise_rate"},
    "pipeline": {"features", "stopwords", "normalization", "stemmer", "stem_lexicon", "lowercase"},
    "split": {"train_count", "seed"},
    "experiment": {"algorithms", "weak", "iterations", "master_seed"},
}


def _int(section, key, value):
    try:
        return int(value)
    except ValueError:
        raise ConfigurationError(f"[{section}] {key} must be an integer, got {value!r}") from None


def _float(section, key, value):
    try:
        return float(value)
    except ValueError:
        raise ConfigurationError(f"[{section}] {key} must be a number, got {value!r}") from None


def _weak_value(kind, key, raw):
    if raw.strip().lower() in ("none", "null", ""):
        return None
    if key in ("max_depth", "n_trees", "max_features", "max_passes"):
        return _int(f"weak.{kind}", key, raw)
    return _float(f"weak.{kind}", key, raw)


def parse_config(text: str, base_dir=None) -> ExperimentConfig:
    """Parse INI text into an :class:`ExperimentConfig`.

    Relative paths are resolved against ``base_dir`` when given.
    """
    from pathlib import Path

    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config: {exc}") from None

    def path(value):
        if value is None:
            return None
        p = Path(value)
        if base_dir is not None and not p.is_absolute():
            p = Path(base_dir) / p
        return str(p)

    weak_params: dict[str, dict] = {}
    for section in parser.sections():
        if section.startswith("weak."):
            kind = canonical_kind(section[5:])
            allowed = set(DEFAULTS[kind])
            for key, raw in parser.items(section):
                if key not in allowed:
                    raise ConfigurationError(f"unknown key {key!r} in [{section}]")
                weak_params.setdefault(kind, {})[key] = _weak_value(kind, key, raw)
            continue
        if section not in _SCHEMA:
            raise ConfigurationError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ConfigurationError(f"unknown key {key!r} in [{section}]")

    def get(section, key, default=None):
        if parser.has_section(section) and parser.has_option(section, key):
            return parser.get(section, key).strip()
        return default

    source = get("corpus", "source", "synthetic")
    custom = None
    if get("corpus", "counts") is not None:
        counts = [_int("corpus", "counts", v) for v in parse_list(get("corpus", "counts"))]
        card = [_float("corpus", "cardinality", v) for v in parse_list(get("corpus", "cardinality", "1.0"))]
        custom = ImbalanceProfile(
            tuple(counts),
            tuple(card),
            tokens_per_label=_int("corpus", "tokens_per_label", get("corpus", "tokens_per_label", "12")),
            noise_token_rate=_float("corpus", "noise_rate", get("corpus", "noise_rate", "0.3")),
        )
    instances = get("corpus", "instances")
    corpus_seed = get("corpus", "seed")
    corpus = CorpusSource(
        path=None if source == "synthetic" else path(source),
        profile=get("corpus", "profile", "desk"),
        instances=None if instances is None else _int("corpus", "instances", instances),
        seed=None if corpus_seed is None else _int("corpus", "seed", corpus_seed),
        custom_profile=custom,
    )

    lowercase = get("pipeline", "lowercase", "true").lower()
    if lowercase not in ("true", "false", "yes", "no", "1", "0"):
        raise ConfigurationError(f"[pipeline] lowercase must be a boolean, got {lowercase!r}")
    pipeline = PipelineConfig(
        stopword_path=path(get("pipeline", "stopwords")),
        normalization_lexicon_path=path(get("pipeline", "normalization")),
        stemmer=get("pipeline", "stemmer", "identity"),
        stem_lexicon_path=path(get("pipeline", "stem_lexicon")),
        feature_count=_int("pipeline", "features", get("pipeline", "features", "753")),
        lowercase=lowercase in ("true", "yes", "1"),
    )

    train_count = get("split", "train_count")
    split_seed = get("split", "seed")
    return ExperimentConfig(
        corpus=corpus,
        pipeline=pipeline,
        train_count=None if train_count is None else _int("split", "train_count", train_count),
        split_seed=None if split_seed is None else _int("split", "seed", split_seed),
        algorithms=tuple(parse_list(get("experiment", "algorithms", ",".join(ALGORITHMS)))),
        weak_kinds=tuple(parse_list(get("experiment", "weak", "tree"))),
        iterations=_int("experiment", "iterations", get("experiment", "iterations", "20")),
        master_seed=_int("experiment", "master_seed", get("experiment", "master_seed", "0")),
        weak_params=weak_params,
    )


def load_config(path) -> ExperimentConfig:
    from pathlib import Path

    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, base_dir=p.parent)
