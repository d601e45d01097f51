"""Versioned JSON model files.

Layout::

    {"format_version": 1,
     "checksum": "<sha256 of the canonical payload>",
     "payload": {"labels": [...], "model": {...}, "pipeline": {...} | null}}

The checksum covers ``payload`` serialized with sorted keys and compact
separators.  Floats go through ``repr`` so every value survives the round
trip bit for bit.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from ..corpus import LabelSpace
from ..errors import IncompatibleModelError, ModelIntegrityError
from ..multilabel import model_from_dict
from ..preprocess import TextPipeline

FORMAT_VERSION = 1


def _canonical(payload) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=True).encode("utf-8")


def checksum(payload) -> str:
    return hashlib.sha256(_canonical(payload)).hexdigest()


@dataclass(frozen=True)
class SavedModel:
    """A loaded model together with the pipeline that feeds it."""

    model: object
    space: LabelSpace
    pipeline: TextPipeline | None

    def predict_texts(self, texts):
        if self.pipeline is None:
            raise ModelIntegrityError("this model file carries no text pipeline")
        return self.model.predict(self.pipeline.transform_texts(texts))


def model_document(model, pipeline: TextPipeline | None = None) -> dict:
    payload = {
        "labels": list(model.space.names),
        "model": model.to_dict(),
        "pipeline": None if pipeline is None else pipeline.to_dict(),
    }
    return {"format_version": FORMAT_VERSION, "checksum": checksum(payload), "payload": payload}


def save_model(model, path, pipeline: TextPipeline | None = None) -> None:
    doc = model_document(model, pipeline)
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n", encoding="utf-8")


def read_model_document(text: str) -> SavedModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelIntegrityError(f"model file is truncated or not JSON ({exc.msg} at char {exc.pos})") from None
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise ModelIntegrityError("model file has no format_version")
    version = doc["format_version"]
    if version != FORMAT_VERSION:
        raise IncompatibleModelError(
            f"model file format_version {version!r} is not supported (expected {FORMAT_VERSION})"
        )
    payload = doc.get("payload")
    if payload is None or doc.get("checksum") != checksum(payload):
        raise ModelIntegrityError("model file checksum mismatch")
    try:
        space = LabelSpace(tuple(payload["labels"]))
        model = model_from_dict(payload["model"], space)
        pipeline = None if payload["pipeline"] is None else TextPipeline.from_dict(payload["pipeline"])
    except (KeyError, TypeError, IndexError) as exc:
        raise ModelIntegrityError(f"model payload is malformed: {exc!r}") from None
    return SavedModel(model, space, pipeline)


def load_bundle(path) -> SavedModel:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelIntegrityError(f"cannot read model file {path}: {exc}") from None
    return read_model_document(text)


def load_model(path):
    """The model object alone; use :func:`load_bundle` for the pipeline too."""
    return load_bundle(path).model
