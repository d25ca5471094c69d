"""
JSON model documents.

A document is the serialised form of any voting model. Keys:
``kind, name, rate, arity | offspring, alpha | zeta | symmetric_coeffs, f,
labels, version``. Floats are written in shortest round-trip form, so
dump -> load -> dump is bit-stable.
"""

import json
from pathlib import Path
from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field
from pydantic import ValidationError as PydanticValidationError

from bbm_voting import settings
from bbm_voting.errors import ConfigError
from bbm_voting.models import (
    CompositeLabelModel,
    LabelRule,
    OffspringDistribution,
    RandomOutcomeModel,
    RandomThresholdModel,
    RecursiveModel,
    VotingModel,
    compile_recursive,
)
from bbm_voting.poly import Polynomial


class LabelDocument(BaseModel):
    model_config = ConfigDict(extra='forbid')

    name: str
    probability: float = Field(ge=0.0, le=1.0)
    alpha: List[float]


class ModelDocument(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['outcome', 'threshold', 'recursive', 'composite']
    name: str = ''
    rate: Optional[float] = None
    arity: Optional[int] = Field(default=None, ge=1)
    offspring: Optional[Dict[int, float]] = None
    alpha: Optional[Dict[int, List[float]]] = None
    zeta: Optional[List[float]] = None
    symmetric_coeffs: Optional[List[float]] = None
    f: Optional[List[float]] = None
    labels: Optional[List[LabelDocument]] = None
    version: str = settings.VERSION


def to_document(model: VotingModel) -> ModelDocument:
    if isinstance(model, RandomOutcomeModel):
        return ModelDocument(
            kind='outcome',
            name=model.name,
            rate=model.rate,
            offspring=dict(model.offspring.probs),
            alpha={n: list(row) for n, row in sorted(model.alpha.items())},
        )
    if isinstance(model, RandomThresholdModel):
        return ModelDocument(kind='threshold', name=model.name, rate=model.rate,
                             arity=model.arity, zeta=list(model.zeta))
    if isinstance(model, RecursiveModel):
        return ModelDocument(kind='recursive', name=model.name, rate=model.rate, arity=model.arity,
                             symmetric_coeffs=list(model.symmetric_coeffs), f=list(model.f.coeffs))
    return ModelDocument(
        kind='composite',
        name=model.name,
        rate=model.rate,
        arity=model.arity,
        labels=[LabelDocument(name=r.name, probability=r.probability, alpha=list(r.alpha))
                for r in model.labels],
    )


def _require(doc: ModelDocument, *names: str) -> None:
    missing = [n for n in names if getattr(doc, n) is None]
    if missing:
        raise ConfigError(f"{doc.kind} document needs {', '.join(missing)}", location=missing[0])


def from_document(doc: ModelDocument) -> VotingModel:
    """Rebuild the model a document describes (no probability validation)."""
    if doc.kind == 'outcome':
        _require(doc, 'rate', 'offspring', 'alpha')
        return RandomOutcomeModel(doc.rate, OffspringDistribution(doc.offspring),
                                  {n: tuple(row) for n, row in doc.alpha.items()}, doc.name or 'outcome')
    if doc.kind == 'threshold':
        _require(doc, 'rate', 'arity', 'zeta')
        return RandomThresholdModel(doc.rate, doc.arity, tuple(doc.zeta), doc.name or 'threshold')
    if doc.kind == 'recursive':
        _require(doc, 'arity', 'f')
        f = Polynomial(tuple(doc.f))
        if doc.symmetric_coeffs is None:
            coeffs = compile_recursive(f, doc.arity).symmetric_coeffs
        else:
            coeffs = tuple(doc.symmetric_coeffs)
        return RecursiveModel(doc.arity, f, coeffs, doc.name or 'recursive')
    _require(doc, 'rate', 'arity', 'labels')
    labels = tuple(LabelRule(l.name, l.probability, tuple(l.alpha)) for l in doc.labels)
    return CompositeLabelModel(doc.rate, doc.arity, labels, doc.name or 'composite')


def dump_model(model: VotingModel) -> str:
    return to_document(model).model_dump_json(indent=2, exclude_none=True) + '\n'


def parse_model(text: str, source: str = '<model>') -> VotingModel:
    """Parse a JSON model document, reporting line/column or field locations on failure."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(e.msg, location=f"{source}:{e.lineno}:{e.colno}") from e
    try:
        doc = ModelDocument.model_validate(raw)
    except PydanticValidationError as e:
        first = e.errors()[0]
        field = '.'.join(str(part) for part in first['loc'])
        raise ConfigError(first['msg'], location=f"{source}:{field}") from e
    try:
        return from_document(doc)
    except ConfigError as e:
        raise ConfigError(e.message, location=f"{source}:{e.location}") from e


def load_model(path: Union[str, Path]) -> VotingModel:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read model document: {e.strerror}", location=str(path)) from e
    return parse_model(text, str(path))


def save_model(model: VotingModel, path: Union[str, Path]) -> None:
    Path(path).write_text(dump_model(model))
