import json

import pytest

from bbm_voting.catalog import evs, heat
from bbm_voting.documents import dump_model, load_model, parse_model, save_model
from bbm_voting.errors import ConfigError
from bbm_voting.models import (
    CompositeLabelModel,
    RandomOutcomeModel,
    RandomThresholdModel,
    RecursiveModel,
    compile_recursive,
    compile_threshold,
    forward_nonlinearity,
)


def test_outcome_document_round_trip(efp):
    text = dump_model(efp)
    model = parse_model(text)
    assert isinstance(model, RandomOutcomeModel)
    assert model.alpha == efp.alpha
    assert model.rate == efp.rate
    assert dump_model(model) == text


def test_mixed_offspring_round_trip():
    model = heat({2: 0.25, 3: 0.75}, rate=1.5)
    rebuilt = parse_model(dump_model(model))
    assert dict(rebuilt.offspring.probs) == {2: 0.25, 3: 0.75}
    assert rebuilt.alpha[3] == model.alpha[3]


def test_threshold_document_round_trip(fkpp):
    model = compile_threshold(fkpp)
    rebuilt = parse_model(dump_model(model))
    assert isinstance(rebuilt, RandomThresholdModel)
    assert rebuilt.zeta == model.zeta
    assert rebuilt.arity == 2


def test_recursive_document_round_trip(fkpp):
    rebuilt = parse_model(dump_model(compile_recursive(fkpp)))
    assert isinstance(rebuilt, RecursiveModel)
    assert rebuilt.f.allclose(fkpp)
    assert rebuilt.symmetric_coeffs == pytest.approx((0.0, 0.5, -1.0))


def test_recursive_document_without_coefficients():
    model = parse_model(json.dumps({'kind': 'recursive', 'arity': 2, 'f': [0, 1, -1]}))
    assert model.symmetric_coeffs == pytest.approx((0.0, 0.5, -1.0))


def test_composite_document_round_trip():
    model = evs(2, 1.0, 1.0)
    rebuilt = parse_model(dump_model(model))
    assert isinstance(rebuilt, CompositeLabelModel)
    assert [rule.name for rule in rebuilt.labels] == ['I', 'G']
    assert forward_nonlinearity(rebuilt).allclose(forward_nonlinearity(model))


def test_document_is_plain_json(efp):
    payload = json.loads(dump_model(efp))
    assert payload['kind'] == 'outcome'
    assert payload['alpha'] == {'3': [0.0, 0.0, 1.0, 1.0]}
    assert 'zeta' not in payload


def test_save_and_load(tmp_path, efp):
    path = tmp_path / 'efp.json'
    save_model(efp, path)
    assert load_model(path).alpha == efp.alpha


def test_syntax_error_location():
    with pytest.raises(ConfigError) as info:
        parse_model('{"kind": "outcome",\n "rate": }', source='m.json')
    assert info.value.location.startswith('m.json:2:')


def test_missing_fields_are_named():
    with pytest.raises(ConfigError) as info:
        parse_model(json.dumps({'kind': 'outcome', 'rate': 1.0}), source='m.json')
    assert info.value.location == 'm.json:offspring'


def test_unknown_kind_rejected():
    with pytest.raises(ConfigError) as info:
        parse_model(json.dumps({'kind': 'oracle'}), source='m.json')
    assert info.value.location == 'm.json:kind'


def test_unreadable_file(tmp_path):
    with pytest.raises(ConfigError):
        load_model(tmp_path / 'missing.json')
