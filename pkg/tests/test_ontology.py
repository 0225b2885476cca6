import time

import pytest

from onto_tamp.errors import AmbiguityError, ParseError, SchemaError
from onto_tamp.ontology import (
    UNKNOWN,
    classify_label,
    load_kb,
    load_kb_file,
    query_action_priority,
    query_object_type,
    serialize_kb,
)

EX = "http://www.example.org/kitchen_ontology#"
RDF_TYPE = "<http://www.w3.org/1999/02/22-rdf-syntax-ns#type>"
LABEL = "<http://www.w3.org/2000/01/rdf-schema#label>"


def _rule(name, action, object_type, priority, description="because"):
    subject = f"<{EX}{name}>"
    return "\n".join([
        f"{subject} {RDF_TYPE} <{EX}ActionPriority> .",
        f'{subject} <{EX}hasAction> "{action}" .',
        f'{subject} <{EX}hasObjectType> "{object_type}" .',
        f'{subject} <{EX}hasPriority> "{priority}"^^int .',
        f'{subject} <{EX}hasDescription> "{description}" .',
    ])


def test_put_rules_rank_crockery_before_food(kb):
    assert query_action_priority(kb, 'put', 'Crockery') == (1, "crockery has priority over food items")
    priority, description = query_action_priority(kb, 'put', 'FoodItem')
    assert priority == 2
    assert description


def test_rule_lookup_is_fast(kb):
    started = time.perf_counter()
    for _ in range(100):
        query_action_priority(kb, 'put', 'Crockery')
    assert (time.perf_counter() - started) / 100 < 0.001


def test_missing_rule_returns_none(kb):
    assert query_action_priority(kb, 'put', 'Surface') is None


def test_object_types(kb):
    assert query_object_type(kb, 'bowl') == ['Crockery']
    assert query_object_type(kb, 'Banana') == ['FoodItem']
    assert query_object_type(kb, 'spaceship') == []
    assert classify_label(kb, 'spaceship') == UNKNOWN
    assert classify_label(kb, 'spaceship', 'Container') == 'Container'


def test_class_labels_are_readable(kb):
    assert kb.class_label('FoodItem') == 'food items'
    assert kb.class_for_label('boxed food items') == 'BoxedFood'
    assert kb.class_for_label('nothing like this') is None


def test_malformed_line_reports_line_number():
    document = f"# comment\n<{EX}a> {RDF_TYPE} <{EX}Crockery> .\n<{EX}b> broken\n"
    with pytest.raises(ParseError) as excinfo:
        load_kb(document)
    assert excinfo.value.line == 3
    assert str(excinfo.value).startswith("line 3:")


def test_duplicate_label_is_a_schema_error():
    document = "\n".join([
        f"<{EX}a> {RDF_TYPE} <{EX}Crockery> .",
        f'<{EX}a> {LABEL} "bowl" .',
        f"<{EX}b> {RDF_TYPE} <{EX}FoodItem> .",
        f'<{EX}b> {LABEL} "bowl" .',
    ])
    with pytest.raises(SchemaError):
        load_kb(document)


def test_incomplete_rule_is_a_schema_error():
    subject = f"<{EX}rule_x>"
    document = f"{subject} {RDF_TYPE} <{EX}ActionPriority> .\n{subject} <{EX}hasAction> \"put\" ."
    with pytest.raises(SchemaError, match="lacks"):
        load_kb(document)


def test_non_positive_priority_is_a_schema_error():
    with pytest.raises(SchemaError):
        load_kb(_rule('rule_bad', 'put', 'Crockery', 0))


def test_duplicate_rules_load_but_lookup_is_ambiguous():
    kb = load_kb(_rule('rule_one', 'put', 'Crockery', 1) + "\n" + _rule('rule_two', 'put', 'Crockery', 2))
    assert len(kb.rules) == 2
    with pytest.raises(AmbiguityError, match="rule_one"):
        query_action_priority(kb, 'put', 'Crockery')


def test_serialize_then_load_keeps_every_triple(kb):
    again = load_kb(serialize_kb(kb))
    assert again.triples == kb.triples
    assert again.rule_index == kb.rule_index


def test_missing_file_is_a_parse_error(tmp_path):
    with pytest.raises(ParseError, match="cannot read"):
        load_kb_file(tmp_path / "missing.nt")
