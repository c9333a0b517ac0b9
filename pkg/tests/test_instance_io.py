import json

import pytest

from rosterer import instance_io
from rosterer.scenarios import cardiology, internal_medicine, orthopedics, random_tiny_instance


@pytest.mark.parametrize(
    "factory",
    [
        lambda: internal_medicine(seed=1, num_physicians=8),
        lambda: cardiology(seed=1),
        lambda: orthopedics(seed=1, num_physicians=9),
    ],
)
def test_scenario_roundtrip_is_field_identical(factory):
    inst = factory()
    text = instance_io.encode_instance(inst)
    again = instance_io.decode_instance(text)
    assert again == inst
    # Encoding is deterministic byte-for-byte.
    assert instance_io.encode_instance(again) == text


@pytest.mark.parametrize("seed", [0, 7, 123, 999, 4242])
def test_random_tiny_roundtrip(seed):
    inst = random_tiny_instance(seed)
    assert instance_io.decode_instance(instance_io.encode_instance(inst)) == inst


def test_decode_rejects_wrong_kind():
    with pytest.raises(instance_io.DocumentError, match="not a roster-instance"):
        instance_io.instance_from_dict({"kind": "something", "schema_version": 1})


def test_decode_rejects_wrong_schema_version():
    doc = instance_io.instance_to_dict(cardiology(seed=0))
    doc["schema_version"] = 99
    with pytest.raises(instance_io.DocumentError, match="schema version"):
        instance_io.instance_from_dict(doc)


def test_decode_rejects_bad_json_and_unknown_weights():
    with pytest.raises(instance_io.DocumentError, match="invalid JSON"):
        instance_io.decode_instance("{nope")
    doc = instance_io.instance_to_dict(cardiology(seed=0))
    doc["weights"]["mystery_knob"] = 1.0
    with pytest.raises(instance_io.DocumentError, match="mystery_knob"):
        instance_io.instance_from_dict(doc)


def test_document_has_schema_version_field():
    doc = json.loads(instance_io.encode_instance(cardiology(seed=0)))
    assert doc["schema_version"] == 1
    assert doc["kind"] == "roster-instance"
