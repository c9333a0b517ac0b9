import threading

import pytest

from rosterer import model as m
from rosterer.errors import PublishRejectedError, VersionConflictError
from rosterer.scenarios import random_tiny_instance
from rosterer.store import Store


@pytest.fixture
def store(tmp_path):
    s = Store(str(tmp_path / "dept.db"))
    yield s
    s.close()


@pytest.fixture
def inst():
    return random_tiny_instance(5)


def test_instance_roundtrip(store, inst):
    version = store.save_instance(inst)
    assert version == 1
    loaded, loaded_version = store.load_instance(inst.id)
    assert loaded == inst and loaded_version == 1


def test_version_conflict_on_stale_write(store, inst):
    store.save_instance(inst)
    store.save_instance(inst, expected_version=1)
    with pytest.raises(VersionConflictError):
        store.save_instance(inst, expected_version=1)
    with pytest.raises(VersionConflictError):
        store.save_instance(inst)  # create over an existing id


def test_preference_submission_conflict(store, inst):
    store.save_instance(inst)
    pid = inst.physicians[0].id
    records = [m.PreferenceRecord(pid, m.PreferenceLevel.DESIRED, duty_instance_id=inst.duty_instances[0].id)]
    v1 = store.save_preferences(inst.id, pid, records)
    assert v1 == 1
    # Two concurrent submissions based on the same version: second loses.
    store.save_preferences(inst.id, pid, records, expected_version=1)
    with pytest.raises(VersionConflictError):
        store.save_preferences(inst.id, pid, records, expected_version=1)


def test_effective_instance_merges_submissions(store, inst):
    store.save_instance(inst)
    pid = inst.physicians[0].id
    records = [m.PreferenceRecord(pid, m.PreferenceLevel.DESIRED, duty_instance_id=inst.duty_instances[0].id)]
    store.save_preferences(inst.id, pid, records)
    merged, _ = store.effective_instance(inst.id)
    mine = [p for p in merged.preferences if p.physician_id == pid]
    assert mine == records
    others = {p.physician_id for p in merged.preferences} - {pid}
    original_others = {p.physician_id for p in inst.preferences} - {pid}
    assert others == original_others


def test_roster_versions_are_append_only(store, inst):
    store.save_instance(inst)
    v1 = store.add_roster_version(inst.id, {"duty_assignments": {}}, None, [], author="solver")
    v2 = store.add_roster_version(inst.id, {"duty_assignments": {}}, None, [], author="manual")
    assert (v1, v2) == (1, 2)
    assert [r["version"] for r in store.list_roster_versions(inst.id)] == [1, 2]
    record = store.get_roster_version(inst.id)  # latest
    assert record["version"] == 2 and record["status"] == "draft"


def test_publish_gate_rejects_hard_violations(store, inst):
    store.save_instance(inst)
    findings = [{"family": "14-rest-hard", "severity": "hard", "message": "clash"}]
    version = store.add_roster_version(inst.id, {"duty_assignments": {}}, None, findings, author="manual")
    with pytest.raises(PublishRejectedError):
        store.publish_roster(inst.id, version, author="planner")
    assert store.published_version(inst.id) is None


def test_publish_moves_the_pointer(store, inst):
    store.save_instance(inst)
    v1 = store.add_roster_version(inst.id, {"v": 1}, None, [], author="solver")
    v2 = store.add_roster_version(inst.id, {"v": 2}, None, [], author="solver")
    store.publish_roster(inst.id, v1, author="planner")
    assert store.published_version(inst.id) == v1
    store.publish_roster(inst.id, v2, author="planner")
    assert store.published_version(inst.id) == v2
    # Earlier versions remain readable: nothing is deleted.
    assert store.get_roster_version(inst.id, v1)["roster"] == {"v": 1}
    # Exactly one version reads as published at a time.
    statuses = {r["version"]: r["status"] for r in store.list_roster_versions(inst.id)}
    assert statuses == {v1: "draft", v2: "published"}
    assert store.get_roster_version(inst.id, v1)["status"] == "draft"


def test_job_state_transitions_are_monotone(store, inst):
    store.save_instance(inst)
    job_id = store.create_job(inst.id, {"gap": 0.0})
    store.update_job(job_id, "running")
    store.update_job(job_id, "done", {"roster_version": 1})
    with pytest.raises(VersionConflictError):
        store.update_job(job_id, "running")
    job = store.get_job(job_id)
    assert job["state"] == "done" and job["roster_version"] == 1


def test_tokens_roundtrip(store):
    token = store.create_token("physician", "p1")
    assert store.resolve_token(token) == {"role": "physician", "physician_id": "p1"}
    assert store.resolve_token("bogus") is None


def test_concurrent_writes_serialize(store, inst):
    store.save_instance(inst)
    errors = []

    def writer(k):
        try:
            for _ in range(20):
                store.add_roster_version(inst.id, {"writer": k}, None, [], author=f"w{k}")
        except Exception as exc:  # pragma: no cover
            errors.append(exc)

    threads = [threading.Thread(target=writer, args=(k,)) for k in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    versions = [r["version"] for r in store.list_roster_versions(inst.id)]
    assert versions == list(range(1, 81))
