import time

import pytest
from fastapi.testclient import TestClient

from conftest import make_instance, make_period, night_template
from rosterer import instance_io
from rosterer import model as m
from rosterer.service import create_app
from rosterer.store import Store


@pytest.fixture
def client(tmp_path):
    app = create_app(Store(str(tmp_path / "svc.db")))
    with TestClient(app) as c:
        yield c


def login(client, role, physician_id=None):
    resp = client.post("/api/auth/login", json={"role": role, "physician_id": physician_id})
    assert resp.status_code == 200, resp.text
    token = resp.json()["token"]
    return {"Authorization": f"Bearer {token}"}


def cap_instance():
    """Twelve optional duties in one month; caps ten undesired, three impossible."""
    inst = make_instance(
        period=make_period(start="2026-03-02", days=12),
        duty_templates=[night_template(mandatory=False)],
        preference_policy=m.PreferencePolicy(
            {m.PreferenceLevel.UNDESIRED: 10, m.PreferenceLevel.IMPOSSIBLE: 3}
        ),
    )
    return inst.replace(id="cap-demo")


def solve_instance():
    inst = make_instance(
        period=make_period(start="2026-03-02", days=3),
        duty_templates=[night_template()],
        rest_rules=(m.RestRule("N", "N", 24.0),),
        physicians=3,
    )
    return inst.replace(id="solve-demo")


def create(client, headers, inst):
    doc = instance_io.instance_to_dict(inst)
    resp = client.post("/api/instances", json=doc, headers=headers)
    assert resp.status_code == 201, resp.text
    return resp.json()


def wait_for_job(client, headers, job_id, timeout=30.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        job = client.get(f"/api/jobs/{job_id}", headers=headers).json()
        if job["state"] in ("done", "failed"):
            return job
        time.sleep(0.05)
    raise AssertionError("job did not finish in time")


def test_login_requires_known_role(client):
    assert client.post("/api/auth/login", json={"role": "root"}).status_code == 400
    assert client.post("/api/auth/login", json={"role": "physician"}).status_code == 400


def test_endpoints_require_authentication(client):
    assert client.get("/api/instances").status_code == 401
    bad = {"Authorization": "Bearer nope"}
    assert client.get("/api/instances", headers=bad).status_code == 401


def test_physician_cannot_configure(client):
    phys = login(client, "physician", "p0")
    doc = instance_io.instance_to_dict(cap_instance())
    assert client.post("/api/instances", json=doc, headers=phys).status_code == 403


def test_eleventh_undesired_preference_is_rejected_naming_the_cap(client):
    planner = login(client, "planner")
    create(client, planner, cap_instance())
    phys = login(client, "physician", "p0")
    inst = cap_instance()
    duty_ids = [d.id for d in inst.duty_instances]

    ten = [{"level": "undesired", "duty_instance_id": d} for d in duty_ids[:10]]
    resp = client.post("/api/instances/cap-demo/preferences", json={"entries": ten}, headers=phys)
    assert resp.status_code == 200, resp.text
    remaining = resp.json()["remaining_caps"]["undesired"]["remaining_by_month"]
    assert remaining == {"2026-03": 0}

    eleven = [{"level": "undesired", "duty_instance_id": d} for d in duty_ids[:11]]
    resp = client.post("/api/instances/cap-demo/preferences", json={"entries": eleven}, headers=phys)
    assert resp.status_code == 400
    assert "cap is 10" in resp.json()["detail"]


def test_fourth_impossible_preference_is_rejected(client):
    planner = login(client, "planner")
    create(client, planner, cap_instance())
    phys = login(client, "physician", "p1")
    duty_ids = [d.id for d in cap_instance().duty_instances]
    four = [{"level": "impossible", "duty_instance_id": d} for d in duty_ids[:4]]
    resp = client.post("/api/instances/cap-demo/preferences", json={"entries": four}, headers=phys)
    assert resp.status_code == 400
    assert "cap is 3" in resp.json()["detail"]
    three = four[:3]
    assert (
        client.post("/api/instances/cap-demo/preferences", json={"entries": three}, headers=phys).status_code
        == 200
    )


def test_weekend_preference_toggle_persists(client):
    planner = login(client, "planner")
    create(client, planner, cap_instance())
    phys = login(client, "physician", "p0")
    resp = client.post(
        "/api/instances/cap-demo/preferences",
        json={"entries": [], "weekend_preference": "one-duty"},
        headers=phys,
    )
    assert resp.status_code == 200, resp.text
    stored = client.get("/api/instances/cap-demo/preferences/p0", headers=phys).json()
    assert stored["weekend_preference"] == "one-duty"
    doc = client.get("/api/instances/cap-demo", headers=planner).json()["instance"]
    entry = next(p for p in doc["physicians"] if p["id"] == "p0")
    assert entry["weekend_preference"] == "one-duty"

    bad = client.post(
        "/api/instances/cap-demo/preferences",
        json={"entries": [], "weekend_preference": "whenever"},
        headers=phys,
    )
    assert bad.status_code == 400


def test_physicians_may_only_edit_their_own_preferences(client):
    planner = login(client, "planner")
    create(client, planner, cap_instance())
    phys = login(client, "physician", "p0")
    resp = client.post(
        "/api/instances/cap-demo/preferences",
        json={"physician_id": "p1", "entries": []},
        headers=phys,
    )
    assert resp.status_code == 403


def test_solve_job_lifecycle_and_roster_flow(client):
    planner = login(client, "planner")
    create(client, planner, solve_instance())

    resp = client.post(
        "/api/instances/solve-demo/solve",
        json={"backend": "oracle", "gap": 0.0},
        headers=planner,
    )
    assert resp.status_code == 202
    job = wait_for_job(client, planner, resp.json()["job_id"])
    assert job["state"] == "done", job
    assert job["hard_violations"] == 0
    version = job["roster_version"]

    # Planner sees the draft; a physician does not until publication.
    phys = login(client, "physician", "p0")
    assert client.get("/api/instances/solve-demo/roster", headers=planner).status_code == 200
    assert client.get("/api/instances/solve-demo/roster", headers=phys).status_code == 404

    resp = client.post(f"/api/instances/solve-demo/roster/{version}/publish", headers=planner)
    assert resp.status_code == 200
    roster = client.get("/api/instances/solve-demo/roster", headers=phys).json()
    assert roster["status"] == "published"
    assert len(roster["roster"]["duty_assignments"]) == 3


def test_adjust_reports_findings_and_gates_publication(client):
    planner = login(client, "planner")
    create(client, planner, solve_instance())
    job = wait_for_job(
        client,
        planner,
        client.post("/api/instances/solve-demo/solve", json={"backend": "oracle"}, headers=planner).json()["job_id"],
    )
    version = job["roster_version"]
    record = client.get("/api/instances/solve-demo/roster", headers=planner).json()
    duties = record["roster"]["duty_assignments"]
    # Hand day-1 and day-2 nights to the same physician: 12h < 24h rest.
    holder = duties["N@2026-03-02"]
    resp = client.post(
        f"/api/instances/solve-demo/roster/{version}/adjust",
        json={"duties": {"N@2026-03-03": holder}},
        headers=planner,
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["publishable"] is False
    assert any(f["family"] == "14-rest-hard" for f in body["hard_findings"])

    bad_version = body["version"]
    resp = client.post(f"/api/instances/solve-demo/roster/{bad_version}/publish", headers=planner)
    assert resp.status_code == 409
    assert resp.json()["detail"]["findings"]

    # Reverting the cell produces a clean draft that can be published.
    resp = client.post(
        f"/api/instances/solve-demo/roster/{bad_version}/adjust",
        json={"duties": {"N@2026-03-03": duties["N@2026-03-03"]}},
        headers=planner,
    )
    clean_version = resp.json()["version"]
    assert resp.json()["publishable"] is True
    assert client.post(
        f"/api/instances/solve-demo/roster/{clean_version}/publish", headers=planner
    ).status_code == 200


def test_calendar_export_spans_midnight(client):
    planner = login(client, "planner")
    create(client, planner, solve_instance())
    job = wait_for_job(
        client,
        planner,
        client.post("/api/instances/solve-demo/solve", json={"backend": "oracle"}, headers=planner).json()["job_id"],
    )
    client.post(f"/api/instances/solve-demo/roster/{job['roster_version']}/publish", headers=planner)
    record = client.get("/api/instances/solve-demo/roster", headers=planner).json()
    duty_id, pid = sorted(record["roster"]["duty_assignments"].items())[0]

    phys = login(client, "physician", pid)
    resp = client.get(f"/api/instances/solve-demo/calendar/{pid}.ics", headers=phys)
    assert resp.status_code == 200
    body = resp.text
    assert "BEGIN:VCALENDAR" in body
    date = duty_id.split("@")[1].replace("-", "")
    assert f"DTSTART:{date}T200000" in body
    # The night rolls into the next morning.
    assert "T080000" in body

    other = login(client, "physician", "p-intruder")
    assert client.get(f"/api/instances/solve-demo/calendar/{pid}.ics", headers=other).status_code == 403


def test_snapshot_isolation_for_jobs(client):
    planner = login(client, "planner")
    created = create(client, planner, solve_instance())
    job_id = client.post(
        "/api/instances/solve-demo/solve", json={"backend": "oracle"}, headers=planner
    ).json()["job_id"]

    # Concurrent edit: wipe the physicians. The running job keeps its snapshot.
    resp = client.get("/api/instances/solve-demo", headers=planner).json()
    doc = resp["instance"]
    doc["physicians"] = doc["physicians"][:1]
    put = client.put(
        "/api/instances/solve-demo",
        json={"version": resp["version"], "instance": doc},
        headers=planner,
    )
    assert put.status_code == 200

    job = wait_for_job(client, planner, job_id)
    assert job["state"] == "done"
    assert job["instance_version"] == created["version"]
    record = client.get("/api/instances/solve-demo/roster", headers=planner).json()
    assert len(record["roster"]["duty_assignments"]) == 3  # solved on the snapshot


def test_build_infeasibility_fails_the_job_with_stage(client):
    planner = login(client, "planner")
    inst = solve_instance().replace(id="clash-demo")
    # Pre-assign two clashing nights to the same physician; instance-level
    # validation cannot see the rest clash, the model builder does.
    duties = list(inst.duty_instances)
    duties[0] = m.DutyInstance(duties[0].id, duties[0].template_id, duties[0].date,
                               duties[0].start_abs, duties[0].end_abs, "p0")
    duties[1] = m.DutyInstance(duties[1].id, duties[1].template_id, duties[1].date,
                               duties[1].start_abs, duties[1].end_abs, "p0")
    inst = inst.replace(duty_instances=tuple(duties))
    create(client, planner, inst)
    job_id = client.post("/api/instances/clash-demo/solve", json={"backend": "oracle"}, headers=planner).json()["job_id"]
    job = wait_for_job(client, planner, job_id)
    assert job["state"] == "failed"
    assert job["stage"] == "build"
    assert "rest" in job["error"]


def test_version_conflict_on_concurrent_instance_edit(client):
    planner = login(client, "planner")
    created = create(client, planner, cap_instance())
    resp = client.get("/api/instances/cap-demo", headers=planner).json()
    stale = {"version": created["version"], "instance": resp["instance"]}
    assert client.put("/api/instances/cap-demo", json=stale, headers=planner).status_code == 200
    # Replaying the same expected version must now conflict.
    assert client.put("/api/instances/cap-demo", json=stale, headers=planner).status_code == 409


def test_section_edit_roundtrip(client):
    planner = login(client, "planner")
    created = create(client, planner, cap_instance())
    body = {
        "version": created["version"],
        "item": {"id": "extra", "name": "Dr. Extra", "employment_rate": 0.8},
    }
    resp = client.put("/api/instances/cap-demo/physicians/extra", json=body, headers=planner)
    assert resp.status_code == 200, resp.text
    doc = client.get("/api/instances/cap-demo", headers=planner).json()["instance"]
    assert any(p["id"] == "extra" for p in doc["physicians"])
    resp = client.delete(
        "/api/instances/cap-demo/physicians/extra",
        params={"version": resp.json()["version"]},
        headers=planner,
    )
    assert resp.status_code == 200
