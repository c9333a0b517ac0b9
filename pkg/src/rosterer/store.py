"""Durable storage: instances, preference submissions, jobs, rosters.

A single-file SQLite store with one writer lock per process.  Writes are
transactional, so a killed process never leaves a half-visible record.
Roster versions are append-only; publication is a pointer move, so the
history of every published version survives.
"""

from __future__ import annotations

import datetime as dt
import json
import sqlite3
import threading
import uuid

from . import instance_io
from . import model as m
from .errors import PublishRejectedError, VersionConflictError

_SCHEMA = """
CREATE TABLE IF NOT EXISTS instances (
    id TEXT PRIMARY KEY,
    version INTEGER NOT NULL,
    body TEXT NOT NULL,
    updated_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS preference_submissions (
    instance_id TEXT NOT NULL,
    physician_id TEXT NOT NULL,
    version INTEGER NOT NULL,
    body TEXT NOT NULL,
    updated_at TEXT NOT NULL,
    PRIMARY KEY (instance_id, physician_id)
);
CREATE TABLE IF NOT EXISTS jobs (
    id TEXT PRIMARY KEY,
    instance_id TEXT NOT NULL,
    state TEXT NOT NULL,
    body TEXT NOT NULL,
    created_at TEXT NOT NULL,
    updated_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS roster_versions (
    instance_id TEXT NOT NULL,
    version INTEGER NOT NULL,
    status TEXT NOT NULL,
    author TEXT NOT NULL,
    created_at TEXT NOT NULL,
    roster TEXT NOT NULL,
    report TEXT,
    findings TEXT,
    hard_count INTEGER NOT NULL,
    PRIMARY KEY (instance_id, version)
);
CREATE TABLE IF NOT EXISTS published_roster (
    instance_id TEXT PRIMARY KEY,
    version INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS tokens (
    token TEXT PRIMARY KEY,
    role TEXT NOT NULL,
    physician_id TEXT,
    created_at TEXT NOT NULL
);
"""


def _now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat()


class Store:
    """Single-writer, multi-reader department store."""

    def __init__(self, path: str = ":memory:"):
        self.path = path
        self._lock = threading.Lock()
        self._conn = sqlite3.connect(path, check_same_thread=False)
        self._conn.execute("PRAGMA journal_mode=WAL") if path != ":memory:" else None
        self._conn.execute("PRAGMA foreign_keys=ON")
        with self._lock, self._conn:
            self._conn.executescript(_SCHEMA)

    def close(self) -> None:
        self._conn.close()

    # -- instances ------------------------------------------------------

    def save_instance(self, inst: m.RosterInstance, expected_version: int | None = None) -> int:
        body = instance_io.encode_instance(inst)
        with self._lock, self._conn:
            row = self._conn.execute("SELECT version FROM instances WHERE id=?", (inst.id,)).fetchone()
            current = row[0] if row else None
            if expected_version is None and current is not None:
                raise VersionConflictError(f"instance {inst.id!r} already exists at version {current}")
            if expected_version is not None and current != expected_version:
                raise VersionConflictError(
                    f"instance {inst.id!r} is at version {current}, expected {expected_version}"
                )
            version = (current or 0) + 1
            self._conn.execute(
                "INSERT INTO instances (id, version, body, updated_at) VALUES (?,?,?,?) "
                "ON CONFLICT(id) DO UPDATE SET version=excluded.version, body=excluded.body, "
                "updated_at=excluded.updated_at",
                (inst.id, version, body, _now()),
            )
        return version

    def load_instance(self, instance_id: str) -> tuple[m.RosterInstance, int]:
        row = self._conn.execute(
            "SELECT body, version FROM instances WHERE id=?", (instance_id,)
        ).fetchone()
        if row is None:
            raise KeyError(f"unknown instance {instance_id!r}")
        return instance_io.decode_instance(row[0]), row[1]

    def list_instances(self) -> list[dict]:
        rows = self._conn.execute("SELECT id, version, body FROM instances ORDER BY id").fetchall()
        out = []
        for iid, version, body in rows:
            doc = json.loads(body)
            out.append({"id": iid, "version": version, "label": doc.get("label", "")})
        return out

    # -- preference submissions ------------------------------------------

    def save_preferences(
        self,
        instance_id: str,
        physician_id: str,
        records: list[m.PreferenceRecord],
        expected_version: int | None = None,
    ) -> int:
        body = json.dumps(
            [
                {
                    "physician_id": r.physician_id,
                    "level": r.level.value,
                    "duty_instance_id": r.duty_instance_id,
                    "weekly_set_id": r.weekly_set_id,
                    "week_index": r.week_index,
                }
                for r in records
            ]
        )
        with self._lock, self._conn:
            row = self._conn.execute(
                "SELECT version FROM preference_submissions WHERE instance_id=? AND physician_id=?",
                (instance_id, physician_id),
            ).fetchone()
            current = row[0] if row else None
            if expected_version is not None and current != expected_version:
                raise VersionConflictError(
                    f"preferences for {physician_id!r} are at version {current}, expected {expected_version}"
                )
            version = (current or 0) + 1
            self._conn.execute(
                "INSERT INTO preference_submissions (instance_id, physician_id, version, body, updated_at) "
                "VALUES (?,?,?,?,?) ON CONFLICT(instance_id, physician_id) DO UPDATE SET "
                "version=excluded.version, body=excluded.body, updated_at=excluded.updated_at",
                (instance_id, physician_id, version, body, _now()),
            )
        return version

    def load_preferences(self, instance_id: str) -> dict[str, tuple[list[m.PreferenceRecord], int]]:
        rows = self._conn.execute(
            "SELECT physician_id, version, body FROM preference_submissions WHERE instance_id=?",
            (instance_id,),
        ).fetchall()
        out: dict[str, tuple[list[m.PreferenceRecord], int]] = {}
        for pid, version, body in rows:
            records = [
                m.PreferenceRecord(
                    physician_id=e["physician_id"],
                    level=m.PreferenceLevel(e["level"]),
                    duty_instance_id=e.get("duty_instance_id"),
                    weekly_set_id=e.get("weekly_set_id"),
                    week_index=e.get("week_index"),
                )
                for e in json.loads(body)
            ]
            out[pid] = (records, version)
        return out

    def effective_instance(self, instance_id: str) -> tuple[m.RosterInstance, int]:
        """Stored instance with per-physician preference submissions merged in."""
        inst, version = self.load_instance(instance_id)
        submissions = self.load_preferences(instance_id)
        if submissions:
            kept = [p for p in inst.preferences if p.physician_id not in submissions]
            merged = kept + [r for records, _ in submissions.values() for r in records]
            merged.sort(key=lambda r: (r.physician_id, r.duty_instance_id or "", r.weekly_set_id or "", r.week_index or 0))
            inst = inst.replace(preferences=tuple(merged))
        return inst, version

    # -- jobs -------------------------------------------------------------

    def create_job(self, instance_id: str, body: dict) -> str:
        job_id = uuid.uuid4().hex
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO jobs (id, instance_id, state, body, created_at, updated_at) VALUES (?,?,?,?,?,?)",
                (job_id, instance_id, "queued", json.dumps(body), _now(), _now()),
            )
        return job_id

    def update_job(self, job_id: str, state: str, patch: dict | None = None) -> None:
        with self._lock, self._conn:
            row = self._conn.execute("SELECT state, body FROM jobs WHERE id=?", (job_id,)).fetchone()
            if row is None:
                raise KeyError(f"unknown job {job_id!r}")
            current_state, body = row
            order = {"queued": 0, "running": 1, "done": 2, "failed": 2}
            if order[state] < order[current_state]:
                raise VersionConflictError(f"job {job_id!r} cannot move from {current_state} to {state}")
            doc = json.loads(body)
            if patch:
                doc.update(patch)
            self._conn.execute(
                "UPDATE jobs SET state=?, body=?, updated_at=? WHERE id=?",
                (state, json.dumps(doc), _now(), job_id),
            )

    def get_job(self, job_id: str) -> dict:
        row = self._conn.execute(
            "SELECT instance_id, state, body, created_at, updated_at FROM jobs WHERE id=?", (job_id,)
        ).fetchone()
        if row is None:
            raise KeyError(f"unknown job {job_id!r}")
        instance_id, state, body, created, updated = row
        doc = json.loads(body)
        doc.update({"job_id": job_id, "instance_id": instance_id, "state": state, "created_at": created, "updated_at": updated})
        return doc

    # -- roster versions ---------------------------------------------------

    def add_roster_version(
        self,
        instance_id: str,
        roster: dict,
        report: dict | None,
        findings: list[dict],
        author: str,
    ) -> int:
        hard_count = sum(1 for f in findings if f.get("severity") == "hard")
        with self._lock, self._conn:
            row = self._conn.execute(
                "SELECT MAX(version) FROM roster_versions WHERE instance_id=?", (instance_id,)
            ).fetchone()
            version = (row[0] or 0) + 1
            self._conn.execute(
                "INSERT INTO roster_versions (instance_id, version, status, author, created_at, roster, report, findings, hard_count) "
                "VALUES (?,?,?,?,?,?,?,?,?)",
                (
                    instance_id,
                    version,
                    "draft",
                    author,
                    _now(),
                    json.dumps(roster),
                    json.dumps(report) if report is not None else None,
                    json.dumps(findings),
                    hard_count,
                ),
            )
        return version

    def get_roster_version(self, instance_id: str, version: int | None = None) -> dict:
        if version is None:
            row = self._conn.execute(
                "SELECT MAX(version) FROM roster_versions WHERE instance_id=?", (instance_id,)
            ).fetchone()
            version = row[0]
            if version is None:
                raise KeyError(f"no roster versions for instance {instance_id!r}")
        row = self._conn.execute(
            "SELECT status, author, created_at, roster, report, findings, hard_count "
            "FROM roster_versions WHERE instance_id=? AND version=?",
            (instance_id, version),
        ).fetchone()
        if row is None:
            raise KeyError(f"no roster version {version} for instance {instance_id!r}")
        status, author, created, roster, report, findings, hard_count = row
        published = self.published_version(instance_id)
        return {
            "instance_id": instance_id,
            "version": version,
            "status": "published" if version == published else status,
            "author": author,
            "created_at": created,
            "roster": json.loads(roster),
            "report": json.loads(report) if report else None,
            "findings": json.loads(findings) if findings else [],
            "hard_count": hard_count,
        }

    def list_roster_versions(self, instance_id: str) -> list[dict]:
        rows = self._conn.execute(
            "SELECT version, status, author, created_at, hard_count FROM roster_versions "
            "WHERE instance_id=? ORDER BY version",
            (instance_id,),
        ).fetchall()
        published = self.published_version(instance_id)
        return [
            {
                "version": v,
                "status": "published" if v == published else status,
                "author": author,
                "created_at": created,
                "hard_count": hard,
            }
            for v, status, author, created, hard in rows
        ]

    def published_version(self, instance_id: str) -> int | None:
        row = self._conn.execute(
            "SELECT version FROM published_roster WHERE instance_id=?", (instance_id,)
        ).fetchone()
        return row[0] if row else None

    def publish_roster(self, instance_id: str, version: int, author: str) -> None:
        with self._lock, self._conn:
            row = self._conn.execute(
                "SELECT hard_count FROM roster_versions WHERE instance_id=? AND version=?",
                (instance_id, version),
            ).fetchone()
            if row is None:
                raise KeyError(f"no roster version {version} for instance {instance_id!r}")
            if row[0] > 0:
                raise PublishRejectedError(
                    f"roster version {version} has {row[0]} hard violation(s) and cannot be published"
                )
            # The pointer is the single source of publication truth; rows keep
            # their draft status so superseded versions never read as published.
            self._conn.execute(
                "INSERT INTO published_roster (instance_id, version) VALUES (?,?) "
                "ON CONFLICT(instance_id) DO UPDATE SET version=excluded.version",
                (instance_id, version),
            )

    # -- auth tokens --------------------------------------------------------

    def create_token(self, role: str, physician_id: str | None = None) -> str:
        token = uuid.uuid4().hex
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO tokens (token, role, physician_id, created_at) VALUES (?,?,?,?)",
                (token, role, physician_id, _now()),
            )
        return token

    def resolve_token(self, token: str) -> dict | None:
        row = self._conn.execute(
            "SELECT role, physician_id FROM tokens WHERE token=?", (token,)
        ).fetchone()
        if row is None:
            return None
        return {"role": row[0], "physician_id": row[1]}
