"""End-to-end behavior of the HTTP API, the CLI, and the shared core.

Every 2xx JSON body in this file passes through ``_ok``, which validates it
against the bundled response schema for its endpoint, so the whole suite
doubles as the response-contract check.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from studypilot.cli import main as cli_main
from studypilot.config import ServiceConfig
from studypilot.gateway import schema_errors
from studypilot.model import validate_plan
from studypilot.planner import check_plan
from studypilot.service import CoreApp, create_app

from _support import parse_ical
from conftest import COSMO, REFRACTION_QUERY, SCENARIO_ANSWERS, SCENARIO_GOAL


def _config(tmp_path: Path, **over) -> ServiceConfig:
    return ServiceConfig(data_dir=str(tmp_path / "data"), **over)


def _client(tmp_path: Path, **over) -> TestClient:
    return TestClient(create_app(_config(tmp_path, **over)))


def _ok(resp, schema: str | None = None, status: int = 200) -> dict:
    assert resp.status_code == status, f"{resp.status_code}: {resp.text[:400]}"
    body = resp.json()
    if schema is not None:
        errs = schema_errors(schema, body)
        assert errs == [], errs
    return body


def _make_plan(client: TestClient) -> dict:
    resp = client.post(
        "/plans", json={"course_id": COSMO, "dimension_answers": SCENARIO_ANSWERS}
    )
    return _ok(resp, "plan_response", 201)


def _study_sessions(plan_body: dict) -> list[dict]:
    return [s for s in plan_body["plan"]["sessions"] if s["kind"] == "study"]


# --------------------------------------------------------------------------
# catalog endpoints


def test_healthz(tmp_path):
    client = _client(tmp_path)
    resp = client.get("/healthz")
    assert resp.status_code == 200
    assert resp.text == "ok"


def test_recommend_ranks_cosmology_first(tmp_path):
    client = _client(tmp_path)
    body = _ok(client.post("/courses/recommend", json={"goal_text": SCENARIO_GOAL}),
               "recommendations")
    results = body["results"]
    assert results and results[0]["course_id"] == COSMO
    scores = [r["score"] for r in results]
    assert scores == sorted(scores, reverse=True)
    assert all(s > 0 for s in scores)


def test_recommend_empty_goal_is_400(tmp_path):
    client = _client(tmp_path)
    resp = client.post("/courses/recommend", json={"goal_text": "   "})
    assert resp.status_code == 400
    assert resp.json()["error"]["code"] == "empty_query"


def test_recommend_malformed_json_body_is_400(tmp_path):
    client = _client(tmp_path)
    resp = client.post(
        "/courses/recommend",
        content=b'{"goal_text": ',
        headers={"content-type": "application/json"},
    )
    assert resp.status_code == 400
    assert resp.json()["error"]["code"] == "invalid_request"


def test_recommend_missing_field_is_400(tmp_path):
    client = _client(tmp_path)
    resp = client.post("/courses/recommend", json={"k": 3})
    assert resp.status_code == 400


def test_recommend_k_zero_is_empty(tmp_path):
    client = _client(tmp_path)
    body = _ok(
        client.post("/courses/recommend", json={"goal_text": SCENARIO_GOAL, "k": 0}),
        "recommendations",
    )
    assert body["results"] == []


def test_topics_lists_catalog_topics(tmp_path):
    client = _client(tmp_path)
    body = _ok(client.get("/courses/topics"), "topics")
    assert "astronomy" in body["topics"]
    assert body["topics"] == sorted(body["topics"])


def test_courses_with_topic_filter(tmp_path):
    client = _client(tmp_path)
    everything = _ok(client.get("/courses"), "courses")
    assert {c["course_id"] for c in everything["courses"]} >= {COSMO, "intro-physics"}
    astro = _ok(client.get("/courses", params={"topic": "astronomy"}), "courses")
    assert [c["course_id"] for c in astro["courses"]] == [COSMO]


def test_syllabus_endpoint(tmp_path):
    client = _client(tmp_path)
    body = _ok(client.get(f"/courses/{COSMO}/syllabus"), "syllabus")
    assert sum(len(u["lessons"]) for u in body["units"]) == 14
    assert client.get("/courses/no-such-course/syllabus").status_code == 404


# --------------------------------------------------------------------------
# plan creation


def test_create_plan_matches_offline_builder(tmp_path, golden_plan):
    client = _client(tmp_path)
    body = _make_plan(client)
    assert body["provenance"] == "deterministic"
    assert body["warnings"] == []
    assert body["plan"]["sessions"] == golden_plan.to_doc()["sessions"]
    assert len(body["events"]) == len(body["plan"]["sessions"]) == 36


def test_create_plan_unknown_course_is_404(tmp_path):
    client = _client(tmp_path)
    resp = client.post(
        "/plans", json={"course_id": "no-such", "dimension_answers": SCENARIO_ANSWERS}
    )
    assert resp.status_code == 404


def test_create_plan_unextractable_answers_is_422(tmp_path):
    client = _client(tmp_path)
    resp = client.post(
        "/plans",
        json={
            "course_id": COSMO,
            "dimension_answers": {"time": "whenever works", "pace": "", "path": ""},
        },
    )
    assert resp.status_code == 422
    assert resp.json()["error"]["code"] == "unextractable"


def test_create_plan_requires_answers_or_profile(tmp_path):
    client = _client(tmp_path)
    resp = client.post("/plans", json={"course_id": COSMO})
    assert resp.status_code == 422


def test_create_plan_from_profile_doc(tmp_path, scenario_profile, golden_plan):
    client = _client(tmp_path)
    resp = client.post(
        "/plans", json={"course_id": COSMO, "profile": scenario_profile.to_doc()}
    )
    body = _ok(resp, "plan_response", 201)
    assert body["plan"]["sessions"] == golden_plan.to_doc()["sessions"]


def test_create_plan_start_date_override(tmp_path):
    client = _client(tmp_path)
    resp = client.post(
        "/plans",
        json={
            "course_id": COSMO,
            "dimension_answers": SCENARIO_ANSWERS,
            "start_date": "2025-03-10",
        },
    )
    body = _ok(resp, "plan_response", 201)
    assert body["plan"]["sessions"][0]["date"] == "2025-03-10"


def test_create_plan_llm_garbage_falls_back_to_builder(tmp_path, golden_plan):
    script = tmp_path / "script.json"
    script.write_text(
        json.dumps({"script": ["definitely not json"], "repeat_last": True}),
        encoding="utf-8",
    )
    client = _client(tmp_path, llm_mode="mock", llm_script_path=str(script))
    resp = client.post(
        "/plans",
        json={"course_id": COSMO, "dimension_answers": SCENARIO_ANSWERS, "use_llm": True},
    )
    body = _ok(resp, "plan_response", 201)
    assert body["provenance"] == "fallback"
    assert body["plan"]["sessions"] == golden_plan.to_doc()["sessions"]


def test_get_plan_round_trips_create_response(tmp_path):
    client = _client(tmp_path)
    created = _make_plan(client)
    fetched = _ok(client.get(f"/plans/{created['plan_id']}"), "plan_response")
    assert fetched == created
    assert client.get("/plans/nope").status_code == 404


# --------------------------------------------------------------------------
# plan editing


def test_patch_move_within_window(tmp_path):
    client = _client(tmp_path)
    created = _make_plan(client)
    plan_id = created["plan_id"]
    target = created["plan"]["sessions"][2]  # second study block of day 1
    assert target["start"] == "18:50"
    resp = client.patch(
        f"/plans/{plan_id}/events",
        json={
            "edits": [
                # Session ids are accepted wherever event ids are.
                {"op": "move", "event_id": target["id"],
                 "new_start": f"{target['date']}T19:00"}
            ]
        },
    )
    body = _ok(resp, "plan_response")
    assert body["plan"]["revision"] == created["plan"]["revision"] + 1
    assert body["warnings"] == []
    moved = next(s for s in body["plan"]["sessions"] if s["id"] == target["id"])
    assert (moved["start"], moved["end"]) == ("19:00", "19:40")
    event = next(e for e in body["events"] if e["session_id"] == target["id"])
    assert event["start"] == f"{target['date']}T19:00"


def test_patch_move_past_window_returns_warning(tmp_path):
    client = _client(tmp_path)
    created = _make_plan(client)
    target = created["plan"]["sessions"][2]
    resp = client.patch(
        f"/plans/{created['plan_id']}/events",
        json={
            "edits": [
                {"op": "move", "event_id": target["id"],
                 "new_start": f"{target['date']}T19:30"}
            ]
        },
    )
    body = _ok(resp, "plan_response")
    assert body["plan"]["revision"] == 2
    assert [w["code"] for w in body["warnings"]] == ["window_exceeded"]


def test_patch_overlap_is_409_and_leaves_plan_untouched(tmp_path):
    client = _client(tmp_path)
    created = _make_plan(client)
    plan_id = created["plan_id"]
    target = created["plan"]["sessions"][2]
    resp = client.patch(
        f"/plans/{plan_id}/events",
        json={
            "edits": [
                {"op": "move", "event_id": target["id"],
                 "new_start": f"{target['date']}T18:10"}
            ]
        },
    )
    assert resp.status_code == 409
    error = resp.json()["error"]
    assert error["code"] == "overlap_after_edit"
    assert error["violations"] and error["violations"][0]["code"] == "overlap"
    fetched = _ok(client.get(f"/plans/{plan_id}"), "plan_response")
    assert fetched == created  # revision 1 still the head


def test_patch_delete_breaking_coverage_is_409(tmp_path):
    client = _client(tmp_path)
    created = _make_plan(client)
    sole = created["plan"]["sessions"][0]  # only segment of an easy lesson
    resp = client.patch(
        f"/plans/{created['plan_id']}/events",
        json={"edits": [{"op": "delete", "event_id": sole["id"]}]},
    )
    assert resp.status_code == 409
    assert resp.json()["error"]["code"] == "edit_conflict"


def test_patch_unknown_session_is_404(tmp_path):
    client = _client(tmp_path)
    created = _make_plan(client)
    resp = client.patch(
        f"/plans/{created['plan_id']}/events",
        json={"edits": [{"op": "move", "event_id": "ghost",
                         "new_start": "2025-01-01T19:00"}]},
    )
    assert resp.status_code == 404


def test_patch_malformed_edit_is_422(tmp_path):
    client = _client(tmp_path)
    created = _make_plan(client)
    resp = client.patch(
        f"/plans/{created['plan_id']}/events",
        json={"edits": [{"op": "move", "event_id": "x"}]},  # no new_start
    )
    assert resp.status_code == 422


def test_patch_malformed_body_is_400(tmp_path):
    client = _client(tmp_path)
    created = _make_plan(client)
    resp = client.patch(
        f"/plans/{created['plan_id']}/events", json={"edits": {"op": "move"}}
    )
    assert resp.status_code == 400


def test_patch_events_accepts_calendar_event_ids(tmp_path):
    client = _client(tmp_path)
    created = _make_plan(client)
    target = created["plan"]["sessions"][2]
    event = next(e for e in created["events"] if e["session_id"] == target["id"])
    resp = client.patch(
        f"/plans/{created['plan_id']}/events",
        json={
            "edits": [
                {"op": "move", "event_id": event["event_id"],
                 "new_start": f"{target['date']}T19:00"}
            ]
        },
    )
    body = _ok(resp, "plan_response")
    moved = next(s for s in body["plan"]["sessions"] if s["id"] == target["id"])
    assert moved["start"] == "19:00"


# --------------------------------------------------------------------------
# iCalendar export


def test_ical_endpoint_exports_study_sessions(tmp_path):
    client = _client(tmp_path)
    created = _make_plan(client)
    resp = client.get(f"/plans/{created['plan_id']}/ical")
    assert resp.status_code == 200
    assert resp.headers["content-type"].startswith("text/calendar")
    events = parse_ical(resp.text)["events"]
    assert len(events) == len(_study_sessions(created)) == 24
    summaries = {e["SUMMARY"] for e in events}
    assert "Scale of Earth and Sun (Easy)" in summaries
    assert not any(s == "Break" for s in summaries)
    assert client.get("/plans/nope/ical").status_code == 404


# --------------------------------------------------------------------------
# progress and state


def test_state_and_progress_flow(tmp_path):
    client = _client(tmp_path)
    created = _make_plan(client)
    plan_id = created["plan_id"]
    state = _ok(client.get(f"/plans/{plan_id}/state"), "learner_state")
    assert state["current_lesson_id"] == "scale-earth-sun"
    assert state["completed_session_ids"] == []

    first = _study_sessions(created)[0]
    after = _ok(
        client.post("/progress", json={"plan_id": plan_id, "session_id": first["id"]}),
        "learner_state",
    )
    assert first["id"] in after["completed_session_ids"]
    assert after["current_lesson_id"] == "scale-galaxy-universe"


def test_progress_explicit_current_lesson(tmp_path):
    client = _client(tmp_path)
    created = _make_plan(client)
    first = _study_sessions(created)[0]
    body = _ok(
        client.post(
            "/progress",
            json={
                "plan_id": created["plan_id"],
                "session_id": first["id"],
                "current_lesson_id": "quasars-galactic-collisions",
            },
        ),
        "learner_state",
    )
    assert body["current_lesson_id"] == "quasars-galactic-collisions"


def test_progress_error_codes(tmp_path):
    client = _client(tmp_path)
    created = _make_plan(client)
    plan_id = created["plan_id"]
    assert (
        client.post("/progress", json={"plan_id": plan_id, "session_id": "ghost"}).status_code
        == 404
    )
    assert (
        client.post("/progress", json={"plan_id": "nope", "session_id": "s"}).status_code
        == 404
    )
    first = _study_sessions(created)[0]
    resp = client.post(
        "/progress",
        json={
            "plan_id": plan_id,
            "session_id": first["id"],
            "current_lesson_id": "not-a-lesson",
        },
    )
    assert resp.status_code == 422


# --------------------------------------------------------------------------
# transcript ingestion


def test_ingest_course_builds_index(tmp_path):
    client = _client(tmp_path)
    body = _ok(client.post("/transcripts/ingest", json={"course_id": COSMO}),
               "ingest_response")
    got = {entry["lesson_id"] for entry in body["ingested"]}
    assert got == {
        "scale-earth-sun",
        "plate-tectonics",
        "seismic-waves",
        "refraction-seismic-waves",
    }
    assert all(entry["segments"] > 0 and entry["chunks"] > 0 for entry in body["ingested"])
    assert body["indexed_courses"] == [COSMO]


def test_ingest_single_lesson_content(tmp_path):
    client = _client(tmp_path)
    vtt = "WEBVTT\n\n00:00.000 --> 00:08.000\nTides follow the moon.\n"
    body = _ok(
        client.post(
            "/transcripts/ingest",
            json={"lesson_id": "earth-formation", "content": vtt, "format": "vtt"},
        ),
        "ingest_response",
    )
    assert body["ingested"][0]["segments"] == 1
    assert COSMO in body["indexed_courses"]


def test_ingest_without_target_is_422(tmp_path):
    client = _client(tmp_path)
    assert client.post("/transcripts/ingest", json={}).status_code == 422


def test_ingest_unknown_course_is_404(tmp_path):
    client = _client(tmp_path)
    assert (
        client.post("/transcripts/ingest", json={"course_id": "nope"}).status_code == 404
    )


# --------------------------------------------------------------------------
# tutoring


def test_ask_before_coverage_is_typed_not_covered(tmp_path):
    client = _client(tmp_path)
    _ok(client.post("/transcripts/ingest", json={"course_id": COSMO}), "ingest_response")
    created = _make_plan(client)
    plan_id = created["plan_id"]
    body = _ok(
        client.post("/tutor/ask", json={"plan_id": plan_id, "query": REFRACTION_QUERY}),
        "answer",
    )
    assert body["kind"] == "not_covered"
    assert body["allowed_lessons"] == ["scale-earth-sun"]

    state = _ok(client.get(f"/plans/{plan_id}/state"), "learner_state")
    assert len(state["question_log"]) == 1
    assert state["question_log"][0]["query"] == REFRACTION_QUERY


def _advance_until(client: TestClient, created: dict, lesson_id: str) -> None:
    plan_id = created["plan_id"]
    for session in _study_sessions(created):
        if session["lesson_id"] == lesson_id:
            return
        _ok(
            client.post("/progress", json={"plan_id": plan_id, "session_id": session["id"]}),
            "learner_state",
        )
    raise AssertionError(f"{lesson_id} not in plan")


def test_ask_after_coverage_cites_allowed_material(tmp_path):
    client = _client(tmp_path)
    _ok(client.post("/transcripts/ingest", json={"course_id": COSMO}), "ingest_response")
    created = _make_plan(client)
    plan_id = created["plan_id"]
    _advance_until(client, created, "refraction-seismic-waves")
    state = _ok(client.get(f"/plans/{plan_id}/state"), "learner_state")
    assert state["current_lesson_id"] == "refraction-seismic-waves"

    body = _ok(
        client.post("/tutor/ask", json={"plan_id": plan_id, "query": REFRACTION_QUERY}),
        "answer",
    )
    assert body["kind"] == "answer"
    assert body["relevant_lesson"] == "Refraction of seismic waves"
    assert body["provenance"] == "extractive"
    covered = {s["lesson_id"] for s in _study_sessions(created)[: len(state["completed_session_ids"])]}
    covered.add("refraction-seismic-waves")
    for citation in body["citations"]:
        assert citation["lesson_id"] in covered
        assert 0 <= citation["start_s"] < citation["end_s"]


def test_ask_error_codes(tmp_path):
    client = _client(tmp_path)
    created = _make_plan(client)
    resp = client.post("/tutor/ask", json={"plan_id": created["plan_id"], "query": "  "})
    assert resp.status_code == 400
    resp = client.post("/tutor/ask", json={"plan_id": "nope", "query": "why?"})
    assert resp.status_code == 404


# --------------------------------------------------------------------------
# durability and locking


def test_restart_reuses_stored_plans_and_state(tmp_path):
    config = _config(tmp_path)
    with TestClient(create_app(config)) as client:
        _ok(client.post("/transcripts/ingest", json={"course_id": COSMO}), "ingest_response")
        created = _make_plan(client)
        plan_id = created["plan_id"]
        first = _study_sessions(created)[0]
        _ok(client.post("/progress", json={"plan_id": plan_id, "session_id": first["id"]}),
            "learner_state")
        state_before = _ok(client.get(f"/plans/{plan_id}/state"), "learner_state")

    # Fresh process-equivalent: new app, new core, same data directory.
    with TestClient(create_app(config)) as client:
        fetched = _ok(client.get(f"/plans/{plan_id}"), "plan_response")
        assert fetched == created
        assert _ok(client.get(f"/plans/{plan_id}/state"), "learner_state") == state_before
        target = created["plan"]["sessions"][2]
        body = _ok(
            client.patch(
                f"/plans/{plan_id}/events",
                json={"edits": [{"op": "move", "event_id": target["id"],
                                 "new_start": f"{target['date']}T19:00"}]},
            ),
            "plan_response",
        )
        assert body["plan"]["revision"] == 2


def test_concurrent_edits_are_serialized_per_plan(tmp_path, cosmo_syllabus):
    core = CoreApp(_config(tmp_path))
    created = core.create_plan(COSMO, dimension_answers=SCENARIO_ANSWERS)
    plan_id = created["plan_id"]
    sessions = created["plan"]["sessions"]
    # Second study block of six different days: independent, always-legal moves.
    targets = [(sessions[3 * day + 2]["id"], sessions[3 * day + 2]["date"])
               for day in range(6)]
    errors: list[Exception] = []

    def move(session_id: str, date: str) -> None:
        try:
            core.edit_events(
                plan_id,
                [{"op": "move", "event_id": session_id, "new_start": f"{date}T19:00"}],
            )
        except Exception as exc:  # pragma: no cover - fails the assert below
            errors.append(exc)

    threads = [threading.Thread(target=move, args=t) for t in targets]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    assert errors == []
    final = core.plan_response(plan_id)
    assert final["plan"]["revision"] == 1 + len(targets)
    by_id = {s["id"]: s for s in final["plan"]["sessions"]}
    assert all(by_id[sid]["start"] == "19:00" for sid, _ in targets)
    assert check_plan(validate_plan(final["plan"]), cosmo_syllabus) == []


def test_concurrent_progress_has_no_lost_updates(tmp_path):
    core = CoreApp(_config(tmp_path))
    created = core.create_plan(COSMO, dimension_answers=SCENARIO_ANSWERS)
    plan_id = created["plan_id"]
    ids = [s["id"] for s in _study_sessions(created)[:8]]

    threads = [
        threading.Thread(target=core.progress, args=(plan_id, sid)) for sid in ids
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    state = core.state_doc(plan_id)
    assert set(ids) <= set(state["completed_session_ids"])


# --------------------------------------------------------------------------
# CLI


@pytest.fixture()
def cli_env(tmp_path):
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({"data_dir": str(tmp_path / "cli-data")}), encoding="utf-8")
    return CliRunner(), str(cfg)


def _run(runner: CliRunner, cfg: str, *args: str):
    result = runner.invoke(cli_main, ["--config", cfg, *args], catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


def test_cli_catalog_commands(cli_env):
    runner, cfg = cli_env
    topics = json.loads(_run(runner, cfg, "topics").output)
    assert "astronomy" in topics["topics"]

    courses = json.loads(_run(runner, cfg, "courses", "--topic", "astronomy").output)
    assert [c["course_id"] for c in courses["courses"]] == [COSMO]

    ranked = json.loads(_run(runner, cfg, "recommend", SCENARIO_GOAL).output)
    assert ranked["results"][0]["course_id"] == COSMO

    syllabus = json.loads(_run(runner, cfg, "syllabus", COSMO).output)
    assert sum(len(u["lessons"]) for u in syllabus["units"]) == 14


def test_cli_plan_lifecycle(cli_env, tmp_path, golden_plan):
    runner, cfg = cli_env
    created = json.loads(
        _run(
            runner, cfg, "plan", "generate", COSMO,
            "--time", SCENARIO_ANSWERS["time"],
            "--pace", SCENARIO_ANSWERS["pace"],
            "--path", SCENARIO_ANSWERS["path"],
        ).output
    )
    assert created["plan"]["sessions"] == golden_plan.to_doc()["sessions"]
    plan_id = created["plan_id"]

    shown = json.loads(_run(runner, cfg, "plan", "show", plan_id).output)
    assert shown == created

    target = created["plan"]["sessions"][2]
    edits = json.dumps(
        [{"op": "move", "event_id": target["id"], "new_start": f"{target['date']}T19:00"}]
    )
    edited = json.loads(_run(runner, cfg, "plan", "edit", plan_id, edits).output)
    assert edited["plan"]["revision"] == 2

    out = tmp_path / "plan.ics"
    _run(runner, cfg, "plan", "ical", plan_id, "-o", str(out))
    text = out.read_bytes().decode("utf-8")  # keep the CRLF line endings
    assert text.startswith("BEGIN:VCALENDAR\r\n")
    assert len(parse_ical(text)["events"]) == 24


def test_cli_edit_accepts_at_file(cli_env, tmp_path):
    runner, cfg = cli_env
    created = json.loads(
        _run(
            runner, cfg, "plan", "generate", COSMO,
            "--time", SCENARIO_ANSWERS["time"],
            "--pace", SCENARIO_ANSWERS["pace"],
            "--path", SCENARIO_ANSWERS["path"],
        ).output
    )
    target = created["plan"]["sessions"][2]
    edits_file = tmp_path / "edits.json"
    edits_file.write_text(
        json.dumps([{"op": "move", "event_id": target["id"],
                     "new_start": f"{target['date']}T19:00"}]),
        encoding="utf-8",
    )
    edited = json.loads(
        _run(runner, cfg, "plan", "edit", created["plan_id"], f"@{edits_file}").output
    )
    assert edited["plan"]["revision"] == 2


def test_cli_tutor_and_progress(cli_env):
    runner, cfg = cli_env
    ingested = json.loads(_run(runner, cfg, "ingest", "--course", COSMO).output)
    assert len(ingested["ingested"]) == 4

    created = json.loads(
        _run(
            runner, cfg, "plan", "generate", COSMO,
            "--time", SCENARIO_ANSWERS["time"],
            "--pace", SCENARIO_ANSWERS["pace"],
            "--path", SCENARIO_ANSWERS["path"],
        ).output
    )
    plan_id = created["plan_id"]

    reply = json.loads(_run(runner, cfg, "tutor", "ask", plan_id, REFRACTION_QUERY).output)
    assert reply["kind"] == "not_covered"

    first = next(s for s in created["plan"]["sessions"] if s["kind"] == "study")
    state = json.loads(_run(runner, cfg, "progress", plan_id, first["id"]).output)
    assert first["id"] in state["completed_session_ids"]


def test_cli_ingest_requires_target(cli_env):
    runner, cfg = cli_env
    result = runner.invoke(cli_main, ["--config", cfg, "ingest"])
    assert result.exit_code == 2
    assert "--course or --lesson" in result.output


def test_cli_openapi_matches_committed_document(cli_env):
    runner, cfg = cli_env
    generated = _run(runner, cfg, "openapi").output
    doc = json.loads(generated)
    assert {
        "/courses/recommend",
        "/plans",
        "/plans/{plan_id}/events",
        "/plans/{plan_id}/ical",
        "/tutor/ask",
        "/progress",
        "/transcripts/ingest",
    } <= set(doc["paths"])
    committed = Path(__file__).resolve().parents[1] / "docs" / "openapi.json"
    assert generated == committed.read_text(encoding="utf-8"), (
        "docs/openapi.json is stale; regenerate with `studypilot openapi -o docs/openapi.json`"
    )


def test_cli_ingest_single_file(cli_env, tmp_path):
    runner, cfg = cli_env
    vtt = tmp_path / "ef.vtt"
    vtt.write_text("WEBVTT\n\n00:00.000 --> 00:07.000\nAccretion built the planet.\n",
                   encoding="utf-8")
    body = json.loads(
        _run(runner, cfg, "ingest", "--lesson", "earth-formation", "--file", str(vtt)).output
    )
    assert body["ingested"][0]["lesson_id"] == "earth-formation"
    assert COSMO in body["indexed_courses"]
