"""HTTP session service: interactive runs against live engine sessions."""

import pytest
from fastapi.testclient import TestClient

from epike.harness import builtin_scenario_path, load_scenario, scenario_to_json
from epike.service import create_app


@pytest.fixture()
def client():
    return TestClient(create_app())


def create(client, body):
    response = client.post("/sessions", json=body)
    assert response.status_code == 201, response.text
    return response.json()


def shape(events):
    return [(e["actor"], e["kind"], e["payload"]) for e in events]


class TestCreation:
    def test_builtin_scenario(self, client):
        session = create(client, {"builtin": "case1", "human": "H"})
        assert session["agents"] == ["H", "R"]
        assert session["human"] == "H"
        assert session["status"] == "running"
        assert set(session) >= {"id", "name", "seq", "pending_question"}

    def test_inline_scenario_object(self, client):
        blob = scenario_to_json(load_scenario(builtin_scenario_path("case1")))
        session = create(client, {"scenario": blob, "human": "H"})
        assert session["name"] == "case1"

    def test_listing_and_close(self, client):
        session = create(client, {"builtin": "case1", "human": "H"})
        listed = client.get("/sessions").json()
        assert [s["id"] for s in listed] == [session["id"]]
        assert client.delete(f"/sessions/{session['id']}").json() == {"closed": session["id"]}
        assert client.get("/sessions").json() == []
        assert client.get(f"/sessions/{session['id']}").status_code == 404

    @pytest.mark.parametrize(
        "body",
        [
            {"builtin": "definitely-not-shipped", "human": "H"},
            {"builtin": "case1", "human": "X"},
            {"builtin": "case1", "scenario": {"format": 1}, "human": "H"},
            {"human": "H"},
            {"builtin": "case1", "human": "H", "engine": "scripted"},
        ],
    )
    def test_bad_requests(self, client, body):
        assert client.post("/sessions", json=body).status_code == 400

    def test_unknown_session_is_404(self, client):
        assert client.get("/sessions/missing").status_code == 404
        assert client.get("/sessions/missing/view").status_code == 404
        assert client.post("/sessions/missing/act", json={"kind": "noop"}).status_code == 404
        assert client.delete("/sessions/missing").status_code == 404


class TestCase1Flow:
    """The human grabs the juice; the engine fetches the matching glass."""

    def test_view_shows_designated_worlds_with_subplans(self, client):
        session = create(client, {"builtin": "case1", "human": "H"})
        view = client.get(f"/sessions/{session['id']}/view").json()
        worlds = {w["id"]: w for w in view["worlds"]}
        assert set(worlds) == {"w1", "w2"}
        # The human entertains the rule-free world as the more plausible one.
        assert worlds["w2"]["most_plausible"] and not worlds["w1"]["most_plausible"]
        assert len(worlds["w2"]["subplans"]) == 4  # no rule: all pairings feasible
        assert len(worlds["w1"]["subplans"]) == 2  # C1: matching pairings only
        assert all(set(sp) == {"container", "drink"} for sp in worlds["w1"]["subplans"])

    def test_juice_triggers_glass_in_one_cycle(self, client):
        session = create(client, {"builtin": "case1", "human": "H"})
        view = client.get(f"/sessions/{session['id']}/view").json()
        menu = [(c["kind"], c["payload"]) for c in view["candidates"]]
        assert ("execute", "e_juice") in menu
        response = client.post(
            f"/sessions/{session['id']}/act", json={"kind": "execute", "payload": "e_juice"}
        )
        body = response.json()
        assert shape(body["events"]) == [("H", "execute", "e_juice"), ("R", "execute", "e_glass")]
        assert body["status"] == "success"

    def test_events_cursor(self, client):
        session = create(client, {"builtin": "case1", "human": "H"})
        client.post(f"/sessions/{session['id']}/act", json={"kind": "execute", "payload": "e_juice"})
        full = client.get(f"/sessions/{session['id']}/events", params={"after": 0}).json()
        assert [e["seq"] for e in full["events"]] == [1, 2]
        tail = client.get(f"/sessions/{session['id']}/events", params={"after": 1}).json()
        assert [e["seq"] for e in tail["events"]] == [2]
        assert tail["status"] == "success"
        assert tail["seq"] == 2

    def test_executed_timepoints_reported(self, client):
        session = create(client, {"builtin": "case1", "human": "H"})
        client.post(f"/sessions/{session['id']}/act", json={"kind": "execute", "payload": "e_juice"})
        view = client.get(f"/sessions/{session['id']}/view").json()
        assert view["executed"] == ["e_juice", "e_glass"]


class TestCase2Flow:
    """The engine asks about the drink; the answer unblocks it."""

    def test_question_rendered_and_answer_unblocks(self, client):
        session = create(client, {"builtin": "case2", "human": "H"})
        pending = session["pending_question"]
        assert pending["asker"] == "R"
        assert pending["payload"] == "in(drink=coffee)"
        assert pending["answer"]["kind"] == "explain"
        assert pending["answer"]["answered"] == "yes"

        events = client.get(f"/sessions/{session['id']}/events").json()["events"]
        assert shape(events) == [("R", "ask", "in(drink=coffee)")]
        assert events[0]["askee"] == "H"

        answer = pending["answer"]
        response = client.post(
            f"/sessions/{session['id']}/act",
            json={"kind": answer["kind"], "payload": answer["payload"], "answered": answer["answered"]},
        ).json()
        assert shape(response["events"]) == [
            ("H", "explain", "in(drink=coffee)"),
            ("R", "execute", "e_mug"),
        ]
        assert client.get(f"/sessions/{session['id']}/view").json()["pending_question"] is None

        done = client.post(
            f"/sessions/{session['id']}/act", json={"kind": "execute", "payload": "e_coffee"}
        ).json()
        assert done["status"] == "success"

    def test_engine_blocks_until_answer(self, client):
        session = create(client, {"builtin": "case2", "human": "H"})
        # Nothing but the question may happen while the answer is pending.
        events = client.get(f"/sessions/{session['id']}/events").json()
        assert [e["kind"] for e in events["events"]] == ["ask"]
        assert events["status"] == "running"


class TestProactiveExplanation:
    """Container-first orderings force the engine to explain before executing."""

    def test_engine_explains_then_executes_at_creation(self, client):
        session = create(client, {"builtin": "case1_ordering", "human": "H"})
        events = client.get(f"/sessions/{session['id']}/events").json()["events"]
        kinds = [(e["actor"], e["kind"]) for e in events]
        assert ("R", "explain") in kinds and ("R", "execute") in kinds
        assert kinds.index(("R", "explain")) < kinds.index(("R", "execute"))
        payloads = {e["payload"] for e in events if e["kind"] == "execute"}
        assert payloads == {"e_mug"}

        done = client.post(
            f"/sessions/{session['id']}/act", json={"kind": "execute", "payload": "e_coffee"}
        ).json()
        assert done["status"] == "success"


class TestBaselineEngine:
    def test_pike_engine_fails_case1(self, client):
        session = create(client, {"builtin": "case1", "human": "H", "engine": "pike"})
        # The baseline engine commits to the mug without waiting for the drink.
        events = client.get(f"/sessions/{session['id']}/events").json()["events"]
        assert shape(events) == [("R", "execute", "e_mug")]
        response = client.post(
            f"/sessions/{session['id']}/act", json={"kind": "execute", "payload": "e_juice"}
        ).json()
        assert response["status"] == "failure"
        assert client.get(f"/sessions/{session['id']}").json()["status"] == "failure"


class TestActValidation:
    def test_rejects_noop_and_foreign_and_off_menu(self, client):
        session = create(client, {"builtin": "case1", "human": "H"})
        url = f"/sessions/{session['id']}/act"
        assert client.post(url, json={"kind": "noop"}).status_code == 400
        # e_mug is owned by the robot, not the human.
        assert client.post(url, json={"kind": "execute", "payload": "e_mug"}).status_code == 400
        # Undecodable payloads are a 400, not a server error.
        assert client.post(url, json={"kind": "execute", "payload": "e_nonsense"}).status_code == 400
        assert client.post(url, json={"kind": "explain", "payload": "???"}).status_code == 400

    def test_off_menu_explanation_rejected(self, client):
        session = create(client, {"builtin": "case1", "human": "H"})
        url = f"/sessions/{session['id']}/act"
        # The human does not believe C1 holds, so explaining it is off-menu.
        response = client.post(
            url,
            json={
                "kind": "explain",
                "payload": "in(((container=mug & drink=coffee) | (container=glass & drink=juice)))",
            },
        )
        assert response.status_code == 400
        assert "menu" in response.json()["detail"]
