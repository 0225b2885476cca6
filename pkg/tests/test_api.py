import pytest

from onto_tamp import create_app


@pytest.fixture(scope='module')
def app():
    app = create_app()
    app.config.update(TESTING=True, LLM_BACKEND='mock')
    return app


@pytest.fixture
def client(app):
    return app.test_client()


def test_health(client):
    response = client.get('/health')
    assert response.status_code == 200
    assert response.get_json()["status"] == "ok"
    assert response.get_json()["triples"] > 0


def test_tag(client):
    response = client.post('/api/tag', json={"text": "Put bowl, banana and apple in plate"})
    assert response.status_code == 200
    assert response.get_json()["clauses"][0]["objects"] == ["bowl", "banana", "apple"]


def test_tag_errors(client):
    assert client.post('/api/tag', json={}).get_json() == {"error": "Empty text"}
    response = client.post('/api/tag', json={"text": "hello"})
    assert response.status_code == 400
    assert response.get_json()["type"] == "NoTaskFound"


def test_scenes(client):
    scenes = client.get('/api/scenes').get_json()
    assert [s["name"] for s in scenes] == ["scene_a", "scene_b", "scene_c", "scene_d"]
    assert "plate" in scenes[0]["objects"]


def test_plan(client):
    response = client.post('/api/plan', json={
        "text": "Put banana, apple and bowl in plate", "scene": "scene_a",
    })
    data = response.get_json()
    assert response.status_code == 200
    assert data["actions"][0] == "Pick bowl"
    assert data["violations"] == []
    assert data["backend"] == "mock-guided"
    assert "### Environment" in data["prompt"]


def test_plan_needs_a_known_mode(client):
    response = client.post('/api/plan', json={"text": "put bowl in plate", "scene": "scene_a", "mode": "x"})
    assert response.status_code == 400


def test_run_task(client):
    data = client.post('/api/run', json={"task": 1}).get_json()
    assert data["outcome"] == "Success"
    assert data["llm_calls"] == 1
    assert data["final_supports"]["bowl"] == "plate"


def test_run_with_injected_failure(client):
    data = client.post('/api/run', json={"task": 1, "inject_failure": [2]}).get_json()
    assert data["llm_calls"] == 2
    assert data["failure_messages"][0] == "FAILURE: Place bowl: IterationLimit"


def test_run_only_reads_named_scenes(client):
    response = client.post('/api/run', json={"text": "put bowl in plate", "scene": "../../etc/passwd"})
    assert response.status_code == 400
    assert response.get_json()["type"] == "ParseError"


def test_run_needs_input(client):
    response = client.post('/api/run', json={})
    assert response.status_code == 400


@pytest.mark.parametrize('payload, field', [
    ({"task": "two"}, "task"),
    ({"task": [1]}, "task"),
    ({"task": 1, "inject_failure": "first"}, "inject_failure"),
    ({"task": 1, "inject_failure": [None]}, "inject_failure"),
    ({"task": 1, "max_calls": "many"}, "max_calls"),
    ({"task": 1, "max_calls": None}, "max_calls"),
    ({"task": 1, "seed": True}, "seed"),
])
def test_run_rejects_non_integer_fields(client, payload, field):
    response = client.post('/api/run', json=payload)
    assert response.status_code == 400
    data = response.get_json()
    assert data["type"] == "ConfigError"
    assert data["error"] == f"{field} must be an integer"


def test_run_accepts_a_single_injected_call(client):
    data = client.post('/api/run', json={"task": 1, "inject_failure": 2}).get_json()
    assert data["failure_messages"][0] == "FAILURE: Place bowl: IterationLimit"
