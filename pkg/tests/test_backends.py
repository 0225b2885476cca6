import pytest
import requests

from onto_tamp.backends import HttpBackend, MockBackend, create_backend
from onto_tamp.errors import AuthError, BackendTimeoutError, ConfigError, MockError, TransportError
from onto_tamp.executor import guidance_for
from onto_tamp.mock_llm import GUIDED, NAIVE, mock_generate
from onto_tamp.models import PICK, BackendConfig
from onto_tamp.planner import parse_plan, validate_plan
from onto_tamp.prompts import compose
from onto_tamp.utils import llm_client
from onto_tamp.world import describe_state

ENDPOINT = "http://localhost:8080/v1/chat/completions"
REPLY = "Full Plan =\n    Pick ([bowl],{})\n    Place ([bowl]),{0.0,0.0,0.05,0.0}"


class DummyResponse:
    def __init__(self, status_code, payload=None):
        self.status_code = status_code
        self._payload = payload

    def json(self):
        if self._payload is None:
            raise ValueError("no JSON")
        return self._payload


def _reply(text):
    return DummyResponse(200, {"choices": [{"message": {"content": text}}]})


def _prompt(kb, template, state, text, mode='onto'):
    guidance = guidance_for(kb, text, state, mode)
    return compose(template, guidance, describe_state(kb, state), text)


def _picks(text):
    return [a.object for a in parse_plan(text).actions if a.verb == PICK]


def test_guided_mock_follows_the_guidance(kb, template, task_by_id, scene):
    task = task_by_id[2]
    state, _ = scene(task.scene)
    answer = mock_generate(GUIDED, _prompt(kb, template, state, task.prompt))
    assert _picks(answer) == ['bowl', 'banana', 'apple']
    assert validate_plan(parse_plan(answer), state) == []


def test_naive_mock_follows_mention_order(kb, template, task_by_id, scene):
    task = task_by_id[2]
    state, _ = scene(task.scene)
    answer = mock_generate(NAIVE, _prompt(kb, template, state, task.prompt, mode='baseline'))
    assert _picks(answer) == ['banana', 'apple', 'bowl']


def test_mock_answers_are_deterministic(kb, template, task_by_id, scene):
    task = task_by_id[5]
    state, _ = scene(task.scene)
    prompt = _prompt(kb, template, state, task.prompt)
    assert mock_generate(GUIDED, prompt) == mock_generate(GUIDED, prompt)
    assert _picks(mock_generate(GUIDED, prompt)) == ['cracker_box', 'sugar_box', 'tomato_can', 'cup', 'plate']


def test_mock_rejects_unstructured_prompts():
    with pytest.raises(MockError):
        mock_generate(GUIDED, "just text")
    with pytest.raises(MockError):
        mock_generate('creative', "just text")


def test_backends_record_latency(kb, template, scene):
    state, _ = scene('scene_a')
    backend = create_backend('mock-guided')
    assert isinstance(backend, MockBackend)
    assert backend.label == 'mock-guided'
    backend.request_plan(_prompt(kb, template, state, "put bowl in plate"))
    assert backend.calls == 1
    assert backend.latencies[0] >= 0.0


def test_http_config_needs_endpoint_and_model():
    with pytest.raises(ConfigError):
        BackendConfig(kind='http', endpoint=ENDPOINT)
    with pytest.raises(ConfigError):
        BackendConfig(kind='gpt')


@pytest.fixture
def http_backend():
    return create_backend(BackendConfig(kind='http', endpoint=ENDPOINT, model='test-model',
                                        credential_env='ONTO_TAMP_TEST_KEY'))


def test_http_backend_posts_a_chat_completion(monkeypatch, http_backend):
    monkeypatch.setenv('ONTO_TAMP_TEST_KEY', 'secret')
    captured = {}

    def fake_post(url, headers=None, json=None, timeout=0):
        captured.update(url=url, headers=headers, payload=json, timeout=timeout)
        return _reply(REPLY)

    monkeypatch.setattr(llm_client.requests, 'post', fake_post)

    assert isinstance(http_backend, HttpBackend)
    assert http_backend.request_plan("plan please") == REPLY
    assert captured['url'] == ENDPOINT
    assert captured['headers']['Authorization'] == "Bearer secret"
    assert captured['payload']['model'] == 'test-model'
    assert captured['payload']['messages'] == [{"role": "user", "content": "plan please"}]
    assert captured['payload']['temperature'] == 0.0


def test_missing_credential_fails_before_any_request(monkeypatch, http_backend):
    monkeypatch.delenv('ONTO_TAMP_TEST_KEY', raising=False)

    def fake_post(*args, **kwargs):
        raise AssertionError("no request expected")

    monkeypatch.setattr(llm_client.requests, 'post', fake_post)
    with pytest.raises(AuthError, match="ONTO_TAMP_TEST_KEY"):
        http_backend.request_plan("plan please")


def test_transport_errors_are_retried_once(monkeypatch, http_backend):
    monkeypatch.setenv('ONTO_TAMP_TEST_KEY', 'secret')
    answers = [DummyResponse(502), _reply(REPLY)]
    monkeypatch.setattr(llm_client.requests, 'post', lambda *args, **kwargs: answers.pop(0))

    assert http_backend.request_plan("plan please") == REPLY
    assert answers == []


def test_second_transport_error_is_raised(monkeypatch, http_backend):
    monkeypatch.setenv('ONTO_TAMP_TEST_KEY', 'secret')
    calls = []

    def fake_post(*args, **kwargs):
        calls.append(1)
        return DummyResponse(500)

    monkeypatch.setattr(llm_client.requests, 'post', fake_post)
    with pytest.raises(TransportError, match="HTTP 500"):
        http_backend.request_plan("plan please")
    assert len(calls) == 2


@pytest.mark.parametrize('response, error', [
    (DummyResponse(401), AuthError),
    (DummyResponse(200), TransportError),
    (DummyResponse(200, {"choices": []}), TransportError),
    (DummyResponse(200, {"choices": [{"message": {"content": 3}}]}), TransportError),
])
def test_bad_replies(monkeypatch, http_backend, response, error):
    monkeypatch.setenv('ONTO_TAMP_TEST_KEY', 'secret')
    monkeypatch.setattr(llm_client.requests, 'post', lambda *args, **kwargs: response)
    with pytest.raises(error):
        http_backend.request_plan("plan please")


def test_timeouts_are_not_retried(monkeypatch, http_backend):
    monkeypatch.setenv('ONTO_TAMP_TEST_KEY', 'secret')
    calls = []

    def fake_post(*args, **kwargs):
        calls.append(1)
        raise requests.exceptions.Timeout()

    monkeypatch.setattr(llm_client.requests, 'post', fake_post)
    with pytest.raises(BackendTimeoutError):
        http_backend.request_plan("plan please")
    assert len(calls) == 1


def test_extract_text_follows_a_custom_path():
    assert llm_client.extract_text({"output": [{"text": "hi"}]}, "output.0.text") == "hi"
